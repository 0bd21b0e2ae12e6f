use utilsearch_core::perfmodel::EmpiricalTable;
use utilsearch_core::{
    calibrate_multiplicative, compare_algorithms, select_lookahead, Attribute, AttributeUtility, AttributeValues, Form,
    Lottery, LookaheadDepth, MauError, Outcome, OutcomeScorer, PerfModel, SelectError, UnitConversion, UtilityModel,
};

fn lv(l: u32) -> LookaheadDepth {
    LookaheadDepth::new(l).unwrap()
}

fn table_model() -> UtilityModel {
    let attrs = vec![
        AttributeUtility::linear(Attribute::PathLength, 0.0, 100.0).unwrap(),
        AttributeUtility::linear(Attribute::Time, 0.0, 10.0).unwrap(),
        AttributeUtility::free(Attribute::Space, 10.0).unwrap(),
    ];
    let row = |p, t| AttributeValues::new().with(Attribute::PathLength, p).with(Attribute::Time, t).with(Attribute::Space, 9.0);
    calibrate_multiplicative("table", &[row(20.0, 8.0), row(68.0, 6.0), row(93.0, 4.0)], attrs).unwrap()
}

/// Closed-form solution of the three equivalence rows: with `a = K k_path`
/// and `b = K k_time`, equal products `(1 + a u_p)(1 + b u_t)` over the rows
/// (u_p = .8/.32/.07, u_t = .2/.4/.6) give two bilinear equations whose
/// difference yields `b = 0.23 / 0.054`.
fn hand_utility(path: f64, minutes: f64) -> f64 {
    let b = 0.23 / 0.054;
    let a = 0.2 * b / (0.48 + 0.032 * b);
    let k = (1.0 + a) * (1.0 + b) - 1.0;
    let (up, ut) = (1.0 - path / 100.0, 1.0 - minutes / 10.0);
    ((1.0 + a * up) * (1.0 + b * ut) - 1.0) / k
}

fn outcome(path: u32, minutes: f64) -> Outcome {
    Outcome { path_length: path, time_units: (minutes * 20_000.0) as u64, space_units: 50_000, solved: true }
}

fn table_of(cells: &[(u32, Vec<Outcome>)]) -> PerfModel {
    let mut t = EmpiricalTable::new();
    for (level, outcomes) in cells {
        t.insert(19, *level, outcomes.clone()).unwrap();
    }
    PerfModel::Empirical(t)
}

#[test]
fn hand_built_two_level_choice() {
    let u = table_model();
    let scorer = OutcomeScorer { model: &u, units: UnitConversion::default() };
    let model = table_of(&[(2, vec![outcome(40, 2.0), outcome(80, 2.0)]), (8, vec![outcome(22, 9.5)])]);
    let r = select_lookahead(19, &model, &scorer, &[lv(8), lv(2)]).unwrap();
    let eu2 = 0.5 * hand_utility(40.0, 2.0) + 0.5 * hand_utility(80.0, 2.0);
    let eu8 = hand_utility(22.0, 9.5);
    assert!((r.eu(lv(2)).unwrap() - eu2).abs() < 1e-6, "{:?} vs {eu2}", r.eu(lv(2)));
    assert!((r.eu(lv(8)).unwrap() - eu8).abs() < 1e-6, "{:?} vs {eu8}", r.eu(lv(8)));
    // about 0.507 against 0.132
    assert!(eu2 > eu8);
    assert_eq!(r.chosen_level, lv(2));
    assert_eq!(r.model_id, "empirical");
    assert_eq!(r.utility_id, "table");
}

#[test]
fn single_level_and_dominance() {
    let u = table_model();
    let scorer = OutcomeScorer { model: &u, units: UnitConversion::default() };
    let model = table_of(&[(3, vec![outcome(50, 3.0), outcome(60, 4.0)]), (5, vec![outcome(30, 2.0), outcome(45, 3.0)])]);
    assert_eq!(select_lookahead(19, &model, &scorer, &[lv(3)]).unwrap().chosen_level, lv(3));
    assert_eq!(select_lookahead(19, &model, &scorer, &[lv(3), lv(5)]).unwrap().chosen_level, lv(5));
    assert!(matches!(select_lookahead(19, &model, &scorer, &[]), Err(SelectError::NoLevels)));
}

#[test]
fn equal_predictions_pick_the_smaller_level() {
    let u = table_model();
    let scorer = OutcomeScorer { model: &u, units: UnitConversion::default() };
    let same = vec![outcome(30, 1.0)];
    let model = table_of(&[(4, same.clone()), (6, same)]);
    assert_eq!(select_lookahead(19, &model, &scorer, &[lv(6), lv(4)]).unwrap().chosen_level, lv(4));
}

fn dollars_model() -> UtilityModel {
    let attrs = vec![
        AttributeUtility::linear(Attribute::Time, 0.0, 1440.0).unwrap(),
        AttributeUtility::linear(Attribute::Named("dollars".into()), 0.0, 10_000.0).unwrap(),
    ];
    UtilityModel::new("plan", attrs, Form::Additive { weights: vec![0.5, 0.5] }).unwrap()
}

fn plan(minutes: f64, dollars: f64) -> AttributeValues {
    AttributeValues::new().with(Attribute::Time, minutes).with(Attribute::Named("dollars".into()), dollars)
}

#[test]
fn quick_plan_beats_slow_cheap_plan() {
    let m = dollars_model();
    let x = ("X".to_string(), Lottery::certain(plan(35.0, 7500.0)));
    let y = ("Y".to_string(), Lottery::certain(plan(14.0 * 1440.0, 1250.0)));
    let c = compare_algorithms(&[x, y], &m).unwrap();
    assert_eq!(c.label, "X");
    let expected_x = 0.5 * (1.0 - 35.0 / 1440.0) + 0.5 * (1.0 - 0.75);
    assert!((c.eu_table[0].1 - expected_x).abs() < 1e-12);
    assert_eq!(c.eu_table[1].1, 0.0);
}

#[test]
fn candidate_ties_and_errors() {
    let m = dollars_model();
    let same = Lottery::certain(plan(60.0, 100.0));
    let c = compare_algorithms(&[("first".to_string(), same.clone()), ("second".to_string(), same)], &m).unwrap();
    assert_eq!(c.label, "first");

    let path = UtilityModel::new(
        "path",
        vec![AttributeUtility::linear(Attribute::PathLength, 0.0, 100.0).unwrap()],
        Form::Additive { weights: vec![1.0] },
    )
    .unwrap();
    let at = |p: f64| Lottery::certain(AttributeValues::new().with(Attribute::PathLength, p));
    let c = compare_algorithms(&[("a".to_string(), at(60.0)), ("b".to_string(), at(10.0))], &path).unwrap();
    assert_eq!(c.label, "b");
    assert!((c.eu_table[0].1 - 0.4).abs() < 1e-12 && (c.eu_table[1].1 - 0.9).abs() < 1e-12);

    let missing = Lottery::certain(AttributeValues::new().with(Attribute::Time, 5.0));
    let err = compare_algorithms(&[("z".to_string(), missing)], &m).unwrap_err();
    assert_eq!(err, SelectError::Mau(MauError::AttributeMissing(Attribute::Named("dollars".into()))));
    let none: [(String, Lottery<AttributeValues>); 0] = [];
    assert_eq!(compare_algorithms(&none, &m).unwrap_err(), SelectError::NoCandidates);
}
