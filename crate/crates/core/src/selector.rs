//! Expected-utility selection of a lookahead level, or of one algorithm
//! among several with predicted outcome lotteries.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::SelectError;
use crate::mau::{argmax_first, expected_utility, Lottery, OutcomeScorer, Utility};
use crate::minimin::LookaheadDepth;
use crate::perfmodel::PerfModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub chosen_level: LookaheadDepth,
    /// Ascending by level.
    pub eu_by_level: Vec<(LookaheadDepth, f64)>,
    pub model_id: String,
    pub utility_id: String,
}

impl SelectionReport {
    pub fn eu(&self, l: LookaheadDepth) -> Option<f64> {
        self.eu_by_level.iter().find(|(m, _)| *m == l).map(|(_, eu)| *eu)
    }
}

/// Level maximizing expected utility of the predicted outcomes; the
/// smaller level wins ties.
pub fn select_lookahead(
    depth: u32,
    model: &PerfModel,
    scorer: &OutcomeScorer<'_>,
    levels: &[LookaheadDepth],
) -> Result<SelectionReport, SelectError> {
    let mut sorted = levels.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.is_empty() {
        return Err(SelectError::NoLevels);
    }
    let mut eu_by_level = Vec::with_capacity(sorted.len());
    for l in sorted {
        let lot = model.predict(depth, l)?;
        eu_by_level.push((l, expected_utility(&lot, scorer)?));
    }
    let eus: Vec<f64> = eu_by_level.iter().map(|(_, eu)| *eu).collect();
    let chosen_level = eu_by_level[argmax_first(&eus)].0;
    Ok(SelectionReport {
        chosen_level,
        eu_by_level,
        model_id: model.id().into(),
        utility_id: scorer.model.name.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmChoice {
    pub label: String,
    pub index: usize,
    pub eu_table: Vec<(String, f64)>,
}

/// Best candidate by expected utility; the first listed wins ties.
pub fn compare_algorithms<T, U: Utility<T> + ?Sized>(
    candidates: &[(String, Lottery<T>)],
    u: &U,
) -> Result<AlgorithmChoice, SelectError> {
    if candidates.is_empty() {
        return Err(SelectError::NoCandidates);
    }
    let eu_table = candidates
        .iter()
        .map(|(label, lot)| expected_utility(lot, u).map(|eu| (label.clone(), eu)))
        .collect::<Result<Vec<_>, _>>()?;
    let eus: Vec<f64> = eu_table.iter().map(|(_, eu)| *eu).collect();
    let index = argmax_first(&eus);
    Ok(AlgorithmChoice { label: eu_table[index].0.clone(), index, eu_table })
}
