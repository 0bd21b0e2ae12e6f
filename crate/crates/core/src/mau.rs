//! Lotteries, expected value and expected utility, single-attribute utility
//! curves and their additive, multiplicative and multilinear combination.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::MauError;
use crate::minimin::Outcome;

/// Probabilities must sum to one within this tolerance.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// A finite probability distribution over values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lottery<T> {
    entries: Vec<(T, f64)>,
}

impl<T> Lottery<T> {
    pub fn new(entries: Vec<(T, f64)>) -> Result<Lottery<T>, MauError> {
        if entries.is_empty() {
            return Err(MauError::InvalidLottery("no entries"));
        }
        if entries.iter().any(|(_, p)| !(*p > 0.0) || !p.is_finite()) {
            return Err(MauError::InvalidLottery("probabilities must be positive"));
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(MauError::InvalidLottery("probabilities do not sum to 1"));
        }
        Ok(Lottery { entries })
    }

    pub fn certain(value: T) -> Lottery<T> {
        Lottery { entries: alloc::vec![(value, 1.0)] }
    }

    pub fn entries(&self) -> &[(T, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, mut f: F) -> Lottery<U> {
        Lottery { entries: self.entries.iter().map(|(v, p)| (f(v), *p)).collect() }
    }

    /// Expectation of `f` over the lottery.
    pub fn mean_by<F: FnMut(&T) -> f64>(&self, mut f: F) -> f64 {
        self.entries.iter().map(|(v, p)| p * f(v)).sum()
    }
}

impl<T: Clone + Ord> Lottery<T> {
    /// Empirical distribution of equally weighted samples; equal values
    /// are merged.
    pub fn from_samples(mut samples: Vec<T>) -> Result<Lottery<T>, MauError> {
        if samples.is_empty() {
            return Err(MauError::InvalidLottery("no entries"));
        }
        let n = samples.len() as f64;
        samples.sort();
        let mut entries: Vec<(T, usize)> = Vec::new();
        for s in samples {
            match entries.last_mut() {
                Some((v, c)) if *v == s => *c += 1,
                _ => entries.push((s, 1)),
            }
        }
        Lottery::new(entries.into_iter().map(|(v, c)| (v, c as f64 / n)).collect())
    }

    /// `(1 - weight) * self + weight * other`, merged.
    pub fn mixture(&self, other: &Lottery<T>, weight: f64) -> Result<Lottery<T>, MauError> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(MauError::InvalidLottery("mixture weight outside [0, 1]"));
        }
        let mut entries: Vec<(T, f64)> = Vec::new();
        let left = self.entries.iter().map(|(v, p)| (v, p * (1.0 - weight)));
        let right = other.entries.iter().map(|(v, p)| (v, p * weight));
        let mut all: Vec<(&T, f64)> = left.chain(right).filter(|(_, p)| *p > 0.0).collect();
        all.sort_by(|a, b| a.0.cmp(b.0));
        for (v, p) in all {
            match entries.last_mut() {
                Some((last, q)) if last == v => *q += p,
                _ => entries.push((v.clone(), p)),
            }
        }
        Lottery::new(entries)
    }
}

pub fn expected_value(lot: &Lottery<f64>) -> f64 {
    lot.mean_by(|v| *v)
}

/// Anything that maps a value to a utility in [0, 1].
pub trait Utility<T: ?Sized> {
    fn utility(&self, value: &T) -> Result<f64, MauError>;
}

impl<T: ?Sized, U: Utility<T> + ?Sized> Utility<T> for &U {
    fn utility(&self, value: &T) -> Result<f64, MauError> {
        (**self).utility(value)
    }
}

pub fn expected_utility<T, U: Utility<T> + ?Sized>(lot: &Lottery<T>, u: &U) -> Result<f64, MauError> {
    let mut total = 0.0;
    for (v, p) in lot.entries() {
        total += p * u.utility(v)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub index: usize,
    pub expected_utilities: Vec<f64>,
}

/// Maximum-EU choice; the lowest index wins ties.
pub fn choose_max_eu<T, U: Utility<T> + ?Sized>(choices: &[Lottery<T>], u: &U) -> Result<Choice, MauError> {
    if choices.is_empty() {
        return Err(MauError::NoChoices);
    }
    let eus = choices.iter().map(|c| expected_utility(c, u)).collect::<Result<Vec<_>, _>>()?;
    Ok(Choice { index: argmax_first(&eus), expected_utilities: eus })
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// The attributes an outcome can be scored on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Attribute {
    /// Moves.
    PathLength,
    /// Minutes of computation.
    Time,
    /// Megabytes.
    Space,
    /// Any further attribute declared by configuration, e.g. dollars.
    Named(String),
}

impl Attribute {
    pub fn parse(name: &str) -> Attribute {
        match name {
            "path_length" => Attribute::PathLength,
            "time" | "time_units" => Attribute::Time,
            "space" | "space_units" => Attribute::Space,
            other => Attribute::Named(other.into()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Attribute::PathLength => "path_length",
            Attribute::Time => "time",
            Attribute::Space => "space",
            Attribute::Named(n) => n,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An outcome expressed in the units the utility model consumes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributeValues {
    pub values: Vec<(Attribute, f64)>,
    pub solved: bool,
}

impl AttributeValues {
    pub fn new() -> AttributeValues {
        AttributeValues { values: Vec::new(), solved: true }
    }

    pub fn with(mut self, attribute: Attribute, value: f64) -> AttributeValues {
        self.set(attribute, value);
        self
    }

    pub fn unsolved(mut self) -> AttributeValues {
        self.solved = false;
        self
    }

    pub fn set(&mut self, attribute: Attribute, value: f64) {
        match self.values.iter_mut().find(|(a, _)| *a == attribute) {
            Some(slot) => slot.1 = value,
            None => self.values.push((attribute, value)),
        }
    }

    pub fn get(&self, attribute: &Attribute) -> Option<f64> {
        self.values.iter().find(|(a, _)| a == attribute).map(|(_, v)| *v)
    }
}

impl Default for AttributeValues {
    fn default() -> Self {
        AttributeValues::new()
    }
}

/// Moves, minutes and megabytes from raw node counts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitConversion {
    pub generations_per_minute: f64,
    pub nodes_per_megabyte: f64,
}

impl Default for UnitConversion {
    fn default() -> Self {
        UnitConversion { generations_per_minute: 20_000.0, nodes_per_megabyte: 10_000.0 }
    }
}

impl UnitConversion {
    pub fn convert(&self, o: &Outcome) -> AttributeValues {
        AttributeValues {
            values: alloc::vec![
                (Attribute::PathLength, o.path_length as f64),
                (Attribute::Time, o.time_units as f64 / self.generations_per_minute),
                (Attribute::Space, o.space_units as f64 / self.nodes_per_megabyte),
            ],
            solved: o.solved,
        }
    }
}

/// Piecewise-linear, nonincreasing map from attribute value to [0, 1].
/// Values left of the first point take its utility, values right of the
/// last point take the last utility until the bound.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Curve {
    points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Curve, MauError> {
        if points.is_empty() {
            return Err(MauError::MalformedModel("curve needs at least one point".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(MauError::MalformedModel("curve abscissae must increase".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(MauError::MalformedModel("curve must be nonincreasing".into()));
            }
        }
        if points.iter().any(|&(x, y)| !x.is_finite() || !(0.0..=1.0).contains(&y)) {
            return Err(MauError::MalformedModel("curve utilities must lie in [0, 1]".into()));
        }
        Ok(Curve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x == x1 {
                return y1;
            }
            if x < x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CurveKind {
    /// Linear from the best value (utility 1) to the bound (utility 0).
    Linear,
    /// Utility 1 anywhere below the bound.
    Free,
    /// Arbitrary breakpoints.
    Piecewise,
}

/// A single-attribute utility with a hard cap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributeUtility {
    pub attribute: Attribute,
    pub kind: CurveKind,
    pub curve: Curve,
    /// Values at or above the bound have utility 0.
    pub bound: f64,
}

impl AttributeUtility {
    pub fn linear(attribute: Attribute, best: f64, bound: f64) -> Result<AttributeUtility, MauError> {
        if !(bound > best) {
            return Err(MauError::MalformedModel(format!("{attribute}: bound must exceed best value")));
        }
        Ok(AttributeUtility { attribute, kind: CurveKind::Linear, curve: Curve::new(alloc::vec![(best, 1.0), (bound, 0.0)])?, bound })
    }

    pub fn free(attribute: Attribute, bound: f64) -> Result<AttributeUtility, MauError> {
        if !bound.is_finite() {
            return Err(MauError::MalformedModel(format!("{attribute}: bound must be finite")));
        }
        Ok(AttributeUtility { attribute, kind: CurveKind::Free, curve: Curve::new(alloc::vec![(bound, 1.0)])?, bound })
    }

    pub fn piecewise(attribute: Attribute, points: Vec<(f64, f64)>, bound: f64) -> Result<AttributeUtility, MauError> {
        let curve = Curve::new(points)?;
        if curve.points().iter().any(|&(x, _)| x > bound) {
            return Err(MauError::MalformedModel(format!("{attribute}: curve extends past the bound")));
        }
        Ok(AttributeUtility { attribute, kind: CurveKind::Piecewise, curve, bound })
    }

    pub fn eval(&self, value: f64) -> f64 {
        if value >= self.bound {
            0.0
        } else {
            self.curve.eval(value)
        }
    }

    /// Utility of the best attainable value.
    pub fn peak(&self) -> f64 {
        self.curve.points()[0].1
    }
}

impl Utility<f64> for AttributeUtility {
    fn utility(&self, value: &f64) -> Result<f64, MauError> {
        Ok(self.eval(*value))
    }
}

/// How single-attribute utilities combine.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "form", rename_all = "snake_case"))]
pub enum Form {
    Additive { weights: Vec<f64> },
    /// `(prod(1 + K k_i u_i) - 1) / K`.
    Multiplicative { weights: Vec<f64>, k: f64 },
    /// `sum k_i u_i + sum_{i<j} k_ij u_i u_j`.
    Multilinear { weights: Vec<f64>, interactions: Vec<(usize, usize, f64)> },
}

impl Form {
    pub fn weights(&self) -> &[f64] {
        match self {
            Form::Additive { weights } | Form::Multiplicative { weights, .. } | Form::Multilinear { weights, .. } => weights,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Form::Additive { .. } => "additive",
            Form::Multiplicative { .. } => "multiplicative",
            Form::Multilinear { .. } => "multilinear",
        }
    }
}

const MODEL_TOLERANCE: f64 = 1e-9;

/// Joint utility over several attributes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UtilityModel {
    pub name: String,
    attributes: Vec<AttributeUtility>,
    form: Form,
}

impl UtilityModel {
    pub fn new(name: impl Into<String>, attributes: Vec<AttributeUtility>, form: Form) -> Result<UtilityModel, MauError> {
        let bad = |msg: &str| Err(MauError::MalformedModel(msg.into()));
        let n = attributes.len();
        if n == 0 {
            return bad("no attributes");
        }
        if form.weights().len() != n {
            return bad("one weight per attribute required");
        }
        for (i, a) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|b| b.attribute == a.attribute) {
                return Err(MauError::MalformedModel(format!("attribute {} declared twice", a.attribute)));
            }
            if a.peak() != 1.0 {
                return Err(MauError::MalformedModel(format!("{}: best utility must be 1", a.attribute)));
            }
        }
        if form.weights().iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
            return bad("weights must be nonnegative");
        }
        match &form {
            Form::Additive { weights } => {
                if (weights.iter().sum::<f64>() - 1.0).abs() > MODEL_TOLERANCE {
                    return bad("additive weights must sum to 1");
                }
            }
            Form::Multiplicative { weights, k } => {
                if !(*k > -1.0) || *k == 0.0 || !k.is_finite() {
                    return bad("master constant must satisfy K > -1, K != 0");
                }
                let prod: f64 = weights.iter().map(|w| 1.0 + k * w).product();
                if (prod - (1.0 + k)).abs() > MODEL_TOLERANCE * (1.0 + k.abs()) {
                    return bad("master constant violates 1 + K = prod(1 + K k_i)");
                }
            }
            Form::Multilinear { weights, interactions } => {
                let mut total: f64 = weights.iter().sum();
                let mut floor = weights.clone();
                for &(i, j, kij) in interactions {
                    if i >= j || j >= n || !kij.is_finite() {
                        return bad("interaction indices must satisfy i < j < n");
                    }
                    total += kij;
                    floor[i] += kij.min(0.0);
                    floor[j] += kij.min(0.0);
                }
                if (total - 1.0).abs() > MODEL_TOLERANCE {
                    return bad("multilinear coefficients must sum to 1");
                }
                if floor.iter().any(|f| *f < -MODEL_TOLERANCE) {
                    return bad("negative interactions break monotonicity");
                }
            }
        }
        Ok(UtilityModel { name: name.into(), attributes, form })
    }

    pub fn attributes(&self) -> &[AttributeUtility] {
        &self.attributes
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn joint_utility(&self, o: &AttributeValues) -> Result<f64, MauError> {
        let mut us = Vec::with_capacity(self.attributes.len());
        for a in &self.attributes {
            us.push(o.get(&a.attribute).ok_or_else(|| MauError::AttributeMissing(a.attribute.clone()))?);
        }
        if !o.solved {
            return Ok(0.0);
        }
        for (a, u) in self.attributes.iter().zip(us.iter_mut()) {
            if *u >= a.bound {
                return Ok(0.0);
            }
            *u = a.curve.eval(*u);
        }
        if us.iter().all(|u| *u == 1.0) {
            return Ok(1.0);
        }
        Ok(self.combine(&us).clamp(0.0, 1.0))
    }

    /// Combines single-attribute utilities, ordered as `attributes()`.
    pub fn combine(&self, us: &[f64]) -> f64 {
        match &self.form {
            Form::Additive { weights } => weights.iter().zip(us).map(|(k, u)| k * u).sum(),
            Form::Multiplicative { weights, k } => {
                let prod: f64 = weights.iter().zip(us).map(|(w, u)| 1.0 + k * w * u).product();
                (prod - 1.0) / k
            }
            Form::Multilinear { weights, interactions } => {
                let linear: f64 = weights.iter().zip(us).map(|(k, u)| k * u).sum();
                linear + interactions.iter().map(|&(i, j, kij)| kij * us[i] * us[j]).sum::<f64>()
            }
        }
    }
}

impl Utility<AttributeValues> for UtilityModel {
    fn utility(&self, value: &AttributeValues) -> Result<f64, MauError> {
        self.joint_utility(value)
    }
}

/// A utility model applied to raw run outcomes.
#[derive(Debug, Clone, Copy)]
pub struct OutcomeScorer<'a> {
    pub model: &'a UtilityModel,
    pub units: UnitConversion,
}

impl Utility<Outcome> for OutcomeScorer<'_> {
    fn utility(&self, value: &Outcome) -> Result<f64, MauError> {
        self.model.joint_utility(&self.units.convert(value))
    }
}

/// Variance across equivalence rows accepted as equal.
pub const CALIBRATION_VARIANCE: f64 = 1e-12;
/// Calibrated weights below this would drop an attribute from the model.
pub const MIN_CALIBRATED_WEIGHT: f64 = 1e-3;

/// Fits a multiplicative model under which every row has the same joint
/// utility. Curves are taken as given; attributes with `Free` curves get
/// weight zero and only enforce their bounds. At most two attributes may
/// carry weight.
///
/// Writing `a_i = K k_i`, the consistency constraint fixes
/// `K = prod(1 + a_i) - 1`, and row utilities are equal exactly when the
/// products `prod(1 + a_i u_i)` are. For a fixed `a_1` those products are
/// affine in `a_0`, so the inner problem is a closed-form least-squares
/// fit; the outer search over `a_1` is a log-spaced scan refined by
/// golden-section search on the variance of the joint utilities.
pub fn calibrate_multiplicative(
    name: impl Into<String>,
    rows: &[AttributeValues],
    attributes: Vec<AttributeUtility>,
) -> Result<UtilityModel, MauError> {
    if rows.len() < 2 {
        return Err(MauError::CalibrationFailed("need at least two equivalence rows".into()));
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut us = Vec::with_capacity(attributes.len());
        for a in &attributes {
            let v = row.get(&a.attribute).ok_or_else(|| MauError::AttributeMissing(a.attribute.clone()))?;
            if v >= a.bound {
                return Err(MauError::CalibrationFailed(format!("row violates the {} bound", a.attribute)));
            }
            us.push(a.eval(v));
        }
        table.push(us);
    }
    let weighted: Vec<usize> = (0..attributes.len()).filter(|&i| attributes[i].kind != CurveKind::Free).collect();
    let build = |ws: &[(usize, f64)], k: f64| {
        let mut weights = alloc::vec![0.0; attributes.len()];
        for &(i, w) in ws {
            weights[i] = w;
        }
        UtilityModel::new(name, attributes.clone(), Form::Multiplicative { weights, k })
    };
    let identical = table.windows(2).all(|w| weighted.iter().all(|&i| w[0][i] == w[1][i]));
    match weighted.len() {
        0 => Err(MauError::CalibrationFailed("no weighted attributes".into())),
        1 => {
            if identical {
                build(&[(weighted[0], 1.0)], 1.0)
            } else {
                Err(MauError::CalibrationFailed("a single weighted attribute cannot equate differing rows".into()))
            }
        }
        2 => {
            let (i, j) = (weighted[0], weighted[1]);
            if identical {
                // every weighting equates the rows; take equal scaled weights
                let (a, b) = (1.0, 1.0);
                let k = (1.0 + a) * (1.0 + b) - 1.0;
                return build(&[(i, a / k), (j, b / k)], k);
            }
            let xs: Vec<f64> = table.iter().map(|r| r[i]).collect();
            let ys: Vec<f64> = table.iter().map(|r| r[j]).collect();
            let (a, b, variance) = calibrate_pair(&xs, &ys);
            if !(variance <= CALIBRATION_VARIANCE) {
                return Err(MauError::CalibrationFailed(format!(
                    "rows are inconsistent with the multiplicative form (variance {variance:e})"
                )));
            }
            let k = (1.0 + a) * (1.0 + b) - 1.0;
            build(&[(i, a / k), (j, b / k)], k)
        }
        n => Err(MauError::CalibrationFailed(format!("{n} weighted attributes; at most two are supported"))),
    }
}

/// Best `a_0` for a fixed `a_1 = b`, if the resulting model is admissible.
fn inner_fit(xs: &[f64], ys: &[f64], b: f64) -> Option<f64> {
    let n = xs.len() as f64;
    let c: Vec<f64> = ys.iter().map(|y| 1.0 + b * y).collect();
    let d: Vec<f64> = xs.iter().zip(&c).map(|(x, c)| x * c).collect();
    let mc = c.iter().sum::<f64>() / n;
    let md = d.iter().sum::<f64>() / n;
    let var_d: f64 = d.iter().map(|v| (v - md) * (v - md)).sum::<f64>() / n;
    let cov: f64 = c.iter().zip(&d).map(|(c, d)| (c - mc) * (d - md)).sum::<f64>() / n;
    if var_d <= f64::EPSILON * md.abs().max(1.0) {
        return None;
    }
    Some(-cov / var_d)
}

/// Variance of the joint utilities for scaled weights `(a, b)`, or `None`
/// when the weights are inadmissible.
fn joint_variance(xs: &[f64], ys: &[f64], a: f64, b: f64) -> Option<f64> {
    if !(a > -1.0 && b > -1.0) || (a > 0.0) != (b > 0.0) || a == 0.0 || b == 0.0 {
        return None;
    }
    let k = (1.0 + a) * (1.0 + b) - 1.0;
    if k == 0.0 || !k.is_finite() {
        return None;
    }
    if a / k < MIN_CALIBRATED_WEIGHT || b / k < MIN_CALIBRATED_WEIGHT {
        return None;
    }
    let n = xs.len() as f64;
    let us: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| ((1.0 + a * x) * (1.0 + b * y) - 1.0) / k).collect();
    let m = us.iter().sum::<f64>() / n;
    Some(us.iter().map(|u| (u - m) * (u - m)).sum::<f64>() / n)
}

fn calibrate_pair(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    // b = exp(s) - 1 maps the real line onto (-1, inf)
    let objective = |s: f64| -> (f64, f64) {
        let b = libm::expm1(s);
        match inner_fit(xs, ys, b).and_then(|a| joint_variance(xs, ys, a, b).map(|v| (a, v))) {
            Some((a, v)) => (a, v),
            None => (f64::NAN, f64::INFINITY),
        }
    };
    const LO: f64 = -20.0;
    const HI: f64 = 20.0;
    const STEPS: usize = 8000;
    let step = (HI - LO) / STEPS as f64;
    let mut best = (LO, f64::INFINITY);
    for i in 0..=STEPS {
        let s = LO + step * i as f64;
        let v = objective(s).1;
        if v < best.1 {
            best = (s, v);
        }
    }
    if !best.1.is_finite() {
        return (f64::NAN, f64::NAN, f64::INFINITY);
    }
    // golden-section refinement on the bracketing grid cells
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (objective(x1).1, objective(x2).1);
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = objective(x1).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = objective(x2).1;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let candidates = [best.0, x1, x2, 0.5 * (lo + hi)];
    let (s, (a, v)) = candidates
        .iter()
        .map(|&s| (s, objective(s)))
        .fold((best.0, (f64::NAN, f64::INFINITY)), |acc, c| if c.1 .1 < acc.1 .1 { c } else { acc });
    (a, libm::expm1(s), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn figure_one(u55: f64) -> AttributeUtility {
        AttributeUtility::piecewise(Attribute::PathLength, vec![(10.0, 1.0), (55.0, u55), (90.0, 0.0)], 90.0).unwrap()
    }

    #[test]
    fn expected_values() {
        let gamble = Lottery::new(vec![(10.0, 0.5), (90.0, 0.5)]).unwrap();
        assert_eq!(expected_value(&gamble), 50.0);
        assert_eq!(expected_value(&Lottery::certain(55.0)), 55.0);
        let three = Lottery::new(vec![(10.0, 0.2), (45.0, 0.3), (90.0, 0.5)]).unwrap();
        assert!((expected_value(&three) - 60.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_lotteries() {
        assert!(Lottery::new(vec![(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(Lottery::new(vec![(1.0, 1.2), (2.0, -0.2)]).is_err());
        assert!(Lottery::<f64>::new(vec![]).is_err());
        assert!(Lottery::new(vec![(1.0, 0.5), (2.0, 0.5 + 1e-10)]).is_ok());
    }

    #[test]
    fn risk_attitudes() {
        let gamble = Lottery::new(vec![(10.0, 0.5), (90.0, 0.5)]).unwrap();
        let sure = Lottery::certain(55.0);
        let averse = figure_one(0.6);
        assert_eq!(expected_utility(&gamble, &averse).unwrap(), 0.5);
        assert_eq!(expected_utility(&sure, &averse).unwrap(), 0.6);
        let choices = [sure.clone(), gamble.clone()];
        assert_eq!(choose_max_eu(&choices, &averse).unwrap().index, 0);
        let prone = figure_one(0.1);
        assert_eq!(choose_max_eu(&choices, &prone).unwrap().index, 1);
    }

    #[test]
    fn choice_ties_take_lowest_index() {
        let u = AttributeUtility::linear(Attribute::PathLength, 0.0, 10.0).unwrap();
        let lots = [Lottery::certain(7.0), Lottery::certain(3.0), Lottery::certain(3.0)];
        let c = choose_max_eu(&lots, &u).unwrap();
        assert_eq!(c.index, 1);
        assert_eq!(c.expected_utilities.len(), 3);
        assert_eq!(choose_max_eu(&lots[..1], &u).unwrap().index, 0);
        assert_eq!(choose_max_eu::<f64, _>(&[], &u), Err(MauError::NoChoices));
    }

    #[test]
    fn curves_respect_bounds() {
        let lin = AttributeUtility::linear(Attribute::Time, 0.0, 10.0).unwrap();
        assert_eq!(lin.eval(0.0), 1.0);
        assert_eq!(lin.eval(-3.0), 1.0);
        assert!((lin.eval(4.0) - 0.6).abs() < 1e-15);
        assert_eq!(lin.eval(10.0), 0.0);
        assert_eq!(lin.eval(11.0), 0.0);
        let free = AttributeUtility::free(Attribute::Space, 10.0).unwrap();
        assert_eq!(free.eval(9.99), 1.0);
        assert_eq!(free.eval(10.0), 0.0);
        assert!(Curve::new(vec![(0.0, 0.5), (1.0, 0.7)]).is_err());
        assert!(Curve::new(vec![(1.0, 1.0), (1.0, 0.7)]).is_err());
    }

    fn three_attrs() -> Vec<AttributeUtility> {
        vec![
            AttributeUtility::linear(Attribute::PathLength, 0.0, 100.0).unwrap(),
            AttributeUtility::linear(Attribute::Time, 0.0, 10.0).unwrap(),
            AttributeUtility::free(Attribute::Space, 10.0).unwrap(),
        ]
    }

    fn row(moves: f64, minutes: f64, mb: f64) -> AttributeValues {
        AttributeValues::new().with(Attribute::PathLength, moves).with(Attribute::Time, minutes).with(Attribute::Space, mb)
    }

    #[test]
    fn model_validation() {
        let attrs = three_attrs();
        assert!(UtilityModel::new("a", attrs.clone(), Form::Additive { weights: vec![0.5, 0.5, 0.0] }).is_ok());
        assert!(UtilityModel::new("a", attrs.clone(), Form::Additive { weights: vec![0.5, 0.6, 0.0] }).is_err());
        assert!(UtilityModel::new("m", attrs.clone(), Form::Multiplicative { weights: vec![0.3, 0.3, 0.0], k: 0.0 }).is_err());
        assert!(UtilityModel::new("m", attrs.clone(), Form::Multiplicative { weights: vec![0.3, 0.3, 0.0], k: 1.0 }).is_err());
        // k = 2: (1 + 2 k1)(1 + 2 k2) = 3 with k1 = k2 = (sqrt(3) - 1) / 2
        let kk = (libm::sqrt(3.0) - 1.0) / 2.0;
        assert!(UtilityModel::new("m", attrs.clone(), Form::Multiplicative { weights: vec![kk, kk, 0.0], k: 2.0 }).is_ok());
        let ml = Form::Multilinear { weights: vec![0.4, 0.4, 0.0], interactions: vec![(0, 1, 0.2)] };
        assert!(UtilityModel::new("ml", attrs.clone(), ml).is_ok());
        let bad_ml = Form::Multilinear { weights: vec![0.4, 0.4, 0.0], interactions: vec![(1, 0, 0.2)] };
        assert!(UtilityModel::new("ml", attrs, bad_ml).is_err());
    }

    #[test]
    fn joint_corners_and_bounds() {
        let m = UtilityModel::new("a", three_attrs(), Form::Additive { weights: vec![0.5, 0.5, 0.0] }).unwrap();
        assert_eq!(m.joint_utility(&row(0.0, 0.0, 1.0)).unwrap(), 1.0);
        assert_eq!(m.joint_utility(&row(10.0, 10.5, 1.0)).unwrap(), 0.0);
        assert_eq!(m.joint_utility(&row(10.0, 1.0, 10.0)).unwrap(), 0.0);
        assert_eq!(m.joint_utility(&row(10.0, 1.0, 1.0).unsolved()).unwrap(), 0.0);
        let missing = AttributeValues::new().with(Attribute::PathLength, 3.0);
        assert_eq!(m.joint_utility(&missing), Err(MauError::AttributeMissing(Attribute::Time)));
        let ml = UtilityModel::new(
            "ml",
            three_attrs(),
            Form::Multilinear { weights: vec![0.4, 0.4, 0.0], interactions: vec![(0, 1, 0.2)] },
        )
        .unwrap();
        // u = (0.5, 0.5): 0.4 * 0.5 + 0.4 * 0.5 + 0.2 * 0.25
        assert!((ml.joint_utility(&row(50.0, 5.0, 1.0)).unwrap() - 0.45).abs() < 1e-12);
    }

    #[test]
    fn multiplicative_tends_to_additive() {
        let k = 1e-6;
        // solve (1 + k w)(1 + k w) = 1 + k for a symmetric pair
        let w = (libm::sqrt(1.0 + k) - 1.0) / k;
        let mul = UtilityModel::new("m", three_attrs(), Form::Multiplicative { weights: vec![w, w, 0.0], k }).unwrap();
        let add = UtilityModel::new("a", three_attrs(), Form::Additive { weights: vec![0.5, 0.5, 0.0] }).unwrap();
        for (mv, t) in [(10.0, 2.0), (50.0, 9.0), (90.0, 1.0)] {
            let d = mul.joint_utility(&row(mv, t, 1.0)).unwrap() - add.joint_utility(&row(mv, t, 1.0)).unwrap();
            assert!(d.abs() < 1e-4);
        }
    }

    #[test]
    fn calibration_equates_table_rows() {
        let rows = [row(20.0, 8.0, 9.0), row(68.0, 6.0, 9.0), row(93.0, 4.0, 9.0)];
        let m = calibrate_multiplicative("table", &rows, three_attrs()).unwrap();
        let us: Vec<f64> = rows.iter().map(|r| m.joint_utility(r).unwrap()).collect();
        assert!(us.iter().all(|u| (u - us[0]).abs() < 1e-6), "{us:?}");
        // closed form for these rows: a_time = 0.23 / 0.054
        let Form::Multiplicative { weights, k } = m.form() else { panic!() };
        assert!((k * weights[1] - 0.23 / 0.054).abs() < 1e-6, "{weights:?} {k}");
        assert_eq!(weights[2], 0.0);
    }

    #[test]
    fn calibration_edge_cases() {
        let same = [row(20.0, 8.0, 1.0), row(20.0, 8.0, 2.0)];
        assert!(calibrate_multiplicative("same", &same, three_attrs()).is_ok());
        let infeasible = [row(10.0, 1.0, 1.0), row(10.0, 9.0, 1.0)];
        assert!(matches!(
            calibrate_multiplicative("bad", &infeasible, three_attrs()),
            Err(MauError::CalibrationFailed(_))
        ));
        assert!(calibrate_multiplicative("one", &same[..1], three_attrs()).is_err());
        let out = [row(20.0, 8.0, 1.0), row(120.0, 1.0, 1.0)];
        assert!(calibrate_multiplicative("out", &out, three_attrs()).is_err());
    }

    #[test]
    fn mixtures_and_samples() {
        let a = Lottery::from_samples(vec![3u32, 1, 3, 2]).unwrap();
        assert_eq!(a.entries(), &[(1, 0.25), (2, 0.25), (3, 0.5)]);
        let b = Lottery::certain(5u32);
        let m = a.mixture(&b, 0.5).unwrap();
        assert_eq!(m.entries().last(), Some(&(5, 0.5)));
        assert!((m.total_probability() - 1.0).abs() < 1e-12);
    }
}
