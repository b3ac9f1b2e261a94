//! Event matrices for the two-reserve occupancy chain and their composition.
//!
//! States are the number of occupied reserves, `0`, `1` or `2`. Matrices are
//! oriented with rows indexing the current state and columns the next state,
//! and distributions evolve as row vectors: `p_{t+1} = p_t · A`. Under that
//! orientation the product `E · C` applies the catastrophe stage `E` first and
//! the colonisation stage `C` second.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, Error, Result};

pub const NUM_STATES: usize = 3;

/// Row sums of a transition matrix must be within this of one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Parameters of the two-reserve model.
///
/// * `r` - probability per step that a catastrophe strikes at least one reserve
/// * `mu` - mean catastrophe size (distance units)
/// * `alpha` - inverse of the mean dispersal distance
/// * `a` - probability an empty patch is filled by external recruits per step
/// * `b` - probability an occupied patch goes locally extinct per step
///
/// The baseline chain only reads `r`, `mu` and `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    r: f64,
    mu: f64,
    alpha: f64,
    a: f64,
    b: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    r: f64,
    mu: f64,
    alpha: f64,
    #[serde(default)]
    a: f64,
    #[serde(default)]
    b: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.r, raw.mu, raw.alpha, raw.a, raw.b)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            r: p.r,
            mu: p.mu,
            alpha: p.alpha,
            a: p.a,
            b: p.b,
        }
    }
}

impl ModelParams {
    pub fn new(r: f64, mu: f64, alpha: f64, a: f64, b: f64) -> Result<Self> {
        Ok(ModelParams {
            r: check_probability("r", r)?,
            mu: check_positive("mu", mu)?,
            alpha: check_positive("alpha", alpha)?,
            a: check_probability("a", a)?,
            b: check_probability("b", b)?,
        })
    }

    /// Catastrophe and colonisation parameters only; `a = b = 0`.
    pub fn baseline(r: f64, mu: f64, alpha: f64) -> Result<Self> {
        Self::new(r, mu, alpha, 0.0, 0.0)
    }

    pub fn with_recruitment(self, a: f64) -> Result<Self> {
        Self::new(self.r, self.mu, self.alpha, a, self.b)
    }

    pub fn with_local_extinction(self, b: f64) -> Result<Self> {
        Self::new(self.r, self.mu, self.alpha, self.a, b)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Mean dispersal distance, `1 / alpha`.
    pub fn dispersal_distance(&self) -> f64 {
        1.0 / self.alpha
    }
}

/// Inter-reserve distance, finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Distance(f64);

impl Distance {
    pub const ZERO: Distance = Distance(0.0);

    pub fn new(d: f64) -> Result<Self> {
        if d.is_finite() && d >= 0.0 {
            Ok(Distance(d))
        } else {
            Err(Error::InvalidParameter {
                name: "d",
                value: d,
                bound: "finite and >= 0",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Distance {
    type Error = Error;

    fn try_from(d: f64) -> Result<Self> {
        Distance::new(d)
    }
}

impl From<Distance> for f64 {
    fn from(d: Distance) -> f64 {
        d.0
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A 3×3 row-stochastic matrix over occupancy states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TransitionMatrix {
    rows: [[f64; NUM_STATES]; NUM_STATES],
}

impl TransitionMatrix {
    pub fn new(rows: [[f64; NUM_STATES]; NUM_STATES]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|p| !(p.is_finite() && (0.0..=1.0).contains(p))) {
                return Err(Error::NotStochastic(format!(
                    "entry ({i}, {j}) = {} is outside [0, 1]",
                    row[j]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(TransitionMatrix { rows })
    }

    pub fn identity() -> Self {
        TransitionMatrix {
            rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn rows(&self) -> &[[f64; NUM_STATES]; NUM_STATES] {
        &self.rows
    }

    pub fn row(&self, from: usize) -> &[f64; NUM_STATES] {
        &self.rows[from]
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    /// `true` when `state` maps to itself with probability exactly one.
    pub fn is_absorbing(&self, state: usize) -> bool {
        self.rows[state][state] == 1.0
    }

    /// Matrix product `self · rhs`: apply `self` first, then `rhs`.
    pub fn then(&self, rhs: &TransitionMatrix) -> TransitionMatrix {
        let mut out = [[0.0; NUM_STATES]; NUM_STATES];
        for (i, out_row) in out.iter_mut().enumerate() {
            for (j, cell) in out_row.iter_mut().enumerate() {
                *cell = (0..NUM_STATES).map(|k| self.rows[i][k] * rhs.rows[k][j]).sum();
            }
        }
        TransitionMatrix { rows: out }
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for TransitionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[f64; NUM_STATES]; NUM_STATES]>::deserialize(deserializer)?;
        TransitionMatrix::new(rows).map_err(serde::de::Error::custom)
    }
}

/// Probability vector over occupancy states `(0, 1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OccupancyDistribution {
    probs: [f64; NUM_STATES],
}

impl OccupancyDistribution {
    pub fn new(probs: [f64; NUM_STATES]) -> Result<Self> {
        if let Some(i) = probs.iter().position(|p| !(p.is_finite() && (0.0..=1.0).contains(p))) {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {} is outside [0, 1]",
                probs[i]
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(OccupancyDistribution { probs })
    }

    pub fn point_mass(state: usize) -> Result<Self> {
        if state >= NUM_STATES {
            return Err(Error::InvalidDistribution(format!(
                "state {state} is not one of 0, 1, 2"
            )));
        }
        let mut probs = [0.0; NUM_STATES];
        probs[state] = 1.0;
        Ok(OccupancyDistribution { probs })
    }

    /// Both reserves occupied, the default starting point for survival curves.
    pub fn both_occupied() -> Self {
        OccupancyDistribution { probs: [0.0, 0.0, 1.0] }
    }

    pub fn probs(&self) -> &[f64; NUM_STATES] {
        &self.probs
    }

    /// Probability that at least one reserve is occupied, `1 - p[0]`.
    ///
    /// Summed from the occupied states so it keeps full relative precision
    /// when survival is tiny.
    pub fn extant(&self) -> f64 {
        self.probs[1] + self.probs[2]
    }

    pub fn step(&self, a: &TransitionMatrix) -> OccupancyDistribution {
        step_distribution(self, a)
    }

    pub(crate) fn from_raw(probs: [f64; NUM_STATES]) -> Self {
        OccupancyDistribution { probs }
    }
}

impl<'de> Deserialize<'de> for OccupancyDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let probs = <[f64; NUM_STATES]>::deserialize(deserializer)?;
        OccupancyDistribution::new(probs).map_err(serde::de::Error::custom)
    }
}

/// Which event stages make up one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    /// Catastrophe then colonisation, `E · C`.
    Baseline,
    /// Adds external recruitment last, `E · C · R`.
    Recruitment,
    /// Adds local extinction after catastrophes, `E · L · C · R`.
    Full,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] = [ModelVariant::Baseline, ModelVariant::Recruitment, ModelVariant::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::Baseline => "baseline",
            ModelVariant::Recruitment => "recruitment",
            ModelVariant::Full => "full",
        }
    }

    /// Whether state 0 is absorbing for this variant under `params`.
    pub fn is_absorbing(self, params: &ModelParams) -> bool {
        match self {
            ModelVariant::Baseline => true,
            ModelVariant::Recruitment | ModelVariant::Full => params.a() == 0.0,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(ModelVariant::Baseline),
            "recruitment" => Ok(ModelVariant::Recruitment),
            "full" => Ok(ModelVariant::Full),
            other => Err(format!(
                "unknown variant `{other}` (expected baseline, recruitment or full)"
            )),
        }
    }
}

/// Colonisation matrix `C`: an empty patch is recolonised from the occupied
/// one with probability `exp(-alpha d)`.
pub fn colonisation_matrix(alpha: f64, d: Distance) -> Result<TransitionMatrix> {
    let alpha = check_positive("alpha", alpha)?;
    let c = (-alpha * d.get()).exp();
    Ok(TransitionMatrix {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0 - c, c], [0.0, 0.0, 1.0]],
    })
}

/// Catastrophe matrix `E`. With `q = exp(-d / mu)` the chance a catastrophe
/// hits both reserves, a singly-occupied network is emptied with probability
/// `r (1 + q) / 2`.
pub fn extinction_matrix(r: f64, mu: f64, d: Distance) -> Result<TransitionMatrix> {
    let r = check_probability("r", r)?;
    let mu = check_positive("mu", mu)?;
    let q = (-d.get() / mu).exp();
    let lose_single = 0.5 * r * (1.0 + q);
    Ok(TransitionMatrix {
        rows: [
            [1.0, 0.0, 0.0],
            [lose_single, 1.0 - lose_single, 0.0],
            [r * q, r * (1.0 - q), 1.0 - r],
        ],
    })
}

/// External recruitment matrix `R`; each empty patch fills independently
/// with probability `a`.
pub fn recruitment_matrix(a: f64) -> Result<TransitionMatrix> {
    let a = check_probability("a", a)?;
    let stay = 1.0 - a;
    Ok(TransitionMatrix {
        rows: [[stay * stay, 2.0 * a * stay, a * a], [0.0, stay, a], [0.0, 0.0, 1.0]],
    })
}

/// Local extinction matrix `L`; each occupied patch empties independently
/// with probability `b`.
pub fn local_extinction_matrix(b: f64) -> Result<TransitionMatrix> {
    let b = check_probability("b", b)?;
    let keep = 1.0 - b;
    Ok(TransitionMatrix {
        rows: [[1.0, 0.0, 0.0], [b, keep, 0.0], [b * b, 2.0 * b * keep, keep * keep]],
    })
}

/// One named event stage within a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "E")]
    Extinction,
    #[serde(rename = "L")]
    LocalExtinction,
    #[serde(rename = "C")]
    Colonisation,
    #[serde(rename = "R")]
    Recruitment,
}

impl Stage {
    pub fn symbol(self) -> &'static str {
        match self {
            Stage::Extinction => "E",
            Stage::LocalExtinction => "L",
            Stage::Colonisation => "C",
            Stage::Recruitment => "R",
        }
    }

    pub fn matrix(self, params: &ModelParams, d: Distance) -> Result<TransitionMatrix> {
        match self {
            Stage::Extinction => extinction_matrix(params.r(), params.mu(), d),
            Stage::LocalExtinction => local_extinction_matrix(params.b()),
            Stage::Colonisation => colonisation_matrix(params.alpha(), d),
            Stage::Recruitment => recruitment_matrix(params.a()),
        }
    }
}

impl ModelVariant {
    /// Stages in the order they act within a step.
    pub fn stages(self) -> &'static [Stage] {
        use Stage::*;
        match self {
            ModelVariant::Baseline => &[Extinction, Colonisation],
            ModelVariant::Recruitment => &[Extinction, Colonisation, Recruitment],
            ModelVariant::Full => &[Extinction, LocalExtinction, Colonisation, Recruitment],
        }
    }
}

/// The per-stage matrices of `variant`, in order of application.
pub fn stage_matrices(variant: ModelVariant, params: &ModelParams, d: Distance) -> Result<Vec<TransitionMatrix>> {
    variant.stages().iter().map(|stage| stage.matrix(params, d)).collect()
}

/// Full one-step transition matrix `A` of `variant` at distance `d`.
pub fn compose(variant: ModelVariant, params: &ModelParams, d: Distance) -> Result<TransitionMatrix> {
    let stages = stage_matrices(variant, params, d)?;
    let product = stages.iter().fold(TransitionMatrix::identity(), |acc, m| acc.then(m));
    debug_assert!(product.max_row_sum_error() <= ROW_SUM_TOL);
    Ok(product)
}

/// Advance a distribution one step: `p · A`.
pub fn step_distribution(p: &OccupancyDistribution, a: &TransitionMatrix) -> OccupancyDistribution {
    let mut next = [0.0; NUM_STATES];
    for (j, cell) in next.iter_mut().enumerate() {
        *cell = (0..NUM_STATES).map(|i| p.probs[i] * a.rows[i][j]).sum();
    }
    OccupancyDistribution::from_raw(next)
}
