//! Viability as a function of inter-reserve distance, and the search for the
//! distance that maximises it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compose, Distance, ModelParams, ModelVariant};
use crate::spectral::{decay_rate, stationary_distribution};

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_PLATEAU_EPS: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Share of the range, at the far end, that must be flat for a plateau.
const PLATEAU_TAIL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Maximise the second eigenvalue of an absorbing chain.
    QuasiExtinctionRate,
    /// Maximise `1 - pi[0]` of a chain with external recruitment.
    EquilibriumPersistence,
}

impl ObjectiveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::QuasiExtinctionRate => "quasi_extinction_rate",
            ObjectiveKind::EquilibriumPersistence => "equilibrium_persistence",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quasi_extinction_rate" | "lambda2" => Ok(ObjectiveKind::QuasiExtinctionRate),
            "equilibrium_persistence" | "persistence" => Ok(ObjectiveKind::EquilibriumPersistence),
            other => Err(format!(
                "unknown objective `{other}` (expected quasi_extinction_rate or equilibrium_persistence)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub variant: ModelVariant,
    pub kind: ObjectiveKind,
}

impl ObjectiveSpec {
    pub fn new(variant: ModelVariant, kind: ObjectiveKind) -> Self {
        ObjectiveSpec { variant, kind }
    }

    /// The natural objective for a variant: decay rate for the absorbing
    /// baseline, equilibrium persistence otherwise.
    pub fn default_for(variant: ModelVariant) -> Self {
        let kind = match variant {
            ModelVariant::Baseline => ObjectiveKind::QuasiExtinctionRate,
            _ => ObjectiveKind::EquilibriumPersistence,
        };
        ObjectiveSpec { variant, kind }
    }

    pub fn check(&self, params: &ModelParams) -> Result<()> {
        let incompatible = |reason| Error::IncompatibleObjective {
            kind: self.kind.to_string(),
            variant: self.variant.to_string(),
            reason,
        };
        match self.kind {
            ObjectiveKind::QuasiExtinctionRate if !self.variant.is_absorbing(params) => Err(incompatible(
                "the decay rate needs an absorbing extinct state, i.e. a = 0",
            )),
            ObjectiveKind::EquilibriumPersistence if self.variant == ModelVariant::Baseline => {
                Err(incompatible("the baseline chain has no external recruitment"))
            }
            ObjectiveKind::EquilibriumPersistence if params.a() == 0.0 => {
                Err(incompatible("equilibrium persistence needs external recruitment a > 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Objective value at distance `d`.
pub fn objective(spec: &ObjectiveSpec, params: &ModelParams, d: Distance) -> Result<f64> {
    spec.check(params)?;
    evaluate(spec, params, d)
}

fn evaluate(spec: &ObjectiveSpec, params: &ModelParams, d: Distance) -> Result<f64> {
    let a = compose(spec.variant, params, d)?;
    match spec.kind {
        ObjectiveKind::QuasiExtinctionRate => decay_rate(&a).map(|x| x.clamp(0.0, 1.0)),
        ObjectiveKind::EquilibriumPersistence => stationary_distribution(&a).map(|s| s.persistence),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub d: f64,
    pub value: f64,
}

/// `n_points` evenly spaced distances from `d_min` to `d_max` inclusive.
pub fn grid(d_min: f64, d_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(d_min.is_finite() && d_max.is_finite()) || d_min < 0.0 || d_min >= d_max {
        return Err(Error::InvalidRange(format!(
            "need 0 <= d_min < d_max, got [{d_min}, {d_max}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidRange(format!(
            "need at least 2 grid points, got {n_points}"
        )));
    }
    let last = (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|i| {
            if i + 1 == n_points {
                d_max
            } else {
                d_min + (d_max - d_min) * (i as f64) / last
            }
        })
        .collect())
}

/// Sample an arbitrary distance-dependent quantity on a uniform grid.
pub fn sweep_with<F>(mut f: F, d_min: f64, d_max: f64, n_points: usize) -> Result<Vec<CurvePoint>>
where
    F: FnMut(Distance) -> Result<f64>,
{
    grid(d_min, d_max, n_points)?
        .into_iter()
        .map(|d| {
            Ok(CurvePoint {
                d,
                value: f(Distance::new(d)?)?,
            })
        })
        .collect()
}

pub fn sweep(
    spec: &ObjectiveSpec,
    params: &ModelParams,
    d_min: f64,
    d_max: f64,
    n_points: usize,
) -> Result<Vec<CurvePoint>> {
    spec.check(params)?;
    sweep_with(|d| evaluate(spec, params, d), d_min, d_max, n_points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingOptimum {
    pub d_star: f64,
    pub value: f64,
    /// No interior maximum: `d_star` is the smallest distance whose value is
    /// within the plateau tolerance of the supremum.
    pub plateau: bool,
    pub curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub grid_points: usize,
    pub tol: f64,
    pub plateau_eps: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid_points: DEFAULT_GRID_POINTS,
            tol: DEFAULT_TOL,
            plateau_eps: DEFAULT_PLATEAU_EPS,
        }
    }
}

/// Default search range `[0, 20 max(mu, 1/alpha)]`.
pub fn default_range(params: &ModelParams) -> (f64, f64) {
    (0.0, 20.0 * params.mu().max(params.dispersal_distance()))
}

pub fn optimize_spacing(
    spec: &ObjectiveSpec,
    params: &ModelParams,
    d_min: f64,
    d_max: f64,
    tol: f64,
) -> Result<SpacingOptimum> {
    let opts = SearchOptions {
        tol,
        ..SearchOptions::default()
    };
    optimize_spacing_with(spec, params, d_min, d_max, &opts)
}

pub fn optimize_spacing_with(
    spec: &ObjectiveSpec,
    params: &ModelParams,
    d_min: f64,
    d_max: f64,
    opts: &SearchOptions,
) -> Result<SpacingOptimum> {
    spec.check(params)?;
    maximize(|d| evaluate(spec, params, Distance::new(d)?), d_min, d_max, opts)
}

/// Grid scan, then golden-section refinement around the best grid point.
///
/// When the best value is reached (within `plateau_eps`) at `d_max` and the
/// final tenth of the range is flat, the curve is treated as a plateau and the
/// smallest near-supremum distance is returned instead.
pub fn maximize<F>(f: F, d_min: f64, d_max: f64, opts: &SearchOptions) -> Result<SpacingOptimum>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidRange(format!("tol must be > 0, got {}", opts.tol)));
    }
    if opts.grid_points < 3 {
        return Err(Error::InvalidRange(format!(
            "need at least 3 grid points, got {}",
            opts.grid_points
        )));
    }
    let ds = grid(d_min, d_max, opts.grid_points)?;
    let curve = ds
        .iter()
        .map(|&d| Ok(CurvePoint { d, value: f(d)? }))
        .collect::<Result<Vec<_>>>()?;

    let best_value = curve.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let best = curve.iter().position(|p| p.value == best_value).unwrap_or(0);
    let eps = opts.plateau_eps;

    let tail_start = d_max - PLATEAU_TAIL * (d_max - d_min);
    let tail: Vec<f64> = curve.iter().filter(|p| p.d >= tail_start).map(|p| p.value).collect();
    let tail_variation: f64 = tail.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let last = curve[curve.len() - 1].value;

    if last >= best_value - eps && tail_variation < eps {
        let threshold = best_value - eps;
        let first = curve.iter().position(|p| p.value >= threshold).unwrap_or(0);
        let (d_star, value) = if first == 0 {
            (curve[0].d, curve[0].value)
        } else {
            first_crossing(
                &f,
                curve[first - 1].d,
                curve[first].d,
                curve[first].value,
                threshold,
                opts.tol,
            )?
        };
        return Ok(SpacingOptimum {
            d_star,
            value,
            plateau: true,
            curve,
        });
    }

    let lo = curve[best.saturating_sub(1)].d;
    let hi = curve[(best + 1).min(curve.len() - 1)].d;
    let (x, fx) = golden_section_max(&f, lo, hi, 0.25 * opts.tol)?;
    let (d_star, value) = if fx >= best_value {
        (x, fx)
    } else {
        (curve[best].d, best_value)
    };
    Ok(SpacingOptimum {
        d_star,
        value,
        plateau: false,
        curve,
    })
}

/// Smallest `d` in `(below, above]` (to within `tol`) with `f(d) >= threshold`,
/// given `f(below) < threshold <= f(above)`.
fn first_crossing<F>(
    f: &F,
    mut below: f64,
    mut above: f64,
    mut above_value: f64,
    threshold: f64,
    tol: f64,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    while above - below > tol {
        let mid = 0.5 * (below + above);
        let v = f(mid)?;
        if v >= threshold {
            above = mid;
            above_value = v;
        } else {
            below = mid;
        }
    }
    Ok((above, above_value))
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, shrinking the
/// bracket below `width`. Returns the best interior point and its value.
pub fn golden_section_max<F>(f: &F, mut lo: f64, mut hi: f64, width: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > width {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
