//! Run configuration: a JSON document layered as preset < file < flags, then
//! validated into a typed job before anything is computed.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Distance, ModelParams, ModelVariant, OccupancyDistribution};
use crate::spacing::{
    ObjectiveKind, ObjectiveSpec, SearchOptions, DEFAULT_GRID_POINTS, DEFAULT_PLATEAU_EPS, DEFAULT_TOL,
};

use super::format::valid_label;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{0}")]
    Io(String),
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl ParamOverrides {
    pub fn merge(self, over: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            r: over.r.or(self.r),
            mu: over.mu.or(self.mu),
            alpha: over.alpha.or(self.alpha),
            a: over.a.or(self.a),
            b: over.b.or(self.b),
        }
    }

    /// `r`, `mu` and `alpha` are required; `a` and `b` default to zero.
    pub fn resolve(&self, prefix: &str) -> Result<ModelParams> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| ConfigError::invalid(format!("{prefix}.{name}"), "missing required parameter"))
        };
        let r = need(self.r, "r")?;
        let mu = need(self.mu, "mu")?;
        let alpha = need(self.alpha, "alpha")?;
        ModelParams::new(r, mu, alpha, self.a.unwrap_or(0.0), self.b.unwrap_or(0.0)).map_err(|e| match e {
            crate::Error::InvalidParameter { name, .. } => ConfigError::invalid(format!("{prefix}.{name}"), e),
            other => ConfigError::invalid(prefix, other),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub label: String,
    #[serde(default)]
    pub params: ParamOverrides,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub distance: String,
    pub time: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            distance: "km".into(),
            time: "year".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Survival,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Text,
    Json,
}

/// What a sweep evaluates at each distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    QuasiExtinctionRate,
    EquilibriumPersistence,
    /// `exp(-alpha d)`, the chance an empty reserve is recolonised.
    ColonisationProbability,
    /// `r exp(-d / mu)`, the chance a catastrophe occurs and hits both reserves.
    SharedCatastropheProbability,
}

impl Quantity {
    pub fn objective_kind(self) -> Option<ObjectiveKind> {
        match self {
            Quantity::QuasiExtinctionRate => Some(ObjectiveKind::QuasiExtinctionRate),
            Quantity::EquilibriumPersistence => Some(ObjectiveKind::EquilibriumPersistence),
            _ => None,
        }
    }
}

impl From<ObjectiveKind> for Quantity {
    fn from(k: ObjectiveKind) -> Self {
        match k {
            ObjectiveKind::QuasiExtinctionRate => Quantity::QuasiExtinctionRate,
            ObjectiveKind::EquilibriumPersistence => Quantity::EquilibriumPersistence,
        }
    }
}

/// Every key any subcommand understands. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<ModelVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesConfig>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<MatrixFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<SimMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
}

macro_rules! layer {
    ($base:ident, $over:ident; $($field:ident),*) => {
        RunConfig { $($field: $over.$field.or($base.$field),)* ..RunConfig::default() }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Keys set in `over` win; parameter blocks merge key by key.
    pub fn layer(self, over: RunConfig) -> RunConfig {
        let params = match (self.params, over.params) {
            (Some(b), Some(o)) => Some(b.merge(o)),
            (b, o) => o.or(b),
        };
        let base = self;
        RunConfig {
            params,
            ..layer!(base, over; variant, d, objective, series, d_min, d_max, n_points, grid_points,
                tol, plateau_eps, matrices, format, mode, n_reps, horizon, burn_in, seed, initial, units)
        }
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant.unwrap_or(ModelVariant::Baseline)
    }

    pub fn base_params(&self) -> Result<ModelParams> {
        self.params.unwrap_or_default().resolve("params")
    }

    pub fn distance(&self) -> Result<Distance> {
        let d = self
            .d
            .ok_or_else(|| ConfigError::invalid("d", "missing required distance"))?;
        Distance::new(d).map_err(|e| ConfigError::invalid("d", e))
    }

    pub fn units(&self) -> Units {
        self.units.clone().unwrap_or_default()
    }

    /// Labelled parameter sets: one per series, or a single unlabelled set.
    pub fn parameter_sets(&self) -> Result<Vec<(Option<String>, ModelParams)>> {
        let base = self.params.unwrap_or_default();
        match &self.series {
            None => Ok(vec![(None, base.resolve("params")?)]),
            Some(list) if list.is_empty() => Err(ConfigError::invalid("series", "must not be empty")),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    if !valid_label(&s.label) {
                        return Err(ConfigError::invalid(
                            format!("series[{i}].label"),
                            format!("`{}` must be non-empty without commas, quotes or newlines", s.label),
                        ));
                    }
                    let params = base.merge(s.params).resolve(&format!("series[{i}].params"))?;
                    Ok((Some(s.label.clone()), params))
                })
                .collect(),
        }
    }

    pub fn quantity(&self, variant: ModelVariant) -> Quantity {
        self.objective
            .unwrap_or_else(|| ObjectiveSpec::default_for(variant).kind.into())
    }

    pub fn objective_spec(&self, variant: ModelVariant) -> Result<ObjectiveSpec> {
        let q = self.quantity(variant);
        q.objective_kind()
            .map(|kind| ObjectiveSpec::new(variant, kind))
            .ok_or_else(|| ConfigError::invalid("objective", "closed-form curves can only be swept, not optimised"))
    }

    fn range(&self, default: (f64, f64)) -> Result<(f64, f64)> {
        let d_min = self.d_min.unwrap_or(default.0);
        let d_max = self.d_max.unwrap_or(default.1);
        if !(d_min.is_finite() && d_max.is_finite()) || d_min < 0.0 || d_min >= d_max {
            return Err(ConfigError::invalid(
                "d_min/d_max",
                format!("need 0 <= d_min < d_max, got [{d_min}, {d_max}]"),
            ));
        }
        Ok((d_min, d_max))
    }

    pub fn sweep_range(&self) -> Result<(f64, f64, usize)> {
        let (lo, hi) = self.range((0.0, 100.0))?;
        let n = self.n_points.unwrap_or(401);
        if n < 2 {
            return Err(ConfigError::invalid("n_points", format!("must be >= 2, got {n}")));
        }
        Ok((lo, hi, n))
    }

    pub fn search_range(&self, params: &ModelParams) -> Result<(f64, f64)> {
        self.range(crate::spacing::default_range(params))
    }

    pub fn search_options(&self) -> Result<SearchOptions> {
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(ConfigError::invalid("tol", format!("must be > 0, got {tol}")));
        }
        let plateau_eps = self.plateau_eps.unwrap_or(DEFAULT_PLATEAU_EPS);
        if !(plateau_eps.is_finite() && plateau_eps >= 0.0) {
            return Err(ConfigError::invalid(
                "plateau_eps",
                format!("must be >= 0, got {plateau_eps}"),
            ));
        }
        let grid_points = self.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 3 {
            return Err(ConfigError::invalid(
                "grid_points",
                format!("must be >= 3, got {grid_points}"),
            ));
        }
        Ok(SearchOptions {
            grid_points,
            tol,
            plateau_eps,
        })
    }

    pub fn initial(&self) -> Result<(OccupancyDistribution, bool)> {
        match self.initial {
            None => Ok((OccupancyDistribution::both_occupied(), true)),
            Some(p) => OccupancyDistribution::new(p)
                .map(|d| (d, false))
                .map_err(|e| ConfigError::invalid("initial", e)),
        }
    }

    pub fn n_reps(&self) -> Result<u64> {
        match self.n_reps.unwrap_or(100_000) {
            0 => Err(ConfigError::invalid("n_reps", "must be >= 1")),
            n => Ok(n),
        }
    }
}
