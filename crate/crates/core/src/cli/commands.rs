use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{colonisation_matrix, compose, extinction_matrix, ModelParams, ModelVariant, Stage};
use crate::sim::{estimate_stationary, estimate_survival, SimConfig, SimulationEstimate, DEFAULT_BURN_IN};
use crate::spacing::{optimize_spacing_with, sweep, sweep_with, ObjectiveKind, ObjectiveSpec, SpacingOptimum};
use crate::spectral::{evolve, stationary_distribution};

use super::config::{ConfigError, MatrixFormat, Quantity, RunConfig, SimMode, Units};
use super::format::{fmt12, round12, write_csv, CurveRecord};
use super::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn config_err(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(ConfigError::Invalid {
        key: key.to_string(),
        message: message.to_string(),
    })
}

/// Incompatible objective/variant pairs are configuration mistakes, caught
/// before any computation starts.
fn check_spec(spec: &ObjectiveSpec, params: &ModelParams, label: &Option<String>) -> Result<()> {
    spec.check(params).map_err(|e| {
        let key = label
            .as_ref()
            .map_or("objective".to_string(), |l| format!("objective (series {l})"));
        config_err(&key, e)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub rows: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub variant: ModelVariant,
    pub d: f64,
    pub params: ModelParams,
    pub units: Units,
    pub matrices: Vec<NamedMatrix>,
}

fn stage_for(name: &str) -> Option<Stage> {
    match name {
        "E" => Some(Stage::Extinction),
        "L" => Some(Stage::LocalExtinction),
        "C" => Some(Stage::Colonisation),
        "R" => Some(Stage::Recruitment),
        _ => None,
    }
}

pub fn run_matrix(cfg: &RunConfig) -> Result<String> {
    let variant = cfg.variant();
    let params = cfg.base_params()?;
    let d = cfg.distance()?;
    let names: Vec<String> = match &cfg.matrices {
        Some(list) => list.iter().map(|s| s.trim().to_ascii_uppercase()).collect(),
        None => variant
            .stages()
            .iter()
            .map(|s| s.symbol().to_string())
            .chain(std::iter::once("A".to_string()))
            .collect(),
    };
    if let Some(bad) = names.iter().find(|n| n.as_str() != "A" && stage_for(n).is_none()) {
        return Err(config_err(
            "matrices",
            format!("unknown matrix `{bad}` (expected E, L, C, R or A)"),
        ));
    }

    let mut matrices = Vec::with_capacity(names.len());
    for name in names {
        let m = match stage_for(&name) {
            Some(stage) => stage.matrix(&params, d)?,
            None => compose(variant, &params, d)?,
        };
        let rows = m.rows().map(|row| row.map(round12));
        matrices.push(NamedMatrix { name, rows });
    }
    let report = MatrixReport {
        variant,
        d: d.get(),
        params,
        units: cfg.units(),
        matrices,
    };
    match cfg.format.unwrap_or(MatrixFormat::Text) {
        MatrixFormat::Json => Ok(to_json(&report)),
        MatrixFormat::Text => Ok(matrix_text(&report)),
    }
}

fn matrix_text(report: &MatrixReport) -> String {
    let p = &report.params;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# variant={} d={} {} (one step = one {})",
        report.variant,
        fmt12(report.d),
        report.units.distance,
        report.units.time
    );
    let _ = writeln!(
        out,
        "# r={} mu={} alpha={} a={} b={}",
        fmt12(p.r()),
        fmt12(p.mu()),
        fmt12(p.alpha()),
        fmt12(p.a()),
        fmt12(p.b())
    );
    for m in &report.matrices {
        let _ = writeln!(out, "\n{}", m.name);
        let _ = writeln!(out, "{:<8}{:>16}{:>16}{:>16}", "from\\to", "0", "1", "2");
        for (i, row) in m.rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<8}{:>16}{:>16}{:>16}",
                i,
                fmt12(row[0]),
                fmt12(row[1]),
                fmt12(row[2])
            );
        }
    }
    out
}

/// Curve records for every series, in series order and ascending distance.
pub fn sweep_records(cfg: &RunConfig) -> Result<Vec<CurveRecord>> {
    let variant = cfg.variant();
    let quantity = cfg.quantity(variant);
    let (d_min, d_max, n) = cfg.sweep_range()?;
    let sets = cfg.parameter_sets()?;
    if let Some(kind) = quantity.objective_kind() {
        let spec = ObjectiveSpec::new(variant, kind);
        for (label, params) in &sets {
            check_spec(&spec, params, label)?;
        }
    }

    let mut records = Vec::with_capacity(sets.len() * n);
    for (label, params) in &sets {
        let curve = match quantity {
            Quantity::ColonisationProbability => sweep_with(
                |d| Ok(colonisation_matrix(params.alpha(), d)?.get(1, 2)),
                d_min,
                d_max,
                n,
            )?,
            Quantity::SharedCatastropheProbability => sweep_with(
                |d| Ok(extinction_matrix(params.r(), params.mu(), d)?.get(2, 0)),
                d_min,
                d_max,
                n,
            )?,
            Quantity::QuasiExtinctionRate | Quantity::EquilibriumPersistence => {
                let kind = quantity.objective_kind().unwrap_or(ObjectiveKind::QuasiExtinctionRate);
                sweep(&ObjectiveSpec::new(variant, kind), params, d_min, d_max, n)?
            }
        };
        let series = label.clone().unwrap_or_else(|| "default".to_string());
        records.extend(curve.into_iter().map(|p| CurveRecord {
            series: series.clone(),
            d: p.d,
            value: p.value,
        }));
    }
    Ok(records)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<String> {
    Ok(write_csv(&sweep_records(cfg)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    pub variant: ModelVariant,
    pub objective: ObjectiveKind,
    pub params: ModelParams,
    pub d_min: f64,
    pub d_max: f64,
    pub tol: f64,
    pub units: Units,
    #[serde(flatten)]
    pub optimum: SpacingOptimum,
}

pub fn optimize_reports(cfg: &RunConfig) -> Result<Vec<OptimizeReport>> {
    let variant = cfg.variant();
    let spec = cfg.objective_spec(variant)?;
    let opts = cfg.search_options()?;
    let sets = cfg.parameter_sets()?;
    let mut jobs = Vec::with_capacity(sets.len());
    for (label, params) in sets {
        check_spec(&spec, &params, &label)?;
        let range = cfg.search_range(&params)?;
        jobs.push((label, params, range));
    }
    jobs.into_iter()
        .map(|(series, params, (d_min, d_max))| {
            let optimum = optimize_spacing_with(&spec, &params, d_min, d_max, &opts)?;
            Ok(OptimizeReport {
                series,
                variant,
                objective: spec.kind,
                params,
                d_min,
                d_max,
                tol: opts.tol,
                units: cfg.units(),
                optimum,
            })
        })
        .collect()
}

pub fn run_optimize(cfg: &RunConfig) -> Result<String> {
    let reports = optimize_reports(cfg)?;
    Ok(match reports.as_slice() {
        [single] if cfg.series.is_none() => to_json(single),
        _ => to_json(&reports),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub estimate: SimulationEstimate,
    pub analytic: f64,
    pub z: Option<f64>,
}

impl Comparison {
    fn new(estimate: SimulationEstimate, analytic: f64) -> Self {
        Comparison {
            estimate,
            analytic,
            z: estimate.z_score(analytic),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub mode: SimMode,
    pub variant: ModelVariant,
    pub params: ModelParams,
    pub d: f64,
    pub n_reps: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<[f64; 3]>,
    /// `true` when no initial distribution was configured and both reserves
    /// start occupied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_is_default: Option<bool>,
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival: Option<Comparison>,
    /// Per-state comparisons for states 0, 1, 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<Comparison>>,
}

pub fn simulate_report(cfg: &RunConfig) -> Result<SimulateReport> {
    let variant = cfg.variant();
    let params = cfg.base_params()?;
    let d = cfg.distance()?;
    let seed = cfg
        .seed
        .ok_or_else(|| config_err("seed", "simulate needs an explicit seed (--seed or \"seed\")"))?;
    let n_reps = cfg.n_reps()?;
    let mode = cfg.mode.unwrap_or(SimMode::Survival);
    let base = SimConfig::new(variant, params, d, n_reps, cfg.horizon.unwrap_or(20), seed)?;
    let mut report = SimulateReport {
        mode,
        variant,
        params,
        d: d.get(),
        n_reps,
        seed,
        horizon: None,
        burn_in: None,
        initial: None,
        initial_is_default: None,
        units: cfg.units(),
        survival: None,
        stationary: None,
    };
    match mode {
        SimMode::Survival => {
            let (initial, is_default) = cfg.initial()?;
            let a = compose(variant, &params, d)?;
            let analytic = evolve(&a, &initial, base.horizon).extant();
            let estimate = estimate_survival(&base, &initial)?;
            report.horizon = Some(base.horizon);
            report.initial = Some(*initial.probs());
            report.initial_is_default = Some(is_default);
            report.survival = Some(Comparison::new(estimate, analytic));
        }
        SimMode::Stationary => {
            if variant.is_absorbing(&params) {
                return Err(config_err(
                    "mode",
                    "stationary mode needs external recruitment (variant recruitment or full with a > 0)",
                ));
            }
            let cfg_sim = base.with_burn_in(cfg.burn_in.unwrap_or(DEFAULT_BURN_IN));
            let pi = stationary_distribution(&compose(variant, &params, d)?)?.pi;
            let est = estimate_stationary(&cfg_sim)?;
            report.burn_in = Some(cfg_sim.burn_in);
            report.stationary = Some((0..3).map(|k| Comparison::new(est.state(k), pi.probs()[k])).collect());
        }
    }
    Ok(report)
}

pub fn run_simulate(cfg: &RunConfig) -> Result<String> {
    Ok(to_json(&simulate_report(cfg)?))
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
    s.push('\n');
    s
}
