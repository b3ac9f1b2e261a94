//! Named parameter sets for the standard sweeps.

use std::fmt;
use std::str::FromStr;

use crate::model::ModelVariant;

use super::config::{ParamOverrides, Quantity, RunConfig, SeriesConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Colonisation probability for alpha in {0.01, 0.1, 0.2}.
    Fig3,
    /// Shared-catastrophe probability for mu in {20, 30, 40}, r = 0.5.
    Fig5,
    /// Baseline decay rate for mu in {5, 10, 20}, r = 0.5, alpha = 0.1.
    Fig6,
    /// Persistence with recruitment for a in {0.05, 0.075, 0.1}.
    Fig8,
    /// Persistence with local extinction for b in {0.025, 0.05, 0.1}, a = 0.1.
    Fig9,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig3, Preset::Fig5, Preset::Fig6, Preset::Fig8, Preset::Fig9];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
        }
    }

    pub fn config(self) -> RunConfig {
        let base = ParamOverrides {
            r: Some(0.5),
            mu: Some(5.0),
            alpha: Some(0.1),
            a: None,
            b: None,
        };
        let (variant, quantity, params, key, values): (_, _, _, &str, &[f64]) = match self {
            Preset::Fig3 => (
                ModelVariant::Baseline,
                Quantity::ColonisationProbability,
                base,
                "alpha",
                &[0.01, 0.1, 0.2],
            ),
            Preset::Fig5 => (
                ModelVariant::Baseline,
                Quantity::SharedCatastropheProbability,
                base,
                "mu",
                &[20.0, 30.0, 40.0],
            ),
            Preset::Fig6 => (
                ModelVariant::Baseline,
                Quantity::QuasiExtinctionRate,
                base,
                "mu",
                &[5.0, 10.0, 20.0],
            ),
            Preset::Fig8 => (
                ModelVariant::Recruitment,
                Quantity::EquilibriumPersistence,
                base,
                "a",
                &[0.05, 0.075, 0.1],
            ),
            Preset::Fig9 => (
                ModelVariant::Full,
                Quantity::EquilibriumPersistence,
                ParamOverrides { a: Some(0.1), ..base },
                "b",
                &[0.025, 0.05, 0.1],
            ),
        };
        let series = values
            .iter()
            .map(|&v| {
                let mut p = ParamOverrides::default();
                match key {
                    "alpha" => p.alpha = Some(v),
                    "mu" => p.mu = Some(v),
                    "a" => p.a = Some(v),
                    _ => p.b = Some(v),
                }
                SeriesConfig {
                    label: format!("{key}={v}"),
                    params: p,
                }
            })
            .collect();
        RunConfig {
            variant: Some(variant),
            params: Some(params),
            objective: Some(quantity),
            series: Some(series),
            d_min: Some(0.0),
            d_max: Some(100.0),
            n_points: Some(401),
            ..RunConfig::default()
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig3, fig5, fig6, fig8 or fig9)"))
    }
}
