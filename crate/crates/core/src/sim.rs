//! Seeded Monte Carlo simulation of the two-reserve occupancy process.
//!
//! Each time step samples the stage matrices one after another, in the same
//! order the analytic composition multiplies them. Replicate `k` draws from
//! ChaCha8 stream `k` under the configured seed, so results do not depend on
//! the order in which replicates run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stage_matrices, Distance, ModelParams, ModelVariant, OccupancyDistribution, NUM_STATES};

pub const DEFAULT_BURN_IN: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub variant: ModelVariant,
    pub params: ModelParams,
    pub d: Distance,
    pub n_reps: u64,
    pub horizon: usize,
    pub seed: u64,
    pub burn_in: usize,
}

impl SimConfig {
    pub fn new(
        variant: ModelVariant,
        params: ModelParams,
        d: Distance,
        n_reps: u64,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            variant,
            params,
            d,
            n_reps,
            horizon,
            seed,
            burn_in: DEFAULT_BURN_IN,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidSimConfig("n_reps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl SimulationEstimate {
    /// Binomial proportion `successes / n` with its standard error.
    pub fn from_counts(successes: u64, n: u64) -> Self {
        let mean = successes as f64 / n as f64;
        SimulationEstimate {
            mean,
            std_error: (mean * (1.0 - mean) / n as f64).sqrt(),
            n,
        }
    }

    /// `(mean - expected) / std_error`; zero when both the error and the
    /// difference vanish, `None` when only the error does.
    pub fn z_score(&self, expected: f64) -> Option<f64> {
        let diff = self.mean - expected;
        if self.std_error > 0.0 {
            Some(diff / self.std_error)
        } else if diff.abs() <= 1e-12 {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Empirical occupancy frequencies with per-state standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryEstimate {
    pub probs: [f64; NUM_STATES],
    pub std_errors: [f64; NUM_STATES],
    pub n: u64,
}

impl StationaryEstimate {
    pub fn state(&self, k: usize) -> SimulationEstimate {
        SimulationEstimate {
            mean: self.probs[k],
            std_error: self.std_errors[k],
            n: self.n,
        }
    }
}

/// Categorical sampler over one transition row.
#[derive(Debug, Clone, Copy)]
struct RowSampler {
    probs: [f64; NUM_STATES],
    last_positive: usize,
}

impl RowSampler {
    fn new(probs: [f64; NUM_STATES]) -> Self {
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        RowSampler { probs, last_positive }
    }

    #[inline]
    fn sample(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (j, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        self.last_positive
    }
}

/// The stage matrices of one variant, ready for sampling.
#[derive(Debug, Clone)]
pub struct StageChain {
    stages: Vec<[RowSampler; NUM_STATES]>,
    absorbing: bool,
}

impl StageChain {
    pub fn new(variant: ModelVariant, params: &ModelParams, d: Distance) -> Result<Self> {
        let stages = stage_matrices(variant, params, d)?
            .iter()
            .map(|m| {
                let rows = m.rows();
                [
                    RowSampler::new(rows[0]),
                    RowSampler::new(rows[1]),
                    RowSampler::new(rows[2]),
                ]
            })
            .collect();
        Ok(StageChain {
            stages,
            absorbing: variant.is_absorbing(params),
        })
    }

    /// Advance `state` through every stage of one time step.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&self, mut state: usize, rng: &mut R) -> usize {
        for stage in &self.stages {
            state = stage[state].sample(rng.gen::<f64>());
        }
        state
    }

    pub fn run<R: Rng + ?Sized>(&self, mut state: usize, steps: usize, rng: &mut R) -> usize {
        for _ in 0..steps {
            if state == 0 && self.absorbing {
                break;
            }
            state = self.step(state, rng);
        }
        state
    }
}

/// One staged time step from `state`.
pub fn simulate_step<R: Rng + ?Sized>(
    state: usize,
    variant: ModelVariant,
    params: &ModelParams,
    d: Distance,
    rng: &mut R,
) -> Result<usize> {
    if state >= NUM_STATES {
        return Err(Error::InvalidSimConfig(format!("state {state} is not one of 0, 1, 2")));
    }
    Ok(StageChain::new(variant, params, d)?.step(state, rng))
}

/// Generator for replicate `rep`: ChaCha8 keyed by `seed`, stream `rep`.
pub fn replicate_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Fraction of replicates still extant after `cfg.horizon` steps, each
/// starting from a state drawn from `initial`.
pub fn estimate_survival(cfg: &SimConfig, initial: &OccupancyDistribution) -> Result<SimulationEstimate> {
    cfg.validate()?;
    let chain = StageChain::new(cfg.variant, &cfg.params, cfg.d)?;
    let start = RowSampler::new(*initial.probs());
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alive = 0u64;
    for rep in 0..cfg.n_reps {
        let mut rng = base.clone();
        rng.set_stream(rep);
        let s0 = start.sample(rng.gen::<f64>());
        if chain.run(s0, cfg.horizon, &mut rng) != 0 {
            alive += 1;
        }
    }
    Ok(SimulationEstimate::from_counts(alive, cfg.n_reps))
}

/// Long-run occupancy: every replicate starts with both reserves occupied,
/// runs `cfg.burn_in` steps, and its final state is pooled.
pub fn estimate_stationary(cfg: &SimConfig) -> Result<StationaryEstimate> {
    cfg.validate()?;
    if cfg.variant.is_absorbing(&cfg.params) {
        return Err(Error::Reducible(
            "state 0 is absorbing (no external recruitment); stationary occupancy is trivial",
        ));
    }
    let chain = StageChain::new(cfg.variant, &cfg.params, cfg.d)?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = [0u64; NUM_STATES];
    for rep in 0..cfg.n_reps {
        let mut rng = base.clone();
        rng.set_stream(rep);
        counts[chain.run(2, cfg.burn_in, &mut rng)] += 1;
    }
    let per_state = counts.map(|c| SimulationEstimate::from_counts(c, cfg.n_reps));
    Ok(StationaryEstimate {
        probs: per_state.map(|e| e.mean),
        std_errors: per_state.map(|e| e.std_error),
        n: cfg.n_reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compose;

    fn baseline(r: f64) -> ModelParams {
        ModelParams::baseline(r, 5.0, 0.1).unwrap()
    }

    #[test]
    fn extinct_state_stays_extinct() {
        let mut rng = replicate_rng(1, 0);
        for _ in 0..1000 {
            let s = simulate_step(0, ModelVariant::Baseline, &baseline(0.9), Distance::ZERO, &mut rng).unwrap();
            assert_eq!(s, 0);
        }
    }

    #[test]
    fn zero_distance_step_is_all_or_nothing() {
        let chain = StageChain::new(ModelVariant::Baseline, &baseline(0.5), Distance::ZERO).unwrap();
        let mut rng = replicate_rng(7, 0);
        let n = 100_000;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            counts[chain.step(2, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        // Chi-square with one degree of freedom against (0.5, 0.5); 10.83 is
        // the 0.001 critical value.
        let e = n as f64 / 2.0;
        let chi2 = [counts[0], counts[2]]
            .iter()
            .map(|&c| (c as f64 - e).powi(2) / e)
            .sum::<f64>();
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn row_sampler_skips_zero_cells() {
        let s = RowSampler::new([0.0, 1.0, 0.0]);
        assert_eq!(s.sample(0.0), 1);
        assert_eq!(s.sample(0.999_999_999), 1);
        // Row summing to slightly under one: overflow lands on the last
        // positive cell, never on a zero one.
        let s = RowSampler::new([0.5, 0.5 - 1e-13, 0.0]);
        assert_eq!(s.sample(0.999_999_999_999_99), 1);
    }

    #[test]
    fn horizon_zero_is_certain_survival() {
        let cfg = SimConfig::new(
            ModelVariant::Baseline,
            baseline(0.5),
            Distance::new(10.0).unwrap(),
            1000,
            0,
            3,
        )
        .unwrap();
        let est = estimate_survival(&cfg, &OccupancyDistribution::both_occupied()).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.z_score(1.0), Some(0.0));
    }

    #[test]
    fn same_seed_same_estimate() {
        let p = ModelParams::new(0.5, 5.0, 0.1, 0.1, 0.05).unwrap();
        let cfg = SimConfig::new(ModelVariant::Full, p, Distance::new(10.0).unwrap(), 20_000, 15, 99)
            .unwrap()
            .with_burn_in(50);
        let start = OccupancyDistribution::new([0.0, 0.5, 0.5]).unwrap();
        assert_eq!(
            estimate_survival(&cfg, &start).unwrap(),
            estimate_survival(&cfg, &start).unwrap()
        );
        assert_eq!(estimate_stationary(&cfg).unwrap(), estimate_stationary(&cfg).unwrap());
        let other = SimConfig { seed: 100, ..cfg };
        assert_ne!(
            estimate_survival(&cfg, &start).unwrap(),
            estimate_survival(&other, &start).unwrap()
        );
    }

    #[test]
    fn stationary_requires_recruitment() {
        let cfg = SimConfig::new(ModelVariant::Baseline, baseline(0.5), Distance::ZERO, 10, 1, 0).unwrap();
        assert!(matches!(estimate_stationary(&cfg), Err(Error::Reducible(_))));
        let cfg = SimConfig {
            variant: ModelVariant::Recruitment,
            ..cfg
        };
        assert!(matches!(estimate_stationary(&cfg), Err(Error::Reducible(_))));
    }

    #[test]
    fn certain_recruitment_occupies_everything() {
        let p = ModelParams::new(0.5, 5.0, 0.1, 1.0, 0.0).unwrap();
        let cfg = SimConfig::new(ModelVariant::Recruitment, p, Distance::new(10.0).unwrap(), 5_000, 0, 11)
            .unwrap()
            .with_burn_in(1);
        let est = estimate_stationary(&cfg).unwrap();
        assert_eq!(est.probs, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_replicates_rejected() {
        assert!(SimConfig::new(ModelVariant::Baseline, baseline(0.5), Distance::ZERO, 0, 1, 0).is_err());
    }

    #[test]
    fn staged_rows_compose_to_transition_matrix() {
        // Exact check without sampling: pushing a point mass through each
        // stage reproduces the composed row.
        let p = ModelParams::new(0.4, 6.0, 0.2, 0.15, 0.07).unwrap();
        let d = Distance::new(9.0).unwrap();
        let a = compose(ModelVariant::Full, &p, d).unwrap();
        let stages = stage_matrices(ModelVariant::Full, &p, d).unwrap();
        for s in 0..3 {
            let mut dist = OccupancyDistribution::point_mass(s).unwrap();
            for m in &stages {
                dist = dist.step(m);
            }
            for k in 0..3 {
                assert!((dist.probs()[k] - a.get(s, k)).abs() < 1e-15);
            }
        }
    }
}
