#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reserve_spacing::{ModelParams, ModelVariant};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square goodness of fit. Cells with expected count below 5 are
/// pooled (smallest first) so the asymptotic distribution holds. Returns
/// `None` when fewer than two pooled cells remain.
pub fn chi_square(observed: &[u64], probs: &[f64], significance: f64) -> Option<(f64, f64)> {
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| (o as f64, p * n as f64))
        .collect();
    cells.sort_by(|x, y| x.1.total_cmp(&y.1));
    while cells.len() > 1 && cells[0].1 < 5.0 {
        let (o, e) = cells.remove(0);
        cells[0].0 += o;
        cells[0].1 += e;
        cells.sort_by(|x, y| x.1.total_cmp(&y.1));
    }
    if cells.len() < 2 {
        return None;
    }
    let stat = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (cells.len() - 1) as f64;
    let critical = ChiSquared::new(df).ok()?.inverse_cdf(1.0 - significance);
    Some((stat, critical))
}

/// Random valid parameters for `variant`; recruitment variants get `a > 0`.
pub fn random_params(rng: &mut ChaCha8Rng, variant: ModelVariant) -> ModelParams {
    let r = rng.gen_range(0.01..0.99);
    let mu = rng.gen_range(0.5..50.0);
    let alpha = rng.gen_range(0.01..1.0);
    let (a, b) = match variant {
        ModelVariant::Baseline => (0.0, 0.0),
        ModelVariant::Recruitment => (rng.gen_range(0.001..1.0), 0.0),
        ModelVariant::Full => (rng.gen_range(0.001..1.0), rng.gen_range(0.0..1.0)),
    };
    ModelParams::new(r, mu, alpha, a, b).expect("sampled inside bounds")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
