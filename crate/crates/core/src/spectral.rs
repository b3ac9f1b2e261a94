//! Viability measures of a composed chain.
//!
//! Without external recruitment the extinct state absorbs, and the long-run
//! decay rate of the survival probability is the dominant eigenvalue of the
//! 2×2 block of `A` on the occupied states `{1, 2}`. With recruitment the
//! chain has a unique stationary distribution `pi` and the persistence
//! measure is `1 - pi[0]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compose, Distance, ModelParams, ModelVariant, OccupancyDistribution, TransitionMatrix, NUM_STATES};

/// Dominant eigenvalue of the transient block and its left eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Per-step decay rate of the survival probability from quasi-equilibrium.
    pub lambda2: f64,
    /// Quasi-stationary distribution over states `(1, 2)`.
    pub qsd: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySummary {
    pub pi: OccupancyDistribution,
    /// Probability that at least one reserve is occupied at equilibrium.
    pub persistence: f64,
}

fn transient_block(a: &TransitionMatrix) -> Result<[[f64; 2]; 2]> {
    if a.row(0) != &[1.0, 0.0, 0.0] {
        return Err(Error::NotAbsorbing);
    }
    Ok([[a.get(1, 1), a.get(1, 2)], [a.get(2, 1), a.get(2, 2)]])
}

/// Larger root of the block's characteristic quadratic. Both terms are
/// non-negative for a non-negative block so the sum never cancels.
fn block_radius(block: &[[f64; 2]; 2]) -> f64 {
    let [[p, q], [s, t]] = *block;
    let disc = (p - t) * (p - t) + 4.0 * q * s;
    0.5 * ((p + t) + disc.max(0.0).sqrt())
}

/// Second eigenvalue of `A` only; unlike [`second_eigenvalue`] this never
/// fails on a zero block (it returns 0).
pub fn decay_rate(a: &TransitionMatrix) -> Result<f64> {
    transient_block(a).map(|b| block_radius(&b))
}

/// Second eigenvalue of an absorbing chain and its quasi-stationary
/// distribution, both in closed form.
pub fn second_eigenvalue(a: &TransitionMatrix) -> Result<SpectralSummary> {
    let block = transient_block(a)?;
    if block.iter().flatten().all(|&x| x == 0.0) {
        return Err(Error::DegenerateBlock);
    }
    let lambda = block_radius(&block);
    let [[p, q], [s, t]] = block;

    // Left eigenvector v with v·B = lambda·v. Either column of the adjugate
    // of (B - lambda I) works; take the one with more mass.
    let from_first = [s, lambda - p];
    let from_second = [lambda - t, q];
    let mass = |v: &[f64; 2]| v[0].abs() + v[1].abs();
    let v = if mass(&from_first) >= mass(&from_second) {
        from_first
    } else {
        from_second
    };
    let total = mass(&v);
    // B is a multiple of the identity: every vector is an eigenvector.
    let qsd = if total == 0.0 {
        [0.5, 0.5]
    } else {
        [v[0].abs() / total, v[1].abs() / total]
    };

    Ok(SpectralSummary {
        lambda2: lambda.clamp(0.0, 1.0),
        qsd,
    })
}

/// Stationary distribution by a direct solve of two balance equations plus
/// normalisation, with partial pivoting.
pub fn stationary_distribution(a: &TransitionMatrix) -> Result<StationarySummary> {
    if a.is_absorbing(0) {
        return Err(Error::Reducible(
            "state 0 is absorbing (no external recruitment); use the second eigenvalue instead",
        ));
    }

    // Unknowns pi_0..pi_2. Row j < 2 is the balance of column j of (A - I);
    // the last row is sum(pi) = 1.
    let mut m = [[0.0; NUM_STATES + 1]; NUM_STATES];
    for (j, eq) in m.iter_mut().take(NUM_STATES - 1).enumerate() {
        for (i, x) in eq.iter_mut().take(NUM_STATES).enumerate() {
            *x = a.get(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    m[NUM_STATES - 1] = [1.0, 1.0, 1.0, 1.0];

    for col in 0..NUM_STATES {
        let pivot = (col..NUM_STATES)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return Err(Error::Reducible("balance equations are singular"));
        }
        m.swap(col, pivot);
        for row in col + 1..NUM_STATES {
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                let pivot_row = m[col];
                for (x, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= factor * p;
                }
            }
        }
    }
    let mut pi = [0.0; NUM_STATES];
    for row in (0..NUM_STATES).rev() {
        let tail: f64 = (row + 1..NUM_STATES).map(|k| m[row][k] * pi[k]).sum();
        pi[row] = (m[row][NUM_STATES] - tail) / m[row][row];
    }

    if pi.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(Error::Reducible("solve produced a non-probability vector"));
    }
    for p in pi.iter_mut() {
        *p = p.max(0.0);
    }
    let total: f64 = pi.iter().sum();
    for p in pi.iter_mut() {
        *p /= total;
    }
    let pi = OccupancyDistribution::new(pi)?;
    Ok(StationarySummary {
        persistence: pi.extant(),
        pi,
    })
}

/// Distribution after `steps` applications of `a`, starting from `p0`.
pub fn evolve(a: &TransitionMatrix, p0: &OccupancyDistribution, steps: usize) -> OccupancyDistribution {
    (0..steps).fold(*p0, |p, _| p.step(a))
}

/// Probability at least one reserve is occupied after `t` steps.
pub fn survival_probability(
    variant: ModelVariant,
    params: &ModelParams,
    d: Distance,
    p0: &OccupancyDistribution,
    t: usize,
) -> Result<f64> {
    let a = compose(variant, params, d)?;
    Ok(evolve(&a, p0, t).extant())
}

/// Survival probabilities for `t = 0..=horizon`.
pub fn survival_curve(
    variant: ModelVariant,
    params: &ModelParams,
    d: Distance,
    p0: &OccupancyDistribution,
    horizon: usize,
) -> Result<Vec<f64>> {
    let a = compose(variant, params, d)?;
    let mut p = *p0;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(p.extant());
    for _ in 0..horizon {
        p = p.step(&a);
        out.push(p.extant());
    }
    Ok(out)
}
