//! Seeded random trials of the mean-value bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::mvt_from_distances;
use crate::distance::{StartModel, TimeConvention};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTrial {
    pub trial: usize,
    pub convention: TimeConvention,
    pub c1: f64,
    pub c2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `trials` pairs `c1 < c2` with `c1` uniform on `(max(-2, -t_n/w_n), 3]`
/// (so `t_n + c1 w_n > 0`) and `c2 - c1 = 10^u`, `u` uniform on `[-4, 0.3)`.
pub fn sample_pairs(t_n: f64, w_n: f64, trials: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = (-2.0f64).max(-t_n / w_n);
    (0..trials)
        .map(|_| {
            let u: f64 = rng.random();
            let c1 = lo + (3.0 - lo) * (1.0 - u);
            let dc = 10f64.powf(rng.random_range(-4.0..0.3));
            (c1, c1 + dc)
        })
        .collect()
}

/// Whether the discrete bound can be evaluated on this model at real times.
pub fn discrete_admissible(model: &dyn StartModel) -> bool {
    model.spectrum().has_nonnegative_spectrum() && model.supports_real_discrete()
}

/// Runs the mean-value check on `sample_pairs(t_n, w_n, trials, seed)` for
/// each convention. Rows are grouped by convention in the given order.
pub fn run_bound_trials(
    model: &dyn StartModel,
    t_n: f64,
    w_n: f64,
    trials: usize,
    seed: u64,
    conventions: &[TimeConvention],
) -> Result<Vec<BoundTrial>> {
    if !(t_n >= 0.0 && w_n > 0.0) {
        return Err(Error::Parameter(format!("need t_n >= 0 and w_n > 0, got {t_n}, {w_n}")));
    }
    let pairs = sample_pairs(t_n, w_n, trials, seed);
    let times: Vec<f64> = pairs
        .iter()
        .flat_map(|&(c1, c2)| [t_n + c1 * w_n, t_n + c2 * w_n])
        .collect();
    let spec = model.spectrum();
    let mut out = Vec::with_capacity(trials * conventions.len());
    for &convention in conventions {
        let d = model.distances(&times, convention)?;
        for (i, &(c1, c2)) in pairs.iter().enumerate() {
            let check = mvt_from_distances(spec, t_n, w_n, c1, c2, d[2 * i], d[2 * i + 1], convention)?;
            out.push(BoundTrial {
                trial: i,
                convention,
                c1,
                c2,
                lhs: check.lhs,
                rhs: check.rhs,
                holds: check.holds,
            });
        }
    }
    Ok(out)
}
