//! Closed-form bounds `g(c)` for the example families.

use crate::error::{Error, Result};
use crate::special::log_sum_exp;

const SERIES_TAIL_REL: f64 = 1e-14;

/// `{2 e^{e^{-c}} (e^{-2c} + e^{-c})}^{1/2}`, bounding `cond4` for the
/// hypercube.
pub fn g_hypercube(c: f64) -> f64 {
    let x = (-c).exp();
    (2.0 * x.exp() * (x * x + x)).sqrt()
}

/// `3 e^{-2c} + 4x / (1 - x)^3` with `x = e^{-2(c-1)}`, defined for `c > 1`.
pub fn g_random_to_random(c: f64) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::Domain(format!("g_random_to_random needs c > 1, got {c}")));
    }
    let x = (-2.0 * (c - 1.0)).exp();
    let one_minus = -(-2.0 * (c - 1.0)).exp_m1();
    Ok(3.0 * (-2.0 * c).exp() + 4.0 * x / one_minus.powi(3))
}

/// `A' sum_{i>=1} i^2 x^i / i!` with `x = e^{-(c-1)}`.
///
/// Summed in log space; the series stops once the geometric bound on the
/// remainder falls below `1e-14` of the partial sum.
pub fn g_bernoulli_laplace(c: f64, a_prime: f64) -> Result<f64> {
    if !(a_prime > 0.0 && a_prime.is_finite()) {
        return Err(Error::Parameter(format!("A' must be positive and finite, got {a_prime}")));
    }
    if !c.is_finite() {
        return Err(Error::Domain(format!("c must be finite, got {c}")));
    }
    let ln_x = -(c - 1.0);
    let x = ln_x.exp();
    let mut logs = Vec::new();
    let mut ln_u = 0.0; // ln(x^i / i!)
    let mut i = 0u64;
    loop {
        i += 1;
        ln_u += ln_x - (i as f64).ln();
        let ln_term = 2.0 * (i as f64).ln() + ln_u;
        logs.push(ln_term);
        let fi = i as f64;
        let ratio = (fi + 1.0) * x / (fi * fi);
        if ratio < 1.0 && fi > x {
            // ratios decrease from here on
            let ln_tail = ln_term + ratio.ln() - (1.0 - ratio).ln();
            let ln_sum = log_sum_exp(logs.iter().copied());
            if ln_tail - ln_sum < SERIES_TAIL_REL.ln() {
                return Ok(a_prime * ln_sum.exp());
            }
        }
        if i > 10_000_000 {
            return Err(Error::Numerical(format!("series for g_bernoulli_laplace({c}) did not converge")));
        }
    }
}
