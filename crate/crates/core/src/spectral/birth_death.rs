//! Start spectra of birth-death chains without a dense eigensolver.
//!
//! The symmetrization of a birth-death chain is tridiagonal with diagonal
//! `P(j,j)` and off-diagonal `sqrt(P(j,j+1) P(j+1,j))`. Eigenvalues come from
//! Sturm-count bisection and each eigenvector from a twisted factorization,
//! carried in log space so that weights at states with `pi(x)` far below
//! machine precision are still accurate.

use super::analytic::AnalyticSpectrum;
use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::special::log_sum_exp;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() - 1`), in descending order.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..n {
        let r = off.get(j).map_or(0.0, |b| b.abs()) + if j > 0 { off[j - 1].abs() } else { 0.0 };
        lo = lo.min(diag[j] - r);
        hi = hi.max(diag[j] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let off_sq: Vec<f64> = off.iter().map(|b| b * b).collect();

    let mut out: Vec<f64> = (0..n)
        .map(|k| {
            // k-th smallest
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b || b - a <= 2.0 * f64::EPSILON * scale {
                    break;
                }
                if sturm_count(diag, &off_sq, mid, scale) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect();
    out.reverse();
    out
}

/// Number of eigenvalues strictly below `lambda`.
fn sturm_count(diag: &[f64], off_sq: &[f64], lambda: f64, scale: f64) -> usize {
    let tiny = f64::EPSILON * f64::EPSILON * scale;
    let mut count = 0;
    let mut d = 1.0;
    for j in 0..diag.len() {
        d = diag[j] - lambda - if j > 0 { off_sq[j - 1] / d } else { 0.0 };
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `ln |v_j|` for an eigenvector of the tridiagonal matrix at eigenvalue
/// `lambda`, unnormalized.
fn twisted_log_vector(diag: &[f64], off: &[f64], lambda: f64, scale: f64) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * f64::EPSILON * scale;
    let guard = |d: f64| if d == 0.0 { tiny } else { d };

    let mut plus = vec![0.0; n];
    for j in 0..n {
        let prev = if j > 0 { off[j - 1] * off[j - 1] / plus[j - 1] } else { 0.0 };
        plus[j] = guard(diag[j] - lambda - prev);
    }
    let mut minus = vec![0.0; n];
    for j in (0..n).rev() {
        let next = if j + 1 < n { off[j] * off[j] / minus[j + 1] } else { 0.0 };
        minus[j] = guard(diag[j] - lambda - next);
    }
    let m = (0..n)
        .filter_map(|j| {
            let gamma = plus[j] + minus[j] - (diag[j] - lambda);
            gamma.is_finite().then_some((j, gamma.abs()))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(0, |(j, _)| j);

    let mut lnv = vec![0.0; n];
    for j in (0..m).rev() {
        lnv[j] = lnv[j + 1] + off[j].ln() - plus[j].abs().ln();
    }
    for j in m + 1..n {
        lnv[j] = lnv[j - 1] + off[j - 1].ln() - minus[j].abs().ln();
    }
    lnv
}

/// Start spectrum of a birth-death chain (states ordered so that only
/// neighbours `j, j+1` communicate) at state `x`. All eigenvalues are simple.
pub fn birth_death_start_spectrum(chain: &ReversibleChain, x: usize) -> Result<AnalyticSpectrum> {
    if !chain.is_birth_death() {
        return Err(Error::Contract(format!("`{}` is not a birth-death chain", chain.label())));
    }
    chain.check_state(x)?;
    let n = chain.size();
    let pi = chain.stationary();
    if !(pi[x] > 0.0) {
        return Err(Error::DegenerateMeasure(format!("pi({x}) = {}", pi[x])));
    }
    let diag: Vec<f64> = (0..n).map(|j| chain.p(j, j)).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1))
        .map(|j| (chain.p(j, j + 1) * chain.p(j + 1, j)).sqrt())
        .collect();
    let eigenvalues = tridiagonal_eigenvalues(&diag, &off);
    let scale = eigenvalues
        .iter()
        .fold(0.0f64, |m, b| m.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let ln_pi_x = pi[x].ln();

    let mut betas = Vec::with_capacity(n);
    let mut ln_weights = Vec::with_capacity(n);
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        if i == 0 {
            if (lambda - 1.0).abs() > 1e-10 {
                return Err(Error::Numerical(format!(
                    "top eigenvalue of `{}` is {lambda} instead of 1",
                    chain.label()
                )));
            }
            betas.push(1.0);
            ln_weights.push(0.0);
            continue;
        }
        let lnv = twisted_log_vector(&diag, &off, lambda, scale);
        let ln_norm = log_sum_exp(lnv.iter().map(|l| 2.0 * l));
        betas.push(lambda.clamp(-1.0, 1.0));
        ln_weights.push(2.0 * lnv[x] - ln_norm - ln_pi_x);
    }
    let rates = betas.iter().map(|b| 1.0 - b).collect();
    AnalyticSpectrum::new(
        format!("{} @ {x}", chain.label()),
        betas,
        rates,
        ln_weights,
        vec![0.0; n],
        -ln_pi_x,
        chain.is_transitive(),
    )
}
