//! Orthonormal spectral decomposition of reversible chains.
//!
//! `P` is symmetrized as `S(x,y) = sqrt(pi(x)/pi(y)) P(x,y)`, a symmetric
//! eigensolver gives `S = V diag(beta) V^T`, and `f_i(x) = V(x,i)/sqrt(pi(x))`
//! is then orthonormal in `L^2(pi)` with
//! `P^t(x,y) = pi(y) sum_i f_i(x) f_i(y) beta_i^t`.

mod analytic;
mod birth_death;

pub use analytic::{hypercube_analytic_spectrum, AnalyticSpectrum, SpectralTerm};
pub use birth_death::{birth_death_start_spectrum, tridiagonal_eigenvalues};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};

/// Eigenvalues closer than this are reported as one eigenspace.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Eigenvalues within this distance of zero are treated as exactly zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-12;
const ORTHONORMALITY_TOL: f64 = 1e-8;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const PARSEVAL_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `i` holds `f_i` on the state space.
    eigenfunctions: DMatrix<f64>,
    stationary: Vec<f64>,
    transitive: bool,
    label: String,
}

/// One line of the spectrum export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub weight_at_start: f64,
}

pub fn decompose(chain: &ReversibleChain) -> Result<SpectralDecomposition> {
    let n = chain.size();
    let pi = chain.stationary();
    if let Some(x) = pi.iter().position(|&p| p <= 0.0) {
        return Err(Error::DegenerateMeasure(format!(
            "pi({x}) = {} in chain `{}`",
            pi[x],
            chain.label()
        )));
    }
    let sqrt_pi: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let p = chain.transition();
    let mut s = DMatrix::from_fn(n, n, |x, y| sqrt_pi[x] / sqrt_pi[y] * p[(x, y)]);
    // remove rounding asymmetry; S is symmetric by detailed balance
    let st = s.transpose();
    s += st;
    s *= 0.5;

    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Numerical(format!("symmetric eigensolver did not converge on `{}`", chain.label()))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut v = DMatrix::from_fn(n, n, |x, j| eig.eigenvectors[(x, order[j])]);

    for j in 0..n {
        let mut col = v.column_mut(j);
        let scale = col.amax();
        if let Some(first) = col.iter().copied().find(|c| c.abs() > 1e-10 * scale) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }

    if (eigenvalues[0] - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "top eigenvalue of `{}` is {} instead of 1",
            chain.label(),
            eigenvalues[0]
        )));
    }
    eigenvalues[0] = 1.0;
    if n > 1 && eigenvalues[1] > 1.0 - 1e-10 {
        return Err(Error::Contract(format!(
            "second eigenvalue of `{}` is {}; the chain is reducible",
            chain.label(),
            eigenvalues[1]
        )));
    }
    for b in eigenvalues.iter_mut() {
        if *b < -1.0 - 1e-10 || *b > 1.0 + 1e-10 {
            return Err(Error::Numerical(format!("eigenvalue {b} outside [-1, 1]")));
        }
        *b = b.clamp(-1.0, 1.0);
    }

    check_orthonormal(&v)?;
    check_reconstruction(&v, &eigenvalues, &sqrt_pi, p)?;

    let mut eigenfunctions = DMatrix::from_fn(n, n, |x, j| v[(x, j)] / sqrt_pi[x]);
    let top = eigenfunctions.column(0);
    if top.iter().any(|f| (f - 1.0).abs() > 1e-8) {
        return Err(Error::Numerical("leading eigenfunction is not constant".into()));
    }
    eigenfunctions.column_mut(0).fill(1.0);

    let dec = SpectralDecomposition {
        eigenvalues,
        eigenfunctions,
        stationary: pi.to_vec(),
        transitive: chain.is_transitive(),
        label: chain.label().to_string(),
    };
    for x in 0..n {
        let parseval = dec.parseval_sum(x) * pi[x];
        if (parseval - 1.0).abs() > PARSEVAL_REL_TOL {
            return Err(Error::Numerical(format!(
                "Parseval identity fails at state {x}: pi(x) * sum f_i(x)^2 = {parseval}"
            )));
        }
    }
    Ok(dec)
}

fn check_orthonormal(v: &DMatrix<f64>) -> Result<()> {
    let gram = v.tr_mul(v);
    let n = v.ncols();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            if (gram[(i, j)] - want).abs() > ORTHONORMALITY_TOL {
                return Err(Error::Numerical(format!(
                    "eigenfunctions {i}, {j} not orthonormal in L2(pi): {}",
                    gram[(i, j)]
                )));
            }
        }
    }
    Ok(())
}

fn check_reconstruction(
    v: &DMatrix<f64>,
    eigenvalues: &[f64],
    sqrt_pi: &[f64],
    p: &DMatrix<f64>,
) -> Result<()> {
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |x, j| v[(x, j)] * eigenvalues[j]);
    let s = scaled * v.transpose();
    let n = v.nrows();
    for x in 0..n {
        for y in 0..n {
            let rebuilt = s[(x, y)] * sqrt_pi[y] / sqrt_pi[x];
            if (rebuilt - p[(x, y)]).abs() > RECONSTRUCTION_TOL {
                return Err(Error::Numerical(format!(
                    "spectral reconstruction of P({x},{y}) is off by {:e}",
                    (rebuilt - p[(x, y)]).abs()
                )));
            }
        }
    }
    Ok(())
}

/// `beta^s` with the real-power extension used for discrete time:
/// `0^0 = 1`, `0^s = 0` for `s > 0`, and negative `beta` only at integer `s`.
pub fn real_power(beta: f64, s: f64) -> Result<f64> {
    if s.fract() == 0.0 {
        if beta.abs() <= ZERO_EIGENVALUE_TOL {
            return Ok(if s == 0.0 { 1.0 } else { 0.0 });
        }
        if s < f64::from(i32::MAX) {
            return Ok(beta.powi(s as i32));
        }
        let odd = (s / 2.0).fract() != 0.0;
        let magnitude = beta.abs().powf(s);
        return Ok(if beta < 0.0 && odd { -magnitude } else { magnitude });
    }
    if beta < -ZERO_EIGENVALUE_TOL {
        return Err(Error::Domain(format!(
            "non-integer time {s} needs a nonnegative spectrum but found eigenvalue {beta}; \
             apply make_lazy first"
        )));
    }
    if beta <= ZERO_EIGENVALUE_TOL {
        return Ok(0.0);
    }
    Ok((s * beta.ln()).exp())
}

impl SpectralDecomposition {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues sorted in descending order; the first is exactly 1.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &DMatrix<f64> {
        &self.eigenfunctions
    }

    pub fn f(&self, i: usize, x: usize) -> f64 {
        self.eigenfunctions[(x, i)]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues.get(1).map_or(1.0, |b| 1.0 - b)
    }

    /// Whether every eigenvalue is nonnegative (up to `ZERO_EIGENVALUE_TOL`).
    pub fn has_nonnegative_spectrum(&self) -> bool {
        self.eigenvalues.iter().all(|&b| b >= -ZERO_EIGENVALUE_TOL)
    }

    pub fn parseval_sum(&self, x: usize) -> f64 {
        self.eigenfunctions.row(x).iter().map(|f| f * f).sum()
    }

    fn check_state(&self, x: usize) -> Result<()> {
        if x >= self.size() {
            return Err(Error::Parameter(format!("state {x} out of range 0..{}", self.size())));
        }
        Ok(())
    }

    /// `y -> pi(y) sum_{i>=2} f_i(x) f_i(y) c_i` for per-eigenvalue factors `c_i`.
    fn deviation_row(&self, x: usize, factors: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
        self.check_state(x)?;
        let n = self.size();
        let mut coeffs = DVector::zeros(n);
        for i in 1..n {
            coeffs[i] = self.f(i, x) * factors(self.eigenvalues[i])?;
        }
        let combined = &self.eigenfunctions * coeffs;
        Ok((0..n).map(|y| self.stationary[y] * combined[y]).collect())
    }

    /// `Q^t(x,.) - pi` for the continuous-time chain.
    pub fn heat_kernel_deviation(&self, x: usize, t: f64) -> Result<Vec<f64>> {
        check_time(t)?;
        self.deviation_row(x, |b| Ok((-t * (1.0 - b)).exp()))
    }

    /// `P^s(x,.) - pi` in the real-power sense.
    pub fn discrete_deviation(&self, x: usize, s: f64) -> Result<Vec<f64>> {
        check_time(s)?;
        self.deviation_row(x, |b| real_power(b, s))
    }

    /// Aggregated start spectrum at `x`: eigenvalues within `CLUSTER_TOL`
    /// share one entry carrying the summed `f_i(x)^2` and the multiplicity.
    pub fn start_spectrum(&self, x: usize) -> Result<AnalyticSpectrum> {
        self.check_state(x)?;
        let n = self.size();
        let mut betas = vec![1.0];
        let mut weights = vec![self.f(0, x).powi(2)];
        let mut mults = vec![1.0];
        let mut sums = vec![1.0];
        let mut prev = f64::INFINITY;
        for i in 1..n {
            let b = self.eigenvalues[i];
            let w = self.f(i, x).powi(2);
            if betas.len() > 1 && (prev - b).abs() <= CLUSTER_TOL {
                let last = betas.len() - 1;
                sums[last] += b;
                mults[last] += 1.0;
                weights[last] += w;
            } else {
                betas.push(b);
                sums.push(b);
                mults.push(1.0);
                weights.push(w);
            }
            prev = b;
        }
        for j in 1..betas.len() {
            let mean = sums[j] / mults[j];
            betas[j] = if mean.abs() <= ZERO_EIGENVALUE_TOL { 0.0 } else { mean };
        }
        let rates = betas.iter().map(|b| 1.0 - b).collect();
        AnalyticSpectrum::new(
            format!("{} @ {x}", self.label),
            betas,
            rates,
            weights.iter().map(|w| w.ln()).collect(),
            mults.iter().map(|m| m.ln()).collect(),
            -self.stationary[x].ln(),
            self.transitive,
        )?
        .with_linear_weights(weights)
    }

    /// One row per eigenvalue; the start weight of an eigenspace is split
    /// evenly across its members so the column sums to `1/pi(x)`.
    pub fn spectrum_rows(&self, x: usize) -> Result<Vec<SpectrumRow>> {
        let spec = self.start_spectrum(x)?;
        let mut rows = Vec::with_capacity(self.size());
        let weights = spec.start_weights();
        let mults = spec.multiplicities();
        let mut index = 0;
        for (cluster, &m) in mults.iter().enumerate() {
            for _ in 0..m.round() as usize {
                rows.push(SpectrumRow {
                    index,
                    eigenvalue: self.eigenvalues[index],
                    weight_at_start: weights[cluster] / m,
                });
                index += 1;
            }
        }
        Ok(rows)
    }
}

/// `Q^t(x, .)` from the spectral formula. Entries negative by at most
/// 1e-12 are clipped to zero.
pub fn heat_kernel_row(dec: &SpectralDecomposition, x: usize, t: f64) -> Result<Vec<f64>> {
    let dev = dec.heat_kernel_deviation(x, t)?;
    finish_row(dec, dev)
}

/// `P^s(x, .)` in the real-power sense (signed for non-lazy chains at
/// integer `s` only through rounding).
pub fn discrete_row(dec: &SpectralDecomposition, x: usize, s: f64) -> Result<Vec<f64>> {
    let dev = dec.discrete_deviation(x, s)?;
    Ok(dev.iter().zip(dec.stationary()).map(|(d, p)| d + p).collect())
}

fn finish_row(dec: &SpectralDecomposition, dev: Vec<f64>) -> Result<Vec<f64>> {
    let mut row: Vec<f64> = dev.iter().zip(dec.stationary()).map(|(d, p)| d + p).collect();
    for (y, v) in row.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -1e-12 {
                return Err(Error::Numerical(format!("heat kernel entry {y} is {v:e}")));
            }
            *v = 0.0;
        }
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!("heat kernel row sums to {total}")));
    }
    Ok(row)
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hypercube_lazy, build_random_transpositions, make_lazy};

    fn two_state(p: f64) -> ReversibleChain {
        let m = DMatrix::from_row_slice(2, 2, &[1.0 - p, p, p, 1.0 - p]);
        ReversibleChain::new(m, vec![0.5, 0.5], "two").unwrap()
    }

    #[test]
    fn two_state_by_hand() {
        let dec = decompose(&two_state(0.3)).unwrap();
        assert!((dec.eigenvalues()[1] - 0.4).abs() < 1e-14);
        assert!((dec.f(1, 0) - 1.0).abs() < 1e-12);
        assert!((dec.f(1, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypercube_multiplicities() {
        for n in 1..=6 {
            let dec = decompose(&build_hypercube_lazy(n).unwrap()).unwrap();
            let spec = dec.start_spectrum(0).unwrap();
            let binom = crate::special::binomial_row(n as u64);
            assert_eq!(spec.multiplicities(), binom, "n={n}");
            for (i, b) in spec.betas().iter().enumerate() {
                assert!((b - (1.0 - i as f64 / n as f64)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn heat_kernel_edge_times() {
        let dec = decompose(&two_state(0.5)).unwrap();
        let row = heat_kernel_row(&dec, 0, 0.0).unwrap();
        assert!((row[0] - 1.0).abs() < 1e-15 && row[1].abs() < 1e-15);
        let row = heat_kernel_row(&dec, 0, 1.0).unwrap();
        assert!((row[0] - (0.5 + 0.5 * (-1f64).exp())).abs() < 1e-15);

        let dec = decompose(&build_random_transpositions(4).unwrap()).unwrap();
        let t = 100.0 / dec.spectral_gap();
        let row = heat_kernel_row(&dec, 3, t).unwrap();
        assert!(row.iter().all(|v| (v - 1.0 / 24.0).abs() < 1e-10));
    }

    #[test]
    fn discrete_row_matches_matrix_powers() {
        let chain = build_random_transpositions(4).unwrap();
        let dec = decompose(&chain).unwrap();
        let mut mu = DVector::zeros(24);
        mu[5] = 1.0;
        for s in 0..6 {
            let row = discrete_row(&dec, 5, s as f64).unwrap();
            for y in 0..24 {
                assert!((row[y] - mu[y]).abs() < 1e-10, "s={s}");
            }
            mu = chain.transition().tr_mul(&mu);
        }
    }

    #[test]
    fn fractional_power_needs_nonnegative_spectrum() {
        let dec = decompose(&build_random_transpositions(3).unwrap()).unwrap();
        assert!(matches!(discrete_row(&dec, 0, 2.5), Err(Error::Domain(_))));
        let lazy2 = decompose(&make_lazy(&two_state(1.0))).unwrap();
        let row = discrete_row(&lazy2, 0, 2.5).unwrap();
        assert!(row.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn lazy_maps_eigenvalues() {
        let chain = build_random_transpositions(4).unwrap();
        let a = decompose(&chain).unwrap();
        let b = decompose(&make_lazy(&chain)).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!(((1.0 + x) / 2.0 - y).abs() < 1e-12);
        }
        assert!(b.has_nonnegative_spectrum());
    }

    #[test]
    fn spectrum_rows_sum_to_inverse_mass() {
        let dec = decompose(&build_hypercube_lazy(4).unwrap()).unwrap();
        let rows = dec.spectrum_rows(0).unwrap();
        assert_eq!(rows.len(), 16);
        let total: f64 = rows.iter().map(|r| r.weight_at_start).sum();
        assert!((total - 16.0).abs() < 1e-10);
    }
}
