//! Distributions of the continuous-time chain by uniformization:
//! `Q^t = sum_k Poisson(lambda t; k) Ptilde^k` with
//! `Ptilde = I + (P - I)/lambda`, `lambda = max_x (1 - P(x,x))`.
//!
//! Every term is nonnegative, so the result keeps full relative accuracy
//! even when `pi` has entries far below machine precision, where the
//! spectral sum would cancel catastrophically.

use nalgebra::{DMatrix, DVector};

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::special::ln_poisson_pmf;

/// Poisson weights below this are not summed.
const POISSON_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone)]
enum Kernel {
    /// `(lower, diag, upper)` with `lower[j] = K(j, j-1)`, `upper[j] = K(j, j+1)`.
    Banded(Vec<f64>, Vec<f64>, Vec<f64>),
    /// Stored transposed for row-vector products.
    Dense(DMatrix<f64>),
}

impl Kernel {
    fn new(m: &DMatrix<f64>, banded: bool) -> Self {
        let n = m.nrows();
        if banded {
            let lower = (0..n).map(|j| if j > 0 { m[(j, j - 1)] } else { 0.0 }).collect();
            let diag = (0..n).map(|j| m[(j, j)]).collect();
            let upper = (0..n).map(|j| if j + 1 < n { m[(j, j + 1)] } else { 0.0 }).collect();
            Kernel::Banded(lower, diag, upper)
        } else {
            Kernel::Dense(m.transpose())
        }
    }

    /// `mu K` for a row vector `mu`.
    fn step(&self, mu: &[f64], out: &mut [f64]) {
        match self {
            Kernel::Banded(lower, diag, upper) => {
                let n = mu.len();
                for y in 0..n {
                    let mut v = mu[y] * diag[y];
                    if y > 0 {
                        v += mu[y - 1] * upper[y - 1];
                    }
                    if y + 1 < n {
                        v += mu[y + 1] * lower[y + 1];
                    }
                    out[y] = v;
                }
            }
            Kernel::Dense(kt) => {
                let v = kt * DVector::from_column_slice(mu);
                out.copy_from_slice(v.as_slice());
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Uniformizer {
    jump: Kernel,
    step: Kernel,
    rate: f64,
    stationary: Vec<f64>,
}

impl Uniformizer {
    pub fn new(chain: &ReversibleChain) -> Self {
        let n = chain.size();
        let p = chain.transition();
        let rate = (0..n).map(|x| 1.0 - p[(x, x)]).fold(0.0, f64::max);
        let mut tilde = p.clone();
        if rate > 0.0 {
            tilde.scale_mut(1.0 / rate);
            for x in 0..n {
                tilde[(x, x)] = 1.0 - (1.0 - p[(x, x)]) / rate;
            }
        }
        let banded = chain.is_birth_death();
        Self {
            jump: Kernel::new(&tilde, banded),
            step: Kernel::new(p, banded),
            rate,
            stationary: chain.stationary().to_vec(),
        }
    }

    pub fn size(&self) -> usize {
        self.stationary.len()
    }

    /// `Q^t(x, .)` for each `t` in `times`, computed in one sweep.
    pub fn heat_kernel_rows(&self, x: usize, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.size();
        let windows: Vec<(usize, Vec<f64>)> = times
            .iter()
            .map(|&t| {
                crate::spectral::check_time(t)?;
                Ok(poisson_window(self.rate * t))
            })
            .collect::<Result<_>>()?;
        let last = windows.iter().map(|(lo, w)| lo + w.len()).max().unwrap_or(0);
        let mut acc = vec![vec![0.0; n]; times.len()];
        let mut mu = vec![0.0; n];
        let mut next = vec![0.0; n];
        mu[x] = 1.0;
        for k in 0..last {
            for ((lo, w), row) in windows.iter().zip(acc.iter_mut()) {
                if k >= *lo && k < lo + w.len() {
                    let wk = w[k - lo];
                    for (r, m) in row.iter_mut().zip(&mu) {
                        *r += wk * m;
                    }
                }
            }
            self.jump.step(&mu, &mut next);
            std::mem::swap(&mut mu, &mut next);
        }
        Ok(acc)
    }

    /// TV distance from stationarity of `Q^t(x, .)` for each `t`.
    pub fn continuous_distances(&self, x: usize, times: &[f64]) -> Result<Vec<f64>> {
        let rows = self.heat_kernel_rows(x, times)?;
        Ok(rows.iter().map(|r| half_l1(r, &self.stationary)).collect())
    }

    /// TV distance of `P^s(x, .)` for integer times `s` only.
    pub fn discrete_distances(&self, x: usize, times: &[f64]) -> Result<Vec<f64>> {
        let mut steps = Vec::with_capacity(times.len());
        for &s in times {
            crate::spectral::check_time(s)?;
            if s.fract() != 0.0 {
                return Err(Error::Unsupported(format!(
                    "discrete time {s} is not an integer; real powers need the dense spectral route"
                )));
            }
            steps.push(s as u64);
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by_key(|&i| steps[i]);
        let n = self.size();
        let mut mu = vec![0.0; n];
        let mut next = vec![0.0; n];
        mu[x] = 1.0;
        let mut done = 0u64;
        let mut out = vec![0.0; times.len()];
        for i in order {
            while done < steps[i] {
                self.step.step(&mu, &mut next);
                std::mem::swap(&mut mu, &mut next);
                done += 1;
            }
            out[i] = half_l1(&mu, &self.stationary);
        }
        Ok(out)
    }
}

/// First index and weights of the Poisson(`mean`) pmf above `POISSON_CUTOFF`,
/// grown outward from the mode.
fn poisson_window(mean: f64) -> (usize, Vec<f64>) {
    if mean <= 0.0 {
        return (0, vec![1.0]);
    }
    let mode = mean.floor() as u64;
    let peak = ln_poisson_pmf(mode, mean).exp();
    let mut left = Vec::new();
    let mut w = peak;
    let mut k = mode;
    while k > 0 {
        w *= k as f64 / mean;
        k -= 1;
        if w < POISSON_CUTOFF {
            break;
        }
        left.push(w);
    }
    let lo = mode as usize - left.len();
    left.reverse();
    left.push(peak);
    let mut w = peak;
    let mut k = mode;
    loop {
        k += 1;
        w *= mean / k as f64;
        if w < POISSON_CUTOFF {
            break;
        }
        left.push(w);
    }
    (lo, left)
}

fn half_l1(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_bernoulli_laplace, build_random_transpositions};
    use crate::spectral::{decompose, heat_kernel_row};

    #[test]
    fn poisson_window_has_unit_mass() {
        for mean in [0.3, 1.0, 17.5, 640.0, 12345.6] {
            let (_, w) = poisson_window(mean);
            let total: f64 = w.iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "mean={mean}: {total}");
        }
        assert_eq!(poisson_window(0.0), (0, vec![1.0]));
    }

    #[test]
    fn matches_spectral_rows() {
        for chain in [build_bernoulli_laplace(14, 6).unwrap(), build_random_transpositions(4).unwrap()] {
            let dec = decompose(&chain).unwrap();
            let u = Uniformizer::new(&chain);
            let times = [0.0, 0.7, 3.0, 11.0];
            let rows = u.heat_kernel_rows(1, &times).unwrap();
            for (t, row) in times.iter().zip(rows) {
                let exact = heat_kernel_row(&dec, 1, *t).unwrap();
                for (a, b) in row.iter().zip(&exact) {
                    assert!((a - b).abs() < 1e-13, "{} t={t}", chain.label());
                }
            }
        }
    }

    #[test]
    fn integer_steps_match_matrix_powers() {
        let chain = build_bernoulli_laplace(10, 4).unwrap();
        let u = Uniformizer::new(&chain);
        let d = u.discrete_distances(0, &[3.0, 0.0, 1.0]).unwrap();
        let p = chain.transition();
        let p3 = p * p * p;
        let tv = |row: Vec<f64>| half_l1(&row, chain.stationary());
        assert!((d[0] - tv(p3.row(0).iter().copied().collect())).abs() < 1e-15);
        assert!((d[1] - (1.0 - chain.stationary()[0])).abs() < 1e-15);
        assert!(matches!(u.discrete_distances(0, &[1.5]), Err(Error::Unsupported(_))));
    }
}
