//! Closed-form limit profiles.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::Serialize;

use crate::distance::{ProfileCurve, ProfileMeta};
use crate::error::{Error, Result};
use crate::special::{erf, erfc, ln_poisson_pmf};

const POISSON_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormProfile {
    Hypercube,
    PoissonShuffle,
    BernoulliLaplace,
    /// Simple random walk on `d`-regular Ramanujan graphs.
    Ramanujan { d: u32 },
}

impl ClosedFormProfile {
    pub fn from_name(name: &str, d: Option<u32>) -> Result<Self> {
        let profile = match name {
            "hypercube" => Self::Hypercube,
            "poisson-shuffle" => Self::PoissonShuffle,
            "bernoulli-laplace" => Self::BernoulliLaplace,
            "ramanujan" => Self::Ramanujan {
                d: d.ok_or_else(|| Error::Parameter("ramanujan profile needs --d".into()))?,
            },
            other => return Err(Error::Parameter(format!("unknown closed-form profile `{other}`"))),
        };
        if let Self::Ramanujan { d } = profile {
            ramanujan_alpha(d)?;
        }
        Ok(profile)
    }

    pub fn evaluate(self, c: f64) -> Result<f64> {
        Ok(match self {
            Self::Hypercube => profile_hypercube(c),
            Self::PoissonShuffle => profile_poisson_shuffle(c),
            Self::BernoulliLaplace => profile_bernoulli_laplace(c),
            Self::Ramanujan { d } => profile_ramanujan(c, d)?,
        })
    }

    pub fn curve(self, c_grid: &[f64]) -> Result<ProfileCurve> {
        let values = c_grid.iter().map(|&c| self.evaluate(c)).collect::<Result<Vec<_>>>()?;
        ProfileCurve::new(
            c_grid.to_vec(),
            values,
            ProfileMeta {
                family: self.to_string(),
                n: None,
                start: None,
                convention: None,
                dropped: Vec::new(),
            },
        )
    }
}

impl fmt::Display for ClosedFormProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hypercube => f.write_str("hypercube"),
            Self::PoissonShuffle => f.write_str("poisson-shuffle"),
            Self::BernoulliLaplace => f.write_str("bernoulli-laplace"),
            Self::Ramanujan { d } => write!(f, "ramanujan(d={d})"),
        }
    }
}

/// TV distance between `N(mu, 1)` and `N(0, 1)`: `2 Phi(mu/2) - 1`.
fn normal_shift_tv(mu: f64) -> f64 {
    erf(mu / (2.0 * SQRT_2))
}

/// `2 Phi(e^{-c}/2) - 1`.
pub fn profile_hypercube(c: f64) -> f64 {
    normal_shift_tv((-c).exp())
}

/// `|| N(e^{-2c}, 1) - N(0, 1) ||_TV`.
pub fn profile_bernoulli_laplace(c: f64) -> f64 {
    normal_shift_tv((-2.0 * c).exp())
}

/// `P(Z > alpha c)` with `alpha = (d-2)^{3/2} / (2 sqrt(d(d-1)))`.
pub fn profile_ramanujan(c: f64, d: u32) -> Result<f64> {
    let alpha = ramanujan_alpha(d)?;
    Ok(0.5 * erfc(alpha * c / SQRT_2))
}

pub fn ramanujan_alpha(d: u32) -> Result<f64> {
    if d < 3 {
        return Err(Error::Parameter(format!("Ramanujan profile needs degree d >= 3, got {d}")));
    }
    let d = f64::from(d);
    Ok((d - 2.0).powf(1.5) / (2.0 * (d * (d - 1.0)).sqrt()))
}

/// `d_TV(Poisson(1), Poisson(1 + e^{-c}))`.
///
/// With `eps = e^{-c}` each term is `p_k |expm1(k ln1p(eps) - eps)|` (or
/// the mirrored form when `q_k > p_k`), which stays accurate for tiny
/// `eps`. Summation stops past both means once the ratio bounds on both
/// remaining tails are below `1e-14`.
///
/// For `eps >= 1` the value is `P(A) - Q(A)` on `A = {k : p_k > q_k}`,
/// written as `1 - P(A^c) - Q(A)` so that every summand is a small
/// positive number and values near 1 keep full precision.
pub fn profile_poisson_shuffle(c: f64) -> f64 {
    let eps = (-c).exp();
    if eps == 0.0 {
        return 0.0;
    }
    if !eps.is_finite() {
        return 1.0;
    }
    let mu = 1.0 + eps;
    let ln1p = eps.ln_1p();
    if eps >= 1.0 {
        return poisson_split_tv(mu, (eps / ln1p).floor() as u64, ln1p, eps);
    }
    let mut sum = 0.0;
    let mut k = 0u64;
    loop {
        let ln_p = ln_poisson_pmf(k, 1.0);
        let delta = k as f64 * ln1p - eps;
        let term = if delta <= 0.0 {
            -ln_p.exp() * delta.exp_m1()
        } else {
            -(ln_p + delta).exp() * (-delta).exp_m1()
        };
        sum += term;
        let kf = k as f64;
        if kf + 1.0 > mu {
            let tail = |ln_pmf: f64, m: f64| {
                let r = m / (kf + 1.0);
                ln_pmf.exp() * r / (1.0 - r)
            };
            if tail(ln_p, 1.0) < POISSON_TAIL && tail(ln_p + delta, mu) < POISSON_TAIL {
                break;
            }
        }
        k += 1;
    }
    (0.5 * sum).min(1.0)
}

fn poisson_split_tv(mu: f64, mut k_star: u64, ln1p: f64, eps: f64) -> f64 {
    if k_star as f64 * ln1p - eps >= 0.0 {
        k_star = k_star.saturating_sub(1);
    }
    let q_mass: f64 = (0..=k_star).map(|k| ln_poisson_pmf(k, mu).exp()).sum();
    let mut p_tail = 0.0;
    let mut k = k_star + 1;
    loop {
        let term = ln_poisson_pmf(k, 1.0).exp();
        p_tail += term;
        if term <= f64::EPSILON * 1e-3 * p_tail || term == 0.0 {
            break;
        }
        k += 1;
    }
    (1.0 - p_tail - q_mass).clamp(0.0, 1.0)
}
