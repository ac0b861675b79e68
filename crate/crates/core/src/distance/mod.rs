//! Total-variation distance to stationarity, mixing times and empirical
//! profile curves.

mod profile;
mod uniformize;

pub use profile::{empirical_profile, profile_from_model, ProfileCurve, ProfileMeta};
pub use uniformize::Uniformizer;

use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::spectral::{
    birth_death_start_spectrum, check_time, decompose, real_power, AnalyticSpectrum,
    SpectralDecomposition,
};

/// Dense fallback for real discrete powers on birth-death chains is only
/// attempted up to this many states.
const DENSE_FALLBACK_MAX_STATES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TimeConvention {
    /// Heat kernel `Q^t = exp(-t(I - P))`.
    Continuous,
    /// Powers `P^s`, real `s` through the spectral extension.
    Discrete,
}

impl fmt::Display for TimeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeConvention::Continuous => "continuous",
            TimeConvention::Discrete => "discrete",
        })
    }
}

/// `(1/2) sum |p - q|` for two probability vectors.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Parameter(format!(
            "length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if let Some(x) = v.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Parameter(format!("{name} has entry {x}")));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("{name} sums to {total}")));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

fn half_abs_sum(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|d| d.abs()).sum::<f64>()
}

/// `d_x(t) = || Q^t(x, .) - pi ||_TV`.
pub fn d_continuous(dec: &SpectralDecomposition, x: usize, t: f64) -> Result<f64> {
    Ok(half_abs_sum(&dec.heat_kernel_deviation(x, t)?))
}

/// `d_x(s) = (1/2) sum_y |P^s(x, y) - pi(y)|`.
pub fn d_discrete(dec: &SpectralDecomposition, x: usize, s: f64) -> Result<f64> {
    Ok(half_abs_sum(&dec.discrete_deviation(x, s)?))
}

/// Continuous-time distance of the lumped hypercube walk from weight 0,
/// which equals the distance of the full walk from any corner.
pub fn d_weighted_birth_death(chain: &ReversibleChain, t: f64) -> Result<f64> {
    if !chain.is_birth_death() {
        return Err(Error::Contract(format!("`{}` is not a birth-death chain", chain.label())));
    }
    Ok(Uniformizer::new(chain).continuous_distances(0, &[t])?[0])
}

/// `inf { t : d_x(t) <= epsilon }`.
pub fn mixing_time(
    dec: &SpectralDecomposition,
    x: usize,
    epsilon: f64,
    convention: TimeConvention,
) -> Result<f64> {
    let d0 = 1.0 - dec.stationary().get(x).copied().unwrap_or(0.0);
    let d = |t: f64| match convention {
        TimeConvention::Continuous => d_continuous(dec, x, t),
        TimeConvention::Discrete => d_discrete(dec, x, t),
    };
    mixing_time_by(d, d0, dec.spectral_gap(), epsilon, convention)
}

/// [`mixing_time`] for any start model.
pub fn mixing_time_model(
    model: &dyn StartModel,
    epsilon: f64,
    convention: TimeConvention,
) -> Result<f64> {
    let spec = model.spectrum();
    let d = |t: f64| model.distance(t, convention);
    mixing_time_by(d, 1.0 - spec.stationary_at_start(), spec.spectral_gap(), epsilon, convention)
}

fn mixing_time_by(
    d: impl Fn(f64) -> Result<f64>,
    d0: f64,
    gap: f64,
    epsilon: f64,
    convention: TimeConvention,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if epsilon >= d0 {
        return Ok(0.0);
    }
    match convention {
        TimeConvention::Continuous => {
            let mut lo = 0.0;
            let mut hi = 1.0 / gap.max(f64::MIN_POSITIVE);
            let mut doublings = 0;
            while d(hi)? > epsilon {
                lo = hi;
                hi *= 2.0;
                doublings += 1;
                if doublings > 200 {
                    return Err(Error::Numerical("mixing time bracket did not close".into()));
                }
            }
            while hi - lo > 1e-6 {
                let mid = 0.5 * (lo + hi);
                if d(mid)? > epsilon {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
        TimeConvention::Discrete => {
            let mut hi = 1u64;
            while d(hi as f64)? > epsilon {
                if hi >= 1 << 52 {
                    return Err(Error::Numerical(
                        "discrete distance never drops below epsilon (periodic chain?)".into(),
                    ));
                }
                hi *= 2;
            }
            let mut lo = hi / 2;
            // d(lo) > epsilon unless lo == 0, which is excluded by d0 > epsilon
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if d(mid as f64)? > epsilon {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(hi as f64)
        }
    }
}

/// `(direct, spectral)` evaluations of `|| (Q^{s1}_x - Q^{s2}_x)/pi ||^2` in
/// `L^2(pi)`.
pub fn l2_difference_check(
    dec: &SpectralDecomposition,
    x: usize,
    s1: f64,
    s2: f64,
) -> Result<(f64, f64)> {
    if !(s1 >= 0.0 && s1 <= s2) {
        return Err(Error::Parameter(format!("need 0 <= s1 <= s2, got s1={s1}, s2={s2}")));
    }
    let a = dec.heat_kernel_deviation(x, s1)?;
    let b = dec.heat_kernel_deviation(x, s2)?;
    let direct = a
        .iter()
        .zip(&b)
        .zip(dec.stationary())
        .map(|((u, v), p)| (u - v).powi(2) / p)
        .sum();
    let spectral = (1..dec.size())
        .map(|i| {
            let r = 1.0 - dec.eigenvalues()[i];
            dec.f(i, x).powi(2) * ((-s1 * r).exp() - (-s2 * r).exp()).powi(2)
        })
        .sum();
    Ok((direct, spectral))
}

/// A chain seen from a fixed start state: its start spectrum and a way to
/// evaluate `d_x` under either time convention.
pub trait StartModel: Send + Sync {
    fn label(&self) -> &str;
    fn start(&self) -> usize;
    fn spectrum(&self) -> &AnalyticSpectrum;
    /// `d_x(t)` at each time, in input order.
    fn distances(&self, times: &[f64], convention: TimeConvention) -> Result<Vec<f64>>;
    /// Whether discrete distances are available at non-integer times.
    fn supports_real_discrete(&self) -> bool;

    fn distance(&self, t: f64, convention: TimeConvention) -> Result<f64> {
        Ok(self.distances(&[t], convention)?[0])
    }
}

/// Start model over a dense spectral decomposition.
#[derive(Debug, Clone)]
pub struct SpectralStart {
    dec: Arc<SpectralDecomposition>,
    start: usize,
    spectrum: AnalyticSpectrum,
}

impl SpectralStart {
    pub fn new(dec: Arc<SpectralDecomposition>, start: usize) -> Result<Self> {
        let spectrum = dec.start_spectrum(start)?;
        Ok(Self { dec, start, spectrum })
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.dec
    }
}

impl StartModel for SpectralStart {
    fn label(&self) -> &str {
        self.dec.label()
    }

    fn start(&self) -> usize {
        self.start
    }

    fn spectrum(&self) -> &AnalyticSpectrum {
        &self.spectrum
    }

    fn distances(&self, times: &[f64], convention: TimeConvention) -> Result<Vec<f64>> {
        times
            .par_iter()
            .map(|&t| match convention {
                TimeConvention::Continuous => d_continuous(&self.dec, self.start, t),
                TimeConvention::Discrete => d_discrete(&self.dec, self.start, t),
            })
            .collect()
    }

    fn supports_real_discrete(&self) -> bool {
        self.dec.has_nonnegative_spectrum()
    }
}

/// Start model for birth-death chains of any supported size: distances by
/// uniformization (continuous) or repeated steps (integer discrete times).
#[derive(Debug)]
pub struct BirthDeathStart {
    chain: ReversibleChain,
    uniformizer: Uniformizer,
    start: usize,
    spectrum: AnalyticSpectrum,
    dense: OnceLock<Option<Arc<SpectralDecomposition>>>,
}

impl BirthDeathStart {
    /// Uses the twisted-factorization start spectrum.
    pub fn new(chain: ReversibleChain, start: usize) -> Result<Self> {
        let spectrum = birth_death_start_spectrum(&chain, start)?;
        Self::with_spectrum(chain, start, spectrum)
    }

    /// Uses a known start spectrum (e.g. the analytic hypercube one).
    pub fn with_spectrum(
        chain: ReversibleChain,
        start: usize,
        spectrum: AnalyticSpectrum,
    ) -> Result<Self> {
        if !chain.is_birth_death() {
            return Err(Error::Contract(format!("`{}` is not a birth-death chain", chain.label())));
        }
        chain.check_state(start)?;
        Ok(Self {
            uniformizer: Uniformizer::new(&chain),
            chain,
            start,
            spectrum,
            dense: OnceLock::new(),
        })
    }

    pub fn chain(&self) -> &ReversibleChain {
        &self.chain
    }

    fn dense(&self) -> Option<&Arc<SpectralDecomposition>> {
        self.dense
            .get_or_init(|| {
                if self.chain.size() > DENSE_FALLBACK_MAX_STATES {
                    return None;
                }
                decompose(&self.chain).ok().map(Arc::new)
            })
            .as_ref()
    }
}

impl StartModel for BirthDeathStart {
    fn label(&self) -> &str {
        self.chain.label()
    }

    fn start(&self) -> usize {
        self.start
    }

    fn spectrum(&self) -> &AnalyticSpectrum {
        &self.spectrum
    }

    fn distances(&self, times: &[f64], convention: TimeConvention) -> Result<Vec<f64>> {
        match convention {
            TimeConvention::Continuous => self.uniformizer.continuous_distances(self.start, times),
            TimeConvention::Discrete => {
                if times.iter().all(|t| t.fract() == 0.0) {
                    return self.uniformizer.discrete_distances(self.start, times);
                }
                for &t in times {
                    check_time(t)?;
                }
                if let Some(&b) = self.spectrum.betas().iter().find(|&&b| b < 0.0) {
                    // surfaces the domain error for negative eigenvalues
                    real_power(b, 0.5)?;
                }
                match self.dense() {
                    Some(dec) => times.iter().map(|&s| d_discrete(dec, self.start, s)).collect(),
                    None => Err(Error::Unsupported(format!(
                        "real discrete powers of `{}` need a dense decomposition, which is not \
                         numerically reliable at this size",
                        self.chain.label()
                    ))),
                }
            }
        }
    }

    fn supports_real_discrete(&self) -> bool {
        self.spectrum.has_nonnegative_spectrum() && self.dense().is_some()
    }
}
