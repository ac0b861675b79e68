//! Continuity conditions for limit profiles, the mean-value bounds behind
//! them, limsup tables across `n`, and continuity certificates.
//!
//! With `s = t_n + c w_n` and the start spectrum `(beta_i, f_i(x)^2)`:
//!
//! | id      | time       | value                                                         |
//! |---------|------------|---------------------------------------------------------------|
//! | `cond`  | continuous | `w^2 sum_{i>=2} f_i(x)^2 (1-beta_i)^2 e^{-2 s (1-beta_i)}`    |
//! | `cond3` | continuous | same with every `f_i(x)^2` replaced by 1 (transitive chains)  |
//! | `cond2` | discrete   | `w (sum_{i>=2} f_i(x)^2 ln^2(beta_i) beta_i^{2s})^{1/2}`      |
//! | `cond4` | discrete   | same with every `f_i(x)^2` replaced by 1 (transitive chains)  |
//!
//! The continuous values bound a squared modulus and the discrete values a
//! plain one; [`continuity_certificate`] converts accordingly.

mod bounds;
mod trials;

pub use bounds::{g_bernoulli_laplace, g_hypercube, g_random_to_random};
pub use trials::{discrete_admissible, run_bound_trials, sample_pairs, BoundTrial};

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::distance::{StartModel, TimeConvention};
use crate::error::{Error, Result};
use crate::family::ChainFamily;
use crate::special::log_sum_exp;
use crate::spectral::AnalyticSpectrum;

/// Slack allowed in the mean-value inequality.
pub const MVT_SLACK: f64 = 1e-10;
/// Default number of largest `n` rows entering the limsup estimate.
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConditionId {
    Cond,
    Cond2,
    Cond3,
    Cond4,
}

impl ConditionId {
    pub fn is_discrete(self) -> bool {
        matches!(self, ConditionId::Cond2 | ConditionId::Cond4)
    }

    pub fn is_transitive(self) -> bool {
        matches!(self, ConditionId::Cond3 | ConditionId::Cond4)
    }

    pub fn convention(self) -> TimeConvention {
        if self.is_discrete() {
            TimeConvention::Discrete
        } else {
            TimeConvention::Continuous
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionId::Cond => "cond",
            ConditionId::Cond2 => "cond2",
            ConditionId::Cond3 => "cond3",
            ConditionId::Cond4 => "cond4",
        })
    }
}

fn evaluation_time(t_n: f64, w_n: f64, c: f64) -> Result<f64> {
    let s = t_n + c * w_n;
    if !(s >= 0.0) || !s.is_finite() || !(w_n > 0.0) {
        return Err(Error::Domain(format!(
            "evaluation time t_n + c w_n = {s} (t_n={t_n}, w_n={w_n}, c={c}) must be finite and \
             nonnegative with w_n > 0"
        )));
    }
    Ok(s)
}

fn require_transitive(spec: &AnalyticSpectrum) -> Result<()> {
    if !spec.is_transitive() {
        return Err(Error::Contract(format!(
            "transitive condition requested on non-transitive `{}`",
            spec.label()
        )));
    }
    Ok(())
}

fn continuous_sum(spec: &AnalyticSpectrum, s: f64, multiplicities: bool) -> f64 {
    let terms = spec.nontrivial_terms().map(|term| {
        let w = if multiplicities { term.ln_multiplicity } else { term.ln_weight };
        w + 2.0 * term.rate.ln() - 2.0 * s * term.rate
    });
    log_sum_exp(terms).exp()
}

fn discrete_sum(spec: &AnalyticSpectrum, s: f64, multiplicities: bool) -> Result<f64> {
    let mut terms = Vec::with_capacity(spec.len());
    for term in spec.nontrivial_terms() {
        if term.beta < 0.0 {
            return Err(Error::Domain(format!(
                "discrete condition needs a nonnegative spectrum but `{}` has eigenvalue {}; \
                 apply make_lazy first",
                spec.label(),
                term.beta
            )));
        }
        if term.beta == 0.0 {
            continue;
        }
        let w = if multiplicities { term.ln_multiplicity } else { term.ln_weight };
        let ln_beta = term.beta.ln();
        terms.push(w + 2.0 * (-ln_beta).ln() + 2.0 * s * ln_beta);
    }
    Ok(log_sum_exp(terms).exp())
}

pub fn cond_continuous(spec: &AnalyticSpectrum, t_n: f64, w_n: f64, c: f64) -> Result<f64> {
    let s = evaluation_time(t_n, w_n, c)?;
    Ok(w_n * w_n * continuous_sum(spec, s, false))
}

pub fn cond_continuous_transitive(spec: &AnalyticSpectrum, t_n: f64, w_n: f64, c: f64) -> Result<f64> {
    require_transitive(spec)?;
    let s = evaluation_time(t_n, w_n, c)?;
    Ok(w_n * w_n * continuous_sum(spec, s, true))
}

pub fn cond_discrete(spec: &AnalyticSpectrum, t_n: f64, w_n: f64, c: f64) -> Result<f64> {
    let s = evaluation_time(t_n, w_n, c)?;
    Ok(w_n * discrete_sum(spec, s, false)?.sqrt())
}

pub fn cond_discrete_transitive(spec: &AnalyticSpectrum, t_n: f64, w_n: f64, c: f64) -> Result<f64> {
    require_transitive(spec)?;
    let s = evaluation_time(t_n, w_n, c)?;
    Ok(w_n * discrete_sum(spec, s, true)?.sqrt())
}

pub fn evaluate_condition(
    id: ConditionId,
    spec: &AnalyticSpectrum,
    t_n: f64,
    w_n: f64,
    c: f64,
) -> Result<f64> {
    match id {
        ConditionId::Cond => cond_continuous(spec, t_n, w_n, c),
        ConditionId::Cond2 => cond_discrete(spec, t_n, w_n, c),
        ConditionId::Cond3 => cond_continuous_transitive(spec, t_n, w_n, c),
        ConditionId::Cond4 => cond_discrete_transitive(spec, t_n, w_n, c),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MvtCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Mean-value bound between `s1 = t_n + c1 w_n` and `s2 = t_n + c2 w_n`.
///
/// Continuous time: `4 (d(s1) - d(s2))^2 <= (c2 - c1)^2 cond(c1)`.
/// Discrete time: `|d(s1) - d(s2)| <= |c2 - c1| cond2(c1)`.
pub fn mvt_bound_check(
    model: &dyn StartModel,
    t_n: f64,
    w_n: f64,
    c1: f64,
    c2: f64,
    convention: TimeConvention,
) -> Result<MvtCheck> {
    if !(c1 < c2) {
        return Err(Error::Parameter(format!("need c1 < c2, got c1={c1}, c2={c2}")));
    }
    let s1 = evaluation_time(t_n, w_n, c1)?;
    let s2 = t_n + c2 * w_n;
    let spec = model.spectrum();
    if convention == TimeConvention::Discrete && s1 == 0.0 && spec.betas().contains(&0.0) {
        return Err(Error::Domain(
            "discrete bound at s1 = 0 with a zero eigenvalue: beta^s jumps at s = 0".into(),
        ));
    }
    let d = model.distances(&[s1, s2], convention)?;
    mvt_from_distances(spec, t_n, w_n, c1, c2, d[0], d[1], convention)
}

/// The mean-value comparison for already computed `d(s1)`, `d(s2)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn mvt_from_distances(
    spec: &AnalyticSpectrum,
    t_n: f64,
    w_n: f64,
    c1: f64,
    c2: f64,
    d1: f64,
    d2: f64,
    convention: TimeConvention,
) -> Result<MvtCheck> {
    let (lhs, rhs) = match convention {
        TimeConvention::Continuous => (
            4.0 * (d1 - d2).powi(2),
            (c2 - c1).powi(2) * cond_continuous(spec, t_n, w_n, c1)?,
        ),
        TimeConvention::Discrete => ((d1 - d2).abs(), (c2 - c1) * cond_discrete(spec, t_n, w_n, c1)?),
    };
    Ok(MvtCheck { lhs, rhs, holds: lhs <= rhs + MVT_SLACK })
}

/// Condition values over an `(n, c)` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub family: String,
    pub n_list: Vec<usize>,
    pub c_grid: Vec<f64>,
    /// `values[i][j]` is the condition at `n_list[i]`, `c_grid[j]`.
    pub values: Vec<Vec<f64>>,
    pub top_k: usize,
    /// Column maxima over the last `top_k` rows.
    pub limsup_estimate: Vec<f64>,
    /// Known bound per grid point; `None` cells lie outside its domain.
    pub reference_bound: Option<Vec<Option<f64>>>,
}

pub fn limsup_report(
    family: &ChainFamily,
    start: Option<usize>,
    id: ConditionId,
    n_list: &[usize],
    c_grid: &[f64],
    top_k: usize,
    a_prime: Option<f64>,
) -> Result<ConditionReport> {
    if top_k == 0 || top_k > n_list.len() {
        return Err(Error::Parameter(format!(
            "top_k must be in 1..={}, got {top_k}",
            n_list.len()
        )));
    }
    if c_grid.is_empty() || c_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Parameter("c grid must be non-empty and strictly increasing".into()));
    }
    family.validate_schedule(n_list)?;

    let values = n_list
        .par_iter()
        .map(|&n| {
            let spec = family.start_spectrum(n, start)?;
            let (t_n, w_n) = family.schedule(n)?;
            c_grid
                .iter()
                .map(|&c| evaluate_condition(id, &spec, t_n, w_n, c))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let tail = &values[values.len() - top_k..];
    let limsup_estimate = (0..c_grid.len())
        .map(|j| tail.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let reference_bound = if family.has_reference(id, a_prime) {
        Some(
            c_grid
                .iter()
                .map(|&c| family.reference_bound(id, c, a_prime))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(ConditionReport {
        condition: id,
        family: family.name(),
        n_list: n_list.to_vec(),
        c_grid: c_grid.to_vec(),
        values,
        top_k,
        limsup_estimate,
        reference_bound,
    })
}

/// Upper bound on `|Phi(c1) - Phi(c2)|` implied by the report's limsup at
/// `c1`: `(1/2)|c2 - c1| sqrt(L)` for continuous conditions and
/// `(1/2)|c2 - c1| L` for discrete ones.
pub fn continuity_certificate(report: &ConditionReport, c1: f64, c2: f64) -> Result<f64> {
    if c2 < c1 {
        return Err(Error::Parameter(format!("need c1 <= c2, got c1={c1}, c2={c2}")));
    }
    let j = report
        .c_grid
        .iter()
        .position(|&c| (c - c1).abs() <= 1e-12 * c1.abs().max(1.0))
        .ok_or_else(|| Error::Parameter(format!("c1={c1} is not on the report's grid")))?;
    let limsup = report.limsup_estimate[j];
    if !limsup.is_finite() {
        return Err(Error::Numerical(format!("limsup estimate at c={c1} is {limsup}")));
    }
    let dc = c2 - c1;
    Ok(if report.condition.is_discrete() {
        0.5 * dc * limsup
    } else {
        0.5 * dc * limsup.sqrt()
    })
}
