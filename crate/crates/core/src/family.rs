//! Registry of chain families with their cutoff schedules `(t_n, w_n)`.
//!
//! | family                | `t_n`                            | `w_n` |
//! |-----------------------|----------------------------------|-------|
//! | hypercube             | `(1/2) n ln n`                   | `n`   |
//! | bernoulli-laplace     | `(1/2) n ln min(k, sqrt n)`      | `n`   |
//! | random-transpositions | `(1/2) n ln n`                   | `n/2` |
//! | star-transpositions   | `n ln n`                         | `n`   |
//! | random-to-random      | `(3/4) n ln n - (1/4) n ln ln n` | `n`   |
//!
//! The random-to-random time is the one from the card-shuffling literature;
//! a leading `(3/4) ln n` without the factor `n` would make `t_n` negative
//! for every deck size of interest.
//!
//! With `lazy` set the chain is replaced by `(I + P)/2`, which runs at half
//! speed, so both `t_n` and `w_n` are doubled.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::chain::{
    build_bernoulli_laplace, build_hypercube_weight_chain, build_random_to_random,
    build_random_transpositions, build_star_transpositions, make_lazy, ReversibleChain,
    HYPERCUBE_WEIGHT_MAX_N, SYMMETRIC_GROUP_MAX_N,
};
use crate::conditions::{g_bernoulli_laplace, g_hypercube, g_random_to_random, ConditionId};
use crate::distance::{BirthDeathStart, SpectralStart, StartModel, TimeConvention};
use crate::error::{Error, Result};
use crate::spectral::{
    birth_death_start_spectrum, decompose, hypercube_analytic_spectrum, AnalyticSpectrum,
};

/// Largest `n` for the Bernoulli–Laplace family (with the default `k = n/2`,
/// `1/C(n, k)` must stay representable).
pub const BERNOULLI_LAPLACE_MAX_N: usize = 1000;
/// Largest `n` for spectrum-only hypercube evaluations.
pub const HYPERCUBE_ANALYTIC_MAX_N: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Hypercube,
    HypercubeAnalytic,
    BernoulliLaplace,
    RandomTranspositions,
    StarTranspositions,
    RandomToRandom,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::Hypercube,
        FamilyKind::HypercubeAnalytic,
        FamilyKind::BernoulliLaplace,
        FamilyKind::RandomTranspositions,
        FamilyKind::StarTranspositions,
        FamilyKind::RandomToRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Hypercube => "hypercube",
            FamilyKind::HypercubeAnalytic => "hypercube-analytic",
            FamilyKind::BernoulliLaplace => "bernoulli-laplace",
            FamilyKind::RandomTranspositions => "random-transpositions",
            FamilyKind::StarTranspositions => "star-transpositions",
            FamilyKind::RandomToRandom => "random-to-random",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainFamily {
    pub kind: FamilyKind,
    /// Urn size for Bernoulli–Laplace; `n/2` when absent.
    pub k: Option<usize>,
    pub lazy: bool,
}

impl ChainFamily {
    pub fn new(kind: FamilyKind) -> Self {
        Self { kind, k: None, lazy: false }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .map(Self::new)
            .ok_or_else(|| Error::Parameter(format!("unknown family `{name}`")))
    }

    pub fn with_k(mut self, k: Option<usize>) -> Self {
        self.k = k;
        self
    }

    pub fn with_lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn name(&self) -> String {
        if self.lazy {
            format!("lazy({})", self.kind)
        } else {
            self.kind.to_string()
        }
    }

    pub fn max_n(&self) -> usize {
        match self.kind {
            FamilyKind::Hypercube => HYPERCUBE_WEIGHT_MAX_N,
            FamilyKind::HypercubeAnalytic => HYPERCUBE_ANALYTIC_MAX_N,
            FamilyKind::BernoulliLaplace => BERNOULLI_LAPLACE_MAX_N,
            _ => SYMMETRIC_GROUP_MAX_N,
        }
    }

    fn min_n(&self) -> usize {
        match self.kind {
            FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic => 1,
            FamilyKind::BernoulliLaplace => 2,
            _ => 2,
        }
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        if n < self.min_n() || n > self.max_n() {
            return Err(Error::SizeLimit(format!(
                "{} supports n in {}..={}, got {n}",
                self.kind,
                self.min_n(),
                self.max_n()
            )));
        }
        Ok(())
    }

    pub fn is_transitive(&self) -> bool {
        !matches!(self.kind, FamilyKind::BernoulliLaplace)
    }

    pub fn time_convention(&self) -> TimeConvention {
        match self.kind {
            FamilyKind::HypercubeAnalytic | FamilyKind::RandomToRandom => TimeConvention::Discrete,
            _ => TimeConvention::Continuous,
        }
    }

    fn bl_k(&self, n: usize) -> usize {
        self.k.unwrap_or(n / 2)
    }

    /// `(t_n, w_n)`.
    pub fn schedule(&self, n: usize) -> Result<(f64, f64)> {
        self.check_n(n)?;
        let nf = n as f64;
        let (t, w) = match self.kind {
            FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic => (0.5 * nf * nf.ln(), nf),
            FamilyKind::BernoulliLaplace => {
                let k = self.bl_k(n) as f64;
                (0.5 * nf * k.min(nf.sqrt()).ln(), nf)
            }
            FamilyKind::RandomTranspositions => (0.5 * nf * nf.ln(), 0.5 * nf),
            FamilyKind::StarTranspositions => (nf * nf.ln(), nf),
            FamilyKind::RandomToRandom => (0.75 * nf * nf.ln() - 0.25 * nf * nf.ln().ln(), nf),
        };
        let scale = if self.lazy { 2.0 } else { 1.0 };
        let (t, w) = (scale * t, scale * w);
        if !(t > 0.0 && w > 0.0) {
            return Err(Error::Parameter(format!(
                "{} at n={n} has a degenerate schedule t_n={t}, w_n={w}",
                self.name()
            )));
        }
        Ok((t, w))
    }

    /// Checks that every schedule is positive and that `w_n / t_n` does not
    /// grow along the list.
    pub fn validate_schedule(&self, n_list: &[usize]) -> Result<()> {
        if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("n list must be non-empty and strictly increasing".into()));
        }
        let mut prev = f64::INFINITY;
        for &n in n_list {
            let (t, w) = self.schedule(n)?;
            let ratio = w / t;
            if ratio > prev * (1.0 + 1e-12) {
                return Err(Error::Parameter(format!(
                    "window ratio w_n/t_n grows at n={n} for {}",
                    self.name()
                )));
            }
            prev = ratio;
        }
        Ok(())
    }

    pub fn default_start(&self, n: usize) -> usize {
        match self.kind {
            FamilyKind::BernoulliLaplace => self.bl_k(n),
            _ => 0,
        }
    }

    /// The chain the distances are computed on. For the hypercube families
    /// this is the Hamming-weight lumping, which has the same distance from a
    /// corner as the full walk.
    pub fn build_chain(&self, n: usize) -> Result<ReversibleChain> {
        self.check_n(n)?;
        let chain = match self.kind {
            FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic => build_hypercube_weight_chain(n)?,
            FamilyKind::BernoulliLaplace => build_bernoulli_laplace(n, self.bl_k(n))?,
            FamilyKind::RandomTranspositions => build_random_transpositions(n)?,
            FamilyKind::StarTranspositions => build_star_transpositions(n)?,
            FamilyKind::RandomToRandom => build_random_to_random(n)?,
        };
        Ok(if self.lazy { make_lazy(&chain) } else { chain })
    }

    fn resolve_start(&self, n: usize, start: Option<usize>) -> Result<usize> {
        let x = start.unwrap_or_else(|| self.default_start(n));
        if matches!(self.kind, FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic) && x != 0 {
            return Err(Error::Parameter(
                "hypercube families start at a corner (weight 0); the walk is transitive".into(),
            ));
        }
        Ok(x)
    }

    fn hypercube_spectrum(&self, n: usize) -> Result<AnalyticSpectrum> {
        let spec = hypercube_analytic_spectrum(n)?;
        Ok(if self.lazy { spec.lazy() } else { spec })
    }

    /// Start spectrum at `start` (the family default when absent).
    pub fn start_spectrum(&self, n: usize, start: Option<usize>) -> Result<AnalyticSpectrum> {
        self.check_n(n)?;
        let x = self.resolve_start(n, start)?;
        match self.kind {
            FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic => self.hypercube_spectrum(n),
            FamilyKind::BernoulliLaplace => birth_death_start_spectrum(&self.build_chain(n)?, x),
            _ => decompose(&self.build_chain(n)?)?.start_spectrum(x),
        }
    }

    /// Distance model at `start` (the family default when absent).
    pub fn model(&self, n: usize, start: Option<usize>) -> Result<Box<dyn StartModel>> {
        let x = self.resolve_start(n, start)?;
        let chain = self.build_chain(n)?;
        Ok(match self.kind {
            FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic => {
                Box::new(BirthDeathStart::with_spectrum(chain, x, self.hypercube_spectrum(n)?)?)
            }
            FamilyKind::BernoulliLaplace => Box::new(BirthDeathStart::new(chain, x)?),
            _ => Box::new(SpectralStart::new(Arc::new(decompose(&chain)?), x)?),
        })
    }

    /// A known bound `g(c)` for the condition, in the condition's own units,
    /// when one is available.
    pub fn reference_bound(
        &self,
        id: ConditionId,
        c: f64,
        a_prime: Option<f64>,
    ) -> Result<Option<f64>> {
        if self.lazy {
            return Ok(None);
        }
        Ok(match (self.kind, id) {
            (FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic, ConditionId::Cond2 | ConditionId::Cond4) => {
                Some(g_hypercube(c))
            }
            (FamilyKind::RandomToRandom, ConditionId::Cond4) if c > 1.0 => {
                Some(g_random_to_random(c)?.sqrt())
            }
            (FamilyKind::BernoulliLaplace, ConditionId::Cond2) => match a_prime {
                Some(a) => Some(g_bernoulli_laplace(c, a)?.sqrt()),
                None => None,
            },
            _ => None,
        })
    }

    /// Whether `reference_bound` can ever be present for this condition.
    pub fn has_reference(&self, id: ConditionId, a_prime: Option<f64>) -> bool {
        !self.lazy
            && match (self.kind, id) {
                (FamilyKind::Hypercube | FamilyKind::HypercubeAnalytic, ConditionId::Cond2 | ConditionId::Cond4) => true,
                (FamilyKind::RandomToRandom, ConditionId::Cond4) => true,
                (FamilyKind::BernoulliLaplace, ConditionId::Cond2) => a_prime.is_some(),
                _ => false,
            }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let h = ChainFamily::new(FamilyKind::Hypercube);
        assert_eq!(h.schedule(64).unwrap(), (32.0 * 64f64.ln(), 64.0));
        let rt = ChainFamily::new(FamilyKind::RandomTranspositions);
        assert_eq!(rt.schedule(6).unwrap().1, 3.0);
        let rtr = ChainFamily::new(FamilyKind::RandomToRandom);
        let (t, _) = rtr.schedule(6).unwrap();
        assert!((t - (4.5 * 6f64.ln() - 1.5 * 6f64.ln().ln())).abs() < 1e-12);
        let bl = ChainFamily::new(FamilyKind::BernoulliLaplace);
        assert_eq!(bl.schedule(100).unwrap().0, 50.0 * 10f64.ln());
        let lazy = h.with_lazy(true);
        assert_eq!(lazy.schedule(64).unwrap(), (64.0 * 64f64.ln(), 128.0));
    }

    #[test]
    fn schedule_validation() {
        let h = ChainFamily::new(FamilyKind::HypercubeAnalytic);
        h.validate_schedule(&[50, 100, 200]).unwrap();
        assert!(h.validate_schedule(&[100, 50]).is_err());
        assert!(h.check_n(0).is_err());
        let rt = ChainFamily::new(FamilyKind::RandomTranspositions);
        assert!(matches!(rt.schedule(7), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn names_round_trip() {
        for kind in FamilyKind::ALL {
            assert_eq!(ChainFamily::from_name(kind.name()).unwrap().kind, kind);
        }
        assert!(ChainFamily::from_name("torus").is_err());
    }

    #[test]
    fn reference_bounds() {
        let h = ChainFamily::new(FamilyKind::HypercubeAnalytic);
        assert!(h.reference_bound(ConditionId::Cond4, 0.0, None).unwrap().is_some());
        assert!(h.reference_bound(ConditionId::Cond, 0.0, None).unwrap().is_none());
        let rtr = ChainFamily::new(FamilyKind::RandomToRandom);
        assert!(rtr.reference_bound(ConditionId::Cond4, 0.5, None).unwrap().is_none());
        assert!(rtr.reference_bound(ConditionId::Cond4, 2.0, None).unwrap().is_some());
        let bl = ChainFamily::new(FamilyKind::BernoulliLaplace);
        assert!(bl.reference_bound(ConditionId::Cond2, 1.0, None).unwrap().is_none());
        assert!(bl.reference_bound(ConditionId::Cond2, 1.0, Some(1.0)).unwrap().is_some());
    }
}
