use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{binomial_row, ln_choose, log_sum_exp};

/// Spectrum seen from one start state, one entry per eigenspace.
///
/// Entry 0 is the trivial eigenspace (`beta = 1`, rate 0, weight 1). Weights
/// are `sum f_i(x)^2` over the eigenspace and are stored as natural logs so
/// that large state spaces (e.g. `C(1000, 500)`) stay representable.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticSpectrum {
    label: String,
    betas: Vec<f64>,
    rates: Vec<f64>,
    ln_weights: Vec<f64>,
    ln_multiplicities: Vec<f64>,
    ln_inv_pi: f64,
    transitive: bool,
    /// Exact weights when the source has them.
    linear_weights: Option<Vec<f64>>,
}

/// A nontrivial eigenspace as consumed by the condition kernels.
#[derive(Debug, Clone, Copy)]
pub struct SpectralTerm {
    pub beta: f64,
    pub rate: f64,
    pub ln_weight: f64,
    pub ln_multiplicity: f64,
}

impl AnalyticSpectrum {
    pub fn new(
        label: String,
        betas: Vec<f64>,
        rates: Vec<f64>,
        ln_weights: Vec<f64>,
        ln_multiplicities: Vec<f64>,
        ln_inv_pi: f64,
        transitive: bool,
    ) -> Result<Self> {
        let len = betas.len();
        if len == 0
            || rates.len() != len
            || ln_weights.len() != len
            || ln_multiplicities.len() != len
        {
            return Err(Error::Contract("spectrum vectors must be non-empty and equal length".into()));
        }
        if rates[0] != 0.0 || betas[0] != 1.0 {
            return Err(Error::Contract("first entry must be the trivial eigenvalue 1".into()));
        }
        if let Some(r) = rates[1..].iter().find(|&&r| !(r > 0.0)) {
            return Err(Error::Contract(format!(
                "nontrivial eigenspace with rate {r}; the chain is reducible"
            )));
        }
        let total = log_sum_exp(ln_weights.iter().copied());
        if (total - ln_inv_pi).abs() > 1e-6 {
            return Err(Error::Numerical(format!(
                "start weights sum to exp({total}) but 1/pi(x) = exp({ln_inv_pi})"
            )));
        }
        Ok(Self {
            label,
            betas,
            rates,
            ln_weights,
            ln_multiplicities,
            ln_inv_pi,
            transitive,
            linear_weights: None,
        })
    }

    /// Attaches weights known directly (not through their logs), e.g.
    /// exact binomial coefficients.
    pub fn with_linear_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Contract("linear weights have the wrong length".into()));
        }
        for (w, lw) in weights.iter().zip(&self.ln_weights) {
            if (w.ln() - lw).abs() > 1e-9 {
                return Err(Error::Contract(format!("weight {w} disagrees with its log {lw}")));
            }
        }
        self.linear_weights = Some(weights);
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// The distinct values `1 - beta`, ascending.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn ln_start_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    pub fn start_weights(&self) -> Vec<f64> {
        match &self.linear_weights {
            Some(w) => w.clone(),
            None => self.ln_weights.iter().map(|w| w.exp()).collect(),
        }
    }

    pub fn multiplicities(&self) -> Vec<f64> {
        self.ln_multiplicities.iter().map(|m| m.exp().round()).collect()
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    pub fn stationary_at_start(&self) -> f64 {
        (-self.ln_inv_pi).exp()
    }

    pub fn spectral_gap(&self) -> f64 {
        self.rates.get(1).copied().unwrap_or(1.0)
    }

    pub fn has_nonnegative_spectrum(&self) -> bool {
        self.betas.iter().all(|&b| b >= 0.0)
    }

    pub fn nontrivial_terms(&self) -> impl Iterator<Item = SpectralTerm> + '_ {
        (1..self.len()).map(move |i| SpectralTerm {
            beta: self.betas[i],
            rate: self.rates[i],
            ln_weight: self.ln_weights[i],
            ln_multiplicity: self.ln_multiplicities[i],
        })
    }

    /// Spectrum of `(I + P)/2`: every `beta` maps to `(1 + beta)/2`.
    pub fn lazy(&self) -> Self {
        Self {
            label: format!("lazy({})", self.label),
            betas: self.betas.iter().map(|b| 0.5 * (1.0 + b)).collect(),
            rates: self.rates.iter().map(|r| 0.5 * r).collect(),
            ..self.clone()
        }
    }
}

/// Exact spectrum of the lazy hypercube walk on `{0,1}^n` seen from a
/// corner: rates `i/n` with weight and multiplicity `C(n, i)`.
pub fn hypercube_analytic_spectrum(n: usize) -> Result<AnalyticSpectrum> {
    if n == 0 {
        return Err(Error::Parameter("hypercube dimension must be positive".into()));
    }
    let nu = n as u64;
    let exact = (n < 60).then(|| binomial_row(nu));
    let ln_binom: Vec<f64> = match &exact {
        Some(row) => row.iter().map(|c| c.ln()).collect(),
        None => (0..=nu).map(|i| ln_choose(nu, i)).collect(),
    };
    let nf = n as f64;
    let rates: Vec<f64> = (0..=n).map(|i| i as f64 / nf).collect();
    let betas = (0..=n).map(|i| (n - i) as f64 / nf).collect();
    let spec = AnalyticSpectrum::new(
        format!("hypercube-analytic(n={n})"),
        betas,
        rates,
        ln_binom.clone(),
        ln_binom,
        nf * std::f64::consts::LN_2,
        true,
    )?;
    match exact {
        Some(row) => spec.with_linear_weights(row),
        None => Ok(spec),
    }
}
