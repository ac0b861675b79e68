//! Scalar special functions: error function, normal CDF, log-factorials
//! and Poisson log-probabilities.
//!
//! The error function uses the positive-term series
//! `erf(x) = 2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!` below
//! `ERFC_CF_THRESHOLD` and the Laplace continued fraction for `erfc` above
//! it, so tail values keep full relative precision.

use std::f64::consts::PI;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
const ERFC_CF_THRESHOLD: f64 = 2.0;

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < ERFC_CF_THRESHOLD {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

/// Complementary error function `1 - erf(x)`, accurate in relative terms
/// for large positive `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < ERFC_CF_THRESHOLD {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * x2 / f64::from(2 * n + 1);
        sum += term;
        if term <= sum * 1e-17 || n > 500 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Modified Lentz evaluation of
/// `erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_continued_fraction(x: f64) -> f64 {
    if x > 27.3 {
        // exp(-x^2) underflows
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = f64::from(k) * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// `ln k! - [(k + 1/2) ln k - k + ln sqrt(2 pi)]`, the Stirling remainder.
pub fn stirling_remainder(k: u64) -> f64 {
    if k == 0 {
        return 1.0 - LN_SQRT_2PI;
    }
    if k < 16 {
        let kf = k as f64;
        return ln_factorial(k) - (kf + 0.5) * kf.ln() + kf - LN_SQRT_2PI;
    }
    let k = k as f64;
    let k2 = k * k;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0) / k2) / k2) / k2) / k
}

/// Natural log of `k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 16 {
        let mut f = 1.0f64;
        for j in 2..=k {
            f *= j as f64;
        }
        return f.ln();
    }
    let kf = k as f64;
    (kf + 0.5) * kf.ln() - kf + LN_SQRT_2PI + stirling_remainder(k)
}

/// Natural log of the binomial coefficient `C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial coefficients `C(n, 0..=n)` by the multiplicative recursion.
/// Exact while the values stay below 2^53.
pub fn binomial_row(n: u64) -> Vec<f64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = 1.0f64;
    row.push(c);
    for k in 0..n {
        c = c * (n - k) as f64 / (k + 1) as f64;
        row.push(c);
    }
    row
}

/// Deviance term `k ln(k/m) + m - k`, evaluated without cancellation when
/// `k` is close to `m`.
fn deviance(k: f64, m: f64) -> f64 {
    if (k - m).abs() < 0.1 * (k + m) {
        let v = (k - m) / (k + m);
        let mut s = (k - m) * v;
        let mut ej = 2.0 * k * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / f64::from(2 * j + 1);
            if next == s {
                return s;
            }
            s = next;
        }
        s
    } else {
        k * (k / m).ln() + m - k
    }
}

/// Natural log of the Poisson(`mean`) probability mass at `k`.
pub fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return -mean;
    }
    let kf = k as f64;
    -stirling_remainder(k) - deviance(kf, mean) - 0.5 * (2.0 * PI * kf).ln()
}

/// `ln(sum exp(v))` over the finite entries of `values`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
