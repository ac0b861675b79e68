use serde::Serialize;

use super::{StartModel, TimeConvention};
use crate::error::{Error, Result};
use crate::family::ChainFamily;

const RANGE_SLACK: f64 = 1e-12;
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileMeta {
    pub family: String,
    /// `None` for closed-form profiles.
    pub n: Option<usize>,
    pub start: Option<usize>,
    pub convention: Option<TimeConvention>,
    /// Grid points removed because `t_n + c w_n < 0`.
    pub dropped: Vec<f64>,
}

/// A sampled profile `c -> value` on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub c_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: ProfileMeta,
}

impl ProfileCurve {
    pub fn new(c_grid: Vec<f64>, values: Vec<f64>, meta: ProfileMeta) -> Result<Self> {
        if c_grid.len() != values.len() {
            return Err(Error::Contract("grid and values differ in length".into()));
        }
        if c_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Parameter("c grid must be strictly increasing".into()));
        }
        for (c, v) in c_grid.iter().zip(&values) {
            if !(*v >= -RANGE_SLACK && *v <= 1.0 + RANGE_SLACK) {
                return Err(Error::Numerical(format!("profile value {v} at c={c} outside [0, 1]")));
            }
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[1] > w[0] + MONOTONE_SLACK {
                return Err(Error::Numerical(format!(
                    "profile increases from {} to {} between c={} and c={}",
                    w[0],
                    w[1],
                    c_grid[i],
                    c_grid[i + 1]
                )));
            }
        }
        Ok(Self { c_grid, values, meta })
    }

    pub fn len(&self) -> usize {
        self.c_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_grid.is_empty()
    }
}

/// `c -> d(t_n + c w_n)` for a family member, under the family's default
/// time convention unless one is given.
pub fn empirical_profile(
    family: &ChainFamily,
    n: usize,
    start: Option<usize>,
    c_grid: &[f64],
    convention: Option<TimeConvention>,
) -> Result<ProfileCurve> {
    let convention = convention.unwrap_or_else(|| family.time_convention());
    let model = family.model(n, start)?;
    let (t_n, w_n) = family.schedule(n)?;
    profile_from_model(model.as_ref(), &family.name(), Some(n), t_n, w_n, c_grid, convention)
}

pub fn profile_from_model(
    model: &dyn StartModel,
    family: &str,
    n: Option<usize>,
    t_n: f64,
    w_n: f64,
    c_grid: &[f64],
    convention: TimeConvention,
) -> Result<ProfileCurve> {
    let mut kept = Vec::with_capacity(c_grid.len());
    let mut times = Vec::with_capacity(c_grid.len());
    let mut dropped = Vec::new();
    for &c in c_grid {
        let t = t_n + c * w_n;
        if t < 0.0 {
            dropped.push(c);
        } else {
            kept.push(c);
            times.push(t);
        }
    }
    let values = model.distances(&times, convention)?;
    ProfileCurve::new(
        kept,
        values,
        ProfileMeta {
            family: family.to_string(),
            n,
            start: Some(model.start()),
            convention: Some(convention),
            dropped,
        },
    )
}
