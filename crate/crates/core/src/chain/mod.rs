//! Finite reversible Markov chains.
//!
//! A [`ReversibleChain`] can only be obtained through validation, so every
//! value of the type satisfies stochasticity, nonnegativity, detailed
//! balance and irreducibility at the tolerances below.

mod builders;
mod io;
pub mod perm;

pub use builders::{
    build_bernoulli_laplace, build_hypercube_lazy, build_hypercube_weight_chain,
    build_random_to_random, build_random_transpositions, build_star_transpositions,
    HYPERCUBE_LAZY_MAX_N, HYPERCUBE_WEIGHT_MAX_N, SYMMETRIC_GROUP_MAX_N,
};
pub use io::{load_chain, parse_chain, save_chain, write_chain};

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result, Violation};

/// Absolute tolerance for row sums, the stationary sum and detailed balance.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleChain {
    transition: DMatrix<f64>,
    stationary: Vec<f64>,
    label: String,
    transitive: bool,
}

impl ReversibleChain {
    /// Validates and wraps a transition matrix with its stationary measure.
    pub fn new(
        transition: DMatrix<f64>,
        stationary: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        validate(&transition, &stationary)?;
        Ok(Self {
            transition,
            stationary,
            label: label.into(),
            transitive: false,
        })
    }

    /// Marks the chain as transitive (its automorphism group acts
    /// transitively on states). Transitive chains must be doubly stochastic.
    pub fn with_transitive(mut self, transitive: bool) -> Result<Self> {
        if transitive {
            let n = self.size();
            for col in 0..n {
                let sum: f64 = self.transition.column(col).iter().sum();
                if (sum - 1.0).abs() > 1e-10 {
                    return Err(Error::Contract(format!(
                        "chain `{}` flagged transitive but column {col} sums to {sum}",
                        self.label
                    )));
                }
            }
        }
        self.transitive = transitive;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.stationary.len()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.transition[(x, y)]
    }

    /// Whether only the diagonal and the first off-diagonals are nonzero.
    pub fn is_birth_death(&self) -> bool {
        let n = self.size();
        for x in 0..n {
            for y in 0..n {
                if x.abs_diff(y) > 1 && self.transition[(x, y)] != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_state(&self, x: usize) -> Result<()> {
        if x >= self.size() {
            return Err(Error::Parameter(format!(
                "state {x} out of range for chain `{}` with {} states",
                self.label,
                self.size()
            )));
        }
        Ok(())
    }
}

/// Replaces `P` by `(I + P)/2`. The stationary measure is unchanged and
/// every eigenvalue `b` maps to `(1 + b)/2 >= 0`.
pub fn make_lazy(chain: &ReversibleChain) -> ReversibleChain {
    let n = chain.size();
    let mut transition = chain.transition.scale(0.5);
    for x in 0..n {
        transition[(x, x)] += 0.5;
    }
    ReversibleChain {
        transition,
        stationary: chain.stationary.clone(),
        label: format!("lazy({})", chain.label),
        transitive: chain.transitive,
    }
}

fn validate(transition: &DMatrix<f64>, stationary: &[f64]) -> Result<()> {
    let n = stationary.len();
    if n == 0 {
        return Err(Error::Invariant(Violation::Shape("empty state space".into())));
    }
    if transition.nrows() != n || transition.ncols() != n {
        return Err(Error::Invariant(Violation::Shape(format!(
            "transition is {}x{} but stationary has {n} entries",
            transition.nrows(),
            transition.ncols()
        ))));
    }
    for (x, &p) in stationary.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Invariant(Violation::Negative {
                what: "stationary",
                row: x,
                col: x,
                value: p,
            }));
        }
    }
    for x in 0..n {
        for y in 0..n {
            let v = transition[(x, y)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Invariant(Violation::Negative {
                    what: "transition",
                    row: x,
                    col: y,
                    value: v,
                }));
            }
        }
    }
    for x in 0..n {
        let sum: f64 = transition.row(x).iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::Invariant(Violation::RowSum { row: x, sum }));
        }
    }
    let total: f64 = stationary.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::Invariant(Violation::StationarySum { sum: total }));
    }
    for x in 0..n {
        for y in (x + 1)..n {
            let gap = (stationary[x] * transition[(x, y)] - stationary[y] * transition[(y, x)]).abs();
            if gap > STOCHASTIC_TOL {
                return Err(Error::Invariant(Violation::DetailedBalance { x, y, gap }));
            }
        }
    }
    if let Some(unreached) = unreachable_state(transition) {
        return Err(Error::Invariant(Violation::Reducible { unreached }));
    }
    Ok(())
}

/// First state that is not reachable from state 0 in both directions.
fn unreachable_state(transition: &DMatrix<f64>) -> Option<usize> {
    let n = transition.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                let w = if forward { transition[(x, y)] } else { transition[(y, x)] };
                if w > 0.0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    (0..n).find(|&x| !(fwd[x] && bwd[x]))
}
