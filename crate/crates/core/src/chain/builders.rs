//! Builders for the example chains: lazy hypercube walk, its Hamming-weight
//! lumping, the Bernoulli–Laplace urn chain, and three card shuffles on the
//! symmetric group.

use nalgebra::DMatrix;

use super::perm::{factorial, lex_rank, permutations_lex};
use super::ReversibleChain;
use crate::error::{Error, Result};
use crate::special::{binomial_row, ln_choose, log_sum_exp};

/// Largest dimension for the dense `2^n`-state hypercube.
pub const HYPERCUBE_LAZY_MAX_N: usize = 14;
/// Largest dimension for the lumped hypercube; `2^-n` must stay a normal f64.
pub const HYPERCUBE_WEIGHT_MAX_N: usize = 1000;
/// Largest deck size for the card shuffles (`n!` states).
pub const SYMMETRIC_GROUP_MAX_N: usize = 6;
/// Smallest admissible stationary mass, as a natural log.
const MIN_LN_STATIONARY: f64 = -700.0;

/// Lazy walk on `{0,1}^n`: pick a coordinate uniformly and resample it.
pub fn build_hypercube_lazy(n: usize) -> Result<ReversibleChain> {
    if n == 0 || n > HYPERCUBE_LAZY_MAX_N {
        return Err(Error::SizeLimit(format!(
            "hypercube dimension must be in 1..={HYPERCUBE_LAZY_MAX_N}, got {n}"
        )));
    }
    let size = 1usize << n;
    let mut p = DMatrix::zeros(size, size);
    let flip = 1.0 / (2.0 * n as f64);
    for x in 0..size {
        p[(x, x)] = 0.5;
        for bit in 0..n {
            p[(x, x ^ (1 << bit))] = flip;
        }
    }
    let pi = vec![1.0 / size as f64; size];
    ReversibleChain::new(p, pi, format!("hypercube-lazy(n={n})"))?.with_transitive(true)
}

/// The lazy hypercube walk projected onto Hamming weight: a birth–death
/// chain on `{0..n}` with Binomial(n, 1/2) stationary law.
pub fn build_hypercube_weight_chain(n: usize) -> Result<ReversibleChain> {
    if n == 0 || n > HYPERCUBE_WEIGHT_MAX_N {
        return Err(Error::SizeLimit(format!(
            "weight-chain dimension must be in 1..={HYPERCUBE_WEIGHT_MAX_N}, got {n}"
        )));
    }
    let size = n + 1;
    let nf = n as f64;
    let mut p = DMatrix::zeros(size, size);
    for j in 0..size {
        let up = (n - j) as f64 / (2.0 * nf);
        let down = j as f64 / (2.0 * nf);
        if j < n {
            p[(j, j + 1)] = up;
        }
        if j > 0 {
            p[(j, j - 1)] = down;
        }
        p[(j, j)] = 1.0 - up - down;
    }
    let pi = if n < 60 {
        let total = 2f64.powi(n as i32);
        binomial_row(n as u64).into_iter().map(|c| c / total).collect()
    } else {
        normalized_from_logs((0..=n as u64).map(|j| ln_choose(n as u64, j)).collect())
    };
    ReversibleChain::new(p, pi, format!("hypercube-weight(n={n})"))
}

/// Bernoulli–Laplace urns of sizes `k` and `n - k` holding `k` red balls;
/// the state is the number of red balls in the first urn.
pub fn build_bernoulli_laplace(n: usize, k: usize) -> Result<ReversibleChain> {
    if k == 0 || 2 * k > n {
        return Err(Error::Parameter(format!(
            "Bernoulli-Laplace requires 1 <= k <= n/2, got n={n}, k={k}"
        )));
    }
    let (nu, ku) = (n as u64, k as u64);
    if -ln_choose(nu, ku) < MIN_LN_STATIONARY {
        return Err(Error::SizeLimit(format!(
            "Bernoulli-Laplace n={n}, k={k}: stationary mass 1/C(n,k) underflows"
        )));
    }
    let size = k + 1;
    let denom = (k * (n - k)) as f64;
    let mut p = DMatrix::zeros(size, size);
    for j in 0..size {
        let down = (j * (n - 2 * k + j)) as f64 / denom;
        let up = ((k - j) * (k - j)) as f64 / denom;
        if j > 0 {
            p[(j, j - 1)] = down;
        }
        if j < k {
            p[(j, j + 1)] = up;
        }
        p[(j, j)] = 1.0 - up - down;
    }
    let logs = (0..=ku)
        .map(|j| ln_choose(ku, j) + ln_choose(nu - ku, ku - j))
        .collect();
    let pi = normalized_from_logs(logs);
    ReversibleChain::new(p, pi, format!("bernoulli-laplace(n={n},k={k})"))
}

/// Random transpositions: swap the cards at two independent uniform
/// positions.
pub fn build_random_transpositions(n: usize) -> Result<ReversibleChain> {
    check_deck(n)?;
    let nn = (n * n) as f64;
    let moves = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    symmetric_group_walk(n, "random-transpositions", moves.map(|(i, j)| {
        (1.0 / nn, Box::new(move |w: &mut Vec<u8>| w.swap(i, j)) as Move)
    }))
}

/// Star transpositions: swap the top card with a uniformly chosen card
/// (possibly itself).
pub fn build_star_transpositions(n: usize) -> Result<ReversibleChain> {
    check_deck(n)?;
    let w = 1.0 / n as f64;
    symmetric_group_walk(
        n,
        "star-transpositions",
        (0..n).map(|i| (w, Box::new(move |w: &mut Vec<u8>| w.swap(0, i)) as Move)),
    )
}

/// Random-to-random: remove a uniform card and reinsert it at a uniform
/// position, over all `n^2` (remove, insert) pairs.
pub fn build_random_to_random(n: usize) -> Result<ReversibleChain> {
    check_deck(n)?;
    let nn = (n * n) as f64;
    let moves = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
    symmetric_group_walk(n, "random-to-random", moves.map(|(from, to)| {
        let mv: Move = Box::new(move |w: &mut Vec<u8>| {
            let card = w.remove(from);
            w.insert(to, card);
        });
        (1.0 / nn, mv)
    }))
}

type Move = Box<dyn Fn(&mut Vec<u8>)>;

fn check_deck(n: usize) -> Result<()> {
    if !(2..=SYMMETRIC_GROUP_MAX_N).contains(&n) {
        return Err(Error::SizeLimit(format!(
            "deck size must be in 2..={SYMMETRIC_GROUP_MAX_N}, got {n}"
        )));
    }
    Ok(())
}

fn symmetric_group_walk(
    n: usize,
    name: &str,
    moves: impl Iterator<Item = (f64, Move)>,
) -> Result<ReversibleChain> {
    let moves: Vec<(f64, Move)> = moves.collect();
    let states = permutations_lex(n);
    let size = factorial(n);
    let mut p = DMatrix::zeros(size, size);
    let mut word = Vec::with_capacity(n);
    for (x, sigma) in states.iter().enumerate() {
        for (weight, mv) in &moves {
            word.clear();
            word.extend_from_slice(sigma);
            mv(&mut word);
            p[(x, lex_rank(&word))] += weight;
        }
    }
    let pi = vec![1.0 / size as f64; size];
    ReversibleChain::new(p, pi, format!("{name}(n={n})"))?.with_transitive(true)
}

fn normalized_from_logs(logs: Vec<f64>) -> Vec<f64> {
    let total = log_sum_exp(logs.iter().copied());
    logs.into_iter().map(|l| (l - total).exp()).collect()
}
