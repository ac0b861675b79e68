//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::process::Command;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cutofflab::chain::{build_hypercube_lazy, build_hypercube_weight_chain, HYPERCUBE_LAZY_MAX_N,
    HYPERCUBE_WEIGHT_MAX_N, SYMMETRIC_GROUP_MAX_N};
use cutofflab::cli::{resolve_chain, ChainArgs, ChainSource};
use cutofflab::conditions::{
    cond_discrete_transitive, discrete_admissible, g_hypercube, g_random_to_random, limsup_report,
    run_bound_trials, ConditionId,
};
use cutofflab::distance::{
    d_continuous, d_weighted_birth_death, empirical_profile, l2_difference_check, TimeConvention,
};
use cutofflab::error::Error;
use cutofflab::export::{fmt_f64, parse_cell};
use cutofflab::family::{ChainFamily, FamilyKind, BERNOULLI_LAPLACE_MAX_N};
use cutofflab::profiles::{
    profile_bernoulli_laplace, profile_hypercube, profile_poisson_shuffle, profile_ramanujan,
};
use cutofflab::special::{binomial_row, normal_pdf};
use cutofflab::spectral::{decompose, hypercube_analytic_spectrum, SpectralDecomposition};

fn report(id: u32, pass: bool, detail: &str) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn source(chain: ChainSource, n: usize, lazy: bool) -> ChainArgs {
    ChainArgs { chain, n: Some(n), k: None, path: None, lazy, start: None }
}

fn builtin_sources_at_max() -> Vec<ChainArgs> {
    vec![
        source(ChainSource::Hypercube, HYPERCUBE_LAZY_MAX_N, false),
        source(ChainSource::HypercubeWeight, HYPERCUBE_WEIGHT_MAX_N, false),
        source(ChainSource::BernoulliLaplace, BERNOULLI_LAPLACE_MAX_N, false),
        source(ChainSource::RandomTranspositions, SYMMETRIC_GROUP_MAX_N, false),
        source(ChainSource::StarTranspositions, SYMMETRIC_GROUP_MAX_N, false),
        source(ChainSource::RandomToRandom, SYMMETRIC_GROUP_MAX_N, false),
        source(ChainSource::RandomTranspositions, SYMMETRIC_GROUP_MAX_N, true),
        source(ChainSource::StarTranspositions, SYMMETRIC_GROUP_MAX_N, true),
    ]
}

#[test]
fn criterion_1_mean_value_bounds() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, args) in builtin_sources_at_max().into_iter().enumerate() {
        let resolved = resolve_chain(&args).unwrap();
        let family = resolved.family.unwrap();
        let (t_n, w_n) = family.schedule(args.n.unwrap()).unwrap();
        let model = resolved.model.as_ref();
        let mut conventions = vec![TimeConvention::Continuous];
        if discrete_admissible(model) {
            conventions.push(TimeConvention::Discrete);
        }
        let trials = run_bound_trials(model, t_n, w_n, 100, 1000 + i as u64, &conventions).unwrap();
        for t in &trials {
            checked += 1;
            if !t.holds {
                failures.push(format!("{} {} c1={} c2={} lhs={} rhs={}", resolved.label, t.convention, t.c1, t.c2, t.lhs, t.rhs));
            }
        }
        println!("  {} conventions={:?} trials={}", resolved.label, conventions, trials.len());
    }
    report(1, failures.is_empty(), &format!("{checked} checks, {} violations", failures.len()));
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn criterion_2_spectral_identities() {
    let mut worst: f64 = 0.0;
    let chains = [
        source(ChainSource::Hypercube, 4, false),
        source(ChainSource::HypercubeWeight, 10, false),
        source(ChainSource::BernoulliLaplace, 12, false),
        source(ChainSource::RandomTranspositions, 4, false),
        source(ChainSource::StarTranspositions, 4, false),
        source(ChainSource::RandomToRandom, 4, false),
    ];
    for args in &chains {
        let chain = cutofflab::cli::build_source_chain(args).unwrap();
        let dec: SpectralDecomposition = decompose(&chain).unwrap();
        let n = dec.size();
        let pi = dec.stationary();
        for i in 0..n {
            for j in 0..n {
                let ip: f64 = (0..n).map(|x| pi[x] * dec.f(i, x) * dec.f(j, x)).sum();
                worst = worst.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        for x in 0..n {
            for y in 0..n {
                let rebuilt: f64 =
                    pi[y] * (0..n).map(|i| dec.f(i, x) * dec.f(i, y) * dec.eigenvalues()[i]).sum::<f64>();
                worst = worst.max((rebuilt - chain.p(x, y)).abs());
            }
            worst = worst.max((dec.parseval_sum(x) * pi[x] - 1.0).abs());
        }
        for (s1, s2) in [(0.0, 0.5), (1.0, 2.0), (0.3, 7.0)] {
            for x in [0, n - 1] {
                let (direct, spectral) = l2_difference_check(&dec, x, s1, s2).unwrap();
                worst = worst.max((direct - spectral).abs() / direct.max(1.0));
            }
        }
    }
    let pass = worst <= 1e-8;
    report(2, pass, &format!("worst deviation {worst:e}"));
    assert!(pass);
}

#[test]
fn criterion_3_hypercube_spectrum() {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let dec = decompose(&build_hypercube_lazy(n).unwrap()).unwrap();
        let numeric = dec.start_spectrum(0).unwrap();
        let exact = hypercube_analytic_spectrum(n).unwrap();
        pass &= numeric.multiplicities() == binomial_row(n as u64);
        pass &= numeric.len() == exact.len();
        for (a, b) in numeric.betas().iter().zip(exact.betas()) {
            worst = worst.max((a - b).abs());
        }
        for &b in dec.eigenvalues() {
            let nearest = exact.betas().iter().map(|e| (e - b).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    pass &= worst <= 1e-8;
    report(3, pass, &format!("max eigenvalue error {worst:e}"));
    assert!(pass);
}

#[test]
fn criterion_4_hypercube_condition_vs_bound() {
    let cs = [0.0, 0.5, 1.0, 2.0, 3.0];
    let ns = [64usize, 128, 256, 512];
    let mut bound_ok = true;
    let value = |n: usize, c: f64| {
        let spec = hypercube_analytic_spectrum(n).unwrap();
        let nf = n as f64;
        cond_discrete_transitive(&spec, 0.5 * nf * nf.ln(), nf, c).unwrap()
    };
    for &n in &ns {
        for &c in &cs {
            let v = value(n, c);
            if v > g_hypercube(c) + 0.05 {
                bound_ok = false;
                println!("  bound exceeded: n={n} c={c} value={v} g={}", g_hypercube(c));
            }
        }
    }
    let mut stable = true;
    for &c in &cs {
        let (v64, v512) = (value(64, c), value(512, c));
        println!("  c={c}: n=64 {v64:.6}  n=512 {v512:.6}  g {:.6}  growth {:.6}", g_hypercube(c), v512 - v64);
        if v512 > v64 + 0.01 {
            stable = false;
        }
    }
    let pass = bound_ok && stable;
    report(4, pass, &format!("value <= g + 0.05: {bound_ok}; n=512 within 0.01 of n=64: {stable}"));
    assert!(pass);
}

#[test]
fn criterion_5_hypercube_profile_convergence() {
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];
    let family = ChainFamily::new(FamilyKind::Hypercube);
    let sup = |n: usize| {
        let curve = empirical_profile(&family, n, None, &grid, Some(TimeConvention::Continuous)).unwrap();
        assert_eq!(curve.len(), grid.len());
        curve
            .c_grid
            .iter()
            .zip(&curve.values)
            .map(|(&c, v)| (v - profile_hypercube(c)).abs())
            .fold(0.0f64, f64::max)
    };
    let (e64, e256) = (sup(64), sup(256));
    let pass = e256 < e64 && e256 < 0.15;
    report(5, pass, &format!("sup error n=64 {e64:.6}, n=256 {e256:.6}"));
    assert!(pass);
}

/// `(1/2) integral |phi(x - mu) - phi(x)| dx` by composite Simpson on [-40, 40 + mu].
fn normal_shift_tv_quadrature(mu: f64) -> f64 {
    let (a, b) = (-40.0, 40.0 + mu);
    let m = 400_000;
    let h = (b - a) / m as f64;
    let f = |x: f64| (normal_pdf(x - mu) - normal_pdf(x)).abs();
    let mut s = f(a) + f(b);
    for i in 1..m {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    0.5 * s * h / 3.0
}

fn poisson_tv_direct(mu: f64, kmax: u64) -> f64 {
    let mut sum = 0.0;
    let (mut p, mut q) = ((-1.0f64).exp(), (-mu).exp());
    for k in 0..=kmax {
        if k > 0 {
            p /= k as f64;
            q *= mu / k as f64;
        }
        sum += (p - q).abs();
    }
    0.5 * sum
}

#[test]
fn criterion_6_closed_form_profiles() {
    let profiles: Vec<(String, Box<dyn Fn(f64) -> f64>)> = vec![
        ("hypercube".into(), Box::new(profile_hypercube)),
        ("poisson-shuffle".into(), Box::new(profile_poisson_shuffle)),
        ("bernoulli-laplace".into(), Box::new(profile_bernoulli_laplace)),
        ("ramanujan(d=3)".into(), Box::new(|c| profile_ramanujan(c, 3).unwrap())),
    ];
    let grid: Vec<f64> = (0..200).map(|i| -4.0 + 8.0 * i as f64 / 199.0).collect();
    let mut shape_ok = true;
    let mut limits_ok = true;
    for (name, f) in &profiles {
        let v: Vec<f64> = grid.iter().map(|&c| f(c)).collect();
        shape_ok &= v.iter().all(|x| (0.0..=1.0).contains(x));
        shape_ok &= v.windows(2).all(|w| w[1] <= w[0]);
        let (lo, hi) = (f(-12.0), f(12.0));
        let ok = (lo - 1.0).abs() <= 1e-8 && hi.abs() <= 1e-8;
        println!("  {name}: value(-12) = {lo:e}, value(12) = {hi:e}, limits within 1e-8: {ok}");
        limits_ok &= ok;
    }
    let oracle = poisson_tv_direct(2.0, 60);
    let poisson_err = (profile_poisson_shuffle(0.0) - oracle).abs();
    let mut bl_err: f64 = 0.0;
    for c in [-1.0, 0.0, 1.0] {
        bl_err = bl_err.max((profile_bernoulli_laplace(c) - normal_shift_tv_quadrature((-2.0f64 * c).exp())).abs());
    }
    let oracles_ok = poisson_err <= 1e-12 && bl_err <= 1e-8;
    let pass = shape_ok && limits_ok && oracles_ok;
    report(
        6,
        pass,
        &format!(
            "monotone/range: {shape_ok}; limits at +-12 within 1e-8: {limits_ok}; poisson oracle err {poisson_err:e}; \
             bernoulli-laplace quadrature err {bl_err:e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_monotonicity_and_lumping() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut violations = 0;
    for args in builtin_sources_at_max() {
        let resolved = resolve_chain(&args).unwrap();
        let gap = resolved.model.spectrum().spectral_gap();
        let mut times = Vec::new();
        for _ in 0..50 {
            let a: f64 = rng.random_range(0.0..20.0 / gap);
            let b: f64 = rng.random_range(0.0..20.0 / gap);
            times.push(a.min(b));
            times.push(a.max(b));
        }
        let d = resolved.model.distances(&times, TimeConvention::Continuous).unwrap();
        violations += d.chunks(2).filter(|p| p[0] < p[1] - 1e-10).count();
    }
    let mut lump_err: f64 = 0.0;
    for n in 1..=10 {
        let full = decompose(&build_hypercube_lazy(n).unwrap()).unwrap();
        let weight = build_hypercube_weight_chain(n).unwrap();
        for t in [0.0, 0.5, 1.0, 5.0, 10.0, 3.0 * n as f64] {
            let a = d_continuous(&full, 0, t).unwrap();
            let b = d_weighted_birth_death(&weight, t).unwrap();
            lump_err = lump_err.max((a - b).abs());
        }
    }
    let pass = violations == 0 && lump_err <= 1e-10;
    report(7, pass, &format!("{violations} monotonicity violations; lumping error {lump_err:e}"));
    assert!(pass);
}

fn cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_cutofflab")).args(args).output().unwrap();
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn criterion_8_cli_determinism_and_equivalence() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--chain", "random-transpositions", "--n", "4"],
        vec!["profile", "--closed-form", "poisson-shuffle", "--c-min", "-2", "--c-max", "3", "--c-count", "101"],
        vec!["condition", "--family", "hypercube-analytic", "--id", "cond4", "--n", "50,100,200", "--c-min", "-1",
             "--c-max", "3", "--c-count", "41"],
        vec!["bound-check", "--chain", "bernoulli-laplace", "--n", "40", "--k", "20", "--trials", "100", "--seed", "7"],
        vec!["profile", "--family", "hypercube", "--n", "64", "--c-min", "-1", "--c-max", "2", "--c-count", "13"],
    ];
    let mut deterministic = true;
    let mut outputs = Vec::new();
    for args in &commands {
        let (a, code_a) = cli(args);
        let (b, code_b) = cli(args);
        deterministic &= a == b && code_a == 0 && code_b == 0;
        outputs.push(String::from_utf8(a).unwrap());
    }

    // 20 cells checked bit-for-bit against the library
    let mut mismatches = Vec::new();
    let mut check = |what: &str, cell: &str, want: f64| {
        let got = parse_cell(cell).unwrap();
        if got.to_bits() != want.to_bits() || cell != fmt_f64(want) {
            mismatches.push(format!("{what}: cli {cell} vs library {}", fmt_f64(want)));
        }
    };
    let spectrum = data_rows(&outputs[0]);
    let rows = decompose(&build_random_transpositions_4()).unwrap().spectrum_rows(0).unwrap();
    for i in [0, 5, 11, 23] {
        check("spectrum eigenvalue", &spectrum[i][1], rows[i].eigenvalue);
        check("spectrum weight", &spectrum[i][2], rows[i].weight_at_start);
    }
    let profile = data_rows(&outputs[1]);
    for j in [0, 37, 60, 100] {
        let c = parse_cell(&profile[j][0]).unwrap();
        check("poisson profile", &profile[j][1], profile_poisson_shuffle(c));
    }
    let condition = data_rows(&outputs[2]);
    let grid = cutofflab::cli::linspace(-1.0, 3.0, 41).unwrap();
    let fam = ChainFamily::new(FamilyKind::HypercubeAnalytic);
    let rep = limsup_report(&fam, None, ConditionId::Cond4, &[50, 100, 200], &grid, 3, None).unwrap();
    for (r, j) in [(0usize, 0usize), (1, 10), (2, 40), (3, 20)] {
        let want = if r < 3 { rep.values[r][j] } else { rep.limsup_estimate[j] };
        check("condition cell", &condition[r][j + 1], want);
    }
    let curve_rows = data_rows(&outputs[4]);
    let curve = empirical_profile(
        &ChainFamily::new(FamilyKind::Hypercube),
        64,
        None,
        &cutofflab::cli::linspace(-1.0, 2.0, 13).unwrap(),
        None,
    )
    .unwrap();
    for j in [0, 6, 12, 3] {
        check("hypercube curve", &curve_rows[j][1], curve.values[j]);
    }
    let bound = &outputs[3];
    let all_hold = bound.lines().last() == Some("all_hold=true");
    let pass = deterministic && mismatches.is_empty() && all_hold;
    report(
        8,
        pass,
        &format!("byte-identical reruns: {deterministic}; 20 cells, {} mismatches; bound-check all_hold: {all_hold}", mismatches.len()),
    );
    assert!(pass, "{mismatches:#?}");
}

fn build_random_transpositions_4() -> cutofflab::chain::ReversibleChain {
    cutofflab::chain::build_random_transpositions(4).unwrap()
}

#[test]
fn criterion_9_random_to_random_pole() {
    let values: Vec<f64> = [1.01, 1.1, 2.0].iter().map(|&c| g_random_to_random(c).unwrap()).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]) && values.iter().all(|v| v.is_finite());
    let domain = [1.0, 0.5].iter().all(|&c| matches!(g_random_to_random(c), Err(Error::Domain(_))));
    let pass = decreasing && domain;
    report(9, pass, &format!("values {values:?}; domain errors at 1 and 0.5: {domain}"));
    assert!(pass);
}

#[test]
fn lumped_hypercube_source_matches_full_chain() {
    // the hypercube source at n = 14 goes through the lumped chain; check it
    // against the full chain at a size where the latter is cheap
    let args = source(ChainSource::Hypercube, 8, false);
    let resolved = resolve_chain(&args).unwrap();
    let full = Arc::new(decompose(&build_hypercube_lazy(8).unwrap()).unwrap());
    let times = [0.0, 3.0, 8.0, 20.0];
    let a = resolved.model.distances(&times, TimeConvention::Continuous).unwrap();
    for (t, d) in times.iter().zip(a) {
        assert!((d - d_continuous(&full, 0, *t).unwrap()).abs() < 1e-12);
    }
}
