use std::sync::Arc;

use proptest::prelude::*;

use cutofflab::chain::{
    build_bernoulli_laplace, build_hypercube_lazy, build_hypercube_weight_chain, build_random_to_random,
    build_random_transpositions, build_star_transpositions, make_lazy, ReversibleChain,
};
use cutofflab::conditions::{continuity_certificate, limsup_report, mvt_bound_check, ConditionId};
use cutofflab::distance::{d_continuous, empirical_profile, SpectralStart, TimeConvention};
use cutofflab::family::{ChainFamily, FamilyKind};
use cutofflab::profiles::{
    profile_bernoulli_laplace, profile_hypercube, profile_poisson_shuffle, profile_ramanujan,
};
use cutofflab::special::normal_cdf;
use cutofflab::spectral::{decompose, heat_kernel_row};

fn small_chain(which: u8, n: usize) -> ReversibleChain {
    match which % 6 {
        0 => build_hypercube_lazy(n.min(6)).unwrap(),
        1 => build_hypercube_weight_chain(n * 4).unwrap(),
        2 => build_bernoulli_laplace(2 * n + 2, n).unwrap(),
        3 => build_random_transpositions(n.clamp(2, 4)).unwrap(),
        4 => build_star_transpositions(n.clamp(2, 4)).unwrap(),
        _ => build_random_to_random(n.clamp(2, 4)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn builders_are_stochastic_and_reversible(which in 0u8..6, n in 1usize..6) {
        let chain = small_chain(which, n);
        let pi = chain.stationary();
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for x in 0..chain.size() {
            let row: f64 = (0..chain.size()).map(|y| chain.p(x, y)).sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
            for y in 0..chain.size() {
                prop_assert!(chain.p(x, y) >= 0.0);
                prop_assert!((pi[x] * chain.p(x, y) - pi[y] * chain.p(y, x)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tv_is_non_increasing(which in 0u8..6, n in 1usize..6, a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let dec = decompose(&small_chain(which, n)).unwrap();
        let x = dec.size() - 1;
        let (s, t) = (a.min(b), a.max(b));
        prop_assert!(d_continuous(&dec, x, t).unwrap() <= d_continuous(&dec, x, s).unwrap() + 1e-12);
    }

    #[test]
    fn heat_kernel_semigroup(which in 0u8..6, n in 1usize..5, s in 0.0f64..5.0, t in 0.0f64..5.0) {
        let dec = decompose(&small_chain(which, n)).unwrap();
        let size = dec.size();
        let direct = heat_kernel_row(&dec, 0, s + t).unwrap();
        let first = heat_kernel_row(&dec, 0, s).unwrap();
        let rows: Vec<Vec<f64>> = (0..size).map(|y| heat_kernel_row(&dec, y, t).unwrap()).collect();
        for z in 0..size {
            let composed: f64 = (0..size).map(|y| first[y] * rows[y][z]).sum();
            prop_assert!((composed - direct[z]).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_value_bound_holds(
        which in 0u8..6,
        n in 1usize..5,
        lazy in any::<bool>(),
        t_n in 0.5f64..20.0,
        w_n in 0.5f64..10.0,
        c1 in -0.04f64..3.0,
        dc in 1e-4f64..2.0,
    ) {
        let mut chain = small_chain(which, n);
        if lazy {
            chain = make_lazy(&chain);
        }
        let dec = Arc::new(decompose(&chain).unwrap());
        let model = SpectralStart::new(dec.clone(), dec.size() - 1).unwrap();
        let c1 = c1.max(-t_n / w_n * 0.99);
        let check = mvt_bound_check(&model, t_n, w_n, c1, c1 + dc, TimeConvention::Continuous).unwrap();
        prop_assert!(check.holds, "continuous lhs={} rhs={}", check.lhs, check.rhs);
        if dec.has_nonnegative_spectrum() {
            let check = mvt_bound_check(&model, t_n, w_n, c1, c1 + dc, TimeConvention::Discrete).unwrap();
            prop_assert!(check.holds, "discrete lhs={} rhs={}", check.lhs, check.rhs);
        }
    }

    #[test]
    fn normal_cdf_is_symmetric(z in -30.0f64..30.0) {
        prop_assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_are_monotone(a in -12.0f64..12.0, b in -12.0f64..12.0, d in 3u32..20) {
        let (lo, hi) = (a.min(b), a.max(b));
        let fs: [&dyn Fn(f64) -> f64; 4] = [
            &profile_hypercube,
            &profile_poisson_shuffle,
            &profile_bernoulli_laplace,
            &|c| profile_ramanujan(c, d).unwrap(),
        ];
        for f in fs {
            let (u, v) = (f(lo), f(hi));
            prop_assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v));
            prop_assert!(v <= u);
        }
    }

    #[test]
    fn poisson_profile_matches_long_direct_sum(c in -3.0f64..8.0) {
        let mu = 1.0 + (-c).exp();
        let (mut p, mut q, mut sum) = ((-1.0f64).exp(), (-mu).exp(), 0.0);
        for k in 0..200u32 {
            if k > 0 {
                p /= f64::from(k);
                q *= mu / f64::from(k);
            }
            sum += (p - q).abs();
        }
        prop_assert!((profile_poisson_shuffle(c) - 0.5 * sum).abs() < 1e-12);
    }
}

#[test]
fn certificate_dominates_empirical_differences() {
    let family = ChainFamily::new(FamilyKind::Hypercube);
    let grid: Vec<f64> = (0..13).map(|i| -1.0 + 0.25 * f64::from(i)).collect();
    let report = limsup_report(&family, None, ConditionId::Cond, &[64, 128, 256], &grid, 3, None).unwrap();
    let curve = empirical_profile(&family, 256, None, &grid, Some(TimeConvention::Continuous)).unwrap();
    for i in 0..grid.len() {
        for j in i..grid.len() {
            let bound = continuity_certificate(&report, grid[i], grid[j]).unwrap();
            let diff = (curve.values[i] - curve.values[j]).abs();
            assert!(diff <= bound + 1e-12, "c1={} c2={} diff={diff} bound={bound}", grid[i], grid[j]);
        }
    }
}

#[test]
fn closed_forms_on_dense_grid() {
    let grid: Vec<f64> = (0..200).map(|i| -4.0 + 8.0 * f64::from(i) / 199.0).collect();
    for f in [profile_hypercube, profile_poisson_shuffle, profile_bernoulli_laplace] {
        let v: Vec<f64> = grid.iter().map(|&c| f(c)).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }
}
