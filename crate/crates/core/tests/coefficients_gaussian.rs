use std::sync::Arc;

use euler_chaos::coefficients::{
    a_n, a_n_exact, beta_n, beta_n_exact, c_kl, c_squared_sum, d_kl, CoefficientTable,
};
use euler_chaos::gaussian::{
    mc_estimate, mc_estimate_multi, pair_partitions, sample_white_noise, wick_moment, Moments,
};
use euler_chaos::rng::{stream, Purpose};
use euler_chaos::trig::TrigExpansion;
use euler_chaos::{Exact, Gamma, ModeSet, Ring, WaveVector};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

fn nonzero_vector(r: i64) -> impl Strategy<Value = WaveVector> {
    (-r..=r, -r..=r)
        .prop_filter("nonzero", |&(a, b)| a != 0 || b != 0)
        .prop_map(|(a, b)| WaveVector::new(a, b))
}

fn gamma_strategy() -> impl Strategy<Value = Gamma> {
    prop_oneof![Just(2.0), Just(3.0), 2.0f64..4.0].prop_map(|g| Gamma::new(g).unwrap())
}

proptest! {
    #[test]
    fn c_is_odd_in_k_and_vanishes_on_parallel_pairs(k in nonzero_vector(20), l in nonzero_vector(20), g in gamma_strategy()) {
        let c: f64 = c_kl(k, l, g).unwrap();
        let cm: f64 = c_kl(-k, l, g).unwrap();
        prop_assert_eq!(c, -cm);
        prop_assert_eq!(c_kl::<f64>(k, k.scale(3), g).unwrap(), 0.0);
        // C² + D² = |l|²/|k|^{2(γ−1)}.
        let d: f64 = d_kl(k, l, g).unwrap();
        let target = l.norm2() as f64 * (k.norm2() as f64).powf(1.0 - g.value());
        prop_assert!((c * c + d * d - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn c_squared_identity_exact_at_even_gamma(n in 1i64..12, l in nonzero_vector(5), half_g in 1i64..=2) {
        // Odd γ makes C_{k,l} itself irrational.
        let gamma = Gamma::new(2.0 * half_g as f64).unwrap();
        let mut sum = Exact::zero();
        for k in ModeSet::ball_modes(n as f64).unwrap().iter() {
            let c: Exact = c_kl(k, l, gamma).unwrap();
            sum = sum + c.clone() * c;
        }
        let target = a_n_exact(n, gamma).unwrap() * Exact::rational(l.norm2(), 2);
        prop_assert_eq!(sum, target);
    }

    #[test]
    fn c_squared_sum_depends_only_on_norm(n in 1i64..20, l in nonzero_vector(6), g in gamma_strategy()) {
        let a: f64 = c_squared_sum(n, l, g).unwrap();
        let b: f64 = c_squared_sum(n, l.rotate(), g).unwrap();
        let half = 0.5 * a_n::<f64>(n, g).unwrap() * l.norm2() as f64;
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!((a - half).abs() <= 1e-12 * half);
    }

    #[test]
    fn exact_and_float_sums_agree(n in 1i64..40) {
        let e = a_n_exact(n, Gamma::TWO).unwrap().to_f64();
        let f: f64 = a_n(n, Gamma::TWO).unwrap();
        prop_assert!((e - f).abs() <= 1e-13 * e);
        let be = beta_n_exact(n, 1.0 / 3.0).unwrap().to_f64();
        let bf: f64 = beta_n(n, 1.0 / 3.0).unwrap();
        prop_assert!((be - bf).abs() <= 1e-13 * be.max(1.0));
    }
}

#[test]
fn coefficient_spot_values() {
    let one: Exact = c_kl(WaveVector::new(1, 2), WaveVector::new(3, 1), Gamma::TWO).unwrap();
    assert_eq!(one, Exact::one());
    assert_eq!(a_n_exact(1, Gamma::TWO).unwrap(), Exact::from_int(4));
    assert_eq!(a_n_exact(2, Gamma::TWO).unwrap(), Exact::from_int(7));
    assert_eq!(a_n_exact(2, Gamma::new(3.0).unwrap()).unwrap(), Exact::rational(21, 4));
    assert_eq!(beta_n_exact(3, 1.0 / 3.0).unwrap(), Exact::from_int(4));
    assert_eq!(beta_n_exact(6, 1.0 / 3.0).unwrap(), Exact::from_int(7));
    assert_eq!(c_squared_sum::<f64>(1, WaveVector::new(0, 1), Gamma::TWO).unwrap(), 2.0);
    assert!(a_n_exact(2, Gamma::new(2.5).unwrap()).is_err());
    assert!(Gamma::new(1.5).is_err());
    assert!(c_kl::<f64>(WaveVector::ZERO, WaveVector::new(1, 0), Gamma::TWO).is_err());
    assert!(beta_n::<f64>(4, 0.5).is_err());
}

#[test]
fn table_matches_direct_evaluation_across_threads() {
    let ks: Vec<WaveVector> = ModeSet::box_modes(3).unwrap().iter().collect();
    let ls: Vec<WaveVector> = ModeSet::box_modes(2).unwrap().iter().collect();
    let table = CoefficientTable::<f64>::build(Gamma::TWO, ks.iter().copied(), &ls).unwrap();
    let table = Arc::new(table);
    std::thread::scope(|s| {
        for chunk in ks.chunks(12) {
            let table = table.clone();
            let ls = &ls;
            s.spawn(move || {
                for &k in chunk {
                    for &l in ls {
                        assert_eq!(table.get(k, l).unwrap(), c_kl::<f64>(k, l, Gamma::TWO).unwrap());
                    }
                }
            });
        }
    });
    // Pairs outside the cache fall back to direct evaluation.
    let far = WaveVector::new(7, 1);
    assert_eq!(table.get(far, far).unwrap(), 0.0);
}

#[test]
fn pair_partition_counts_are_double_factorials() {
    for (n, count) in [(2, 1), (4, 3), (6, 15), (8, 105)] {
        let parts = pair_partitions(n);
        assert_eq!(parts.len(), count);
        for p in &parts {
            let mut seen: Vec<usize> = p.iter().flat_map(|&(a, b)| [a, b]).collect();
            seen.sort();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
    }
}

fn linear(terms: &[(WaveVector, f64)]) -> TrigExpansion<f64> {
    let mut f = TrigExpansion::zero();
    for &(k, c) in terms {
        f.add_term(k, c);
    }
    f
}

#[test]
fn wick_moments_match_monte_carlo() {
    let modes = Arc::new(ModeSet::box_modes(2).unwrap());
    let w = WaveVector::new;
    let fs = [
        linear(&[(w(1, 0), 1.0), (w(0, 1), -0.5)]),
        linear(&[(w(1, 0), 0.3), (w(2, -1), 1.2)]),
        linear(&[(w(0, 1), 0.8), (w(2, -1), -0.4), (w(-1, -1), 0.6)]),
        linear(&[(w(1, 0), -0.7), (w(-1, -1), 1.0)]),
    ];
    let pair = |f: &TrigExpansion<f64>, xi: &euler_chaos::Field64| -> f64 {
        f.terms.iter().map(|(k, c)| c * xi.get(*k).unwrap()).sum()
    };
    let cases: Vec<Vec<usize>> = vec![vec![0, 1], vec![0, 1, 2, 3], vec![0, 0, 1, 1], vec![2, 2, 2, 2], vec![0, 1, 2, 3, 0, 1]];
    for case in cases {
        let refs: Vec<&TrigExpansion<f64>> = case.iter().map(|&i| &fs[i]).collect();
        let exact = wick_moment(&refs).unwrap();
        let est = mc_estimate::<f64, _>(
            &modes,
            |xi| refs.iter().map(|f| pair(f, xi)).product(),
            100_000,
            11,
        )
        .unwrap();
        assert!(est.z_score(exact) < 4.0, "{case:?}: {exact} vs {est:?}");
        // Permuting the factors leaves the moment unchanged.
        let mut rev = refs.clone();
        rev.reverse();
        assert!((wick_moment(&rev).unwrap() - exact).abs() < 1e-12);
    }
    assert!(wick_moment(&[&fs[0], &fs[1], &fs[2]]).is_err());
    assert!(wick_moment::<f64>(&[]).is_err());
}

#[test]
fn white_noise_has_identity_covariance() {
    let modes = Arc::new(ModeSet::box_modes(1).unwrap());
    let d = modes.len();
    let est = mc_estimate_multi(50_000, 3, Purpose::MonteCarlo, d + d * d, |rng, out| {
        let xi = sample_white_noise::<f64>(&modes, rng);
        let c = xi.coeffs();
        for i in 0..d {
            out[i] = c[i];
            for j in 0..d {
                out[d + i * d + j] = c[i] * c[j];
            }
        }
    })
    .unwrap();
    for i in 0..d {
        assert!(est[i].z_score(0.0) < 4.5);
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!(est[d + i * d + j].z_score(target) < 4.5, "{i} {j}");
        }
    }
}

#[test]
fn merged_moments_equal_sequential_moments() {
    let mut rng = stream(1, Purpose::Custom(50), 0);
    let xs: Vec<f64> = (0..1000).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut whole = Moments::default();
    xs.iter().for_each(|&x| whole.push(x));
    let mut a = Moments::default();
    let mut b = Moments::default();
    xs[..377].iter().for_each(|&x| a.push(x));
    xs[377..].iter().for_each(|&x| b.push(x));
    a.merge(&b);
    let (e1, e2) = (whole.estimate(), a.estimate());
    assert_eq!(e1.n_samples, e2.n_samples);
    assert!((e1.mean - e2.mean).abs() < 1e-13);
    assert!((e1.stderr - e2.stderr).abs() < 1e-13);
}

#[test]
fn monte_carlo_is_reproducible_and_thread_independent() {
    let modes = Arc::new(ModeSet::box_modes(2).unwrap());
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimate::<f64, _>(&modes, |xi| xi.norm_sqr(), 10_000, 5).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(4));
    assert!(a.z_score(modes.len() as f64) < 4.0);
}
