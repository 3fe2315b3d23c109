use std::sync::Arc;

use euler_chaos::acceptance::{multi_indices, random_cylinder_function};
use euler_chaos::chaos::operator::{
    dirichlet_pairing, dirichlet_pairing_truncated, gradient_sum_variance, gradient_tail_closed_form,
    l0_apply, l0_decompose, pairing_factor,
};
use euler_chaos::chaos::{hermite_multi, MultiIndex, Poly};
use euler_chaos::coefficients::a_n_exact;
use euler_chaos::galerkin::GalerkinSystem;
use euler_chaos::gaussian::{mc_estimate, sample_white_noise};
use euler_chaos::rng::{stream, Purpose};
use euler_chaos::{Exact, Gamma, ModeSet, Ring, WaveVector};
use num_traits::Zero;
use proptest::prelude::*;

fn w(a: i64, b: i64) -> WaveVector {
    WaveVector::new(a, b)
}

fn random_poly(seed: u64, n: i64, terms: usize, degree: u32) -> Poly<Exact> {
    let mut rng = stream(seed, Purpose::Custom(60), 0);
    random_cylinder_function(&mut rng, &ModeSet::box_modes(n).unwrap(), terms, degree)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivatives_obey_the_product_rule(s1 in any::<u64>(), s2 in any::<u64>(), k in (-2i64..=2, -2i64..=2)) {
        let f = random_poly(s1, 2, 3, 3);
        let g = random_poly(s2, 2, 3, 2);
        let k = w(k.0, k.1);
        let lhs = (&f * &g).derivative(k);
        let rhs = &(&f.derivative(k) * &g) + &(&f * &g.derivative(k));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gaussian_integration_by_parts(seed in any::<u64>(), k in (-2i64..=2, -2i64..=2)) {
        prop_assume!(k != (0, 0));
        let k = w(k.0, k.1);
        let f = random_poly(seed, 2, 4, 4);
        let lhs = f.derivative(k).gaussian_expectation();
        let rhs = (&Poly::var(k) * &f).gaussian_expectation();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn transport_pairing_has_mean_zero(seed in any::<u64>(), k in (-3i64..=3, -3i64..=3)) {
        prop_assume!(k != (0, 0));
        let f = random_poly(seed, 2, 3, 3);
        let p = dirichlet_pairing(w(k.0, k.1), &f, Gamma::TWO).unwrap();
        prop_assert!(p.gaussian_expectation().is_zero());
    }

    #[test]
    fn generator_has_mean_zero_and_preserves_chaos(seed in 0u64..1000) {
        let all = multi_indices(&ModeSet::box_modes(1).unwrap(), 3).unwrap();
        let n = &all[seed as usize % all.len()];
        let h = n.hermite_poly::<Exact>().unwrap();
        let lh = l0_apply(&h, 6, 1.0 / 3.0, Gamma::TWO).unwrap();
        prop_assert!(lh.gaussian_expectation().is_zero());
        for m in multi_indices(&ModeSet::box_modes(2).unwrap(), 3).unwrap() {
            if m.order() != n.order() {
                let hm = m.hermite_poly::<Exact>().unwrap();
                prop_assert!(lh.gaussian_inner(&hm).is_zero(), "{:?} {:?}", n, m);
            }
        }
    }
}

#[test]
fn hermite_polynomials_are_orthogonal() {
    let idx = multi_indices(&ModeSet::box_modes(1).unwrap(), 3).unwrap();
    let polys: Vec<Poly<Exact>> = idx.iter().map(|n| n.hermite_poly().unwrap()).collect();
    for (i, a) in polys.iter().enumerate() {
        for (j, b) in polys.iter().enumerate() {
            let v = a.gaussian_inner(b);
            if i == j {
                assert_eq!(v, Exact::from_int(idx[i].factorial_norm() as i64));
            } else {
                assert!(v.is_zero(), "{:?} {:?}", idx[i], idx[j]);
            }
        }
    }
}

#[test]
fn hermite_values_match_polynomial_expansion() {
    let modes = Arc::new(ModeSet::box_modes(2).unwrap());
    let mut rng = stream(2, Purpose::Custom(61), 0);
    let n: MultiIndex = "1,0:2;0,1:1;1,-1:3".parse().unwrap();
    let h = n.hermite_poly::<f64>().unwrap();
    for _ in 0..20 {
        let xi = sample_white_noise::<f64>(&modes, &mut rng);
        let a = hermite_multi(&n, &xi).unwrap();
        assert!((a - h.evaluate(&xi)).abs() < 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn pairing_factor_matches_noise_generator() {
    // For ω in H_N and e_k e_{−l} inside Box(N), ⟨σ_k·∇ω, e_l⟩ is the l-th
    // coordinate of A_k ω.
    let sys = GalerkinSystem::<f64>::with_ball_noise(4, Gamma::TWO).unwrap();
    let mut rng = stream(3, Purpose::Custom(62), 0);
    let xi = sample_white_noise::<f64>(sys.modes(), &mut rng);
    for k in [w(1, 0), w(1, -1), w(-2, 1)] {
        let a = sys.noise_generator(k).unwrap().apply(xi.coeffs());
        for l in ModeSet::box_modes(2).unwrap().iter() {
            let p = pairing_factor::<f64>(k, l, Gamma::TWO).unwrap();
            let i = sys.modes().index_of(l).unwrap();
            assert!((p.evaluate(&xi) - a[i]).abs() < 1e-12, "{k} {l}");
        }
    }
}

#[test]
fn truncation_is_invisible_when_supports_fit() {
    for seed in 0..10 {
        let f = random_poly(seed, 2, 3, 3);
        for k in [w(1, 0), w(-1, 2), w(2, 2)] {
            let full = dirichlet_pairing(k, &f, Gamma::TWO).unwrap();
            let cut = dirichlet_pairing_truncated(k, &f, Gamma::TWO, 4).unwrap();
            assert_eq!(full, cut);
        }
    }
}

#[test]
fn pairing_mean_zero_by_monte_carlo() {
    let modes = Arc::new(ModeSet::box_modes(4).unwrap());
    let f = random_poly(7, 1, 3, 3);
    let p = dirichlet_pairing(w(1, 1), &f, Gamma::TWO).unwrap().to_f64();
    let est = mc_estimate::<f64, _>(&modes, |xi| p.evaluate(xi), 50_000, 4).unwrap();
    assert!(est.z_score(0.0) < 4.0, "{est:?}");
}

#[test]
fn gradient_variance_tail_has_closed_form() {
    let f = &Poly::var(w(1, 0)) * &Poly::var(w(0, 1));
    let (n0, n) = (4, 7);
    let diff = gradient_sum_variance(&f, n, Gamma::TWO).unwrap() - gradient_sum_variance(&f, n0, Gamma::TWO).unwrap();
    let a_diff = a_n_exact(n, Gamma::TWO).unwrap() - a_n_exact(n0, Gamma::TWO).unwrap();
    assert_eq!(diff, gradient_tail_closed_form(&f, a_diff));
}

#[test]
fn decomposition_is_exact_for_mixed_index() {
    let n: MultiIndex = "1,1:1;0,1:2".parse().unwrap();
    let h = n.hermite_poly::<Exact>().unwrap();
    let d = l0_decompose::<Exact>(&n, 6, 1.0 / 3.0, Gamma::TWO).unwrap();
    assert_eq!(d.reconstruct(), l0_apply(&h, 6, 1.0 / 3.0, Gamma::TWO).unwrap());
    // C_n = (π²/2)(2 + 2·1).
    assert_eq!(d.eigen_coefficient, Exact::pi() * Exact::pi() * Exact::from_int(2));
    // Γ_6 = Ball(2).
    assert_eq!(d.log_constant, Exact::from_int(7));
}

#[test]
fn malformed_multi_indices_are_rejected() {
    assert!("1,0".parse::<MultiIndex>().is_err());
    assert!("0,0:1".parse::<MultiIndex>().is_err());
    assert!("1,0:x".parse::<MultiIndex>().is_err());
}
