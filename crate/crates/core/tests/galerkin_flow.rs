use std::f64::consts::PI;
use std::sync::Arc;

use euler_chaos::flow::{Flow, FlowConfig, NoiseSet};
use euler_chaos::galerkin::{GalerkinSystem, SpectralField};
use euler_chaos::gaussian::sample_white_noise;
use euler_chaos::rng::{stream, Purpose};
use euler_chaos::trig::{basis_eval, complex_to_real};
use euler_chaos::{Gamma, ModeSet, WaveVector};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn white(modes: &Arc<ModeSet>, seed: u64) -> SpectralField<f64> {
    let mut rng = stream(seed, Purpose::Custom(40), 0);
    sample_white_noise(modes, &mut rng)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Values of `ω`, `∇ω` and the velocity at `x`, summed straight from the
/// real basis: `∇e_k = 2πk e_{−k}` and `u = Σ x_k 2π k^⊥/|k|² e_{−k}`.
fn pointwise(xi: &SpectralField<f64>, x: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let mut grad = [0.0; 2];
    let mut u = [0.0; 2];
    for (k, &c) in xi.modes().iter().zip(xi.coeffs()) {
        let em = basis_eval(-k, x).unwrap();
        let p = k.perp();
        let n2 = k.norm2() as f64;
        grad[0] += c * 2.0 * PI * k.k1 as f64 * em;
        grad[1] += c * 2.0 * PI * k.k2 as f64 * em;
        u[0] += c * 2.0 * PI * p.k1 as f64 / n2 * em;
        u[1] += c * 2.0 * PI * p.k2 as f64 / n2 * em;
    }
    (grad, u)
}

/// `∫ f e_l` for every `l` of `modes` by an `m × m` trapezoid rule.
fn project_on_grid(modes: &ModeSet, m: usize, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; modes.len()];
    for i in 0..m {
        for j in 0..m {
            let x = [i as f64 / m as f64, j as f64 / m as f64];
            let v = f(x);
            for (o, l) in out.iter_mut().zip(modes.iter()) {
                *o += v * basis_eval(l, x).unwrap();
            }
        }
    }
    out.iter().map(|v| v / (m * m) as f64).collect()
}

#[test]
fn drift_matches_grid_transport_term() {
    for n in [2i64, 3] {
        let sys = GalerkinSystem::<f64>::with_ball_noise(n, Gamma::TWO).unwrap();
        let xi = white(sys.modes(), n as u64);
        let m = (3 * n + 2) as usize;
        // The drift is b_N(ξ) = Π_N(u(ξ)·∇ξ); the flow runs with +b_N.
        let oracle = project_on_grid(sys.modes(), m, |x| {
            let (g, u) = pointwise(&xi, x);
            u[0] * g[0] + u[1] * g[1]
        });
        let b = sys.drift(&xi).unwrap();
        let scale = oracle.iter().map(|v| v.abs()).fold(1.0, f64::max);
        assert!(max_diff(b.coeffs(), &oracle) < 1e-12 * scale, "N={n}");
    }
}

#[test]
fn velocity_matches_real_form() {
    let sys = GalerkinSystem::<f64>::with_ball_noise(3, Gamma::TWO).unwrap();
    let xi = white(sys.modes(), 9);
    let v = sys.velocity(&xi).unwrap();
    for comp in 0..2 {
        let z: Vec<_> = v.iter().map(|c| c[comp]).collect();
        let real = complex_to_real(sys.modes(), &z).unwrap();
        let oracle = project_on_grid(sys.modes(), 8, |x| pointwise(&xi, x).1[comp]);
        assert!(max_diff(&real, &oracle) < 1e-12);
    }
}

#[test]
fn noise_generator_matches_grid_transport() {
    // σ_k = k^⊥ e_k / (√2 |k|^γ).
    let gamma = Gamma::new(2.5).unwrap();
    let sys = GalerkinSystem::<f64>::new(3, gamma, ModeSet::box_modes(2).unwrap()).unwrap();
    let xi = white(sys.modes(), 4);
    for k in [WaveVector::new(1, 0), WaveVector::new(-1, 2), WaveVector::new(2, -2)] {
        let a = sys.noise_generator(k).unwrap();
        let w = (k.norm2() as f64).powf(-gamma.value() / 2.0) / 2f64.sqrt();
        let oracle = project_on_grid(sys.modes(), 12, |x| {
            let (g, _) = pointwise(&xi, x);
            let p = k.perp();
            let ek = basis_eval(k, x).unwrap();
            w * ek * (p.k1 as f64 * g[0] + p.k2 as f64 * g[1])
        });
        assert!(max_diff(&a.apply(xi.coeffs()), &oracle) < 1e-12, "{k}");
        assert_eq!(a.skew_defect(), 0.0);
        assert_eq!(a.trace(), 0.0);
    }
}

#[test]
fn chain_exponential_matches_dense_matrix_exponential() {
    let sys = GalerkinSystem::<f64>::with_ball_noise(3, Gamma::TWO).unwrap();
    let xi = white(sys.modes(), 2);
    let d = sys.dim();
    for k in [WaveVector::new(1, 1), WaveVector::new(0, -2), WaveVector::new(-3, 0)] {
        let a = sys.noise_generator(k).unwrap();
        let s = 0.7;
        let mat = DMatrix::from_row_slice(d, d, &a.matrix) * s;
        let dense = mat.exp() * nalgebra::DVector::from_column_slice(xi.coeffs());
        let chain = sys.noise_exp_apply(k, s, &xi).unwrap();
        assert!(max_diff(chain.coeffs(), dense.as_slice()) < 1e-12, "{k}");
    }
}

#[test]
fn composed_single_mode_steps_equal_one_exponential() {
    // With drift off and a single active mode, the scheme is exact:
    // the product of the steps is exp(A_k W_T).
    let mut cfg = FlowConfig::new(3, Gamma::TWO, 1.0, 50, 5);
    cfg.drift_on = false;
    let flow = Flow::<f64>::new(cfg).unwrap();
    let k = WaveVector::new(1, -1);
    let idx = flow.system().noise_modes().index_of(k).unwrap();
    let mut rng = stream(5, Purpose::Custom(41), 0);
    let x0 = white(flow.modes(), 6);
    let mut x = x0.clone();
    let mut w = 0.0;
    for _ in 0..50 {
        let mut incs = vec![0.0; flow.noise_count()];
        incs[idx] = rng.random_range(-0.3..0.3);
        w += incs[idx];
        x = flow.step(&x, 0.02, &incs).unwrap();
    }
    let direct = flow.system().noise_exp_apply(k, w, &x0).unwrap();
    assert!(max_diff(x.coeffs(), direct.coeffs()) < 1e-12);
}

#[test]
fn reversed_drift_retraces_the_path() {
    // The truncated Euler flow is chaotic, so RK4 errors grow quickly;
    // fine substeps keep the round trip tight.
    let mut fwd = FlowConfig::new(3, Gamma::TWO, 0.1, 100, 1);
    fwd.noise = NoiseSet::Gamma { theta: 0.4 };
    fwd.drift_substeps = 16;
    let mut back = fwd.clone();
    back.drift_sign = -1.0;
    let f = Flow::<f64>::new(fwd).unwrap();
    let b = Flow::<f64>::new(back).unwrap();
    let zeros = vec![0.0; f.noise_count()];
    let x0 = white(f.modes(), 3);
    let mut x = x0.clone();
    for _ in 0..100 {
        x = f.step(&x, 1e-3, &zeros).unwrap();
    }
    let fwd_dev = max_diff(x.coeffs(), x0.coeffs());
    assert!(fwd_dev > 1e-3, "{fwd_dev:e}");
    for _ in 0..100 {
        x = b.step(&x, 1e-3, &zeros).unwrap();
    }
    let dev = max_diff(x.coeffs(), x0.coeffs());
    assert!(dev < 1e-8, "{dev:e}");
}

#[test]
fn drift_integrator_is_fourth_order() {
    // Self-convergence: halving the RK4 substep cuts the error about 16×.
    let run = |sub: usize| {
        let mut cfg = FlowConfig::new(2, Gamma::TWO, 0.05, 10, 1);
        cfg.noise = NoiseSet::Gamma { theta: 0.45 };
        cfg.drift_substeps = sub;
        let f = Flow::<f64>::new(cfg).unwrap();
        let zeros = vec![0.0; f.noise_count()];
        let mut x = white(f.modes(), 12);
        for _ in 0..10 {
            x = f.step(&x, 5e-3, &zeros).unwrap();
        }
        x
    };
    let reference = run(128);
    // Minimum substep counts above what the rate rule picks on its own.
    let e1 = max_diff(run(4).coeffs(), reference.coeffs());
    let e2 = max_diff(run(8).coeffs(), reference.coeffs());
    assert!(e1 > 0.0 && e1 / e2 > 10.0, "{e1:e} {e2:e}");
    assert!((run(1).norm() - white(reference.modes(), 12).norm()).abs() < 1e-12 * reference.norm());
}

#[test]
fn gaussian_divergence_of_vector_fields_vanishes() {
    let sys = GalerkinSystem::<f64>::with_ball_noise(2, Gamma::TWO).unwrap();
    let xi = white(sys.modes(), 8);
    let d = sys.gaussian_divergence(|x| sys.drift(x).unwrap(), &xi, 1e-4);
    assert!(d.abs() < 1e-6, "{d}");
    let a = sys.noise_generator(WaveVector::new(1, 1)).unwrap();
    let modes = sys.modes().clone();
    let d = sys.gaussian_divergence(
        |x| SpectralField::new(modes.clone(), a.apply(x.coeffs())).unwrap(),
        &xi,
        1e-4,
    );
    assert!(d.abs() < 1e-8, "{d}");
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let flow = Flow::<f64>::new(FlowConfig::new(3, Gamma::TWO, 0.05, 10, 17)).unwrap();
    let modes = flow.modes().clone();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| flow.ensemble(|i| white(&modes, 100 + i), 12).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
}

#[test]
fn flows_reject_bad_configurations() {
    let mut cfg = FlowConfig::new(3, Gamma::TWO, 1.0, 10, 0);
    cfg.drift_sign = 0.5;
    assert!(Flow::<f64>::new(cfg).is_err());
    assert!(Flow::<f64>::new(FlowConfig::new(3, Gamma::TWO, 0.0, 10, 0)).is_err());
    assert!(Flow::<f64>::new(FlowConfig::new(3, Gamma::TWO, 1.0, 0, 0)).is_err());
    let flow = Flow::<f64>::new(FlowConfig::new(2, Gamma::TWO, 1.0, 10, 0)).unwrap();
    let x = white(flow.modes(), 0);
    assert!(flow.step(&x, 0.1, &[0.0]).is_err());
    assert!(flow.step(&x, -0.1, &vec![0.0; flow.noise_count()]).is_err());
    assert!(GalerkinSystem::<f64>::new(2, Gamma::TWO, ModeSet::box_modes(3).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn drift_is_energy_orthogonal_and_noise_is_isometric(seed in any::<u64>(), n in 1i64..5, s in -2.0f64..2.0) {
        let sys = GalerkinSystem::<f64>::with_ball_noise(n, Gamma::TWO).unwrap();
        let xi = white(sys.modes(), seed);
        let b = sys.drift(&xi).unwrap();
        prop_assert!(b.dot(&xi).abs() < 1e-10 * (1.0 + b.norm() * xi.norm()));
        let k = sys.noise_modes().modes()[(seed % sys.noise_modes().len() as u64) as usize];
        let y = sys.noise_exp_apply(k, s, &xi).unwrap();
        prop_assert!((y.norm() - xi.norm()).abs() < 1e-12 * xi.norm());
        let back = sys.noise_exp_apply(k, -s, &y).unwrap();
        prop_assert!(max_diff(back.coeffs(), xi.coeffs()) < 1e-13 * (1.0 + xi.norm()));
    }

    #[test]
    fn trajectories_conserve_the_norm(seed in any::<u64>()) {
        let flow = Flow::<f64>::new(FlowConfig::new(3, Gamma::TWO, 0.2, 40, seed)).unwrap();
        let x0 = white(flow.modes(), seed);
        let tr = flow.simulate(&x0).unwrap();
        prop_assert!(tr.max_relative_norm_deviation() < 1e-12);
        prop_assert_eq!(tr.states.len(), 41);
    }
}
