//! Time integration of `dω = s·b_N(ω) dt + Σ_k G_N^k(ω) ∘ dW^k`.
//!
//! One step is a Strang splitting: half a drift step (classical RK4 with
//! substeps sized to the local drift rate, then rescaled to the norm it
//! started with), the exact orthogonal maps
//! `exp(ΔW_k A_k)` in noise-mode order, and another half drift step.

use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::Gamma;
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinSystem, SpectralField};
use crate::lattice::{ModeSet, WaveVector};
use crate::rng::{stream, Purpose, Stream};
use crate::scalar::{Real, Ring};

/// Which noise modes drive the flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSet {
    /// `{|k| <= N}`.
    Ball,
    /// `Γ_N = {|k| <= θN}`.
    Gamma { theta: f64 },
    Explicit(Vec<WaveVector>),
}

impl NoiseSet {
    pub fn modes(&self, n: i64) -> Result<ModeSet> {
        match self {
            NoiseSet::Ball => ModeSet::ball_modes(n as f64),
            NoiseSet::Gamma { theta } => ModeSet::gamma_modes(n, *theta),
            NoiseSet::Explicit(v) => ModeSet::explicit(v.iter().copied()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub n: i64,
    pub gamma: Gamma,
    pub noise: NoiseSet,
    pub t_end: f64,
    pub steps: usize,
    pub drift_on: bool,
    /// `+1` for the flow with `+b_N`, `-1` for the reversed drift.
    pub drift_sign: f64,
    /// Apply the noise maps forward with `ΔW/2` then backward with `ΔW/2`.
    pub symmetric_noise: bool,
    /// Minimum RK4 substeps per half drift step; more are taken when the
    /// local drift rate demands it.
    pub drift_substeps: usize,
    pub seed: u64,
}

impl FlowConfig {
    pub fn new(n: i64, gamma: Gamma, t_end: f64, steps: usize, seed: u64) -> Self {
        FlowConfig {
            n,
            gamma,
            noise: NoiseSet::Ball,
            t_end,
            steps,
            drift_on: true,
            drift_sign: 1.0,
            symmetric_noise: false,
            drift_substeps: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        if self.steps < 1 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::invalid("t_end", "must be positive and finite"));
        }
        if self.drift_sign != 1.0 && self.drift_sign != -1.0 {
            return Err(Error::invalid("drift_sign", "must be +1 or -1"));
        }
        if self.drift_substeps < 1 {
            return Err(Error::invalid("drift_substeps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn max_relative_norm_deviation(&self) -> f64 {
        let n0 = Ring::to_f64(&self.states[0].norm());
        if n0 == 0.0 {
            return self
                .states
                .iter()
                .map(|s| Ring::to_f64(&s.norm()))
                .fold(0.0, f64::max);
        }
        self.states
            .iter()
            .map(|s| ((Ring::to_f64(&s.norm()) - n0) / n0).abs())
            .fold(0.0, f64::max)
    }
}

/// Scratch buffers reused across steps.
#[derive(Clone, Debug, Default)]
pub struct Workspace<T> {
    k1: Vec<Complex<T>>,
    k2: Vec<Complex<T>>,
    k3: Vec<Complex<T>>,
    k4: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
    chain: Vec<Complex<T>>,
    incs: Vec<T>,
}

/// A configured flow.
#[derive(Clone, Debug)]
pub struct Flow<T> {
    sys: Arc<GalerkinSystem<T>>,
    cfg: FlowConfig,
}

/// Upper bound on `h·|b(z)|/|z|` for one RK4 substep.
const DRIFT_STEP_RATIO: f64 = 0.1;

fn norm_sqr<T: Real>(z: &[Complex<T>]) -> T {
    z.iter().map(|c| c.re * c.re + c.im * c.im).sum()
}

impl<T: Real> Flow<T> {
    pub fn new(cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let noise = cfg.noise.modes(cfg.n)?;
        let sys = Arc::new(GalerkinSystem::new(cfg.n, cfg.gamma, noise)?);
        Ok(Flow { sys, cfg })
    }

    pub fn with_system(sys: Arc<GalerkinSystem<T>>, cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        if sys.n() != cfg.n || sys.gamma() != cfg.gamma {
            return Err(Error::invalid("system", "does not match the flow configuration"));
        }
        Ok(Flow { sys, cfg })
    }

    pub fn system(&self) -> &Arc<GalerkinSystem<T>> {
        &self.sys
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        self.sys.modes()
    }

    pub fn noise_count(&self) -> usize {
        self.sys.noise_modes().len()
    }

    fn drift_half(&self, z: &mut [Complex<T>], h: T, ws: &mut Workspace<T>) {
        let dim = z.len();
        let zero = Complex::new(T::zero(), T::zero());
        for buf in [&mut ws.k1, &mut ws.k2, &mut ws.k3, &mut ws.k4, &mut ws.tmp] {
            buf.resize(dim, zero);
        }
        let target = norm_sqr(z).sqrt();
        if target == T::zero() {
            return;
        }
        // The drift is quadratic, so its Jacobian scales like |b(z)|/|z|;
        // substeps keep h·|b(z)|/|z| below DRIFT_STEP_RATIO.
        self.sys.drift_complex(z, &mut ws.k1);
        let rate = Ring::to_f64(&(norm_sqr(&ws.k1).sqrt() / target));
        let h_abs = Ring::to_f64(&h).abs();
        let needed = (h_abs * rate / DRIFT_STEP_RATIO).ceil() as usize;
        let sub = self.cfg.drift_substeps.max(needed).max(1);
        let h = h * T::of(self.cfg.drift_sign) / T::of(sub as f64);
        let half = h / T::of(2.0);
        let sixth = h / T::of(6.0);
        let two = T::of(2.0);
        for s in 0..sub {
            if s > 0 {
                self.sys.drift_complex(z, &mut ws.k1);
            }
            for i in 0..dim {
                ws.tmp[i] = z[i] + ws.k1[i] * half;
            }
            self.sys.drift_complex(&ws.tmp, &mut ws.k2);
            for i in 0..dim {
                ws.tmp[i] = z[i] + ws.k2[i] * half;
            }
            self.sys.drift_complex(&ws.tmp, &mut ws.k3);
            for i in 0..dim {
                ws.tmp[i] = z[i] + ws.k3[i] * h;
            }
            self.sys.drift_complex(&ws.tmp, &mut ws.k4);
            for i in 0..dim {
                z[i] = z[i] + (ws.k1[i] + ws.k2[i] * two + ws.k3[i] * two + ws.k4[i]) * sixth;
            }
        }
        let now = norm_sqr(z).sqrt();
        if now > T::zero() {
            let s = target / now;
            for c in z.iter_mut() {
                *c = *c * s;
            }
        }
    }

    fn noise_all(&self, z: &mut [Complex<T>], incs: &[T], ws: &mut Workspace<T>) {
        if self.cfg.symmetric_noise {
            let half = T::of(0.5);
            for (i, &dw) in incs.iter().enumerate() {
                self.sys.noise_exp_apply_index(i, dw * half, z, &mut ws.chain);
            }
            for (i, &dw) in incs.iter().enumerate().rev() {
                self.sys.noise_exp_apply_index(i, dw * half, z, &mut ws.chain);
            }
        } else {
            for (i, &dw) in incs.iter().enumerate() {
                self.sys.noise_exp_apply_index(i, dw, z, &mut ws.chain);
            }
        }
    }

    /// One step on complex coordinates.
    pub fn step_complex(&self, z: &mut [Complex<T>], dt: T, incs: &[T], ws: &mut Workspace<T>) {
        let half = dt / T::of(2.0);
        if self.cfg.drift_on {
            self.drift_half(z, half, ws);
        }
        self.noise_all(z, incs, ws);
        if self.cfg.drift_on {
            self.drift_half(z, half, ws);
        }
    }

    /// One step; `increments` are the Brownian increments in noise-mode order.
    pub fn step(&self, xi: &SpectralField<T>, dt: T, increments: &[T]) -> Result<SpectralField<T>> {
        if !(dt > T::zero()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if increments.len() != self.noise_count() {
            return Err(Error::Dimension {
                expected: self.noise_count(),
                got: increments.len(),
            });
        }
        if !xi.is_finite() || increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("step input".into()));
        }
        let mut z = xi.to_complex();
        let mut ws = Workspace::default();
        self.step_complex(&mut z, dt, increments, &mut ws);
        let out = SpectralField::from_complex(self.modes().clone(), &z)?;
        if !out.is_finite() {
            return Err(Error::NonFinite("step output".into()));
        }
        Ok(out)
    }

    fn draw_increments(&self, rng: &mut Stream, sqrt_dt: T, incs: &mut Vec<T>) {
        incs.clear();
        for _ in 0..self.noise_count() {
            let g: f64 = rng.sample(StandardNormal);
            incs.push(T::of(g) * sqrt_dt);
        }
    }

    /// Runs `steps` steps of size `dt` from `xi`, drawing increments from `rng`.
    pub fn advance(
        &self,
        xi: &SpectralField<T>,
        dt: f64,
        steps: usize,
        rng: &mut Stream,
    ) -> Result<SpectralField<T>> {
        let mut z = xi.to_complex();
        let mut ws = Workspace::default();
        let dt_t = T::of(dt);
        let sqrt_dt = T::of(dt.sqrt());
        let mut incs = std::mem::take(&mut ws.incs);
        for _ in 0..steps {
            self.draw_increments(rng, sqrt_dt, &mut incs);
            self.step_complex(&mut z, dt_t, &incs, &mut ws);
        }
        let out = SpectralField::from_complex(self.modes().clone(), &z)?;
        if !out.is_finite() {
            return Err(Error::NonFinite("trajectory state".into()));
        }
        Ok(out)
    }

    /// Stream used by trajectory `index` under this configuration.
    pub fn trajectory_stream(&self, index: u64) -> Stream {
        stream(self.cfg.seed, Purpose::BrownianIncrements, index)
    }

    /// Full path of trajectory 0.
    pub fn simulate(&self, xi0: &SpectralField<T>) -> Result<Trajectory<T>> {
        self.simulate_indexed(xi0, 0)
    }

    pub fn simulate_indexed(&self, xi0: &SpectralField<T>, index: u64) -> Result<Trajectory<T>> {
        if xi0.modes().as_ref() != self.modes().as_ref() {
            return Err(Error::Dimension {
                expected: self.modes().len(),
                got: xi0.len(),
            });
        }
        let mut rng = self.trajectory_stream(index);
        let dt = self.cfg.dt();
        let mut z = xi0.to_complex();
        let mut ws = Workspace::default();
        let mut incs = Vec::new();
        let sqrt_dt = T::of(dt.sqrt());
        let mut times = vec![0.0];
        let mut states = vec![xi0.clone()];
        for s in 0..self.cfg.steps {
            self.draw_increments(&mut rng, sqrt_dt, &mut incs);
            self.step_complex(&mut z, T::of(dt), &incs, &mut ws);
            let f = SpectralField::from_complex(self.modes().clone(), &z)?;
            if !f.is_finite() {
                return Err(Error::NonFinite(format!("state after step {}", s + 1)));
            }
            times.push(dt * (s + 1) as f64);
            states.push(f);
        }
        Ok(Trajectory { times, states })
    }

    /// Terminal state of trajectory `index` at `t_end`.
    pub fn terminal(&self, xi0: &SpectralField<T>, index: u64) -> Result<SpectralField<T>> {
        let mut rng = self.trajectory_stream(index);
        self.advance(xi0, self.cfg.dt(), self.cfg.steps, &mut rng)
    }

    /// Terminal states of `n_traj` trajectories; trajectory `i` starts at
    /// `sampler(i)` and uses stream `i`. Output order is by index.
    pub fn ensemble<F>(&self, sampler: F, n_traj: usize) -> Result<Vec<SpectralField<T>>>
    where
        F: Fn(u64) -> SpectralField<T> + Sync,
    {
        if n_traj < 1 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        (0..n_traj as u64)
            .into_par_iter()
            .map(|i| self.terminal(&sampler(i), i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_stays_zero() {
        let flow = Flow::<f64>::new(FlowConfig::new(2, Gamma::TWO, 0.1, 10, 1)).unwrap();
        let z = SpectralField::zeros(flow.modes().clone());
        let tr = flow.simulate(&z).unwrap();
        assert!(tr.states.iter().all(|s| s.norm() == 0.0));
    }

    #[test]
    fn identity_without_drift_and_increments() {
        let mut cfg = FlowConfig::new(2, Gamma::TWO, 0.1, 10, 1);
        cfg.drift_on = false;
        let flow = Flow::<f64>::new(cfg).unwrap();
        let xi = SpectralField::basis(flow.modes().clone(), WaveVector::new(1, 1)).unwrap();
        let zeros = vec![0.0; flow.noise_count()];
        let out = flow.step(&xi, 0.01, &zeros).unwrap();
        for (a, b) in out.coeffs().iter().zip(xi.coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
