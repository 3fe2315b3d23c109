//! Monte Carlo solution of the Kolmogorov equation through
//! `ρ_t(ξ) = E[ρ_0(Φ_t(ξ))]`, its `L^p(μ_N)` bounds, chaos projections of
//! `ρ_t`, and the `γ = 2` triviality sweep.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{hermite_multi, MultiIndex, Poly};
use crate::coefficients::{a_radius, Gamma};
use crate::error::{Error, Result};
use crate::flow::{Flow, FlowConfig, NoiseSet};
use crate::galerkin::SpectralField;
use crate::gaussian::{sample_white_noise, McEstimate, Moments};
use crate::lattice::WaveVector;
use crate::rng::{derive_seed, stream, Purpose};
use crate::scalar::{Real, Ring};

/// Initial datum `ρ_0`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialDensity {
    Constant(f64),
    /// `H_n`.
    Hermite(MultiIndex),
    /// `Σ_j c_j |ξ|^{2j}`.
    NormPoly(Vec<f64>),
    Poly(Poly<f64>),
}

impl InitialDensity {
    pub fn evaluate<T: Real>(&self, xi: &SpectralField<T>) -> Result<f64> {
        Ok(match self {
            InitialDensity::Constant(c) => *c,
            InitialDensity::Hermite(n) => Ring::to_f64(&hermite_multi(n, xi)?),
            InitialDensity::NormPoly(c) => {
                let r2 = Ring::to_f64(&xi.norm_sqr());
                c.iter().rev().fold(0.0, |acc, &cj| acc * r2 + cj)
            }
            InitialDensity::Poly(p) => p.evaluate(xi),
        })
    }

    /// Modes the datum depends on, if it is cylindrical.
    pub fn support(&self) -> Vec<WaveVector> {
        match self {
            InitialDensity::Hermite(n) => n.iter().map(|(k, _)| k).collect(),
            InitialDensity::Poly(p) => p.support().into_iter().collect(),
            _ => Vec::new(),
        }
    }

    fn check_support(&self, n: i64) -> Result<()> {
        for k in self.support() {
            if k.sup_norm() > n {
                return Err(Error::OutsideBox(k));
            }
        }
        Ok(())
    }
}

impl FromStr for InitialDensity {
    type Err = Error;
    /// `constant`, `constant:<c>`, `hermite:<k1,k2:n;...>`, `norm-poly:<d>`
    /// (the datum `|ξ|^{2d}`).
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let bad = || Error::invalid("rho0", format!("unrecognised preset `{s}`"));
        match (head.trim(), tail) {
            ("constant", None) => Ok(InitialDensity::Constant(1.0)),
            ("constant", Some(c)) => c.trim().parse().map(InitialDensity::Constant).map_err(|_| bad()),
            ("hermite", Some(n)) => Ok(InitialDensity::Hermite(n.parse()?)),
            ("norm-poly", Some(d)) => {
                let d: usize = d.trim().parse().map_err(|_| bad())?;
                let mut c = vec![0.0; d + 1];
                c[d] = 1.0;
                Ok(InitialDensity::NormPoly(c))
            }
            _ => Err(bad()),
        }
    }
}

/// A Monte Carlo solve of the Kolmogorov equation.
#[derive(Clone, Debug)]
pub struct DensityRun<T> {
    pub flow: Flow<T>,
    pub rho0: InitialDensity,
    /// Trajectories per evaluation point.
    pub n_traj: usize,
}

impl<T: Real> DensityRun<T> {
    pub fn new(cfg: FlowConfig, rho0: InitialDensity, n_traj: usize) -> Result<Self> {
        let flow = Flow::new(cfg)?;
        Self::with_flow(flow, rho0, n_traj)
    }

    pub fn with_flow(flow: Flow<T>, rho0: InitialDensity, n_traj: usize) -> Result<Self> {
        rho0.check_support(flow.config().n)?;
        if n_traj < 1 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        Ok(DensityRun { flow, rho0, n_traj })
    }

    /// Number of steps of size `cfg.dt()` reaching `t`.
    pub fn steps_for(&self, t: f64) -> Result<usize> {
        let cfg = self.flow.config();
        if !(t >= 0.0 && t <= cfg.t_end * (1.0 + 1e-12)) {
            return Err(Error::invalid("t", format!("must lie in [0, {}]", cfg.t_end)));
        }
        let dt = cfg.dt();
        let s = (t / dt).round();
        if (s * dt - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::invalid("t", format!("must be a multiple of dt = {dt}")));
        }
        Ok(s as usize)
    }

    fn modes(&self) -> &Arc<crate::lattice::ModeSet> {
        self.flow.modes()
    }

    /// `ρ_0(Φ_t(ξ))` for trajectory `i` of evaluation point `point`.
    fn transported(&self, xi: &SpectralField<T>, steps: usize, seed: u64, i: u64) -> Result<f64> {
        if steps == 0 {
            return self.rho0.evaluate(xi);
        }
        let mut rng = stream(seed, Purpose::BrownianIncrements, i);
        let end = self.flow.advance(xi, self.flow.config().dt(), steps, &mut rng)?;
        self.rho0.evaluate(&end)
    }

    fn inner_moments(&self, xi: &SpectralField<T>, steps: usize, seed: u64) -> Result<Moments> {
        let vals: Vec<Result<f64>> = (0..self.n_traj as u64)
            .into_par_iter()
            .map(|i| self.transported(xi, steps, seed, i))
            .collect();
        let mut m = Moments::default();
        for v in vals {
            m.push(v?);
        }
        Ok(m)
    }

    /// `ρ_t(ξ)` with its standard error; exact (zero error) at `t = 0`.
    pub fn evaluate_density(&self, xi: &SpectralField<T>, t: f64) -> Result<McEstimate> {
        if xi.modes().as_ref() != self.modes().as_ref() {
            return Err(Error::Dimension {
                expected: self.modes().len(),
                got: xi.len(),
            });
        }
        let steps = self.steps_for(t)?;
        if steps == 0 {
            return Ok(McEstimate {
                mean: self.rho0.evaluate(xi)?,
                stderr: 0.0,
                n_samples: self.n_traj,
            });
        }
        let m = self.inner_moments(xi, steps, self.flow.config().seed)?;
        Ok(m.estimate())
    }

    /// Nested estimates over `n_points` white-noise points: for each point
    /// `ξ_j`, the inner mean `ρ̂_t(ξ_j)` and `ρ_0(ξ_j)`.
    pub fn nested(&self, t: f64, n_points: usize) -> Result<Vec<(f64, f64, f64)>> {
        let steps = self.steps_for(t)?;
        let seed = self.flow.config().seed;
        (0..n_points as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = stream(seed, Purpose::OuterPoints, j);
                let xi = sample_white_noise::<T>(self.modes(), &mut rng);
                let inner_seed = derive_seed(seed, Purpose::OuterPoints, j);
                let mut m = Moments::default();
                for i in 0..self.n_traj as u64 {
                    m.push(self.transported(&xi, steps, inner_seed, i)?);
                }
                let e = m.estimate();
                Ok((e.mean, e.stderr, self.rho0.evaluate(&xi)?))
            })
            .collect()
    }

    /// Compares `∫|ρ_t|^p dμ_N` with `∫|ρ_0|^p dμ_N`.
    ///
    /// The left side uses the plug-in `|ρ̂_t(ξ_j)|^p`; for `p >= 1` this is
    /// biased upward by the inner noise, which only makes the check stricter.
    pub fn lp_norm_check(&self, t: f64, p: f64, n_points: usize) -> Result<LpCheck> {
        if !(p >= 1.0) {
            return Err(Error::invalid("p", "must be at least 1"));
        }
        Ok(LpCheck::from_nested(p, &self.nested(t, n_points)?))
    }

    /// `∫ρ_t dμ_N` against `∫ρ_0 dμ_N` on common points.
    pub fn mass_check(&self, t: f64, n_points: usize) -> Result<MassCheck> {
        Ok(MassCheck::from_nested(&self.nested(t, n_points)?))
    }

    /// `∫ρ_t H_n dμ_N = E[H_n(ξ) ρ_0(Φ_t(ξ))]` with `ξ ~ μ_N`, one
    /// trajectory per start (valid because `μ_N` is invariant).
    pub fn chaos_projection(&self, n: &MultiIndex, t: f64, n_samples: usize) -> Result<McEstimate> {
        if n_samples < 2 {
            return Err(Error::invalid("n_samples", "needs at least 2 samples"));
        }
        for (k, _) in n.iter() {
            if !self.modes().contains(k) {
                return Err(Error::SupportMismatch(k));
            }
        }
        let steps = self.steps_for(t)?;
        let seed = self.flow.config().seed;
        let vals: Vec<Result<f64>> = (0..n_samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, Purpose::InitialState, i);
                let xi = sample_white_noise::<T>(self.modes(), &mut rng);
                let h = Ring::to_f64(&hermite_multi(n, &xi)?);
                Ok(h * self.transported(&xi, steps, seed, i)?)
            })
            .collect();
        let mut m = Moments::default();
        for v in vals {
            m.push(v?);
        }
        Ok(m.estimate())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LpCheck {
    pub p: f64,
    pub lhs: McEstimate,
    pub rhs: McEstimate,
    pub combined_se: f64,
    /// `lhs <= rhs + 4·combined_se`.
    pub holds: bool,
}

impl LpCheck {
    /// From the rows of [`DensityRun::nested`].
    pub fn from_nested(p: f64, rows: &[(f64, f64, f64)]) -> Self {
        let mut lhs = Moments::default();
        let mut rhs = Moments::default();
        for &(rt, _, r0) in rows {
            lhs.push(rt.abs().powf(p));
            rhs.push(r0.abs().powf(p));
        }
        Self::new(p, lhs.estimate(), rhs.estimate())
    }

    fn new(p: f64, lhs: McEstimate, rhs: McEstimate) -> Self {
        let combined_se = (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt();
        LpCheck {
            p,
            lhs,
            rhs,
            combined_se,
            holds: lhs.mean <= rhs.mean + 4.0 * combined_se + 1e-12 * rhs.mean.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MassCheck {
    pub mass_t: McEstimate,
    pub mass_0: McEstimate,
    /// Paired differences `ρ̂_t(ξ_j) − ρ_0(ξ_j)`.
    pub difference: McEstimate,
}

impl MassCheck {
    /// From the rows of [`DensityRun::nested`].
    pub fn from_nested(rows: &[(f64, f64, f64)]) -> Self {
        let mut mt = Moments::default();
        let mut m0 = Moments::default();
        let mut d = Moments::default();
        for &(rt, _, r0) in rows {
            mt.push(rt);
            m0.push(r0);
            d.push(rt - r0);
        }
        MassCheck {
            mass_t: mt.estimate(),
            mass_0: m0.estimate(),
            difference: d.estimate(),
        }
    }

    pub fn holds(&self, k_se: f64) -> bool {
        self.difference.within(0.0, k_se)
    }
}

/// Settings of the triviality sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticConfig {
    pub n_list: Vec<i64>,
    pub gamma: Gamma,
    pub theta: f64,
    pub t: f64,
    pub steps: usize,
    pub drift_on: bool,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticRow {
    pub n: i64,
    /// `Σ_{k∈Γ_N} |k|^{−2(γ−1)}` (`β_N` at `γ = 2`).
    pub beta_n: f64,
    pub dim: usize,
    pub projection: McEstimate,
    /// `projection·β_N`.
    pub scaled: f64,
}

/// `∫ρ_t H_n dμ_N` with `ρ_0 = H_n` and noise on `Γ_N`, for each `N`.
pub fn gamma2_diagnostic<T: Real>(n: &MultiIndex, cfg: &DiagnosticConfig) -> Result<Vec<DiagnosticRow>> {
    if cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_list", "must be strictly increasing"));
    }
    crate::coefficients::check_theta(cfg.theta)?;
    let mut rows = Vec::new();
    for &big_n in &cfg.n_list {
        let mut fc = FlowConfig::new(big_n, cfg.gamma, cfg.t, cfg.steps, cfg.seed);
        fc.noise = NoiseSet::Gamma { theta: cfg.theta };
        fc.drift_on = cfg.drift_on;
        let run = DensityRun::<T>::new(fc, InitialDensity::Hermite(n.clone()), 1)?;
        let projection = run.chaos_projection(n, cfg.t, cfg.n_samples)?;
        let beta_n: f64 = a_radius(cfg.theta * big_n as f64, cfg.gamma);
        rows.push(DiagnosticRow {
            n: big_n,
            beta_n,
            dim: run.modes().len(),
            projection,
            scaled: projection.mean * beta_n,
        });
    }
    Ok(rows)
}
