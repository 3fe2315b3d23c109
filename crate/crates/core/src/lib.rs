//! Spectral lab for the Galerkin truncation of the stochastic 2D Euler
//! vorticity equation on the torus with transport noise
//! `Σ_k σ_k·∇ω ∘ dW^k`, `σ_k = (1/√2) k^⊥/|k|^γ e_k`.
//!
//! The crate covers the lattice and trigonometric bookkeeping, the noise
//! coefficients `C_{k,l}`, the truncated drift and the exact orthogonal noise
//! flows, white-noise sampling with Isserlis–Wick moments, Hermite chaos and
//! the operator `L⁰_N`, the quadratic form behind the nonlinearity, and Monte
//! Carlo solvers of the Kolmogorov equation.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32`, `f64`); symbolic
//! code is generic over [`scalar::Ring`], which also admits the exact type
//! [`scalar::Exact`] for identities that must hold to the last digit.

pub mod acceptance;
pub mod chaos;
pub mod coefficients;
pub mod error;
pub mod flow;
pub mod galerkin;
pub mod gaussian;
pub mod kolmogorov;
pub mod lattice;
pub mod nonlinear;
pub mod rng;
pub mod scalar;
pub mod trig;

pub use coefficients::Gamma;
pub use error::{Error, Result};
pub use lattice::{ModeSet, WaveVector};
pub use scalar::{Exact, Real, Ring};

pub type Field64 = galerkin::SpectralField<f64>;
pub type Field32 = galerkin::SpectralField<f32>;
pub type System64 = galerkin::GalerkinSystem<f64>;
pub type Flow64 = flow::Flow<f64>;
pub type Flow32 = flow::Flow<f32>;
pub type Poly64 = chaos::Poly<f64>;
pub type ExactPoly = chaos::Poly<Exact>;
pub type Trig64 = trig::TrigExpansion<f64>;
pub type ExactTrig = trig::TrigExpansion<Exact>;
pub type Kernel64 = nonlinear::SymmetricKernel<f64>;
pub type DensityRun64 = kolmogorov::DensityRun<f64>;
