//! Wiener chaos machinery: exact cylinder polynomials, Hermite polynomials,
//! the noise pairings and the operator `L⁰_N` with its decomposition.

pub mod hermite;
pub mod operator;
pub mod poly;
pub mod variance;

pub use hermite::{gauss_hermite, hermite_1d, hermite_multi, MultiIndex};
pub use operator::{
    dirichlet_pairing, dirichlet_pairing_truncated, gradient_sum_variance, l0_apply, l0_decompose,
    l0_iterated, ChaosDecomposition,
};
pub use poly::{CylinderFunction, Monomial, Poly};
pub use variance::{r_variance_bruteforce, r_variance_exact, r_variance_radii, RVariance};
