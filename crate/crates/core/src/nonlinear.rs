//! Quadratic functionals `⟨ω⊗ω, f⟩` for symmetric kernels `f` on `T²×T²`,
//! in particular `H_φ(x,y) = (1/2) K(x−y)·(∇φ(x) − ∇φ(y))` with
//! `φ = e_l`, which expresses the nonlinearity as
//! `⟨u(ω)·∇ω, e_l⟩ = −⟨ω⊗ω, H_{e_l}⟩`.
//!
//! Kernels are stored by their pairings `⟨f, ẽ_p⊗ẽ_q⟩ = ∫∫ f ẽ_p(x) ẽ_q(y)`,
//! so that `f = Σ ⟨f, ẽ_p⊗ẽ_q⟩ ẽ_{−p}⊗ẽ_{−q}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;

use crate::chaos::Poly;
use crate::error::{Error, Result};
use crate::galerkin::SpectralField;
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::{Real, Ring};

/// Finitely supported symmetric kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricKernel<T> {
    entries: BTreeMap<(WaveVector, WaveVector), Complex<T>>,
}

impl<T: Real> SymmetricKernel<T> {
    pub fn new() -> Self {
        SymmetricKernel {
            entries: BTreeMap::new(),
        }
    }

    /// Adds `c` at `(p, q)` and at `(q, p)` (once when `p = q`).
    pub fn add_symmetric(&mut self, p: WaveVector, q: WaveVector, c: Complex<T>) {
        let e = self.entries.entry((p, q)).or_insert_with(Complex::default);
        *e = *e + c;
        if p != q {
            let e = self.entries.entry((q, p)).or_insert_with(Complex::default);
            *e = *e + c;
        }
    }

    /// `⟨f, ẽ_p⊗ẽ_q⟩`.
    pub fn coefficient(&self, p: WaveVector, q: WaveVector) -> Complex<T> {
        self.entries.get(&(p, q)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (WaveVector, WaveVector, Complex<T>)> + '_ {
        self.entries.iter().map(|(&(p, q), &c)| (p, q, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `max |f(p,q) − f(q,p)|`.
    pub fn swap_defect(&self) -> T {
        self.iter()
            .map(|(p, q, c)| (c - self.coefficient(q, p)).norm())
            .fold(T::zero(), T::max)
    }

    /// `max |f(−p,−q) − conj f(p,q)|`; zero iff `f` is real valued.
    pub fn reality_defect(&self) -> T {
        self.iter()
            .map(|(p, q, c)| (self.coefficient(-p, -q) - c.conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// `f(x, y)` by direct synthesis.
    pub fn evaluate(&self, x: [f64; 2], y: [f64; 2]) -> Complex<f64> {
        let tau = 2.0 * std::f64::consts::PI;
        self.iter()
            .map(|(p, q, c)| {
                let phase = -tau
                    * (p.k1 as f64 * x[0] + p.k2 as f64 * x[1] + q.k1 as f64 * y[0] + q.k2 as f64 * y[1]);
                Complex::new(Ring::to_f64(&c.re), Ring::to_f64(&c.im)) * Complex::from_polar(1.0, phase)
            })
            .sum()
    }

    /// `Σ_{k∈modes} ⟨f, ẽ_k⊗ẽ_{−k}⟩`, the white-noise mean of the pairing.
    pub fn diagonal_sum(&self, modes: &ModeSet) -> Complex<T> {
        modes.iter().map(|k| self.coefficient(k, -k)).sum()
    }
}

impl<T: Real> Default for SymmetricKernel<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Fourier coefficients `a_s` of `e_m = Σ a_s ẽ_s` as `(s, a_s)`.
fn basis_fourier<T: Real>(m: WaveVector) -> [(WaveVector, Complex<T>); 2] {
    let h = T::frac_1_sqrt2();
    if m.is_plus() {
        [(m, Complex::new(h, T::zero())), (-m, Complex::new(h, T::zero()))]
    } else {
        [(m, Complex::new(T::zero(), -h)), (-m, Complex::new(T::zero(), h))]
    }
}

/// `H_{e_l}` with the Biot–Savart series `K = Σ 2πi k^⊥/|k|² ẽ_k` truncated
/// to `k ∈ Box(cutoff)`.
///
/// `⟨H_{e_l}, ẽ_p⊗ẽ_q⟩ = −2π² a_s (p^⊥·q)(1/|q|² − 1/|p|²)` with
/// `s = −(p+q)`; each reciprocal appears only when its mode lies in the
/// cutoff box.
pub fn h_phi_kernel<T: Real>(l: WaveVector, cutoff: i64) -> Result<SymmetricKernel<T>> {
    if l.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let bx = ModeSet::box_modes(cutoff.max(1))?;
    let two_pi2 = T::of(2.0 * std::f64::consts::PI * std::f64::consts::PI);
    let mut ker = SymmetricKernel::new();
    for (s, a) in basis_fourier::<T>(l) {
        // All (p, q) with p + q = −s and p or q in the box, each once.
        let mut ps: Vec<WaveVector> = bx.iter().collect();
        ps.extend(bx.iter().map(|q| -s - q));
        ps.sort();
        ps.dedup();
        for p in ps {
            let q = -s - p;
            if p.is_zero() || q.is_zero() {
                continue;
            }
            let cross = p.perp().dot(q);
            if cross == 0 {
                continue;
            }
            let mut w = T::zero();
            if bx.contains(q) {
                w += T::one() / T::of(q.norm2() as f64);
            }
            if bx.contains(p) {
                w -= T::one() / T::of(p.norm2() as f64);
            }
            let c = a * (-two_pi2 * T::of(cross as f64) * w);
            if c.norm() > T::zero() {
                let e = ker.entries.entry((p, q)).or_insert_with(Complex::default);
                *e = *e + c;
            }
        }
    }
    Ok(ker)
}

/// `⟨ω⊗ω, f⟩ = Σ_{p,q∈Λ} ξ_p ξ_q ⟨f,ẽ_p⊗ẽ_q⟩` over the modes `Λ` of `ω`,
/// where `ξ_p = ⟨ω, ẽ_{−p}⟩` is the Fourier coefficient of `ω`.
pub fn quadratic_pairing<T: Real>(omega: &SpectralField<T>, f: &SymmetricKernel<T>) -> T {
    let modes = omega.modes();
    let z = omega.to_complex();
    let coord = |p: WaveVector| modes.index_of(p).map(|i| z[i]);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (p, q, c) in f.iter() {
        if let (Some(a), Some(b)) = (coord(p), coord(q)) {
            acc = acc + a * b * c;
        }
    }
    acc.re
}

/// `⟨u(ω_N)·∇ω_N, DG⟩ = −Σ_l (∂_l g)(ω) ⟨ω_N⊗ω_N, H_{e_l}⟩`.
pub fn nonlinear_derivative<R: Ring, T: Real>(
    g: &Poly<R>,
    omega: &SpectralField<T>,
    n: i64,
) -> Result<T> {
    let modes = Arc::new(ModeSet::box_modes(n)?);
    let support = g.support();
    for &l in &support {
        if !modes.contains(l) {
            return Err(Error::OutsideBox(l));
        }
    }
    let omega_n = omega.project(modes);
    let mut acc = T::zero();
    for l in support {
        let dl = g.derivative(l).evaluate(omega);
        if dl == 0.0 {
            continue;
        }
        let ker = h_phi_kernel::<T>(l, n)?;
        acc -= T::of(dl) * quadratic_pairing(&omega_n, &ker);
    }
    Ok(acc)
}

/// `2 Σ_{(p,q)∈Λ_M²∖Λ_N²} |⟨f, ẽ_p⊗ẽ_q⟩|²`, the variance of
/// `(I_M − E I_M) − (I_N − E I_N)` under white noise.
pub fn pairing_variance_exact<T: Real>(f: &SymmetricKernel<T>, n: i64, m: i64) -> Result<T> {
    if n >= m {
        return Err(Error::invalid("N, M", "need N < M"));
    }
    let inside = |k: WaveVector, r: i64| !k.is_zero() && k.sup_norm() <= r;
    let mut acc = T::zero();
    for (p, q, c) in f.iter() {
        if inside(p, m) && inside(q, m) && !(inside(p, n) && inside(q, n)) {
            acc += c.norm_sqr();
        }
    }
    Ok(T::of(2.0) * acc)
}

/// `2 Σ_{p,q∈Λ_N} |⟨f, ẽ_p⊗ẽ_q⟩|²`, the variance of `I_N`.
pub fn pairing_variance<T: Real>(f: &SymmetricKernel<T>, n: i64) -> T {
    let mut acc = T::zero();
    for (p, q, c) in f.iter() {
        if !p.is_zero() && !q.is_zero() && p.sup_norm() <= n && q.sup_norm() <= n {
            acc += c.norm_sqr();
        }
    }
    T::of(2.0) * acc
}


#[cfg(test)]
mod cross_tests {
    use super::*;
    use crate::coefficients::Gamma;
    use crate::galerkin::GalerkinSystem;
    use crate::gaussian::sample_white_noise;
    use crate::rng::{stream, Purpose};

    #[test]
    fn matches_galerkin_drift() {
        let sys = GalerkinSystem::<f64>::with_ball_noise(3, Gamma::TWO).unwrap();
        let mut rng = stream(5, Purpose::Custom(1), 0);
        let omega = sample_white_noise::<f64>(sys.modes(), &mut rng);
        let b = sys.drift(&omega).unwrap();
        for l in sys.modes().iter() {
            let g = Poly::<f64>::var(l);
            let d = nonlinear_derivative(&g, &omega, 3).unwrap();
            let expect = b.get(l).unwrap();
            assert!((d - expect).abs() < 1e-8 * (1.0 + expect.abs()), "{l}: {d} vs {expect}");
        }
    }
}
