//! Galerkin-truncated vector fields on `H_N`: the Euler drift `b_N`, the
//! Biot–Savart velocity and the linear transport-noise generators
//! `G_N^k(ξ) = A_k ξ`.
//!
//! Internally the hot paths work on full complex coefficient vectors
//! (both `k` and `−k` stored, conjugate-symmetric).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use serde::Serialize;

use crate::coefficients::Gamma;
use crate::error::{Error, Result};
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::Real;
use crate::trig::{complex_to_real, product_expand, real_to_complex};

/// A real vorticity configuration `ξ ∈ H_N`, coordinates `⟨ξ, e_k⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T> {
    modes: Arc<ModeSet>,
    coeffs: Vec<T>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(modes: Arc<ModeSet>) -> Self {
        let coeffs = vec![T::zero(); modes.len()];
        SpectralField { modes, coeffs }
    }

    pub fn new(modes: Arc<ModeSet>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(Error::Dimension {
                expected: modes.len(),
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient at {}", modes.modes()[i])));
        }
        Ok(SpectralField { modes, coeffs })
    }

    /// A single real basis function `e_k`.
    pub fn basis(modes: Arc<ModeSet>, k: WaveVector) -> Result<Self> {
        let i = modes.index_of(k).ok_or(Error::SupportMismatch(k))?;
        let mut f = Self::zeros(modes);
        f.coeffs[i] = T::one();
        Ok(f)
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, k: WaveVector) -> Option<T> {
        self.modes.index_of(k).map(|i| self.coeffs[i])
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        SpectralField {
            modes: self.modes.clone(),
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn axpy(&self, a: T, other: &Self) -> Self {
        SpectralField {
            modes: self.modes.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&x, &y)| x + a * y)
                .collect(),
        }
    }

    pub fn to_complex(&self) -> Vec<Complex<T>> {
        real_to_complex(&self.modes, &self.coeffs).expect("lengths agree")
    }

    pub fn from_complex(modes: Arc<ModeSet>, z: &[Complex<T>]) -> Result<Self> {
        let coeffs = complex_to_real(&modes, z)?;
        Ok(SpectralField { modes, coeffs })
    }

    /// `Π` onto another mode set: keeps shared coordinates, zero elsewhere.
    pub fn project(&self, target: Arc<ModeSet>) -> Self {
        let coeffs = target
            .iter()
            .map(|k| self.get(k).unwrap_or_else(T::zero))
            .collect();
        SpectralField {
            modes: target,
            coeffs,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Pair table for `(b_N(ξ))_j` on the `Z²₊` half, with the two orderings of
/// each pair `{l, j−l}` merged into one weight.
#[derive(Clone, Debug)]
struct DriftKernel<T> {
    targets: Vec<usize>,
    offsets: Vec<usize>,
    a: Vec<u32>,
    b: Vec<u32>,
    w: Vec<T>,
}

impl<T: Real> DriftKernel<T> {
    fn build(modes: &ModeSet) -> Self {
        let four_pi2 = T::of(4.0 * PI * PI);
        let mut targets = Vec::new();
        let mut offsets = vec![0];
        let (mut a, mut b, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for (jj, j) in modes.iter().enumerate() {
            if !j.is_plus() {
                continue;
            }
            for (il, l) in modes.iter().enumerate() {
                let m = j - l;
                if m.is_zero() || l >= m {
                    continue;
                }
                let Some(im) = modes.index_of(m) else {
                    continue;
                };
                // j·l^⊥ (1/|l|² − 1/|m|²), with j·m^⊥ = −j·l^⊥.
                let jl = l.perp().dot(j);
                let num = jl * (m.norm2() - l.norm2());
                if num == 0 {
                    continue;
                }
                let den = l.norm2() * m.norm2();
                a.push(il as u32);
                b.push(im as u32);
                w.push(-four_pi2 * T::of(num as f64) / T::of(den as f64));
            }
            targets.push(jj);
            offsets.push(a.len());
        }
        DriftKernel {
            targets,
            offsets,
            a,
            b,
            w,
        }
    }

    fn apply(&self, z: &[Complex<T>], neg: &[usize], out: &mut [Complex<T>]) {
        for (t, &jj) in self.targets.iter().enumerate() {
            let mut re = T::zero();
            let mut im = T::zero();
            for p in self.offsets[t]..self.offsets[t + 1] {
                let x = z[self.a[p] as usize];
                let y = z[self.b[p] as usize];
                let w = self.w[p];
                re += w * (x.re * y.re - x.im * y.im);
                im += w * (x.re * y.im + x.im * y.re);
            }
            out[jj] = Complex::new(re, im);
            out[neg[jj]] = Complex::new(re, -im);
        }
    }

    fn pair_count(&self) -> usize {
        self.w.len()
    }
}

/// Orthonormal sine transform of size `L` (symmetric, involutive) with the
/// eigenvalues `2cos(π(p+1)/(L+1))` of the path adjacency matrix.
#[derive(Clone, Debug)]
struct PathEigen<T> {
    v: Vec<T>,
    lambda: Vec<T>,
}

impl<T: Real> PathEigen<T> {
    fn new(len: usize) -> Self {
        let h = (len + 1) as f64;
        let scale = (2.0 / h).sqrt();
        let mut v = Vec::with_capacity(len * len);
        for p in 0..len {
            for q in 0..len {
                let arg = PI * ((p + 1) * (q + 1)) as f64 / h;
                v.push(T::of(scale * arg.sin()));
            }
        }
        let lambda = (0..len)
            .map(|p| T::of(2.0 * (PI * (p + 1) as f64 / h).cos()))
            .collect();
        PathEigen { v, lambda }
    }
}

/// One maximal chain `j0, j0+k, …, j0+(L−1)k` inside `Λ_N` together with its
/// mirror chain, on which `A_k` acts as `α` times a path adjacency matrix.
#[derive(Clone, Debug)]
struct Chain<T> {
    start: usize,
    len: usize,
    alpha: T,
}

/// Exact flow of one noise generator, evaluated chain by chain.
#[derive(Clone, Debug)]
pub struct NoiseChains<T> {
    k: WaveVector,
    plus: bool,
    chains: Vec<Chain<T>>,
    idx: Vec<usize>,
    mirror: Vec<usize>,
}

impl<T: Real> NoiseChains<T> {
    fn build(modes: &ModeSet, k: WaveVector, gamma: Gamma) -> Result<Self> {
        let scale: T = gamma.inv_norm_pow(k)?;
        let pi = T::PI();
        let mut chains = Vec::new();
        let (mut idx, mut mirror) = (Vec::new(), Vec::new());
        for j0 in modes.iter() {
            if modes.contains(j0 - k) {
                continue;
            }
            let mut members = vec![j0];
            while let Some(&last) = members.last() {
                let next = last + k;
                if modes.contains(next) {
                    members.push(next);
                } else {
                    break;
                }
            }
            let len = members.len();
            let dot = k.perp().dot(j0);
            if len < 2 || dot == 0 {
                continue;
            }
            let mirror_start = -members[len - 1];
            if j0 > mirror_start {
                continue;
            }
            let start = idx.len();
            for &m in &members {
                idx.push(modes.index_of(m).expect("member"));
                mirror.push(modes.index_of(-m).expect("negation closed"));
            }
            chains.push(Chain {
                start,
                len,
                alpha: pi * T::of(dot as f64) * scale,
            });
        }
        Ok(NoiseChains {
            k,
            plus: k.is_plus(),
            chains,
            idx,
            mirror,
        })
    }

    pub fn k(&self) -> WaveVector {
        self.k
    }

    pub fn max_len(&self) -> usize {
        self.chains.iter().map(|c| c.len).max().unwrap_or(0)
    }
}

/// Dense real-coordinate matrix of `G_N^k`.
#[derive(Clone, Debug, Serialize)]
pub struct NoiseGenerator<T> {
    pub k: WaveVector,
    pub gamma: f64,
    pub dim: usize,
    /// Row-major.
    pub matrix: Vec<T>,
}

impl<T: Real> NoiseGenerator<T> {
    pub fn entry(&self, row: usize, col: usize) -> T {
        self.matrix[row * self.dim + col]
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|r| {
                self.matrix[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `max |A + Aᵀ|`.
    pub fn skew_defect(&self) -> T {
        let mut m = T::zero();
        for r in 0..self.dim {
            for c in 0..self.dim {
                m = m.max((self.entry(r, c) + self.entry(c, r)).abs());
            }
        }
        m
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }
}

/// Precomputed vector fields for a fixed `(N, γ, noise set)`.
#[derive(Clone, Debug)]
pub struct GalerkinSystem<T> {
    n: i64,
    gamma: Gamma,
    modes: Arc<ModeSet>,
    noise: ModeSet,
    neg: Vec<usize>,
    drift: DriftKernel<T>,
    chains: Vec<NoiseChains<T>>,
    eigen: Vec<PathEigen<T>>,
}

impl<T: Real> GalerkinSystem<T> {
    /// State space `Box(N)`, noise modes `noise` (each must lie in the box).
    pub fn new(n: i64, gamma: Gamma, noise: ModeSet) -> Result<Self> {
        let modes = Arc::new(ModeSet::box_modes(n)?);
        for k in noise.iter() {
            if k.sup_norm() > n {
                return Err(Error::OutsideBox(k));
            }
        }
        let neg = modes.negation_permutation();
        let drift = DriftKernel::build(&modes);
        let chains = noise
            .iter()
            .map(|k| NoiseChains::build(&modes, k, gamma))
            .collect::<Result<Vec<_>>>()?;
        let max_len = chains.iter().map(|c| c.max_len()).max().unwrap_or(0);
        let eigen = (0..=max_len).map(PathEigen::new).collect();
        Ok(GalerkinSystem {
            n,
            gamma,
            modes,
            noise,
            neg,
            drift,
            chains,
            eigen,
        })
    }

    /// Noise over `Ball(N)`.
    pub fn with_ball_noise(n: i64, gamma: Gamma) -> Result<Self> {
        Self::new(n, gamma, ModeSet::ball_modes(n as f64)?)
    }

    /// Noise over `Γ_N = Ball(θN)`.
    pub fn with_gamma_noise(n: i64, gamma: Gamma, theta: f64) -> Result<Self> {
        Self::new(n, gamma, ModeSet::gamma_modes(n, theta)?)
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn noise_modes(&self) -> &ModeSet {
        &self.noise
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn negation(&self) -> &[usize] {
        &self.neg
    }

    pub fn drift_pair_count(&self) -> usize {
        self.drift.pair_count()
    }

    fn check_field(&self, xi: &SpectralField<T>) -> Result<()> {
        if xi.modes.as_ref() != self.modes.as_ref() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        Ok(())
    }

    /// `u(ξ) = 2πi Σ ξ_l (l^⊥/|l|²) ẽ_l`; entry `i` holds the two vector
    /// components of the coefficient of `ẽ_{k_i}`.
    pub fn velocity(&self, xi: &SpectralField<T>) -> Result<Vec<[Complex<T>; 2]>> {
        self.check_field(xi)?;
        let z = xi.to_complex();
        let two_pi = T::of(2.0 * PI);
        Ok(self
            .modes
            .iter()
            .zip(&z)
            .map(|(l, &c)| {
                let p = l.perp();
                let s = Complex::new(T::zero(), two_pi / T::of(l.norm2() as f64)) * c;
                [s * T::of(p.k1 as f64), s * T::of(p.k2 as f64)]
            })
            .collect())
    }

    /// Drift in complex coordinates; `out` has the state's length.
    pub fn drift_complex(&self, z: &[Complex<T>], out: &mut [Complex<T>]) {
        self.drift.apply(z, &self.neg, out);
    }

    /// `b_N(ξ)`.
    pub fn drift(&self, xi: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.check_field(xi)?;
        let z = xi.to_complex();
        let mut out = vec![Complex::new(T::zero(), T::zero()); z.len()];
        self.drift_complex(&z, &mut out);
        SpectralField::from_complex(self.modes.clone(), &out)
    }

    fn noise_index(&self, k: WaveVector) -> Result<usize> {
        self.noise.index_of(k).ok_or(Error::SupportMismatch(k))
    }

    /// `G_N^k` applied in complex coordinates, straight from the two-band
    /// coupling `j ↔ j ± k`.
    pub fn noise_apply_complex(&self, k: WaveVector, z: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if k.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
        if k.sup_norm() > self.n {
            return Err(Error::OutsideBox(k));
        }
        let scale: T = self.gamma.inv_norm_pow(k)?;
        let pi = T::PI();
        let zero = Complex::new(T::zero(), T::zero());
        let at = |v: WaveVector| self.modes.index_of(v).map(|i| z[i]).unwrap_or(zero);
        Ok(self
            .modes
            .iter()
            .map(|j| {
                let c = pi * T::of(k.perp().dot(j) as f64) * scale;
                let (lo, hi) = (at(j - k), at(j + k));
                if k.is_plus() {
                    (lo + hi) * Complex::new(T::zero(), c)
                } else {
                    (lo - hi) * c
                }
            })
            .collect())
    }

    /// Dense matrix `A_k` with `A_k ξ = Π_N(σ_k·∇ξ)`. Column `l` is built
    /// from `σ_k·∇e_l = √2π C_{k,l} e_k e_{−l}`; entries are assembled from
    /// one shared magnitude so that skew-symmetry holds bit for bit.
    pub fn noise_generator(&self, k: WaveVector) -> Result<NoiseGenerator<T>> {
        if k.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
        if k.sup_norm() > self.n {
            return Err(Error::OutsideBox(k));
        }
        let dim = self.dim();
        let scale: T = self.gamma.inv_norm_pow(k)?;
        let pi = T::PI();
        let mut matrix = vec![T::zero(); dim * dim];
        for (col, l) in self.modes.iter().enumerate() {
            let c = k.perp().dot(l);
            if c == 0 {
                continue;
            }
            let magnitude = pi * T::of(c.unsigned_abs() as f64) * scale;
            let prod = product_expand::<f64>(&[k, -l])?;
            for (&j, &v) in &prod.terms {
                if let Some(row) = self.modes.index_of(j) {
                    let sign = v.signum() * (c as f64).signum();
                    matrix[row * dim + col] = if sign > 0.0 { magnitude } else { -magnitude };
                }
            }
        }
        Ok(NoiseGenerator {
            k,
            gamma: self.gamma.value(),
            dim,
            matrix,
        })
    }

    /// In-place `z ← exp(s A_k) z` for the `idx`-th noise mode, exact up to
    /// rounding (chain-wise sine-transform diagonalization).
    pub fn noise_exp_apply_index(&self, idx: usize, s: T, z: &mut [Complex<T>], work: &mut Vec<Complex<T>>) {
        let nc = &self.chains[idx];
        let zero = Complex::new(T::zero(), T::zero());
        for ch in &nc.chains {
            let len = ch.len;
            let eig = &self.eigen[len];
            let members = &nc.idx[ch.start..ch.start + len];
            let mirror = &nc.mirror[ch.start..ch.start + len];
            work.clear();
            work.resize(2 * len, zero);
            let (x, u) = work.split_at_mut(len);
            // Minus modes: conjugate by D = diag(i^m) and flip the angle.
            for (m, &i) in members.iter().enumerate() {
                x[m] = if nc.plus { z[i] } else { rot_neg(z[i], m) };
            }
            let theta = if nc.plus { s * ch.alpha } else { -s * ch.alpha };
            for p in 0..len {
                let row = &eig.v[p * len..(p + 1) * len];
                let mut acc = zero;
                for q in 0..len {
                    acc = acc + x[q] * row[q];
                }
                let (sn, cs) = (theta * eig.lambda[p]).sin_cos();
                u[p] = acc * Complex::new(cs, sn);
            }
            for m in 0..len {
                let row = &eig.v[m * len..(m + 1) * len];
                let mut acc = zero;
                for p in 0..len {
                    acc = acc + u[p] * row[p];
                }
                let y = if nc.plus { acc } else { rot_pos(acc, m) };
                z[members[m]] = y;
                z[mirror[m]] = y.conj();
            }
        }
    }

    /// `exp(s A_k)` on a real field.
    pub fn noise_exp_apply(&self, k: WaveVector, s: T, xi: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.check_field(xi)?;
        let idx = self.noise_index(k)?;
        let mut z = xi.to_complex();
        let mut work = Vec::new();
        self.noise_exp_apply_index(idx, s, &mut z, &mut work);
        SpectralField::from_complex(self.modes.clone(), &z)
    }

    /// Euclidean divergence `Σ_i ∂_i f_i` by central differences with step `h`.
    pub fn divergence<F>(&self, field: F, xi: &SpectralField<T>, h: T) -> T
    where
        F: Fn(&SpectralField<T>) -> SpectralField<T>,
    {
        let two = T::of(2.0);
        let mut div = T::zero();
        for i in 0..xi.len() {
            let mut plus = xi.clone();
            plus.coeffs[i] += h;
            let mut minus = xi.clone();
            minus.coeffs[i] -= h;
            div += (field(&plus).coeffs[i] - field(&minus).coeffs[i]) / (two * h);
        }
        div
    }

    /// `div_{μ_N} f(ξ) = ⟨f(ξ), ξ⟩ − Σ_i ∂_i f_i(ξ)`.
    pub fn gaussian_divergence<F>(&self, field: F, xi: &SpectralField<T>, h: T) -> T
    where
        F: Fn(&SpectralField<T>) -> SpectralField<T>,
    {
        let f = field(xi);
        f.dot(xi) - self.divergence(field, xi, h)
    }
}

/// `z · i^{−m}`.
fn rot_neg<T: Real>(z: Complex<T>, m: usize) -> Complex<T> {
    match m % 4 {
        0 => z,
        1 => Complex::new(z.im, -z.re),
        2 => -z,
        _ => Complex::new(-z.im, z.re),
    }
}

/// `z · i^{m}`.
fn rot_pos<T: Real>(z: Complex<T>, m: usize) -> Complex<T> {
    rot_neg(z, (4 - m % 4) % 4)
}
