//! Noise coefficients `C_{k,l}(γ) = (k^⊥·l)/|k|^γ`, `D_{k,l} = (k·l)/|k|^γ`
//! and the lattice sums built from them.
//!
//! The scalar `Σ_{k∈Γ_N} 1/|k|²` is called `β_N` here.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::{Exact, Real, Ring};

/// Decay exponent of the noise fields, `γ >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma(f64);

impl Gamma {
    pub const TWO: Gamma = Gamma(2.0);

    pub fn new(g: f64) -> Result<Self> {
        if g.is_finite() && g >= 2.0 {
            Ok(Gamma(g))
        } else {
            Err(Error::invalid("gamma", format!("must be finite and >= 2, got {g}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `|k|^{-γ}` as `(|k|²)^{-γ/2}`.
    pub fn inv_norm_pow<R: Ring>(self, k: WaveVector) -> Result<R> {
        if k.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
        R::inv_pow(k.norm2(), self.0 / 2.0)
    }
}

impl TryFrom<f64> for Gamma {
    type Error = Error;
    fn try_from(g: f64) -> Result<Self> {
        Gamma::new(g)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.0
    }
}

/// `C_{k,l} = (k^⊥·l)/|k|^γ`.
pub fn c_kl<R: Ring>(k: WaveVector, l: WaveVector, gamma: Gamma) -> Result<R> {
    if l.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let s: R = gamma.inv_norm_pow(k)?;
    Ok(R::from_int(k.perp().dot(l)) * s)
}

/// `D_{k,l} = (k·l)/|k|^γ`.
pub fn d_kl<R: Ring>(k: WaveVector, l: WaveVector, gamma: Gamma) -> Result<R> {
    if l.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let s: R = gamma.inv_norm_pow(k)?;
    Ok(R::from_int(k.dot(l)) * s)
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Number of lattice points on each circle `|k|² = n2`, `0 < n2 <= r²`.
fn shell_counts(r: f64) -> BTreeMap<i64, i64> {
    let mut shells = BTreeMap::new();
    for k in ModeSet::ball_modes(r).map(|m| m.modes().to_vec()).unwrap_or_default() {
        *shells.entry(k.norm2()).or_insert(0) += 1;
    }
    shells
}

/// `Σ_{0<|k|<=r} (|k|²)^{-p}`, largest `|k|` (smallest terms) first.
fn radial_sum<T: Real>(r: f64, p: f64) -> T {
    let mut acc = CompensatedSum::new();
    for (&n2, &count) in shell_counts(r).iter().rev() {
        let term: T = T::inv_pow(n2, p).expect("positive shell radius");
        acc.add(T::from_int(count) * term);
    }
    acc.value()
}

fn radial_sum_exact(r: f64, p: i64) -> Exact {
    let mut acc = Exact::zero();
    for (&n2, &count) in shell_counts(r).iter() {
        acc = acc + Exact::from_int(count) * Exact::inv_pow(n2, p as f64).expect("integer power");
    }
    acc
}

fn check_n(n: i64) -> Result<()> {
    if n < 1 {
        Err(Error::invalid("N", "must be at least 1"))
    } else {
        Ok(())
    }
}

pub fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("theta", "must lie in (0, 1/2)"))
    }
}

/// `a_N(γ) = Σ_{0<|k|<=N} |k|^{-2(γ-1)}`.
pub fn a_n<T: Real>(n: i64, gamma: Gamma) -> Result<T> {
    check_n(n)?;
    Ok(radial_sum(n as f64, gamma.value() - 1.0))
}

/// Exact `a_N(γ)` for integer `γ`.
pub fn a_n_exact(n: i64, gamma: Gamma) -> Result<Exact> {
    check_n(n)?;
    let p = gamma.value() - 1.0;
    if p.fract() != 0.0 {
        return Err(Error::InexactExponent(gamma.value()));
    }
    Ok(radial_sum_exact(n as f64, p as i64))
}

/// `Σ_{0<|k|<=r} |k|^{-2(γ-1)}` for a real radius.
pub fn a_radius<T: Real>(r: f64, gamma: Gamma) -> T {
    radial_sum(r, gamma.value() - 1.0)
}

/// `β_N = Σ_{k∈Γ_N} 1/|k|²` with `Γ_N = Ball(θN)`.
pub fn beta_n<T: Real>(n: i64, theta: f64) -> Result<T> {
    check_n(n)?;
    check_theta(theta)?;
    Ok(radial_sum(theta * n as f64, 1.0))
}

/// Exact `β_N`.
pub fn beta_n_exact(n: i64, theta: f64) -> Result<Exact> {
    check_n(n)?;
    check_theta(theta)?;
    Ok(radial_sum_exact(theta * n as f64, 1))
}

/// `Σ_{k∈Ball(N)} C_{k,l}²` by direct enumeration.
pub fn c_squared_sum<T: Real>(n: i64, l: WaveVector, gamma: Gamma) -> Result<T> {
    check_n(n)?;
    if l.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let ball = ModeSet::ball_modes(n as f64)?;
    let mut ks: Vec<WaveVector> = ball.modes().to_vec();
    ks.sort_by_key(|k| std::cmp::Reverse(k.norm2()));
    let mut acc = CompensatedSum::new();
    for k in ks {
        let c: T = c_kl(k, l, gamma)?;
        acc.add(c * c);
    }
    Ok(acc.value())
}

/// Cached `C_{k,l}` for a fixed set of noise modes and test modes.
#[derive(Clone, Debug)]
pub struct CoefficientTable<R> {
    gamma: Gamma,
    cache: HashMap<(WaveVector, WaveVector), R>,
}

impl<R: Ring> CoefficientTable<R> {
    pub fn build(
        gamma: Gamma,
        ks: impl IntoIterator<Item = WaveVector>,
        ls: &[WaveVector],
    ) -> Result<Self> {
        let mut cache = HashMap::new();
        for k in ks {
            for &l in ls {
                cache.insert((k, l), c_kl(k, l, gamma)?);
            }
        }
        Ok(CoefficientTable { gamma, cache })
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn get(&self, k: WaveVector, l: WaveVector) -> Result<R> {
        match self.cache.get(&(k, l)) {
            Some(c) => Ok(c.clone()),
            None => c_kl(k, l, self.gamma),
        }
    }
}
