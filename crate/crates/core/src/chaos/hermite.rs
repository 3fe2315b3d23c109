//! Probabilists' Hermite polynomials, multi-indices and Gauss–Hermite
//! quadrature for the standard normal law.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::poly::{Monomial, Poly};
use crate::error::{Error, Result};
use crate::galerkin::SpectralField;
use crate::lattice::WaveVector;
use crate::scalar::{Real, Ring};

/// Largest degree with `i64` coefficients in [`hermite_coefficients`].
pub const MAX_DEGREE: i64 = 40;

/// Integer coefficients of `h_n` (index = power of `t`), generated by
/// `h_n = t h_{n−1} − h'_{n−1}`.
pub fn hermite_coefficients(n: i64) -> Result<Vec<i128>> {
    if n < 0 {
        return Err(Error::invalid("n", "must be nonnegative"));
    }
    if n > MAX_DEGREE {
        return Err(Error::invalid("n", format!("must be at most {MAX_DEGREE}")));
    }
    let mut h: Vec<i128> = vec![1];
    for _ in 0..n {
        let mut next = vec![0i128; h.len() + 1];
        for (p, &c) in h.iter().enumerate() {
            next[p + 1] += c;
            if p > 0 {
                next[p - 1] -= c * p as i128;
            }
        }
        h = next;
    }
    Ok(h)
}

/// `(h_n(t), h_n'(t))`.
pub fn hermite_1d<T: Real>(n: i64, t: T) -> Result<(T, T)> {
    if n < 0 {
        return Err(Error::invalid("n", "must be nonnegative"));
    }
    // Three-term form of the same recurrence: h_{k+1} = t h_k − k h_{k−1}.
    let (mut prev, mut cur) = (T::zero(), T::one());
    for k in 0..n {
        let next = t * cur - T::of(k as f64) * prev;
        prev = cur;
        cur = next;
    }
    Ok((cur, T::of(n as f64) * prev))
}

/// `h_n'' (t)`.
pub fn hermite_second_derivative<T: Real>(n: i64, t: T) -> Result<T> {
    if n < 2 {
        return Ok(T::zero());
    }
    let (v, _) = hermite_1d(n - 2, t)?;
    Ok(T::of((n * (n - 1)) as f64) * v)
}

/// Finitely supported `n: Z²₀ → N`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(WaveVector, u32)>", into = "Vec<(WaveVector, u32)>")]
pub struct MultiIndex(BTreeMap<WaveVector, u32>);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex(BTreeMap::new())
    }

    pub fn new(entries: impl IntoIterator<Item = (WaveVector, u32)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, a) in entries {
            if k.is_zero() {
                return Err(Error::ZeroWaveVector);
            }
            if a > 0 {
                *map.entry(k).or_insert(0) += a;
            }
        }
        Ok(MultiIndex(map))
    }

    pub fn single(k: WaveVector, a: u32) -> Result<Self> {
        Self::new([(k, a)])
    }

    /// `|n| = Σ n_k`.
    pub fn order(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn get(&self, k: WaveVector) -> u32 {
        self.0.get(&k).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (WaveVector, u32)> + '_ {
        self.0.iter().map(|(&k, &a)| (k, a))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `∏ n_k!`, the value of `E_μ[H_n²]`.
    pub fn factorial_norm(&self) -> u128 {
        self.0
            .values()
            .map(|&a| (1..=a as u128).product::<u128>())
            .product()
    }

    /// `Σ n_l |l|²`; the eigen coefficient is `π²/2` times this.
    pub fn weighted_order(&self) -> i64 {
        self.0.iter().map(|(k, &a)| a as i64 * k.norm2()).sum()
    }

    /// `H_n` as an exact polynomial.
    pub fn hermite_poly<R: Ring>(&self) -> Result<Poly<R>> {
        let mut p = Poly::constant(R::one());
        for (&k, &a) in &self.0 {
            let coeffs = hermite_coefficients(a as i64)?;
            let mut h = Poly::zero();
            for (pow, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    let c = i64::try_from(c).map_err(|_| Error::invalid("n", "coefficient overflow"))?;
                    h.add_term(Monomial::from_powers([(k, pow as u32)]), R::from_int(c));
                }
            }
            p = &p * &h;
        }
        Ok(p)
    }
}

impl TryFrom<Vec<(WaveVector, u32)>> for MultiIndex {
    type Error = Error;
    fn try_from(v: Vec<(WaveVector, u32)>) -> Result<Self> {
        MultiIndex::new(v)
    }
}

impl From<MultiIndex> for Vec<(WaveVector, u32)> {
    fn from(n: MultiIndex) -> Self {
        n.0.into_iter().collect()
    }
}

impl fmt::Display for MultiIndex {
    /// `k1,k2:n;k1,k2:n`, the same syntax accepted by [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, a)| format!("{},{}:{}", k.k1, k.k2, a))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("multi-index", format!("expected `k1,k2:n;...`, got `{s}`"));
        let mut entries = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, a) = part.split_once(':').ok_or_else(bad)?;
            let k: WaveVector = k.parse().map_err(|_| bad())?;
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            entries.push((k, a));
        }
        MultiIndex::new(entries)
    }
}

/// `H_n(ω) = ∏ h_{n_k}(⟨ω, e_k⟩)`.
pub fn hermite_multi<T: Real>(n: &MultiIndex, omega: &SpectralField<T>) -> Result<T> {
    let mut v = T::one();
    for (k, a) in n.iter() {
        let x = omega.get(k).ok_or(Error::SupportMismatch(k))?;
        v *= hermite_1d(a as i64, x)?.0;
    }
    Ok(v)
}

/// Nodes and weights of the `m`-point Gauss rule for `N(0,1)` (weights sum
/// to 1), from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_hermite(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 {
        return Err(Error::invalid("nodes", "must be at least 1"));
    }
    let mut j = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        let b = (i as f64).sqrt();
        j[(i - 1, i)] = b;
        j[(i, i - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// `∫ h_n h_m dν` by `nodes`-point Gauss–Hermite quadrature.
pub fn hermite_inner_quadrature(n: i64, m: i64, nodes: usize) -> Result<f64> {
    let (x, w) = gauss_hermite(nodes)?;
    let mut acc = 0.0;
    for (t, wt) in x.iter().zip(&w) {
        acc += wt * hermite_1d(n, *t)?.0 * hermite_1d(m, *t)?.0;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values() {
        assert_eq!(hermite_1d(0, 0.7).unwrap().0, 1.0);
        assert_eq!(hermite_1d(1, 0.0).unwrap().0, 0.0);
        assert_eq!(hermite_1d(2, 2.0).unwrap().0, 3.0);
        assert!(hermite_1d::<f64>(-1, 0.0).is_err());
        assert_eq!(hermite_coefficients(3).unwrap(), vec![0, -3, 0, 1]);
    }

    #[test]
    fn multi_index_parsing_round_trips() {
        let n: MultiIndex = "1,0:2;0,-2:1".parse().unwrap();
        assert_eq!(n.order(), 3);
        assert_eq!(n.to_string().parse::<MultiIndex>().unwrap(), n);
        assert!("1,0".parse::<MultiIndex>().is_err());
    }
}
