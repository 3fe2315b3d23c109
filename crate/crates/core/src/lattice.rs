//! Integer wave vectors and the finite mode sets built from them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice point `k = (k1, k2)`. Zero is representable so that sums like
/// `j - l` can be formed, but constructors that model `Z²\{0}` reject it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct WaveVector {
    pub k1: i64,
    pub k2: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignClass {
    Plus,
    Minus,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector { k1: 0, k2: 0 };

    pub const fn new(k1: i64, k2: i64) -> Self {
        WaveVector { k1, k2 }
    }

    pub fn nonzero(k1: i64, k2: i64) -> Result<Self> {
        if k1 == 0 && k2 == 0 {
            Err(Error::ZeroWaveVector)
        } else {
            Ok(WaveVector { k1, k2 })
        }
    }

    pub fn is_zero(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    pub fn sign_class(self) -> Result<SignClass> {
        if self.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
        Ok(if self.is_plus() {
            SignClass::Plus
        } else {
            SignClass::Minus
        })
    }

    /// `true` for `Z²₊`. Zero counts as neither.
    pub fn is_plus(self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    /// `k^⊥ = (k2, -k1)`.
    pub fn perp(self) -> Self {
        WaveVector::new(self.k2, -self.k1)
    }

    pub fn dot(self, other: Self) -> i64 {
        self.k1 * other.k1 + self.k2 * other.k2
    }

    pub fn norm2(self) -> i64 {
        self.dot(self)
    }

    pub fn sup_norm(self) -> i64 {
        self.k1.abs().max(self.k2.abs())
    }

    /// Representative in `Z²₊` of `{k, -k}`.
    pub fn canonical(self) -> Self {
        if self.is_plus() {
            self
        } else {
            -self
        }
    }

    pub fn scale(self, s: i64) -> Self {
        WaveVector::new(self.k1 * s, self.k2 * s)
    }

    /// Rotation by +90 degrees, `(k1, k2) -> (-k2, k1)`.
    pub fn rotate(self) -> Self {
        WaveVector::new(-self.k2, self.k1)
    }
}

impl fmt::Debug for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

impl FromStr for WaveVector {
    type Err = Error;
    /// `k1,k2`, optionally in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("wave vector", format!("expected `k1,k2`, got `{s}`"));
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let k1 = a.trim().parse().map_err(|_| bad())?;
        let k2 = b.trim().parse().map_err(|_| bad())?;
        Ok(WaveVector::new(k1, k2))
    }
}

impl From<[i64; 2]> for WaveVector {
    fn from(a: [i64; 2]) -> Self {
        WaveVector::new(a[0], a[1])
    }
}

impl From<WaveVector> for [i64; 2] {
    fn from(k: WaveVector) -> Self {
        [k.k1, k.k2]
    }
}

impl Add for WaveVector {
    type Output = WaveVector;
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector::new(self.k1 + o.k1, self.k2 + o.k2)
    }
}

impl Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, o: WaveVector) -> WaveVector {
        WaveVector::new(self.k1 - o.k1, self.k2 - o.k2)
    }
}

impl Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> WaveVector {
        WaveVector::new(-self.k1, -self.k2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSetKind {
    Box(i64),
    Ball(f64),
    Explicit,
}

/// Slack used when comparing `|k|² <= r²` so that `r = N/3` style radii
/// computed in floating point include their boundary points.
const BALL_EPS: f64 = 1e-9;

/// A finite, negation-closed set of nonzero wave vectors in lexicographic
/// order, with an index lookup.
#[derive(Clone, Debug)]
pub struct ModeSet {
    kind: ModeSetKind,
    modes: Vec<WaveVector>,
    index: HashMap<WaveVector, usize>,
}

impl PartialEq for ModeSet {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

impl ModeSet {
    fn build(kind: ModeSetKind, mut modes: Vec<WaveVector>) -> Result<Self> {
        modes.sort();
        modes.dedup();
        let index: HashMap<_, _> = modes.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        for &k in &modes {
            if k.is_zero() {
                return Err(Error::ZeroWaveVector);
            }
            if !index.contains_key(&-k) {
                return Err(Error::NotNegationClosed(-k));
            }
        }
        Ok(ModeSet { kind, modes, index })
    }

    /// `Λ_N = {k : max(|k1|,|k2|) <= N} \ {0}`.
    pub fn box_modes(n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        let mut modes = Vec::with_capacity(((2 * n + 1) * (2 * n + 1) - 1) as usize);
        for k1 in -n..=n {
            for k2 in -n..=n {
                if k1 != 0 || k2 != 0 {
                    modes.push(WaveVector::new(k1, k2));
                }
            }
        }
        Self::build(ModeSetKind::Box(n), modes)
    }

    /// `{k != 0 : |k| <= r}`.
    pub fn ball_modes(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid("r", "must be positive and finite"));
        }
        let r2 = r * r + BALL_EPS;
        let m = r.floor() as i64;
        let mut modes = Vec::new();
        for k1 in -m..=m {
            for k2 in -m..=m {
                let n2 = (k1 * k1 + k2 * k2) as f64;
                if (k1 != 0 || k2 != 0) && n2 <= r2 {
                    modes.push(WaveVector::new(k1, k2));
                }
            }
        }
        Self::build(ModeSetKind::Ball(r), modes)
    }

    /// `Γ_N = Ball(θN)`.
    pub fn gamma_modes(n: i64, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 0.5) {
            return Err(Error::invalid("theta", "must lie in (0, 1/2)"));
        }
        if n < 1 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        let r = theta * n as f64;
        if r < 1.0 - BALL_EPS {
            return Self::build(ModeSetKind::Ball(r), Vec::new());
        }
        Self::ball_modes(r)
    }

    pub fn explicit(modes: impl IntoIterator<Item = WaveVector>) -> Result<Self> {
        Self::build(ModeSetKind::Explicit, modes.into_iter().collect())
    }

    /// Closure of `modes` under negation.
    pub fn symmetric_hull(modes: impl IntoIterator<Item = WaveVector>) -> Result<Self> {
        let mut v = Vec::new();
        for k in modes {
            if k.is_zero() {
                return Err(Error::ZeroWaveVector);
            }
            v.push(k);
            v.push(-k);
        }
        Self::build(ModeSetKind::Explicit, v)
    }

    pub fn kind(&self) -> &ModeSetKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[WaveVector] {
        &self.modes
    }

    pub fn iter(&self) -> impl Iterator<Item = WaveVector> + '_ {
        self.modes.iter().copied()
    }

    pub fn plus_modes(&self) -> impl Iterator<Item = WaveVector> + '_ {
        self.iter().filter(|k| k.is_plus())
    }

    pub fn index_of(&self, k: WaveVector) -> Option<usize> {
        self.index.get(&k).copied()
    }

    pub fn contains(&self, k: WaveVector) -> bool {
        self.index.contains_key(&k)
    }

    pub fn is_subset_of(&self, other: &ModeSet) -> bool {
        self.modes.iter().all(|&k| other.contains(k))
    }

    /// Index of `-k` for each position.
    pub fn negation_permutation(&self) -> Vec<usize> {
        self.modes.iter().map(|&k| self.index[&-k]).collect()
    }
}

impl Serialize for ModeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.modes.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<WaveVector>::deserialize(d)?;
        ModeSet::explicit(v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_classes() {
        let s = |a, b| WaveVector::new(a, b).sign_class().unwrap();
        assert_eq!(s(1, -5), SignClass::Plus);
        assert_eq!(s(0, 1), SignClass::Plus);
        assert_eq!(s(0, -1), SignClass::Minus);
        assert_eq!(s(-3, 2), SignClass::Minus);
        assert_eq!(WaveVector::ZERO.sign_class(), Err(Error::ZeroWaveVector));
    }

    #[test]
    fn box_cardinality_and_mirror() {
        assert_eq!(ModeSet::box_modes(1).unwrap().len(), 8);
        assert_eq!(ModeSet::box_modes(2).unwrap().len(), 24);
        assert!(ModeSet::box_modes(0).is_err());
        let b = ModeSet::box_modes(1).unwrap();
        let i = b.index_of(WaveVector::new(1, 1)).unwrap();
        let j = b.index_of(WaveVector::new(-1, -1)).unwrap();
        assert_eq!(i + j, b.len() - 1);
    }

    #[test]
    fn balls() {
        assert_eq!(ModeSet::ball_modes(1.0).unwrap().len(), 4);
        assert_eq!(ModeSet::ball_modes(2.0).unwrap().len(), 12);
        assert!(ModeSet::ball_modes(0.5).unwrap().is_empty());
        assert_eq!(ModeSet::gamma_modes(6, 1.0 / 3.0).unwrap().len(), 12);
        assert_eq!(ModeSet::gamma_modes(3, 1.0 / 3.0).unwrap().len(), 4);
    }

    #[test]
    fn json_roundtrip() {
        let b = ModeSet::box_modes(1).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.starts_with("[[-1,-1],[-1,0]"));
        let back: ModeSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<ModeSet>("[[1,0]]").is_err());
    }
}
