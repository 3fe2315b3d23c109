//! Cylinder functions: polynomials in the coordinates `x_l = ⟨ω, e_l⟩`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::galerkin::SpectralField;
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::{Real, Ring};
use crate::trig::TrigExpansion;

/// `∏ x_l^{a_l}` with positive exponents, sorted by mode.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(WaveVector, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(k: WaveVector) -> Self {
        Monomial(vec![(k, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (WaveVector, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, a) in powers {
            if a > 0 {
                *map.entry(k).or_insert(0) += a;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn powers(&self) -> &[(WaveVector, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, a)| a).sum()
    }

    pub fn exponent(&self, k: WaveVector) -> u32 {
        self.0
            .binary_search_by_key(&k, |&(m, _)| m)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `∂_k` of the monomial as `(multiplier, monomial)`.
    pub fn derivative(&self, k: WaveVector) -> Option<(u32, Monomial)> {
        let i = self.0.binary_search_by_key(&k, |&(m, _)| m).ok()?;
        let a = self.0[i].1;
        let mut v = self.0.clone();
        if a == 1 {
            v.remove(i);
        } else {
            v[i].1 -= 1;
        }
        Some((a, Monomial(v)))
    }

    /// `E[∏ x_l^{a_l}]` for independent standard normals: `∏ (a_l − 1)!!`.
    pub fn gaussian_moment(&self) -> u128 {
        let mut m = 1u128;
        for &(_, a) in &self.0 {
            if a % 2 == 1 {
                return 0;
            }
            let mut j = a as u128 - 1;
            while j > 1 {
                m *= j;
                j -= 2;
            }
        }
        m
    }

    pub fn evaluate(&self, x: impl Fn(WaveVector) -> f64) -> f64 {
        self.0.iter().map(|&(k, a)| x(k).powi(a as i32)).product()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (k, a)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "x{k}")?;
            if *a > 1 {
                write!(f, "^{a}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial cylinder function `F(ω) = f(Π_Λ ω)`.
#[derive(Clone, PartialEq, Default)]
pub struct Poly<R> {
    terms: BTreeMap<Monomial, R>,
}

/// The cylinder functions used throughout are polynomials.
pub type CylinderFunction<R> = Poly<R>;

impl<R: Ring> Poly<R> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: R) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(k: WaveVector) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(k), R::one());
        p
    }

    pub fn monomial(m: Monomial, c: R) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// `ω ↦ ⟨ω, f⟩`; the constant part of `f` pairs to zero since `ω` has
    /// no mean.
    pub fn linear(f: &TrigExpansion<R>) -> Self {
        let mut p = Self::zero();
        for (&k, c) in &f.terms {
            p.add_term(Monomial::var(k), c.clone());
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: R) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let slot = self.terms.entry(m.clone()).or_insert_with(R::zero);
            *slot = slot.clone() + c;
            slot.is_zero()
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> R {
        self.terms.get(m).cloned().unwrap_or_else(R::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Modes the polynomial depends on.
    pub fn support(&self) -> BTreeSet<WaveVector> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(k, _)| k))
            .collect()
    }

    pub fn scale(&self, s: &R) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn derivative(&self, k: WaveVector) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some((a, d)) = m.derivative(k) {
                out.add_term(d, c.clone() * R::from_int(a as i64));
            }
        }
        out
    }

    /// Drops every monomial that involves a mode outside `modes`
    /// (the coordinates of `Π_N ω` vanish there).
    pub fn restrict(&self, modes: &ModeSet) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.0.iter().all(|&(k, _)| modes.contains(k)) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// `E_μ[F]` under white noise, exact.
    pub fn gaussian_expectation(&self) -> R {
        let mut acc = R::zero();
        for (m, c) in &self.terms {
            let g = m.gaussian_moment();
            if g != 0 {
                let g = i64::try_from(g).expect("moment fits in i64");
                acc = acc + c.clone() * R::from_int(g);
            }
        }
        acc
    }

    /// `E_μ[F G]`.
    pub fn gaussian_inner(&self, other: &Self) -> R {
        let mut acc = R::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let g = a.mul(b).gaussian_moment();
                if g != 0 {
                    let g = i64::try_from(g).expect("moment fits in i64");
                    acc = acc + ca.clone() * cb.clone() * R::from_int(g);
                }
            }
        }
        acc
    }

    /// Evaluation with coordinates supplied by `x`.
    pub fn evaluate_with(&self, x: impl Fn(WaveVector) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64() * m.evaluate(&x))
            .sum()
    }

    /// Evaluation at a Galerkin state; coordinates outside its modes are 0.
    pub fn evaluate<T: Real>(&self, omega: &SpectralField<T>) -> f64 {
        self.evaluate_with(|k| omega.get(k).map(|v| Ring::to_f64(&v)).unwrap_or(0.0))
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Poly<S> {
        let mut out = Poly::<S>::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map(|c| c.to_f64())
    }

    /// Largest coefficient magnitude, as `f64`.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl<R: Ring> Add for &Poly<R> {
    type Output = Poly<R>;
    fn add(self, rhs: &Poly<R>) -> Poly<R> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<R: Ring> Sub for &Poly<R> {
    type Output = Poly<R>;
    fn sub(self, rhs: &Poly<R>) -> Poly<R> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<R: Ring> Neg for &Poly<R> {
    type Output = Poly<R>;
    fn neg(self) -> Poly<R> {
        self.scale(&-R::one())
    }
}

impl<R: Ring> Mul for &Poly<R> {
    type Output = Poly<R>;
    fn mul(self, rhs: &Poly<R>) -> Poly<R> {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.mul(b), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<R: Ring> Add for Poly<R> {
    type Output = Poly<R>;
    fn add(self, rhs: Poly<R>) -> Poly<R> {
        &self + &rhs
    }
}

impl<R: Ring> Sub for Poly<R> {
    type Output = Poly<R>;
    fn sub(self, rhs: Poly<R>) -> Poly<R> {
        &self - &rhs
    }
}

impl<R: Ring> Mul for Poly<R> {
    type Output = Poly<R>;
    fn mul(self, rhs: Poly<R>) -> Poly<R> {
        &self * &rhs
    }
}

impl<R: fmt::Debug> fmt::Debug for Poly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c:?}]·{m}")?;
        }
        Ok(())
    }
}
