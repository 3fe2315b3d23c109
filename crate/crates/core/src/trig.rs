//! The real basis `e_k` and complex basis `ẽ_k` of `L²(T²)`, and exact
//! products of real basis functions.
//!
//! `e_k(x) = √2 cos(2πk·x)` for `k ∈ Z²₊` and `√2 sin(2πk·x)` for `k ∈ Z²₋`;
//! `ẽ_k(x) = exp(2πi k·x)`. Complex coordinates are the Fourier
//! coefficients `ξ_k` in `ω = Σ ξ_k ẽ_k`, so that for `k ∈ Z²₊`
//!
//! ```text
//! ξ_k = (x_k + i x_{−k}) / √2,   ξ_{−k} = conj(ξ_k).
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::{Real, Ring};

/// `e_k(x)` at a point of the unit torus.
pub fn basis_eval(k: WaveVector, x: [f64; 2]) -> Result<f64> {
    if k.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let phase = 2.0 * std::f64::consts::PI * (k.k1 as f64 * x[0] + k.k2 as f64 * x[1]);
    Ok(if k.is_plus() {
        std::f64::consts::SQRT_2 * phase.cos()
    } else {
        std::f64::consts::SQRT_2 * phase.sin()
    })
}

/// Real coordinates over `modes` to Fourier coefficients over the same modes.
pub fn real_to_complex<T: Real>(modes: &ModeSet, x: &[T]) -> Result<Vec<Complex<T>>> {
    if x.len() != modes.len() {
        return Err(Error::Dimension {
            expected: modes.len(),
            got: x.len(),
        });
    }
    let h = T::frac_1_sqrt2();
    let neg = modes.negation_permutation();
    let mut out = vec![Complex::new(T::zero(), T::zero()); x.len()];
    for (i, k) in modes.iter().enumerate() {
        if k.is_plus() {
            let z = Complex::new(x[i] * h, x[neg[i]] * h);
            out[i] = z;
            out[neg[i]] = z.conj();
        }
    }
    Ok(out)
}

/// Inverse of [`real_to_complex`]. Only the `Z²₊` half of `xi` is read.
pub fn complex_to_real<T: Real>(modes: &ModeSet, xi: &[Complex<T>]) -> Result<Vec<T>> {
    if xi.len() != modes.len() {
        return Err(Error::Dimension {
            expected: modes.len(),
            got: xi.len(),
        });
    }
    let s = T::SQRT_2();
    let neg = modes.negation_permutation();
    let mut out = vec![T::zero(); xi.len()];
    for (i, k) in modes.iter().enumerate() {
        if k.is_plus() {
            out[i] = s * xi[i].re;
            out[neg[i]] = s * xi[i].im;
        }
    }
    Ok(out)
}

/// `c + Σ_j c_j e_j`, a real trigonometric polynomial in the real basis.
#[derive(Clone, PartialEq)]
pub struct TrigExpansion<R> {
    pub constant: R,
    pub terms: BTreeMap<WaveVector, R>,
}

impl<R: Ring> Default for TrigExpansion<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Ring> TrigExpansion<R> {
    pub fn zero() -> Self {
        TrigExpansion {
            constant: R::zero(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: R) -> Self {
        TrigExpansion {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(k: WaveVector) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
        let mut e = Self::zero();
        e.terms.insert(k, R::one());
        Ok(e)
    }

    pub fn add_term(&mut self, k: WaveVector, c: R) {
        if c.is_zero() {
            return;
        }
        if k.is_zero() {
            self.constant = self.constant.clone() + c;
            return;
        }
        let remove = {
            let slot = self.terms.entry(k).or_insert_with(R::zero);
            *slot = slot.clone() + c;
            slot.is_zero()
        };
        if remove {
            self.terms.remove(&k);
        }
    }

    pub fn coefficient(&self, k: WaveVector) -> R {
        self.terms.get(&k).cloned().unwrap_or_else(R::zero)
    }

    pub fn scale(&self, s: &R) -> Self {
        let mut out = Self::zero();
        out.constant = self.constant.clone() * s.clone();
        for (&k, c) in &self.terms {
            out.add_term(k, c.clone() * s.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant.clone() + other.constant.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    /// `∫_{T²} f g dx`.
    pub fn inner(&self, other: &Self) -> R {
        let mut acc = self.constant.clone() * other.constant.clone();
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (k, c) in &small.terms {
            if let Some(d) = large.terms.get(k) {
                acc = acc + c.clone() * d.clone();
            }
        }
        acc
    }

    /// `∫_{T²} f dx`.
    pub fn integral(&self) -> R {
        self.constant.clone()
    }

    /// Product with a single basis function `e_k`.
    pub fn mul_basis(&self, k: WaveVector) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
        let mut out = Self::zero();
        if !self.constant.is_zero() {
            out.add_term(k, self.constant.clone());
        }
        for (&j, c) in &self.terms {
            for (v, w) in basis_pair_product::<R>(j, k) {
                out.add_term(v, c.clone() * w);
            }
        }
        Ok(out)
    }

    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        let mut s = self.constant.to_f64();
        for (&k, c) in &self.terms {
            s += c.to_f64() * basis_eval(k, x).expect("terms are nonzero");
        }
        s
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> TrigExpansion<S> {
        let mut out = TrigExpansion::<S>::zero();
        out.constant = f(&self.constant);
        for (&k, c) in &self.terms {
            out.add_term(k, f(c));
        }
        out
    }
}

impl<R: fmt::Debug> fmt::Debug for TrigExpansion<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.constant)?;
        for (k, c) in &self.terms {
            write!(f, " + {c:?}·e{k}")?;
        }
        Ok(())
    }
}

/// `e_a · e_b` as at most two terms `(v, w)` meaning `w·e_v` (or the constant
/// `w` when `v = 0`).
fn basis_pair_product<R: Ring>(a: WaveVector, b: WaveVector) -> Vec<(WaveVector, R)> {
    // 2 f(a) g(b) in terms of cos/sin of a±b, each with sign.
    let (cos_out, terms): (bool, [(WaveVector, i64); 2]) = match (a.is_plus(), b.is_plus()) {
        (true, true) => (true, [(a + b, 1), (a - b, 1)]),
        (false, false) => (true, [(a - b, 1), (a + b, -1)]),
        (false, true) => (false, [(a + b, 1), (a - b, 1)]),
        (true, false) => (false, [(a + b, 1), (a - b, -1)]),
    };
    let mut out = Vec::with_capacity(2);
    for (v, sign) in terms {
        if cos_out {
            if v.is_zero() {
                out.push((v, R::from_int(sign)));
            } else {
                out.push((v.canonical(), R::from_int(sign) * R::frac_1_sqrt2()));
            }
        } else if !v.is_zero() {
            // sin(v) = e_v/√2 on Z²₋ and −e_{−v}/√2 on Z²₊.
            let s = if v.is_plus() { -sign } else { sign };
            out.push((-v.canonical(), R::from_int(s) * R::frac_1_sqrt2()));
        }
    }
    out
}

/// Expansion of `∏ e_{k_i}` for 2 to 4 factors.
pub fn product_expand<R: Ring>(factors: &[WaveVector]) -> Result<TrigExpansion<R>> {
    if !(2..=4).contains(&factors.len()) {
        return Err(Error::FactorCount(factors.len()));
    }
    let mut acc = TrigExpansion::basis(factors[0])?;
    for &k in &factors[1..] {
        acc = acc.mul_basis(k)?;
    }
    Ok(acc)
}

/// `∫_{T²} ∏ e_{k_i} dx` for 2 to 4 factors.
pub fn integral_product<R: Ring>(factors: &[WaveVector]) -> Result<R> {
    if !(2..=4).contains(&factors.len()) {
        return Err(Error::FactorCount(factors.len()));
    }
    for k in factors {
        if k.is_zero() {
            return Err(Error::ZeroWaveVector);
        }
    }
    if factors.len() == 2 {
        return Ok(if factors[0] == factors[1] {
            R::one()
        } else {
            R::zero()
        });
    }
    let split = factors.len() / 2;
    let left = if split == 1 {
        TrigExpansion::basis(factors[0])?
    } else {
        product_expand(&factors[..split])?
    };
    let right = product_expand(&factors[split..])?;
    Ok(left.inner(&right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::scalar::Exact;

    fn w(a: i64, b: i64) -> WaveVector {
        WaveVector::new(a, b)
    }

    #[test]
    fn eval_examples() {
        assert!((basis_eval(w(1, 0), [0.0, 0.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((basis_eval(w(0, -1), [0.0, 0.25]).unwrap() + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mixed_product_has_expected_minus_term() {
        let k = w(1, 0);
        let l = w(0, 1);
        let p: TrigExpansion<Exact> = product_expand(&[k, -l]).unwrap();
        assert_eq!(p.coefficient(-(k + l)), Exact::frac_1_sqrt2());
    }

    #[test]
    fn squares_have_unit_mean() {
        for k in [w(1, 0), w(-2, 3), w(0, -1)] {
            let p: TrigExpansion<Exact> = product_expand(&[k, k]).unwrap();
            assert_eq!(p.constant, Exact::one());
            assert_eq!(p.terms.len(), 1);
        }
    }

    #[test]
    fn four_factor_delta_example() {
        let v: Exact = integral_product(&[w(1, 1), w(1, -1), w(1, 0), w(1, 0)]).unwrap();
        assert_eq!(v, Exact::from_ratio(1, 2));
        assert!(integral_product::<f64>(&[w(1, 0); 5]).is_err());
    }
}
