//! Scalar abstractions.
//!
//! Two tiers are used throughout the crate:
//!
//! * [`Ring`] is the minimal algebra needed by the symbolic parts (trigonometric
//!   products, cylinder polynomials, Gaussian pairings). It is implemented for
//!   `f32`, `f64` and for the exact number type [`Exact`].
//! * [`Real`] adds the floating-point operations needed by time stepping and
//!   Monte Carlo; it is implemented for `f32` and `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FloatConst, FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Commutative ring containing the rationals, `√2` and `π`.
pub trait Ring:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn sqrt2() -> Self;
    fn pi() -> Self;
    fn to_f64(&self) -> f64;

    /// `n2^(-exponent)` for a positive integer `n2`.
    ///
    /// Exact rings only support integer exponents.
    fn inv_pow(n2: i64, exponent: f64) -> Result<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn frac_1_sqrt2() -> Self {
        Self::sqrt2() * Self::from_ratio(1, 2)
    }
}

/// Floating point scalar used by numerical integration and sampling.
pub trait Real:
    Ring
    + Copy
    + num_traits::Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + fmt::Display
    + Default
{
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }
}

macro_rules! impl_float_ring {
    ($t:ty) => {
        impl Ring for $t {
            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }
            fn sqrt2() -> Self {
                <$t>::SQRT_2()
            }
            fn pi() -> Self {
                <$t>::PI()
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn inv_pow(n2: i64, exponent: f64) -> Result<Self> {
                if n2 <= 0 {
                    return Err(Error::invalid("n2", "must be positive"));
                }
                let base = n2 as f64;
                let v = if exponent.fract() == 0.0 && exponent.abs() < 64.0 {
                    base.powi(-(exponent as i32))
                } else {
                    base.powf(-exponent)
                };
                Ok(v as $t)
            }
            fn frac_1_sqrt2() -> Self {
                <$t>::FRAC_1_SQRT_2()
            }
        }
        impl Real for $t {}
    };
}

impl_float_ring!(f32);
impl_float_ring!(f64);

/// Key of a monomial `π^pi · √2^(sqrt2 as u8)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct SurdKey {
    pi: u16,
    sqrt2: bool,
}

/// Exact element of `Q(√2)[π]`, stored as rational multiples of `√2^a π^b`
/// with `a ∈ {0, 1}`.
///
/// Equality is structural on the normal form, so it decides equality of the
/// represented real numbers (π is transcendental).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Exact {
    terms: BTreeMap<SurdKey, BigRational>,
}

impl Exact {
    pub fn rational(num: i64, den: i64) -> Self {
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        Self::from_term(SurdKey { pi: 0, sqrt2: false }, q)
    }

    pub fn from_big_rational(q: BigRational) -> Self {
        Self::from_term(SurdKey { pi: 0, sqrt2: false }, q)
    }

    fn from_term(key: SurdKey, q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(key, q);
        }
        Exact { terms }
    }

    /// The rational value, if the number has no `√2` or `π` part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self
                .terms
                .get(&SurdKey { pi: 0, sqrt2: false })
                .cloned(),
            _ => None,
        }
    }

    /// Coefficient of `√2^sqrt2 · π^pi`.
    pub fn coefficient(&self, pi: u16, sqrt2: bool) -> BigRational {
        self.terms
            .get(&SurdKey { pi, sqrt2 })
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn accumulate(&mut self, key: SurdKey, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let remove = {
            let slot = self.terms.entry(key).or_insert_with(BigRational::zero);
            *slot += q;
            slot.is_zero()
        };
        if remove {
            self.terms.remove(&key);
        }
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (key, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({q})")?;
            if key.sqrt2 {
                write!(f, "·√2")?;
            }
            match key.pi {
                0 => {}
                1 => write!(f, "·π")?,
                p => write!(f, "·π^{p}")?,
            }
        }
        Ok(())
    }
}

impl Add for Exact {
    type Output = Exact;
    fn add(mut self, rhs: Exact) -> Exact {
        for (k, q) in rhs.terms {
            self.accumulate(k, q);
        }
        self
    }
}

impl Sub for Exact {
    type Output = Exact;
    fn sub(self, rhs: Exact) -> Exact {
        self + (-rhs)
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(mut self) -> Exact {
        for q in self.terms.values_mut() {
            *q = -q.clone();
        }
        self
    }
}

impl Mul for Exact {
    type Output = Exact;
    fn mul(self, rhs: Exact) -> Exact {
        let mut out = Exact::default();
        let two = BigRational::from_integer(BigInt::from(2));
        for (ka, qa) in &self.terms {
            for (kb, qb) in &rhs.terms {
                let mut q = qa * qb;
                if ka.sqrt2 && kb.sqrt2 {
                    q *= &two;
                }
                let key = SurdKey {
                    pi: ka.pi + kb.pi,
                    sqrt2: ka.sqrt2 ^ kb.sqrt2,
                };
                out.accumulate(key, q);
            }
        }
        out
    }
}

impl Zero for Exact {
    fn zero() -> Self {
        Exact::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Exact {
    fn one() -> Self {
        Exact::rational(1, 1)
    }
}

impl Ring for Exact {
    fn from_ratio(num: i64, den: i64) -> Self {
        Exact::rational(num, den)
    }
    fn sqrt2() -> Self {
        Self::from_term(SurdKey { pi: 0, sqrt2: true }, BigRational::one())
    }
    fn pi() -> Self {
        Self::from_term(SurdKey { pi: 1, sqrt2: false }, BigRational::one())
    }
    fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, q)| {
                let mut v = q.to_f64().unwrap_or(f64::NAN);
                if k.sqrt2 {
                    v *= std::f64::consts::SQRT_2;
                }
                v * std::f64::consts::PI.powi(k.pi as i32)
            })
            .sum()
    }
    fn inv_pow(n2: i64, exponent: f64) -> Result<Self> {
        if n2 <= 0 {
            return Err(Error::invalid("n2", "must be positive"));
        }
        if exponent.fract() != 0.0 {
            return Err(Error::InexactExponent(exponent));
        }
        let e = exponent as i32;
        let base = BigRational::from_integer(BigInt::from(n2));
        let p = num_traits::pow(base, e.unsigned_abs() as usize);
        let q = if e >= 0 { p.recip() } else { p };
        Ok(Exact::from_big_rational(q))
    }
}

impl Exact {
    /// True when the number is a nonnegative rational.
    pub fn is_nonnegative_rational(&self) -> bool {
        self.as_rational().is_some_and(|q| !q.is_negative())
    }
}
