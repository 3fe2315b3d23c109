//! Exact second moments of increments `R_{l,m}(M) − R_{l,m}(N)`.
//!
//! With `X_k = ⟨ω, e_k e_{−l}⟩`, `Y_k = ⟨ω, e_k e_{−m}⟩` and
//! `c_k = C_{k,l} C_{k,m}`, Isserlis–Wick gives
//!
//! ```text
//! E[(Σ c_k (X_k Y_k − δ))²] = S₁ + S₂ + S₃,
//! S₁ = (Σ_k c_k (E[X_k Y_k] − δ))²,
//! S₂ = Σ_{k,k'} c_k c_k' E[X_k X_k'] E[Y_k Y_k'],
//! S₃ = Σ_{k,k'} c_k c_k' E[X_k Y_k'] E[Y_k X_k'].
//! ```
//!
//! The sums run over `k` in the annulus `r_inner < |k| <= r_outer`.

use std::collections::HashMap;

use serde::Serialize;

use crate::coefficients::{c_kl, Gamma};
use crate::error::{Error, Result};
use crate::gaussian::{pair_covariance, wick_moment};
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::Ring;
use crate::trig::{product_expand, TrigExpansion};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RVariance<R> {
    pub s1: R,
    pub s2: R,
    pub s3: R,
    pub total: R,
}

/// One noise mode's contribution `c_k (X_k Y_k − δ)`.
#[derive(Clone, Debug)]
pub struct RTerm<R> {
    pub k: WaveVector,
    pub c: R,
    pub x: TrigExpansion<R>,
    pub y: TrigExpansion<R>,
}

/// Nonzero terms of `R_{l,m}(r_outer) − R_{l,m}(r_inner)`.
pub fn r_terms<R: Ring>(
    l: WaveVector,
    m: WaveVector,
    r_inner: f64,
    r_outer: f64,
    gamma: Gamma,
) -> Result<Vec<RTerm<R>>> {
    if l.is_zero() || m.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    if !(r_inner < r_outer) {
        return Err(Error::invalid("radii", "need r_inner < r_outer"));
    }
    let outer = ModeSet::ball_modes(r_outer)?;
    let inner = if r_inner >= 1.0 {
        Some(ModeSet::ball_modes(r_inner)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for k in outer.iter() {
        if inner.as_ref().is_some_and(|s| s.contains(k)) {
            continue;
        }
        let c = c_kl::<R>(k, l, gamma)? * c_kl::<R>(k, m, gamma)?;
        if c.is_zero() {
            continue;
        }
        out.push(RTerm {
            k,
            c,
            x: product_expand(&[k, -l])?,
            y: product_expand(&[k, -m])?,
        });
    }
    Ok(out)
}

/// Index from mode to `(term index, coefficient)`.
fn support_index<R: Ring>(
    terms: &[RTerm<R>],
    pick: impl Fn(&RTerm<R>) -> &TrigExpansion<R>,
) -> HashMap<WaveVector, Vec<(usize, R)>> {
    let mut idx: HashMap<WaveVector, Vec<(usize, R)>> = HashMap::new();
    for (i, t) in terms.iter().enumerate() {
        for (&j, c) in &pick(t).terms {
            idx.entry(j).or_default().push((i, c.clone()));
        }
    }
    idx
}

/// Covariances `E[f · g_k']` for all `k'` with nonzero overlap.
fn overlaps<R: Ring>(
    f: &TrigExpansion<R>,
    index: &HashMap<WaveVector, Vec<(usize, R)>>,
) -> Vec<(usize, R)> {
    let mut acc: Vec<(usize, R)> = Vec::new();
    for (j, c) in &f.terms {
        if let Some(list) = index.get(j) {
            for (i, d) in list {
                match acc.iter_mut().find(|(a, _)| a == i) {
                    Some(slot) => slot.1 = slot.1.clone() + c.clone() * d.clone(),
                    None => acc.push((*i, c.clone() * d.clone())),
                }
            }
        }
    }
    acc
}

/// `E[(R_{l,m}(r_outer) − R_{l,m}(r_inner))²]` by sparse enumeration of the
/// Wick pairings.
pub fn r_variance_radii<R: Ring>(
    l: WaveVector,
    m: WaveVector,
    r_inner: f64,
    r_outer: f64,
    gamma: Gamma,
) -> Result<RVariance<R>> {
    let terms = r_terms::<R>(l, m, r_inner, r_outer, gamma)?;
    let delta = if l == m { R::one() } else { R::zero() };
    let xi = support_index(&terms, |t| &t.x);
    let yi = support_index(&terms, |t| &t.y);

    let mut inner = R::zero();
    let mut s2 = R::zero();
    let mut s3 = R::zero();
    for t in &terms {
        inner = inner + t.c.clone() * (pair_covariance(&t.x, &t.y) - delta.clone());
        let xx = overlaps(&t.x, &xi);
        let yy = overlaps(&t.y, &yi);
        for (i, a) in &xx {
            if let Some((_, b)) = yy.iter().find(|(j, _)| j == i) {
                s2 = s2 + t.c.clone() * terms[*i].c.clone() * a.clone() * b.clone();
            }
        }
        let xy = overlaps(&t.x, &yi);
        let yx = overlaps(&t.y, &xi);
        for (i, a) in &xy {
            if let Some((_, b)) = yx.iter().find(|(j, _)| j == i) {
                s3 = s3 + t.c.clone() * terms[*i].c.clone() * a.clone() * b.clone();
            }
        }
    }
    let s1 = inner.clone() * inner;
    let total = s1.clone() + s2.clone() + s3.clone();
    Ok(RVariance { s1, s2, s3, total })
}

/// [`r_variance_radii`] on the noise sets `Γ_N ⊂ Γ_M` with `Γ_N = Ball(θN)`.
pub fn r_variance_exact<R: Ring>(
    l: WaveVector,
    m: WaveVector,
    n: i64,
    big_m: i64,
    theta: f64,
    gamma: Gamma,
) -> Result<RVariance<R>> {
    if n >= big_m {
        return Err(Error::invalid("N, M", "need N < M"));
    }
    crate::coefficients::check_theta(theta)?;
    r_variance_radii(l, m, theta * n as f64, theta * big_m as f64, gamma)
}

/// The same quantity by the full double sum of 4th-order Wick moments.
pub fn r_variance_bruteforce<R: Ring>(
    l: WaveVector,
    m: WaveVector,
    r_inner: f64,
    r_outer: f64,
    gamma: Gamma,
) -> Result<R> {
    let terms = r_terms::<R>(l, m, r_inner, r_outer, gamma)?;
    let delta = if l == m { R::one() } else { R::zero() };
    let mut acc = R::zero();
    for a in &terms {
        let ea = wick_moment(&[&a.x, &a.y])?;
        for b in &terms {
            let eb = wick_moment(&[&b.x, &b.y])?;
            let e4 = wick_moment(&[&a.x, &a.y, &b.x, &b.y])?;
            let v = e4 - delta.clone() * ea.clone() - delta.clone() * eb + delta.clone() * delta.clone();
            acc = acc + a.c.clone() * b.c.clone() * v;
        }
    }
    Ok(acc)
}

/// Modes on which the increment depends.
pub fn r_support<R: Ring>(terms: &[RTerm<R>]) -> Vec<WaveVector> {
    let mut v: Vec<WaveVector> = terms
        .iter()
        .flat_map(|t| t.x.terms.keys().chain(t.y.terms.keys()).copied())
        .collect();
    v.sort();
    v.dedup();
    v
}
