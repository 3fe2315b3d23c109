//! The pairings `⟨σ_k·∇ω, DF⟩` and the operator
//! `L⁰_N F = (1/2) Σ_{k∈Γ_N} ⟨σ_k·∇ω, D⟨σ_k·∇ω, DF⟩⟩` on cylinder functions.

use super::hermite::MultiIndex;
use super::poly::Poly;
use crate::coefficients::{c_kl, Gamma};
use crate::error::{Error, Result};
use crate::lattice::{ModeSet, WaveVector};
use crate::scalar::Ring;
use crate::trig::{product_expand, TrigExpansion};

/// `⟨ω, e_a e_b⟩` as a linear cylinder function.
pub fn product_functional<R: Ring>(a: WaveVector, b: WaveVector) -> Result<Poly<R>> {
    Ok(Poly::linear(&product_expand::<R>(&[a, b])?))
}

/// `⟨σ_k·∇ω, e_l⟩ = −√2π C_{k,l} ⟨ω, e_k e_{−l}⟩`.
pub fn pairing_factor<R: Ring>(k: WaveVector, l: WaveVector, gamma: Gamma) -> Result<Poly<R>> {
    let c: R = c_kl(k, l, gamma)?;
    if c.is_zero() {
        return Ok(Poly::zero());
    }
    let s = -(R::sqrt2() * R::pi() * c);
    Ok(product_functional::<R>(k, -l)?.scale(&s))
}

fn pairing_with<R: Ring>(
    k: WaveVector,
    f: &Poly<R>,
    factor: impl Fn(WaveVector) -> Result<Poly<R>>,
) -> Result<Poly<R>> {
    if k.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let mut out = Poly::zero();
    for l in f.support() {
        let v = factor(l)?;
        if v.is_zero() {
            continue;
        }
        out = &out + &(&f.derivative(l) * &v);
    }
    Ok(out)
}

/// `⟨σ_k·∇ω, DF⟩ = Σ_l (∂_l f) ⟨σ_k·∇ω, e_l⟩` with `ω` untruncated, so
/// the support grows to `Λ ± k`.
pub fn dirichlet_pairing<R: Ring>(k: WaveVector, f: &Poly<R>, gamma: Gamma) -> Result<Poly<R>> {
    pairing_with(k, f, |l| pairing_factor(k, l, gamma))
}

/// `⟨σ_k·∇(Π_N ω), DF⟩`: the factor `⟨ω, e_k e_{−l}⟩` only sees modes of
/// `Box(N)`.
pub fn dirichlet_pairing_truncated<R: Ring>(
    k: WaveVector,
    f: &Poly<R>,
    gamma: Gamma,
    n: i64,
) -> Result<Poly<R>> {
    let modes = ModeSet::box_modes(n)?;
    pairing_with(k, f, |l| Ok(pairing_factor(k, l, gamma)?.restrict(&modes)))
}

/// `Σ_{k∈Ball(N)} E_μ[⟨σ_k·∇ω, DF⟩²]`, exact.
pub fn gradient_sum_variance<R: Ring>(f: &Poly<R>, n: i64, gamma: Gamma) -> Result<R> {
    let ball = ModeSet::ball_modes(n as f64)?;
    let mut acc = R::zero();
    for k in ball.iter() {
        let p = dirichlet_pairing(k, f, gamma)?;
        acc = acc + p.gaussian_inner(&p);
    }
    Ok(acc)
}

/// `π²·(a_N − a_{N₀})·Σ_l |l|² E[(∂_l f)²]`, the large-`|k|` form of the
/// per-shell contributions to [`gradient_sum_variance`].
pub fn gradient_tail_closed_form<R: Ring>(f: &Poly<R>, a_diff: R) -> R {
    let mut s = R::zero();
    for l in f.support() {
        let d = f.derivative(l);
        s = s + R::from_int(l.norm2()) * d.gaussian_inner(&d);
    }
    R::pi() * R::pi() * a_diff * s
}

fn gamma_set(n: i64, theta: f64) -> Result<ModeSet> {
    ModeSet::gamma_modes(n, theta)
}

/// `L⁰_N F` by the explicit two-sum formula over `k ∈ Γ_N = Ball(θN)`.
pub fn l0_apply<R: Ring>(f: &Poly<R>, n: i64, theta: f64, gamma: Gamma) -> Result<Poly<R>> {
    l0_apply_on(f, &gamma_set(n, theta)?, gamma)
}

/// [`l0_apply`] with an explicit set of noise modes.
pub fn l0_apply_on<R: Ring>(f: &Poly<R>, ks: &ModeSet, gamma: Gamma) -> Result<Poly<R>> {
    let support: Vec<WaveVector> = f.support().into_iter().collect();
    let pi2 = R::pi() * R::pi();
    let first: Vec<Poly<R>> = support.iter().map(|&l| f.derivative(l)).collect();
    let mut out = Poly::zero();
    for k in ks.iter() {
        let cs: Vec<R> = support
            .iter()
            .map(|&l| c_kl(k, l, gamma))
            .collect::<Result<_>>()?;
        let xs: Vec<Poly<R>> = support
            .iter()
            .map(|&l| product_functional(k, -l))
            .collect::<Result<_>>()?;
        for (i, &l) in support.iter().enumerate() {
            if cs[i].is_zero() {
                continue;
            }
            for (j, &m) in support.iter().enumerate() {
                if cs[j].is_zero() {
                    continue;
                }
                let flm = first[i].derivative(m);
                if flm.is_zero() {
                    continue;
                }
                let w = pi2.clone() * cs[i].clone() * cs[j].clone();
                out = &out + &(&flm * &(&xs[i] * &xs[j])).scale(&w);
            }
            let ek2el = Poly::linear(&product_expand::<R>(&[k, k, l])?);
            let w = -(pi2.clone() * cs[i].clone() * cs[i].clone());
            out = &out + &(&first[i] * &ek2el).scale(&w);
        }
    }
    Ok(out)
}

/// `(1/2) Σ_{k∈Γ_N} ⟨σ_k·∇ω, D⟨σ_k·∇ω, DF⟩⟩` by composing pairings.
pub fn l0_iterated<R: Ring>(f: &Poly<R>, n: i64, theta: f64, gamma: Gamma) -> Result<Poly<R>> {
    let half = R::from_ratio(1, 2);
    let mut out = Poly::zero();
    for k in gamma_set(n, theta)?.iter() {
        let once = dirichlet_pairing(k, f, gamma)?;
        out = &out + &dirichlet_pairing(k, &once, gamma)?;
    }
    Ok(out.scale(&half))
}

/// `R_{l,m} = Σ_{k∈ks} C_{k,l} C_{k,m} (⟨ω, e_k e_{−l}⟩⟨ω, e_k e_{−m}⟩ − δ_{l,m})`.
pub fn r_lm<R: Ring>(l: WaveVector, m: WaveVector, ks: &ModeSet, gamma: Gamma) -> Result<Poly<R>> {
    let mut out = Poly::zero();
    let delta = if l == m { R::one() } else { R::zero() };
    for k in ks.iter() {
        let c = c_kl::<R>(k, l, gamma)? * c_kl::<R>(k, m, gamma)?;
        if c.is_zero() {
            continue;
        }
        let x = product_functional::<R>(k, -l)?;
        let y = product_functional::<R>(k, -m)?;
        let z = &(&x * &y) - &Poly::constant(delta.clone());
        out = &out + &z.scale(&c);
    }
    Ok(out)
}

/// `Σ_{k∈ks} |k|^{−2(γ−1)}`; equals `β_N` at `γ = 2`.
pub fn log_constant<R: Ring>(ks: &ModeSet, gamma: Gamma) -> Result<R> {
    let mut acc = R::zero();
    for k in ks.iter() {
        acc = acc + R::inv_pow(k.norm2(), gamma.value() - 1.0)?;
    }
    Ok(acc)
}

/// `L⁰_N H_n = I_N − C_n·β_N·H_n`.
#[derive(Clone, Debug)]
pub struct ChaosDecomposition<R> {
    /// `I_N = π² Σ_{l,m} ∂_{l,m}H_n · R_{l,m}(N)`.
    pub convergent_part: Poly<R>,
    /// `C_n = (1/2)π² Σ n_l |l|²`.
    pub eigen_coefficient: R,
    /// `β_N` (for `γ ≠ 2`, `Σ_{Γ_N} |k|^{−2(γ−1)}`).
    pub log_constant: R,
    pub hermite: Poly<R>,
}

impl<R: Ring> ChaosDecomposition<R> {
    /// `I_N − C_n β_N H_n`.
    pub fn reconstruct(&self) -> Poly<R> {
        let s = self.eigen_coefficient.clone() * self.log_constant.clone();
        &self.convergent_part - &self.hermite.scale(&s)
    }
}

pub fn eigen_coefficient<R: Ring>(n: &MultiIndex) -> R {
    R::pi() * R::pi() * R::from_ratio(n.weighted_order(), 2)
}

pub fn l0_decompose<R: Ring>(
    n: &MultiIndex,
    big_n: i64,
    theta: f64,
    gamma: Gamma,
) -> Result<ChaosDecomposition<R>> {
    let ks = gamma_set(big_n, theta)?;
    let h = n.hermite_poly::<R>()?;
    let support: Vec<WaveVector> = h.support().into_iter().collect();
    let pi2 = R::pi() * R::pi();
    let mut conv = Poly::zero();
    for &l in &support {
        let fl = h.derivative(l);
        for &m in &support {
            let flm = fl.derivative(m);
            if flm.is_zero() {
                continue;
            }
            let r = r_lm::<R>(l, m, &ks, gamma)?;
            conv = &conv + &(&flm * &r).scale(&pi2);
        }
    }
    Ok(ChaosDecomposition {
        convergent_part: conv,
        eigen_coefficient: eigen_coefficient(n),
        log_constant: log_constant(&ks, gamma)?,
        hermite: h,
    })
}

/// Linear functional `⟨ω, f⟩` for a trigonometric expansion.
pub fn linear_functional<R: Ring>(f: &TrigExpansion<R>) -> Poly<R> {
    Poly::linear(f)
}


#[cfg(test)]
mod identity_tests {
    use super::*;
    use crate::scalar::Exact;

    fn w(a: i64, b: i64) -> WaveVector {
        WaveVector::new(a, b)
    }

    #[test]
    fn explicit_formula_matches_iterated_pairings() {
        let x = Poly::<Exact>::var(w(1, 0));
        let y = Poly::<Exact>::var(w(1, -1));
        let f = &(&(&x * &x) * &y) + &y.scale(&Exact::from_int(3));
        let a = l0_apply(&f, 6, 1.0 / 3.0, Gamma::TWO).unwrap();
        let b = l0_iterated(&f, 6, 1.0 / 3.0, Gamma::TWO).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decomposition_reconstructs() {
        let n = MultiIndex::new([(w(1, 0), 1), (w(0, 2), 1)]).unwrap();
        let d = l0_decompose::<Exact>(&n, 6, 1.0 / 3.0, Gamma::TWO).unwrap();
        let l0 = l0_apply(&d.hermite, 6, 1.0 / 3.0, Gamma::TWO).unwrap();
        assert_eq!(l0, d.reconstruct());
        assert_eq!(d.log_constant, Exact::from_int(7));
    }
}
