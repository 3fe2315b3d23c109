//! The standard Gaussian measure `μ_N` on `H_N`: sampling, Monte Carlo
//! estimates with standard errors, and exact Isserlis–Wick moments.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galerkin::SpectralField;
use crate::lattice::ModeSet;
use crate::rng::{stream, Purpose, Stream};
use crate::scalar::{Real, Ring};
use crate::trig::TrigExpansion;

/// i.i.d. standard normal coordinates `⟨ω, e_k⟩`.
pub fn sample_white_noise<T: Real>(modes: &Arc<ModeSet>, rng: &mut Stream) -> SpectralField<T> {
    let coeffs = (0..modes.len())
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            T::of(g)
        })
        .collect();
    SpectralField::new(modes.clone(), coeffs).expect("finite normals")
}

/// Sample mean with its standard error `s/√n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// `|mean − target| / stderr`, or 0/∞ when the standard error vanishes.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, target: f64, k_se: f64) -> bool {
        (self.mean - target).abs() <= k_se * self.stderr + 1e-12 * target.abs().max(1.0)
    }
}

/// Mergeable running mean/variance (Chan et al. pairwise update).
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr: (var.max(0.0) / self.n as f64).sqrt(),
            n_samples: self.n,
        }
    }
}

/// Samples drawn per stream in parallel estimators; fixed so that results do
/// not depend on the thread count.
pub const CHUNK: usize = 2048;

/// Estimates `E[f]` where `f` draws its own randomness from the stream it is
/// given. Sample `i` lives in chunk `i / CHUNK`, which owns stream
/// `(seed, purpose, chunk)`.
pub fn mc_estimate_with<F>(n: usize, seed: u64, purpose: Purpose, f: F) -> Result<McEstimate>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    mc_estimate_multi(n, seed, purpose, 1, |rng, out| out[0] = f(rng)).map(|v| v[0])
}

/// Several estimates sharing each sample (`f` fills `width` values).
pub fn mc_estimate_multi<F>(
    n: usize,
    seed: u64,
    purpose: Purpose,
    width: usize,
    f: F,
) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut Stream, &mut [f64]) + Sync,
{
    if n < 2 {
        return Err(Error::invalid("n", "needs at least 2 samples"));
    }
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Result<Vec<Moments>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, purpose, c as u64);
            let mut m = vec![Moments::default(); width];
            let mut buf = vec![0.0; width];
            let count = CHUNK.min(n - c * CHUNK);
            for _ in 0..count {
                f(&mut rng, &mut buf);
                for (acc, &x) in m.iter_mut().zip(&buf) {
                    if !x.is_finite() {
                        return Err(Error::NonFinite(format!("Monte Carlo sample in chunk {c}")));
                    }
                    acc.push(x);
                }
            }
            Ok(m)
        })
        .collect();
    let mut total = vec![Moments::default(); width];
    for p in partial {
        for (t, m) in total.iter_mut().zip(p?) {
            t.merge(&m);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// `E_μ[functional(ω)]` over white noise on `modes`.
pub fn mc_estimate<T, F>(modes: &Arc<ModeSet>, functional: F, n: usize, seed: u64) -> Result<McEstimate>
where
    T: Real,
    F: Fn(&SpectralField<T>) -> f64 + Sync,
{
    mc_estimate_with(n, seed, Purpose::MonteCarlo, |rng| {
        functional(&sample_white_noise::<T>(modes, rng))
    })
}

/// Covariance of two linear functionals `ω ↦ ⟨ω, f⟩`; constants pair with
/// nothing since white noise has zero mean.
pub fn pair_covariance<R: Ring>(f: &TrigExpansion<R>, g: &TrigExpansion<R>) -> R {
    let mut acc = R::zero();
    for (k, c) in &f.terms {
        if let Some(d) = g.terms.get(k) {
            acc = acc + c.clone() * d.clone();
        }
    }
    acc
}

/// All perfect matchings of `0..n` (`n` even).
pub fn pair_partitions(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = rest[0];
        for i in 1..rest.len() {
            let b = rest[i];
            let remaining: Vec<usize> = rest[1..]
                .iter()
                .copied()
                .filter(|&x| x != b)
                .collect();
            cur.push((a, b));
            rec(&remaining, cur, out);
            cur.pop();
        }
    }
    let items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    rec(&items, &mut Vec::new(), &mut out);
    out
}

/// `E_μ[∏ ⟨ω, f_i⟩]` for 2, 4 or 6 linear functionals.
pub fn wick_moment<R: Ring>(functionals: &[&TrigExpansion<R>]) -> Result<R> {
    let n = functionals.len();
    if n == 0 || n % 2 == 1 || n > 6 {
        return Err(Error::MomentOrder(n));
    }
    let mut cov = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            cov[i][j] = pair_covariance(functionals[i], functionals[j]);
        }
    }
    let mut total = R::zero();
    for part in pair_partitions(n) {
        let mut p = R::one();
        for (a, b) in part {
            p = p * cov[a][b].clone();
        }
        total = total + p;
    }
    Ok(total)
}
