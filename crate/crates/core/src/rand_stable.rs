//! Seeded per-trajectory random streams and the noise samplers.
//!
//! Scale conventions: the symmetric stable law has characteristic function
//! `exp(-|k|^beta)` and the one-sided stable law has Laplace transform
//! `exp(-lambda^alpha)`. The tempered sampler draws increments of the clock
//! with Laplace exponent `(lambda + mu)^alpha - mu^alpha` per unit
//! operational time.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_distr::{Exp1, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{domain, Result};

/// splitmix64 finalizer.
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic random stream identified by `(master_seed, stream_index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    rng: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let key = avalanche(avalanche(master_seed) ^ stream_index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(key),
        }
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    fn open_uniform(&mut self) -> f64 {
        loop {
            let u = self.rng.gen::<f64>();
            if u > 0.0 {
                return u;
            }
        }
    }

    #[inline]
    fn exp1(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }
}

pub fn make_stream(master_seed: u64, stream_index: u64) -> RngStream {
    RngStream::new(master_seed, stream_index)
}

/// Parameters of the tempered one-sided stable waiting-time law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperedStableParams {
    alpha: f64,
    mu: f64,
}

impl TemperedStableParams {
    /// `0 < alpha <= 1`, `mu >= 0`.
    pub fn new(alpha: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(domain(format!("mu must be finite and >= 0, got {mu}")));
        }
        Ok(Self { alpha, mu })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `alpha == 1`: the clock is deterministic, `T(s) = s`.
    pub fn is_deterministic(&self) -> bool {
        self.alpha == 1.0
    }
}

#[inline]
pub fn sample_gaussian(s: &mut RngStream) -> f64 {
    s.rng.sample(StandardNormal)
}

/// Symmetric `beta`-stable draw with characteristic function
/// `exp(-|k|^beta)` (Chambers-Mallows-Stuck).
pub fn sample_symmetric_stable(s: &mut RngStream, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(domain(format!("beta must lie in (0, 2), got {beta}")));
    }
    Ok(symmetric_stable_unchecked(s, beta))
}

#[inline]
pub(crate) fn symmetric_stable_unchecked(s: &mut RngStream, beta: f64) -> f64 {
    let v = PI * (s.open_uniform() - 0.5);
    if beta == 1.0 {
        return v.tan();
    }
    let w = s.exp1();
    let cos_v = v.cos();
    (beta * v).sin() / cos_v.powf(1.0 / beta) * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta)
}

/// Positive `alpha`-stable draw with Laplace transform `exp(-lambda^alpha)`
/// (Kanter's representation).
pub fn sample_onesided_stable(s: &mut RngStream, alpha: f64) -> Result<f64> {
    check_onesided(alpha)?;
    Ok(ln_onesided_unchecked(s, alpha).exp())
}

fn check_onesided(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("one-sided stable index must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Logarithm of a one-sided stable draw; the log form keeps small `alpha`
/// (exponents up to `1/alpha`) away from overflow.
#[inline]
pub(crate) fn ln_onesided_unchecked(s: &mut RngStream, alpha: f64) -> f64 {
    let u = PI * s.open_uniform();
    let w = s.exp1();
    let inv = 1.0 / alpha;
    (alpha * u).sin().ln() - inv * u.sin().ln()
        + (1.0 - alpha) * inv * (((1.0 - alpha) * u).sin().ln() - w.ln())
}

/// Draw of the tempered clock increment over operational time `ds`:
/// Laplace transform `exp(-ds((lambda + mu)^alpha - mu^alpha))`.
///
/// Proposes `ds^(1/alpha) * S` from the untempered law and accepts with
/// probability `exp(-mu * Y)`; the overall acceptance rate is
/// `exp(-ds * mu^alpha)`.
pub fn sample_tempered_onesided(s: &mut RngStream, p: &TemperedStableParams, ds: f64) -> Result<f64> {
    sample_tempered_counted(s, p, ds).map(|(y, _)| y)
}

/// As [`sample_tempered_onesided`], also returning how many proposals the
/// rejection step consumed.
pub fn sample_tempered_counted(s: &mut RngStream, p: &TemperedStableParams, ds: f64) -> Result<(f64, u64)> {
    check_onesided(p.alpha)?;
    if !(ds > 0.0) || !ds.is_finite() {
        return Err(domain(format!("ds must be finite and > 0, got {ds}")));
    }
    Ok(tempered_unchecked(s, p.alpha, p.mu, ds.ln() / p.alpha))
}

/// Returns the accepted draw and the number of proposals it took.
#[inline]
pub(crate) fn tempered_unchecked(s: &mut RngStream, alpha: f64, mu: f64, ln_scale: f64) -> (f64, u64) {
    let mut proposals = 0;
    loop {
        proposals += 1;
        let y = (ln_scale + ln_onesided_unchecked(s, alpha)).exp();
        if mu == 0.0 {
            return (y, proposals);
        }
        // Accept with probability exp(-mu y): compare against an Exp(1) draw.
        if mu * y <= s.exp1() {
            return (y, proposals);
        }
    }
}

/// Draw of the isotropic unit `beta`-stable vector in `dim` dimensions,
/// written into `out`. One dimension uses the symmetric sampler; higher
/// dimensions use the sub-Gaussian form `sqrt(2A) G` with `A` positive
/// `(beta/2)`-stable.
#[inline]
pub(crate) fn isotropic_stable_into(s: &mut RngStream, beta: f64, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = symmetric_stable_unchecked(s, beta);
        return;
    }
    let scale = (2.0 * ln_onesided_unchecked(s, 0.5 * beta).exp()).sqrt();
    for v in out.iter_mut() {
        *v = scale * sample_gaussian(s);
    }
}
