//! Special functions and endpoint-singular quadrature used by the closed-form
//! exit-time and escape-probability formulas.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Shift up once; the Lanczos sum is accurate for x >= 0.5.
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Regularized incomplete beta function `I_z(a, b)`.
///
/// Evaluated by the modified Lentz continued fraction, switching to
/// `1 - I_{1-z}(b, a)` above `z = (a + 1) / (a + b + 2)` where the fraction
/// converges slowly.
pub fn reg_inc_beta(z: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(domain(format!("reg_inc_beta requires z in [0,1], got {z}")));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!(
            "reg_inc_beta requires finite a, b > 0, got a = {a}, b = {b}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == 1.0 {
        return Ok(1.0);
    }
    if a == b && z == 0.5 {
        return Ok(0.5);
    }
    let value = if z < (a + 1.0) / (a + b + 2.0) {
        beta_front(z, a, b) * beta_cf(z, a, b) / a
    } else {
        1.0 - beta_front(1.0 - z, b, a) * beta_cf(1.0 - z, b, a) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

fn beta_front(z: f64, a: f64, b: f64) -> f64 {
    let ln_b = ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b);
    (a * z.ln() + b * (-z).ln_1p() - ln_b).exp()
}

fn beta_cf(z: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let guard = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * z / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * z / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + even * d);
        c = guard(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * z / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + odd * d);
        c = guard(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Accuracy request for [`adaptive_quad`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    rel_tol: f64,
    max_depth: usize,
}

impl QuadSpec {
    pub fn new(rel_tol: f64, max_depth: usize) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(domain(format!("rel_tol must be > 0, got {rel_tol}")));
        }
        if max_depth < 1 {
            return Err(domain("max_depth must be >= 1"));
        }
        Ok(Self { rel_tol, max_depth })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_depth: 12,
        }
    }
}

/// An integrand that may use the exact distances of a node to both ends of
/// the interval.
///
/// Endpoint singularities such as `(hi - x)^p` cannot be evaluated from `x`
/// alone once nodes crowd closer to `hi` than one ulp; implementors that care
/// should use `from_lo = x - lo` and `to_hi = hi - x`, which are computed
/// without cancellation. Plain closures `Fn(f64) -> f64` implement this trait
/// and see only `x`.
pub trait Integrand {
    fn eval(&self, x: f64, from_lo: f64, to_hi: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Integrand for F {
    fn eval(&self, x: f64, _from_lo: f64, _to_hi: f64) -> f64 {
        self(x)
    }
}

// sinh(6.1) * pi/2 ~ 350, so node offsets reach ~1e-304 of the half-width.
const DE_T_MAX: f64 = 6.1;
const DE_MIN_LEVELS: usize = 3;

/// Integrates `f` over `(lo, hi)` with the tanh-sinh (double exponential)
/// rule, halving the step until two successive levels agree to `rel_tol`.
///
/// Nodes never touch the endpoints, so integrable singularities
/// `(x - lo)^p`, `(hi - x)^p` with `p > -1` are allowed.
pub fn adaptive_quad<F: Integrand + ?Sized>(f: &F, lo: f64, hi: f64, spec: QuadSpec) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(domain("adaptive_quad requires finite limits"));
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return adaptive_quad(f, hi, lo, spec).map(|v| -v);
    }
    let half = 0.5 * (hi - lo);
    let centre = lo + half;

    // Sum of w(t) f(x(t)) over the nodes t = offset + k * step.
    let sweep = |step: f64, offset: f64| -> Result<f64> {
        let mut total = 0.0;
        let mut k = 0usize;
        loop {
            let t = offset + k as f64 * step;
            if t > DE_T_MAX {
                break;
            }
            let u = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * u).exp();
            // 1 - tanh(u) and sech^2(u), both free of cancellation for u >= 0.
            let gap = 2.0 * e / (1.0 + e);
            let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
            let w = half * FRAC_PI_2 * t.cosh() * sech2;
            if w == 0.0 || gap == 0.0 {
                break;
            }
            let near = half * gap;
            let far = 2.0 * half - near;
            let mut add = |x: f64, from_lo: f64, to_hi: f64| -> Result<()> {
                let v = f.eval(x, from_lo, to_hi);
                if !v.is_finite() {
                    return Err(domain(format!("integrand is not finite at x = {x}")));
                }
                total += w * v;
                Ok(())
            };
            if t == 0.0 {
                add(centre, half, half)?;
            } else {
                add(hi - near, far, near)?;
                add(lo + near, near, far)?;
            }
            k += 1;
        }
        Ok(total)
    };

    let mut step = 1.0;
    let mut sum = sweep(step, 0.0)?;
    let mut estimate = sum * step;
    let mut last_change = f64::INFINITY;
    for level in 1..=spec.max_depth {
        // Only the new midpoints are evaluated at each refinement.
        sum += sweep(step, 0.5 * step)?;
        step *= 0.5;
        let next = sum * step;
        last_change = (next - estimate).abs();
        estimate = next;
        if level >= DE_MIN_LEVELS && last_change <= spec.rel_tol * estimate.abs() {
            return Ok(estimate);
        }
    }
    Err(Error::NoConvergence {
        rel_tol: spec.rel_tol,
        max_depth: spec.max_depth,
        last_change,
    })
}
