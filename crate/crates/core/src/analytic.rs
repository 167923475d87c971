//! Closed-form mean first exit times and escape probabilities.
//!
//! All mean exit times are the exit time of the operational-time process
//! multiplied by the tempering factor `alpha * mu^(alpha - 1)`.

use crate::dynamics::norm_sq;
use crate::error::{domain, Result};
use crate::rand_stable::TemperedStableParams;
use crate::specfun::{adaptive_quad, log_gamma, reg_inc_beta, Integrand, QuadSpec};
use crate::subordinator::mean_rate;

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(format!("radius must be finite and > 0, got {r}")));
    }
    Ok(())
}

/// `r^2 - |x|^2`, rejecting points outside the closed ball.
fn gap_sq(x: &[f64], r: f64) -> Result<f64> {
    check_radius(r)?;
    if x.is_empty() {
        return Err(domain("position must have dimension >= 1"));
    }
    let gap = r * r - norm_sq(x);
    if gap < 0.0 {
        return Err(domain(format!("|x| must not exceed r = {r}, got x = {x:?}")));
    }
    Ok(gap)
}

/// Gaussian driver on `(-r, r)`: `alpha mu^(alpha-1) (r^2 - x^2) / 2`.
pub fn mfet_gaussian_1d(x: f64, r: f64, clock: &TemperedStableParams) -> Result<f64> {
    let gap = gap_sq(&[x], r)?;
    Ok(mean_rate(clock)? * gap / 2.0)
}

/// Gaussian driver on the ball of radius `r` in `n = x.len()` dimensions:
/// `alpha mu^(alpha-1) (r^2 - |x|^2) / (2n)`.
pub fn mfet_gaussian_ball(x: &[f64], r: f64, clock: &TemperedStableParams) -> Result<f64> {
    let gap = gap_sq(x, r)?;
    Ok(mean_rate(clock)? * gap / (2.0 * x.len() as f64))
}

/// Expected exit time of the standard isotropic `beta`-stable process from
/// the ball of radius `r` in `n = x.len()` dimensions:
///
/// `Gamma(n/2) (r^2 - |x|^2)^(beta/2) / (2^beta Gamma(1 + beta/2) Gamma(n/2 + beta/2))`.
///
/// `beta = 2` gives the Brownian case with generator equal to the Laplacian.
pub fn getoor_u(x: &[f64], r: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(domain(format!("beta must lie in (0, 2], got {beta}")));
    }
    let gap = gap_sq(x, r)?;
    if gap == 0.0 {
        return Ok(0.0);
    }
    let half_n = 0.5 * x.len() as f64;
    let half_beta = 0.5 * beta;
    let ln_u = log_gamma(half_n)? + half_beta * gap.ln()
        - beta * std::f64::consts::LN_2
        - log_gamma(1.0 + half_beta)?
        - log_gamma(half_n + half_beta)?;
    Ok(ln_u.exp())
}

/// Stable driver on the ball: `alpha mu^(alpha-1) * getoor_u(x)`.
pub fn mfet_stable_ball(x: &[f64], r: f64, clock: &TemperedStableParams, beta: f64) -> Result<f64> {
    let rate = mean_rate(clock)?;
    Ok(rate * getoor_u(x, r, beta)?)
}

fn check_escape_args(x: f64, r: f64, beta: f64) -> Result<()> {
    check_radius(r)?;
    if !(beta > 0.0 && beta < 2.0) {
        return Err(domain(format!("beta must lie in (0, 2), got {beta}")));
    }
    if !(x.abs() <= r) {
        return Err(domain(format!("|x| must not exceed r = {r}, got {x}")));
    }
    Ok(())
}

/// Probability that the symmetric `beta`-stable process started at `x`
/// leaves `(-r, r)` by landing in `[r, inf)`.
///
/// The substitution `y = r(2t - 1)` turns the defining integral
/// `(2r)^(1-beta) Gamma(beta) / Gamma(beta/2)^2 * int_{-r}^{x} (r^2 - y^2)^(beta/2 - 1) dy`
/// into `I_{(x+r)/(2r)}(beta/2, beta/2)`.
pub fn escape_prob_interval(x: f64, r: f64, beta: f64) -> Result<f64> {
    check_escape_args(x, r, beta)?;
    let z = ((x + r) / (2.0 * r)).clamp(0.0, 1.0);
    reg_inc_beta(z, 0.5 * beta, 0.5 * beta)
}

/// `(r^2 - y^2)^p` on `[-r, x]`, evaluated from the node's offsets so the
/// singularity at `-r` (and at `r` when `x = r`) keeps full precision.
struct ChordPower {
    r_minus_x: f64,
    p: f64,
}

impl Integrand for ChordPower {
    fn eval(&self, _y: f64, from_lo: f64, to_hi: f64) -> f64 {
        // y + r = from_lo, r - y = (r - x) + (x - y)
        (from_lo * (self.r_minus_x + to_hi)).powf(self.p)
    }
}

/// [`escape_prob_interval`] evaluated by direct quadrature of its integral
/// form instead of the incomplete beta reduction.
pub fn escape_prob_interval_quad(x: f64, r: f64, beta: f64, spec: QuadSpec) -> Result<f64> {
    check_escape_args(x, r, beta)?;
    if x == -r {
        return Ok(0.0);
    }
    let integrand = ChordPower {
        r_minus_x: r - x,
        p: 0.5 * beta - 1.0,
    };
    let integral = adaptive_quad(&integrand, -r, x, spec)?;
    let ln_coef = (1.0 - beta) * (2.0 * r).ln() + log_gamma(beta)? - 2.0 * log_gamma(0.5 * beta)?;
    Ok(ln_coef.exp() * integral)
}

/// Escape probability from `(-1, 1)` into `[1, inf)`:
/// `2^(1-beta) Gamma(beta) Gamma(beta/2)^(-2) int_{-1}^{x} (1 - u^2)^(beta/2 - 1) du`.
pub fn escape_prob_unit_interval(x: f64, beta: f64) -> Result<f64> {
    escape_prob_interval(x, 1.0, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn clock(alpha: f64, mu: f64) -> TemperedStableParams {
        TemperedStableParams::new(alpha, mu).unwrap()
    }

    #[test]
    fn gaussian_1d_values() {
        let c = clock(1.0, 0.5);
        assert_eq!(mfet_gaussian_1d(10.0, 10.0, &c).unwrap(), 0.0);
        assert_eq!(mfet_gaussian_1d(-10.0, 10.0, &c).unwrap(), 0.0);
        assert_eq!(mfet_gaussian_1d(0.0, 10.0, &c).unwrap(), 50.0);
        // mpmath: 50 * 0.6 * 0.1^-0.4
        let v = mfet_gaussian_1d(0.0, 10.0, &clock(0.6, 0.1)).unwrap();
        assert!((v - 75.356_592_945_287_4).abs() < 1e-11, "{v}");
        assert!(mfet_gaussian_1d(10.5, 10.0, &c).is_err());
    }

    #[test]
    fn divergence_propagates() {
        let c = clock(0.5, 0.0);
        assert!(matches!(mfet_gaussian_1d(0.0, 1.0, &c), Err(Error::Divergence { .. })));
        assert!(matches!(mfet_stable_ball(&[0.0], 1.0, &c, 0.5), Err(Error::Divergence { .. })));
        // alpha = 1 has a finite clock even without tempering.
        assert!(mfet_stable_ball(&[0.0], 1.0, &clock(1.0, 0.0), 0.5).is_ok());
    }

    #[test]
    fn getoor_special_cases() {
        // beta = 1, n = 1: sqrt(r^2 - x^2)
        for x in [0.0, 0.3, -0.9, 0.999] {
            let u = getoor_u(&[x], 1.0, 1.0).unwrap();
            assert!((u - (1.0f64 - x * x).sqrt()).abs() < 1e-14, "x = {x}");
        }
        for x in [0.0, 2.0, -7.5] {
            let u = getoor_u(&[x], 10.0, 2.0).unwrap();
            assert!((u - (100.0 - x * x) / 2.0).abs() < 1e-12);
        }
        assert_eq!(getoor_u(&[3.0, 4.0], 5.0, 0.7).unwrap(), 0.0);
        assert!(getoor_u(&[0.0], 1.0, 2.5).is_err());
        assert!(getoor_u(&[], 1.0, 1.0).is_err());
    }

    #[test]
    fn getoor_high_precision_oracle() {
        // mpmath at 40 digits
        let u = getoor_u(&[0.0, 0.0], 100.0, 0.5).unwrap();
        assert!((u - 8.606_822_266_341_461).abs() < 1e-12, "{u}");
        let u = getoor_u(&[0.0], 100.0, 0.5).unwrap();
        assert!((u - 11.283_791_670_955_126).abs() < 1e-12, "{u}");
    }

    #[test]
    fn stable_ball_degenerate_clock() {
        for mu in [0.01, 0.37, 5.0] {
            let x = [20.0, -30.0];
            assert_eq!(
                mfet_stable_ball(&x, 100.0, &clock(1.0, mu), 1.2).unwrap(),
                getoor_u(&x, 100.0, 1.2).unwrap()
            );
        }
    }

    #[test]
    fn stable_ordering_at_centre() {
        let u = |a| mfet_stable_ball(&[0.0], 100.0, &clock(a, 0.1), 0.5).unwrap();
        assert!(u(0.6) > u(0.2) && u(0.2) > u(0.9));
    }

    #[test]
    fn escape_values() {
        assert_eq!(escape_prob_interval(0.0, 100.0, 0.7).unwrap(), 0.5);
        assert_eq!(escape_prob_interval(-100.0, 100.0, 0.7).unwrap(), 0.0);
        assert_eq!(escape_prob_interval(100.0, 100.0, 0.7).unwrap(), 1.0);
        // mpmath betainc(0.25, 0.25, 0, 0.75, regularized=True)
        let p = escape_prob_interval(50.0, 100.0, 0.5).unwrap();
        assert!((p - 0.602_243_221_682_644_2).abs() < 1e-13);
        assert!(escape_prob_interval(0.0, 1.0, 2.0).is_err());
        assert!(escape_prob_interval(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn escape_quadrature_path_matches() {
        let spec = QuadSpec::default();
        let q = escape_prob_interval_quad(50.0, 100.0, 0.5, spec).unwrap();
        assert!((q - 0.602_243_221_682_644_2).abs() < 1e-10, "{q}");
        assert_eq!(escape_prob_interval_quad(-3.0, 3.0, 1.0, spec).unwrap(), 0.0);
        let top = escape_prob_interval_quad(3.0, 3.0, 0.4, spec).unwrap();
        assert!((top - 1.0).abs() < 1e-10, "{top}");
    }

    #[test]
    fn unit_interval_formula() {
        assert_eq!(escape_prob_unit_interval(0.0, 1.3).unwrap(), 0.5);
        // beta -> 2: the integrand flattens and P_E -> (x + 1) / 2
        for x in [-0.8, -0.2, 0.4, 0.9] {
            let p = escape_prob_unit_interval(x, 1.999_999).unwrap();
            assert!((p - (x + 1.0) / 2.0).abs() < 1e-5, "x = {x}: {p}");
        }
    }
}
