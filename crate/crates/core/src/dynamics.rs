//! Spatial dynamics in operational time: domains, noise drivers, drift, the
//! Euler step, and simulation of one trajectory until it leaves the domain.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::rand_stable::{isotropic_stable_into, sample_gaussian, RngStream, TemperedStableParams};
use crate::subordinator::{ClockState, SteppedClock};

/// Default cap on steps per trajectory.
pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

/// An open ball of radius `r` centred at the origin; in one dimension this is
/// the interval `(-r, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    dim: usize,
    radius: f64,
}

impl Domain {
    pub fn interval(r: f64) -> Result<Self> {
        Self::ball(1, r)
    }

    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        if dim < 1 {
            return Err(domain("domain dimension must be >= 1"));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(domain(format!("radius must be finite and > 0, got {r}")));
        }
        Ok(Self { dim, radius: r })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// True iff `|x| < r`; the boundary itself counts as outside.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x))
    }

    #[inline]
    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        norm_sq(x) < self.radius * self.radius
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn contains(d: &Domain, x: &[f64]) -> Result<bool> {
    d.contains(x)
}

/// The spatial noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Driver {
    /// Isotropic Brownian noise with generator `eps * a * Laplacian`.
    Gaussian { a: f64, eps: f64 },
    /// Isotropic `beta`-stable jumps of scale `eps`; for `eps = 1` the unit-time
    /// characteristic function is `exp(-|k|^beta)`.
    Stable { beta: f64, eps: f64 },
}

impl Driver {
    pub fn gaussian(a: f64, eps: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(domain(format!("diffusion coefficient must be > 0, got {a}")));
        }
        check_eps(eps)?;
        Ok(Driver::Gaussian { a, eps })
    }

    pub fn stable(beta: f64, eps: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(domain(format!("beta must lie in (0, 2), got {beta}")));
        }
        check_eps(eps)?;
        Ok(Driver::Stable { beta, eps })
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Driver::Stable { .. })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain(format!("noise strength must be > 0, got {eps}")));
    }
    Ok(())
}

/// Deterministic drift `F(x)`.
#[derive(Clone, Default)]
pub enum DriftField {
    #[default]
    Zero,
    Constant(Vec<f64>),
    /// `f(x, out)` writes `F(x)` into `out`.
    Field(Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>),
}

impl fmt::Debug for DriftField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftField::Zero => f.write_str("Zero"),
            DriftField::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            DriftField::Field(_) => f.write_str("Field(..)"),
        }
    }
}

impl DriftField {
    pub fn is_zero(&self) -> bool {
        matches!(self, DriftField::Zero)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            DriftField::Constant(c) if c.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitRecord {
    /// Operational exit time (`steps * ds`).
    pub s_exit: f64,
    /// Physical exit time, the clock read at the exit step.
    pub t_exit: f64,
    /// First position outside the domain (current position if censored).
    pub landing: Vec<f64>,
    pub steps: u64,
}

/// Precomputed per-step constants for one driver and step size.
#[derive(Debug, Clone)]
pub(crate) struct Stepper {
    drift: DriftField,
    noise: Noise,
    ds: f64,
    scratch: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Noise {
    Gaussian { sd: f64 },
    Stable { beta: f64, scale: f64 },
}

impl Stepper {
    pub(crate) fn new(dim: usize, ds: f64, drift: &DriftField, drv: &Driver) -> Result<Self> {
        if !(ds > 0.0) || !ds.is_finite() {
            return Err(domain(format!("ds must be finite and > 0, got {ds}")));
        }
        drift.check_dim(dim)?;
        let noise = match *drv {
            Driver::Gaussian { a, eps } => Noise::Gaussian {
                sd: (2.0 * eps * a * ds).sqrt(),
            },
            Driver::Stable { beta, eps } => Noise::Stable {
                beta,
                scale: eps * ds.powf(1.0 / beta),
            },
        };
        Ok(Self {
            drift: drift.clone(),
            noise,
            ds,
            scratch: vec![0.0; dim],
        })
    }

    /// Moves `x` by one Euler step in place.
    #[inline]
    pub(crate) fn step(&mut self, x: &mut [f64], s: &mut RngStream) {
        match &self.drift {
            DriftField::Zero => {}
            DriftField::Constant(c) => {
                for (xi, ci) in x.iter_mut().zip(c) {
                    *xi += ci * self.ds;
                }
            }
            DriftField::Field(f) => {
                f(x, &mut self.scratch);
                for (xi, fi) in x.iter_mut().zip(&self.scratch) {
                    *xi += fi * self.ds;
                }
            }
        }
        match self.noise {
            Noise::Gaussian { sd } => {
                for xi in x.iter_mut() {
                    *xi += sd * sample_gaussian(s);
                }
            }
            Noise::Stable { beta, scale } => {
                isotropic_stable_into(s, beta, &mut self.scratch);
                for (xi, si) in x.iter_mut().zip(&self.scratch) {
                    *xi += scale * si;
                }
            }
        }
    }
}

/// One Euler step in operational time.
///
/// Gaussian: `x + F(x) ds + sqrt(2 eps a ds) G`. Stable:
/// `x + F(x) ds + eps ds^(1/beta) S` with `S` a unit isotropic stable vector.
pub fn step(x: &[f64], ds: f64, drift: &DriftField, drv: &Driver, s: &mut RngStream) -> Result<Vec<f64>> {
    let mut stepper = Stepper::new(x.len(), ds, drift, drv)?;
    let mut out = x.to_vec();
    stepper.step(&mut out, s);
    Ok(out)
}

/// Everything that defines a trajectory apart from its start and stream.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub domain: Domain,
    pub drift: DriftField,
    pub driver: Driver,
    pub ds: f64,
    pub max_steps: u64,
}

impl Dynamics {
    pub fn new(domain: Domain, driver: Driver, ds: f64) -> Self {
        Self {
            domain,
            drift: DriftField::Zero,
            driver,
            ds,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_drift(mut self, drift: DriftField) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub(crate) fn validate_start(&self, x0: &[f64]) -> Result<()> {
        if !self.domain.contains(x0)? {
            return Err(domain(format!(
                "start point {x0:?} is not strictly inside the domain of radius {}",
                self.domain.radius()
            )));
        }
        if self.max_steps < 1 {
            return Err(domain("max_steps must be >= 1"));
        }
        Ok(())
    }
}

/// A trajectory simulator reusable across many streams.
#[derive(Debug, Clone)]
pub(crate) struct Simulator {
    domain: Domain,
    stepper: Stepper,
    clock: Option<SteppedClock>,
    max_steps: u64,
}

impl Simulator {
    /// `clock = None` simulates in operational time only; the record then
    /// reports `t_exit = s_exit`.
    pub(crate) fn new(dynamics: &Dynamics, clock: Option<&TemperedStableParams>) -> Result<Self> {
        let stepper = Stepper::new(dynamics.domain.dim(), dynamics.ds, &dynamics.drift, &dynamics.driver)?;
        let clock = match clock {
            Some(p) => Some(SteppedClock::new(p, dynamics.ds)?),
            None => None,
        };
        Ok(Self {
            domain: dynamics.domain,
            stepper,
            clock,
            max_steps: dynamics.max_steps,
        })
    }

    /// `x0` must already be validated.
    pub(crate) fn run(&mut self, x0: &[f64], s: &mut RngStream) -> Result<ExitRecord> {
        let mut x = x0.to_vec();
        let mut clock = ClockState::default();
        let ds = self.stepper.ds;
        let mut steps = 0;
        while steps < self.max_steps {
            self.stepper.step(&mut x, s);
            match &self.clock {
                Some(c) => {
                    c.advance(&mut clock, s);
                }
                None => {
                    clock.operational_time += ds;
                    clock.physical_time += ds;
                }
            }
            steps += 1;
            if !self.domain.contains_unchecked(&x) {
                return Ok(ExitRecord {
                    s_exit: clock.operational_time,
                    t_exit: clock.physical_time,
                    landing: x,
                    steps,
                });
            }
        }
        Err(Error::MaxStepsExceeded {
            partial: Box::new(ExitRecord {
                s_exit: clock.operational_time,
                t_exit: clock.physical_time,
                landing: x,
                steps,
            }),
        })
    }
}

/// Simulates from `x0` until the first position outside the domain,
/// advancing the physical clock alongside.
///
/// Fails with [`Error::MaxStepsExceeded`] (carrying the partial record) if no
/// exit happens within `max_steps`.
pub fn run_trajectory(
    x0: &[f64],
    dynamics: &Dynamics,
    clock: &TemperedStableParams,
    s: &mut RngStream,
) -> Result<ExitRecord> {
    dynamics.validate_start(x0)?;
    Simulator::new(dynamics, Some(clock))?.run(x0, s)
}

/// As [`run_trajectory`] but without a physical clock: only the spatial path
/// in operational time is simulated.
pub fn run_operational(x0: &[f64], dynamics: &Dynamics, s: &mut RngStream) -> Result<ExitRecord> {
    dynamics.validate_start(x0)?;
    Simulator::new(dynamics, None)?.run(x0, s)
}
