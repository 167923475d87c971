//! The physical clock `T(s)`: a tempered stable subordinator accumulated along
//! operational time.

use crate::error::{domain, Error, Result};
use crate::rand_stable::{tempered_unchecked, RngStream, TemperedStableParams};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClockState {
    pub physical_time: f64,
    pub operational_time: f64,
}

/// A clock with its per-step constants precomputed, for the trajectory loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SteppedClock {
    alpha: f64,
    mu: f64,
    ds: f64,
    ln_scale: f64,
    deterministic: bool,
}

impl SteppedClock {
    pub(crate) fn new(p: &TemperedStableParams, ds: f64) -> Result<Self> {
        if !(ds > 0.0) || !ds.is_finite() {
            return Err(domain(format!("ds must be finite and > 0, got {ds}")));
        }
        Ok(Self {
            alpha: p.alpha(),
            mu: p.mu(),
            ds,
            ln_scale: ds.ln() / p.alpha(),
            deterministic: p.is_deterministic(),
        })
    }

    /// Returns the number of proposals the tempered sampler used (0 for the
    /// deterministic clock).
    #[inline]
    pub(crate) fn advance(&self, state: &mut ClockState, s: &mut RngStream) -> u64 {
        state.operational_time += self.ds;
        if self.deterministic {
            state.physical_time += self.ds;
            return 0;
        }
        let (dt, proposals) = tempered_unchecked(s, self.alpha, self.mu, self.ln_scale);
        state.physical_time += dt;
        proposals
    }
}

/// Advances the clock by operational time `ds`. For `alpha = 1` the physical
/// time advances by exactly `ds`.
pub fn advance(state: ClockState, ds: f64, p: &TemperedStableParams, s: &mut RngStream) -> Result<ClockState> {
    let clock = SteppedClock::new(p, ds)?;
    let mut next = state;
    clock.advance(&mut next, s);
    Ok(next)
}

/// Mean physical time per unit operational time, `alpha * mu^(alpha - 1)`.
///
/// Returns [`Error::Divergence`] for the untempered clock (`mu = 0`,
/// `alpha < 1`), whose mean is infinite.
pub fn mean_rate(p: &TemperedStableParams) -> Result<f64> {
    let (alpha, mu) = (p.alpha(), p.mu());
    if alpha == 1.0 {
        return Ok(1.0);
    }
    if mu == 0.0 {
        return Err(Error::Divergence { alpha });
    }
    Ok(alpha * mu.powf(alpha - 1.0))
}
