use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest phase the fastest Hamiltonian frequency may advance per step.
pub const MAX_PHASE_PER_STEP: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Base RK4 step, in units of the protocol step duration.
    pub dt: f64,
    /// Largest change of any observable between successive halvings that
    /// counts as converged.
    pub convergence_target: f64,
    pub max_halvings: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, convergence_target: 1e-8, max_halvings: 6 }
    }
}

impl IntegratorConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_target(mut self, target: f64) -> Self {
        self.convergence_target = target;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.convergence_target > 0.0) {
            return Err(Error::InvalidParameter("convergence target must be positive".into()));
        }
        Ok(())
    }

    /// Rejects step sizes that would advance `max_frequency` (rad/time) by
    /// more than [`MAX_PHASE_PER_STEP`].
    pub fn validate_for(&self, max_frequency: f64) -> Result<()> {
        self.validate()?;
        let phase = self.dt * max_frequency;
        if phase > MAX_PHASE_PER_STEP {
            return Err(Error::InvalidParameter(format!(
                "dt = {} advances the fastest frequency {max_frequency:.3} by {phase:.3} rad per step (limit {MAX_PHASE_PER_STEP})",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Splits `[t0, t1]` into equal steps no longer than `dt`.
pub(crate) fn segment_steps(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let len = t1 - t0;
    if len <= 0.0 {
        return (0, 0.0);
    }
    let n = (len / dt - 1e-9).ceil().max(1.0) as usize;
    (n, len / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_limit() {
        let c = IntegratorConfig::default();
        assert!(c.validate_for(2f64.sqrt() * 66.0).is_ok());
        assert!(c.with_dt(3e-3).validate_for(2f64.sqrt() * 66.0).is_err());
        assert!(c.with_dt(0.0).validate().is_err());
    }

    #[test]
    fn segments_cover_interval() {
        assert_eq!(segment_steps(0.0, 1.0, 1e-3).0, 1000);
        let (n, h) = segment_steps(2.0, 3.0, 0.3);
        assert_eq!(n, 4);
        assert!((h - 0.25).abs() < 1e-15);
        assert_eq!(segment_steps(1.0, 1.0, 0.1).0, 0);
    }
}
