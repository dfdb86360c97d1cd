//! Step-size certification by repeated halving.

use super::config::IntegratorConfig;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Converged<R> {
    pub result: R,
    /// Step used for `result`.
    pub dt: f64,
    /// Number of halvings performed. At least one: convergence needs a
    /// comparison between two step sizes.
    pub halvings: u32,
    /// Largest observable change in the final comparison.
    pub last_change: f64,
}

/// Runs `run(dt)` with `dt` halved until every observable returned by
/// `observe` changes by less than the configured target.
pub fn converge<R>(
    config: &IntegratorConfig,
    mut run: impl FnMut(f64) -> Result<R>,
    observe: impl Fn(&R) -> Vec<f64>,
) -> Result<Converged<R>> {
    config.validate()?;
    let mut dt = config.dt;
    let mut prev = observe(&run(dt)?);
    let mut last_change = f64::INFINITY;
    for halvings in 1..=config.max_halvings {
        dt *= 0.5;
        let result = run(dt)?;
        let obs = observe(&result);
        if obs.len() != prev.len() {
            return Err(Error::InvalidParameter("observable count changed between runs".into()));
        }
        last_change = obs.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if last_change < config.convergence_target {
            return Ok(Converged { result, dt, halvings, last_change });
        }
        prev = obs;
    }
    Err(Error::NotConverged { halvings: config.max_halvings, last_change, target: config.convergence_target })
}
