//! Fixed-step RK4 for `i d psi/dt = H(t) psi`.

use num_complex::Complex64 as C64;

use super::config::{segment_steps, IntegratorConfig};
use super::hamiltonian::{DrivenHamiltonian, RestrictedHamiltonian};
use super::support::closure;
use crate::error::{Error, Result};
use crate::operator::{CsrMatrix, I, ZERO};
use crate::state::PureState;

/// Norm drift that aborts a pure-state run.
pub const NORM_ABORT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct PureTrajectory {
    pub samples: Vec<(f64, PureState)>,
    /// Largest `| |psi| - 1 |` seen at any step.
    pub max_norm_drift: f64,
    pub support_dim: usize,
    pub steps: usize,
}

impl PureTrajectory {
    pub fn last(&self) -> &PureState {
        &self.samples.last().expect("trajectory has at least one sample").1
    }
}

/// Integrates from `times[0]` and records the state at every entry of
/// `times` (which must be nondecreasing).
pub fn evolve_schrodinger(
    h: &DrivenHamiltonian,
    psi0: &PureState,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<PureTrajectory> {
    config.validate()?;
    if psi0.space().as_ref() != h.space().as_ref() {
        return Err(Error::SpaceMismatch);
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("initial state norm {} != 1", psi0.norm())));
    }
    check_times(times)?;

    let n = h.space().dim();
    let seed = psi0.amplitudes().iter().enumerate().filter(|(_, a)| **a != ZERO).map(|(k, _)| k);
    let ops: Vec<&CsrMatrix> =
        std::iter::once(h.static_part().csr()).chain(h.drives().iter().map(|d| d.operator.csr())).collect();
    let support = closure(n, seed, &ops);
    let rh = h.restricted(&support);
    let m = support.len();

    let mut y: Vec<C64> = support.iter().map(|&k| psi0.amplitudes()[k]).collect();
    let mut stepper = Rk4Vec::new(m);
    let mut samples = Vec::with_capacity(times.len());
    let mut max_norm_drift: f64 = 0.0;
    let mut total_steps = 0;
    let mut t = times[0];
    for &t_next in times {
        let (steps, h_step) = segment_steps(t, t_next, config.dt);
        for s in 0..steps {
            let ts = t + s as f64 * h_step;
            stepper.step(&rh, ts, h_step, &mut y);
            let norm = y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let drift = (norm - 1.0).abs();
            max_norm_drift = max_norm_drift.max(drift);
            if drift > NORM_ABORT || !norm.is_finite() {
                return Err(Error::NormDrift { drift, t: ts + h_step, dt: h_step });
            }
        }
        total_steps += steps;
        t = t_next;
        let mut full = vec![ZERO; n];
        for (k, &idx) in support.iter().enumerate() {
            full[idx] = y[k];
        }
        samples.push((t, PureState::new(h.space().clone(), full)?));
    }
    Ok(PureTrajectory { samples, max_norm_drift, support_dim: m, steps: total_steps })
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("no output times requested".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("output times must be finite and nondecreasing".into()));
    }
    Ok(())
}

struct Rk4Vec {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4Vec {
    fn new(m: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![ZERO; m]), tmp: vec![ZERO; m] }
    }

    fn rhs(h: &RestrictedHamiltonian, t: f64, y: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        h.apply_add(t, -I, y, out);
    }

    fn step(&mut self, h: &RestrictedHamiltonian, t: f64, dt: f64, y: &mut [C64]) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        Self::rhs(h, t, y, k1);
        for ((o, a), b) in tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
            *o = a + b * (0.5 * dt);
        }
        Self::rhs(h, t + 0.5 * dt, tmp, k2);
        for ((o, a), b) in tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
            *o = a + b * (0.5 * dt);
        }
        Self::rhs(h, t + 0.5 * dt, tmp, k3);
        for ((o, a), b) in tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
            *o = a + b * dt;
        }
        Self::rhs(h, t + dt, tmp, k4);
        let w = dt / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}
