//! Transitionless tracking for the three-state chain
//! `H = O1 |psi1><psi2| + O2 |psi2><psi3| + h.c.` and the six-step pulse
//! schedule built from it.
//!
//! A path is a moving orthonormal frame `xi_1, xi_2, xi_3` parameterized by
//! three angles. Driving the chain with the counterdiabatic Hamiltonian
//! `i sum |d xi_n/dt><xi_n|` makes the frame vectors exact solutions, so the
//! propagator is `sum |xi_n(t)><xi_n(0)|` with no adiabatic condition.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::operator::{I, ONE};

/// Angles `theta`, `vartheta`, `varphi` and their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathAngles {
    pub theta: f64,
    pub vartheta: f64,
    pub varphi: f64,
    pub theta_dot: f64,
    pub vartheta_dot: f64,
    pub varphi_dot: f64,
}

/// A family of frames on `[0, duration]`. Derivatives must be analytic.
pub trait PathParams: Send + Sync + fmt::Debug {
    fn duration(&self) -> f64;
    fn angles(&self, t: f64) -> PathAngles;
}

/// The shipped path: `varphi = -pi/2 cos(pi t / T)`, `vartheta = pi/4`,
/// `theta = -pi/4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinusoidalPath {
    pub duration: f64,
}

impl SinusoidalPath {
    pub fn new(duration: f64) -> Self {
        Self { duration }
    }
}

impl PathParams for SinusoidalPath {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn angles(&self, t: f64) -> PathAngles {
        let w = PI / self.duration;
        PathAngles {
            theta: -FRAC_PI_4,
            vartheta: FRAC_PI_4,
            varphi: -FRAC_PI_2 * (w * t).cos(),
            theta_dot: 0.0,
            vartheta_dot: 0.0,
            varphi_dot: FRAC_PI_2 * w * (w * t).sin(),
        }
    }
}

const BOUNDARY_TOL: f64 = 1e-10;

/// Checks the endpoint conditions that make the frame propagator swap
/// `psi1` and `psi3`, and the constraint that removes the `psi3-psi1`
/// coupling (sampled on `samples` points).
pub fn check_boundary_conditions(path: &dyn PathParams, samples: usize) -> Result<()> {
    let tf = path.duration();
    if !(tf > 0.0) {
        return Err(Error::InvalidParameter(format!("path duration must be positive, got {tf}")));
    }
    let a0 = path.angles(0.0);
    let a1 = path.angles(tf);
    let checks = [
        ("varphi(0) = -pi/2", a0.varphi + FRAC_PI_2),
        ("varphi(T) = pi/2", a1.varphi - FRAC_PI_2),
        ("vartheta(0) + theta(0) = 0", a0.vartheta + a0.theta),
        ("vartheta(T) - theta(T) = pi/2", a1.vartheta - a1.theta - FRAC_PI_2),
    ];
    for (name, residual) in checks {
        if residual.abs() > BOUNDARY_TOL {
            return Err(Error::InvalidParameter(format!("boundary condition {name} violated by {residual:.3e}")));
        }
    }
    for k in 0..=samples {
        let t = tf * k as f64 / samples.max(1) as f64;
        let a = path.angles(t);
        let r = a.theta_dot - a.vartheta_dot * a.varphi.sin();
        if r.abs() > BOUNDARY_TOL {
            return Err(Error::InvalidParameter(format!(
                "constraint theta' = vartheta' sin(varphi) violated by {r:.3e} at t = {t}"
            )));
        }
    }
    Ok(())
}

fn check_time(path: &dyn PathParams, t: f64) -> Result<()> {
    let tf = path.duration();
    let slack = 1e-12 * tf;
    if t < -slack || t > tf + slack || !t.is_finite() {
        return Err(Error::TimeOutOfRange { t, start: 0.0, end: tf });
    }
    Ok(())
}

fn frame_from_angles(a: &PathAngles) -> [Vector3<C64>; 3] {
    let (st, ct) = a.theta.sin_cos();
    let (sv, cv) = a.vartheta.sin_cos();
    let (sp, cp) = a.varphi.sin_cos();
    let re = |x: f64| C64::new(x, 0.0);
    [
        Vector3::new(re(ct * sp * cv + st * sv), I * (cp * cv), re(st * sp * cv - ct * sv)),
        Vector3::new(re(ct * sp * sv - st * cv), I * (cp * sv), re(st * sp * sv + ct * cv)),
        Vector3::new(re(ct * cp), -I * sp, re(st * cp)),
    ]
}

/// The three frame vectors at `t`, as amplitudes on `(psi1, psi2, psi3)`.
pub fn path_frame(path: &dyn PathParams, t: f64) -> Result<[Vector3<C64>; 3]> {
    check_time(path, t)?;
    Ok(frame_from_angles(&path.angles(t)))
}

/// Coefficients of the counterdiabatic chain Hamiltonian.
///
/// `H = o1 |psi1><psi2| + o2 |psi2><psi3| + i o31 |psi3><psi1| + h.c.`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainCoefficients {
    pub o1: f64,
    pub o2: f64,
    pub o31: f64,
}

impl ChainCoefficients {
    pub fn matrix(&self) -> Matrix3<C64> {
        let mut h = Matrix3::zeros();
        h[(0, 1)] = C64::new(self.o1, 0.0);
        h[(1, 2)] = C64::new(self.o2, 0.0);
        h[(2, 0)] = I * self.o31;
        h + h.adjoint()
    }
}

pub fn counterdiabatic_hamiltonian(path: &dyn PathParams, t: f64) -> ChainCoefficients {
    let a = path.angles(t);
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.varphi.sin_cos();
    ChainCoefficients {
        o1: a.varphi_dot * ct + a.vartheta_dot * st * cp,
        o2: a.varphi_dot * st - a.vartheta_dot * ct * cp,
        o31: a.theta_dot - a.vartheta_dot * sp,
    }
}

/// `U'(t) = sum_n |xi_n(t)><xi_n(0)|`
pub fn analytic_propagator(path: &dyn PathParams, t: f64) -> Result<Matrix3<C64>> {
    let now = path_frame(path, t)?;
    let start = path_frame(path, 0.0)?;
    Ok(now.iter().zip(&start).fold(Matrix3::zeros(), |u, (x, x0)| u + x * x0.adjoint()))
}

/// `|psi1><psi3| + |psi3><psi1| + |psi2><psi2|`, the end-of-step target
/// written in the usual form.
pub fn printed_swap() -> Matrix3<C64> {
    let mut m = Matrix3::zeros();
    m[(0, 2)] = ONE;
    m[(2, 0)] = ONE;
    m[(1, 1)] = ONE;
    m
}

/// The microwave drives of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Drive {
    Omega03A1,
    Omega13A1,
    Omega04A1,
    Omega14A1,
    Omega03A2,
    Omega13A2,
    Omega04A2,
    Omega14A2,
    OmegaB1,
    OmegaB2,
}

impl Drive {
    pub const ALL: [Drive; 10] = [
        Drive::Omega03A1,
        Drive::Omega13A1,
        Drive::Omega04A1,
        Drive::Omega14A1,
        Drive::Omega03A2,
        Drive::Omega13A2,
        Drive::Omega04A2,
        Drive::Omega14A2,
        Drive::OmegaB1,
        Drive::OmegaB2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Drive::Omega03A1 => "Omega03A1",
            Drive::Omega13A1 => "Omega13A1",
            Drive::Omega04A1 => "Omega04A1",
            Drive::Omega14A1 => "Omega14A1",
            Drive::Omega03A2 => "Omega03A2",
            Drive::Omega13A2 => "Omega13A2",
            Drive::Omega04A2 => "Omega04A2",
            Drive::Omega14A2 => "Omega14A2",
            Drive::OmegaB1 => "OmegaB1",
            Drive::OmegaB2 => "OmegaB2",
        }
    }

    /// Protocol step (1-based) of a cavity-assisted drive; `None` for the
    /// single-qubit B drives, which act in steps 3 and 6.
    pub fn cavity_step(self) -> Option<u8> {
        match self {
            Drive::Omega03A1 | Drive::Omega13A1 => Some(1),
            Drive::Omega04A1 | Drive::Omega14A1 => Some(2),
            Drive::Omega03A2 | Drive::Omega13A2 => Some(4),
            Drive::Omega04A2 | Drive::Omega14A2 => Some(5),
            Drive::OmegaB1 | Drive::OmegaB2 => None,
        }
    }

    /// Whether the drive starts from ancilla level 0 (the `psi1` end of the
    /// chain) rather than level 1.
    fn from_ground(self) -> bool {
        matches!(self, Drive::Omega03A1 | Drive::Omega04A1 | Drive::Omega03A2 | Drive::Omega04A2)
    }
}

impl fmt::Display for Drive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Drive {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Drive::ALL
            .into_iter()
            .find(|d| d.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown drive `{s}`")))
    }
}

/// Time-dependent Rabi frequencies of all ten drives over `[0, 6T]`,
/// evaluated in closed form on demand.
#[derive(Clone, Debug)]
pub struct PulseSchedule {
    step_duration: f64,
    path: Arc<dyn PathParams>,
    /// `sqrt(gA^2 + gB^2) / gB` for steps 1, 2, 4, 5.
    prefactors: [f64; 4],
}

pub const STEPS: u8 = 6;

/// Builds the six-step schedule for a device. Cavity-assisted drives are the
/// chain coefficients rescaled by the inverse dark-state coupling of their
/// step, so that the effective chain sees exactly the counterdiabatic
/// Hamiltonian.
pub fn assemble_schedule(params: &DeviceParams) -> Result<PulseSchedule> {
    assemble_schedule_with_path(params, Arc::new(SinusoidalPath::new(params.step_duration)))
}

pub fn assemble_schedule_with_path(params: &DeviceParams, path: Arc<dyn PathParams>) -> Result<PulseSchedule> {
    params.validate()?;
    if (path.duration() - params.step_duration).abs() > 1e-12 * params.step_duration {
        return Err(Error::InvalidParameter("path duration must equal the step duration".into()));
    }
    check_boundary_conditions(path.as_ref(), 64)?;
    let pre = |ga: f64, gb: f64| ga.hypot(gb) / gb;
    Ok(PulseSchedule {
        step_duration: params.step_duration,
        path,
        prefactors: [
            pre(params.g23_a1, params.g_b1),
            pre(params.g24_a1, params.g_b2),
            pre(params.g23_a2, params.g_b1),
            pre(params.g24_a2, params.g_b2),
        ],
    })
}

impl PulseSchedule {
    pub fn step_duration(&self) -> f64 {
        self.step_duration
    }

    pub fn total_duration(&self) -> f64 {
        STEPS as f64 * self.step_duration
    }

    pub fn path(&self) -> &dyn PathParams {
        self.path.as_ref()
    }

    /// 1-based step containing `t`; step boundaries belong to the later step,
    /// except `6T` which belongs to step 6.
    pub fn step_at(&self, t: f64) -> u8 {
        ((t / self.step_duration).floor() as i64 + 1).clamp(1, STEPS as i64) as u8
    }

    fn check(&self, t: f64) -> Result<()> {
        let end = self.total_duration();
        if !t.is_finite() || t < -1e-12 * end || t > end * (1.0 + 1e-12) {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end });
        }
        Ok(())
    }

    /// Rabi frequency of `drive` at `t`.
    pub fn amplitude(&self, drive: Drive, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.amplitude_unchecked(drive, t))
    }

    pub(crate) fn amplitude_unchecked(&self, drive: Drive, t: f64) -> f64 {
        let tf = self.step_duration;
        let support = |step: u8| {
            let start = (step - 1) as f64 * tf;
            if t >= start && t <= start + tf {
                Some(t - start)
            } else {
                None
            }
        };
        match drive.cavity_step() {
            Some(step) => {
                let Some(tau) = support(step) else { return 0.0 };
                let idx = match step {
                    1 => 0,
                    2 => 1,
                    4 => 2,
                    _ => 3,
                };
                let c = counterdiabatic_hamiltonian(self.path.as_ref(), tau);
                let chain = if drive.from_ground() { c.o1 } else { c.o2 };
                self.prefactors[idx] * chain
            }
            None => {
                let peak = PI * PI / (8.0 * tf);
                if let Some(tau) = support(3) {
                    peak * (PI * tau / tf).sin()
                } else if let Some(tau) = support(6) {
                    -peak * (PI * tau / tf).sin()
                } else {
                    0.0
                }
            }
        }
    }

    /// `pi^2 / (2T)`, the peak cavity-assisted amplitude at uniform coupling.
    pub fn omega_max(&self) -> f64 {
        omega_max(self.step_duration)
    }

    /// Largest amplitude over a sampled grid.
    pub fn peak(&self, drive: Drive, samples_per_step: usize) -> f64 {
        let n = samples_per_step * STEPS as usize;
        (0..=n)
            .map(|k| self.amplitude_unchecked(drive, self.total_duration() * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Long-format CSV `t,drive_label,amplitude` for every drive on a uniform grid.
    pub fn write_csv<W: Write>(&self, mut out: W, samples_per_step: usize) -> std::io::Result<()> {
        writeln!(out, "t,drive_label,amplitude")?;
        let n = samples_per_step.max(1) * STEPS as usize;
        for k in 0..=n {
            let t = self.total_duration() * k as f64 / n as f64;
            for d in Drive::ALL {
                writeln!(out, "{},{},{}", crate::sweep::fmt9(t), d.label(), crate::sweep::fmt9(self.amplitude_unchecked(d, t)))?;
            }
        }
        Ok(())
    }

    pub fn export_csv(&self, path: impl AsRef<Path>, samples_per_step: usize) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file), samples_per_step).map_err(|e| Error::io(path, e))
    }
}

pub fn omega_max(step_duration: f64) -> f64 {
    PI * PI / (2.0 * step_duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ZERO;

    const T: f64 = 1.0;

    fn path() -> SinusoidalPath {
        SinusoidalPath::new(T)
    }

    #[test]
    fn frame_at_start() {
        let f = path_frame(&path(), 0.0).unwrap();
        // xi3(0) = i |psi2>
        assert!((f[2] - Vector3::new(ZERO, I, ZERO)).norm() < 1e-15);
        // xi1(0) = -|psi1>
        assert!((f[0] - Vector3::new(-ONE, ZERO, ZERO)).norm() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal() {
        for k in 0..50 {
            let t = T * (k as f64 * 0.618_033_988_7).fract();
            let f = path_frame(&path(), t).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    let g = f[a].dotc(&f[b]);
                    let expect = if a == b { ONE } else { ZERO };
                    assert!((g - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn out_of_range_times() {
        assert!(path_frame(&path(), -0.1).is_err());
        assert!(path_frame(&path(), 1.1).is_err());
    }

    #[test]
    fn mid_step_coefficients() {
        let c = counterdiabatic_hamiltonian(&path(), T / 2.0);
        let expect = PI * PI / (2.0 * 2f64.sqrt() * T);
        assert!((c.o1 - expect).abs() < 1e-13);
        assert!((c.o2 + expect).abs() < 1e-13);
        for k in 0..=20 {
            assert_eq!(counterdiabatic_hamiltonian(&path(), k as f64 / 20.0).o31, 0.0);
        }
    }

    #[test]
    fn propagator_endpoints() {
        let u0 = analytic_propagator(&path(), 0.0).unwrap();
        assert!((u0 - Matrix3::identity()).norm() < 1e-15);
        let ut = analytic_propagator(&path(), T).unwrap();
        // psi1 <-> psi3 exactly; the uncoupled middle state picks up a sign
        assert!((ut[(0, 2)] - ONE).norm() < 1e-15);
        assert!((ut[(2, 0)] - ONE).norm() < 1e-15);
        assert!((ut[(1, 1)] + ONE).norm() < 1e-15);
    }

    #[test]
    fn schedule_shape_uniform_coupling() {
        let s = assemble_schedule(&DeviceParams::uniform(66.0)).unwrap();
        assert!((s.amplitude(Drive::Omega03A1, 0.5).unwrap() - PI * PI / 2.0).abs() < 1e-12);
        assert!((s.peak(Drive::Omega14A2, 1000) - PI * PI / 2.0).abs() < 1e-9);
        for k in 0..=600 {
            let t = 6.0 * k as f64 / 600.0;
            let a = s.amplitude(Drive::Omega03A1, t).unwrap();
            let b = s.amplitude(Drive::Omega13A1, t).unwrap();
            assert!((a + b).abs() < 1e-12);
            if t > 1.0 {
                assert_eq!(a, 0.0);
            }
        }
        assert!(s.amplitude(Drive::OmegaB1, 6.5).is_err());
    }

    #[test]
    fn b_pulse_time_reversal() {
        let s = assemble_schedule(&DeviceParams::uniform(66.0)).unwrap();
        for k in 0..=100 {
            let tau = k as f64 / 100.0;
            let a3 = s.amplitude(Drive::OmegaB2, 2.0 + tau).unwrap();
            let a6 = s.amplitude(Drive::OmegaB2, 5.0 + tau).unwrap();
            assert!((a3 + a6).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_path() {
        #[derive(Debug)]
        struct Bad;
        impl PathParams for Bad {
            fn duration(&self) -> f64 {
                1.0
            }
            fn angles(&self, t: f64) -> PathAngles {
                PathAngles { theta: 0.0, vartheta: 0.0, varphi: t, theta_dot: 0.0, vartheta_dot: 0.0, varphi_dot: 1.0 }
            }
        }
        assert!(check_boundary_conditions(&Bad, 8).is_err());
        assert!(check_boundary_conditions(&path(), 64).is_ok());
    }

    #[test]
    fn drive_labels_parse() {
        for d in Drive::ALL {
            assert_eq!(d.label().parse::<Drive>().unwrap(), d);
        }
    }
}
