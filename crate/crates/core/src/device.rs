//! Device parameters, the interaction-picture Hamiltonian of the full
//! system, and the nine-state and three-state models of each
//! cavity-assisted step.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_schrodinger, DecoherenceSpec, DrivenHamiltonian, IntegratorConfig};
use crate::error::{Error, Result};
use crate::operator::{embed, SparseOperator, ONE, ZERO};
use crate::space::{build_space, HilbertSpace, SpaceLayout, A1, A2, B1, B2, MODE1, MODE2};
use crate::sta::{Drive, PulseSchedule};
use crate::state::PureState;

/// Couplings are angular frequencies in units of `1/T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub g23_a1: f64,
    pub g24_a1: f64,
    pub g23_a2: f64,
    pub g24_a2: f64,
    pub g_b1: f64,
    pub g_b2: f64,
    /// Duration `T` of one protocol step.
    pub step_duration: f64,
    /// Phases of the two B-qubit drives.
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// Fock levels kept per cavity mode (1 photon -> 2 levels).
    pub photon_levels: usize,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::uniform(66.0)
    }
}

impl DeviceParams {
    /// All six couplings equal to `g`, `T = 1`.
    pub fn uniform(g: f64) -> Self {
        Self {
            g23_a1: g,
            g24_a1: g,
            g23_a2: g,
            g24_a2: g,
            g_b1: g,
            g_b2: g,
            step_duration: 1.0,
            epsilon1: FRAC_PI_2,
            epsilon2: FRAC_PI_2,
            photon_levels: 2,
        }
    }

    pub fn with_photon_levels(mut self, levels: usize) -> Self {
        self.photon_levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let couplings = [
            ("g23A1", self.g23_a1),
            ("g24A1", self.g24_a1),
            ("g23A2", self.g23_a2),
            ("g24A2", self.g24_a2),
            ("gB1", self.g_b1),
            ("gB2", self.g_b2),
            ("T", self.step_duration),
        ];
        for (name, v) in couplings {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.epsilon1.is_finite() || !self.epsilon2.is_finite() {
            return Err(Error::InvalidParameter("drive phases must be finite".into()));
        }
        if self.photon_levels < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 photon levels, got {}", self.photon_levels)));
        }
        Ok(())
    }

    /// `(gA, gB)` coupling pair of a cavity-assisted step.
    pub fn coupling_pair(&self, step: u8) -> Result<(f64, f64)> {
        match step {
            1 => Ok((self.g23_a1, self.g_b1)),
            2 => Ok((self.g24_a1, self.g_b2)),
            4 => Ok((self.g23_a2, self.g_b1)),
            5 => Ok((self.g24_a2, self.g_b2)),
            s => Err(Error::NoSubspaceModel(s)),
        }
    }

    /// Largest cavity eigenfrequency `sqrt(gA^2 + gB^2)` over all steps.
    pub fn max_frequency(&self) -> f64 {
        [1, 2, 4, 5]
            .into_iter()
            .map(|s| {
                let (a, b) = self.coupling_pair(s).expect("cavity step");
                a.hypot(b)
            })
            .fold(0.0, f64::max)
    }

    pub fn space(&self) -> Result<Arc<HilbertSpace>> {
        build_space(SpaceLayout::protocol(self.photon_levels))
    }
}

/// Laboratory parameters in MHz. `omega_max` and `g` are cyclic
/// frequencies (multiplied by `2 pi` on conversion); the three rates are
/// used as given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabParameters {
    pub omega_max_mhz: f64,
    pub g_mhz: f64,
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
    pub gamma_phi_mhz: f64,
}

impl LabParameters {
    /// The reference experimental point.
    pub fn reference() -> Self {
        Self { omega_max_mhz: 6.37, g_mhz: 85.14, kappa_mhz: 1.32, gamma_mhz: 0.40, gamma_phi_mhz: 0.20 }
    }

    /// Converts to step-duration units by pinning the peak cavity-assisted
    /// amplitude `pi^2 / (2T)` to `2 pi omega_max`.
    pub fn to_model(&self, step_duration: f64) -> (DeviceParams, DecoherenceSpec) {
        let omega_max = 2.0 * PI * self.omega_max_mhz;
        let scale = crate::sta::omega_max(step_duration) / omega_max;
        let params = DeviceParams { step_duration, ..DeviceParams::uniform(2.0 * PI * self.g_mhz * scale) };
        let spec = DecoherenceSpec::uniform(self.gamma_mhz * scale, self.gamma_phi_mhz * scale, self.kappa_mhz * scale);
        (params, spec)
    }
}

fn local(dim: usize) -> Result<Arc<HilbertSpace>> {
    build_space(SpaceLayout::single("local", dim))
}

/// `|row><col|` on one subsystem, embedded.
fn flip(space: &Arc<HilbertSpace>, label: &str, row: usize, col: usize) -> Result<SparseOperator> {
    let d = space.subsystem_dim(label)?;
    embed(&SparseOperator::transition(local(d)?, row, col)?, label, space)
}

fn annihilator(space: &Arc<HilbertSpace>, label: &str) -> Result<SparseOperator> {
    let d = space.subsystem_dim(label)?;
    embed(&SparseOperator::annihilation(local(d)?), label, space)
}

fn hermitian_pair(x: SparseOperator) -> SparseOperator {
    let xd = x.dagger();
    x + xd
}

/// Time-independent qubit-cavity coupling: every A qubit's `|2>-|3>` and
/// `|2>-|4>` transitions couple to modes `a1` and `a2`, and each B qubit's
/// `|0>-|2>` transition couples to its own mode.
pub fn cavity_hamiltonian(params: &DeviceParams, space: &Arc<HilbertSpace>) -> Result<SparseOperator> {
    let a1 = annihilator(space, MODE1)?;
    let a2 = annihilator(space, MODE2)?;
    let terms = [
        (A1, 3, 2, &a1, params.g23_a1),
        (A1, 4, 2, &a2, params.g24_a1),
        (A2, 3, 2, &a1, params.g23_a2),
        (A2, 4, 2, &a2, params.g24_a2),
        (B1, 2, 0, &a1, params.g_b1),
        (B2, 2, 0, &a2, params.g_b2),
    ];
    let mut h = SparseOperator::zero(space.clone());
    for (qubit, upper, lower, mode, g) in terms {
        let x = flip(space, qubit, upper, lower)?.try_mul(mode)?.scale(g);
        h = h + hermitian_pair(x);
    }
    Ok(h)
}

/// Hermitian operator multiplying a drive's real amplitude.
pub fn drive_operator(params: &DeviceParams, drive: Drive, space: &Arc<HilbertSpace>) -> Result<SparseOperator> {
    let (qubit, lower, upper, phase) = match drive {
        Drive::Omega03A1 => (A1, 0, 3, 0.0),
        Drive::Omega13A1 => (A1, 1, 3, 0.0),
        Drive::Omega04A1 => (A1, 0, 4, 0.0),
        Drive::Omega14A1 => (A1, 1, 4, 0.0),
        Drive::Omega03A2 => (A2, 0, 3, 0.0),
        Drive::Omega13A2 => (A2, 1, 3, 0.0),
        Drive::Omega04A2 => (A2, 0, 4, 0.0),
        Drive::Omega14A2 => (A2, 1, 4, 0.0),
        Drive::OmegaB1 => (B1, 0, 1, params.epsilon1),
        Drive::OmegaB2 => (B2, 0, 1, params.epsilon2),
    };
    Ok(hermitian_pair(flip(space, qubit, lower, upper)?.scale(C64::from_polar(1.0, -phase))))
}

/// The full protocol Hamiltonian as a static cavity part plus ten driven
/// terms with the schedule's amplitudes as coefficients.
pub fn protocol_hamiltonian(params: &DeviceParams, schedule: &PulseSchedule) -> Result<DrivenHamiltonian> {
    params.validate()?;
    let space = params.space()?;
    let mut h = DrivenHamiltonian::new(cavity_hamiltonian(params, &space)?);
    for drive in Drive::ALL {
        let s = schedule.clone();
        h.push_drive(drive.label(), drive_operator(params, drive, &space)?, Arc::new(move |t| s.amplitude_unchecked(drive, t)))?;
    }
    Ok(h)
}

/// The full Hamiltonian at time `t` in `[0, 6T]`.
pub fn full_hamiltonian(params: &DeviceParams, schedule: &PulseSchedule, t: f64) -> Result<SparseOperator> {
    let end = schedule.total_duration();
    if !(t >= 0.0 && t <= end) {
        return Err(Error::TimeOutOfRange { t, start: 0.0, end });
    }
    Ok(protocol_hamiltonian(params, schedule)?.at(t))
}

/// A product ket with every subsystem's level given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisKet {
    pub name: String,
    pub levels: Vec<(String, usize)>,
}

impl BasisKet {
    pub fn index(&self, space: &HilbertSpace) -> Result<usize> {
        let assignment: Vec<(&str, usize)> = self.levels.iter().map(|(l, k)| (l.as_str(), *k)).collect();
        space.index_of(&assignment)
    }

    pub fn level(&self, label: &str) -> Option<usize> {
        self.levels.iter().find(|(l, _)| l == label).map(|(_, k)| *k)
    }
}

/// The nine-state model of a cavity-assisted step, with the other ancilla,
/// the other carrier and the other mode idle in their ground states.
#[derive(Clone, Debug)]
pub struct SubspaceModel {
    pub step_id: u8,
    pub ancilla: &'static str,
    pub carrier: &'static str,
    pub mode: &'static str,
    /// Excited ancilla level used by the step (3 or 4).
    pub excited: usize,
    pub g_a: f64,
    pub g_b: f64,
    pub drive_ground: Drive,
    pub drive_excited: Drive,
    pub basis: Vec<BasisKet>,
}

/// Positions in the nine-state basis.
pub mod ket {
    pub const PSI1: usize = 0;
    pub const PSI2: usize = 1;
    pub const PSI3: usize = 2;
    pub const PSI4: usize = 3;
    pub const PSI5: usize = 4;
    pub const PSI6: usize = 5;
    pub const PSI7: usize = 6;
    pub const PSI8: usize = 7;
    pub const PSI9: usize = 8;
}

pub fn step_subspace_model(step_id: u8, params: &DeviceParams) -> Result<SubspaceModel> {
    let (ancilla, excited, carrier, mode, drive_ground, drive_excited) = match step_id {
        1 => (A1, 3, B1, MODE1, Drive::Omega03A1, Drive::Omega13A1),
        2 => (A1, 4, B2, MODE2, Drive::Omega04A1, Drive::Omega14A1),
        4 => (A2, 3, B1, MODE1, Drive::Omega03A2, Drive::Omega13A2),
        5 => (A2, 4, B2, MODE2, Drive::Omega04A2, Drive::Omega14A2),
        s => return Err(Error::NoSubspaceModel(s)),
    };
    let (g_a, g_b) = params.coupling_pair(step_id)?;
    let idle = |label: &str| -> &'static str {
        match label {
            A1 => A2,
            A2 => A1,
            B1 => B2,
            B2 => B1,
            MODE1 => MODE2,
            _ => MODE1,
        }
    };
    let triples = [(0, 0, 0), (excited, 0, 0), (2, 0, 1), (2, 2, 0), (1, 0, 0), (0, 1, 0), (excited, 1, 0), (2, 1, 1), (1, 1, 0)];
    let basis = triples
        .iter()
        .enumerate()
        .map(|(k, &(a, b, m))| BasisKet {
            name: format!("psi{}", k + 1),
            levels: vec![
                (ancilla.to_string(), a),
                (carrier.to_string(), b),
                (mode.to_string(), m),
                (idle(ancilla).to_string(), 0),
                (idle(carrier).to_string(), 0),
                (idle(mode).to_string(), 0),
            ],
        })
        .collect();
    Ok(SubspaceModel { step_id, ancilla, carrier, mode, excited, g_a, g_b, drive_ground, drive_excited, basis })
}

impl SubspaceModel {
    /// Start of this step on the protocol clock.
    pub fn start_time(&self, step_duration: f64) -> f64 {
        (self.step_id - 1) as f64 * step_duration
    }

    /// Flat indices of the basis kets in `space`.
    pub fn indices(&self, space: &HilbertSpace) -> Result<Vec<usize>> {
        self.basis.iter().map(|k| k.index(space)).collect()
    }

    /// Constant cavity part over the nine kets.
    pub fn cavity_part(&self) -> DMatrix<C64> {
        use ket::*;
        let mut h = DMatrix::zeros(9, 9);
        let mut set = |i: usize, j: usize, v: f64| {
            h[(i, j)] = C64::new(v, 0.0);
            h[(j, i)] = C64::new(v, 0.0);
        };
        set(PSI2, PSI3, self.g_a);
        set(PSI7, PSI8, self.g_a);
        set(PSI4, PSI3, self.g_b);
        h
    }

    /// Drive part for amplitudes `(ground, excited)` of the step's two drives.
    pub fn drive_part(&self, omega_ground: f64, omega_excited: f64) -> DMatrix<C64> {
        use ket::*;
        let mut h = DMatrix::zeros(9, 9);
        let mut set = |i: usize, j: usize, v: f64| {
            h[(i, j)] = C64::new(v, 0.0);
            h[(j, i)] = C64::new(v, 0.0);
        };
        set(PSI1, PSI2, omega_ground);
        set(PSI6, PSI7, omega_ground);
        set(PSI5, PSI2, omega_excited);
        set(PSI9, PSI7, omega_excited);
        h
    }

    /// Nine-state Hamiltonian at step-local time `tau` in `[0, T]`.
    pub fn hamiltonian(&self, schedule: &PulseSchedule, tau: f64) -> Result<DMatrix<C64>> {
        let t = self.start_time(schedule.step_duration()) + tau;
        Ok(self.cavity_part() + self.drive_part(schedule.amplitude(self.drive_ground, t)?, schedule.amplitude(self.drive_excited, t)?))
    }

    /// The nine-state Hamiltonian as a driven operator on a 9-level space,
    /// with step-local time.
    pub fn driven_hamiltonian(&self, schedule: &PulseSchedule) -> Result<DrivenHamiltonian> {
        let space = build_space(SpaceLayout::single("subspace", 9))?;
        let dense = |m: DMatrix<C64>| {
            let trip: Vec<_> = (0..9).flat_map(|i| (0..9).map(move |j| (i, j))).filter(|&(i, j)| m[(i, j)] != ZERO).map(|(i, j)| (i, j, m[(i, j)])).collect();
            SparseOperator::from_triplets(space.clone(), trip)
        };
        let t0 = self.start_time(schedule.step_duration());
        let mut h = DrivenHamiltonian::new(dense(self.cavity_part())?);
        for (drive, op) in [(self.drive_ground, self.drive_part(1.0, 0.0)), (self.drive_excited, self.drive_part(0.0, 1.0))] {
            let s = schedule.clone();
            h.push_drive(drive.label(), dense(op)?, Arc::new(move |tau| s.amplitude_unchecked(drive, t0 + tau)))?;
        }
        Ok(h)
    }

    /// Dark state of the cavity part as amplitudes on `(psi2, psi4)`.
    pub fn dark_state(&self) -> (f64, f64) {
        let n = self.g_a.hypot(self.g_b);
        (self.g_b / n, -self.g_a / n)
    }

    /// The dark state as a nine-component vector.
    pub fn dark_vector(&self) -> nalgebra::DVector<C64> {
        let (c2, c4) = self.dark_state();
        let mut v = nalgebra::DVector::zeros(9);
        v[ket::PSI2] = C64::new(c2, 0.0);
        v[ket::PSI4] = C64::new(c4, 0.0);
        v
    }

    /// Expected cavity-part spectrum, ascending.
    pub fn cavity_spectrum(&self) -> Vec<f64> {
        let w = self.g_a.hypot(self.g_b);
        vec![-w, -self.g_a, 0.0, 0.0, 0.0, 0.0, 0.0, self.g_a, w]
    }
}

/// Three-state chain `(psi1, dark, psi5)` that the step reduces to when the
/// drives are weak compared with the couplings.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pub step_id: u8,
    /// `gB / sqrt(gA^2 + gB^2)`.
    pub coupling_scale: f64,
    /// Dark-state amplitudes on `(psi2, psi4)`.
    pub dark_state: (f64, f64),
    pub chain: [&'static str; 3],
    drive_ground: Drive,
    drive_excited: Drive,
    start: f64,
    schedule: PulseSchedule,
}

impl EffectiveModel {
    /// Logs a warning when the peak drive exceeds a fifth of the smaller
    /// coupling, where the reduction is no longer reliable.
    pub fn new(model: &SubspaceModel, schedule: &PulseSchedule) -> Self {
        let peak = schedule.peak(model.drive_ground, 200).max(schedule.peak(model.drive_excited, 200));
        let g = model.g_a.min(model.g_b);
        if peak > g / 5.0 {
            log::warn!(
                "step {}: peak drive {peak:.3} exceeds g/5 = {:.3}; the effective chain is a poor approximation",
                model.step_id,
                g / 5.0
            );
        }
        Self {
            step_id: model.step_id,
            coupling_scale: model.g_b / model.g_a.hypot(model.g_b),
            dark_state: model.dark_state(),
            chain: ["psi1", "dark", "psi5"],
            drive_ground: model.drive_ground,
            drive_excited: model.drive_excited,
            start: model.start_time(schedule.step_duration()),
            schedule: schedule.clone(),
        }
    }

    /// Chain Hamiltonian at step-local time `tau`.
    pub fn hamiltonian(&self, tau: f64) -> Matrix3<C64> {
        let k = self.coupling_scale;
        let a = k * self.schedule.amplitude_unchecked(self.drive_ground, self.start + tau);
        let b = k * self.schedule.amplitude_unchecked(self.drive_excited, self.start + tau);
        let mut h = Matrix3::zeros();
        h[(0, 1)] = C64::new(a, 0.0);
        h[(1, 0)] = C64::new(a, 0.0);
        h[(2, 1)] = C64::new(b, 0.0);
        h[(1, 2)] = C64::new(b, 0.0);
        h
    }

    pub fn driven_hamiltonian(&self) -> Result<DrivenHamiltonian> {
        let space = build_space(SpaceLayout::single("chain", 3))?;
        let k = self.coupling_scale;
        let mut h = DrivenHamiltonian::zero(space.clone());
        for (drive, i) in [(self.drive_ground, 0), (self.drive_excited, 2)] {
            let op = SparseOperator::from_triplets(space.clone(), [(i, 1, ONE), (1, i, ONE)])?;
            let s = self.schedule.clone();
            let t0 = self.start;
            h.push_drive(drive.label(), op, Arc::new(move |tau| k * s.amplitude_unchecked(drive, t0 + tau)))?;
        }
        Ok(h)
    }
}

/// Effective chain Hamiltonian of a step at step-local time `tau`.
pub fn effective_hamiltonian(model: &SubspaceModel, schedule: &PulseSchedule, tau: f64) -> Matrix3<C64> {
    EffectiveModel::new(model, schedule).hamiltonian(tau)
}

/// Final populations of `psi1` and `psi5` after one step, from the
/// nine-state model and from the effective chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveComparison {
    pub step_id: u8,
    pub full: (f64, f64),
    pub effective: (f64, f64),
}

impl EffectiveComparison {
    pub fn disagreement(&self) -> f64 {
        (self.full.0 - self.effective.0).abs().max((self.full.1 - self.effective.1).abs())
    }
}

/// Starts a step in `psi1` and propagates both models over the step.
pub fn compare_effective(step_id: u8, params: &DeviceParams, config: &IntegratorConfig) -> Result<EffectiveComparison> {
    let model = step_subspace_model(step_id, params)?;
    let schedule = crate::sta::assemble_schedule(params)?;
    let tf = schedule.step_duration();
    config.validate_for(model.g_a.hypot(model.g_b) * tf)?;

    let h9 = model.driven_hamiltonian(&schedule)?;
    let psi9 = PureState::basis(h9.space().clone(), ket::PSI1)?;
    let full = evolve_schrodinger(&h9, &psi9, &[0.0, tf], config)?;
    let f = full.last();

    let eff = EffectiveModel::new(&model, &schedule);
    let h3 = eff.driven_hamiltonian()?;
    let psi3 = PureState::basis(h3.space().clone(), 0)?;
    let chain = evolve_schrodinger(&h3, &psi3, &[0.0, tf], config)?;
    let e = chain.last();

    Ok(EffectiveComparison {
        step_id,
        full: (f.population(ket::PSI1), f.population(ket::PSI5)),
        effective: (e.population(0), e.population(2)),
    })
}
