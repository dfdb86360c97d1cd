//! The six-step Bell-state analysis run end to end, its readout, and the
//! logical checks on individual steps.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::device::{protocol_hamiltonian, DeviceParams};
use crate::dynamics::{
    converge, evolve_lindblad, evolve_schrodinger, lindblad_operators, DecoherenceSpec, DrivenHamiltonian,
    IntegratorConfig,
};
use crate::error::{Error, Result};
use crate::operator::{SparseOperator, ONE, ZERO};
use crate::space::{build_space, HilbertSpace, SpaceLayout, A1, A2, B1, B2, MODE1, MODE2};
use crate::sta::{assemble_schedule, Drive, PulseSchedule, STEPS};
use crate::state::{partial_trace, DensityState, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellState {
    /// `(|00> + |11>)/sqrt2`
    PsiPlus,
    /// `(|00> - |11>)/sqrt2`
    PsiMinus,
    /// `(|01> + |10>)/sqrt2`
    PhiPlus,
    /// `(|01> - |10>)/sqrt2`
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PsiPlus, BellState::PsiMinus, BellState::PhiPlus, BellState::PhiMinus];

    pub fn label(self) -> &'static str {
        match self {
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
        }
    }

    /// Amplitudes on `|00>, |01>, |10>, |11>` of `B1 B2`.
    pub fn amplitudes(self) -> [C64; 4] {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellState::PsiPlus => [h, ZERO, ZERO, h],
            BellState::PsiMinus => [h, ZERO, ZERO, -h],
            BellState::PhiPlus => [ZERO, h, h, ZERO],
            BellState::PhiMinus => [ZERO, h, -h, ZERO],
        }
    }

    /// Ancilla levels `(A1, A2)` that identify this state at the end.
    pub fn readout(self) -> (usize, usize) {
        match self {
            BellState::PsiPlus => (0, 0),
            BellState::PsiMinus => (0, 1),
            BellState::PhiPlus => (1, 0),
            BellState::PhiMinus => (1, 1),
        }
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BellState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BellState::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown Bell state `{s}` (expected psi+, psi-, phi+ or phi-)")))
    }
}

/// Carrier-pair input. Ancillas start in `|0>` and cavities in vacuum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    Bell(BellState),
    /// Amplitudes on `|00>, |01>, |10>, |11>`; normalized on use.
    Carrier([C64; 4]),
}

impl InitialCondition {
    pub fn product(b1: usize, b2: usize) -> Self {
        let mut a = [ZERO; 4];
        a[2 * b1 + b2] = ONE;
        InitialCondition::Carrier(a)
    }

    pub fn label(&self) -> String {
        match self {
            InitialCondition::Bell(b) => b.label().to_string(),
            InitialCondition::Carrier(a) => {
                let terms: Vec<String> =
                    a.iter().enumerate().filter(|(_, c)| **c != ZERO).map(|(k, c)| format!("({:.4}{:+.4}i)|{:02b}>", c.re, c.im, k)).collect();
                terms.join("+")
            }
        }
    }

    pub fn carrier_amplitudes(&self) -> Result<[C64; 4]> {
        let mut a = match self {
            InitialCondition::Bell(b) => b.amplitudes(),
            InitialCondition::Carrier(a) => *a,
        };
        let n = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("carrier amplitudes must be finite and not all zero".into()));
        }
        a.iter_mut().for_each(|c| *c /= n);
        Ok(a)
    }

    pub fn pure_state(&self, space: &Arc<HilbertSpace>) -> Result<PureState> {
        let a = self.carrier_amplitudes()?;
        let mut terms = Vec::new();
        for (k, &c) in a.iter().enumerate() {
            if c != ZERO {
                terms.push((space.index_of(&[(B1, k >> 1), (B2, k & 1)])?, c));
            }
        }
        PureState::superposition(space.clone(), &terms)
    }
}

/// The four readout probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

impl Probabilities {
    pub fn get(&self, b: BellState) -> f64 {
        match b {
            BellState::PsiPlus => self.psi_plus,
            BellState::PsiMinus => self.psi_minus,
            BellState::PhiPlus => self.phi_plus,
            BellState::PhiMinus => self.phi_minus,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.psi_plus, self.psi_minus, self.phi_plus, self.phi_minus]
    }

    fn from_fn(mut f: impl FnMut(BellState) -> f64) -> Self {
        Self {
            psi_plus: f(BellState::PsiPlus),
            psi_minus: f(BellState::PsiMinus),
            phi_plus: f(BellState::PhiPlus),
            phi_minus: f(BellState::PhiMinus),
        }
    }
}

/// Ancilla and cavity populations at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub a1: [f64; 5],
    pub a2: [f64; 5],
    /// Population with at least one photon in either mode.
    pub photons: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evolution {
    Pure,
    Density,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub input: String,
    pub evolution: Evolution,
    pub dt: f64,
    pub halvings: u32,
    /// Readout with the cavities traced over.
    pub probabilities: Probabilities,
    /// Readout restricted to the cavity vacuum.
    pub vacuum_conditioned: Probabilities,
    /// Norm drift (pure runs) or trace drift (density runs).
    pub trace_drift: f64,
    /// Photon population left at the end.
    pub cavity_leakage: f64,
    /// Most negative eigenvalue seen (density runs; 0 for pure runs).
    pub min_eigenvalue: f64,
    /// Largest Hermiticity residual before symmetrization (density runs).
    pub max_asymmetry: f64,
    pub support_dim: usize,
    /// Populations at every step boundary, `t = 0, T, ..., 6T`.
    pub steps: Vec<Snapshot>,
}

impl ProtocolResult {
    /// The Bell state with the largest readout probability.
    pub fn outcome(&self) -> BellState {
        BellState::ALL
            .into_iter()
            .max_by(|a, b| self.probabilities.get(*a).total_cmp(&self.probabilities.get(*b)))
            .expect("four states")
    }
}

/// A protocol result together with everything needed to reproduce it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolRecord {
    pub params: DeviceParams,
    pub decoherence: DecoherenceSpec,
    pub result: ProtocolResult,
}

impl ProtocolRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// Everything needed to run the protocol repeatedly with different step sizes.
pub struct ProtocolSetup {
    pub params: DeviceParams,
    pub space: Arc<HilbertSpace>,
    pub schedule: PulseSchedule,
    pub hamiltonian: DrivenHamiltonian,
    pub collapse: Vec<SparseOperator>,
    pub decoherence: DecoherenceSpec,
}

impl ProtocolSetup {
    pub fn new(params: &DeviceParams, spec: &DecoherenceSpec) -> Result<Self> {
        params.validate()?;
        spec.validate()?;
        let space = params.space()?;
        let schedule = assemble_schedule(params)?;
        let hamiltonian = protocol_hamiltonian(params, &schedule)?;
        let collapse = lindblad_operators(spec, &space)?.into_iter().map(|l| l.operator).filter(|o| o.nnz() > 0).collect();
        Ok(Self { params: params.clone(), space, schedule, hamiltonian, collapse, decoherence: spec.clone() })
    }

    fn boundaries(&self) -> Vec<f64> {
        (0..=STEPS).map(|k| k as f64 * self.schedule.step_duration()).collect()
    }

    fn step_context(&self, err: Error, input: &str) -> Error {
        let t = match &err {
            Error::NormDrift { t, .. } | Error::TraceDrift { t, .. } | Error::NegativeEigenvalue { t, .. } => Some(*t),
            _ => None,
        };
        match t {
            Some(t) => err.in_context(format!("{input}, protocol step {}", self.schedule.step_at(t))),
            None => err.in_context(input.to_string()),
        }
    }

    /// One run at a fixed step size. The pure-state integrator is used when
    /// every decoherence rate is zero.
    pub fn run(&self, init: &InitialCondition, config: &IntegratorConfig) -> Result<ProtocolResult> {
        config.validate_for(self.params.max_frequency() * self.schedule.step_duration())?;
        let psi0 = init.pure_state(&self.space)?;
        let times = self.boundaries();
        let label = init.label();
        if self.collapse.is_empty() {
            let tr = evolve_schrodinger(&self.hamiltonian, &psi0, &times, config).map_err(|e| self.step_context(e, &label))?;
            let last = tr.last();
            let steps = tr.samples.iter().map(|(t, s)| snapshot(&self.space, *t, |i| s.amplitudes()[i].norm_sqr())).collect::<Vec<_>>();
            Ok(ProtocolResult {
                input: label,
                evolution: Evolution::Pure,
                dt: config.dt,
                halvings: 0,
                probabilities: pure_probabilities(last, false)?,
                vacuum_conditioned: pure_probabilities(last, true)?,
                trace_drift: tr.max_norm_drift,
                cavity_leakage: steps.last().expect("samples").photons,
                min_eigenvalue: 0.0,
                max_asymmetry: 0.0,
                support_dim: tr.support_dim,
                steps,
            })
        } else {
            let rho0 = psi0.to_density();
            let tr = evolve_lindblad(&self.hamiltonian, &self.collapse, &rho0, &times, config)
                .map_err(|e| self.step_context(e, &label))?;
            let last = tr.last();
            let steps =
                tr.samples.iter().map(|s| snapshot(&self.space, s.t, |i| s.state.get(i, i).re)).collect::<Vec<_>>();
            Ok(ProtocolResult {
                input: label,
                evolution: Evolution::Density,
                dt: config.dt,
                halvings: 0,
                probabilities: success_probabilities(last)?,
                vacuum_conditioned: vacuum_probabilities(last)?,
                trace_drift: tr.max_trace_drift,
                cavity_leakage: steps.last().expect("samples").photons,
                min_eigenvalue: tr.min_eigenvalue,
                max_asymmetry: tr.max_asymmetry,
                support_dim: tr.support_dim,
                steps,
            })
        }
    }

    /// Halves the step until all four probabilities settle.
    pub fn run_converged(&self, init: &InitialCondition, config: &IntegratorConfig) -> Result<ProtocolResult> {
        let c = converge(config, |dt| self.run(init, &config.with_dt(dt)), |r| r.probabilities.as_array().to_vec())?;
        Ok(ProtocolResult { halvings: c.halvings, ..c.result })
    }

    /// Final state of a pure run, for state-level checks.
    pub fn final_pure_state(&self, init: &InitialCondition, config: &IntegratorConfig) -> Result<PureState> {
        let psi0 = init.pure_state(&self.space)?;
        let tr = evolve_schrodinger(&self.hamiltonian, &psi0, &[0.0, self.schedule.total_duration()], config)?;
        Ok(tr.last().clone())
    }

    /// Propagates a pure state over `[t0, t1]` under the protocol Hamiltonian.
    pub fn propagate(&self, psi: &PureState, t0: f64, t1: f64, config: &IntegratorConfig) -> Result<PureState> {
        let tr = evolve_schrodinger(&self.hamiltonian, psi, &[t0, t1], config)?;
        Ok(tr.last().clone())
    }
}

/// Runs the protocol at `config.dt` (no convergence loop).
pub fn run_protocol(
    init: &InitialCondition,
    params: &DeviceParams,
    spec: &DecoherenceSpec,
    config: &IntegratorConfig,
) -> Result<ProtocolResult> {
    ProtocolSetup::new(params, spec)?.run(init, config)
}

/// Runs the protocol with step-size convergence.
pub fn run_protocol_converged(
    init: &InitialCondition,
    params: &DeviceParams,
    spec: &DecoherenceSpec,
    config: &IntegratorConfig,
) -> Result<ProtocolResult> {
    ProtocolSetup::new(params, spec)?.run_converged(init, config)
}

fn snapshot(space: &HilbertSpace, t: f64, pop: impl Fn(usize) -> f64) -> Snapshot {
    let pa1 = space.position(A1).expect("protocol layout");
    let pa2 = space.position(A2).expect("protocol layout");
    let pm1 = space.position(MODE1).expect("protocol layout");
    let pm2 = space.position(MODE2).expect("protocol layout");
    let mut s = Snapshot { t, a1: [0.0; 5], a2: [0.0; 5], photons: 0.0 };
    for i in 0..space.dim() {
        let p = pop(i);
        if p == 0.0 {
            continue;
        }
        s.a1[space.level_of(i, pa1)] += p;
        s.a2[space.level_of(i, pa2)] += p;
        if space.level_of(i, pm1) + space.level_of(i, pm2) > 0 {
            s.photons += p;
        }
    }
    s
}

/// Flat indices of `|a1 a2 b1 b2 m1 m2>` grouped by cavity configuration:
/// one entry per `(m1, m2)`, each holding the four carrier indices.
fn readout_indices(space: &HilbertSpace, b: BellState, vacuum_only: bool) -> Result<Vec<[usize; 4]>> {
    let (a1, a2) = b.readout();
    let n1 = space.subsystem_dim(MODE1)?;
    let n2 = space.subsystem_dim(MODE2)?;
    let mut out = Vec::new();
    for m1 in 0..n1 {
        for m2 in 0..n2 {
            if vacuum_only && (m1 > 0 || m2 > 0) {
                continue;
            }
            let mut idx = [0; 4];
            for (k, slot) in idx.iter_mut().enumerate() {
                *slot = space.index_of(&[(A1, a1), (A2, a2), (B1, k >> 1), (B2, k & 1), (MODE1, m1), (MODE2, m2)])?;
            }
            out.push(idx);
        }
    }
    Ok(out)
}

fn pure_probabilities(psi: &PureState, vacuum_only: bool) -> Result<Probabilities> {
    let space = psi.space();
    let mut err = None;
    let p = Probabilities::from_fn(|b| {
        let x = b.amplitudes();
        match readout_indices(space, b, vacuum_only) {
            Ok(groups) => groups
                .iter()
                .map(|idx| idx.iter().zip(&x).map(|(&i, c)| c.conj() * psi.amplitudes()[i]).sum::<C64>().norm_sqr())
                .sum(),
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    });
    err.map_or(Ok(p), Err)
}

fn density_probabilities(rho: &DensityState, vacuum_only: bool) -> Result<Probabilities> {
    let space = rho.space();
    let mut err = None;
    let p = Probabilities::from_fn(|b| {
        let x = b.amplitudes();
        match readout_indices(space, b, vacuum_only) {
            Ok(groups) => groups
                .iter()
                .map(|idx| {
                    let mut acc = ZERO;
                    for (&i, ci) in idx.iter().zip(&x) {
                        for (&j, cj) in idx.iter().zip(&x) {
                            acc += ci.conj() * rho.get(i, j) * cj;
                        }
                    }
                    acc.re
                })
                .sum(),
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    });
    err.map_or(Ok(p), Err)
}

/// Readout probabilities: projectors on `A1 A2 B1 B2` with the cavities
/// traced over.
pub fn success_probabilities(rho: &DensityState) -> Result<Probabilities> {
    density_probabilities(rho, false)
}

/// Readout probabilities with the cavities projected on vacuum.
pub fn vacuum_probabilities(rho: &DensityState) -> Result<Probabilities> {
    density_probabilities(rho, true)
}

/// Fidelity of the reduced carrier-pair state with a Bell state.
pub fn carrier_fidelity(rho: &DensityState, b: BellState) -> Result<f64> {
    let reduced = partial_trace(rho, &[B1, B2])?;
    let space = reduced.space().clone();
    let x = b.amplitudes();
    let mut amps = vec![ZERO; space.dim()];
    for (k, c) in x.iter().enumerate() {
        amps[space.index_of(&[(B1, k >> 1), (B2, k & 1)])?] = *c;
    }
    reduced.fidelity_with(&PureState::new(space, amps)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub expected: String,
    /// Population or fidelity, depending on the check.
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(name: impl Into<String>, expected: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), expected: expected.into(), value, threshold, pass: value >= threshold }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(
                f,
                "{} {:<40} expected {:<24} value {:.9} (>= {})",
                if r.pass { "ok  " } else { "FAIL" },
                r.name,
                r.expected,
                r.value,
                r.threshold
            )?;
        }
        Ok(())
    }
}

/// Population threshold for the ancilla truth table and end-to-end readout.
pub const TRUTH_TABLE_POPULATION: f64 = 0.999;
/// Fidelity threshold for the carrier rotation of step 3.
pub const ROTATION_FIDELITY: f64 = 1.0 - 1e-6;

/// Checks, without decoherence:
/// - the `A1` path through steps 1 and 2 for the four computational inputs,
/// - the Bell-state mapping produced by step 3 (phase-sensitive),
/// - the end-to-end ancilla readout for each Bell input.
pub fn verify_truth_tables(params: &DeviceParams, config: &IntegratorConfig) -> Result<CheckReport> {
    let setup = ProtocolSetup::new(params, &DecoherenceSpec::none())?;
    let tf = setup.schedule.step_duration();
    let space = setup.space.clone();
    let pa1 = space.position(A1)?;
    let mut report = CheckReport::default();

    for (b1, b2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let init = InitialCondition::product(b1, b2);
        let psi0 = init.pure_state(&space)?;
        let tr = evolve_schrodinger(&setup.hamiltonian, &psi0, &[0.0, tf, 2.0 * tf], config)?;
        let after1 = usize::from(b1 == 0);
        let after2 = after1 ^ usize::from(b2 == 0);
        for (k, level) in [(1, after1), (2, after2)] {
            let s = &tr.samples[k].1;
            let pop: f64 =
                (0..space.dim()).filter(|&i| space.level_of(i, pa1) == level).map(|i| s.amplitudes()[i].norm_sqr()).sum();
            report.rows.push(CheckRow::new(
                format!("|{b1}{b2}> A1 after step {k}"),
                format!("A1 in |{level}>"),
                pop,
                TRUTH_TABLE_POPULATION,
            ));
        }
    }

    for (input, output, sign) in rotation_table() {
        let psi0 = InitialCondition::Bell(input).pure_state(&space)?;
        let out = setup.propagate(&psi0, 2.0 * tf, 3.0 * tf, config)?;
        let mut expected = InitialCondition::Bell(output).pure_state(&space)?.into_amplitudes();
        expected.iter_mut().for_each(|c| *c *= sign);
        let overlap: C64 = expected.iter().zip(out.amplitudes()).map(|(e, a)| e.conj() * a).sum();
        report.rows.push(CheckRow::new(
            format!("step 3 on {input}"),
            format!("{}{output}", if sign < 0.0 { "-" } else { "" }),
            overlap.re,
            ROTATION_FIDELITY,
        ));
    }

    for b in BellState::ALL {
        let r = setup.run(&InitialCondition::Bell(b), config)?;
        let (a1, a2) = b.readout();
        report.rows.push(CheckRow::new(
            format!("readout of {b}"),
            format!("A1 A2 = {a1}{a2}"),
            r.probabilities.get(b),
            TRUTH_TABLE_POPULATION,
        ));
    }
    Ok(report)
}

/// Step 3 maps each Bell state to another with the sign shown.
pub fn rotation_table() -> [(BellState, BellState, f64); 4] {
    use BellState::*;
    [(PsiPlus, PsiPlus, 1.0), (PsiMinus, PhiPlus, 1.0), (PhiPlus, PsiMinus, -1.0), (PhiMinus, PhiMinus, 1.0)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Propagates a lone three-level carrier under its single-qubit pulse
/// (step 3 for forward, step 6 for inverse) and compares with the expected
/// rotation; also checks that inverse after forward is the identity.
pub fn single_qubit_check(direction: Direction, params: &DeviceParams, config: &IntegratorConfig) -> Result<CheckReport> {
    params.validate()?;
    let schedule = assemble_schedule(params)?;
    let tf = schedule.step_duration();
    let space = build_space(SpaceLayout::single(B1, 3))?;
    let phase = C64::from_polar(1.0, -params.epsilon1);
    let op = SparseOperator::from_triplets(space.clone(), [(0, 1, phase), (1, 0, phase.conj())])?;
    let s = schedule.clone();
    let h = DrivenHamiltonian::zero(space.clone()).with_drive("OmegaB1", op, move |t| s.amplitude_unchecked(Drive::OmegaB1, t))?;
    let window = |d: Direction| match d {
        Direction::Forward => (2.0 * tf, 3.0 * tf),
        Direction::Inverse => (5.0 * tf, 6.0 * tf),
    };
    let h2 = C64::new(FRAC_1_SQRT_2, 0.0);
    let expected = |d: Direction, k: usize| -> [C64; 3] {
        match (d, k) {
            (Direction::Forward, 0) => [h2, h2, ZERO],
            (Direction::Forward, _) => [-h2, h2, ZERO],
            (Direction::Inverse, 0) => [h2, -h2, ZERO],
            (Direction::Inverse, _) => [h2, h2, ZERO],
        }
    };
    let mut report = CheckReport::default();
    let (t0, t1) = window(direction);
    for k in 0..2 {
        let psi = PureState::basis(space.clone(), k)?;
        let out = evolve_schrodinger(&h, &psi, &[t0, t1], config)?.last().clone();
        let e = expected(direction, k);
        let overlap: C64 = e.iter().zip(out.amplitudes()).map(|(a, b)| a.conj() * b).sum();
        report.rows.push(CheckRow::new(
            format!("{direction:?} rotation of |{k}>").to_lowercase(),
            "closed-form rotation",
            overlap.re,
            ROTATION_FIDELITY,
        ));
    }
    for k in 0..2 {
        let psi = PureState::basis(space.clone(), k)?;
        let (f0, f1) = window(Direction::Forward);
        let (i0, i1) = window(Direction::Inverse);
        let mid = evolve_schrodinger(&h, &psi, &[f0, f1], config)?.last().clone();
        let out = evolve_schrodinger(&h, &mid, &[i0, i1], config)?.last().clone();
        report.rows.push(CheckRow::new(format!("inverse after forward on |{k}>"), "identity", out.amplitudes()[k].re, 1.0 - 1e-8));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_states_are_orthonormal() {
        for a in BellState::ALL {
            for b in BellState::ALL {
                let ip: C64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x.conj() * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!("PHI-".parse::<BellState>().unwrap(), BellState::PhiMinus);
        assert!("chi".parse::<BellState>().is_err());
    }

    fn readout_state(b: BellState) -> DensityState {
        let p = DeviceParams::default();
        let space = p.space().unwrap();
        let (a1, a2) = b.readout();
        let x = b.amplitudes();
        let mut amps = vec![ZERO; space.dim()];
        for (k, c) in x.iter().enumerate() {
            amps[space.index_of(&[(A1, a1), (A2, a2), (B1, k >> 1), (B2, k & 1)]).unwrap()] = *c;
        }
        PureState::new(space, amps).unwrap().to_density()
    }

    #[test]
    fn projectors_pick_out_readout_patterns() {
        for b in BellState::ALL {
            let p = success_probabilities(&readout_state(b)).unwrap();
            for c in BellState::ALL {
                let want = if b == c { 1.0 } else { 0.0 };
                assert!((p.get(c) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn computational_block_mixture_gives_one_sixteenth() {
        let p = DeviceParams::default();
        let space = p.space().unwrap();
        let n = space.dim();
        let mut data = vec![ZERO; n * n];
        for k in 0..16 {
            let i = space
                .index_of(&[(A1, (k >> 3) & 1), (A2, (k >> 2) & 1), (B1, (k >> 1) & 1), (B2, k & 1)])
                .unwrap();
            data[i * n + i] = C64::new(1.0 / 16.0, 0.0);
        }
        let rho = DensityState::new(space, data).unwrap();
        for v in success_probabilities(&rho).unwrap().as_array() {
            assert!((v - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn carrier_inputs_normalize() {
        let init = InitialCondition::Carrier([C64::new(3.0, 0.0), ZERO, ZERO, C64::new(0.0, 4.0)]);
        let a = init.carrier_amplitudes().unwrap();
        assert!((a[0].re - 0.6).abs() < 1e-15 && (a[3].im - 0.8).abs() < 1e-15);
        assert!(InitialCondition::Carrier([ZERO; 4]).carrier_amplitudes().is_err());
    }

    #[test]
    fn single_qubit_rotations() {
        let p = DeviceParams::default();
        let c = IntegratorConfig::default();
        for d in [Direction::Forward, Direction::Inverse] {
            let r = single_qubit_check(d, &p, &c).unwrap();
            assert!(r.all_pass(), "{r}");
        }
    }
}
