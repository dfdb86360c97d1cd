//! Decoherence channels and the Lindblad master equation
//! `d rho/dt = i[rho, H] + sum_p (L_p rho L_p^+ - {L_p^+ L_p, rho}/2)`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::config::{segment_steps, IntegratorConfig};
use super::hamiltonian::{DrivenHamiltonian, RestrictedHamiltonian};
use super::schrodinger::check_times;
use super::support::closure;
use crate::error::{Error, Result};
use crate::operator::{embed, CsrMatrix, SparseOperator, I, ZERO};
use crate::space::{build_space, HilbertSpace, SpaceLayout, A1, A2, B1, B2, MODE1, MODE2};
use crate::state::{symmetrize_in_place, DensityState};

/// Trace drift that aborts a density-matrix run.
pub const TRACE_ABORT: f64 = 1e-6;
/// Most negative eigenvalue tolerated at a checkpoint before aborting.
pub const EIGENVALUE_ABORT: f64 = -1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    /// `sqrt(rate) |lower><upper|`
    Emission,
    /// `sqrt(rate) a`
    CavityDecay,
    /// `sqrt(rate) (|upper><upper| - |lower><lower|)`
    Dephasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub kind: ChannelKind,
    /// Subsystem label (`A1`, `A2`, `B1`, `B2`, `a1`, `a2`).
    pub target: &'static str,
    pub upper: usize,
    pub lower: usize,
}

impl Channel {
    const fn new(kind: ChannelKind, target: &'static str, upper: usize, lower: usize) -> Self {
        Self { kind, target, upper, lower }
    }

    /// Override key, e.g. `gamma30A1`, `gammaphi21B2`, `kappa1`.
    pub fn key(&self) -> String {
        match self.kind {
            ChannelKind::Emission => format!("gamma{}{}{}", self.upper, self.lower, self.target),
            ChannelKind::Dephasing => format!("gammaphi{}{}{}", self.upper, self.lower, self.target),
            ChannelKind::CavityDecay => format!("kappa{}", &self.target[1..]),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// The 34 channels in their conventional order. Transitions between the two
/// excited ancilla levels and between ancilla level 2 and the qubit levels
/// are excluded.
pub fn channels() -> Vec<Channel> {
    use ChannelKind::*;
    let mut out = Vec::with_capacity(34);
    for a in [A1, A2] {
        for upper in [3, 4] {
            for lower in 0..3 {
                out.push(Channel::new(Emission, a, upper, lower));
            }
        }
    }
    for b in [B1, B2] {
        for lower in 0..2 {
            out.push(Channel::new(Emission, b, 2, lower));
        }
    }
    out.push(Channel::new(CavityDecay, MODE1, 1, 0));
    out.push(Channel::new(CavityDecay, MODE2, 1, 0));
    for a in [A1, A2] {
        for upper in [3, 4] {
            for lower in 0..3 {
                out.push(Channel::new(Dephasing, a, upper, lower));
            }
        }
    }
    for b in [B1, B2] {
        for lower in 0..2 {
            out.push(Channel::new(Dephasing, b, 2, lower));
        }
    }
    out
}

/// Uniform rates plus optional per-channel overrides keyed by [`Channel::key`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSpec {
    pub gamma: f64,
    pub gamma_phi: f64,
    pub kappa: f64,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

impl DecoherenceSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn uniform(gamma: f64, gamma_phi: f64, kappa: f64) -> Self {
        Self { gamma, gamma_phi, kappa, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, key: impl Into<String>, rate: f64) -> Self {
        self.overrides.insert(key.into(), rate);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("gamma", self.gamma), ("gamma_phi", self.gamma_phi), ("kappa", self.kappa)] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be a finite nonnegative rate, got {r}")));
            }
        }
        let keys: Vec<String> = channels().iter().map(Channel::key).collect();
        for (k, &r) in &self.overrides {
            if !keys.contains(k) {
                return Err(Error::UnknownChannel(k.clone()));
            }
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!("rate for {k} must be finite and nonnegative, got {r}")));
            }
        }
        Ok(())
    }

    pub fn rate(&self, channel: &Channel) -> f64 {
        if let Some(&r) = self.overrides.get(&channel.key()) {
            return r;
        }
        match channel.kind {
            ChannelKind::Emission => self.gamma,
            ChannelKind::Dephasing => self.gamma_phi,
            ChannelKind::CavityDecay => self.kappa,
        }
    }

    pub fn is_zero(&self) -> bool {
        channels().iter().all(|c| self.rate(c) == 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct LindbladOperator {
    pub channel: Channel,
    pub rate: f64,
    pub operator: SparseOperator,
}

/// Builds all 34 collapse operators on `space` (which must contain the
/// protocol subsystems). Zero rates yield zero operators.
pub fn lindblad_operators(spec: &DecoherenceSpec, space: &Arc<HilbertSpace>) -> Result<Vec<LindbladOperator>> {
    spec.validate()?;
    let local = |dim: usize| -> Result<Arc<HilbertSpace>> { build_space(SpaceLayout::single("local", dim)) };
    channels()
        .into_iter()
        .map(|channel| {
            let dim = space.subsystem_dim(channel.target)?;
            let ls = local(dim)?;
            let op = match channel.kind {
                ChannelKind::Emission => SparseOperator::transition(ls, channel.lower, channel.upper)?,
                ChannelKind::CavityDecay => SparseOperator::annihilation(ls),
                ChannelKind::Dephasing => SparseOperator::from_triplets(
                    ls,
                    [(channel.upper, channel.upper, C64::new(1.0, 0.0)), (channel.lower, channel.lower, C64::new(-1.0, 0.0))],
                )?,
            };
            let rate = spec.rate(&channel);
            let operator = embed(&op, channel.target, space)?.scale(rate.sqrt());
            Ok(LindbladOperator { channel, rate, operator })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DensitySample {
    pub t: f64,
    pub state: DensityState,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug)]
pub struct LindbladTrajectory {
    pub samples: Vec<DensitySample>,
    /// Largest `|Tr rho - Tr rho0|` over all steps.
    pub max_trace_drift: f64,
    /// Largest Hermiticity residual seen before symmetrization.
    pub max_asymmetry: f64,
    /// Hermiticity residual after the final symmetrization.
    pub final_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub support_dim: usize,
    pub steps: usize,
}

impl LindbladTrajectory {
    pub fn last(&self) -> &DensityState {
        &self.samples.last().expect("trajectory has at least one sample").state
    }

    /// CSV `t,trace,min_eigenvalue,<label>...` with the expectation of each
    /// observable at every sample.
    pub fn write_csv<W: Write>(&self, mut out: W, observables: &[(String, SparseOperator)]) -> Result<()> {
        let io = |e| Error::io("<trajectory>", e);
        write!(out, "t,trace,min_eigenvalue").map_err(io)?;
        for (label, _) in observables {
            write!(out, ",{label}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
        for s in &self.samples {
            write!(
                out,
                "{},{},{}",
                crate::sweep::fmt9(s.t),
                crate::sweep::fmt9(s.trace),
                crate::sweep::fmt9(s.min_eigenvalue)
            )
            .map_err(io)?;
            for (_, op) in observables {
                let v = crate::state::expectation(op, &s.state)?;
                write!(out, ",{}", crate::sweep::fmt9(v.re)).map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        Ok(())
    }

    pub fn dump_csv(&self, path: impl AsRef<Path>, observables: &[(String, SparseOperator)]) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file), observables)
    }
}

/// Precomputed right-hand side on the invariant support.
struct LindbladRhs {
    n: usize,
    hamiltonian: RestrictedHamiltonian,
    /// `H_static - (i/2) sum L^+ L`
    effective_static: CsrMatrix,
    /// `W_ij = sum_p d_pi conj(d_pj)` over diagonal jump operators
    diagonal_weights: Option<Vec<C64>>,
    general_jumps: Vec<Vec<(usize, usize, C64)>>,
    scratch: Vec<C64>,
}

impl LindbladRhs {
    fn eval(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.n;
        let b = &mut self.scratch;
        b.iter_mut().for_each(|x| *x = ZERO);
        // b = -i K(t) rho
        self.effective_static.mul_dense_add(-I, rho, b);
        for (m, c) in self.hamiltonian.active(t) {
            m.mul_dense_add(-I * c, rho, b);
        }
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = b[i * n + j] + b[j * n + i].conj();
            }
        }
        if let Some(w) = &self.diagonal_weights {
            for ((o, &wij), &r) in out.iter_mut().zip(w).zip(rho) {
                *o += wij * r;
            }
        }
        for jump in &self.general_jumps {
            for &(i, k, a) in jump {
                for &(j, l, b) in jump {
                    out[i * n + j] += a * rho[k * n + l] * b.conj();
                }
            }
        }
    }
}

/// Integrates the master equation from `times[0]`, recording the state at
/// every requested time. The Hamiltonian term is `i[rho, H]`, i.e.
/// `-i[H, rho]`.
pub fn evolve_lindblad(
    h: &DrivenHamiltonian,
    l_ops: &[SparseOperator],
    rho0: &DensityState,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<LindbladTrajectory> {
    config.validate()?;
    check_times(times)?;
    let space = h.space().clone();
    if rho0.space().as_ref() != space.as_ref() || l_ops.iter().any(|l| l.space().as_ref() != space.as_ref()) {
        return Err(Error::SpaceMismatch);
    }
    let full_n = space.dim();
    let trace0 = rho0.trace().re;
    if (trace0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("initial trace {trace0} != 1")));
    }
    if rho0.hermiticity_residual() > 1e-10 {
        return Err(Error::InvalidParameter("initial density matrix is not Hermitian".into()));
    }

    let l_ops: Vec<&SparseOperator> = l_ops.iter().filter(|l| l.nnz() > 0).collect();
    let decay: Vec<CsrMatrix> = l_ops.iter().map(|l| l.dagger().csr().matmul(l.csr())).collect();

    let data = rho0.data();
    let seed = (0..full_n).filter(|&i| (0..full_n).any(|j| data[i * full_n + j] != ZERO || data[j * full_n + i] != ZERO));
    let mut ops: Vec<&CsrMatrix> = vec![h.static_part().csr()];
    ops.extend(h.drives().iter().map(|d| d.operator.csr()));
    ops.extend(l_ops.iter().map(|l| l.csr()));
    ops.extend(decay.iter());
    let support = closure(full_n, seed, &ops);
    let n = support.len();

    let hamiltonian = h.restricted(&support);
    let gamma_sum = decay.iter().fold(CsrMatrix::from_triplets(full_n, Vec::new()), |acc, d| acc.add(d));
    let effective_static = hamiltonian.static_part.add(&gamma_sum.restrict(&support).scaled(C64::new(0.0, -0.5)));

    let mut diagonal_weights: Option<Vec<C64>> = None;
    let mut general_jumps = Vec::new();
    for l in &l_ops {
        let r = l.csr().restrict(&support);
        if r.nnz() == 0 {
            continue;
        }
        if r.is_diagonal() {
            let d = r.diagonal();
            let w = diagonal_weights.get_or_insert_with(|| vec![ZERO; n * n]);
            for i in 0..n {
                if d[i] == ZERO {
                    continue;
                }
                for j in 0..n {
                    w[i * n + j] += d[i] * d[j].conj();
                }
            }
        } else {
            general_jumps.push(r.entries().collect());
        }
    }

    let mut rhs = LindbladRhs {
        n,
        hamiltonian,
        effective_static,
        diagonal_weights,
        general_jumps,
        scratch: vec![ZERO; n * n],
    };

    let mut rho: Vec<C64> = Vec::with_capacity(n * n);
    for &i in &support {
        for &j in &support {
            rho.push(data[i * full_n + j]);
        }
    }

    let mut k: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; n * n]);
    let mut tmp = vec![ZERO; n * n];
    let mut samples = Vec::with_capacity(times.len());
    let mut max_trace_drift: f64 = 0.0;
    let mut max_asymmetry: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    let mut total_steps = 0;
    let mut t = times[0];
    for &t_next in times {
        let (steps, dt) = segment_steps(t, t_next, config.dt);
        for s in 0..steps {
            let ts = t + s as f64 * dt;
            let [k1, k2, k3, k4] = &mut k;
            rhs.eval(ts, &rho, k1);
            axpy_into(&mut tmp, &rho, k1, 0.5 * dt);
            rhs.eval(ts + 0.5 * dt, &tmp, k2);
            axpy_into(&mut tmp, &rho, k2, 0.5 * dt);
            rhs.eval(ts + 0.5 * dt, &tmp, k3);
            axpy_into(&mut tmp, &rho, k3, dt);
            rhs.eval(ts + dt, &tmp, k4);
            let w = dt / 6.0;
            for (idx, r) in rho.iter_mut().enumerate() {
                *r += (k1[idx] + (k2[idx] + k3[idx]) * 2.0 + k4[idx]) * w;
            }
            max_asymmetry = max_asymmetry.max(asymmetry(&rho, n));
            symmetrize_in_place(&mut rho, n);
            let tr: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
            let drift = (tr - trace0).abs();
            max_trace_drift = max_trace_drift.max(drift);
            if drift > TRACE_ABORT || !tr.is_finite() {
                return Err(Error::TraceDrift { drift, t: ts + dt, dt });
            }
        }
        total_steps += steps;
        t = t_next;

        let reduced = DensityState::new(
            build_space(SpaceLayout::single("support", n.max(2)))?,
            if n >= 2 { rho.clone() } else { vec![rho[0], ZERO, ZERO, ZERO] },
        )?;
        let mut ev = reduced.min_eigenvalue();
        if n < full_n {
            ev = ev.min(0.0);
        }
        min_eigenvalue = min_eigenvalue.min(ev);
        if ev < EIGENVALUE_ABORT {
            return Err(Error::NegativeEigenvalue { min_eigenvalue: ev, t });
        }
        let mut full = vec![ZERO; full_n * full_n];
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                full[i * full_n + j] = rho[a * n + b];
            }
        }
        let trace = (0..n).map(|i| rho[i * n + i].re).sum();
        samples.push(DensitySample { t, state: DensityState::new(space.clone(), full)?, trace, min_eigenvalue: ev });
    }
    Ok(LindbladTrajectory {
        samples,
        max_trace_drift,
        max_asymmetry,
        final_hermiticity_residual: asymmetry(&rho, n),
        min_eigenvalue,
        support_dim: n,
        steps: total_steps,
    })
}

fn axpy_into(out: &mut [C64], y: &[C64], k: &[C64], h: f64) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a + b * h;
    }
}

fn asymmetry(rho: &[C64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((rho[i * n + j] - rho[j * n + i].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ONE;
    use crate::state::PureState;

    #[test]
    fn thirty_four_channels_with_expected_split() {
        let cs = channels();
        assert_eq!(cs.len(), 34);
        let count = |k: ChannelKind, prefix: char| cs.iter().filter(|c| c.kind == k && c.target.starts_with(prefix)).count();
        assert_eq!(count(ChannelKind::Emission, 'A'), 12);
        assert_eq!(count(ChannelKind::Emission, 'B'), 4);
        assert_eq!(count(ChannelKind::CavityDecay, 'a'), 2);
        assert_eq!(count(ChannelKind::Dephasing, 'A'), 12);
        assert_eq!(count(ChannelKind::Dephasing, 'B'), 4);
        // no |4>-|3> or |2>-|0/1> ancilla channels
        assert!(!cs.iter().any(|c| c.target.starts_with('A') && (c.upper == 4 && c.lower == 3 || c.upper == 2)));
        assert_eq!(cs[16].key(), "kappa1");
        assert_eq!(cs[17].key(), "kappa2");
        assert_eq!(cs[18].key(), "gammaphi30A1");
        assert_eq!(cs[33].key(), "gammaphi21B2");
    }

    #[test]
    fn zero_rates_give_zero_operators() {
        let space = build_space(SpaceLayout::protocol(2)).unwrap();
        let ops = lindblad_operators(&DecoherenceSpec::none(), &space).unwrap();
        assert_eq!(ops.len(), 34);
        assert!(ops.iter().all(|l| l.operator.nnz() == 0));
    }

    #[test]
    fn cavity_and_dephasing_operators() {
        let space = build_space(SpaceLayout::protocol(2)).unwrap();
        let spec = DecoherenceSpec::uniform(0.0, 0.0, 0.25).with_override("gammaphi30A1", 0.09);
        let ops = lindblad_operators(&spec, &space).unwrap();
        let m = build_space(SpaceLayout::single("m", 2)).unwrap();
        let a1 = embed(&SparseOperator::annihilation(m), MODE1, &space).unwrap().scale(0.5);
        assert_eq!(ops[16].operator, a1);
        let q = build_space(SpaceLayout::single("q", 5)).unwrap();
        let d = SparseOperator::from_triplets(q, [(3, 3, ONE), (0, 0, -ONE)]).unwrap();
        assert_eq!(ops[18].operator, embed(&d, A1, &space).unwrap().scale(0.3));
        assert_eq!(ops[19].operator.nnz(), 0);
    }

    #[test]
    fn unknown_override_rejected() {
        let space = build_space(SpaceLayout::protocol(2)).unwrap();
        let spec = DecoherenceSpec::none().with_override("gamma99A1", 1.0);
        assert!(matches!(lindblad_operators(&spec, &space), Err(Error::UnknownChannel(_))));
        assert!(DecoherenceSpec::uniform(-1.0, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn amplitude_decay_is_exponential() {
        let space = build_space(SpaceLayout::single("q", 2)).unwrap();
        let gamma: f64 = 0.7;
        let l = SparseOperator::transition(space.clone(), 0, 1).unwrap().scale(gamma.sqrt());
        let rho0 = PureState::basis(space.clone(), 1).unwrap().to_density();
        let times: Vec<f64> = (0..=4).map(|k| k as f64 * 0.5).collect();
        let tr = evolve_lindblad(&DrivenHamiltonian::zero(space), &[l], &rho0, &times, &IntegratorConfig::default()).unwrap();
        for s in &tr.samples {
            assert!((s.state.population(1) - (-gamma * s.t).exp()).abs() < 1e-12);
        }
        assert!(tr.max_trace_drift < 1e-13);
    }

    #[test]
    fn dephasing_coherence_decay() {
        let space = build_space(SpaceLayout::single("q", 2)).unwrap();
        let g: f64 = 0.4;
        let l = SparseOperator::from_triplets(space.clone(), [(1, 1, ONE), (0, 0, -ONE)]).unwrap().scale(g.sqrt());
        let rho0 = PureState::superposition(space.clone(), &[(0, ONE), (1, ONE)]).unwrap().to_density();
        let tr = evolve_lindblad(&DrivenHamiltonian::zero(space), &[l], &rho0, &[0.0, 1.0, 2.0], &IntegratorConfig::default()).unwrap();
        for s in &tr.samples {
            assert!((s.state.get(0, 1).re - 0.5 * (-2.0 * g * s.t).exp()).abs() < 1e-12);
        }
    }
}
