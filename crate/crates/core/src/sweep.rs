//! One-dimensional parameter sweeps over the coupling or a decoherence
//! rate, run in parallel and written as CSV or JSON.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::dynamics::{DecoherenceSpec, IntegratorConfig};
use crate::error::{Error, Result};
use crate::protocol::{BellState, InitialCondition, ProtocolSetup};
use crate::sta::omega_max;

/// Nine significant digits in scientific notation.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

fn round9(x: f64) -> f64 {
    fmt9(x).parse().expect("formatted float parses")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Uniform coupling `g`, in units of `1/T`.
    G,
    /// `kappa / Omega_max`, other rates pinned by the baseline.
    KappaOverOmega,
    GammaOverOmega,
    /// Raw `gamma_phi / Omega_max` (plots often show ten times this).
    GammaPhiOverOmega,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::G => "g",
            SweepAxis::KappaOverOmega => "kappa_over_omega",
            SweepAxis::GammaOverOmega => "gamma_over_omega",
            SweepAxis::GammaPhiOverOmega => "gammaphi_over_omega",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" => Ok(SweepAxis::G),
            "kappa" | "kappa_over_omega" => Ok(SweepAxis::KappaOverOmega),
            "gamma" | "gamma_over_omega" => Ok(SweepAxis::GammaOverOmega),
            "gammaphi" | "gamma_phi" | "gammaphi_over_omega" => Ok(SweepAxis::GammaPhiOverOmega),
            _ => Err(Error::InvalidParameter(format!("unknown sweep axis `{s}` (expected g, kappa, gamma or gammaphi)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub params: DeviceParams,
    pub decoherence: DecoherenceSpec,
    pub inputs: Vec<BellState>,
    pub config: IntegratorConfig,
}

impl SweepSpec {
    /// Sweep over `axis` with every other setting at its default and all
    /// rates zero.
    pub fn new(axis: SweepAxis, lo: f64, hi: f64, points: usize) -> Self {
        Self {
            axis,
            lo,
            hi,
            points,
            params: DeviceParams::default(),
            decoherence: DecoherenceSpec::none(),
            inputs: BellState::ALL.to_vec(),
            config: IntegratorConfig::default(),
        }
    }

    /// `g` from `5/T` to `100/T` over 40 points.
    pub fn coupling_default() -> Self {
        Self::new(SweepAxis::G, 5.0, 100.0, 40)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidParameter(format!("sweep range needs lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter(format!("sweep needs at least 2 points, got {}", self.points)));
        }
        if self.inputs.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one input state".into()));
        }
        if self.axis != SweepAxis::G && self.lo < 0.0 {
            return Err(Error::InvalidParameter("rates cannot be negative".into()));
        }
        self.params.validate()?;
        self.decoherence.validate()?;
        self.config.validate()
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|k| if k == n { self.hi } else { self.lo + (self.hi - self.lo) * k as f64 / n as f64 }).collect()
    }

    /// Device and decoherence settings at one axis value.
    pub fn point(&self, value: f64) -> (DeviceParams, DecoherenceSpec) {
        let mut params = self.params.clone();
        let mut spec = self.decoherence.clone();
        let rate = value * omega_max(params.step_duration);
        match self.axis {
            SweepAxis::G => {
                params = DeviceParams {
                    step_duration: params.step_duration,
                    epsilon1: params.epsilon1,
                    epsilon2: params.epsilon2,
                    photon_levels: params.photon_levels,
                    ..DeviceParams::uniform(value)
                }
            }
            SweepAxis::KappaOverOmega => spec.kappa = rate,
            SweepAxis::GammaOverOmega => spec.gamma = rate,
            SweepAxis::GammaPhiOverOmega => spec.gamma_phi = rate,
        }
        (params, spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: f64,
    /// Readout probability of each Bell input (`None` if not run or failed).
    pub p_psi_plus: Option<f64>,
    pub p_psi_minus: Option<f64>,
    pub p_phi_plus: Option<f64>,
    pub p_phi_minus: Option<f64>,
    /// Largest halving count over the inputs at this point.
    pub halvings: u32,
    pub trace_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn get(&self, b: BellState) -> Option<f64> {
        match b {
            BellState::PsiPlus => self.p_psi_plus,
            BellState::PsiMinus => self.p_psi_minus,
            BellState::PhiPlus => self.p_phi_plus,
            BellState::PhiMinus => self.p_phi_minus,
        }
    }

    fn slot(&mut self, b: BellState) -> &mut Option<f64> {
        match b {
            BellState::PsiPlus => &mut self.p_psi_plus,
            BellState::PsiMinus => &mut self.p_psi_minus,
            BellState::PhiPlus => &mut self.p_phi_plus,
            BellState::PhiMinus => &mut self.p_phi_minus,
        }
    }

    fn rounded(&self) -> Self {
        let r = |x: Option<f64>| x.map(round9);
        Self {
            axis: round9(self.axis),
            p_psi_plus: r(self.p_psi_plus),
            p_psi_minus: r(self.p_psi_minus),
            p_phi_plus: r(self.p_phi_plus),
            p_phi_minus: r(self.p_phi_minus),
            halvings: self.halvings,
            trace_drift: round9(self.trace_drift),
            error: self.error.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "axis,p_psi_plus,p_psi_minus,p_phi_plus,p_phi_minus,halvings,trace_drift";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let cell = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), fmt9);
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt9(r.axis),
                cell(r.p_psi_plus),
                cell(r.p_psi_minus),
                cell(r.p_phi_plus),
                cell(r.p_phi_minus),
                r.halvings,
                fmt9(r.trace_drift)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// JSON with every number rounded to nine significant digits.
    pub fn to_json(&self) -> String {
        let rounded = SweepResult { axis: self.axis, rows: self.rows.iter().map(SweepRow::rounded).collect() };
        serde_json::to_string_pretty(&rounded).expect("sweep serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json { path: "<string>".into(), source: e })
    }
}

/// Writes a sweep to `path`.
pub fn emit(result: &SweepResult, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json(),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs every (axis value, input) pair with step-size convergence on a pool
/// of `parallelism` threads. Rows come back in axis order whatever the
/// completion order; a failing point is recorded in its row.
pub fn sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let values = spec.values();
    let tasks: Vec<(usize, BellState)> =
        (0..values.len()).flat_map(|i| spec.inputs.iter().map(move |&b| (i, b))).collect();
    let outcomes: Vec<Result<(f64, u32, f64)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, b)| {
                let (params, deco) = spec.point(values[i]);
                let run = || -> Result<(f64, u32, f64)> {
                    let setup = ProtocolSetup::new(&params, &deco)?;
                    let r = setup.run_converged(&InitialCondition::Bell(b), &spec.config)?;
                    Ok((r.probabilities.get(b), r.halvings, r.trace_drift))
                };
                run().map_err(|e| e.in_context(format!("{} = {}", spec.axis, values[i])))
            })
            .collect()
    });
    let mut rows: Vec<SweepRow> = values
        .iter()
        .map(|&axis| SweepRow {
            axis,
            p_psi_plus: None,
            p_psi_minus: None,
            p_phi_plus: None,
            p_phi_minus: None,
            halvings: 0,
            trace_drift: 0.0,
            error: None,
        })
        .collect();
    for (&(i, b), outcome) in tasks.iter().zip(outcomes) {
        let row = &mut rows[i];
        match outcome {
            Ok((p, h, drift)) => {
                *row.slot(b) = Some(p);
                row.halvings = row.halvings.max(h);
                row.trace_drift = row.trace_drift.max(drift);
            }
            Err(e) => {
                log::warn!("{e}");
                let msg = format!("{b}: {e}");
                row.error = Some(match row.error.take() {
                    Some(prev) => format!("{prev}; {msg}"),
                    None => msg,
                });
            }
        }
    }
    Ok(SweepResult { axis: spec.axis, rows })
}
