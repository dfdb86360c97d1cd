//! Density-matrix run at the reference laboratory parameters.
//!
//! The MHz figures are converted by pinning the peak cavity-assisted drive
//! to pi^2/(2T). A second run divides the three rates by 2 pi relative to
//! the drive, for comparison with results quoted in that convention.
//! Takes about a minute per input on one core.
//!
//!     cargo run --release --example experimental_point -- psi+ record.json

use std::f64::consts::PI;

use sqbell::protocol::ProtocolRecord;
use sqbell::{run_protocol_converged, BellState, DecoherenceSpec, InitialCondition, IntegratorConfig, LabParameters};

fn main() -> sqbell::Result<()> {
    let input: BellState = std::env::args().nth(1).as_deref().unwrap_or("psi+").parse()?;
    let lab = LabParameters::reference();
    let (params, spec) = lab.to_model(1.0);
    println!(
        "g = {:.4}/T, kappa = {:.5}/T, gamma = {:.5}/T, gamma_phi = {:.5}/T",
        params.g_b1, spec.kappa, spec.gamma, spec.gamma_phi
    );
    let config = IntegratorConfig::default();
    let init = InitialCondition::Bell(input);

    let r = run_protocol_converged(&init, &params, &spec, &config)?;
    println!("P({input}) = {:.6}  (support {}, trace drift {:.1e})", r.probabilities.get(input), r.support_dim, r.trace_drift);

    let reduced = DecoherenceSpec::uniform(spec.gamma / (2.0 * PI), spec.gamma_phi / (2.0 * PI), spec.kappa / (2.0 * PI));
    let rr = run_protocol_converged(&init, &params, &reduced, &config)?;
    println!("P({input}) with rates / 2pi = {:.6}", rr.probabilities.get(input));

    if let Some(path) = std::env::args().nth(2) {
        let record = ProtocolRecord { params, decoherence: spec, result: r };
        std::fs::write(&path, record.to_json()).map_err(|e| sqbell::Error::Io { path: path.into(), source: e })?;
    }
    Ok(())
}
