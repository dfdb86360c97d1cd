//! One decoherence rate swept with the others at zero. Rates are given as
//! fractions of the peak drive Omega_max.
//!
//!     cargo run --release --example decoherence_sweep -- kappa 0 0.01 3

use sqbell::{sweep, BellState, SweepAxis, SweepSpec};

fn main() -> sqbell::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let axis: SweepAxis = args.first().map(String::as_str).unwrap_or("gamma").parse()?;
    let lo = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let hi = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let points = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    // A single input keeps this quick; every input behaves alike.
    let spec = SweepSpec { inputs: vec![BellState::PhiMinus], ..SweepSpec::new(axis, lo, hi, points) };
    let result = sweep(&spec, 1)?;
    print!("{}", result.to_csv());
    Ok(())
}
