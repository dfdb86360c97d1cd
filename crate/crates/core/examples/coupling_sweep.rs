//! Success probability against the coupling strength.
//!
//!     cargo run --release --example coupling_sweep -- 40 g_sweep.csv

use sqbell::sweep::{emit, Format};
use sqbell::{sweep, BellState, SweepSpec};

fn main() -> sqbell::Result<()> {
    let mut args = std::env::args().skip(1);
    let points = args.next().and_then(|s| s.parse().ok()).unwrap_or(12);
    let spec = SweepSpec { points, ..SweepSpec::coupling_default() };
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let result = sweep(&spec, threads)?;
    for row in &result.rows {
        let p = row.get(BellState::PsiPlus).unwrap_or(f64::NAN);
        let bar = "#".repeat((p.max(0.0) * 50.0).round() as usize);
        println!("g = {:7.3}/T  P = {p:.6}  {bar}", row.axis);
    }
    if let Some(path) = args.next() {
        emit(&result, Format::Csv, &path)?;
    }
    Ok(())
}
