//! Checks the parity tables, the step-3 rotation map, the end-to-end
//! readout and the single-qubit rotations.

use sqbell::protocol::{rotation_table, Direction};
use sqbell::{single_qubit_check, verify_truth_tables, DeviceParams, IntegratorConfig};

fn main() -> sqbell::Result<()> {
    let params = DeviceParams::uniform(66.0);
    let config = IntegratorConfig::default();
    println!("step-3 map:");
    for (from, to, sign) in rotation_table() {
        println!("  {from} -> {}{to}", if sign < 0.0 { "-" } else { "" });
    }
    print!("{}", verify_truth_tables(&params, &config)?);
    print!("{}", single_qubit_check(Direction::Forward, &params, &config)?);
    print!("{}", single_qubit_check(Direction::Inverse, &params, &config)?);
    Ok(())
}
