//! Prints the peak of every drive and writes the full schedule as CSV.
//!
//!     cargo run --example pulse_schedule -- pulses.csv

use sqbell::sta::Drive;
use sqbell::{assemble_schedule, DeviceParams};

fn main() -> sqbell::Result<()> {
    let params = DeviceParams::default();
    let schedule = assemble_schedule(&params)?;
    println!("Omega_max = pi^2/(2T) = {:.6}/T", schedule.omega_max());
    for drive in Drive::ALL {
        println!("{:>12}  peak {:+.6}", drive.label(), schedule.peak(drive, 400));
    }
    if let Some(path) = std::env::args().nth(1) {
        schedule.export_csv(&path, 200)?;
        println!("wrote {path}");
    }
    Ok(())
}
