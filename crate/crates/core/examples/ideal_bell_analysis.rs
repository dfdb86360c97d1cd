//! Runs all four Bell inputs at g = 66/T without decoherence, prints the
//! readout and checks that the carrier pair comes out undisturbed.

use sqbell::protocol::carrier_fidelity;
use sqbell::{BellState, DecoherenceSpec, DeviceParams, InitialCondition, IntegratorConfig, ProtocolSetup};

fn main() -> sqbell::Result<()> {
    let setup = ProtocolSetup::new(&DeviceParams::uniform(66.0), &DecoherenceSpec::none())?;
    let config = IntegratorConfig::default();
    println!("input   P(psi+)     P(psi-)     P(phi+)     P(phi-)     carrier fidelity");
    for b in BellState::ALL {
        let init = InitialCondition::Bell(b);
        let r = setup.run_converged(&init, &config)?;
        let rho = setup.final_pure_state(&init, &config.with_dt(r.dt))?.to_density();
        let p = r.probabilities.as_array();
        println!(
            "{:<6}  {:.8}  {:.8}  {:.8}  {:.8}  {:.10}",
            b.label(),
            p[0],
            p[1],
            p[2],
            p[3],
            carrier_fidelity(&rho, b)?
        );
    }
    Ok(())
}
