//! Full nine-state step model against the three-state effective chain.

use sqbell::{assemble_schedule, compare_effective, step_subspace_model, DeviceParams, EffectiveModel, IntegratorConfig};

fn main() -> sqbell::Result<()> {
    let params = DeviceParams::uniform(66.0);
    let model = step_subspace_model(1, &params)?;
    let schedule = assemble_schedule(&params)?;
    println!("step 1 basis:");
    for (k, b) in model.basis.iter().enumerate() {
        println!("  psi{} = {}", k + 1, b.name);
    }
    println!("cavity spectrum: {:?}", model.cavity_spectrum());
    let eff = EffectiveModel::new(&model, &schedule);
    let h = eff.hamiltonian(0.5);
    println!("effective chain at T/2: {:.4} {:.4}", h[(0, 1)].re, h[(1, 2)].re);
    let (d2, d4) = model.dark_state();
    println!("dark state amplitudes on psi2, psi4: {d2:.4}, {d4:.4}");

    println!("\n     g   disagreement");
    let config = IntegratorConfig::default();
    for g in [5.0, 10.0, 15.0, 20.0, 30.0, 45.0, 66.0, 100.0] {
        let c = compare_effective(1, &DeviceParams::uniform(g), &config)?;
        println!("{g:6.1}   {:.3e}", c.disagreement());
    }
    Ok(())
}
