//! The counterdiabatic chain against independent constructions: a
//! finite-difference frame derivative and the closed-form propagator.

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use sqbell::sta::{analytic_propagator, check_boundary_conditions, counterdiabatic_hamiltonian, path_frame, SinusoidalPath};
use sqbell::{assemble_schedule, DeviceParams};

/// `i sum |d xi/dt><xi|` with the derivative taken by central differences.
fn finite_difference_hamiltonian(path: &SinusoidalPath, t: f64) -> Matrix3<C64> {
    let h = 1e-5;
    let (lo, hi) = (path_frame(path, t - h).unwrap(), path_frame(path, t + h).unwrap());
    let now = path_frame(path, t).unwrap();
    let mut m = Matrix3::zeros();
    for n in 0..3 {
        let d = (hi[n] - lo[n]) / C64::new(2.0 * h, 0.0);
        m += d * now[n].adjoint();
    }
    m * C64::new(0.0, 1.0)
}

proptest! {
    #[test]
    fn counterdiabatic_matches_finite_difference(t in 0.01..0.99f64, duration in 0.5..3.0f64) {
        let path = SinusoidalPath::new(duration);
        let t = t * duration;
        let fd = finite_difference_hamiltonian(&path, t);
        let exact = counterdiabatic_hamiltonian(&path, t).matrix();
        prop_assert!((fd - exact).norm() <= 1e-6 * (1.0 + exact.norm()), "{fd} vs {exact}");
    }

    #[test]
    fn analytic_propagator_is_unitary(t in 0.0..1.0f64) {
        let u = analytic_propagator(&SinusoidalPath::new(1.0), t).unwrap();
        prop_assert!((u * u.adjoint() - Matrix3::identity()).norm() <= 1e-12);
    }
}

#[test]
fn propagator_swaps_the_chain_ends() {
    let u = analytic_propagator(&SinusoidalPath::new(1.0), 1.0).unwrap();
    assert!((u[(2, 0)].norm() - 1.0).abs() < 1e-12);
    assert!((u[(0, 2)].norm() - 1.0).abs() < 1e-12);
    assert!((u[(1, 1)].norm() - 1.0).abs() < 1e-12);
    assert!(check_boundary_conditions(&SinusoidalPath::new(1.0), 101).is_ok());
}

#[test]
fn shipped_path_drops_the_direct_coupling() {
    let path = SinusoidalPath::new(1.0);
    for k in 0..=50 {
        let c = counterdiabatic_hamiltonian(&path, k as f64 / 50.0);
        assert!(c.o31.abs() < 1e-14);
    }
    let peak = (0..=1000).map(|k| counterdiabatic_hamiltonian(&path, k as f64 / 1000.0).o1.abs()).fold(0.0, f64::max);
    let schedule = assemble_schedule(&DeviceParams::default()).unwrap();
    assert!((peak * std::f64::consts::SQRT_2 - schedule.omega_max()).abs() < 1e-6 * schedule.omega_max());
}
