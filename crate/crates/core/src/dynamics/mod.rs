//! Time integration: pure states, density matrices and step-size control.

mod config;
mod converge;
mod hamiltonian;
mod lindblad;
mod schrodinger;
mod support;

pub use config::{IntegratorConfig, MAX_PHASE_PER_STEP};
pub use converge::{converge, Converged};
pub use hamiltonian::{Coefficient, DriveTerm, DrivenHamiltonian};
pub use lindblad::{
    channels, evolve_lindblad, lindblad_operators, Channel, ChannelKind, DecoherenceSpec, DensitySample,
    LindbladOperator, LindbladTrajectory, EIGENVALUE_ABORT, TRACE_ABORT,
};
pub use schrodinger::{evolve_schrodinger, PureTrajectory, NORM_ABORT};
