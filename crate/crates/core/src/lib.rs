//! Open-system simulation of nondestructive Bell-state analysis with SQUID
//! qubits in a two-mode cavity.
//!
//! Two ancillas `A1`, `A2` (five levels) read out the Bell state of a
//! carrier pair `B1`, `B2` (three levels) through cavity modes `a1`, `a2`.
//! Each cavity-assisted step is a counterdiabatic pulse pair that flips an
//! ancilla between `|0>` and `|1>` only when the matching carrier sits in
//! `|0>`. Single-qubit rotations on the carriers in steps 3 and 6 turn the
//! parity checks of steps 1-2 and 4-5 into a full Bell-basis readout.
//!
//! Times are in units of the step duration `T` and frequencies in `1/T`.
//!
//! ```
//! use sqbell::{run_protocol, BellState, DecoherenceSpec, DeviceParams, InitialCondition, IntegratorConfig};
//!
//! let params = DeviceParams::uniform(66.0);
//! let r = run_protocol(
//!     &InitialCondition::Bell(BellState::PhiMinus),
//!     &params,
//!     &DecoherenceSpec::none(),
//!     &IntegratorConfig::default(),
//! )
//! .unwrap();
//! assert_eq!(r.outcome(), BellState::PhiMinus);
//! ```

pub mod config;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod operator;
pub mod protocol;
pub mod space;
pub mod sta;
pub mod state;
pub mod sweep;

pub use config::RunConfig;
pub use device::{
    compare_effective, full_hamiltonian, protocol_hamiltonian, step_subspace_model, DeviceParams, EffectiveModel,
    LabParameters, SubspaceModel,
};
pub use dynamics::{
    converge, evolve_lindblad, evolve_schrodinger, lindblad_operators, DecoherenceSpec, DrivenHamiltonian,
    IntegratorConfig,
};
pub use error::{Error, Result};
pub use operator::{embed, SparseOperator};
pub use protocol::{
    run_protocol, run_protocol_converged, single_qubit_check, success_probabilities, verify_truth_tables, BellState,
    InitialCondition, ProtocolResult, ProtocolSetup,
};
pub use space::{build_space, HilbertSpace, SpaceLayout};
pub use sta::{assemble_schedule, PulseSchedule};
pub use state::{expectation, partial_trace, DensityState, PureState};
pub use sweep::{sweep, SweepAxis, SweepResult, SweepSpec};
