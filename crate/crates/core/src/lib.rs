//! Multi-machine transient-stability simulation.
//!
//! The crate covers the three layers of a reduced-network stability study:
//!
//! * [`netred`]: bus admittance assembly, Kron reduction to the generator
//!   terminals and the transforms that absorb the source impedances.
//! * [`genmodel`]: the classical and two-axis generator models together with
//!   their network interface equations.
//! * [`init`] and [`sim`]: steady-state initialization and fixed-step RK4
//!   integration across pre-fault, fault-on and post-fault networks.
//!
//! Everything is generic over the [`Real`] scalar (`f32` or `f64`). The type
//! aliases at the crate root pin the common `f64` case.

pub mod error;
pub mod genmodel;
pub mod init;
pub mod linalg;
pub mod netred;
pub mod scalar;
pub mod sim;
pub mod wscc9;

pub use error::{Error, Inversion, Result};
pub use genmodel::ModelKind;
pub use scalar::{Real, Scalar};
pub use sim::{simulate, stability_summary, StageLabel};

pub type ComplexAdmittanceMatrix = netred::ComplexAdmittanceMatrix<f64>;
pub type RealBlockMatrix = netred::RealBlockMatrix<f64>;
pub type SourceImpedance = netred::SourceImpedance<f64>;
pub type TerminalNetwork = netred::TerminalNetwork<f64>;
pub type Branch = netred::Branch<f64>;
pub type Shunt = netred::Shunt<f64>;

pub type ClassicalGenParams = genmodel::ClassicalGenParams<f64>;
pub type FourthOrderGenParams = genmodel::FourthOrderGenParams<f64>;
pub type DynamicState = genmodel::DynamicState<f64>;
pub type NetworkSolution = genmodel::NetworkSolution<f64>;

pub type OperatingPoint = init::OperatingPoint<f64>;

pub type Machines = sim::Machines<f64>;
pub type InitialCondition = sim::InitialCondition<f64>;
pub type NetworkStage = sim::NetworkStage<f64>;
pub type StageNetwork = sim::StageNetwork<f64>;
pub type Scenario = sim::Scenario<f64>;
pub type Trajectory = sim::Trajectory<f64>;
pub type StabilityReport = sim::StabilityReport<f64>;
