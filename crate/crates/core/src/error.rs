use std::fmt;

use thiserror::Error;

/// Which matrix inversion or solve failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inversion {
    /// The eliminated block of the bus admittance matrix.
    EliminatedBlock,
    /// The terminal-bus real block matrix.
    TerminalAdmittance,
    /// `T1 Yr^-1 + T2 T1` in the angle-dependent internal-bus transform.
    RotatedSum,
    /// `Yr^-1 + T2` in the constant internal-bus transform.
    ImpedanceSum,
    /// Generic dense inversion.
    Dense,
}

impl fmt::Display for Inversion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inversion::EliminatedBlock => "eliminated block Y_nn",
            Inversion::TerminalAdmittance => "terminal admittance Y_r",
            Inversion::RotatedSum => "T1*Yr^-1 + T2*T1",
            Inversion::ImpedanceSum => "Yr^-1 + T2",
            Inversion::Dense => "matrix",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    Dimension {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("system must have at least one node")]
    EmptySystem,

    #[error("node index {index} out of range 1..={n_nodes}")]
    NodeIndex { index: usize, n_nodes: usize },

    #[error("branch connects node {0} to itself")]
    SelfLoop(usize),

    #[error("retained node {0} listed twice")]
    DuplicateNode(usize),

    #[error("singular {which} (condition estimate {condition:e})")]
    Singular { which: Inversion, condition: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("generator {generator}: {field} {reason}")]
    InvalidParameter {
        generator: usize,
        field: &'static str,
        reason: &'static str,
    },

    #[error(
        "generator {generator}: T2*T1 != T1*T2 (X'_d = {x_d_prime}, X'_q = {x_q_prime}); \
         the internal-bus matrix depends on rotor angles"
    )]
    NonCommuting {
        generator: usize,
        x_d_prime: f64,
        x_q_prime: f64,
    },

    #[error("generator {generator}: zero {which} phasor magnitude")]
    ZeroPhasor { generator: usize, which: &'static str },

    #[error("non-finite derivative at t = {time}s")]
    NonFiniteDerivative { time: f64, state: Vec<f64> },

    #[error("simulation diverged at t = {time}s: {reason}")]
    Diverged { time: f64, reason: String },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
