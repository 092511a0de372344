//! Multi-group adjustable phase-shift pilot (MAPSP) channel acquisition for
//! massive MIMO-OFDM, at desk scale.
//!
//! The crate covers the full uplink pilot chain: sparse angle-delay channel
//! generation, Zadoff-Chu pilot construction and cross-correlation analysis,
//! received-signal synthesis and decorrelation, element-wise MMSE estimation
//! with inter-group pre-processing, channel prediction, dual-layer pilot
//! scheduling, and seeded Monte Carlo sweeps with CSV output.

pub mod channel;
pub mod estimation;
pub mod harness;
pub mod pilot;
pub mod scheduler;
pub mod transforms;
pub mod uplink;

use std::fmt;

/// Crate-level error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Sequence length below the minimum of 2.
    SequenceTooShort(usize),
    /// Cyclic shift outside `[0, len)`.
    ShiftOutOfRange { shift: usize, len: usize },
    /// Two sequences that must share a length do not.
    LengthMismatch { left: usize, right: usize },
    /// The single-offset closed form does not hold for this parameter
    /// combination; callers should fall back to the DFT path.
    ClosedFormInapplicable { nc: usize, root: u64, phi: usize },
    /// More active delay taps requested than the cyclic prefix can hold.
    TooManyTaps { taps: usize, ng: usize },
    /// A path delay falls outside the cyclic prefix window.
    DelayOutOfRange { delay: f64, ng: usize },
    /// Group capacities cannot hold the requested number of UTs.
    InfeasibleCaps { uts: usize, capacity: usize },
    /// Configuration file problem.
    InvalidConfig(String),
    /// I/O failure with surrounding context.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SequenceTooShort(n) => {
                write!(f, "sequence length {n} is below the minimum of 2")
            }
            Error::ShiftOutOfRange { shift, len } => {
                write!(f, "cyclic shift {shift} out of range for length {len}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "sequence lengths differ: {left} vs {right}")
            }
            Error::ClosedFormInapplicable { nc, root, phi } => write!(
                f,
                "closed form inapplicable for nc={nc} root={root} phi={phi} (parity condition)"
            ),
            Error::TooManyTaps { taps, ng } => {
                write!(f, "{taps} delay taps exceed the cyclic prefix length {ng}")
            }
            Error::DelayOutOfRange { delay, ng } => {
                write!(
                    f,
                    "path delay {delay} samples outside the {ng}-sample prefix"
                )
            }
            Error::InfeasibleCaps { uts, capacity } => {
                write!(
                    f,
                    "{uts} UTs cannot fit in a total group capacity of {capacity}"
                )
            }
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
