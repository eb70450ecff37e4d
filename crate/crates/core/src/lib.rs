//! Simulator for quantum-secure oblivious linear evaluation and multiparty
//! private set intersection.
//!
//! * [`ring`]: arithmetic over `Z_p` and polynomials.
//! * [`qubit`]: single-qubit states, Pauli/Hadamard gates, measurement.
//! * [`qotp`]: the quantum one-time pad.
//! * [`channel`]: decoy insertion, eavesdroppers, and the decoy check.
//! * [`ole`]: three-party oblivious linear evaluation with a helper TP.
//! * [`mpsi`]: m-party set intersection built from chained OLE sessions.

pub mod channel;
pub mod mpsi;
pub mod ole;
pub mod qotp;
pub mod qubit;
pub mod ring;
pub mod rng;
pub mod transcript;

pub use rng::SeededRng;
