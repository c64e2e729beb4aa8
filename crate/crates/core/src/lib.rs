//! Construction, simulation and statistics of symplectic quantum circuits.
//!
//! Qubits are 0-based in the API; qubit 0 is the qubit singled out by the
//! symplectic form `Omega = iY (x) I`. See [`pauli`] for the bit ordering.

pub mod brauer_weingarten;
pub mod circuit;
pub mod dense;
pub mod error;
pub mod gp_stats;
pub mod group_sampler;
pub mod lie_closure;
pub mod moment_propagator;
pub mod pauli;
pub mod rng;

pub use dense::DenseOperator;
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, SymplecticForm};
pub use rng::RngStream;
