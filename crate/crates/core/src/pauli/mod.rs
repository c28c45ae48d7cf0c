//! Pauli strings, exact real Pauli sums, Clifford conjugation and Lie closures.

mod clifford;
mod lie;
mod sum;
mod term;

pub use clifford::{conjugate_by_clifford, conjugate_by_sequence, CliffordGate};
pub use lie::{lie_closure, max_traceless_dim, LieBasis, ReducedRows, SymmetrySector};
pub use sum::{parse_rational, pauli_commutator, PauliSum};
pub use term::{Pauli, PauliTerm, Phase, MAX_PAULI_QUBITS};
pub(crate) use sum::rat;
