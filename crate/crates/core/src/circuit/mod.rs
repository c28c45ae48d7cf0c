//! Dense state-vector simulation of periodic ansatzes.

mod ansatz;
mod shift;
mod sim;
mod state;

pub use ansatz::{
    dla_dimension, dla_info, hea, hva_tfim, tfim_generators, tfim_hamiltonian, AnsatzDoc,
    AnsatzSpec, Boundary, DlaInfo, Family, InputState, Slot, SlotDoc,
};
pub use sim::{
    apply_ansatz, apply_ansatz_inverse, derivative_state, derivative_states, full_unitary,
    generator_actions, generator_actions_matrix,
};
pub use shift::{
    apply_ansatz_shifted, full_unitary_shifted, parameter_terms, shift_gradient, shift_hessian, ShiftRule,
    GeneratorTerm, TermShift,
};
pub(crate) use sim::{run_ops, unrun_ops};
pub(crate) use state::check_unitary_qubits;
pub use state::{
    add_pauli_scaled, apply_clifford, apply_pauli_into, apply_pauli_rotation, apply_pauli_sum,
    inner, unitarity_error, StateVector, UnitaryMatrix, MAX_STATE_QUBITS, MAX_UNITARY_QUBITS,
};

/// Parameter vector: `M` real angles in radians.
pub type ParamVector = Vec<f64>;
