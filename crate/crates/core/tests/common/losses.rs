//! Loss fixtures covering every loss kind, and their values from dense matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qnn_landscape::circuit::{full_unitary, hea, hva_tfim, tfim_hamiltonian, AnsatzSpec, Boundary, StateVector};
use qnn_landscape::harness::{compressible_dataset, haar_state_with, haar_unitary};
use qnn_landscape::landscape::{LossSpec, Observable};
use qnn_landscape::optimize::seeded_rng;
use qnn_landscape::pauli::{parse_rational, PauliSum};

use super::{c, pauli_dense, CMat};

pub fn sum_dense(s: &PauliSum) -> CMat {
    let d = 1 << s.n();
    s.to_f64_terms()
        .iter()
        .fold(CMat::zeros(d, d), |acc, (t, k)| acc + pauli_dense(&t.to_string()) * c(*k, 0.0))
}



pub fn tfim(n: usize) -> PauliSum {
    tfim_hamiltonian(n, Boundary::Open, parse_rational("1").unwrap()).unwrap()
}

pub fn dense_state(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

/// Projector onto `|0>` on the first `k` qubits (the low bits).
pub fn trash_projector(n: usize, k: usize) -> CMat {
    let d = 1 << n;
    DMatrix::from_fn(d, d, |r, col| if r == col && r & ((1 << k) - 1) == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn haar_states(n: usize, count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| StateVector::from_amplitudes(haar_state_with(1 << n, &mut rng)).unwrap())
        .collect()
}

/// Every loss kind, each on a small ansatz.
pub fn cases() -> Vec<(&'static str, LossSpec, AnsatzSpec)> {
    let obs = PauliSum::parse_text(2, "1\tZI\n-1/2\tXX\n3/4\tYZ").unwrap();
    vec![
        ("vqe", LossSpec::vqe(tfim(3)), hva_tfim(3, 2, Boundary::Open).unwrap()),
        (
            "linear",
            LossSpec::linear(haar_states(2, 3, 4), vec![0.5, -1.25, 2.0], Observable::pauli(obs), 0.3).unwrap(),
            hea(2, 1).unwrap(),
        ),
        ("compile_l1", LossSpec::compile_l1(haar_unitary(4, 1).unwrap()).unwrap(), hea(2, 1).unwrap()),
        ("compile_l2", LossSpec::compile_l2(haar_unitary(4, 2).unwrap()).unwrap(), hea(2, 1).unwrap()),
        (
            "autoencoder",
            LossSpec::autoencoder(compressible_dataset(3, 1, 3, 9).unwrap(), 1).unwrap(),
            hea(3, 1).unwrap(),
        ),
    ]
}

/// The loss recomputed from dense matrices.
pub fn dense_loss(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> f64 {
    let u = full_unitary(a, theta).unwrap();
    let d = a.dim() as f64;
    let expect = |psi: &StateVector, o: &CMat| {
        let v = &u * dense_state(psi);
        (v.adjoint() * o * &v)[(0, 0)].re
    };
    match spec {
        LossSpec::VqeEnergy { hamiltonian } => expect(&a.input_state().unwrap(), &sum_dense(hamiltonian)),
        LossSpec::Linear(f) => {
            let o = match &f.observable {
                Observable::Pauli { sum, .. } => sum_dense(sum),
                Observable::TrashZero { n, n_trash } => trash_projector(*n, *n_trash),
            };
            f.offset + f.states.iter().zip(&f.weights).map(|(s, w)| w * expect(s, &o)).sum::<f64>()
        }
        LossSpec::CompileL1 { target } => 2.0 * d - 2.0 * (target.adjoint() * &u).trace().re,
        LossSpec::CompileL2 { target } => 1.0 - (target.adjoint() * &u).trace().norm_sqr() / (d * d),
        LossSpec::Autoencoder { dataset, n_trash } => {
            let p = trash_projector(a.n(), *n_trash);
            let s = dataset.len() as f64;
            dataset.iter().map(|x| 1.0 - expect(x, &p) / s).sum()
        }
    }
}
