use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{add_pauli_scaled, StateVector};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Largest qubit count for dense diagonalization.
pub const MAX_DENSE_QUBITS: usize = 10;

fn guard(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Dense matrix of a Pauli sum.
pub fn dense_operator(h: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = h.n();
    guard(n)?;
    let d = 1usize << n;
    let terms = h.to_f64_terms();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    let mut e = vec![Complex64::new(0.0, 0.0); d];
    let mut col = vec![Complex64::new(0.0, 0.0); d];
    for b in 0..d {
        e[b] = Complex64::new(1.0, 0.0);
        col.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (p, c) in &terms {
            add_pauli_scaled(p, Complex64::new(*c, 0.0), &e, &mut col);
        }
        m.column_mut(b).copy_from_slice(&col);
        e[b] = Complex64::new(0.0, 0.0);
    }
    Ok(m)
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.iter().all(|v| v.im == 0.0) {
        let re = m.map(|v| v.re);
        nalgebra::SymmetricEigen::new(re).eigenvalues.iter().copied().collect()
    } else {
        nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
    }
}

/// Smallest eigenvalue of a Pauli-sum Hamiltonian by dense diagonalization.
pub fn ground_energy(h: &PauliSum) -> Result<f64> {
    let m = dense_operator(h)?;
    Ok(hermitian_eigenvalues(&m)
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Count of eigenvalues with `|λ| > 1e-8 · max|λ|`.
pub fn hermitian_rank(m: &DMatrix<Complex64>) -> Result<usize> {
    let ev = hermitian_eigenvalues(m);
    let top = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if top == 0.0 {
        return Ok(0);
    }
    Ok(ev.iter().filter(|v| v.abs() > 1e-8 * top).count())
}

/// Rank of `Σ_μ c_μ |ψ_μ><ψ_μ|`.
pub fn mixture_rank(states: &[StateVector], weights: &[f64]) -> Result<usize> {
    let first = states.first().ok_or(Error::EmptyDataset)?;
    guard(first.n())?;
    let d = first.dim();
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for (s, c) in states.iter().zip(weights) {
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        m += (&v * v.adjoint()) * Complex64::new(*c, 0.0);
    }
    hermitian_rank(&m)
}
