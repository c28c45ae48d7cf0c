use num_complex::Complex64;

use super::ansatz::{AnsatzSpec, Op};
use super::state::{
    apply_clifford, apply_pauli_rotation, apply_pauli_sum, check_unitary_qubits, StateVector,
    UnitaryMatrix,
};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn apply_op(op: &Op, theta: &[f64], psi: &mut [Complex64], inverse: bool) {
    match op {
        Op::Rot { terms, param } => {
            let t = if inverse { -theta[*param] } else { theta[*param] };
            for (p, c) in terms {
                apply_pauli_rotation(p, t * c, psi);
            }
        }
        Op::Fixed(g) => apply_clifford(g, psi, inverse),
    }
}

/// Applies `ops[range]` in circuit order.
pub(crate) fn run_ops(a: &AnsatzSpec, theta: &[f64], psi: &mut [Complex64], range: std::ops::Range<usize>) {
    for op in &a.ops()[range] {
        apply_op(op, theta, psi, false);
    }
}

/// Undoes `ops[range]` (last op first).
pub(crate) fn unrun_ops(a: &AnsatzSpec, theta: &[f64], psi: &mut [Complex64], range: std::ops::Range<usize>) {
    for op in a.ops()[range].iter().rev() {
        apply_op(op, theta, psi, true);
    }
}

fn check_state(a: &AnsatzSpec, psi: &StateVector) -> Result<()> {
    if psi.n() != a.n() {
        return Err(Error::QubitMismatch {
            expected: a.n(),
            found: psi.n(),
        });
    }
    Ok(())
}

/// `U(θ)|ψ_in>`.
pub fn apply_ansatz(a: &AnsatzSpec, theta: &[f64], psi_in: &StateVector) -> Result<StateVector> {
    a.check_params(theta)?;
    check_state(a, psi_in)?;
    let mut out = psi_in.clone();
    run_ops(a, theta, out.amplitudes_mut(), 0..a.ops().len());
    debug_assert!(
        (out.norm() - psi_in.norm()).abs() < 1e-10,
        "norm drift {}",
        (out.norm() - psi_in.norm()).abs()
    );
    Ok(out)
}

/// `U(θ)† |ψ>`.
pub fn apply_ansatz_inverse(a: &AnsatzSpec, theta: &[f64], psi: &StateVector) -> Result<StateVector> {
    a.check_params(theta)?;
    check_state(a, psi)?;
    let mut out = psi.clone();
    unrun_ops(a, theta, out.amplitudes_mut(), 0..a.ops().len());
    Ok(out)
}

/// `G_j x` for every parameter `j`, where `G_j = U_{>j} H_j U_{>j}†` and
/// `U_{>j}` is the part of the circuit after parameter `j`'s gate.
///
/// With `x = U(θ)|ψ_in>` this gives `i ∂_j |ψ(θ)>`.
pub fn generator_actions(a: &AnsatzSpec, theta: &[f64], x: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
    a.check_params(theta)?;
    if x.len() != a.dim() {
        return Err(Error::QubitMismatch {
            expected: a.dim(),
            found: x.len(),
        });
    }
    let ops = a.ops();
    let mut out = vec![Vec::new(); a.num_params()];
    let mut y = x.to_vec();
    for s in (0..ops.len()).rev() {
        if let Op::Rot { terms, param } = &ops[s] {
            let mut w = apply_pauli_sum(terms, &y);
            run_ops(a, theta, &mut w, s + 1..ops.len());
            out[*param] = w;
        }
        apply_op(&ops[s], theta, &mut y, true);
    }
    Ok(out)
}

/// `∂|ψ(θ)>/∂θ_j` (unnormalized).
pub fn derivative_state(a: &AnsatzSpec, theta: &[f64], psi_in: &StateVector, j: usize) -> Result<StateVector> {
    a.check_params(theta)?;
    check_state(a, psi_in)?;
    if j >= a.num_params() {
        return Err(Error::ParamIndex {
            index: j,
            count: a.num_params(),
        });
    }
    let ops = a.ops();
    let s = ops
        .iter()
        .position(|op| matches!(op, Op::Rot { param, .. } if *param == j))
        .expect("every parameter has a slot");
    let mut psi = psi_in.amplitudes().to_vec();
    run_ops(a, theta, &mut psi, 0..s + 1);
    let terms = match &ops[s] {
        Op::Rot { terms, .. } => terms,
        Op::Fixed(_) => unreachable!(),
    };
    let mut w = apply_pauli_sum(terms, &psi);
    let mi = Complex64::new(0.0, -1.0);
    for v in w.iter_mut() {
        *v *= mi;
    }
    run_ops(a, theta, &mut w, s + 1..ops.len());
    StateVector::from_raw(w)
}

/// All derivative states `∂_j|ψ(θ)>`, together with `|ψ(θ)>`.
pub fn derivative_states(
    a: &AnsatzSpec,
    theta: &[f64],
    psi_in: &StateVector,
) -> Result<(StateVector, Vec<StateVector>)> {
    let psi = apply_ansatz(a, theta, psi_in)?;
    let g = generator_actions(a, theta, psi.amplitudes())?;
    let mi = Complex64::new(0.0, -1.0);
    let ds = g
        .into_iter()
        .map(|mut v| {
            for x in v.iter_mut() {
                *x *= mi;
            }
            StateVector::from_raw(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((psi, ds))
}

/// The full circuit matrix, built column by column.
pub fn full_unitary(a: &AnsatzSpec, theta: &[f64]) -> Result<UnitaryMatrix> {
    check_unitary_qubits(a.n())?;
    a.check_params(theta)?;
    let d = a.dim();
    let mut u = UnitaryMatrix::from_element(d, d, ZERO);
    for b in 0..d {
        let mut col = vec![ZERO; d];
        col[b] = Complex64::new(1.0, 0.0);
        run_ops(a, theta, &mut col, 0..a.ops().len());
        u.column_mut(b).copy_from_slice(&col);
    }
    Ok(u)
}

/// `G_j · M` for every parameter, applied column by column.
pub fn generator_actions_matrix(a: &AnsatzSpec, theta: &[f64], m: &UnitaryMatrix) -> Result<Vec<UnitaryMatrix>> {
    check_unitary_qubits(a.n())?;
    let d = a.dim();
    let mut out = vec![UnitaryMatrix::from_element(d, d, ZERO); a.num_params()];
    for b in 0..m.ncols() {
        let col: Vec<Complex64> = m.column(b).iter().copied().collect();
        let g = generator_actions(a, theta, &col)?;
        for (j, v) in g.into_iter().enumerate() {
            out[j].column_mut(b).copy_from_slice(&v);
        }
    }
    Ok(out)
}
