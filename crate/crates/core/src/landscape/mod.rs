//! Loss functions, gradients and Hessians for energy, linear-form, compilation
//! and autoencoder tasks.

mod dense;
mod hessian;

pub use dense::{dense_operator, ground_energy, hermitian_rank, mixture_rank, MAX_DENSE_QUBITS};
pub use hessian::{
    hessian, hessian_compile, hessian_compile_at_optimum, hessian_finite_difference,
    hessian_linear, hessian_rank_bound, hessian_shift_rule, linear_form_rank, CompileKind,
};

use num_complex::Complex64;

use crate::circuit::{
    apply_ansatz, apply_ansatz_shifted, apply_pauli_sum, check_unitary_qubits, full_unitary, full_unitary_shifted, inner,
    run_ops, shift_gradient, unitarity_error, ShiftRule, AnsatzSpec, StateVector, TermShift, UnitaryMatrix,
};
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliTerm};

/// Hermitian operator measured at the circuit output.
#[derive(Clone, Debug)]
pub enum Observable {
    Pauli {
        sum: PauliSum,
        terms: Vec<(PauliTerm, f64)>,
    },
    /// `|0><0|` on the first `n_trash` qubits, identity on the rest.
    TrashZero { n: usize, n_trash: usize },
}

impl Observable {
    pub fn pauli(sum: PauliSum) -> Self {
        let terms = sum.to_f64_terms();
        Observable::Pauli { sum, terms }
    }

    pub fn trash_zero(n: usize, n_trash: usize) -> Result<Self> {
        if n_trash == 0 || n_trash >= n {
            return Err(Error::InvalidConfig(format!(
                "trash register size {n_trash} must be in 1..{n}"
            )));
        }
        Ok(Observable::TrashZero { n, n_trash })
    }

    pub fn n(&self) -> usize {
        match self {
            Observable::Pauli { sum, .. } => sum.n(),
            Observable::TrashZero { n, .. } => *n,
        }
    }

    /// `O·psi`.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        match self {
            Observable::Pauli { terms, .. } => apply_pauli_sum(terms, psi),
            Observable::TrashZero { n_trash, .. } => {
                let mask = (1usize << n_trash) - 1;
                psi.iter()
                    .enumerate()
                    .map(|(b, a)| if b & mask == 0 { *a } else { Complex64::new(0.0, 0.0) })
                    .collect()
            }
        }
    }

    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        inner(psi, &self.apply(psi)).re
    }

    /// Numerical rank of the operator.
    pub fn rank(&self) -> Result<usize> {
        match self {
            Observable::Pauli { sum, .. } => hermitian_rank(&dense_operator(sum)?),
            Observable::TrashZero { n, n_trash } => Ok(1 << (n - n_trash)),
        }
    }
}

/// `Σ_μ c_μ <ψ_μ| U† O U |ψ_μ> + offset`.
#[derive(Clone, Debug)]
pub struct LinearForm {
    pub states: Vec<StateVector>,
    pub weights: Vec<f64>,
    pub observable: Observable,
    pub offset: f64,
}

/// A training objective.
#[derive(Clone, Debug)]
pub enum LossSpec {
    /// `<ψ(θ)| H |ψ(θ)>` from the ansatz's input state.
    VqeEnergy { hamiltonian: PauliSum },
    Linear(LinearForm),
    /// `2d − 2 Re Tr[V† U(θ)]`.
    CompileL1 { target: UnitaryMatrix },
    /// `1 − |Tr[V† U(θ)]|² / d²`.
    CompileL2 { target: UnitaryMatrix },
    /// `Σ_μ (1 − Tr[U ρ_μ U† O] / |S|)` with `O = |0><0|` on the first `n_trash` qubits.
    Autoencoder {
        dataset: Vec<StateVector>,
        n_trash: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientBackend {
    /// Adjoint sweep over derivative states.
    Exact,
    /// Two-point shifts summed over generator terms.
    ParameterShift,
}

impl LossSpec {
    pub fn vqe(hamiltonian: PauliSum) -> Self {
        LossSpec::VqeEnergy { hamiltonian }
    }

    pub fn linear(
        states: Vec<StateVector>,
        weights: Vec<f64>,
        observable: Observable,
        offset: f64,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if states.len() != weights.len() {
            return Err(Error::InvalidConfig(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("linear-loss weight".into()));
        }
        Ok(LossSpec::Linear(LinearForm {
            states,
            weights,
            observable,
            offset,
        }))
    }

    pub fn compile_l1(target: UnitaryMatrix) -> Result<Self> {
        check_target(&target)?;
        Ok(LossSpec::CompileL1 { target })
    }

    pub fn compile_l2(target: UnitaryMatrix) -> Result<Self> {
        check_target(&target)?;
        Ok(LossSpec::CompileL2 { target })
    }

    pub fn autoencoder(dataset: Vec<StateVector>, n_trash: usize) -> Result<Self> {
        let first = dataset.first().ok_or(Error::EmptyDataset)?;
        Observable::trash_zero(first.n(), n_trash)?;
        Ok(LossSpec::Autoencoder { dataset, n_trash })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LossSpec::VqeEnergy { .. } => "vqe_energy",
            LossSpec::Linear(_) => "linear",
            LossSpec::CompileL1 { .. } => "compile_l1",
            LossSpec::CompileL2 { .. } => "compile_l2",
            LossSpec::Autoencoder { .. } => "autoencoder",
        }
    }

    /// The loss as a linear form, for the kinds that have one.
    pub fn linear_form(&self, a: &AnsatzSpec) -> Result<Option<LinearForm>> {
        Ok(match self {
            LossSpec::VqeEnergy { hamiltonian } => Some(LinearForm {
                states: vec![a.input_state()?],
                weights: vec![1.0],
                observable: Observable::pauli(hamiltonian.clone()),
                offset: 0.0,
            }),
            LossSpec::Linear(f) => Some(f.clone()),
            LossSpec::Autoencoder { dataset, n_trash } => {
                let s = dataset.len() as f64;
                Some(LinearForm {
                    states: dataset.clone(),
                    weights: vec![-1.0 / s; dataset.len()],
                    observable: Observable::trash_zero(a.n(), *n_trash)?,
                    offset: s,
                })
            }
            LossSpec::CompileL1 { .. } | LossSpec::CompileL2 { .. } => None,
        })
    }

    /// Known global minimum, where one exists analytically.
    pub fn analytic_floor(&self) -> Option<f64> {
        match self {
            LossSpec::CompileL1 { .. } | LossSpec::CompileL2 { .. } => Some(0.0),
            LossSpec::Autoencoder { dataset, .. } => Some(dataset.len() as f64 - 1.0),
            _ => None,
        }
    }

    fn target(&self) -> Option<&UnitaryMatrix> {
        match self {
            LossSpec::CompileL1 { target } | LossSpec::CompileL2 { target } => Some(target),
            _ => None,
        }
    }
}

fn check_target(v: &UnitaryMatrix) -> Result<()> {
    if v.nrows() != v.ncols() || !v.nrows().is_power_of_two() || v.nrows() < 2 {
        return Err(Error::InvalidConfig("target must be a d x d matrix with d = 2^n".into()));
    }
    let err = unitarity_error(v);
    if err > 1e-10 {
        return Err(Error::InvalidConfig(format!("target is not unitary (error {err:.2e})")));
    }
    Ok(())
}

fn check_dims(spec: &LossSpec, a: &AnsatzSpec) -> Result<()> {
    if let Some(v) = spec.target() {
        if v.nrows() != a.dim() {
            return Err(Error::QubitMismatch {
                expected: a.dim(),
                found: v.nrows(),
            });
        }
    }
    let states: &[StateVector] = match spec {
        LossSpec::Linear(f) => &f.states,
        LossSpec::Autoencoder { dataset, .. } => dataset,
        _ => &[],
    };
    for s in states {
        if s.n() != a.n() {
            return Err(Error::QubitMismatch {
                expected: a.n(),
                found: s.n(),
            });
        }
    }
    if let LossSpec::VqeEnergy { hamiltonian } = spec {
        if hamiltonian.n() != a.n() {
            return Err(Error::QubitMismatch {
                expected: a.n(),
                found: hamiltonian.n(),
            });
        }
    }
    Ok(())
}

/// `Tr[V† U]`.
pub fn hs_overlap(v: &UnitaryMatrix, u: &UnitaryMatrix) -> Complex64 {
    v.dotc(u)
}

/// `L1` is linear in the circuit; every other loss is quadratic.
pub(crate) fn shift_rule(spec: &LossSpec) -> ShiftRule {
    match spec {
        LossSpec::CompileL1 { .. } => ShiftRule::Amplitude,
        _ => ShiftRule::Expectation,
    }
}

fn compile_value(spec: &LossSpec, t: Complex64, d: f64) -> f64 {
    match spec {
        LossSpec::CompileL1 { .. } => 2.0 * d - 2.0 * t.re,
        _ => 1.0 - t.norm_sqr() / (d * d),
    }
}

/// Loss with per-term angle offsets (the building block of the shift rules).
pub fn loss_shifted(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64], shifts: &[TermShift]) -> Result<f64> {
    check_dims(spec, a)?;
    if let Some(v) = spec.target() {
        let u = if shifts.is_empty() {
            full_unitary(a, theta)?
        } else {
            full_unitary_shifted(a, theta, shifts)?
        };
        return Ok(compile_value(spec, hs_overlap(v, &u), a.dim() as f64));
    }
    let f = spec.linear_form(a)?.expect("non-compile losses are linear forms");
    let mut total = f.offset;
    for (psi, c) in f.states.iter().zip(&f.weights) {
        let out = if shifts.is_empty() {
            apply_ansatz(a, theta, psi)?
        } else {
            apply_ansatz_shifted(a, theta, psi, shifts)?
        };
        total += c * f.observable.expectation(out.amplitudes());
    }
    Ok(total)
}

pub fn loss(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<f64> {
    loss_shifted(spec, a, theta, &[])
}

/// `Tr[V† U(θ)]` and its gradient `∂_j Tr[V† U]`, by an adjoint sweep over columns.
pub fn trace_and_gradient(a: &AnsatzSpec, theta: &[f64], v: &UnitaryMatrix) -> Result<(Complex64, Vec<Complex64>)> {
    a.check_params(theta)?;
    check_unitary_qubits(a.n())?;
    let d = a.dim();
    let ops = a.ops();
    let mut grad = vec![Complex64::new(0.0, 0.0); a.num_params()];
    let mut t = Complex64::new(0.0, 0.0);
    let mi = Complex64::new(0.0, -1.0);
    for b in 0..d {
        let mut psi = vec![Complex64::new(0.0, 0.0); d];
        psi[b] = Complex64::new(1.0, 0.0);
        run_ops(a, theta, &mut psi, 0..ops.len());
        let mut lam: Vec<Complex64> = v.column(b).iter().copied().collect();
        t += inner(&lam, &psi);
        for s in (0..ops.len()).rev() {
            if let Some((terms, param)) = ops[s].rotation() {
                let hpsi = apply_pauli_sum(terms, &psi);
                grad[param] += mi * inner(&lam, &hpsi);
            }
            crate::circuit::unrun_ops(a, theta, &mut psi, s..s + 1);
            crate::circuit::unrun_ops(a, theta, &mut lam, s..s + 1);
        }
    }
    Ok((t, grad))
}

fn linear_gradient(f: &LinearForm, a: &AnsatzSpec, theta: &[f64]) -> Result<Vec<f64>> {
    let ops = a.ops();
    let mut grad = vec![0.0; a.num_params()];
    for (psi_in, c) in f.states.iter().zip(&f.weights) {
        let mut psi = apply_ansatz(a, theta, psi_in)?.into_amplitudes();
        let mut lam = f.observable.apply(&psi);
        for s in (0..ops.len()).rev() {
            if let Some((terms, param)) = ops[s].rotation() {
                let hpsi = apply_pauli_sum(terms, &psi);
                grad[param] += 2.0 * c * inner(&lam, &hpsi).im;
            }
            crate::circuit::unrun_ops(a, theta, &mut psi, s..s + 1);
            crate::circuit::unrun_ops(a, theta, &mut lam, s..s + 1);
        }
    }
    Ok(grad)
}

/// Exact gradient by adjoint differentiation.
pub fn gradient_exact(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<Vec<f64>> {
    check_dims(spec, a)?;
    a.check_params(theta)?;
    if let Some(v) = spec.target() {
        let (t, dt) = trace_and_gradient(a, theta, v)?;
        let d = a.dim() as f64;
        return Ok(match spec {
            LossSpec::CompileL1 { .. } => dt.iter().map(|g| -2.0 * g.re).collect(),
            _ => dt.iter().map(|g| -2.0 * (t.conj() * g).re / (d * d)).collect(),
        });
    }
    let f = spec.linear_form(a)?.expect("linear form");
    linear_gradient(&f, a, theta)
}

/// Parameter-shift gradient, summing two-point rules over generator terms.
pub fn gradient_shift_rule(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<Vec<f64>> {
    check_dims(spec, a)?;
    a.check_params(theta)?;
    shift_gradient(a, shift_rule(spec), |shifts| loss_shifted(spec, a, theta, shifts))
}

pub fn gradient(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64], backend: GradientBackend) -> Result<Vec<f64>> {
    match backend {
        GradientBackend::Exact => gradient_exact(spec, a, theta),
        GradientBackend::ParameterShift => gradient_shift_rule(spec, a, theta),
    }
}

/// Loss and exact gradient in one call.
pub fn loss_and_gradient(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_dims(spec, a)?;
    a.check_params(theta)?;
    if let Some(v) = spec.target() {
        let (t, dt) = trace_and_gradient(a, theta, v)?;
        let d = a.dim() as f64;
        let g = match spec {
            LossSpec::CompileL1 { .. } => dt.iter().map(|g| -2.0 * g.re).collect(),
            _ => dt.iter().map(|g| -2.0 * (t.conj() * g).re / (d * d)).collect(),
        };
        return Ok((compile_value(spec, t, d), g));
    }
    Ok((loss(spec, a, theta)?, gradient_exact(spec, a, theta)?))
}
