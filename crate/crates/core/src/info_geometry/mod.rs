//! Quantum and classical Fisher information, orbit dimensions and rank reports.

mod spectrum;

pub use spectrum::{
    asymmetry, matrix_csv, spectrum_report, spectrum_report_with, symmetrize, RankMode,
    SpectrumReport, DEFAULT_RANK_TOL, GAP_WARN,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{
    apply_ansatz, apply_ansatz_inverse, apply_ansatz_shifted, derivative_states, full_unitary,
    generator_actions, generator_actions_matrix, inner, shift_hessian, AnsatzSpec, ShiftRule, StateVector,
};
use crate::error::{Error, Result};
use crate::pauli::LieBasis;

/// Real symmetric `M × M` matrix.
pub type RealMatrix = DMatrix<f64>;

/// `F_ij = 4 Re[<∂_iψ|∂_jψ> − <∂_iψ|ψ><ψ|∂_jψ>]`.
pub fn qfim(a: &AnsatzSpec, theta: &[f64], psi_in: &StateVector) -> Result<RealMatrix> {
    let (psi, ds) = derivative_states(a, theta, psi_in)?;
    let m = ds.len();
    let overlaps: Vec<Complex64> = ds.iter().map(|d| psi.inner(d)).collect();
    let mut f = RealMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = 4.0 * (ds[i].inner(&ds[j]) - overlaps[i].conj() * overlaps[j]).re;
            f[(i, j)] = v;
            f[(j, i)] = v;
        }
    }
    Ok(f)
}

/// QFIM from double shift-rule evaluations of the infidelity
/// `1 − |<ψ(θ)|ψ(θ')>|²` around `θ' = θ`: `F = 2 ∂∂' (1 − fidelity)`.
pub fn qfim_shift_rule(a: &AnsatzSpec, theta: &[f64], psi_in: &StateVector) -> Result<RealMatrix> {
    let reference = apply_ansatz(a, theta, psi_in)?;
    let h = shift_hessian(a, ShiftRule::Expectation, |shifts| {
        let phi = apply_ansatz_shifted(a, theta, psi_in, shifts)?;
        Ok(1.0 - reference.inner(&phi).norm_sqr())
    })?;
    Ok(h * 2.0)
}

/// Orthonormal basis of `C^d` whose first vector is `psi` (modified Gram–Schmidt).
fn basis_containing(psi: &[Complex64]) -> Vec<Vec<Complex64>> {
    let d = psi.len();
    let nrm = inner(psi, psi).re.sqrt();
    let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|v| v / nrm).collect()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let n = inner(&v, &v).re.sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// QFIM assembled as `4 Σ_{m ≠ ψ} (R_m R_mᵀ + I_m I_mᵀ)` with
/// `R_m(i) + i I_m(i) = <m| H̃_i |ψ>` over an orthonormal basis containing the input `|ψ>`,
/// where `H̃_i = U† G_i U` is the generator pulled back to the input.
pub fn qfim_rank_one_form(a: &AnsatzSpec, theta: &[f64], psi_in: &StateVector) -> Result<RealMatrix> {
    let psi = apply_ansatz(a, theta, psi_in)?;
    let g = generator_actions(a, theta, psi.amplitudes())?;
    let w: Vec<StateVector> = g
        .into_iter()
        .map(|v| apply_ansatz_inverse(a, theta, &StateVector::from_raw(v)?))
        .collect::<Result<_>>()?;
    let m = w.len();
    let basis = basis_containing(psi_in.amplitudes());
    let mut f = RealMatrix::zeros(m, m);
    for b in basis.iter().skip(1) {
        let coords: Vec<Complex64> = w.iter().map(|wi| inner(b, wi.amplitudes())).collect();
        for i in 0..m {
            for j in 0..m {
                f[(i, j)] += 4.0 * (coords[i].re * coords[j].re + coords[i].im * coords[j].im);
            }
        }
    }
    Ok(f)
}

/// Classical Fisher information of computational-basis measurement,
/// `Σ_z ∂_i p_z ∂_j p_z / p_z` over outcomes with `p_z > 1e-12`.
pub fn classical_fim(a: &AnsatzSpec, theta: &[f64], psi_in: &StateVector) -> Result<RealMatrix> {
    let (psi, ds) = derivative_states(a, theta, psi_in)?;
    let m = ds.len();
    let mut f = RealMatrix::zeros(m, m);
    let mut dp = vec![0.0; m];
    for (z, amp) in psi.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p <= 1e-12 {
            continue;
        }
        for (i, d) in ds.iter().enumerate() {
            dp[i] = 2.0 * (amp.conj() * d.amplitudes()[z]).re;
        }
        for i in 0..m {
            for j in i..m {
                let v = dp[i] * dp[j] / p;
                f[(i, j)] += v;
                if i != j {
                    f[(j, i)] += v;
                }
            }
        }
    }
    Ok(f)
}

/// Real rank of a set of real column vectors, relative to the largest singular value.
pub fn numerical_rank(cols: &RealMatrix, rel_tol: f64) -> usize {
    if cols.ncols() == 0 || cols.nrows() == 0 {
        return 0;
    }
    let sv = nalgebra::SVD::new(cols.clone(), false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Real dimension of the orbit `{e^{X}|ψ> : X ∈ span(i·basis)}` modulo global phase:
/// rank of the projected tangent vectors `(1 − |ψ><ψ|) S_ν |ψ>` stacked as `[Re; Im]`.
pub fn orbit_dimension(basis: &LieBasis, psi: &StateVector) -> Result<usize> {
    if basis.n() != psi.n() {
        return Err(Error::QubitMismatch {
            expected: basis.n(),
            found: psi.n(),
        });
    }
    let d = psi.dim();
    let amps = psi.amplitudes();
    let mut cols = RealMatrix::zeros(2 * d, basis.dim());
    for (k, s) in basis.elements().iter().enumerate() {
        let terms = s.to_f64_terms();
        let mut v = crate::circuit::apply_pauli_sum(&terms, amps);
        let c = inner(amps, &v);
        for (x, p) in v.iter_mut().zip(amps) {
            *x -= c * p;
        }
        for (r, x) in v.iter().enumerate() {
            cols[(r, k)] = x.re;
            cols[(d + r, k)] = x.im;
        }
    }
    Ok(numerical_rank(&cols, 1e-8))
}

/// Average QFIM rank over a dataset with uniform weights.
pub fn effective_dimension_d1(a: &AnsatzSpec, theta: &[f64], dataset: &[StateVector]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0usize;
    for psi in dataset {
        total += spectrum_report(&qfim(a, theta, psi)?, DEFAULT_RANK_TOL)?.rank;
    }
    Ok(total as f64 / dataset.len() as f64)
}

/// Largest classical-FIM rank over a set of parameter points (finite-size proxy
/// for the second effective dimension).
pub fn effective_dimension_d2(a: &AnsatzSpec, points: &[Vec<f64>], psi_in: &StateVector) -> Result<usize> {
    let mut best = 0;
    for theta in points {
        best = best.max(spectrum_report(&classical_fim(a, theta, psi_in)?, DEFAULT_RANK_TOL)?.rank);
    }
    Ok(best)
}

/// QFIM of the normalized Choi state `|U(θ)>>/√d`:
/// `F_ij = 4 Re[<A_i, A_j>/d − <A_i, U><U, A_j>/d²]` with `A_j = G_j U` and `<X, Y> = Tr X†Y`.
pub fn unitary_qfim(a: &AnsatzSpec, theta: &[f64]) -> Result<RealMatrix> {
    let u = full_unitary(a, theta)?;
    let ga = generator_actions_matrix(a, theta, &u)?;
    let d = a.dim() as f64;
    let m = ga.len();
    let ov: Vec<Complex64> = ga.iter().map(|x| u.dotc(x)).collect();
    let mut f = RealMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = 4.0 * (ga[i].dotc(&ga[j]) / d - ov[i].conj() * ov[j] / (d * d)).re;
            f[(i, j)] = v;
            f[(j, i)] = v;
        }
    }
    Ok(f)
}
