use num_complex::Complex64;

use super::ansatz::{AnsatzSpec, Op};
use super::state::{apply_clifford, apply_pauli_rotation, check_unitary_qubits, StateVector, UnitaryMatrix};
use crate::error::{Error, Result};

/// One Pauli term of a parametrized generator: `exp(−iθ c P)` at gate `op`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorTerm {
    pub op: usize,
    pub term: usize,
    /// `|c|`: the term's eigenvalues are `±radius`.
    pub radius: f64,
}

impl GeneratorTerm {
    /// Two-point shift: `π / (4r)` for expectation-type functions, `π / (2r)` for amplitude-type.
    pub fn shift(&self, rule: ShiftRule) -> f64 {
        std::f64::consts::PI / (rule.frequency() * 2.0 * self.radius)
    }

    /// Prefactor `w` in `∂f = w [f(+s) − f(−s)]`.
    pub fn weight(&self, rule: ShiftRule) -> f64 {
        self.radius * rule.frequency() / 2.0
    }
}

/// How a function depends on each rotation `exp(−iφP)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftRule {
    /// Quadratic in the circuit (`<ψ|U† O U|ψ>`, fidelities, `|Tr V†U|²`): frequency 2 in `φ`.
    Expectation,
    /// Linear in the circuit (`Tr V†U`): frequency 1 in `φ`.
    Amplitude,
}

impl ShiftRule {
    fn frequency(self) -> f64 {
        match self {
            ShiftRule::Expectation => 2.0,
            ShiftRule::Amplitude => 1.0,
        }
    }
}

/// Angle offset applied to a single term, as if it carried its own parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermShift {
    pub op: usize,
    pub term: usize,
    pub delta: f64,
}

/// For every parameter, the generator terms it drives.
pub fn parameter_terms(a: &AnsatzSpec) -> Vec<Vec<GeneratorTerm>> {
    let mut out = vec![Vec::new(); a.num_params()];
    for (s, op) in a.ops().iter().enumerate() {
        if let Op::Rot { terms, param } = op {
            for (t, (_, c)) in terms.iter().enumerate() {
                out[*param].push(GeneratorTerm {
                    op: s,
                    term: t,
                    radius: c.abs(),
                });
            }
        }
    }
    out
}

fn run_shifted(a: &AnsatzSpec, theta: &[f64], psi: &mut [Complex64], shifts: &[TermShift]) {
    for (s, op) in a.ops().iter().enumerate() {
        match op {
            Op::Rot { terms, param } => {
                for (t, (p, c)) in terms.iter().enumerate() {
                    let extra: f64 = shifts
                        .iter()
                        .filter(|sh| sh.op == s && sh.term == t)
                        .map(|sh| sh.delta)
                        .sum();
                    apply_pauli_rotation(p, (theta[*param] + extra) * c, psi);
                }
            }
            Op::Fixed(g) => apply_clifford(g, psi, false),
        }
    }
}

/// `U(θ; shifts)|ψ_in>` with per-term angle offsets.
pub fn apply_ansatz_shifted(
    a: &AnsatzSpec,
    theta: &[f64],
    psi_in: &StateVector,
    shifts: &[TermShift],
) -> Result<StateVector> {
    a.check_params(theta)?;
    if psi_in.n() != a.n() {
        return Err(Error::QubitMismatch {
            expected: a.n(),
            found: psi_in.n(),
        });
    }
    let mut out = psi_in.clone();
    run_shifted(a, theta, out.amplitudes_mut(), shifts);
    Ok(out)
}

/// Full matrix with per-term angle offsets.
pub fn full_unitary_shifted(a: &AnsatzSpec, theta: &[f64], shifts: &[TermShift]) -> Result<UnitaryMatrix> {
    check_unitary_qubits(a.n())?;
    a.check_params(theta)?;
    let d = a.dim();
    let mut u = UnitaryMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for b in 0..d {
        let mut col = vec![Complex64::new(0.0, 0.0); d];
        col[b] = Complex64::new(1.0, 0.0);
        run_shifted(a, theta, &mut col, shifts);
        u.column_mut(b).copy_from_slice(&col);
    }
    Ok(u)
}

/// Two-point shift-rule first derivatives of a scalar function of the circuit,
/// summed over generator terms. `f` receives the shift list.
pub fn shift_gradient<F>(a: &AnsatzSpec, rule: ShiftRule, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[TermShift]) -> Result<f64>,
{
    let terms = parameter_terms(a);
    let mut g = vec![0.0; a.num_params()];
    for (j, ts) in terms.iter().enumerate() {
        for t in ts {
            let s = t.shift(rule);
            let plus = f(&[TermShift { op: t.op, term: t.term, delta: s }])?;
            let minus = f(&[TermShift { op: t.op, term: t.term, delta: -s }])?;
            g[j] += t.weight(rule) * (plus - minus);
        }
    }
    Ok(g)
}

/// Double shift-rule second derivatives, summed over pairs of generator terms.
/// Shifts landing on the same term add up.
pub fn shift_hessian<F>(a: &AnsatzSpec, rule: ShiftRule, mut f: F) -> Result<nalgebra::DMatrix<f64>>
where
    F: FnMut(&[TermShift]) -> Result<f64>,
{
    let terms = parameter_terms(a);
    let m = a.num_params();
    let mut h = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for ta in &terms[i] {
                for tb in &terms[j] {
                    let (sa, sb) = (ta.shift(rule), tb.shift(rule));
                    let mut eval = |da: f64, db: f64| {
                        f(&[
                            TermShift { op: ta.op, term: ta.term, delta: da },
                            TermShift { op: tb.op, term: tb.term, delta: db },
                        ])
                    };
                    let pp = eval(sa, sb)?;
                    let mm = eval(-sa, -sb)?;
                    let pm = eval(sa, -sb)?;
                    let mp = eval(-sa, sb)?;
                    acc += ta.weight(rule) * tb.weight(rule) * (pp + mm - pm - mp);
                }
            }
            h[(i, j)] = acc;
            h[(j, i)] = acc;
        }
    }
    Ok(h)
}
