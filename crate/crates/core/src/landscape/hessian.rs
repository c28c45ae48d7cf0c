use num_complex::Complex64;

use super::{check_dims, loss, loss_shifted, shift_rule, LinearForm, LossSpec};
use crate::circuit::{
    apply_ansatz, full_unitary, full_unitary_shifted, generator_actions, generator_actions_matrix, inner,
    shift_gradient, shift_hessian, AnsatzSpec, ShiftRule, UnitaryMatrix,
};
use crate::error::{Error, Result};
use crate::info_geometry::RealMatrix;

use super::dense::mixture_rank;

/// Which compilation loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompileKind {
    /// `2d − 2 Re Tr[V† U]`.
    L1,
    /// `1 − |Tr[V† U]|² / d²`.
    L2,
}

fn fill_upper<F: FnMut(usize, usize) -> f64>(m: usize, mut f: F) -> RealMatrix {
    let mut h = RealMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = f(i, j);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Exact Hessian of a linear-form loss.
///
/// With `G_j` the generator of parameter `j` moved to the circuit output and
/// parameters in gate order (`i ≤ j`):
/// `∂_i∂_j <ψ|O|ψ> = 2 Re[<G_iψ|O|G_jψ> − <G_j Oψ|G_iψ>]`.
pub fn hessian_linear(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<RealMatrix> {
    check_dims(spec, a)?;
    a.check_params(theta)?;
    let f = spec
        .linear_form(a)?
        .ok_or_else(|| Error::InvalidConfig(format!("{} is not a linear-form loss", spec.kind_name())))?;
    let m = a.num_params();
    let mut h = RealMatrix::zeros(m, m);
    for (psi_in, c) in f.states.iter().zip(&f.weights) {
        let psi = apply_ansatz(a, theta, psi_in)?.into_amplitudes();
        let opsi = f.observable.apply(&psi);
        let g = generator_actions(a, theta, &psi)?;
        let go = generator_actions(a, theta, &opsi)?;
        let og: Vec<Vec<Complex64>> = g.iter().map(|v| f.observable.apply(v)).collect();
        for i in 0..m {
            for j in i..m {
                let v = 2.0 * c * (inner(&g[i], &og[j]) - inner(&go[j], &g[i])).re;
                h[(i, j)] += v;
                if i != j {
                    h[(j, i)] += v;
                }
            }
        }
    }
    Ok(h)
}

/// Exact Hessian of a compilation loss at any point.
///
/// With `T = Tr[V† U]`, `A_j = G_j U`, `B_j = G_j V` and `<X, Y> = Tr X†Y`:
/// `∂_j T = −i <V, A_j>` and `∂_i∂_j T = −<B_j, A_i>` for `i ≤ j`.
pub fn hessian_compile(kind: CompileKind, a: &AnsatzSpec, theta: &[f64], v: &UnitaryMatrix) -> Result<RealMatrix> {
    a.check_params(theta)?;
    if v.nrows() != a.dim() || v.ncols() != a.dim() {
        return Err(Error::QubitMismatch {
            expected: a.dim(),
            found: v.nrows(),
        });
    }
    let u = full_unitary(a, theta)?;
    let ga = generator_actions_matrix(a, theta, &u)?;
    let gb = generator_actions_matrix(a, theta, v)?;
    let m = a.num_params();
    let d = a.dim() as f64;
    Ok(match kind {
        CompileKind::L1 => fill_upper(m, |i, j| 2.0 * gb[j].dotc(&ga[i]).re),
        CompileKind::L2 => {
            let t = v.dotc(&u);
            let mi = Complex64::new(0.0, -1.0);
            let dt: Vec<Complex64> = ga.iter().map(|x| mi * v.dotc(x)).collect();
            fill_upper(m, |i, j| {
                let ddt = -gb[j].dotc(&ga[i]);
                -2.0 / (d * d) * (ddt * t.conj() + dt[i] * dt[j].conj()).re
            })
        }
    })
}

/// Closed forms valid where `U(θ) = V`:
/// `L1: 2 Re Tr[G_i G_j]`, `L2: (2/d) (Re Tr[G_i G_j] − Tr G_i Tr G_j / d)`.
pub fn hessian_compile_at_optimum(kind: CompileKind, a: &AnsatzSpec, theta: &[f64]) -> Result<RealMatrix> {
    let d = a.dim();
    let g = generator_actions_matrix(a, theta, &UnitaryMatrix::identity(d, d))?;
    let tr: Vec<f64> = g.iter().map(|x| x.trace().re).collect();
    let m = g.len();
    let d = d as f64;
    Ok(match kind {
        CompileKind::L1 => fill_upper(m, |i, j| 2.0 * g[i].dotc(&g[j]).re),
        CompileKind::L2 => fill_upper(m, |i, j| 2.0 / d * (g[i].dotc(&g[j]).re - tr[i] * tr[j] / d)),
    })
}

/// Double parameter-shift Hessian. For `L2` the shift rules act on the real and
/// imaginary parts of `Tr[V† U]`, combined by the product rule.
pub fn hessian_shift_rule(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<RealMatrix> {
    check_dims(spec, a)?;
    a.check_params(theta)?;
    if let LossSpec::CompileL2 { target } = spec {
        let d = a.dim() as f64;
        let part = |shifts: &[_], re: bool| -> Result<f64> {
            let u = full_unitary_shifted(a, theta, shifts)?;
            let t = target.dotc(&u);
            Ok(if re { t.re } else { t.im })
        };
        let t = target.dotc(&full_unitary(a, theta)?);
        let (gr, gi) = (
            shift_gradient(a, ShiftRule::Amplitude, |s| part(s, true))?,
            shift_gradient(a, ShiftRule::Amplitude, |s| part(s, false))?,
        );
        let (hr, hi) = (
            shift_hessian(a, ShiftRule::Amplitude, |s| part(s, true))?,
            shift_hessian(a, ShiftRule::Amplitude, |s| part(s, false))?,
        );
        let m = a.num_params();
        return Ok(fill_upper(m, |i, j| {
            let abs2 = 2.0 * (t.re * hr[(i, j)] + t.im * hi[(i, j)] + gr[i] * gr[j] + gi[i] * gi[j]);
            -abs2 / (d * d)
        }));
    }
    shift_hessian(a, shift_rule(spec), |s| loss_shifted(spec, a, theta, s))
}

/// Central double finite differences with step `h`.
pub fn hessian_finite_difference(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64], h: f64) -> Result<RealMatrix> {
    a.check_params(theta)?;
    let m = a.num_params();
    let mut out = RealMatrix::zeros(m, m);
    let mut p = theta.to_vec();
    for i in 0..m {
        for j in i..m {
            let mut eval = |si: f64, sj: f64| -> Result<f64> {
                p[i] += si * h;
                p[j] += sj * h;
                let v = loss(spec, a, &p);
                p[i] -= si * h;
                p[j] -= sj * h;
                v
            };
            let v = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?) / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Exact Hessian for any loss kind.
pub fn hessian(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64]) -> Result<RealMatrix> {
    check_dims(spec, a)?;
    match spec {
        LossSpec::CompileL1 { target } => hessian_compile(CompileKind::L1, a, theta, target),
        LossSpec::CompileL2 { target } => hessian_compile(CompileKind::L2, a, theta, target),
        _ => hessian_linear(spec, a, theta),
    }
}

/// `min{dim 𝔤, 2dr − r² − r}`.
pub fn hessian_rank_bound(dla_dim: usize, d: usize, r: usize) -> usize {
    let raw = (2 * d * r).saturating_sub(r * r + r);
    dla_dim.min(raw)
}

/// `r = min{rank Σ_μ c_μ|ψ_μ><ψ_μ|, rank O}` for a linear-form loss.
pub fn linear_form_rank(f: &LinearForm) -> Result<usize> {
    Ok(mixture_rank(&f.states, &f.weights)?.min(f.observable.rank()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{hea, hva_tfim, tfim_hamiltonian, Boundary, InputState, StateVector};
    use crate::landscape::Observable;
    use crate::pauli::parse_rational;

    fn close(a: &RealMatrix, b: &RealMatrix, tol: f64) -> bool {
        (a - b).amax() < tol
    }

    #[test]
    fn single_rotation_curvature() {
        let a = AnsatzSpec::custom(1, 1, vec!["1/2\tX".parse().unwrap()], InputState::ZeroState).unwrap();
        let spec = LossSpec::vqe("Z".parse().unwrap());
        for th in [0.0, 0.4, 2.5] {
            let h = hessian_linear(&spec, &a, &[th]).unwrap();
            assert!((h[(0, 0)] + f64::cos(th)).abs() < 1e-13);
            assert!((hessian_shift_rule(&spec, &a, &[th]).unwrap()[(0, 0)] + f64::cos(th)).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_hessian_backends_agree() {
        let a = hva_tfim(3, 2, Boundary::Open).unwrap();
        let theta = [0.3, -1.1, 0.8, 2.0];
        let spec = LossSpec::vqe(tfim_hamiltonian(3, Boundary::Open, parse_rational("0.7").unwrap()).unwrap());
        let h = hessian_linear(&spec, &a, &theta).unwrap();
        assert!(close(&h, &hessian_shift_rule(&spec, &a, &theta).unwrap(), 1e-10));
        assert!(close(&h, &hessian_finite_difference(&spec, &a, &theta, 1e-4).unwrap(), 1e-6));
    }

    #[test]
    fn autoencoder_hessian_backends_agree() {
        let a = hea(2, 1).unwrap();
        let theta: Vec<f64> = (0..a.num_params()).map(|k| (k as f64 * 0.77).sin()).collect();
        let ds = vec![StateVector::plus_state(2).unwrap(), StateVector::basis_state(2, 3).unwrap()];
        let spec = LossSpec::autoencoder(ds, 1).unwrap();
        let h = hessian_linear(&spec, &a, &theta).unwrap();
        assert!(close(&h, &hessian_shift_rule(&spec, &a, &theta).unwrap(), 1e-10));
    }

    #[test]
    fn compile_hessians_agree_everywhere() {
        let a = hea(2, 1).unwrap();
        let theta: Vec<f64> = (0..a.num_params()).map(|k| (k as f64 * 1.3).cos()).collect();
        let other: Vec<f64> = theta.iter().map(|x| 0.5 - x).collect();
        let v = full_unitary(&a, &other).unwrap();
        for (kind, spec) in [
            (CompileKind::L1, LossSpec::compile_l1(v.clone()).unwrap()),
            (CompileKind::L2, LossSpec::compile_l2(v.clone()).unwrap()),
        ] {
            let h = hessian_compile(kind, &a, &theta, &v).unwrap();
            assert!(close(&h, &hessian_shift_rule(&spec, &a, &theta).unwrap(), 1e-10));
            assert!(close(&h, &hessian_finite_difference(&spec, &a, &theta, 1e-4).unwrap(), 1e-5));
        }
    }

    #[test]
    fn closed_forms_at_solution() {
        let a = hea(2, 1).unwrap();
        let theta: Vec<f64> = (0..a.num_params()).map(|k| 0.2 * k as f64 - 0.5).collect();
        let v = full_unitary(&a, &theta).unwrap();
        for kind in [CompileKind::L1, CompileKind::L2] {
            let h = hessian_compile(kind, &a, &theta, &v).unwrap();
            assert!(close(&h, &hessian_compile_at_optimum(kind, &a, &theta).unwrap(), 1e-10));
        }
    }

    #[test]
    fn rank_bound_formula() {
        assert_eq!(hessian_rank_bound(1000, 16, 4), 108);
        assert_eq!(hessian_rank_bound(15, 16, 4), 15);
        assert_eq!(hessian_rank_bound(100, 4, 1), 6);
        let f = LinearForm {
            states: vec![StateVector::zero_state(2).unwrap(), StateVector::plus_state(2).unwrap()],
            weights: vec![0.5, 0.5],
            observable: Observable::trash_zero(2, 1).unwrap(),
            offset: 0.0,
        };
        assert_eq!(linear_form_rank(&f).unwrap(), 2);
    }
}
