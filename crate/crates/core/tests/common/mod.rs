//! Dense-matrix oracles built from scratch, independent of the library's simulator.
#![allow(dead_code)]

pub mod losses;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

pub type CMat = DMatrix<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn pauli_1q(ch: char) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match ch {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("bad Pauli {ch}"),
    }
}

/// Dense Pauli string; the label's first character acts on qubit 0, the least significant bit.
pub fn pauli_dense(label: &str) -> CMat {
    label
        .chars()
        .fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, ch| pauli_1q(ch).kronecker(&acc))
}

/// One-qubit operator `m` on qubit `q` of `n`.
pub fn on_qubit(m: &CMat, q: usize, n: usize) -> CMat {
    let mut acc = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for k in 0..n {
        let f = if k == q { m.clone() } else { pauli_1q('I') };
        acc = f.kronecker(&acc);
    }
    acc
}

pub fn cz(a: usize, b: usize, n: usize) -> CMat {
    let d = 1 << n;
    DMatrix::from_fn(d, d, |r, col| {
        if r != col {
            c(0.0, 0.0)
        } else if (r >> a) & 1 == 1 && (r >> b) & 1 == 1 {
            c(-1.0, 0.0)
        } else {
            c(1.0, 0.0)
        }
    })
}

pub fn cnot(ctl: usize, tgt: usize, n: usize) -> CMat {
    let d = 1 << n;
    DMatrix::from_fn(d, d, |r, col| {
        let img = if (col >> ctl) & 1 == 1 { col ^ (1 << tgt) } else { col };
        if r == img {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `exp(−i t H)` for Hermitian `H`, by eigen-decomposition.
pub fn expm_herm(h: &CMat, t: f64) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|l| C::from_polar(1.0, -t * l)),
    ));
    v * phases * v.adjoint()
}

pub fn tfim_x(n: usize) -> CMat {
    let mut m = CMat::zeros(1 << n, 1 << n);
    for q in 0..n {
        m += on_qubit(&pauli_1q('X'), q, n) * c(0.5, 0.0);
    }
    m
}

pub fn tfim_zz(n: usize, closed: bool) -> CMat {
    let mut m = CMat::zeros(1 << n, 1 << n);
    let bonds = if closed { n } else { n - 1 };
    for i in 0..bonds {
        let j = (i + 1) % n;
        m += on_qubit(&pauli_1q('Z'), i, n) * on_qubit(&pauli_1q('Z'), j, n) * c(0.5, 0.0);
    }
    m
}

/// HVA unitary: per layer `exp(−iβ ½ΣZZ)` then `exp(−iγ ½ΣX)`.
pub fn hva_unitary(n: usize, closed: bool, theta: &[f64]) -> CMat {
    let (hx, hz) = (tfim_x(n), tfim_zz(n, closed));
    let mut u = CMat::identity(1 << n, 1 << n);
    for l in 0..theta.len() / 2 {
        u = expm_herm(&hz, theta[2 * l]) * u;
        u = expm_herm(&hx, theta[2 * l + 1]) * u;
    }
    u
}

fn rot(p: char, q: usize, n: usize, t: f64) -> CMat {
    expm_herm(&(on_qubit(&pauli_1q(p), q, n) * c(0.5, 0.0)), t)
}

/// HEA unitary: `Ry, Rx` per qubit, then per layer CZ bricks on even then odd
/// pairs, each followed by `Ry, Rx` on the touched qubits.
pub fn hea_unitary(n: usize, layers: usize, theta: &[f64]) -> CMat {
    let mut u = CMat::identity(1 << n, 1 << n);
    let mut k = 0;
    let mut next = || {
        k += 1;
        theta[k - 1]
    };
    for q in 0..n {
        u = rot('Y', q, n, next()) * u;
        u = rot('X', q, n, next()) * u;
    }
    for _ in 0..layers {
        for start in [0, 1] {
            let pairs: Vec<(usize, usize)> = (start..n - 1).step_by(2).map(|a| (a, a + 1)).collect();
            for &(a, b) in &pairs {
                u = cz(a, b, n) * u;
            }
            let mut touched: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            touched.sort_unstable();
            for q in touched {
                u = rot('Y', q, n, next()) * u;
                u = rot('X', q, n, next()) * u;
            }
        }
    }
    u
}

pub fn plus_state(n: usize) -> DVector<C> {
    let d = 1 << n;
    DVector::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0))
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Central finite difference of a vector-valued function along coordinate `j`.
pub fn fd_vec<F: Fn(&[f64]) -> Vec<C>>(f: F, theta: &[f64], j: usize, h: f64) -> Vec<C> {
    let mut p = theta.to_vec();
    p[j] += h;
    let a = f(&p);
    p[j] -= 2.0 * h;
    let b = f(&p);
    a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
}

/// Central finite-difference gradient of a scalar function.
pub fn fd_grad<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|j| {
            let mut p = theta.to_vec();
            p[j] += h;
            let a = f(&p);
            p[j] -= 2.0 * h;
            (a - f(&p)) / (2.0 * h)
        })
        .collect()
}

/// Real dimension of the Lie algebra generated by `i·H_k`, by floating-point
/// Gram–Schmidt over repeated commutators.
pub fn dense_closure_dim(gens: &[CMat], tol: f64) -> usize {
    fn vec_of(m: &CMat) -> Vec<f64> {
        m.iter().flat_map(|z| [z.re, z.im]).collect()
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut elems: Vec<CMat> = Vec::new();
    let try_add = |m: &CMat, basis: &mut Vec<Vec<f64>>, elems: &mut Vec<CMat>| {
        let mut v = vec_of(m);
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 < tol {
            return;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > tol * norm0.max(1.0) {
            basis.push(v.iter().map(|x| x / nrm).collect());
            elems.push(m / c(nrm, 0.0));
        }
    };
    for g in gens {
        try_add(&(g * c(0.0, 1.0)), &mut basis, &mut elems);
    }
    let mut i = 0;
    while i < elems.len() {
        for j in 0..i {
            let comm = &elems[i] * &elems[j] - &elems[j] * &elems[i];
            try_add(&comm, &mut basis, &mut elems);
        }
        i += 1;
    }
    basis.len()
}

/// Simple deterministic generator for test inputs (splitmix64).
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn angles(&mut self, m: usize) -> Vec<f64> {
        (0..m).map(|_| self.uniform(-std::f64::consts::PI, std::f64::consts::PI)).collect()
    }
}

/// Four-point central finite-difference Hessian.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64], h: f64) -> DMatrix<f64> {
    let m = theta.len();
    let at = |i: usize, si: f64, j: usize, sj: f64| {
        let mut p = theta.to_vec();
        p[i] += si * h;
        p[j] += sj * h;
        f(&p)
    };
    DMatrix::from_fn(m, m, |i, j| {
        (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0)) / (4.0 * h * h)
    })
}

/// Smallest eigenvalue of a dense Hermitian matrix.
pub fn min_eigenvalue(h: &CMat) -> f64 {
    nalgebra::SymmetricEigen::new(h.clone()).eigenvalues.min()
}
