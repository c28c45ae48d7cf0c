use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{CliffordGate, PauliTerm};

/// Largest qubit count for which a dense `d × d` matrix is materialized.
pub const MAX_UNITARY_QUBITS: usize = 12;
/// Largest qubit count for state vectors.
pub const MAX_STATE_QUBITS: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `2^n` complex amplitudes; bit `q` of the index is qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_state_qubits(n)?;
        let d = 1usize << n;
        if index >= d {
            return Err(Error::InvalidConfig(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![ZERO; d];
        amps[index] = ONE;
        Ok(StateVector { n, amps })
    }

    /// `|+>^{⊗n}`.
    pub fn plus_state(n: usize) -> Result<Self> {
        check_state_qubits(n)?;
        let d = 1usize << n;
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Ok(StateVector { n, amps: vec![a; d] })
    }

    /// Wraps amplitudes and normalizes them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::from_raw(amps)?;
        let norm = s.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NonFinite("state has zero or non-finite norm".into()));
        }
        s.scale(Complex64::new(1.0 / norm, 0.0));
        Ok(s)
    }

    /// Wraps amplitudes without normalizing (derivative states, residuals).
    pub fn from_raw(amps: Vec<Complex64>) -> Result<Self> {
        let d = amps.len();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("state length {d} is not a power of two >= 2")));
        }
        let n = d.trailing_zeros() as usize;
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in self.amps.iter_mut() {
            *a *= c;
        }
    }
}

pub(crate) fn check_state_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::UnsupportedQubitCount(n));
    }
    if n > MAX_STATE_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: MAX_STATE_QUBITS,
        });
    }
    Ok(())
}

pub(crate) fn check_unitary_qubits(n: usize) -> Result<()> {
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::SizeGuard {
            n,
            max: MAX_UNITARY_QUBITS,
        });
    }
    Ok(())
}

/// Dense `d × d` complex matrix.
pub type UnitaryMatrix = DMatrix<Complex64>;

/// `<a|b>` for raw amplitude slices.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `max |(U†U − 1)_{ij}|` measured in Frobenius norm.
pub fn unitarity_error(u: &UnitaryMatrix) -> f64 {
    let d = u.nrows();
    let g = u.adjoint() * u;
    (g - UnitaryMatrix::identity(d, d)).norm()
}

/// Phase of `P|b>` as a complex number: `i^{|x&z|} (-1)^{|z&b|}`.
#[inline]
fn basis_phase(p: &PauliTerm, b: usize) -> Complex64 {
    p.act_on_basis(b as u64).0.to_complex()
}

/// `out = P·psi`.
pub fn apply_pauli_into(p: &PauliTerm, psi: &[Complex64], out: &mut [Complex64]) {
    let x = p.x_bits() as usize;
    for (b, a) in psi.iter().enumerate() {
        out[b ^ x] = basis_phase(p, b) * a;
    }
}

/// `out += c · P·psi`.
pub fn add_pauli_scaled(p: &PauliTerm, c: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
    let x = p.x_bits() as usize;
    for (b, a) in psi.iter().enumerate() {
        out[b ^ x] += c * basis_phase(p, b) * a;
    }
}

/// `H·psi` for `H = Σ c_k P_k`.
pub fn apply_pauli_sum(terms: &[(PauliTerm, f64)], psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; psi.len()];
    for (p, c) in terms {
        add_pauli_scaled(p, Complex64::new(*c, 0.0), psi, &mut out);
    }
    out
}

/// In place `psi ← exp(−i φ P) psi = cos φ · psi − i sin φ · P psi`.
pub fn apply_pauli_rotation(p: &PauliTerm, phi: f64, psi: &mut [Complex64]) {
    let (s, c) = phi.sin_cos();
    let mis = Complex64::new(0.0, -s);
    let x = p.x_bits() as usize;
    if x == 0 {
        for (b, a) in psi.iter_mut().enumerate() {
            let ph = basis_phase(p, b);
            *a = (c + mis * ph) * *a;
        }
        return;
    }
    let low = 1usize << x.trailing_zeros();
    for b in 0..psi.len() {
        if b & low != 0 {
            continue;
        }
        let b2 = b ^ x;
        let (a1, a2) = (psi[b], psi[b2]);
        // P|b> = ph1 |b2>, P|b2> = ph2 |b>
        let ph1 = basis_phase(p, b);
        let ph2 = basis_phase(p, b2);
        psi[b] = c * a1 + mis * ph2 * a2;
        psi[b2] = c * a2 + mis * ph1 * a1;
    }
}

/// In place application of a fixed Clifford gate (or its inverse).
pub fn apply_clifford(g: &CliffordGate, psi: &mut [Complex64], inverse: bool) {
    match *g {
        CliffordGate::Cz(a, b) => {
            let m = (1usize << a) | (1usize << b);
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & m == m {
                    *amp = -*amp;
                }
            }
        }
        CliffordGate::Cnot(c, t) => {
            let (cm, tm) = (1usize << c, 1usize << t);
            for i in 0..psi.len() {
                if i & cm != 0 && i & tm == 0 {
                    psi.swap(i, i | tm);
                }
            }
        }
        CliffordGate::H(q) => {
            let m = 1usize << q;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..psi.len() {
                if i & m == 0 {
                    let (a0, a1) = (psi[i], psi[i | m]);
                    psi[i] = (a0 + a1) * r;
                    psi[i | m] = (a0 - a1) * r;
                }
            }
        }
        CliffordGate::S(q) => {
            let m = 1usize << q;
            let ph = Complex64::new(0.0, if inverse { -1.0 } else { 1.0 });
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & m != 0 {
                    *amp *= ph;
                }
            }
        }
    }
}
