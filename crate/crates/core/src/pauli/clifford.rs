use serde::{Deserialize, Serialize};

use super::sum::PauliSum;
use super::term::{Phase, Pauli, PauliTerm};
use crate::error::{Error, Result};

/// Fixed Clifford gates that may appear between parametrized slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CliffordGate {
    Cz(usize, usize),
    Cnot(usize, usize),
    H(usize),
    S(usize),
}

impl CliffordGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::Cz(a, b) | CliffordGate::Cnot(a, b) => vec![a, b],
            CliffordGate::H(q) | CliffordGate::S(q) => vec![q],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidConfig(format!(
                "two-qubit gate {self:?} acts on the same qubit twice"
            )));
        }
        Ok(())
    }

    /// `W† X_q W` (when `is_x`) or `W† Z_q W` as a signed Pauli string.
    fn image(&self, n: usize, q: usize, is_x: bool) -> (Phase, PauliTerm) {
        let single = |p: Pauli, k: usize| PauliTerm::single(n, k, p).expect("validated qubit");
        let pair = |p: Pauli, a: usize, r: Pauli, b: usize| {
            PauliTerm::from_sparse(n, &[(a, p), (b, r)]).expect("validated qubit")
        };
        let base = single(if is_x { Pauli::X } else { Pauli::Z }, q);
        match *self {
            CliffordGate::H(t) if t == q => (
                Phase::ONE,
                single(if is_x { Pauli::Z } else { Pauli::X }, q),
            ),
            CliffordGate::S(t) if t == q && is_x => (Phase::MINUS_ONE, single(Pauli::Y, q)),
            CliffordGate::Cz(a, b) if is_x && (q == a || q == b) => {
                let other = if q == a { b } else { a };
                (Phase::ONE, pair(Pauli::X, q, Pauli::Z, other))
            }
            CliffordGate::Cnot(c, t) if is_x && q == c => (Phase::ONE, pair(Pauli::X, c, Pauli::X, t)),
            CliffordGate::Cnot(c, t) if !is_x && q == t => (Phase::ONE, pair(Pauli::Z, c, Pauli::Z, t)),
            _ => (Phase::ONE, base),
        }
    }

    /// `W† P W` for a single string, as `sign · string`.
    pub fn conjugate_term(&self, p: &PauliTerm) -> Result<(i32, PauliTerm)> {
        let n = p.n();
        self.validate(n)?;
        let mut phase = Phase::from_exponent((p.x_bits() & p.z_bits()).count_ones() as i64);
        let mut acc = PauliTerm::identity(n)?;
        for is_x in [true, false] {
            let bits = if is_x { p.x_bits() } else { p.z_bits() };
            for q in 0..n {
                if (bits >> q) & 1 == 1 {
                    let (ph, img) = self.image(n, q, is_x);
                    let (ph2, prod) = acc.mul(&img);
                    phase = phase.mul(ph).mul(ph2);
                    acc = prod;
                }
            }
        }
        Ok((phase.real_sign(), acc))
    }
}

/// `W† P W` for a Pauli sum.
pub fn conjugate_by_clifford(p: &PauliSum, gate: CliffordGate) -> Result<PauliSum> {
    let mut terms = Vec::with_capacity(p.len());
    for (t, c) in p.iter() {
        let (sign, img) = gate.conjugate_term(t)?;
        let c = if sign < 0 { -c.clone() } else { c.clone() };
        terms.push((img, c));
    }
    PauliSum::from_terms(p.n(), terms)
}

/// `F† P F` for `F = f_k ⋯ f_1`, where `gates = [f_1, …, f_k]` is in application order.
pub fn conjugate_by_sequence(p: &PauliSum, gates: &[CliffordGate]) -> Result<PauliSum> {
    let mut out = p.clone();
    for g in gates.iter().rev() {
        out = conjugate_by_clifford(&out, *g)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliSum {
        s.parse().unwrap()
    }

    #[test]
    fn cz_images() {
        assert_eq!(conjugate_by_clifford(&ps("XI"), CliffordGate::Cz(0, 1)).unwrap(), ps("XZ"));
        assert_eq!(conjugate_by_clifford(&ps("ZI"), CliffordGate::Cz(0, 1)).unwrap(), ps("ZI"));
        assert_eq!(
            conjugate_by_clifford(&ps("YX"), CliffordGate::Cz(0, 1)).unwrap(),
            &ps("XY") * -1
        );
    }

    #[test]
    fn single_qubit_images() {
        assert_eq!(conjugate_by_clifford(&ps("X"), CliffordGate::H(0)).unwrap(), ps("Z"));
        assert_eq!(conjugate_by_clifford(&ps("Y"), CliffordGate::H(0)).unwrap(), &ps("Y") * -1);
        assert_eq!(conjugate_by_clifford(&ps("X"), CliffordGate::S(0)).unwrap(), &ps("Y") * -1);
        assert_eq!(conjugate_by_clifford(&ps("Y"), CliffordGate::S(0)).unwrap(), ps("X"));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(conjugate_by_clifford(&ps("XI"), CliffordGate::Cz(0, 2)).is_err());
        assert!(conjugate_by_clifford(&ps("XI"), CliffordGate::Cnot(1, 1)).is_err());
    }
}
