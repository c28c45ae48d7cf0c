use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest qubit count a [`PauliTerm`] can carry (bits are packed in a `u64`).
pub const MAX_PAULI_QUBITS: usize = 63;

/// Power of `i` in `{1, i, -1, -i}`, stored as the exponent mod 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `+1` or `-1` for real phases. Panics on imaginary phases.
    pub fn real_sign(self) -> i32 {
        match self.0 {
            0 => 1,
            2 => -1,
            _ => panic!("phase i^{} is not real", self.0),
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        use num_complex::Complex64;
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// An n-qubit Pauli string in symplectic form.
///
/// Bit `q` of `x`/`z` refers to qubit `q`. The represented operator is
/// `i^{|x & z|} X^x Z^z`, which puts a plain `Y` wherever both bits are set,
/// so every string is Hermitian with eigenvalues `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliTerm {
    n: u8,
    x: u64,
    z: u64,
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        return Err(Error::UnsupportedQubitCount(n));
    }
    Ok(())
}

impl PauliTerm {
    pub fn new(n: usize, x: u64, z: u64) -> Result<Self> {
        check_qubits(n)?;
        let m = mask(n);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::Parse(format!(
                "bit pattern x={x:#b} z={z:#b} does not fit in {n} qubits"
            )));
        }
        Ok(PauliTerm { n: n as u8, x, z })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0, 0)
    }

    /// A string acting as `p` on qubit `q` and as the identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self> {
        check_qubits(n)?;
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
        let (xb, zb) = p.bits();
        Self::new(n, (xb as u64) << q, (zb as u64) << q)
    }

    /// Build from `(qubit, label)` pairs; later labels on the same qubit overwrite earlier ones.
    pub fn from_sparse(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        check_qubits(n)?;
        let (mut x, mut z) = (0u64, 0u64);
        for &(q, p) in ops {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            let (xb, zb) = p.bits();
            x = (x & !(1 << q)) | ((xb as u64) << q);
            z = (z & !(1 << q)) | ((zb as u64) << q);
        }
        Self::new(n, x, z)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn label(&self, q: usize) -> Pauli {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let s = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        s % 2 == 0
    }

    /// `self · other = phase · result`, with the phase computed exactly from the
    /// per-qubit products (`XY = iZ`, `YZ = iX`, `ZX = iY` and reversed).
    pub fn mul(&self, other: &PauliTerm) -> (Phase, PauliTerm) {
        debug_assert_eq!(self.n, other.n);
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        let y1 = x1 & z1;
        let xo1 = x1 & !z1;
        let zo1 = !x1 & z1;
        let y2 = x2 & z2;
        let xo2 = x2 & !z2;
        let zo2 = !x2 & z2;
        let plus = ((xo1 & y2) | (y1 & zo2) | (zo1 & xo2)).count_ones() as i64;
        let minus = ((y1 & xo2) | (zo1 & y2) | (xo1 & zo2)).count_ones() as i64;
        (
            Phase::from_exponent(plus - minus),
            PauliTerm {
                n: self.n,
                x: x1 ^ x2,
                z: z1 ^ z2,
            },
        )
    }

    /// Action on a computational basis state: `P|b> = phase · |b ^ x>`.
    pub fn act_on_basis(&self, b: u64) -> (Phase, u64) {
        let k = (self.x & self.z).count_ones() as i64 + 2 * (self.z & b).count_ones() as i64;
        (Phase::from_exponent(k), b ^ self.x)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            let c = match self.label(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliTerm {
    type Err = Error;

    /// Parses strings such as `"XIZY"`, qubit 0 leftmost.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let n = s.chars().count();
        check_qubits(n)?;
        let mut ops = Vec::with_capacity(n);
        for (q, c) in s.chars().enumerate() {
            let p = match c {
                'I' | 'i' | '_' => Pauli::I,
                'X' | 'x' => Pauli::X,
                'Y' | 'y' => Pauli::Y,
                'Z' | 'z' => Pauli::Z,
                other => return Err(Error::Parse(format!("invalid Pauli label '{other}' in \"{s}\""))),
            };
            ops.push((q, p));
        }
        Self::from_sparse(n, &ops)
    }
}

impl Serialize for PauliTerm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliTerm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliTerm {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").mul(&p("Y")), (Phase::I, p("Z")));
        assert_eq!(p("Y").mul(&p("X")), (Phase::MINUS_I, p("Z")));
        assert_eq!(p("Y").mul(&p("Z")), (Phase::I, p("X")));
        assert_eq!(p("Z").mul(&p("X")), (Phase::I, p("Y")));
        assert_eq!(p("Z").mul(&p("Y")), (Phase::MINUS_I, p("X")));
        assert_eq!(p("X").mul(&p("Z")), (Phase::MINUS_I, p("Y")));
        assert_eq!(p("Y").mul(&p("Y")), (Phase::ONE, p("I")));
    }

    #[test]
    fn multi_qubit_phase_accumulates() {
        // (X⊗Y)(Y⊗X) = (iZ)⊗(-iZ) = Z⊗Z
        assert_eq!(p("XY").mul(&p("YX")), (Phase::ONE, p("ZZ")));
        assert!(p("XY").commutes_with(&p("YX")));
        assert!(!p("XI").commutes_with(&p("ZZ")));
    }

    #[test]
    fn text_round_trip_and_errors() {
        assert_eq!(p("XIZY").to_string(), "XIZY");
        assert_eq!(p("XIZY").label(3), Pauli::Y);
        assert!("XQ".parse::<PauliTerm>().is_err());
        assert!("".parse::<PauliTerm>().is_err());
        assert!(PauliTerm::single(2, 2, Pauli::X).is_err());
    }

    #[test]
    fn basis_action_of_y() {
        // Y|0> = i|1>, Y|1> = -i|0>
        assert_eq!(p("Y").act_on_basis(0), (Phase::I, 1));
        assert_eq!(p("Y").act_on_basis(1), (Phase::MINUS_I, 0));
    }
}
