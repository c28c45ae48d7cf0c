use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::term::{check_qubits, Phase, PauliTerm};
use crate::error::{Error, Result};

/// Real linear combination of Pauli strings with exact rational coefficients.
///
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliTerm, BigRational>,
}

pub(crate) fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl PauliSum {
    pub fn zero(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(PauliSum {
            n,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_term(term: PauliTerm, coeff: BigRational) -> Self {
        let mut s = PauliSum {
            n: term.n(),
            terms: BTreeMap::new(),
        };
        s.add_term(term, coeff);
        s
    }

    /// Single string with coefficient 1.
    pub fn single(term: PauliTerm) -> Self {
        Self::from_term(term, BigRational::one())
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliTerm, BigRational)>,
    {
        let mut s = Self::zero(n)?;
        for (t, c) in terms {
            if t.n() != n {
                return Err(Error::QubitMismatch {
                    expected: n,
                    found: t.n(),
                });
            }
            s.add_term(t, c);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliTerm, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, t: &PauliTerm) -> Option<&BigRational> {
        self.terms.get(t)
    }

    pub fn leading(&self) -> Option<(&PauliTerm, &BigRational)> {
        self.terms.iter().next()
    }

    pub fn add_term(&mut self, term: PauliTerm, coeff: BigRational) {
        debug_assert_eq!(term.n(), self.n);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(term) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, other: &PauliSum, factor: &BigRational) {
        for (t, c) in &other.terms {
            self.add_term(*t, c * factor);
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> PauliSum {
        let mut out = PauliSum {
            n: self.n,
            terms: BTreeMap::new(),
        };
        if factor.is_zero() {
            return out;
        }
        for (t, c) in &self.terms {
            out.terms.insert(*t, c * factor);
        }
        out
    }

    pub fn contains_identity(&self) -> bool {
        self.terms.keys().any(|t| t.is_identity())
    }

    /// True when every pair of strings in the sum commutes.
    pub fn terms_commute(&self) -> bool {
        let ts: Vec<&PauliTerm> = self.terms.keys().collect();
        for i in 0..ts.len() {
            for j in i + 1..ts.len() {
                if !ts[i].commutes_with(ts[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Coefficients as `f64`, in key order.
    pub fn to_f64_terms(&self) -> Vec<(PauliTerm, f64)> {
        self.terms
            .iter()
            .map(|(t, c)| (*t, c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Text form: one `coeff<TAB>string` line per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (t, c) in &self.terms {
            s.push_str(&format!("{c}\t{t}\n"));
        }
        s
    }

    /// Parses the text form. Coefficients may be integers, fractions (`-1/2`) or decimals (`0.25`).
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(n: usize, text: &str) -> Result<Self> {
        let mut s = Self::zero(n)?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (c, p) = match (parts.next(), parts.next(), parts.next()) {
                (Some(c), Some(p), None) => (c, p),
                _ => return Err(Error::Parse(format!("expected \"coeff<TAB>string\", got \"{line}\""))),
            };
            let coeff = parse_rational(c)?;
            let term: PauliTerm = p.parse()?;
            if term.n() != n {
                return Err(Error::QubitMismatch {
                    expected: n,
                    found: term.n(),
                });
            }
            s.add_term(term, coeff);
        }
        Ok(s)
    }
}

/// Parses `"3"`, `"-1/2"` or `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid rational coefficient \"{s}\""));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches(['-', '+']);
        let whole: BigInt = if int_abs.is_empty() {
            BigInt::zero()
        } else {
            int_abs.parse().map_err(|_| bad())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(whole * &den + frac_num, den);
        return Ok(if neg { -v } else { v });
    }
    let num: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(num))
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (t, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
                write!(f, "{}*{}", c.abs(), t)?;
            } else {
                write!(f, "{}*{}", c, t)?;
            }
        }
        Ok(())
    }
}

impl FromStr for PauliSum {
    type Err = Error;

    /// Accepts a bare string such as `"XZ"` (coefficient 1) or the multi-line text form.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if !trimmed.contains(char::is_whitespace) {
            let t: PauliTerm = trimmed.parse()?;
            return Ok(PauliSum::single(t));
        }
        let first = trimmed
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| Error::Parse("empty Pauli sum".into()))?;
        let n = first
            .split_whitespace()
            .nth(1)
            .ok_or_else(|| Error::Parse(format!("malformed line \"{first}\"")))?
            .chars()
            .count();
        PauliSum::parse_text(n, trimmed)
    }
}

/// Commutator of two real Pauli sums, returned as `C` with `[A, B] = i·C`.
///
/// For anticommuting strings with `P·Q = i^k R`, `[P, Q] = 2 i^k R`, so the
/// stored coefficient is `2 i^{k-1}` (always real). Commuting pairs contribute nothing.
/// Example: `[X, Y] = 2iZ` gives `C = 2Z`.
pub fn pauli_commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    if a.n != b.n {
        return Err(Error::QubitMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    let mut out = PauliSum::zero(a.n)?;
    let two = BigRational::from_integer(BigInt::from(2));
    for (p, ca) in &a.terms {
        for (q, cb) in &b.terms {
            if p.commutes_with(q) {
                continue;
            }
            let (phase, r) = p.mul(q);
            let sign = phase.mul(Phase::MINUS_I).real_sign();
            let mut c = ca * cb * &two;
            if sign < 0 {
                c = -c;
            }
            out.add_term(r, c);
        }
    }
    Ok(out)
}

impl std::ops::Add<&PauliSum> for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.add_scaled(rhs, &BigRational::one());
        out
    }
}

impl std::ops::Sub<&PauliSum> for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.add_scaled(rhs, &-BigRational::one());
        out
    }
}

impl std::ops::Mul<i64> for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: i64) -> PauliSum {
        self.scaled(&BigRational::from_integer(BigInt::from(rhs)))
    }
}

impl std::ops::Neg for &PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scaled(&-BigRational::one())
    }
}
