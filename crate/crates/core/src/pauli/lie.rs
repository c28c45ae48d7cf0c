use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use num_rational::BigRational;
use num_traits::One;

use super::sum::{pauli_commutator, PauliSum};
use super::term::{check_qubits, PauliTerm};
use crate::error::{Error, Result};

/// Fully reduced row-echelon form over the Pauli-string index set.
///
/// Each row has coefficient 1 on its pivot, and no other row contains that pivot,
/// so reducing a vector is a single pass over the pivots it touches.
#[derive(Clone, Debug)]
pub struct ReducedRows {
    n: usize,
    rows: Vec<PauliSum>,
    pivot_row: BTreeMap<PauliTerm, usize>,
}

impl ReducedRows {
    pub fn new(n: usize) -> Self {
        ReducedRows {
            n,
            rows: Vec::new(),
            pivot_row: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PauliSum] {
        &self.rows
    }

    pub fn pivots(&self) -> impl Iterator<Item = &PauliTerm> {
        self.pivot_row.keys()
    }

    /// Residual of `v` after eliminating every pivot.
    pub fn reduce(&self, v: &PauliSum) -> PauliSum {
        if v.len() == 1 {
            let (t, _) = v.leading().expect("nonempty");
            if !self.pivot_row.contains_key(t) {
                return v.clone();
            }
        }
        let hits: Vec<(usize, BigRational)> = v
            .iter()
            .filter_map(|(t, c)| self.pivot_row.get(t).map(|&r| (r, c.clone())))
            .collect();
        let mut out = v.clone();
        for (r, c) in hits {
            out.add_scaled(&self.rows[r], &-c);
        }
        out
    }

    /// Reduces `v` and, when the residual is nonzero, adds it as a new row.
    /// Returns whether the rank grew.
    pub fn insert(&mut self, v: &PauliSum) -> bool {
        let res = self.reduce(v);
        self.insert_reduced(res)
    }

    fn insert_reduced(&mut self, res: PauliSum) -> bool {
        let (pivot, lead) = match res.leading() {
            None => return false,
            Some((t, c)) => (*t, c.clone()),
        };
        let row = if lead.is_one() {
            res
        } else {
            res.scaled(&(BigRational::one() / lead))
        };
        for existing in self.rows.iter_mut() {
            if let Some(c) = existing.coeff(&pivot).cloned() {
                existing.add_scaled(&row, &-c);
            }
        }
        self.pivot_row.insert(pivot, self.rows.len());
        self.rows.push(row);
        true
    }
}

/// Basis of a Lie closure with its reduced coefficient matrix.
#[derive(Clone, Debug)]
pub struct LieBasis {
    n: usize,
    elements: Vec<PauliSum>,
    reduced: ReducedRows,
    cap_reached: bool,
}

/// `4^n - 1`, saturating.
pub fn max_traceless_dim(n: usize) -> usize {
    4usize
        .checked_pow(n as u32)
        .map(|v| v - 1)
        .unwrap_or(usize::MAX)
}

impl LieBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Independent elements in the order they were discovered.
    pub fn elements(&self) -> &[PauliSum] {
        &self.elements
    }

    pub fn reduced(&self) -> &ReducedRows {
        &self.reduced
    }

    /// True when the closure stopped at `dim_cap` with commutators left unchecked.
    pub fn cap_reached(&self) -> bool {
        self.cap_reached
    }

    /// True when the basis is known to be closed: either the queue emptied or
    /// the maximal traceless algebra was reached.
    pub fn is_closed(&self) -> bool {
        !self.cap_reached || self.dim() == max_traceless_dim(self.n)
    }

    pub fn contains(&self, v: &PauliSum) -> bool {
        self.reduced.reduce(v).is_empty()
    }

    /// Checks every pairwise commutator against the basis. Returns the first
    /// offending pair, if any.
    pub fn closure_certificate(&self) -> Result<Option<(usize, usize)>> {
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let c = pauli_commutator(&self.elements[i], &self.elements[j])?;
                if !self.contains(&c) {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }

    /// Plain-text dump: header `n=<n> dim=<dim>`, then one block per element
    /// introduced by `# element <k>` and holding `coeff<TAB>string` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n={} dim={}", self.n, self.dim());
        for (k, e) in self.elements.iter().enumerate() {
            let _ = writeln!(s, "# element {k}");
            s.push_str(&e.to_text());
        }
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

/// Breadth-first Lie closure of the real span of `i·generators`.
///
/// `dim_cap` defaults to `4^n - 1`. Generators must be nonempty, share `n`
/// and be traceless.
pub fn lie_closure(generators: &[PauliSum], dim_cap: Option<usize>) -> Result<LieBasis> {
    let first = generators.first().ok_or(Error::EmptyGenerators)?;
    let n = first.n();
    check_qubits(n)?;
    for g in generators {
        if g.n() != n {
            return Err(Error::QubitMismatch {
                expected: n,
                found: g.n(),
            });
        }
        if g.contains_identity() {
            return Err(Error::IdentityGenerator);
        }
    }
    let cap = dim_cap.unwrap_or_else(|| max_traceless_dim(n)).max(1);

    let mut reduced = ReducedRows::new(n);
    let mut elements: Vec<PauliSum> = Vec::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut cap_reached = false;

    let push = |v: PauliSum,
                    elements: &mut Vec<PauliSum>,
                    reduced: &mut ReducedRows,
                    queue: &mut VecDeque<(usize, usize)>|
     -> bool {
        if reduced.insert(&v) {
            let k = elements.len();
            elements.push(v);
            for j in 0..k {
                queue.push_back((j, k));
            }
            true
        } else {
            false
        }
    };

    for g in generators {
        if elements.len() >= cap {
            cap_reached = true;
            break;
        }
        push(g.clone(), &mut elements, &mut reduced, &mut queue);
    }

    while let Some((i, j)) = queue.pop_front() {
        if elements.len() >= cap {
            cap_reached = true;
            break;
        }
        let c = pauli_commutator(&elements[i], &elements[j])?;
        if c.is_empty() {
            continue;
        }
        push(c, &mut elements, &mut reduced, &mut queue);
    }
    if elements.len() >= cap && !queue.is_empty() {
        cap_reached = true;
    }

    Ok(LieBasis {
        n,
        elements,
        reduced,
        cap_reached,
    })
}

/// Joint eigenspace of commuting Pauli strings: `S_k |ψ> = λ_k |ψ>` with `λ_k = ±1`.
///
/// Restricting an operator to this subspace keeps only strings commuting with
/// every stabilizer, identified modulo the stabilizer group.
#[derive(Clone, Debug)]
pub struct SymmetrySector {
    n: usize,
    stabilizers: Vec<(PauliTerm, i32)>,
    /// Every group element as `(string, value on the sector)`.
    group: Vec<(PauliTerm, i32)>,
}

impl SymmetrySector {
    pub fn new(stabilizers: Vec<(PauliTerm, i32)>) -> Result<Self> {
        let n = stabilizers
            .first()
            .map(|(t, _)| t.n())
            .ok_or_else(|| Error::Sector("no stabilizers given".into()))?;
        for (k, (t, v)) in stabilizers.iter().enumerate() {
            if t.n() != n {
                return Err(Error::QubitMismatch {
                    expected: n,
                    found: t.n(),
                });
            }
            if *v != 1 && *v != -1 {
                return Err(Error::Sector(format!("eigenvalue of {t} must be +1 or -1, got {v}")));
            }
            if t.is_identity() {
                return Err(Error::Sector("the identity cannot be a stabilizer".into()));
            }
            for (u, _) in &stabilizers[..k] {
                if !t.commutes_with(u) {
                    return Err(Error::Sector(format!("stabilizers {u} and {t} do not commute")));
                }
            }
        }
        let mut group = vec![(PauliTerm::identity(n)?, 1)];
        for (s, v) in &stabilizers {
            let mut extra = Vec::with_capacity(group.len());
            for (g, w) in &group {
                let (ph, prod) = g.mul(s);
                let value = w * v * ph.real_sign();
                if group.iter().any(|(h, _)| *h == prod) || extra.iter().any(|(h, _): &(PauliTerm, i32)| *h == prod) {
                    return Err(Error::Sector(format!(
                        "stabilizer {s} is dependent on the others"
                    )));
                }
                extra.push((prod, value));
            }
            group.extend(extra);
        }
        Ok(SymmetrySector {
            n,
            stabilizers,
            group,
        })
    }

    /// The `+1` eigenspace of `X⊗X⊗…⊗X`.
    pub fn x_parity(n: usize) -> Result<Self> {
        let all = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::new(vec![(PauliTerm::new(n, all, 0)?, 1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[(PauliTerm, i32)] {
        &self.stabilizers
    }

    /// Restriction of a single string: `None` when it vanishes on the sector,
    /// otherwise `(sign, representative)` with `Π P Π = sign · Π R Π`.
    pub fn restrict_term(&self, p: &PauliTerm) -> Option<(i32, PauliTerm)> {
        if self.stabilizers.iter().any(|(s, _)| !s.commutes_with(p)) {
            return None;
        }
        self.group
            .iter()
            .map(|(g, v)| {
                let (ph, r) = p.mul(g);
                (v * ph.real_sign(), r)
            })
            .min_by_key(|(_, r)| *r)
    }

    pub fn restrict(&self, op: &PauliSum) -> Result<PauliSum> {
        if op.n() != self.n {
            return Err(Error::QubitMismatch {
                expected: self.n,
                found: op.n(),
            });
        }
        let mut out = PauliSum::zero(self.n)?;
        for (t, c) in op.iter() {
            if let Some((sign, r)) = self.restrict_term(t) {
                out.add_term(r, if sign < 0 { -c.clone() } else { c.clone() });
            }
        }
        Ok(out)
    }

    /// Dimension of the algebra restricted to this sector.
    pub fn restricted_dim(&self, basis: &LieBasis) -> Result<usize> {
        let mut rows = ReducedRows::new(self.n);
        for e in basis.elements() {
            let r = self.restrict(e)?;
            rows.insert(&r);
        }
        Ok(rows.rank())
    }
}
