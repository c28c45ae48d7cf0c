use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::state::{check_state_qubits, StateVector};
use crate::error::{Error, Result};
use crate::pauli::{
    conjugate_by_sequence, lie_closure, CliffordGate, LieBasis, Pauli, PauliSum, PauliTerm,
    SymmetrySector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Closed,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Boundary::Open),
            "closed" | "periodic" => Ok(Boundary::Closed),
            _ => Err(Error::Parse(format!("unknown boundary \"{s}\" (expected open or closed)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    HvaTfim,
    Hea,
    Custom,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hva_tfim" | "hva" => Ok(Family::HvaTfim),
            "hea" => Ok(Family::Hea),
            "custom" => Ok(Family::Custom),
            _ => Err(Error::Parse(format!("unknown family \"{s}\" (expected hva_tfim, hea or custom)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    PlusState,
    #[default]
    ZeroState,
    /// Supplied by the caller.
    Custom,
}

/// One gate position in the circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum Slot {
    /// `exp(−iθ H)`; `index` is the parameter index within its block.
    Param { generator: PauliSum, index: usize },
    Fixed(CliffordGate),
}

/// Flattened gate program used by the simulator.
#[derive(Clone, Debug)]
pub(crate) enum Op {
    Rot {
        terms: Vec<(PauliTerm, f64)>,
        param: usize,
    },
    Fixed(CliffordGate),
}

impl Op {
    pub(crate) fn rotation(&self) -> Option<(&[(PauliTerm, f64)], usize)> {
        match self {
            Op::Rot { terms, param } => Some((terms, *param)),
            Op::Fixed(_) => None,
        }
    }
}

/// Periodic ansatz: an optional preamble followed by `layers` copies of one layer.
///
/// Parameters are numbered in application order: preamble first, then layer by layer.
#[derive(Clone, Debug)]
pub struct AnsatzSpec {
    n: usize,
    family: Family,
    boundary: Option<Boundary>,
    layers: usize,
    preamble: Vec<Slot>,
    layer: Vec<Slot>,
    input: InputState,
    sector: Option<SymmetrySector>,
    preamble_params: usize,
    params_per_layer: usize,
    ops: Vec<Op>,
}

fn validate_block(n: usize, block: &[Slot]) -> Result<usize> {
    let mut seen = Vec::new();
    for (slot, s) in block.iter().enumerate() {
        match s {
            Slot::Param { generator, index } => {
                if generator.n() != n {
                    return Err(Error::QubitMismatch {
                        expected: n,
                        found: generator.n(),
                    });
                }
                if generator.is_empty() {
                    return Err(Error::InvalidConfig(format!("generator in slot {slot} is zero")));
                }
                if generator.contains_identity() {
                    return Err(Error::IdentityGenerator);
                }
                if !generator.terms_commute() {
                    return Err(Error::NonCommutingGenerator { slot });
                }
                seen.push(*index);
            }
            Slot::Fixed(g) => g.validate(n)?,
        }
    }
    let k = seen.len();
    let mut sorted = seen.clone();
    sorted.sort_unstable();
    if sorted != (0..k).collect::<Vec<_>>() || seen != sorted {
        return Err(Error::InvalidConfig(
            "parameter indices within a block must be 0..K-1 in slot order".into(),
        ));
    }
    Ok(k)
}

impl AnsatzSpec {
    pub fn new(
        n: usize,
        family: Family,
        boundary: Option<Boundary>,
        layers: usize,
        preamble: Vec<Slot>,
        layer: Vec<Slot>,
        input: InputState,
        sector: Option<SymmetrySector>,
    ) -> Result<Self> {
        check_state_qubits(n)?;
        if layers == 0 {
            return Err(Error::InvalidConfig("layer count L must be at least 1".into()));
        }
        let preamble_params = validate_block(n, &preamble)?;
        let params_per_layer = validate_block(n, &layer)?;
        if params_per_layer == 0 {
            return Err(Error::InvalidConfig("a layer needs at least one parametrized slot".into()));
        }
        if let Some(s) = &sector {
            if s.n() != n {
                return Err(Error::QubitMismatch {
                    expected: n,
                    found: s.n(),
                });
            }
        }
        let compile = |slot: &Slot, offset: usize| match slot {
            Slot::Param { generator, index } => Op::Rot {
                terms: generator.to_f64_terms(),
                param: offset + index,
            },
            Slot::Fixed(g) => Op::Fixed(*g),
        };
        let mut ops: Vec<Op> = preamble.iter().map(|s| compile(s, 0)).collect();
        for l in 0..layers {
            let offset = preamble_params + l * params_per_layer;
            ops.extend(layer.iter().map(|s| compile(s, offset)));
        }
        Ok(AnsatzSpec {
            n,
            family,
            boundary,
            layers,
            preamble,
            layer,
            input,
            sector,
            preamble_params,
            params_per_layer,
            ops,
        })
    }

    /// Custom ansatz from a list of generators (one parameter each per layer).
    pub fn custom(n: usize, layers: usize, generators: Vec<PauliSum>, input: InputState) -> Result<Self> {
        let layer = generators
            .into_iter()
            .enumerate()
            .map(|(index, generator)| Slot::Param { generator, index })
            .collect();
        Self::new(n, Family::Custom, None, layers, Vec::new(), layer, input, None)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn boundary(&self) -> Option<Boundary> {
        self.boundary
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn preamble(&self) -> &[Slot] {
        &self.preamble
    }

    pub fn layer(&self) -> &[Slot] {
        &self.layer
    }

    pub fn input(&self) -> InputState {
        self.input
    }

    pub fn sector(&self) -> Option<&SymmetrySector> {
        self.sector.as_ref()
    }

    pub fn params_per_layer(&self) -> usize {
        self.params_per_layer
    }

    pub fn preamble_params(&self) -> usize {
        self.preamble_params
    }

    /// Total trainable parameters `M`.
    pub fn num_params(&self) -> usize {
        self.preamble_params + self.layers * self.params_per_layer
    }

    pub(crate) fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Same structure with a different layer count.
    pub fn with_layers(&self, layers: usize) -> Result<Self> {
        Self::new(
            self.n,
            self.family,
            self.boundary,
            layers,
            self.preamble.clone(),
            self.layer.clone(),
            self.input,
            self.sector.clone(),
        )
    }

    /// The tagged input state.
    pub fn input_state(&self) -> Result<StateVector> {
        match self.input {
            InputState::PlusState => StateVector::plus_state(self.n),
            InputState::ZeroState => StateVector::zero_state(self.n),
            InputState::Custom => Err(Error::InvalidConfig(
                "ansatz input is custom; supply the input state explicitly".into(),
            )),
        }
    }

    /// Checks a parameter vector's length and finiteness.
    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::ParamCount {
                expected: self.num_params(),
                found: theta.len(),
            });
        }
        if let Some(v) = theta.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter value {v}")));
        }
        Ok(())
    }

    /// Parametrized generators conjugated through the fixed gates that precede
    /// them within their block (preamble slots, then one layer period).
    pub fn effective_generators(&self) -> Result<Vec<PauliSum>> {
        let mut out = Vec::new();
        for block in [&self.preamble, &self.layer] {
            let mut prefix: Vec<CliffordGate> = Vec::new();
            for s in block.iter() {
                match s {
                    Slot::Param { generator, .. } => {
                        out.push(conjugate_by_sequence(generator, &prefix)?)
                    }
                    Slot::Fixed(g) => prefix.push(*g),
                }
            }
        }
        Ok(out)
    }

    /// Lie closure of the effective generators.
    pub fn lie_algebra(&self) -> Result<LieBasis> {
        lie_closure(&self.effective_generators()?, None)
    }

    /// Serializable description.
    pub fn to_doc(&self) -> AnsatzDoc {
        let slots = |b: &[Slot]| -> Vec<SlotDoc> {
            b.iter()
                .map(|s| match s {
                    Slot::Param { generator, .. } => SlotDoc::Param(generator.to_text()),
                    Slot::Fixed(g) => SlotDoc::Fixed(*g),
                })
                .collect()
        };
        let custom = self.family == Family::Custom;
        AnsatzDoc {
            family: self.family,
            n: self.n,
            layers: self.layers,
            boundary: self.boundary,
            input: Some(self.input),
            generators: None,
            layer: if custom { Some(slots(&self.layer)) } else { None },
            preamble: if custom && !self.preamble.is_empty() {
                Some(slots(&self.preamble))
            } else {
                None
            },
            sector: if custom {
                self.sector.as_ref().map(|s| {
                    s.stabilizers()
                        .iter()
                        .map(|(t, v)| (t.to_string(), *v))
                        .collect()
                })
            } else {
                None
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AnsatzDoc = serde_json::from_str(text)?;
        doc.build()
    }
}

/// A slot in the JSON form: a generator in Pauli text format or a fixed gate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SlotDoc {
    Param(String),
    Fixed(CliffordGate),
}

/// JSON document for an [`AnsatzSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzDoc {
    pub family: Family,
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputState>,
    /// Custom family: one parametrized generator per entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    /// Custom family: full layer including fixed gates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<Vec<SlotDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preamble: Option<Vec<SlotDoc>>,
    /// Custom family: stabilizers `[string, eigenvalue]` of the symmetry sector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<Vec<(String, i32)>>,
}

fn parse_generator(n: usize, text: &str) -> Result<PauliSum> {
    let g: PauliSum = text.parse()?;
    if g.n() != n {
        return Err(Error::QubitMismatch {
            expected: n,
            found: g.n(),
        });
    }
    Ok(g)
}

fn slots_from_doc(n: usize, docs: &[SlotDoc]) -> Result<Vec<Slot>> {
    let mut k = 0;
    docs.iter()
        .map(|d| match d {
            SlotDoc::Param(text) => {
                let s = Slot::Param {
                    generator: parse_generator(n, text)?,
                    index: k,
                };
                k += 1;
                Ok(s)
            }
            SlotDoc::Fixed(g) => Ok(Slot::Fixed(*g)),
        })
        .collect()
}

impl AnsatzDoc {
    pub fn build(&self) -> Result<AnsatzSpec> {
        let custom_fields = self.generators.is_some()
            || self.layer.is_some()
            || self.preamble.is_some()
            || self.sector.is_some();
        match self.family {
            Family::HvaTfim => {
                if custom_fields {
                    return Err(Error::InvalidConfig("hva_tfim takes no custom generator fields".into()));
                }
                let b = self.boundary.ok_or_else(|| {
                    Error::InvalidConfig("hva_tfim requires a boundary (open or closed)".into())
                })?;
                hva_tfim(self.n, self.layers, b)
            }
            Family::Hea => {
                if custom_fields || self.boundary.is_some() {
                    return Err(Error::InvalidConfig("hea takes only n and L".into()));
                }
                let a = hea(self.n, self.layers)?;
                match self.input {
                    Some(i) if i != a.input => AnsatzSpec::new(
                        a.n,
                        a.family,
                        None,
                        a.layers,
                        a.preamble,
                        a.layer,
                        i,
                        None,
                    ),
                    _ => Ok(a),
                }
            }
            Family::Custom => {
                let layer = match (&self.generators, &self.layer) {
                    (Some(g), None) => g
                        .iter()
                        .enumerate()
                        .map(|(index, t)| {
                            Ok(Slot::Param {
                                generator: parse_generator(self.n, t)?,
                                index,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                    (None, Some(l)) => slots_from_doc(self.n, l)?,
                    _ => {
                        return Err(Error::InvalidConfig(
                            "custom ansatz needs exactly one of \"generators\" or \"layer\"".into(),
                        ))
                    }
                };
                let preamble = match &self.preamble {
                    Some(p) => slots_from_doc(self.n, p)?,
                    None => Vec::new(),
                };
                let sector = match &self.sector {
                    Some(list) => Some(SymmetrySector::new(
                        list.iter()
                            .map(|(s, v)| Ok((s.parse::<PauliTerm>()?, *v)))
                            .collect::<Result<Vec<_>>>()?,
                    )?),
                    None => None,
                };
                AnsatzSpec::new(
                    self.n,
                    Family::Custom,
                    self.boundary,
                    self.layers,
                    preamble,
                    layer,
                    self.input.unwrap_or_default(),
                    sector,
                )
            }
        }
    }
}

fn half() -> BigRational {
    crate::pauli::rat(1, 2)
}

/// `½ Σ_i X_i` and `½ Σ_i Z_i Z_{i+1}` (with the wrap-around bond for closed chains).
pub fn tfim_generators(n: usize, boundary: Boundary) -> Result<(PauliSum, PauliSum)> {
    let mut xs = PauliSum::zero(n)?;
    let mut zz = PauliSum::zero(n)?;
    for i in 0..n {
        xs.add_term(PauliTerm::single(n, i, Pauli::X)?, half());
    }
    let bonds = match boundary {
        Boundary::Open => n.saturating_sub(1),
        Boundary::Closed => n,
    };
    for i in 0..bonds {
        let j = (i + 1) % n;
        zz.add_term(PauliTerm::from_sparse(n, &[(i, Pauli::Z), (j, Pauli::Z)])?, half());
    }
    Ok((xs, zz))
}

/// Transverse-field Ising Hamiltonian `−Σ Z_i Z_{i+1} − h Σ X_i` with exact
/// rational field strength.
pub fn tfim_hamiltonian(n: usize, boundary: Boundary, field: BigRational) -> Result<PauliSum> {
    let (xs, zz) = tfim_generators(n, boundary)?;
    let two = crate::pauli::rat(2, 1);
    let mut h = zz.scaled(&-two.clone());
    h.add_scaled(&xs, &(-(two * field)));
    Ok(h)
}

/// Hamiltonian variational ansatz for the transverse-field Ising chain.
///
/// Each layer applies `exp(−iβ ½ΣZZ)` then `exp(−iγ ½ΣX)`; the input is
/// `|+>^{⊗n}` and the sector is the `+1` eigenspace of `X^{⊗n}`.
pub fn hva_tfim(n: usize, layers: usize, boundary: Boundary) -> Result<AnsatzSpec> {
    let min = if boundary == Boundary::Closed { 3 } else { 2 };
    if n < min {
        return Err(Error::InvalidConfig(format!(
            "hva_tfim with {boundary:?} boundary needs n >= {min}"
        )));
    }
    let (xs, zz) = tfim_generators(n, boundary)?;
    let layer = vec![
        Slot::Param {
            generator: zz,
            index: 0,
        },
        Slot::Param {
            generator: xs,
            index: 1,
        },
    ];
    AnsatzSpec::new(
        n,
        Family::HvaTfim,
        Some(boundary),
        layers,
        Vec::new(),
        layer,
        InputState::PlusState,
        Some(SymmetrySector::x_parity(n)?),
    )
}

fn rot(n: usize, q: usize, p: Pauli, index: usize) -> Result<Slot> {
    let mut g = PauliSum::zero(n)?;
    g.add_term(PauliTerm::single(n, q, p)?, half());
    Ok(Slot::Param { generator: g, index })
}

/// Hardware-efficient ansatz: `Ry, Rx` on every qubit, then per layer two
/// brick sublayers of CZ gates each followed by `Ry, Rx` on the touched qubits.
///
/// `M = 2n + L(4n − 4)`; rotations are `exp(−iθP/2)`.
pub fn hea(n: usize, layers: usize) -> Result<AnsatzSpec> {
    if n < 2 {
        return Err(Error::InvalidConfig("hea needs n >= 2".into()));
    }
    let mut preamble = Vec::with_capacity(2 * n);
    for q in 0..n {
        preamble.push(rot(n, q, Pauli::Y, 2 * q)?);
        preamble.push(rot(n, q, Pauli::X, 2 * q + 1)?);
    }
    let mut layer = Vec::new();
    let mut k = 0;
    for start in [0usize, 1] {
        let pairs: Vec<(usize, usize)> = (start..n.saturating_sub(1)).step_by(2).map(|a| (a, a + 1)).collect();
        for &(a, b) in &pairs {
            layer.push(Slot::Fixed(CliffordGate::Cz(a, b)));
        }
        let mut touched: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        touched.sort_unstable();
        for q in touched {
            layer.push(rot(n, q, Pauli::Y, k)?);
            layer.push(rot(n, q, Pauli::X, k + 1)?);
            k += 2;
        }
    }
    AnsatzSpec::new(
        n,
        Family::Hea,
        None,
        layers,
        preamble,
        layer,
        InputState::ZeroState,
        None,
    )
}

/// Dimension of the ansatz's Lie algebra, restricted to its symmetry sector when it has one.
pub fn dla_dimension(a: &AnsatzSpec) -> Result<usize> {
    Ok(dla_info(a)?.dim)
}

/// Closure dimension with and without the sector restriction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DlaInfo {
    /// Restricted to the ansatz's sector (equals `closure_dim` without one).
    pub dim: usize,
    pub closure_dim: usize,
    pub closed: bool,
}

pub fn dla_info(a: &AnsatzSpec) -> Result<DlaInfo> {
    let basis = a.lie_algebra()?;
    let dim = match a.sector() {
        Some(s) => s.restricted_dim(&basis)?,
        None => basis.dim(),
    };
    Ok(DlaInfo {
        dim,
        closure_dim: basis.dim(),
        closed: basis.is_closed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hea_parameter_count_law() {
        for n in 2..=6 {
            for l in 1..=40 {
                assert_eq!(hea(n, l).unwrap().num_params(), 2 * n + l * (4 * n - 4));
            }
        }
    }

    #[test]
    fn hva_counts_and_validation() {
        let a = hva_tfim(4, 3, Boundary::Open).unwrap();
        assert_eq!(a.num_params(), 6);
        assert_eq!(a.params_per_layer(), 2);
        assert!(hva_tfim(2, 1, Boundary::Closed).is_err());
        assert!(hva_tfim(4, 0, Boundary::Open).is_err());
    }

    #[test]
    fn non_commuting_generator_rejected() {
        let g: PauliSum = "1\tX\n1\tZ".parse().unwrap();
        let r = AnsatzSpec::custom(1, 1, vec![g], InputState::ZeroState);
        assert!(matches!(r, Err(Error::NonCommutingGenerator { slot: 0 })));
    }

    #[test]
    fn json_round_trip() {
        for a in [hva_tfim(3, 2, Boundary::Closed).unwrap(), hea(3, 2).unwrap()] {
            let b = AnsatzSpec::from_json(&a.to_json().unwrap()).unwrap();
            assert_eq!(a.num_params(), b.num_params());
            assert_eq!(a.layer(), b.layer());
        }
        let c = AnsatzSpec::from_json(
            r#"{"family":"custom","n":2,"L":2,"generators":["1/2\tXI\n1/2\tIX","ZZ"],"input":"plus_state"}"#,
        )
        .unwrap();
        assert_eq!(c.num_params(), 4);
        let d = AnsatzSpec::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(c.layer(), d.layer());
        assert!(AnsatzSpec::from_json(r#"{"family":"hea","n":2,"L":1,"extra":1}"#).is_err());
    }

    #[test]
    fn small_dla_dimensions() {
        let a = AnsatzSpec::custom(2, 1, vec!["ZZ".parse().unwrap()], InputState::ZeroState).unwrap();
        assert_eq!(dla_dimension(&a).unwrap(), 1);
        assert_eq!(dla_dimension(&hea(2, 1).unwrap()).unwrap(), 15);
    }

    #[test]
    fn tfim_hamiltonian_terms() {
        let h = tfim_hamiltonian(3, Boundary::Open, crate::pauli::parse_rational("1").unwrap()).unwrap();
        assert_eq!(h.len(), 5);
        assert_eq!(h.coeff(&"ZZI".parse().unwrap()), Some(&crate::pauli::parse_rational("-1").unwrap()));
        assert_eq!(h.coeff(&"IXI".parse().unwrap()), Some(&crate::pauli::parse_rational("-1").unwrap()));
    }
}
