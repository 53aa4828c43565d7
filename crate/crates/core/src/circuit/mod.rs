//! Parameterized circuits: gate IR, the circuit-14 ansatz, compilation from
//! diagrams, and parameter binding.
//!
//! Qubit 0 is the most significant bit of an amplitude index. Post-selections
//! are ordinary operations interleaved with the gates, so a qubit that has been
//! post-selected to `|0⟩` can be handed out again by the compiler.

mod compile;
mod params;

pub use compile::{compile, compile_any};
pub use params::{ParamError, ParamStore};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::diagram::{Atom, Base, DiagramError, PregroupType};

/// Qubits per atomic type and ansatz depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnsatzConfig {
    pub qubits_noun: usize,
    pub qubits_sentence: usize,
    pub qubits_prep: usize,
    pub qubits_image: usize,
    pub n_layers: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            qubits_noun: 1,
            qubits_sentence: 1,
            qubits_prep: 1,
            qubits_image: 5,
            n_layers: 1,
        }
    }
}

impl AnsatzConfig {
    pub fn qubits(&self, atom: Atom) -> usize {
        match atom.base {
            Base::Noun => self.qubits_noun,
            Base::Sentence => self.qubits_sentence,
            Base::Prep => self.qubits_prep,
            Base::Image => self.qubits_image,
        }
    }

    pub fn qubits_of(&self, ty: &PregroupType) -> usize {
        ty.atoms().iter().map(|&a| self.qubits(a)).sum()
    }

    /// Number of parameters an image feature vector must supply.
    pub fn image_params(&self) -> usize {
        sim14_param_count(self.qubits_image, self.n_layers)
    }

    pub fn check(&self) -> Result<(), CircuitError> {
        let counts = [
            self.qubits_noun,
            self.qubits_sentence,
            self.qubits_prep,
            self.qubits_image,
            self.n_layers,
        ];
        if counts.contains(&0) {
            return Err(CircuitError::Config(
                "qubit counts and n_layers must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    Cnot,
    Rx,
    Ry,
    Rz,
    Crx,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::Cnot,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Crx,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Crx => 2,
            _ => 1,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Crx
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::Cnot => "CNOT",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Crx => "CRX",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A symbolic or constant rotation angle in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Const(f64),
    /// Index into [`CircuitIR::symbols`]; `negated` flips the sign, which is
    /// how transposed `RY` rotations reuse their word's symbol.
    Symbol { index: usize, negated: bool },
}

/// A gate on one or two qubits. For two-qubit gates the first qubit is the
/// control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate<A = Angle> {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub angle: Option<A>,
}

impl<A> Gate<A> {
    /// Panics when the number of qubits or the presence of an angle does not
    /// match `kind`.
    pub fn new(kind: GateKind, targets: &[usize], angle: Option<A>) -> Self {
        assert_eq!(targets.len(), kind.arity(), "{kind} takes {} qubits", kind.arity());
        assert_eq!(
            angle.is_some(),
            kind.is_parameterized(),
            "{kind} angle presence mismatch"
        );
        if targets.len() == 2 {
            assert_ne!(targets[0], targets[1], "{kind} needs distinct qubits");
        }
        let second = targets.get(1).copied().unwrap_or(targets[0]);
        Gate {
            kind,
            qubits: [targets[0], second],
            angle,
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }
}

/// One step of a circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op<A = Angle> {
    Gate(Gate<A>),
    /// Project the qubit onto `|0⟩` without renormalizing.
    PostSelect(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    pub name: String,
    pub trainable: bool,
    /// Pre-bound value of a fixed (image) symbol.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("invalid diagram: {0}")]
    Diagram(#[from] DiagramError),
    #[error("expected a diagram with output `s`, found `{0}`")]
    NotSentence(PregroupType),
    #[error("unsupported box `{name}`: {reason}")]
    Unsupported { name: String, reason: String },
    #[error("box `{name}` carries {found} values but its ansatz needs {expected}")]
    LengthMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("symbol `{0}` is bound to two different fixed values")]
    SymbolConflict(String),
    #[error("missing symbols: {}", .0.join(", "))]
    MissingSymbol(Vec<String>),
    #[error("expected {expected} parameter values, got {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("bad ansatz configuration: {0}")]
    Config(String),
}

/// A compiled, still symbolic circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitIR {
    pub n_qubits: usize,
    pub ops: Vec<Op>,
    /// Qubits left open at the end, in wire order. Compiled sentences have
    /// exactly one, the measured qubit.
    pub outputs: Vec<usize>,
    pub symbols: Vec<Symbol>,
}

/// A circuit with every angle resolved to a number.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCircuit {
    pub n_qubits: usize,
    pub ops: Vec<Op<f64>>,
    pub outputs: Vec<usize>,
}

impl CircuitIR {
    /// The measured qubit of a single-output circuit.
    pub fn measure_qubit(&self) -> Option<usize> {
        match self.outputs.as_slice() {
            [q] => Some(*q),
            _ => None,
        }
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate(g) => Some(g),
            Op::PostSelect(_) => None,
        })
    }

    pub fn post_selections(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().filter_map(|op| match op {
            Op::PostSelect(q) => Some(*q),
            Op::Gate(_) => None,
        })
    }

    pub fn trainable_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| s.trainable)
    }

    pub fn fixed_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|s| !s.trainable)
    }

    /// Resolves every symbol from `store`.
    pub fn bind(&self, store: &ParamStore) -> Result<BoundCircuit, CircuitError> {
        let mut missing = Vec::new();
        let mut values = Vec::with_capacity(self.symbols.len());
        for s in &self.symbols {
            match store.get(&s.name) {
                Some(v) => values.push(v),
                None => missing.push(s.name.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(CircuitError::MissingSymbol(missing));
        }
        self.bind_values(&values)
    }

    /// Resolves symbols from `values`, aligned with [`CircuitIR::symbols`].
    pub fn bind_values(&self, values: &[f64]) -> Result<BoundCircuit, CircuitError> {
        if values.len() != self.symbols.len() {
            return Err(CircuitError::ValueCount {
                expected: self.symbols.len(),
                found: values.len(),
            });
        }
        let ops = self
            .ops
            .iter()
            .map(|op| match *op {
                Op::PostSelect(q) => Op::PostSelect(q),
                Op::Gate(g) => Op::Gate(Gate {
                    kind: g.kind,
                    qubits: g.qubits,
                    angle: g.angle.map(|a| match a {
                        Angle::Const(v) => v,
                        Angle::Symbol { index, negated } => {
                            if negated {
                                -values[index]
                            } else {
                                values[index]
                            }
                        }
                    }),
                }),
            })
            .collect();
        Ok(BoundCircuit {
            n_qubits: self.n_qubits,
            ops,
            outputs: self.outputs.clone(),
        })
    }

    /// Binds trainable symbols from `store` and fixed symbols from their
    /// pre-bound values.
    pub fn bind_with_fixed(&self, store: &ParamStore) -> Result<BoundCircuit, CircuitError> {
        let mut missing = Vec::new();
        let mut values = Vec::with_capacity(self.symbols.len());
        for s in &self.symbols {
            match s.value.filter(|_| !s.trainable).or_else(|| store.get(&s.name)) {
                Some(v) => values.push(v),
                None => missing.push(s.name.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(CircuitError::MissingSymbol(missing));
        }
        self.bind_values(&values)
    }

    /// Textual dump, one operation per line: `kind targets angle|symbol`.
    pub fn dump(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for op in &self.ops {
            match op {
                Op::PostSelect(q) => {
                    let _ = writeln!(out, "POST {q} 0");
                }
                Op::Gate(g) => {
                    let _ = write!(out, "{} {}", g.kind, join_targets(g.targets()));
                    match g.angle {
                        Some(Angle::Const(v)) => {
                            let _ = write!(out, " {v}");
                        }
                        Some(Angle::Symbol { index, negated }) => {
                            let sign = if negated { "-" } else { "" };
                            let _ = write!(out, " {sign}{}", self.symbols[index].name);
                        }
                        None => {}
                    }
                    out.push('\n');
                }
            }
        }
        let _ = writeln!(out, "MEASURE {}", join_targets(&self.outputs));
        out
    }
}

impl BoundCircuit {
    /// OpenQASM 2 rendering. Post-selections become mid-circuit measurements
    /// into a `post` register annotated with the required outcome; consumers
    /// must discard shots where any of them reads 1.
    pub fn to_qasm(&self) -> String {
        let posts = self
            .ops
            .iter()
            .filter(|op| matches!(op, Op::PostSelect(_)))
            .count();
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.n_qubits.max(1));
        if posts > 0 {
            let _ = writeln!(out, "creg post[{posts}];");
        }
        if !self.outputs.is_empty() {
            let _ = writeln!(out, "creg out[{}];", self.outputs.len());
        }
        let mut k = 0;
        for op in &self.ops {
            match op {
                Op::PostSelect(q) => {
                    let _ = writeln!(out, "measure q[{q}] -> post[{k}]; // post-select 0");
                    let _ = writeln!(out, "reset q[{q}];");
                    k += 1;
                }
                Op::Gate(g) => {
                    let name = match g.kind {
                        GateKind::Cnot => "cx",
                        GateKind::X => "x",
                        GateKind::Y => "y",
                        GateKind::Z => "z",
                        GateKind::H => "h",
                        GateKind::Rx => "rx",
                        GateKind::Ry => "ry",
                        GateKind::Rz => "rz",
                        GateKind::Crx => "crx",
                    };
                    out.push_str(name);
                    if let Some(theta) = g.angle {
                        let _ = write!(out, "({theta})");
                    }
                    let args: Vec<String> =
                        g.targets().iter().map(|q| format!("q[{q}]")).collect();
                    let _ = writeln!(out, " {};", args.join(","));
                }
            }
        }
        for (i, q) in self.outputs.iter().enumerate() {
            let _ = writeln!(out, "measure q[{q}] -> out[{i}];");
        }
        out
    }
}

fn join_targets(qs: &[usize]) -> String {
    let parts: Vec<String> = qs.iter().map(|q| format!("{q}")).collect();
    parts.join(",")
}

/// Number of parameters of the circuit-14 ansatz: `4·n` per layer, or `3` per
/// layer for a single qubit.
pub fn sim14_param_count(n_qubits: usize, n_layers: usize) -> usize {
    match n_qubits {
        0 => 0,
        1 => 3 * n_layers,
        n => 4 * n * n_layers,
    }
}

/// One gate of the circuit-14 template over local qubits `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TemplateGate {
    pub kind: GateKind,
    pub local: [usize; 2],
    pub layer: usize,
    /// Parameter index within the layer.
    pub index: usize,
}

impl TemplateGate {
    pub fn locals(&self) -> &[usize] {
        &self.local[..self.kind.arity()]
    }
}

/// Circuit-14: per layer an `RY` column, a descending ring of `CRX`
/// (`i → i+1`), another `RY` column and a second `CRX` ring running the other
/// way (`i → i-1`, starting from the last qubit). One qubit gets `RX·RZ·RX`.
pub(crate) fn sim14_template(n: usize, n_layers: usize) -> Vec<TemplateGate> {
    let mut out = Vec::new();
    for layer in 0..n_layers {
        let mut index = 0;
        let mut push = |kind: GateKind, local: [usize; 2]| {
            out.push(TemplateGate {
                kind,
                local,
                layer,
                index,
            });
            index += 1;
        };
        if n == 1 {
            push(GateKind::Rx, [0, 0]);
            push(GateKind::Rz, [0, 0]);
            push(GateKind::Rx, [0, 0]);
            continue;
        }
        for q in 0..n {
            push(GateKind::Ry, [q, q]);
        }
        for q in (0..n).rev() {
            push(GateKind::Crx, [q, (q + 1) % n]);
        }
        for q in 0..n {
            push(GateKind::Ry, [q, q]);
        }
        for k in 0..n {
            let control = (n - 1 + k) % n;
            push(GateKind::Crx, [control, (control + n - 1) % n]);
        }
    }
    out
}

pub(crate) fn symbol_name(prefix: &str, layer: usize, index: usize) -> String {
    format!("{prefix}_{layer}_{index}")
}

/// A standalone circuit-14 fragment on `n_qubits` qubits with trainable
/// symbols named `{prefix}_{layer}_{index}`.
pub fn sim14(n_qubits: usize, n_layers: usize, prefix: &str) -> CircuitIR {
    let mut symbols = Vec::new();
    let mut ops = Vec::new();
    for t in sim14_template(n_qubits, n_layers) {
        symbols.push(Symbol {
            name: symbol_name(prefix, t.layer, t.index),
            trainable: true,
            value: None,
        });
        let angle = Angle::Symbol {
            index: symbols.len() - 1,
            negated: false,
        };
        ops.push(Op::Gate(Gate::new(t.kind, t.locals(), Some(angle))));
    }
    CircuitIR {
        n_qubits,
        ops,
        outputs: (0..n_qubits).collect(),
        symbols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim14_counts() {
        assert_eq!(sim14(5, 1, "img").symbols.len(), 20);
        assert_eq!(sim14(2, 1, "w").symbols.len(), 8);
        assert_eq!(sim14(3, 2, "w").symbols.len(), 24);
        assert_eq!(sim14(1, 1, "w").symbols.len(), 3);
        assert_eq!(sim14_param_count(5, 1), 20);
    }

    #[test]
    fn sim14_rings_on_four_qubits() {
        let t = sim14_template(4, 1);
        let rings: Vec<[usize; 2]> = t
            .iter()
            .filter(|g| g.kind == GateKind::Crx)
            .map(|g| g.local)
            .collect();
        assert_eq!(
            rings,
            [
                [3, 0],
                [2, 3],
                [1, 2],
                [0, 1],
                [3, 2],
                [0, 3],
                [1, 0],
                [2, 1]
            ]
        );
    }

    #[test]
    fn symbol_names_follow_layer_and_index() {
        let c = sim14(2, 2, "dog__n");
        assert_eq!(c.symbols[0].name, "dog__n_0_0");
        assert_eq!(c.symbols[8].name, "dog__n_1_0");
        assert_eq!(c.symbols[15].name, "dog__n_1_7");
    }

    #[test]
    fn bind_reports_missing_symbols() {
        let c = sim14(1, 1, "w");
        let mut store = ParamStore::new();
        store.insert("w_0_0", 0.1, true).unwrap();
        store.insert("w_0_2", 0.3, true).unwrap();
        match c.bind(&store) {
            Err(CircuitError::MissingSymbol(names)) => assert_eq!(names, ["w_0_1"]),
            other => panic!("unexpected {other:?}"),
        }
        store.insert("w_0_1", 0.2, true).unwrap();
        let bound = c.bind(&store).unwrap();
        assert_eq!(bound.ops.len(), c.ops.len());
    }

    #[test]
    fn dump_lists_symbols() {
        let c = sim14(2, 1, "w");
        let dump = c.dump();
        assert!(dump.starts_with("qubits 2\nRY 0 w_0_0\n"));
        assert!(dump.contains("CRX 1,0 w_0_2\n"));
        assert!(dump.ends_with("MEASURE 0,1\n"));
    }

    #[test]
    fn qasm_export_mentions_every_gate() {
        let c = sim14(2, 1, "w");
        let bound = c.bind_values(&[0.5; 8]).unwrap();
        let qasm = bound.to_qasm();
        assert_eq!(qasm.matches("crx(0.5)").count(), 4);
        assert_eq!(qasm.matches("ry(0.5)").count(), 4);
    }

    #[test]
    #[should_panic]
    fn gate_arity_is_checked() {
        let _ = Gate::new(GateKind::Cnot, &[0], None::<Angle>);
    }
}
