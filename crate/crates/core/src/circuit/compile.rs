//! Diagram → circuit compilation.
//!
//! Layers are compiled left to right while tracking which qubits carry each
//! wire of the running type. Every post-selection frees its qubit, and new
//! wires take the lowest free qubit first, so a sentence whose cups have been
//! contracted leaves its scratch qubits to the next box.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    sim14_param_count, sim14_template, symbol_name, Angle, AnsatzConfig, CircuitError, CircuitIR,
    Gate, GateKind, Op, Symbol,
};
use crate::diagram::{Atom, BoxKind, Diagram, Morphism};

/// Compiles a sentence-valued diagram to a circuit with one measured qubit.
/// Extra sentence qubits, if the sentence type has more than one, are
/// post-selected and the first is measured.
pub fn compile(d: &Diagram, cfg: &AnsatzConfig) -> Result<CircuitIR, CircuitError> {
    if d.cod().atoms() != [Atom::S] {
        return Err(CircuitError::NotSentence(d.cod().clone()));
    }
    let mut c = compile_any(d, cfg)?;
    for q in c.outputs.split_off(1) {
        c.ops.push(Op::PostSelect(q));
    }
    Ok(c)
}

/// Compiles any valid diagram; the output qubits follow the codomain wires in
/// order. Input wires start in `|0⟩`.
pub fn compile_any(d: &Diagram, cfg: &AnsatzConfig) -> Result<CircuitIR, CircuitError> {
    cfg.check()?;
    let report = d.validate();
    if let Some(f) = report.failure {
        return Err(CircuitError::Unsupported {
            name: alloc::format!("layer {}", f.layer),
            reason: f.reason,
        });
    }
    let mut b = Builder {
        cfg,
        n_qubits: 0,
        free: BTreeSet::new(),
        ops: Vec::new(),
        symbols: Vec::new(),
        by_name: BTreeMap::new(),
    };
    let mut wires: Vec<Vec<usize>> = d
        .dom()
        .atoms()
        .iter()
        .map(|&a| b.alloc_n(cfg.qubits(a)))
        .collect();
    for layer in d.layers() {
        let m = &layer.morphism;
        let span = layer.offset..layer.offset + m.dom.len();
        let inputs: Vec<Vec<usize>> = wires.drain(span).collect();
        let outputs = b.apply(m, inputs)?;
        let at = layer.offset;
        wires.splice(at..at, outputs);
    }
    Ok(CircuitIR {
        n_qubits: b.n_qubits,
        ops: b.ops,
        outputs: wires.concat(),
        symbols: b.symbols,
    })
}

struct Builder<'a> {
    cfg: &'a AnsatzConfig,
    n_qubits: usize,
    free: BTreeSet<usize>,
    ops: Vec<Op>,
    symbols: Vec<Symbol>,
    by_name: BTreeMap<String, usize>,
}

/// How a box's circuit-14 fragment gets its angles.
#[derive(Clone, Copy)]
enum Params<'v> {
    Trainable,
    Fixed(&'v [f64]),
}

impl Builder<'_> {
    fn alloc(&mut self) -> usize {
        if let Some(q) = self.free.pop_first() {
            return q;
        }
        self.n_qubits += 1;
        self.n_qubits - 1
    }

    fn alloc_n(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.alloc()).collect()
    }

    fn post_select(&mut self, q: usize) {
        self.ops.push(Op::PostSelect(q));
        self.free.insert(q);
    }

    fn gate(&mut self, kind: GateKind, targets: &[usize], angle: Option<Angle>) {
        self.ops.push(Op::Gate(Gate::new(kind, targets, angle)));
    }

    fn symbol(&mut self, name: String, value: Option<f64>) -> Result<usize, CircuitError> {
        if let Some(&i) = self.by_name.get(&name) {
            let existing = &self.symbols[i];
            let same = match (existing.value, value) {
                (None, None) => true,
                (Some(a), Some(b)) => a.to_bits() == b.to_bits(),
                _ => false,
            };
            if !same {
                return Err(CircuitError::SymbolConflict(name));
            }
            return Ok(i);
        }
        self.symbols.push(Symbol {
            name: name.clone(),
            trainable: value.is_none(),
            value,
        });
        self.by_name.insert(name, self.symbols.len() - 1);
        Ok(self.symbols.len() - 1)
    }

    /// Emits circuit-14 over `qubits`. `place` maps a local qubit to the
    /// physical copies it acts on (several for mirrored registers); a
    /// two-qubit gate is emitted for every pairing that shares a copy index,
    /// or against the single copy of the other side.
    fn sim14_on(
        &mut self,
        n_local: usize,
        place: &dyn Fn(usize) -> Vec<usize>,
        base: &str,
        params: Params<'_>,
        transpose: bool,
    ) -> Result<(), CircuitError> {
        let template = sim14_template(n_local, self.cfg.n_layers);
        if let Params::Fixed(values) = params {
            let expected = sim14_param_count(n_local, self.cfg.n_layers);
            if values.len() != expected {
                return Err(CircuitError::LengthMismatch {
                    name: base.to_string(),
                    expected,
                    found: values.len(),
                });
            }
        }
        let per_layer = sim14_param_count(n_local, 1);
        let mut gates: Vec<(GateKind, Vec<usize>, Angle)> = Vec::new();
        for t in &template {
            let value = match params {
                Params::Trainable => None,
                Params::Fixed(values) => Some(values[t.layer * per_layer + t.index]),
            };
            let index = self.symbol(symbol_name(base, t.layer, t.index), value)?;
            // the transpose of RY(θ) is RY(-θ); RX, RZ and CRX are symmetric
            let negated = transpose && t.kind == GateKind::Ry;
            let angle = Angle::Symbol { index, negated };
            let locals = t.locals();
            if locals.len() == 1 {
                for q in place(locals[0]) {
                    gates.push((t.kind, alloc::vec![q], angle));
                }
            } else {
                let (cs, ts) = (place(locals[0]), place(locals[1]));
                let copies = cs.len().max(ts.len());
                for k in 0..copies {
                    let c = cs[k.min(cs.len() - 1)];
                    let tq = ts[k.min(ts.len() - 1)];
                    gates.push((t.kind, alloc::vec![c, tq], angle));
                }
            }
        }
        if transpose {
            gates.reverse();
        }
        for (kind, targets, angle) in gates {
            self.gate(kind, &targets, Some(angle));
        }
        Ok(())
    }

    fn split_outputs(&self, m: &Morphism, qubits: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut at = 0;
        for &a in m.cod.atoms() {
            let k = self.cfg.qubits(a);
            out.push(qubits[at..at + k].to_vec());
            at += k;
        }
        out
    }

    fn apply(&mut self, m: &Morphism, inputs: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>, CircuitError> {
        match m.kind {
            BoxKind::Word | BoxKind::Combine | BoxKind::Image | BoxKind::Comparison { mirrored: false } => {
                let params = if m.kind == BoxKind::Image {
                    Params::Fixed(&m.values)
                } else {
                    Params::Trainable
                };
                self.generic_box(m, inputs.concat(), params)
            }
            BoxKind::Comparison { mirrored: true } => self.mirrored_comparison(m, inputs),
            BoxKind::WordEffect => {
                let wire = inputs.concat();
                let place = |l: usize| alloc::vec![wire[l]];
                self.sim14_on(wire.len(), &place, &m.symbol_base, Params::Trainable, true)?;
                for &q in &wire {
                    self.post_select(q);
                }
                Ok(Vec::new())
            }
            BoxKind::Cup => {
                let (l, r) = (&inputs[0], &inputs[1]);
                for (&a, &b) in l.iter().zip(r) {
                    self.gate(GateKind::Cnot, &[a, b], None);
                    self.gate(GateKind::H, &[a], None);
                    self.post_select(a);
                    self.post_select(b);
                }
                Ok(Vec::new())
            }
            BoxKind::Cap => {
                let k = self.cfg.qubits(m.cod.atoms()[0]);
                let l = self.alloc_n(k);
                let r = self.alloc_n(k);
                for (&a, &b) in l.iter().zip(&r) {
                    self.gate(GateKind::H, &[a], None);
                    self.gate(GateKind::Cnot, &[a, b], None);
                }
                Ok(alloc::vec![l, r])
            }
            BoxKind::Spider => {
                if m.dom.atoms().iter().any(|&a| a != m.cod.atoms()[0]) {
                    return Err(CircuitError::Unsupported {
                        name: m.name.clone(),
                        reason: "spider legs must share one type".into(),
                    });
                }
                let survivor = inputs[0].clone();
                for leg in &inputs[1..] {
                    for (&s, &q) in survivor.iter().zip(leg) {
                        // copy the survivor's basis value onto the leg and keep
                        // only the branch where they agreed
                        self.gate(GateKind::Cnot, &[s, q], None);
                        self.post_select(q);
                    }
                }
                Ok(alloc::vec![survivor])
            }
        }
    }

    /// Circuit-14 over the input qubits (plus fresh qubits when the output is
    /// wider); the first `cod` qubits carry the outputs and the rest are
    /// post-selected.
    fn generic_box(
        &mut self,
        m: &Morphism,
        mut qubits: Vec<usize>,
        params: Params<'_>,
    ) -> Result<Vec<Vec<usize>>, CircuitError> {
        let cod = self.cfg.qubits_of(&m.cod);
        if cod > qubits.len() {
            let extra = self.alloc_n(cod - qubits.len());
            qubits.extend(extra);
        }
        let place = |l: usize| alloc::vec![qubits[l]];
        self.sim14_on(qubits.len(), &place, &m.symbol_base, params, false)?;
        for &q in &qubits[cod..] {
            self.post_select(q);
        }
        Ok(self.split_outputs(m, &qubits[..cod]))
    }

    /// Comparison box acting identically on two candidate registers A and B.
    ///
    /// Circuit-14 is laid out over a virtual register `[candidate, others]`;
    /// every gate on the candidate part is applied to both A and B with the
    /// same symbol, so the unitary commutes with swapping A and B. Everything
    /// but the leading qubits `a, b` of the two candidates is post-selected,
    /// then `CNOT(a→b)·X(b)` and post-selecting `b` keeps the anti-correlated
    /// patterns `01` and `10`. Measuring `a` gives `p(0) ∝ |ψ(01)|²` ("first
    /// candidate") and `p(1) ∝ |ψ(10)|²`, so a swap exchanges the two.
    fn mirrored_comparison(
        &mut self,
        m: &Morphism,
        inputs: Vec<Vec<usize>>,
    ) -> Result<Vec<Vec<usize>>, CircuitError> {
        let atoms = m.dom.atoms();
        let unsupported = |reason: &str| CircuitError::Unsupported {
            name: m.name.clone(),
            reason: reason.into(),
        };
        if self.cfg.qubits_of(&m.cod) != 1 {
            return Err(unsupported("mirrored comparison needs a one-qubit output"));
        }
        let repeated: Vec<Atom> = atoms
            .iter()
            .copied()
            .filter(|a| atoms.iter().filter(|b| *b == a).count() == 2)
            .collect();
        let [ca, cb] = repeated.as_slice() else {
            return Err(unsupported("expected exactly one pair of candidate wires"));
        };
        debug_assert_eq!(ca, cb);
        let candidates: Vec<usize> = (0..atoms.len()).filter(|&i| atoms[i] == *ca).collect();
        let a = inputs[candidates[0]].clone();
        let bq = inputs[candidates[1]].clone();
        let others: Vec<usize> = (0..atoms.len())
            .filter(|i| !candidates.contains(i))
            .flat_map(|i| inputs[i].iter().copied())
            .collect();
        let width = a.len();
        let place = |l: usize| {
            if l < width {
                alloc::vec![a[l], bq[l]]
            } else {
                alloc::vec![others[l - width]]
            }
        };
        self.sim14_on(width + others.len(), &place, &m.symbol_base, Params::Trainable, false)?;
        for &q in a[1..].iter().chain(&bq[1..]).chain(&others) {
            self.post_select(q);
        }
        self.gate(GateKind::Cnot, &[a[0], bq[0]], None);
        self.gate(GateKind::X, &[bq[0]], None);
        self.post_select(bq[0]);
        Ok(alloc::vec![alloc::vec![a[0]]])
    }
}
