//! Monoidal string diagrams with pregroup typing.
//!
//! A [`Diagram`] is a layered term: a domain type followed by a list of
//! layers, each placing one [`Morphism`] at a wire offset of the running type.
//! Type-checking and compilation are both a single left-to-right pass over the
//! layers. Word boxes are states (empty domain); cups contract an atom with its
//! adjoint; spiders and combine boxes merge sentence wires.

mod pregroup;
mod rewrite;

pub use pregroup::{pregroup_reduce, Reduction};
pub use rewrite::remove_cups;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Base of an atomic pregroup type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    Noun,
    Sentence,
    Prep,
    Image,
}

impl Base {
    pub fn symbol(self) -> &'static str {
        match self {
            Base::Noun => "n",
            Base::Sentence => "s",
            Base::Prep => "p",
            Base::Image => "image_type",
        }
    }
}

/// An atomic type with its adjoint order: `-1` is the left adjoint `x^l`,
/// `0` the plain type and `+1` the right adjoint `x^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub base: Base,
    pub adjoint: i32,
}

impl Atom {
    pub const N: Atom = Atom::plain(Base::Noun);
    pub const S: Atom = Atom::plain(Base::Sentence);
    pub const P: Atom = Atom::plain(Base::Prep);
    pub const IMAGE: Atom = Atom::plain(Base::Image);

    pub const fn new(base: Base, adjoint: i32) -> Self {
        Atom { base, adjoint }
    }

    pub const fn plain(base: Base) -> Self {
        Atom { base, adjoint: 0 }
    }

    /// Left adjoint.
    pub const fn l(self) -> Self {
        Atom::new(self.base, self.adjoint - 1)
    }

    /// Right adjoint.
    pub const fn r(self) -> Self {
        Atom::new(self.base, self.adjoint + 1)
    }

    /// Whether `self · right` reduces to the unit, i.e. `(x, x^r)` or `(x^l, x)`.
    pub fn cancels(self, right: Atom) -> bool {
        self.base == right.base && right.adjoint == self.adjoint + 1
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base.symbol())?;
        let suffix = if self.adjoint < 0 { ".l" } else { ".r" };
        for _ in 0..self.adjoint.unsigned_abs() {
            f.write_str(suffix)?;
        }
        Ok(())
    }
}

/// A pregroup type: an ordered list of atoms. The empty list is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PregroupType(Vec<Atom>);

impl PregroupType {
    pub fn new(atoms: Vec<Atom>) -> Self {
        PregroupType(atoms)
    }

    pub fn unit() -> Self {
        PregroupType(Vec::new())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        let mut atoms = self.0.clone();
        atoms.extend_from_slice(&other.0);
        PregroupType(atoms)
    }

    /// `n` copies of `atom`.
    pub fn repeat(atom: Atom, n: usize) -> Self {
        PregroupType(alloc::vec![atom; n])
    }
}

impl From<Atom> for PregroupType {
    fn from(atom: Atom) -> Self {
        PregroupType(alloc::vec![atom])
    }
}

impl From<&[Atom]> for PregroupType {
    fn from(atoms: &[Atom]) -> Self {
        PregroupType(atoms.to_vec())
    }
}

impl FromIterator<Atom> for PregroupType {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        PregroupType(iter.into_iter().collect())
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, atom) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("@")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

/// What a box does. Determines how it type-checks and how it compiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoxKind {
    /// A word state (empty domain).
    Word,
    /// A word state bent into an effect by cup removal (empty codomain).
    WordEffect,
    Cup,
    Cap,
    Spider,
    Combine,
    /// An image state carrying fixed parameters.
    Image,
    /// The merging box over sentence and image wires. `mirrored` means the
    /// two candidate registers are treated identically.
    Comparison { mirrored: bool },
}

impl BoxKind {
    /// Boxes whose compiled fragment carries parameters.
    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            BoxKind::Word
                | BoxKind::WordEffect
                | BoxKind::Combine
                | BoxKind::Image
                | BoxKind::Comparison { .. }
        )
    }
}

impl fmt::Display for BoxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoxKind::Word => "WORD",
            BoxKind::WordEffect => "EFFECT",
            BoxKind::Cup => "CUP",
            BoxKind::Cap => "CAP",
            BoxKind::Spider => "SPIDER",
            BoxKind::Combine => "COMBINE",
            BoxKind::Image => "IMAGE",
            BoxKind::Comparison { mirrored: true } => "COMPARISON",
            BoxKind::Comparison { mirrored: false } => "COMPARISON_PLAIN",
        };
        f.write_str(s)
    }
}

/// A box in a string diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism {
    pub name: String,
    pub kind: BoxKind,
    pub dom: PregroupType,
    pub cod: PregroupType,
    /// Prefix of the parameter symbols of this box; empty for unparameterized
    /// boxes. Boxes sharing a base share parameters.
    pub symbol_base: String,
    /// Pre-bound parameter values (image boxes only).
    pub values: Vec<f64>,
}

impl Morphism {
    /// A word state of type `cod`. Its symbols are shared by every occurrence
    /// of the same word with the same type.
    pub fn word(name: impl Into<String>, cod: PregroupType) -> Self {
        let name = name.into();
        let symbol_base = format!("{name}__{cod}");
        Morphism {
            name,
            kind: BoxKind::Word,
            dom: PregroupType::unit(),
            cod,
            symbol_base,
            values: Vec::new(),
        }
    }

    pub fn cup(left: Atom, right: Atom) -> Result<Self, DiagramError> {
        if !left.cancels(right) {
            return Err(DiagramError::NotAdjoint { left, right });
        }
        Ok(Morphism {
            name: "CUP".to_string(),
            kind: BoxKind::Cup,
            dom: PregroupType::new(alloc::vec![left, right]),
            cod: PregroupType::unit(),
            symbol_base: String::new(),
            values: Vec::new(),
        })
    }

    /// A cap creating `(left, right)`; `right · left` must cancel, e.g.
    /// `(x^r, x)`, so that the snake with a cup is the identity.
    pub fn cap(left: Atom, right: Atom) -> Result<Self, DiagramError> {
        if !right.cancels(left) {
            return Err(DiagramError::NotAdjoint { left: right, right: left });
        }
        Ok(Morphism {
            name: "CAP".to_string(),
            kind: BoxKind::Cap,
            dom: PregroupType::unit(),
            cod: PregroupType::new(alloc::vec![left, right]),
            symbol_base: String::new(),
            values: Vec::new(),
        })
    }

    /// Commutative merge of `legs` wires of type `atom` into one.
    pub fn spider(atom: Atom, legs: usize) -> Self {
        Morphism {
            name: "SPIDER".to_string(),
            kind: BoxKind::Spider,
            dom: PregroupType::repeat(atom, legs),
            cod: PregroupType::from(atom),
            symbol_base: String::new(),
            values: Vec::new(),
        }
    }

    /// A trainable box merging two sentence wires into one.
    pub fn combine(name: impl Into<String>) -> Self {
        let name = name.into();
        let dom = PregroupType::repeat(Atom::S, 2);
        let symbol_base = format!("{name}__{dom}");
        Morphism {
            name,
            kind: BoxKind::Combine,
            dom,
            cod: PregroupType::from(Atom::S),
            symbol_base,
            values: Vec::new(),
        }
    }

    /// An image state with fixed parameter values.
    pub fn image(name: impl Into<String>, values: Vec<f64>) -> Self {
        let name = name.into();
        let cod = PregroupType::from(Atom::IMAGE);
        let symbol_base = format!("{name}__{cod}");
        Morphism {
            name,
            kind: BoxKind::Image,
            dom: PregroupType::unit(),
            cod,
            symbol_base,
            values,
        }
    }

    pub fn comparison(name: impl Into<String>, dom: PregroupType, mirrored: bool) -> Self {
        let name = name.into();
        let symbol_base = format!("{name}__{dom}");
        Morphism {
            name,
            kind: BoxKind::Comparison { mirrored },
            dom,
            cod: PregroupType::from(Atom::S),
            symbol_base,
            values: Vec::new(),
        }
    }

    /// The word state bent into an effect on a wire of type `wire`.
    pub(crate) fn transposed_word(&self, wire: Atom) -> Self {
        Morphism {
            name: self.name.clone(),
            kind: BoxKind::WordEffect,
            dom: PregroupType::from(wire),
            cod: PregroupType::unit(),
            symbol_base: self.symbol_base.clone(),
            values: self.values.clone(),
        }
    }
}

/// One layer of a diagram: a box placed at a wire offset.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub offset: usize,
    pub morphism: Morphism,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DiagramError {
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch {
        expected: PregroupType,
        found: PregroupType,
    },
    #[error("atoms {left} and {right} do not cancel")]
    NotAdjoint { left: Atom, right: Atom },
    #[error("cup wires {i} and {j} are not adjacent")]
    NotAdjacent { i: usize, j: usize },
    #[error("layer {layer}: box needs wires {offset}..{end} but only {available} are present")]
    OutOfRange {
        layer: usize,
        offset: usize,
        end: usize,
        available: usize,
    },
    #[error("rewrite unsupported: {0}")]
    RewriteUnsupported(String),
}

/// The first layer that failed to type-check, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub failure: Option<ValidationFailure>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationFailure {
    /// Index of the offending layer; `layers.len()` when the final running
    /// type differs from the declared codomain.
    pub layer: usize,
    pub reason: String,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// A layered string diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    dom: PregroupType,
    cod: PregroupType,
    layers: Vec<Layer>,
}

impl Diagram {
    /// The identity on `ty` (no layers).
    pub fn id(ty: PregroupType) -> Self {
        Diagram {
            cod: ty.clone(),
            dom: ty,
            layers: Vec::new(),
        }
    }

    /// The empty diagram on the unit type.
    pub fn empty() -> Self {
        Diagram::id(PregroupType::unit())
    }

    /// A diagram consisting of a single box.
    pub fn from_box(morphism: Morphism) -> Self {
        Diagram {
            dom: morphism.dom.clone(),
            cod: morphism.cod.clone(),
            layers: alloc::vec![Layer {
                offset: 0,
                morphism
            }],
        }
    }

    /// Builds a diagram from raw layers, type-checking every one.
    pub fn from_layers(dom: PregroupType, layers: Vec<Layer>) -> Result<Self, DiagramError> {
        let mut running = dom.atoms().to_vec();
        for (i, layer) in layers.iter().enumerate() {
            step(&mut running, i, layer)?;
        }
        Ok(Diagram {
            dom,
            cod: PregroupType::new(running),
            layers,
        })
    }

    /// Builds a diagram without any checks. Use [`Diagram::validate`] to
    /// inspect the result.
    pub fn from_layers_unchecked(dom: PregroupType, cod: PregroupType, layers: Vec<Layer>) -> Self {
        Diagram { dom, cod, layers }
    }

    pub fn dom(&self) -> &PregroupType {
        &self.dom
    }

    pub fn cod(&self) -> &PregroupType {
        &self.cod
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Side-by-side composition: `self` runs first, then `other` on the wires
    /// to the right of `self`'s codomain.
    pub fn tensor(&self, other: &Diagram) -> Diagram {
        let shift = self.cod.len();
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().map(|l| Layer {
            offset: l.offset + shift,
            morphism: l.morphism.clone(),
        }));
        Diagram {
            dom: self.dom.concat(&other.dom),
            cod: self.cod.concat(&other.cod),
            layers,
        }
    }

    /// Sequential composition `other ∘ self`.
    pub fn then(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        if self.cod != other.dom {
            return Err(DiagramError::TypeMismatch {
                expected: self.cod.clone(),
                found: other.dom.clone(),
            });
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Ok(Diagram {
            dom: self.dom.clone(),
            cod: other.cod.clone(),
            layers,
        })
    }

    /// Appends `morphism` at wire `offset` of the current codomain.
    pub fn apply(&self, offset: usize, morphism: Morphism) -> Result<Diagram, DiagramError> {
        let layer = Layer { offset, morphism };
        let mut running = self.cod.atoms().to_vec();
        step(&mut running, self.layers.len(), &layer)?;
        let mut layers = self.layers.clone();
        layers.push(layer);
        Ok(Diagram {
            dom: self.dom.clone(),
            cod: PregroupType::new(running),
            layers,
        })
    }

    /// Appends a cup over output wires `i` and `j = i + 1`.
    pub fn add_cup(&self, i: usize, j: usize) -> Result<Diagram, DiagramError> {
        if j != i + 1 {
            return Err(DiagramError::NotAdjacent { i, j });
        }
        let atoms = self.cod.atoms();
        if j >= atoms.len() {
            return Err(DiagramError::OutOfRange {
                layer: self.layers.len(),
                offset: i,
                end: j + 1,
                available: atoms.len(),
            });
        }
        let cup = Morphism::cup(atoms[i], atoms[j])?;
        self.apply(i, cup)
    }

    /// Re-runs the layer type-check and reports the first failure.
    pub fn validate(&self) -> ValidationReport {
        let mut running = self.dom.atoms().to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            if let Err(e) = step(&mut running, i, layer) {
                return ValidationReport {
                    failure: Some(ValidationFailure {
                        layer: i,
                        reason: e.to_string(),
                    }),
                };
            }
        }
        if running.as_slice() != self.cod.atoms() {
            return ValidationReport {
                failure: Some(ValidationFailure {
                    layer: self.layers.len(),
                    reason: format!(
                        "final type {} differs from codomain {}",
                        PregroupType::new(running),
                        self.cod
                    ),
                }),
            };
        }
        ValidationReport { failure: None }
    }

    /// Number of boxes matching `pred`.
    pub fn count_boxes(&self, pred: impl Fn(&Morphism) -> bool) -> usize {
        self.layers.iter().filter(|l| pred(&l.morphism)).count()
    }

    /// Textual dump, one layer per line: `offset | kind | name | dom -> cod`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for layer in &self.layers {
            let m = &layer.morphism;
            out.push_str(&format!(
                "{} | {} | {} | {} -> {}\n",
                layer.offset, m.kind, m.name, m.dom, m.cod
            ));
        }
        out
    }
}

/// Applies one layer to the running type.
fn step(running: &mut Vec<Atom>, index: usize, layer: &Layer) -> Result<(), DiagramError> {
    let dom = layer.morphism.dom.atoms();
    let end = layer.offset + dom.len();
    if end > running.len() || layer.offset > running.len() {
        return Err(DiagramError::OutOfRange {
            layer: index,
            offset: layer.offset,
            end,
            available: running.len(),
        });
    }
    if &running[layer.offset..end] != dom {
        return Err(DiagramError::TypeMismatch {
            expected: PregroupType::from(dom),
            found: PregroupType::from(&running[layer.offset..end]),
        });
    }
    running.splice(
        layer.offset..end,
        layer.morphism.cod.atoms().iter().copied(),
    );
    Ok(())
}
