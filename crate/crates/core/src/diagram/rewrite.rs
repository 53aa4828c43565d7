//! Cup removal by bending single-wire word states into effects.

use alloc::vec::Vec;

use super::{BoxKind, Diagram, DiagramError, Layer};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Source {
    Input,
    Layer(usize),
}

/// What happens to each layer of the input.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    Keep,
    /// Word state absorbed into a later effect.
    Absorbed,
    /// Cup replaced by the effect of the word in layer `word`, placed on the
    /// cup's input wire at `partner` (0 or 1).
    Effect { word: usize, partner: usize },
}

fn is_leaf(side: Source, layers: &[Layer], fates: &[Fate]) -> bool {
    match side {
        Source::Layer(w) => {
            let m = &layers[w].morphism;
            m.kind == BoxKind::Word && m.cod.len() == 1 && fates[w] == Fate::Keep
        }
        Source::Input => false,
    }
}

/// Removes every cup that has a single-atom word state on one side by
/// transposing that word into an effect on the other wire.
///
/// A cup against the state `U|0⟩` equals the effect `⟨0|Uᵀ` on the partner
/// wire up to a scalar, so measured distributions are unchanged while the
/// word's qubits disappear from the compiled circuit. Cups between two
/// multi-wire boxes are left in place. Diagrams containing caps, or words that
/// are not states, are rejected.
pub fn remove_cups(d: &Diagram) -> Result<Diagram, DiagramError> {
    let layers = d.layers();
    for layer in layers {
        match layer.morphism.kind {
            BoxKind::Cap => {
                return Err(DiagramError::RewriteUnsupported(
                    "diagram contains a cap".into(),
                ))
            }
            BoxKind::Word if !layer.morphism.dom.is_empty() => {
                return Err(DiagramError::RewriteUnsupported(alloc::format!(
                    "word `{}` is not a state",
                    layer.morphism.name
                )))
            }
            _ => {}
        }
    }

    // producer of every wire in the running type, layer by layer
    let mut fates = alloc::vec![Fate::Keep; layers.len()];
    let mut running: Vec<Source> = alloc::vec![Source::Input; d.dom().len()];
    for (idx, layer) in layers.iter().enumerate() {
        let width = layer.morphism.dom.len();
        let span = layer.offset..layer.offset + width;
        if layer.offset + width > running.len() {
            return Err(DiagramError::OutOfRange {
                layer: idx,
                offset: layer.offset,
                end: layer.offset + width,
                available: running.len(),
            });
        }
        if layer.morphism.kind == BoxKind::Cup {
            let sides = [running[layer.offset], running[layer.offset + 1]];
            let leaf_side = sides.iter().position(|&side| is_leaf(side, layers, &fates));
            if let Some(k) = leaf_side {
                if let Source::Layer(w) = sides[k] {
                    fates[w] = Fate::Absorbed;
                    fates[idx] = Fate::Effect {
                        word: w,
                        partner: 1 - k,
                    };
                }
            }
        }
        let outputs = layer.morphism.cod.len();
        running.splice(span, core::iter::repeat_n(Source::Layer(idx), outputs));
    }

    // replay, skipping absorbed wires when computing offsets
    let mut ghost: Vec<bool> = alloc::vec![false; d.dom().len()];
    let mut out = Vec::with_capacity(layers.len());
    for (idx, layer) in layers.iter().enumerate() {
        let visible = ghost[..layer.offset].iter().filter(|g| !**g).count();
        let width = layer.morphism.dom.len();
        let span = layer.offset..layer.offset + width;
        match fates[idx] {
            Fate::Absorbed => {
                let n = layer.morphism.cod.len();
                ghost.splice(span, core::iter::repeat_n(true, n));
            }
            Fate::Effect { word, partner } => {
                let wire = layer.morphism.dom.atoms()[partner];
                // the absorbed wire is invisible, so the partner sits at `visible`
                out.push(Layer {
                    offset: visible,
                    morphism: layers[word].morphism.transposed_word(wire),
                });
                ghost.splice(span, core::iter::empty());
            }
            Fate::Keep => {
                out.push(Layer {
                    offset: visible,
                    morphism: layer.morphism.clone(),
                });
                let n = layer.morphism.cod.len();
                ghost.splice(span, core::iter::repeat_n(false, n));
            }
        }
    }
    Diagram::from_layers(d.dom().clone(), out)
}
