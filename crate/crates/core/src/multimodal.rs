//! Image states, the comparison box, and unified image–text diagrams.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::AnsatzConfig;
use crate::diagram::{Atom, Base, Diagram, DiagramError, Morphism, PregroupType};

/// Normalized two-way prediction: probability that the first or the second
/// candidate is the correct one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionDistribution {
    pub p_first: f64,
    pub p_second: f64,
}

impl PredictionDistribution {
    /// Normalizes two non-negative weights.
    pub fn from_weights(first: f64, second: f64) -> Self {
        let total = first + second;
        PredictionDistribution {
            p_first: first / total,
            p_second: second / total,
        }
    }

    /// Index of the predicted candidate; within `tol` of a tie the first
    /// candidate wins.
    pub fn predicted(&self, tol: f64) -> u8 {
        if self.p_second - self.p_first > tol {
            1
        } else {
            0
        }
    }
}

/// Angles fed to an image box, one per ansatz parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageFeatures {
    pub image_id: String,
    pub values: Vec<f64>,
}

impl ImageFeatures {
    pub fn new(image_id: impl Into<String>, values: Vec<f64>) -> Result<Self, MultimodalError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(MultimodalError::NonFinite { index });
        }
        Ok(ImageFeatures {
            image_id: image_id.into(),
            values,
        })
    }
}

/// Which side of the task carries the two candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskLayout {
    /// One sentence, two candidate images.
    Unstructured,
    /// Two candidate sentences, one image.
    Structured,
}

impl TaskLayout {
    pub fn n_sentences(self) -> usize {
        match self {
            TaskLayout::Unstructured => 1,
            TaskLayout::Structured => 2,
        }
    }

    pub fn n_images(self) -> usize {
        3 - self.n_sentences()
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskLayout::Unstructured => "unstructured",
            TaskLayout::Structured => "structured",
        }
    }
}

impl core::fmt::Display for TaskLayout {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for TaskLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [TaskLayout::Unstructured, TaskLayout::Structured]
            .into_iter()
            .find(|l| l.name() == s.to_lowercase())
            .ok_or_else(|| alloc::format!("unknown layout `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MultimodalError {
    #[error("image has {found} features, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("feature {index} is not finite")]
    NonFinite { index: usize },
    #[error("comparison box cannot take inputs `{0}`")]
    UnsupportedInputs(PregroupType),
    #[error("{layout} instances take {want_s} sentence(s) and {want_i} image(s), got {got_s} and {got_i}")]
    Arity {
        layout: TaskLayout,
        want_s: usize,
        want_i: usize,
        got_s: usize,
        got_i: usize,
    },
    #[error("sentence {index} has output `{ty}`, expected `s`")]
    NotSentence { index: usize, ty: PregroupType },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// A state of type `image_type` whose circuit-14 angles are the feature
/// values (fixed, never trained).
pub fn image_box(f: &ImageFeatures, cfg: &AnsatzConfig) -> Result<Diagram, MultimodalError> {
    let expected = cfg.image_params();
    if f.values.len() != expected {
        return Err(MultimodalError::LengthMismatch {
            expected,
            found: f.values.len(),
        });
    }
    Ok(Diagram::from_box(Morphism::image(
        f.image_id.clone(),
        f.values.clone(),
    )))
}

/// The trainable merging box over `inputs`, with output `s`.
///
/// Inputs must be plain sentence and image wires with at least one of each.
/// A `mirrored` box treats its two candidate wires (the type that occurs
/// exactly twice) identically, so exactly one such pair must exist.
pub fn comparison_box(inputs: &PregroupType, mirrored: bool) -> Result<Morphism, MultimodalError> {
    let atoms = inputs.atoms();
    let count = |a: Atom| atoms.iter().filter(|&&b| b == a).count();
    let plain = atoms
        .iter()
        .all(|a| a.adjoint == 0 && matches!(a.base, Base::Sentence | Base::Image));
    let unsupported = || MultimodalError::UnsupportedInputs(inputs.clone());
    if !plain || count(Atom::S) == 0 || count(Atom::IMAGE) == 0 {
        return Err(unsupported());
    }
    if mirrored && [count(Atom::S), count(Atom::IMAGE)].iter().filter(|&&c| c == 2).count() != 1 {
        return Err(unsupported());
    }
    Ok(Morphism::comparison("compare", inputs.clone(), mirrored))
}

/// Tensors the sentences and images (sentences first) and closes them with
/// the comparison box.
pub fn build_instance(
    layout: TaskLayout,
    sentences: &[Diagram],
    images: &[ImageFeatures],
    cfg: &AnsatzConfig,
    mirrored: bool,
) -> Result<Diagram, MultimodalError> {
    if sentences.len() != layout.n_sentences() || images.len() != layout.n_images() {
        return Err(MultimodalError::Arity {
            layout,
            want_s: layout.n_sentences(),
            want_i: layout.n_images(),
            got_s: sentences.len(),
            got_i: images.len(),
        });
    }
    let mut d = Diagram::empty();
    for (index, s) in sentences.iter().enumerate() {
        if s.cod().atoms() != [Atom::S] {
            return Err(MultimodalError::NotSentence {
                index,
                ty: s.cod().clone(),
            });
        }
        d = d.tensor(s);
    }
    for f in images {
        d = d.tensor(&image_box(f, cfg)?);
    }
    let cmp = comparison_box(d.cod(), mirrored)?;
    Ok(d.apply(0, cmp)?)
}
