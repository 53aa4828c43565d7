//! Samples, datasets, deterministic splits, feature scaling and synthetic
//! task generators.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::multimodal::TaskLayout;

/// One classification instance. `label` is the index of the correct
/// candidate: a sentence for the structured layout, an image otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub layout: TaskLayout,
    pub sentences: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("sample `{id}`: {layout} samples need {want_s} sentence(s) and {want_f} feature vector(s), got {got_s} and {got_f}")]
    Arity {
        id: String,
        layout: TaskLayout,
        want_s: usize,
        want_f: usize,
        got_s: usize,
        got_f: usize,
    },
    #[error("sample `{id}`: label {label} is not 0 or 1")]
    Label { id: String, label: u8 },
    #[error("sample `{id}`: feature vector has {found} values, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("sample `{id}`: feature {index} is not finite")]
    NonFinite { id: String, index: usize },
    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),
    #[error("dataset mixes structured and unstructured samples")]
    MixedLayout,
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("the {0} split would be empty")]
    EmptySplit(&'static str),
    #[error("vocabulary too small: {0}")]
    Vocabulary(String),
}

/// A validated collection of samples sharing one layout and feature width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub feature_dim: usize,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        samples: Vec<Sample>,
        feature_dim: usize,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        let d = Dataset {
            samples,
            feature_dim,
            provenance: provenance.into(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let mut ids = BTreeSet::new();
        for s in &self.samples {
            check_sample(s, self.feature_dim)?;
            if !ids.insert(s.id.as_str()) {
                return Err(DataError::DuplicateId(s.id.clone()));
            }
        }
        if let Some(first) = self.samples.first() {
            if self.samples.iter().any(|s| s.layout != first.layout) {
                return Err(DataError::MixedLayout);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn layout(&self) -> Option<TaskLayout> {
        self.samples.first().map(|s| s.layout)
    }

    /// Number of samples with label 0 and label 1.
    pub fn class_balance(&self) -> [usize; 2] {
        let ones = self.samples.iter().filter(|s| s.label == 1).count();
        [self.samples.len() - ones, ones]
    }

    fn subset(&self, idx: &[usize], part: &str) -> Dataset {
        Dataset {
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            feature_dim: self.feature_dim,
            provenance: format!("{} [{part}]", self.provenance),
        }
    }
}

/// Checks one sample's arity, label and feature vectors.
pub fn check_sample(s: &Sample, dim: usize) -> Result<(), DataError> {
    let (want_s, want_f) = (s.layout.n_sentences(), s.layout.n_images());
    if s.sentences.len() != want_s || s.features.len() != want_f {
        return Err(DataError::Arity {
            id: s.id.clone(),
            layout: s.layout,
            want_s,
            want_f,
            got_s: s.sentences.len(),
            got_f: s.features.len(),
        });
    }
    if s.label > 1 {
        return Err(DataError::Label {
            id: s.id.clone(),
            label: s.label,
        });
    }
    for f in &s.features {
        if f.len() != dim {
            return Err(DataError::DimensionMismatch {
                id: s.id.clone(),
                expected: dim,
                found: f.len(),
            });
        }
        if let Some(index) = f.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                id: s.id.clone(),
                index,
            });
        }
    }
    Ok(())
}

/// Train/validation/test fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    fn check(&self) -> Result<(), DataError> {
        let r = [self.train, self.val, self.test];
        if r.iter().any(|x| !(*x >= 0.0)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(DataError::BadRatios(r));
        }
        Ok(())
    }

    /// `(train, val, test)` sizes for `n` items: validation and test are
    /// floored, the remainder goes to training.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let val = math::floor(n as f64 * self.val + 1e-9) as usize;
        let test = math::floor(n as f64 * self.test + 1e-9) as usize;
        (n - val - test, val, test)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

fn check_parts(t: usize, v: usize, s: usize) -> Result<(), DataError> {
    for (n, name) in [(t, "train"), (v, "validation"), (s, "test")] {
        if n == 0 {
            return Err(DataError::EmptySplit(name));
        }
    }
    Ok(())
}

/// Seeded shuffle followed by a contiguous cut into train, validation and
/// test. Every part must be non-empty.
pub fn split(d: &Dataset, ratios: SplitRatios, seed: u64) -> Result<Splits, DataError> {
    ratios.check()?;
    let (t, v, s) = ratios.sizes(d.len());
    check_parts(t, v, s)?;
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(Splits {
        train: d.subset(&idx[..t], "train"),
        val: d.subset(&idx[t..t + v], "val"),
        test: d.subset(&idx[t + v..], "test"),
    })
}

/// Like [`split`], but cuts each label class separately so that every part
/// keeps the dataset's class balance.
pub fn stratified_split(d: &Dataset, ratios: SplitRatios, seed: u64) -> Result<Splits, DataError> {
    ratios.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for label in 0..=1u8 {
        let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d.samples[i].label == label).collect();
        idx.shuffle(&mut rng);
        let (t, v, _) = ratios.sizes(idx.len());
        parts[0].extend_from_slice(&idx[..t]);
        parts[1].extend_from_slice(&idx[t..t + v]);
        parts[2].extend_from_slice(&idx[t + v..]);
    }
    for p in &mut parts {
        p.shuffle(&mut rng);
    }
    check_parts(parts[0].len(), parts[1].len(), parts[2].len())?;
    Ok(Splits {
        train: d.subset(&parts[0], "train"),
        val: d.subset(&parts[1], "val"),
        test: d.subset(&parts[2], "test"),
    })
}

/// Per-feature min–max scaling onto `[−π, π]`, fitted on one set of samples
/// (the training split) and applied to all. Constant features map to 0 and
/// values outside the fitted range are clamped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(samples: &[Sample], dim: usize) -> Self {
        let mut min = alloc::vec![f64::INFINITY; dim];
        let mut max = alloc::vec![f64::NEG_INFINITY; dim];
        for f in samples.iter().flat_map(|s| &s.features) {
            for (i, &x) in f.iter().enumerate() {
                min[i] = min[i].min(x);
                max[i] = max[i].max(x);
            }
        }
        FeatureScaler { min, max }
    }

    pub fn transform(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(i, &x)| {
                let span = self.max[i] - self.min[i];
                if !(span > 0.0) {
                    return 0.0;
                }
                let unit = ((x - self.min[i]) / span).clamp(0.0, 1.0);
                -PI + 2.0 * PI * unit
            })
            .collect()
    }
}

/// Vocabulary and encoding settings for the synthetic generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabSpec {
    pub nouns: Vec<String>,
    pub verbs: Vec<String>,
    pub feature_dim: usize,
    /// Weights of the subject, verb and object basis vectors in an image
    /// encoding.
    pub role_weights: [f64; 3],
}

impl VocabSpec {
    fn with_words(nouns: &[&str], verbs: &[&str]) -> Self {
        let owned = |ws: &[&str]| ws.iter().map(|w| String::from(*w)).collect();
        VocabSpec {
            nouns: owned(nouns),
            verbs: owned(verbs),
            feature_dim: 20,
            role_weights: [1.0, 0.5, -1.0],
        }
    }

    /// Three nouns and a single verb: pairs differ only in who does what, so
    /// every scene is revisited many times across 65 pairs.
    pub fn structured() -> Self {
        Self::with_words(&["dog", "cat", "mouse"], &["chases"])
    }

    /// Three nouns and two verbs, the smallest vocabulary with a verb contrast.
    pub fn unstructured() -> Self {
        Self::with_words(&["dog", "cat", "mouse"], &["chases", "watches"])
    }

    /// The preset matching `layout`.
    pub fn for_layout(layout: TaskLayout) -> Self {
        match layout {
            TaskLayout::Structured => Self::structured(),
            TaskLayout::Unstructured => Self::unstructured(),
        }
    }
}

impl Default for VocabSpec {
    fn default() -> Self {
        Self::unstructured()
    }
}

/// Seeded basis vectors for every vocabulary word, nouns first.
struct Encoder {
    nouns: Vec<Vec<f64>>,
    verbs: Vec<Vec<f64>>,
    weights: [f64; 3],
}

impl Encoder {
    fn new(spec: &VocabSpec, rng: &mut ChaCha8Rng) -> Self {
        let mut basis = |n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..spec.feature_dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        };
        let nouns = basis(spec.nouns.len());
        let verbs = basis(spec.verbs.len());
        Encoder {
            nouns,
            verbs,
            weights: spec.role_weights,
        }
    }

    /// Image of the scene `subject verb object`.
    fn scene(&self, s: usize, v: usize, o: usize) -> Vec<f64> {
        let [ws, wv, wo] = self.weights;
        (0..self.nouns[s].len())
            .map(|i| ws * self.nouns[s][i] + wv * self.verbs[v][i] + wo * self.nouns[o][i])
            .collect()
    }
}

fn sentence(spec: &VocabSpec, s: usize, v: usize, o: usize) -> String {
    format!("{} {} {}", spec.nouns[s], spec.verbs[v], spec.nouns[o])
}

fn two_distinct(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    (a, b)
}

/// Structured task: every pair yields two samples that share the candidate
/// sentences `s v o` and `o v s` (in a random order); one sample shows the
/// scene `s v o`, the other `o v s`. Labels are therefore exactly balanced.
pub fn synth_structured(n_pairs: usize, spec: &VocabSpec, seed: u64) -> Result<Dataset, DataError> {
    if spec.nouns.len() < 2 || spec.verbs.is_empty() {
        return Err(DataError::Vocabulary(
            "the structured task needs two nouns and a verb".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let enc = Encoder::new(spec, &mut rng);
    let mut samples = Vec::with_capacity(2 * n_pairs);
    for p in 0..n_pairs {
        let (s, o) = two_distinct(&mut rng, spec.nouns.len());
        let v = rng.random_range(0..spec.verbs.len());
        let forward = sentence(spec, s, v, o);
        let backward = sentence(spec, o, v, s);
        let flip = rng.random_bool(0.5);
        let sentences = if flip {
            alloc::vec![backward, forward]
        } else {
            alloc::vec![forward, backward]
        };
        let forward_at = u8::from(flip);
        for (tag, scene, label) in [
            ("a", enc.scene(s, v, o), forward_at),
            ("b", enc.scene(o, v, s), 1 - forward_at),
        ] {
            samples.push(Sample {
                id: format!("s{p:04}{tag}"),
                layout: TaskLayout::Structured,
                sentences: sentences.clone(),
                features: alloc::vec![scene],
                label,
            });
        }
    }
    Dataset::new(
        samples,
        spec.feature_dim,
        format!("synthetic structured, {n_pairs} pairs, seed {seed}"),
    )
}

/// Unstructured task: one sentence `s v o` with the images of `s v o` and of
/// `s v' o` for another verb `v'`. Subjects, verbs and objects cycle through
/// the vocabulary so every word recurs; labels are exactly balanced (up to
/// one for odd `n`).
pub fn synth_unstructured(n: usize, spec: &VocabSpec, seed: u64) -> Result<Dataset, DataError> {
    if spec.nouns.len() < 2 || spec.verbs.len() < 2 {
        return Err(DataError::Vocabulary(
            "the unstructured task needs two nouns and two verbs".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let enc = Encoder::new(spec, &mut rng);
    let mut labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    labels.shuffle(&mut rng);
    let (nn, nv) = (spec.nouns.len(), spec.verbs.len());
    let mut samples = Vec::with_capacity(n);
    for (i, &label) in labels.iter().enumerate() {
        let s = i % nn;
        let o = (s + 1 + rng.random_range(0..nn - 1)) % nn;
        let v = (i / nn) % nv;
        let other = (v + 1 + rng.random_range(0..nv - 1)) % nv;
        let (right, wrong) = (enc.scene(s, v, o), enc.scene(s, other, o));
        let features = if label == 0 {
            alloc::vec![right, wrong]
        } else {
            alloc::vec![wrong, right]
        };
        samples.push(Sample {
            id: format!("u{i:04}"),
            layout: TaskLayout::Unstructured,
            sentences: alloc::vec![sentence(spec, s, v, o)],
            features,
            label,
        });
    }
    Dataset::new(
        samples,
        spec.feature_dim,
        format!("synthetic unstructured, {n} samples, seed {seed}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let samples = (0..n)
            .map(|i| Sample {
                id: format!("x{i}"),
                layout: TaskLayout::Structured,
                sentences: alloc::vec!["a b c".into(), "c b a".into()],
                features: alloc::vec![alloc::vec![i as f64; 2]],
                label: (i % 2) as u8,
            })
            .collect();
        Dataset::new(samples, 2, "toy").unwrap()
    }

    #[test]
    fn split_sizes_floor_with_remainder_to_train() {
        let s = split(&toy(130), SplitRatios::default(), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (92, 19, 19));
        let again = split(&toy(130), SplitRatios::default(), 1).unwrap();
        assert_eq!(s, again);
        let mut ids: Vec<String> = [&s.train, &s.val, &s.test]
            .iter()
            .flat_map(|d| d.samples.iter().map(|x| x.id.clone()))
            .collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 130);
    }

    #[test]
    fn stratified_split_keeps_balance() {
        let s = stratified_split(&toy(130), SplitRatios::default(), 4).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (94, 18, 18));
        assert_eq!(s.val.class_balance(), [9, 9]);
        assert_eq!(s.train.class_balance(), [47, 47]);
    }

    #[test]
    fn empty_parts_are_rejected() {
        let r = SplitRatios {
            train: 1.0,
            val: 0.0,
            test: 0.0,
        };
        assert_eq!(split(&toy(10), r, 0), Err(DataError::EmptySplit("validation")));
        let bad = SplitRatios {
            train: 0.5,
            val: 0.1,
            test: 0.1,
        };
        assert!(matches!(split(&toy(10), bad, 0), Err(DataError::BadRatios(_))));
    }

    #[test]
    fn validation_catches_bad_samples() {
        let mut d = toy(3);
        d.samples[1].features[0].pop();
        assert!(matches!(d.validate(), Err(DataError::DimensionMismatch { .. })));
        let mut d = toy(3);
        d.samples[2].id = "x0".into();
        assert_eq!(d.validate(), Err(DataError::DuplicateId("x0".into())));
        let mut d = toy(3);
        d.samples[0].label = 2;
        assert!(matches!(d.validate(), Err(DataError::Label { .. })));
        let mut d = toy(3);
        d.samples[0].sentences.pop();
        assert!(matches!(d.validate(), Err(DataError::Arity { .. })));
    }

    #[test]
    fn scaler_maps_train_range_onto_angles() {
        let d = toy(5);
        let sc = FeatureScaler::fit(&d.samples, 2);
        assert_eq!(sc.transform(&[0.0, 4.0]), [-PI, PI]);
        assert_eq!(sc.transform(&[2.0, 9.0]), [0.0, PI]);
    }

    #[test]
    fn structured_generator_shape() {
        let d = synth_structured(65, &VocabSpec::default(), 9).unwrap();
        assert_eq!(d.len(), 130);
        assert_eq!(d.class_balance(), [65, 65]);
        for pair in d.samples.chunks(2) {
            assert_eq!(pair[0].sentences, pair[1].sentences);
            assert_ne!(pair[0].features, pair[1].features);
            assert_ne!(pair[0].label, pair[1].label);
        }
        assert_eq!(d, synth_structured(65, &VocabSpec::default(), 9).unwrap());
    }

    #[test]
    fn unstructured_generator_shape() {
        let spec = VocabSpec::default();
        let d = synth_unstructured(350, &spec, 3).unwrap();
        assert_eq!(d.len(), 350);
        assert_eq!(d.class_balance(), [175, 175]);
        for w in spec.nouns.iter().chain(&spec.verbs) {
            let uses = d
                .samples
                .iter()
                .filter(|s| s.sentences[0].split(' ').any(|t| t == w))
                .count();
            assert!(uses >= 3, "{w} used {uses} times");
        }
    }
}
