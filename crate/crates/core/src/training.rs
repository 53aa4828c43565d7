//! SPSA training of the trainable circuit parameters against binary
//! cross-entropy.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{compile, AnsatzConfig, CircuitError, CircuitIR, ParamError, ParamStore};
use crate::data::{split, stratified_split, DataError, Dataset, FeatureScaler, Sample, SplitRatios};
use crate::math;
use crate::multimodal::{build_instance, ImageFeatures, MultimodalError, PredictionDistribution};
use crate::readers::{read_text, Lexicon, ReadError, ReaderKind, ReaderOptions};
use crate::sim::{self, SimError};

/// Probabilities are clipped to `[CLIP, 1 − CLIP]` before taking logs.
pub const CLIP: f64 = 1e-9;

/// `|p_first − p_second|` at or below this counts as a tie, which predicts
/// the first candidate.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Binary cross-entropy; label 1 means the second candidate is correct.
pub fn bce(pred: &PredictionDistribution, label: u8) -> f64 {
    let p = if label == 1 { pred.p_second } else { pred.p_first };
    -math::ln(p.clamp(CLIP, 1.0 - CLIP))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    /// Learning-rate scale.
    pub a: f64,
    /// Perturbation scale.
    pub c: f64,
    /// Stability offset `A`.
    #[serde(rename = "A")]
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl SpsaConfig {
    /// Standard gains with `A = 0.001 × epochs`.
    pub fn for_epochs(epochs: usize, seed: u64) -> Self {
        SpsaConfig {
            a: 0.02,
            c: 0.06,
            big_a: 0.001 * epochs as f64,
            alpha: 0.602,
            gamma: 0.101,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), TrainError> {
        let ok = self.a > 0.0
            && self.c > 0.0
            && self.big_a >= 0.0
            && self.alpha > 0.0
            && self.alpha <= 1.0
            && self.gamma > 0.0
            && self.gamma <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(TrainError::Config(format!("invalid SPSA settings {self:?}")))
        }
    }
}

/// `(a_k, c_k) = (a / (A + k + 1)^α, c / (k + 1)^γ)`.
pub fn spsa_gains(k: usize, cfg: &SpsaConfig) -> (f64, f64) {
    let k = k as f64;
    (
        cfg.a / math::powf(cfg.big_a + k + 1.0, cfg.alpha),
        cfg.c / math::powf(k + 1.0, cfg.gamma),
    )
}

/// Losses seen by one SPSA step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub loss_plus: f64,
    pub loss_minus: f64,
}

/// One SPSA update. A Rademacher vector is drawn over the trainable symbols
/// (in store order), the loss is probed at `θ ± c_k·Δ`, and each trainable
/// coordinate moves by `−a_k·ĝ_i`. Fixed symbols are never touched; with no
/// trainable symbols the store is returned unchanged without probing.
pub fn spsa_step<E>(
    params: &ParamStore,
    mut loss: impl FnMut(&ParamStore) -> Result<f64, E>,
    k: usize,
    cfg: &SpsaConfig,
    rng: &mut impl Rng,
) -> Result<(ParamStore, Option<StepInfo>), E> {
    let trainable = params.trainable_indices();
    if trainable.is_empty() {
        return Ok((params.clone(), None));
    }
    let (ak, ck) = spsa_gains(k, cfg);
    let mut delta = alloc::vec![0.0; params.len()];
    for &i in &trainable {
        delta[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }
    let plus = params.with_trainable(|i, v| v + ck * delta[i]);
    let minus = params.with_trainable(|i, v| v - ck * delta[i]);
    let (lp, lm) = (loss(&plus)?, loss(&minus)?);
    let diff = (lp - lm) / (2.0 * ck);
    let next = params.with_trainable(|i, v| v - ak * diff / delta[i]);
    Ok((
        next,
        Some(StepInfo {
            loss_plus: lp,
            loss_minus: lm,
        }),
    ))
}

/// A sample compiled to a circuit, with every circuit symbol resolved to a
/// slot of the parameter store.
#[derive(Clone, Debug)]
pub struct CompiledSample {
    pub id: String,
    pub label: u8,
    pub circuit: CircuitIR,
    slots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("sample `{id}`: {source}")]
    Circuit { id: String, source: CircuitError },
    #[error("sample `{id}`: {source}")]
    Sim { id: String, source: SimError },
}

impl CompiledSample {
    /// Prediction under the store `values` (aligned with the store used to
    /// compile this sample).
    pub fn predict(&self, values: &[f64]) -> Result<PredictionDistribution, EvalError> {
        let bound_values: Vec<f64> = self.slots.iter().map(|&i| values[i]).collect();
        let bound = self
            .circuit
            .bind_values(&bound_values)
            .map_err(|source| EvalError::Circuit {
                id: self.id.clone(),
                source,
            })?;
        sim::evaluate(&bound)
            .map(|o| o.distribution)
            .map_err(|source| EvalError::Sim {
                id: self.id.clone(),
                source,
            })
    }
}

/// Evaluates a batch of samples under one set of parameter values. Results
/// come back in input order, whatever the execution strategy.
pub trait BatchEvaluator: Sync {
    fn evaluate(
        &self,
        samples: &[&CompiledSample],
        values: &[f64],
    ) -> Vec<Result<PredictionDistribution, EvalError>>;
}

/// Evaluates one sample after another.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl BatchEvaluator for Sequential {
    fn evaluate(
        &self,
        samples: &[&CompiledSample],
        values: &[f64],
    ) -> Vec<Result<PredictionDistribution, EvalError>> {
        samples.iter().map(|s| s.predict(values)).collect()
    }
}

/// Mean loss and accuracy over `samples`, summed in input order.
pub fn loss_and_accuracy(
    eval: &dyn BatchEvaluator,
    samples: &[&CompiledSample],
    values: &[f64],
) -> Result<(f64, f64), EvalError> {
    let preds = eval.evaluate(samples, values);
    let (mut loss, mut correct) = (0.0, 0usize);
    for (s, p) in samples.iter().zip(preds) {
        let p = p?;
        loss += bce(&p, s.label);
        correct += usize::from(p.predicted(TIE_TOLERANCE) == s.label);
    }
    let n = samples.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Fraction of samples whose predicted candidate matches the label.
pub fn accuracy(
    eval: &dyn BatchEvaluator,
    params: &ParamStore,
    samples: &[&CompiledSample],
) -> Result<f64, EvalError> {
    loss_and_accuracy(eval, samples, params.values()).map(|(_, acc)| acc)
}

/// How sentences become diagrams and diagrams become circuits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub reader: ReaderKind,
    #[serde(default)]
    pub reader_options: ReaderOptions,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    /// Build the comparison box with mirrored candidate wiring.
    #[serde(default = "yes")]
    pub mirrored: bool,
}

fn yes() -> bool {
    true
}

impl ModelConfig {
    pub fn new(reader: ReaderKind) -> Self {
        ModelConfig {
            reader,
            reader_options: ReaderOptions::default(),
            ansatz: AnsatzConfig::default(),
            mirrored: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub split: SplitRatios,
    /// Record history every this many epochs (the last epoch is always
    /// recorded).
    #[serde(default = "one")]
    pub eval_every: usize,
    /// Keep the label balance in every split.
    #[serde(default = "yes")]
    pub stratify: bool,
}

fn one() -> usize {
    1
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize) -> Self {
        TrainConfig {
            epochs,
            batch_size,
            split: SplitRatios::default(),
            eval_every: 1,
            stratify: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("sample `{id}`: {source}")]
    Read { id: String, source: ReadError },
    #[error("sample `{id}`: {source}")]
    Instance { id: String, source: MultimodalError },
    #[error("sample `{id}`: {source}")]
    Compile { id: String, source: CircuitError },
    #[error("sample `{id}`: {source}")]
    Params { id: String, source: ParamError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("bad training configuration: {0}")]
    Config(String),
}

/// One evaluated epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub records: Vec<EpochRecord>,
    pub test_acc: f64,
}

/// Everything a finished training run produces.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub history: History,
    pub params: ParamStore,
    pub scaler: FeatureScaler,
    /// Sizes of the train, validation and test splits.
    pub split_sizes: [usize; 3],
}

/// Compiles `samples` (features already scaled) and registers their symbols
/// in `store`, drawing new trainable values from `init`.
pub fn compile_samples(
    model: &ModelConfig,
    lexicon: &Lexicon,
    samples: &[Sample],
    store: &mut ParamStore,
    mut init: impl FnMut() -> f64,
) -> Result<Vec<CompiledSample>, TrainError> {
    samples
        .iter()
        .map(|s| {
            let id = || s.id.clone();
            let sentences = s
                .sentences
                .iter()
                .map(|t| read_text(model.reader, t, lexicon, model.reader_options))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| TrainError::Read { id: id(), source })?;
            let images = s
                .features
                .iter()
                .enumerate()
                .map(|(k, f)| ImageFeatures::new(format!("{}_img{k}", s.id), f.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| TrainError::Instance { id: id(), source })?;
            let d = build_instance(s.layout, &sentences, &images, &model.ansatz, model.mirrored)
                .map_err(|source| TrainError::Instance { id: id(), source })?;
            let circuit =
                compile(&d, &model.ansatz).map_err(|source| TrainError::Compile { id: id(), source })?;
            store
                .absorb(&circuit, &mut init)
                .map_err(|source| TrainError::Params { id: id(), source })?;
            let slots = circuit
                .symbols
                .iter()
                .map(|sym| store.index_of(&sym.name).expect("absorbed above"))
                .collect();
            Ok(CompiledSample {
                id: id(),
                label: s.label,
                circuit,
                slots,
            })
        })
        .collect()
}

fn scaled(samples: &[Sample], scaler: &FeatureScaler) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| Sample {
            features: s.features.iter().map(|f| scaler.transform(f)).collect(),
            ..s.clone()
        })
        .collect()
}

/// Random-number streams derived from one seed.
const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_SPSA: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Trains a model on `data`.
///
/// The data is split (seeded by `spsa.seed`), features are min–max scaled
/// with training-split statistics, trainable symbols start uniformly in
/// `[−π, π]`, and every epoch runs one SPSA step per shuffled mini-batch
/// (batch loss = mean BCE). History records training loss and accuracy and
/// validation accuracy; test accuracy is measured once at the end.
pub fn train(
    model: &ModelConfig,
    lexicon: &Lexicon,
    data: &Dataset,
    spsa: &SpsaConfig,
    tc: &TrainConfig,
    eval: &dyn BatchEvaluator,
) -> Result<TrainOutcome, TrainError> {
    spsa.check()?;
    model
        .ansatz
        .check()
        .map_err(|e| TrainError::Config(format!("{e}")))?;
    if tc.epochs == 0 || tc.batch_size == 0 || tc.eval_every == 0 {
        return Err(TrainError::Config(
            "epochs, batch size and eval_every must be positive".into(),
        ));
    }
    let splits = if tc.stratify {
        stratified_split(data, tc.split, spsa.seed)?
    } else {
        split(data, tc.split, spsa.seed)?
    };
    if tc.batch_size > splits.train.len() {
        return Err(TrainError::Config(format!(
            "batch size {} exceeds the {} training samples",
            tc.batch_size,
            splits.train.len()
        )));
    }
    let scaler = FeatureScaler::fit(&splits.train.samples, data.feature_dim);

    let mut init_rng = stream(spsa.seed, STREAM_INIT);
    let mut init = || init_rng.random_range(-PI..PI);
    let mut params = ParamStore::new();
    let train_set = compile_samples(model, lexicon, &scaled(&splits.train.samples, &scaler), &mut params, &mut init)?;
    let val_set = compile_samples(model, lexicon, &scaled(&splits.val.samples, &scaler), &mut params, &mut init)?;
    let test_set = compile_samples(model, lexicon, &scaled(&splits.test.samples, &scaler), &mut params, &mut init)?;
    let train_refs: Vec<&CompiledSample> = train_set.iter().collect();
    let val_refs: Vec<&CompiledSample> = val_set.iter().collect();
    let test_refs: Vec<&CompiledSample> = test_set.iter().collect();

    let mut shuffle_rng = stream(spsa.seed, STREAM_SHUFFLE);
    let mut spsa_rng = stream(spsa.seed, STREAM_SPSA);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut records = Vec::new();
    let mut k = 0;
    for epoch in 1..=tc.epochs {
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut shuffle_rng);
        for chunk in order.chunks(tc.batch_size) {
            let batch: Vec<&CompiledSample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let loss = |p: &ParamStore| loss_and_accuracy(eval, &batch, p.values()).map(|(l, _)| l);
            let (next, _) = spsa_step(&params, loss, k, spsa, &mut spsa_rng)?;
            params = next;
            k += 1;
        }
        if epoch % tc.eval_every == 0 || epoch == tc.epochs {
            let (train_loss, train_acc) = loss_and_accuracy(eval, &train_refs, params.values())?;
            let (_, val_acc) = loss_and_accuracy(eval, &val_refs, params.values())?;
            records.push(EpochRecord {
                epoch,
                train_loss,
                train_acc,
                val_acc,
            });
        }
    }
    let (_, test_acc) = loss_and_accuracy(eval, &test_refs, params.values())?;
    Ok(TrainOutcome {
        history: History { records, test_acc },
        params,
        scaler,
        split_sizes: [train_set.len(), val_set.len(), test_set.len()],
    })
}
