use mqnlp_core::multimodal::PredictionDistribution;
use mqnlp_core::training::{BatchEvaluator, CompiledSample, EvalError};
use rayon::prelude::*;

/// Evaluates the samples of a batch on the rayon thread pool. Every sample is
/// simulated independently and results are collected in input order, so the
/// outcome is identical to sequential evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Parallel;

impl BatchEvaluator for Parallel {
    fn evaluate(
        &self,
        samples: &[&CompiledSample],
        values: &[f64],
    ) -> Vec<Result<PredictionDistribution, EvalError>> {
        samples.par_iter().map(|s| s.predict(values)).collect()
    }
}
