use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::analyzer::DetectionParams;
use crate::error::{Error, Result};
use crate::features::FeatureDataset;
use crate::rng::{derived_rng, STREAM_SHUFFLE};

use super::model::{loss_and_gradient, FrameSet, ModelParams, DEFAULT_INIT_SCALE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Peak step size.
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Epoch cap; for sequential runs, per phase.
    pub max_epochs: u32,
    pub seed: u64,
    pub convergence_epsilon: f64,
    pub convergence_patience: u32,
    /// SGD steps until the peak step size (0 = constant schedule).
    pub warmup_steps: u64,
    /// Steps per e-fold of the exponential warmup.
    pub warmup_scale: f64,
    /// After warmup the step size decays as `(warmup_steps / step)^decay_power`.
    pub decay_power: f64,
    /// Weight each frame's loss by inverse class frequency.
    pub class_balanced: bool,
    pub init_scale: f64,
    /// Held-out samples generated per word for evaluation.
    pub test_samples_per_word: u32,
    /// Online detector used by the sequential switch.
    pub detection: DetectionParams,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.1,
            batch_size: 32,
            max_epochs: 40,
            seed: 0,
            convergence_epsilon: 0.002,
            convergence_patience: 3,
            warmup_steps: 7000,
            warmup_scale: 200.0,
            decay_power: 1.0,
            class_balanced: true,
            init_scale: DEFAULT_INIT_SCALE,
            test_samples_per_word: 2,
            detection: DetectionParams::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be at least 1");
        }
        if !(self.convergence_epsilon > 0.0 && self.convergence_epsilon.is_finite()) {
            return fail("convergence_epsilon must be finite and positive");
        }
        if self.convergence_patience == 0 {
            return fail("convergence_patience must be at least 1");
        }
        if self.warmup_steps > 0 && !(self.warmup_scale > 0.0 && self.warmup_scale.is_finite()) {
            return fail("warmup_scale must be positive when warmup_steps > 0");
        }
        if !(self.decay_power >= 0.0 && self.decay_power.is_finite()) {
            return fail("decay_power must be finite and non-negative");
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return fail("init_scale must be finite and non-negative");
        }
        if self.test_samples_per_word == 0 {
            return fail("test_samples_per_word must be at least 1");
        }
        self.detection.validate()
    }

    /// Step size for the `step`-th update (1-based).
    pub fn learning_rate_at(&self, step: u64) -> f64 {
        let k = self.warmup_steps;
        if k == 0 {
            self.learning_rate
        } else if step < k {
            self.learning_rate * (-((k - step) as f64) / self.warmup_scale).exp()
        } else {
            self.learning_rate * (k as f64 / step as f64).powf(self.decay_power)
        }
    }
}

/// Optimizer state carried across epochs (and phases).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SgdState {
    pub steps: u64,
}

/// One pass over `data` in a shuffle order seeded by `(config.seed,
/// epoch_index)`, one SGD step per mini-batch.
pub fn train_epoch(
    params: &ModelParams,
    data: &FrameSet,
    config: &TrainingConfig,
    epoch_index: u32,
    state: &mut SgdState,
) -> Result<ModelParams> {
    if data.dim != params.dim {
        return Err(Error::Config(format!(
            "features have dimension {}, model expects {}",
            data.dim, params.dim
        )));
    }
    if let Some(&bad) = data.labels.iter().find(|&&l| l as usize >= params.classes) {
        return Err(Error::Config(format!(
            "label {bad} does not fit a {}-class model",
            params.classes
        )));
    }
    let mut out = params.clone();
    if data.is_empty() {
        return Ok(out);
    }
    let weights = if config.class_balanced {
        data.balanced_weights(params.classes)
    } else {
        vec![1.0; params.classes]
    };
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut derived_rng(config.seed, &[STREAM_SHUFFLE, u64::from(epoch_index)]));

    let mut grad_w = vec![0.0; out.weights.len()];
    let mut grad_b = vec![0.0; out.bias.len()];
    for batch in order.chunks(config.batch_size) {
        let loss = loss_and_gradient(&out, data, batch, &weights, &mut grad_w, &mut grad_b);
        if !loss.is_finite() {
            return Err(Error::NumericFailure {
                epoch: epoch_index,
                message: format!("loss became {loss} after {} steps", state.steps),
            });
        }
        state.steps += 1;
        let lr = config.learning_rate_at(state.steps);
        for (w, g) in out.weights.iter_mut().zip(&grad_w) {
            *w -= lr * g;
        }
        for (b, g) in out.bias.iter_mut().zip(&grad_b) {
            *b -= lr * g;
        }
    }
    if !out.is_finite() {
        return Err(Error::NumericFailure {
            epoch: epoch_index,
            message: "parameters became non-finite".into(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerVisemeAccuracy {
    pub correct: Vec<u64>,
    pub total: Vec<u64>,
}

impl PerVisemeAccuracy {
    /// `None` when the viseme has no test frames.
    pub fn accuracy(&self, idx: usize) -> Option<f64> {
        (self.total[idx] > 0).then(|| self.correct[idx] as f64 / self.total[idx] as f64)
    }

    pub fn accuracies(&self) -> Vec<Option<f64>> {
        (0..self.total.len()).map(|i| self.accuracy(i)).collect()
    }

    pub fn overall(&self) -> f64 {
        let total: u64 = self.total.iter().sum();
        if total == 0 {
            return 0.0;
        }
        self.correct.iter().sum::<u64>() as f64 / total as f64
    }
}

pub fn evaluate(params: &ModelParams, test: &FeatureDataset) -> Result<PerVisemeAccuracy> {
    if test.inventory_hash != params.inventory_hash {
        return Err(Error::Incompatible {
            expected: format!("{:016x}", params.inventory_hash),
            found: format!("{:016x}", test.inventory_hash),
        });
    }
    evaluate_frames(params, &FrameSet::from_datasets(&[test], params.classes)?)
}

/// Frame-level argmax accuracy, counted per true label.
pub fn evaluate_frames(params: &ModelParams, test: &FrameSet) -> Result<PerVisemeAccuracy> {
    if test.is_empty() {
        return Err(Error::EmptyInput("test set has no frames".into()));
    }
    if test.dim != params.dim {
        return Err(Error::Config(format!(
            "test features have dimension {}, model expects {}",
            test.dim, params.dim
        )));
    }
    let mut acc = PerVisemeAccuracy {
        correct: vec![0; params.classes],
        total: vec![0; params.classes],
    };
    let mut scratch = vec![0.0; params.classes];
    for i in 0..test.len() {
        let y = test.labels[i] as usize;
        if y >= params.classes {
            return Err(Error::Config(format!("test label {y} outside the model inventory")));
        }
        acc.total[y] += 1;
        if params.predict(test.frame(i), &mut scratch) == y {
            acc.correct[y] += 1;
        }
    }
    Ok(acc)
}
