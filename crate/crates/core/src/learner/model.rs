use rand::Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::FeatureDataset;
use crate::rng::seeded_rng;
use crate::viseme::VisemeInventory;

pub const DEFAULT_INIT_SCALE: f64 = 0.01;

/// Linear-softmax frame classifier: `softmax(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub classes: usize,
    pub dim: usize,
    /// Row-major `classes × dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub inventory_hash: u64,
}

pub fn init_model(inventory: &VisemeInventory, dim: usize, seed: u64) -> ModelParams {
    init_model_scaled(inventory, dim, seed, DEFAULT_INIT_SCALE)
}

/// Weights ~ N(0, scale²), bias zero.
pub fn init_model_scaled(inventory: &VisemeInventory, dim: usize, seed: u64, scale: f64) -> ModelParams {
    let classes = inventory.len();
    let mut rng = seeded_rng(seed);
    let weights = (0..classes * dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    ModelParams {
        classes,
        dim,
        weights,
        bias: vec![0.0; classes],
        inventory_hash: inventory.hash(),
    }
}

impl ModelParams {
    pub fn zeros(inventory: &VisemeInventory, dim: usize) -> ModelParams {
        ModelParams {
            classes: inventory.len(),
            dim,
            weights: vec![0.0; inventory.len() * dim],
            bias: vec![0.0; inventory.len()],
            inventory_hash: inventory.hash(),
        }
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.dim..(class + 1) * self.dim]
    }

    pub fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        for (c, z) in out.iter_mut().enumerate() {
            let row = self.row(c);
            *z = self.bias[c] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// Class probabilities for one frame.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.classes];
        self.logits_into(x, &mut z);
        softmax_in_place(&mut z);
        z
    }

    /// Highest-scoring class; ties go to the lowest index.
    pub fn predict(&self, x: &[f64], scratch: &mut [f64]) -> usize {
        self.logits_into(x, scratch);
        let mut best = 0;
        for c in 1..self.classes {
            if scratch[c] > scratch[best] {
                best = c;
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    /// SHA-256 over the little-endian parameter bytes, hex encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for v in self.weights.iter().chain(&self.bias) {
            hasher.update(v.to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Frames of one or more feature datasets, widened to f64 for training.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub dim: usize,
    pub features: Vec<f64>,
    pub labels: Vec<u32>,
}

impl FrameSet {
    pub fn from_datasets(datasets: &[&FeatureDataset], classes: usize) -> Result<FrameSet> {
        let dim = datasets.first().map_or(0, |d| d.dim);
        let mut set = FrameSet {
            dim,
            features: Vec::new(),
            labels: Vec::new(),
        };
        for ds in datasets {
            if ds.dim != dim {
                return Err(Error::Config(format!(
                    "feature dimensions differ ({} vs {dim})",
                    ds.dim
                )));
            }
            for item in &ds.items {
                set.push_item(&item.labels, &item.frames, classes)?;
            }
        }
        Ok(set)
    }

    pub(crate) fn push_item(&mut self, labels: &[u32], frames: &[f32], classes: usize) -> Result<()> {
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
            return Err(Error::Config(format!(
                "frame label {bad} outside a {classes}-class inventory"
            )));
        }
        self.labels.extend_from_slice(labels);
        self.features.extend(frames.iter().map(|&v| f64::from(v)));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label_counts(&self, classes: usize) -> Vec<u64> {
        let mut counts = vec![0u64; classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Inverse-frequency weights `n / (present * n_c)`; absent classes get 0.
    pub fn balanced_weights(&self, classes: usize) -> Vec<f64> {
        let counts = self.label_counts(classes);
        let present = counts.iter().filter(|&&c| c > 0).count() as f64;
        let n = self.len() as f64;
        counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { n / (present * c as f64) })
            .collect()
    }
}

/// Mean class-weighted cross-entropy over `indices` and its gradient with
/// respect to weights and bias, written into `grad_w`/`grad_b`.
pub fn loss_and_gradient(
    params: &ModelParams,
    frames: &FrameSet,
    indices: &[usize],
    class_weights: &[f64],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
) -> f64 {
    grad_w.fill(0.0);
    grad_b.fill(0.0);
    let mut z = vec![0.0; params.classes];
    let mut loss = 0.0;
    let scale = 1.0 / indices.len() as f64;
    for &i in indices {
        let x = frames.frame(i);
        let y = frames.labels[i] as usize;
        let weight = class_weights[y];
        params.logits_into(x, &mut z);
        softmax_in_place(&mut z);
        loss -= weight * z[y].ln();
        z[y] -= 1.0;
        for (c, &delta) in z.iter().enumerate() {
            let d = delta * weight * scale;
            grad_b[c] += d;
            let row = &mut grad_w[c * params.dim..(c + 1) * params.dim];
            for (g, v) in row.iter_mut().zip(x) {
                *g += d * v;
            }
        }
    }
    loss * scale
}
