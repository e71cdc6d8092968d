//! Synthetic per-frame features standing in for mouth-region video.
//!
//! Each viseme owns a mean vector per language; visually similar visemes
//! have their means pulled together by symmetric confusion weights. A word
//! sample becomes a frame sequence in which every viseme of the word lasts a
//! few frames and each frame is its viseme's mixed mean plus isotropic
//! Gaussian noise, scaled per dimension by a fixed gain.
//!
//! The default generator splits the feature vector in two blocks: a coarse
//! lip-shape block shared by both languages and a low-gain detail block that
//! is partly language specific.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCorpus;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, derived_rng, seeded_rng, STREAM_GENERATOR};
use crate::viseme::{LanguageId, VisemeInventory, VisemeLabel};

/// Pairs of viseme bases whose mouth shapes are easily confused.
pub const SIMILAR_VISEMES: [(&str, &str); 12] = [
    ("p", "f"),
    ("t", "s"),
    ("s", "S"),
    ("S", "J"),
    ("s", "z"),
    ("T", "t"),
    ("a", "@"),
    ("a", "E"),
    ("e", "E"),
    ("o", "O"),
    ("o", "u"),
    ("u", "y"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Size of the coarse block.
    pub dim: usize,
    /// Norm of each viseme's coarse mean.
    pub separation: f64,
    /// Size of the detail block (0 disables it).
    pub detail_dim: usize,
    /// Norm of each viseme's detail mean.
    pub detail_separation: f64,
    /// Gain applied to detail dimensions, mean and noise alike.
    pub detail_gain: f64,
    /// Weight in [0, 1] of the language-specific part of the detail mean.
    pub detail_language_mix: f64,
    pub sigma: f64,
    /// Confusion weight applied to every pair in [`SIMILAR_VISEMES`].
    pub confusion: f64,
    pub frames_min: u32,
    pub frames_max: u32,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            dim: 16,
            separation: 1.0,
            detail_dim: 8,
            detail_separation: 2.5,
            detail_gain: 0.1,
            detail_language_mix: 0.5,
            sigma: 0.3,
            confusion: 0.25,
            frames_min: 2,
            frames_max: 5,
            seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn total_dim(&self) -> usize {
        self.dim + self.detail_dim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusabilityModel {
    labels: Vec<String>,
    /// Means before confusion mixing, per language.
    means: BTreeMap<LanguageId, Vec<Vec<f64>>>,
    sigma: f64,
    /// Symmetric, zero diagonal, entries in [0, 1].
    confusion: Vec<Vec<f64>>,
    frames: (u32, u32),
    gains: Vec<f64>,
    #[serde(skip)]
    mixed: BTreeMap<LanguageId, Vec<Vec<f64>>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl ConfusabilityModel {
    /// Model whose means are identical in both languages, with unit gains.
    pub fn new(
        labels: Vec<String>,
        means: Vec<Vec<f64>>,
        sigma: f64,
        confusion: Vec<Vec<f64>>,
        frames: (u32, u32),
    ) -> Result<ConfusabilityModel> {
        let dim = means.first().map_or(0, Vec::len);
        let per_language = LanguageId::ALL.iter().map(|&l| (l, means.clone())).collect();
        ConfusabilityModel::build(labels, per_language, sigma, confusion, frames, vec![1.0; dim])
    }

    /// Replaces one language's means.
    pub fn with_language_means(mut self, language: LanguageId, means: Vec<Vec<f64>>) -> Result<ConfusabilityModel> {
        self.means.insert(language, means);
        self.rebuild()
    }

    pub fn with_gains(mut self, gains: Vec<f64>) -> Result<ConfusabilityModel> {
        self.gains = gains;
        self.rebuild()
    }

    fn build(
        labels: Vec<String>,
        means: BTreeMap<LanguageId, Vec<Vec<f64>>>,
        sigma: f64,
        confusion: Vec<Vec<f64>>,
        frames: (u32, u32),
        gains: Vec<f64>,
    ) -> Result<ConfusabilityModel> {
        let n = labels.len();
        let dim = gains.len();
        if confusion.len() != n {
            return Err(Error::Config("model tables disagree on viseme count".into()));
        }
        if dim < 2 {
            return Err(Error::Config(format!(
                "feature dimension must be at least 2 (got {dim})"
            )));
        }
        for lang in LanguageId::ALL {
            let table = means
                .get(&lang)
                .ok_or_else(|| Error::Config(format!("no {lang} means")))?;
            if table.len() != n || table.iter().any(|m| m.len() != dim) {
                return Err(Error::Config(format!(
                    "{lang} means must be {n} vectors of dimension {dim}"
                )));
            }
            if table.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{lang} means must be finite")));
            }
        }
        if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::Config("dimension gains must be finite and positive".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("noise scale must be finite and non-negative, got {sigma}")));
        }
        if frames.0 == 0 || frames.0 > frames.1 {
            return Err(Error::Config(format!("bad frames-per-viseme range {frames:?}")));
        }
        for i in 0..n {
            if confusion[i].len() != n || confusion[i][i] != 0.0 {
                return Err(Error::Config("confusion matrix must be square with zero diagonal".into()));
            }
            for j in 0..n {
                let w = confusion[i][j];
                if !(0.0..=1.0).contains(&w) || w != confusion[j][i] {
                    return Err(Error::Config(format!(
                        "confusion weight ({}, {}) must be symmetric and within [0, 1]",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let mixed = means
            .iter()
            .map(|(&lang, table)| (lang, mix(table, &confusion)))
            .collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Ok(ConfusabilityModel {
            labels,
            means,
            sigma,
            confusion,
            frames,
            gains,
            mixed,
            index,
        })
    }

    /// Random means for every label of `inventory` (normally the merged one,
    /// so common visemes share their coarse shape across languages).
    pub fn synthetic(inventory: &VisemeInventory, params: &GeneratorParams) -> Result<ConfusabilityModel> {
        if !(0.0..=1.0).contains(&params.detail_language_mix) {
            return Err(Error::Config("detail_language_mix must lie in [0, 1]".into()));
        }
        let labels = inventory.rendered();
        let n = labels.len();
        let mut rng = seeded_rng(derive_seed(params.seed, &[STREAM_GENERATOR]));
        let coarse: Vec<Vec<f64>> = (0..n)
            .map(|_| random_direction(&mut rng, params.dim, params.separation))
            .collect();
        let shared: Vec<Vec<f64>> = (0..n)
            .map(|_| random_direction(&mut rng, params.detail_dim, 1.0))
            .collect();
        let mut means = BTreeMap::new();
        for lang in LanguageId::ALL {
            let a = params.detail_language_mix;
            let table = (0..n)
                .map(|i| {
                    let own = random_direction(&mut rng, params.detail_dim, 1.0);
                    let detail: Vec<f64> = shared[i].iter().zip(&own).map(|(s, o)| (1.0 - a) * s + a * o).collect();
                    let norm = l2(&detail).max(f64::MIN_POSITIVE);
                    let mut mean = coarse[i].clone();
                    mean.extend(detail.iter().map(|v| v / norm * params.detail_separation));
                    mean
                })
                .collect();
            means.insert(lang, table);
        }
        let bases: Vec<&str> = inventory.labels().iter().map(|l| l.base.as_str()).collect();
        let confusion = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let similar = SIMILAR_VISEMES.iter().any(|&(a, b)| {
                            (bases[i] == a && bases[j] == b) || (bases[i] == b && bases[j] == a)
                        });
                        if i != j && similar {
                            params.confusion
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let mut gains = vec![1.0; params.dim];
        gains.resize(params.total_dim(), params.detail_gain);
        ConfusabilityModel::build(
            labels,
            means,
            params.sigma,
            confusion,
            (params.frames_min, params.frames_max),
            gains,
        )
    }

    pub fn dim(&self) -> usize {
        self.gains.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Mean after confusion mixing, before gains.
    pub fn mixed_mean(&self, label: &str, language: LanguageId) -> Option<&[f64]> {
        let i = *self.index.get(label)?;
        self.mixed.get(&language).map(|t| t[i].as_slice())
    }

    /// Rebuilds derived tables (also needed after deserialization).
    pub fn rebuild(self) -> Result<ConfusabilityModel> {
        ConfusabilityModel::build(self.labels, self.means, self.sigma, self.confusion, self.frames, self.gains)
    }
}

fn mix(means: &[Vec<f64>], confusion: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = means.len();
    (0..n)
        .map(|i| {
            let norm = 1.0 + confusion[i].iter().sum::<f64>();
            (0..means[i].len())
                .map(|k| {
                    let pulled: f64 = (0..n).map(|j| confusion[i][j] * means[j][k]).sum();
                    (means[i][k] + pulled) / norm
                })
                .collect()
        })
        .collect()
}

fn random_direction(rng: &mut impl Rng, dim: usize, norm: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let len = l2(&raw).max(f64::MIN_POSITIVE);
    raw.iter().map(|v| v / len * norm).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureItem {
    /// Inventory index of each frame.
    pub labels: Vec<u32>,
    /// Row-major `labels.len() × dim`.
    pub frames: Vec<f32>,
}

impl FeatureItem {
    pub fn frame_count(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub dim: usize,
    pub inventory_hash: u64,
    pub seed: u64,
    pub items: Vec<FeatureItem>,
}

pub const FEATURE_MAGIC: &[u8; 4] = b"PPFD";
pub const FEATURE_VERSION: u32 = 1;

impl FeatureDataset {
    pub fn frame_count(&self) -> usize {
        self.items.iter().map(FeatureItem::frame_count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Binary container: `PPFD`, version, dim, inventory hash, seed, item
    /// count, then per item its frame count, label indices and frames, all
    /// little-endian.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        out.write_all(FEATURE_MAGIC)?;
        out.write_all(&FEATURE_VERSION.to_le_bytes())?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&self.inventory_hash.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&(self.items.len() as u64).to_le_bytes())?;
        for item in &self.items {
            out.write_all(&(item.labels.len() as u32).to_le_bytes())?;
            for label in &item.labels {
                out.write_all(&label.to_le_bytes())?;
            }
            for value in &item.frames {
                out.write_all(&value.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<FeatureDataset> {
        let bad = |message: &str| Error::Format {
            what: "feature dataset",
            message: message.to_string(),
        };
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != FEATURE_MAGIC {
            return Err(bad("missing PPFD magic"));
        }
        let version = read_u32(&mut input)?;
        if version != FEATURE_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let dim = read_u32(&mut input)? as usize;
        let inventory_hash = read_u64(&mut input)?;
        let seed = read_u64(&mut input)?;
        let count = read_u64(&mut input)?;
        let mut items = Vec::new();
        for _ in 0..count {
            let frames = read_u32(&mut input)? as usize;
            let labels = (0..frames)
                .map(|_| read_u32(&mut input))
                .collect::<Result<Vec<_>>>()?;
            let values = (0..frames * dim)
                .map(|_| {
                    let mut buf = [0u8; 4];
                    input.read_exact(&mut buf)?;
                    Ok(f32::from_le_bytes(buf))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite feature value"));
            }
            items.push(FeatureItem {
                labels,
                frames: values,
            });
        }
        Ok(FeatureDataset {
            dim,
            inventory_hash,
            seed,
            items,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::with_capacity(32 + self.frame_count() * (4 + 4 * self.dim));
        self.write_to(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FeatureDataset> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        FeatureDataset::read_from(bytes.as_slice())
    }
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(input: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// One item per selected word sample. The stream for a sample is derived
/// from `(seed, word index, sample id)`, so a sample's frames are identical
/// in every split that keeps it.
pub fn generate_features(
    corpus: &LabeledCorpus,
    model: &ConfusabilityModel,
    inventory: &VisemeInventory,
    seed: u64,
) -> Result<FeatureDataset> {
    let dim = model.dim();
    let mut resolved: HashMap<&VisemeLabel, (u32, &[f64])> = HashMap::new();
    for entry in &corpus.entries {
        for label in &entry.visemes {
            if resolved.contains_key(label) {
                continue;
            }
            let rendered = label.rendered();
            let idx = inventory.index_of(&rendered).ok_or_else(|| {
                Error::Config(format!("viseme `{rendered}` is not in the target inventory"))
            })?;
            let mean = model.mixed_mean(&rendered, corpus.language).ok_or_else(|| {
                Error::Config(format!("viseme `{rendered}` has no mean in the confusability model"))
            })?;
            resolved.insert(label, (idx as u32, mean));
        }
    }

    let (lo, hi) = model.frames;
    let gains = &model.gains;
    let mut items = Vec::with_capacity(corpus.total_samples() as usize);
    for (word_idx, entry) in corpus.entries.iter().enumerate() {
        for &sample_id in &entry.sample_ids {
            let mut rng = derived_rng(seed, &[word_idx as u64, u64::from(sample_id)]);
            let mut labels = Vec::new();
            let mut frames = Vec::new();
            for label in &entry.visemes {
                let (idx, mean) = resolved[label];
                let k = rng.random_range(lo..=hi);
                for _ in 0..k {
                    labels.push(idx);
                    for (&m, &g) in mean.iter().zip(gains) {
                        let noise: f64 = rng.sample(StandardNormal);
                        frames.push((g * (m + model.sigma * noise)) as f32);
                    }
                }
            }
            debug_assert_eq!(frames.len(), labels.len() * dim);
            items.push(FeatureItem { labels, frames });
        }
    }
    Ok(FeatureDataset {
        dim,
        inventory_hash: inventory.hash(),
        seed,
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusEntry;
    use crate::viseme::{LanguageId, Phoneme, Scope};

    fn labels(names: &[&str]) -> Vec<VisemeLabel> {
        names.iter().map(|n| VisemeLabel::parse_rendered(n).unwrap()).collect()
    }

    fn toy() -> (LabeledCorpus, VisemeInventory) {
        let inventory = VisemeInventory::from_labels(Scope::Merged, labels(&["a", "p", "t"]));
        let corpus = LabeledCorpus {
            language: LanguageId::English,
            entries: vec![
                CorpusEntry {
                    word: "PAT".into(),
                    phonemes: vec![Phoneme::new("p").unwrap()],
                    visemes: labels(&["p", "a", "t"]),
                    sample_ids: (0..5).collect(),
                },
                CorpusEntry {
                    word: "TAP".into(),
                    phonemes: vec![Phoneme::new("t").unwrap()],
                    visemes: labels(&["t", "a", "p", "p"]),
                    sample_ids: (0..3).collect(),
                },
            ],
        };
        (corpus, inventory)
    }

    fn plain_model(inventory: &VisemeInventory, sigma: f64) -> ConfusabilityModel {
        let n = inventory.len();
        let means = (0..n)
            .map(|i| (0..4).map(|k| if k == i { 3.0 } else { 0.0 }).collect())
            .collect();
        ConfusabilityModel::new(inventory.rendered(), means, sigma, vec![vec![0.0; n]; n], (2, 5))
            .unwrap()
    }

    #[test]
    fn noise_free_frames_equal_means() {
        let (corpus, inventory) = toy();
        let model = plain_model(&inventory, 0.0);
        let ds = generate_features(&corpus, &model, &inventory, 11).unwrap();
        assert_eq!(ds.items.len(), 8);
        for item in &ds.items {
            for (f, &label) in item.labels.iter().enumerate() {
                let mean = model
                    .mixed_mean(&inventory.labels()[label as usize].rendered(), LanguageId::English)
                    .unwrap();
                let frame = &item.frames[f * 4..(f + 1) * 4];
                let expected: Vec<f32> = mean.iter().map(|&m| m as f32).collect();
                assert_eq!(frame, expected.as_slice());
            }
        }
    }

    #[test]
    fn nearest_mean_separates_low_noise_frames() {
        let (corpus, inventory) = toy();
        let model = plain_model(&inventory, 0.3);
        let ds = generate_features(&corpus, &model, &inventory, 5).unwrap();
        let means: Vec<&[f64]> = inventory
            .rendered()
            .iter()
            .map(|l| model.mixed_mean(l, LanguageId::English).unwrap())
            .collect();
        let (mut hit, mut total) = (0, 0);
        for item in &ds.items {
            for (f, &label) in item.labels.iter().enumerate() {
                let frame = &item.frames[f * 4..(f + 1) * 4];
                let dist = |m: &[f64]| m.iter().zip(frame).map(|(a, &b)| (a - f64::from(b)).powi(2)).sum::<f64>();
                let best = (0..means.len()).min_by(|&a, &b| dist(means[a]).total_cmp(&dist(means[b]))).unwrap();
                hit += usize::from(best == label as usize);
                total += 1;
            }
        }
        assert!(hit as f64 / total as f64 > 0.99, "{hit}/{total}");
    }

    #[test]
    fn frames_per_viseme_within_range() {
        let (corpus, inventory) = toy();
        let ds = generate_features(&corpus, &plain_model(&inventory, 1.0), &inventory, 2).unwrap();
        for item in &ds.items {
            let mut runs = Vec::new();
            let mut prev = None;
            for &l in &item.labels {
                if Some(l) == prev {
                    *runs.last_mut().unwrap() += 1;
                } else {
                    runs.push(1);
                }
                prev = Some(l);
            }
            // adjacent repeated visemes merge into one run of up to 10 frames
            assert!(runs.iter().all(|&r| (2..=10).contains(&r)), "{runs:?}");
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let (corpus, inventory) = toy();
        let model = plain_model(&inventory, 0.7);
        let a = generate_features(&corpus, &model, &inventory, 5).unwrap();
        let b = generate_features(&corpus, &model, &inventory, 5).unwrap();
        assert_eq!(a, b);
        let c = generate_features(&corpus, &model, &inventory, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn missing_viseme_is_config_error() {
        let (corpus, inventory) = toy();
        let small = VisemeInventory::from_labels(Scope::Merged, labels(&["a", "p"]));
        let model = plain_model(&small, 0.1);
        assert!(matches!(
            generate_features(&corpus, &model, &inventory, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn confusion_pulls_means_together() {
        let inventory = VisemeInventory::from_labels(Scope::Merged, labels(&["a", "p"]));
        let means = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let confusion = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let model =
            ConfusabilityModel::new(inventory.rendered(), means, 0.1, confusion, (1, 1)).unwrap();
        for lang in LanguageId::ALL {
            assert_eq!(model.mixed_mean("a", lang).unwrap(), &[0.5, 0.5]);
            assert_eq!(model.mixed_mean("p", lang).unwrap(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn rejects_asymmetric_confusion() {
        let means = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let confusion = vec![vec![0.0, 0.5], vec![0.2, 0.0]];
        assert!(ConfusabilityModel::new(vec!["a".into(), "p".into()], means, 0.1, confusion, (1, 2)).is_err());
    }

    #[test]
    fn gains_scale_mean_and_noise() {
        let (corpus, inventory) = toy();
        let model = plain_model(&inventory, 0.0).with_gains(vec![1.0, 0.5, 0.5, 2.0]).unwrap();
        let ds = generate_features(&corpus, &model, &inventory, 1).unwrap();
        let item = &ds.items[0];
        // first frame of PAT is viseme p, index 1 in [a, p, t]
        assert_eq!(&item.frames[..4], &[0.0, 1.5, 0.0, 0.0]);
        assert!(model.clone().with_gains(vec![1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn language_means_are_used_per_corpus() {
        let (mut corpus, inventory) = toy();
        let shifted: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64, 1.0, 1.0, 1.0]).collect();
        let model = plain_model(&inventory, 0.0)
            .with_language_means(LanguageId::Mandarin, shifted)
            .unwrap();
        corpus.language = LanguageId::Mandarin;
        let ds = generate_features(&corpus, &model, &inventory, 1).unwrap();
        assert_eq!(&ds.items[0].frames[..4], &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn synthetic_model_shares_coarse_block() {
        let inventory = VisemeInventory::from_labels(Scope::Merged, labels(&["a", "p", "t", "J_M"]));
        let params = GeneratorParams {
            confusion: 0.0,
            ..GeneratorParams::default()
        };
        let model = ConfusabilityModel::synthetic(&inventory, &params).unwrap();
        assert_eq!(model.dim(), 24);
        let en = model.mixed_mean("a", LanguageId::English).unwrap();
        let cmn = model.mixed_mean("a", LanguageId::Mandarin).unwrap();
        assert_eq!(en[..16], cmn[..16]);
        assert_ne!(en[16..], cmn[16..]);
        let detail_norm = en[16..].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((detail_norm - 2.5).abs() < 1e-12);
        assert_eq!(model.gains()[20], 0.1);
        assert_eq!(model, ConfusabilityModel::synthetic(&inventory, &params).unwrap());
    }

    #[test]
    fn binary_container_round_trips() {
        let (corpus, inventory) = toy();
        let ds = generate_features(&corpus, &plain_model(&inventory, 0.3), &inventory, 9).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"PPFD");
        assert_eq!(FeatureDataset::read_from(buf.as_slice()).unwrap(), ds);
        buf[0] = b'X';
        assert!(FeatureDataset::read_from(buf.as_slice()).is_err());
    }
}
