use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{Model, TokenIds, DEFAULT_CAPACITY};
use crate::dataset::{Dataset, Label};
use crate::error::{ModelError, NormalizeError};
use crate::normalize::{Vocab, VocabKind, PAD_INDEX, SPECIALS};
use crate::rdf::vocab::RESERVED;
use crate::seed::{derive_seed, rng};
use crate::tensor::{adam_step, clip_global_norm, AdamState};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub d: usize,
    pub k: usize,
    pub capacity: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    /// First epoch (1-based) trained at half the learning rate.
    pub lr_decay_epoch: Option<usize>,
    /// Epochs at the start trained without attention softmax.
    pub linear_start_epochs: usize,
    pub clip: f64,
    pub sigma: f64,
    pub seed: u64,
    pub pe: bool,
    /// Redraw every KG's generic-token assignment at each epoch.
    pub remap_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            d: 20,
            k: 10,
            capacity: DEFAULT_CAPACITY,
            batch_size: 100,
            epochs: 10,
            lr: 0.005,
            lr_decay_epoch: Some(6),
            linear_start_epochs: 1,
            clip: 40.0,
            sigma: 0.1,
            seed: 0,
            pe: true,
            remap_each_epoch: false,
        }
    }
}

impl TrainConfig {
    pub fn lr_at(&self, epoch: usize) -> f64 {
        match self.lr_decay_epoch {
            Some(e) if epoch >= e => self.lr / 2.0,
            _ => self.lr,
        }
    }

    pub fn to_meta(&self) -> BTreeMap<String, String> {
        let decay = self.lr_decay_epoch.map_or("none".to_string(), |e| e.to_string());
        [
            ("d", self.d.to_string()),
            ("k", self.k.to_string()),
            ("capacity", self.capacity.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("epochs", self.epochs.to_string()),
            ("lr", self.lr.to_string()),
            ("lr_decay_epoch", decay),
            ("linear_start_epochs", self.linear_start_epochs.to_string()),
            ("clip", self.clip.to_string()),
            ("sigma", self.sigma.to_string()),
            ("seed", self.seed.to_string()),
            ("pe", self.pe.to_string()),
            ("remap_each_epoch", self.remap_each_epoch.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodedSample {
    pub query: TokenIds,
    pub label: Label,
    pub hop: Option<u32>,
}

/// A KG with token indices in place of token strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedKg {
    pub kg_id: String,
    pub memory: Vec<TokenIds>,
    pub samples: Vec<EncodedSample>,
}

pub fn encode_dataset(ds: &Dataset, vocab: &Vocab) -> Result<Vec<EncodedKg>, ModelError> {
    ds.kgs
        .iter()
        .map(|kg| {
            let memory = kg
                .memory
                .iter()
                .map(|t| vocab.encode(t))
                .collect::<Result<Vec<_>, NormalizeError>>()?;
            let samples = kg
                .samples
                .iter()
                .map(|s| {
                    Ok(EncodedSample {
                        query: vocab.encode(&s.query)?,
                        label: s.label,
                        hop: s.hop,
                    })
                })
                .collect::<Result<Vec<_>, NormalizeError>>()?;
            Ok(EncodedKg {
                kg_id: kg.kg_id.clone(),
                memory,
                samples,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub linear: bool,
    /// Mean batch loss.
    pub loss: f64,
    /// Training accuracy over all samples, padding included.
    pub accuracy: f64,
    pub batches: usize,
}

impl EpochLog {
    pub const TSV_HEADER: &'static str = "epoch\tlr\tlinear\tloss\taccuracy\tbatches";

    pub fn to_tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{:.10}\t{:.6}\t{}",
            self.epoch, self.lr, self.linear, self.loss, self.accuracy, self.batches
        )
    }
}

type Batch = (usize, Vec<(TokenIds, u32)>);

/// Random injection of the generic range onto itself, per KG and epoch.
fn remap(kg: &EncodedKg, vocab: &Vocab, seed: u64) -> EncodedKg {
    let start = (SPECIALS.len() + RESERVED.len()) as u32;
    let n = vocab.n_generic() as u32;
    let mut perm: Vec<u32> = (0..n).collect();
    perm.shuffle(&mut rng(seed));
    let map = |t: &TokenIds| t.map(|x| if x >= start { start + perm[(x - start) as usize] } else { x });
    EncodedKg {
        kg_id: kg.kg_id.clone(),
        memory: kg.memory.iter().map(map).collect(),
        samples: kg
            .samples
            .iter()
            .map(|s| EncodedSample {
                query: map(&s.query),
                ..*s
            })
            .collect(),
    }
}

/// Per-KG shuffled, padded batches, in a shuffled global order.
fn epoch_batches(kgs: &[EncodedKg], cfg: &TrainConfig, epoch: usize) -> Vec<Batch> {
    let mut batches = Vec::new();
    for (ki, kg) in kgs.iter().enumerate() {
        let mut order: Vec<usize> = (0..kg.samples.len()).collect();
        order.shuffle(&mut rng(derive_seed(cfg.seed, &kg.kg_id, &format!("shuffle{epoch}"))));
        for chunk in order.chunks(cfg.batch_size) {
            let mut b: Vec<(TokenIds, u32)> = chunk
                .iter()
                .map(|&i| (kg.samples[i].query, kg.samples[i].label.token_index()))
                .collect();
            b.resize(cfg.batch_size, ([PAD_INDEX; 3], PAD_INDEX));
            batches.push((ki, b));
        }
    }
    batches.shuffle(&mut rng(derive_seed(cfg.seed, "train", &format!("batches{epoch}"))));
    batches
}

/// Trains a fresh model. `on_epoch` runs after every epoch with the current
/// parameters (used for per-epoch checkpoints).
pub fn train<F>(kgs: &[EncodedKg], vocab: &Vocab, cfg: &TrainConfig, mut on_epoch: F) -> Result<(Model, Vec<EpochLog>), ModelError>
where
    F: FnMut(&EpochLog, &Model) -> Result<(), ModelError>,
{
    assert!(cfg.batch_size >= 1 && cfg.k >= 1 && cfg.d >= 1, "invalid training configuration");
    if kgs.iter().all(|kg| kg.samples.is_empty()) {
        return Err(ModelError::EmptyDataset);
    }
    let remap_ok = matches!(vocab.kind(), VocabKind::Generic { .. });
    assert!(!cfg.remap_each_epoch || remap_ok, "remapping needs a generic vocabulary");
    let mut model = Model::init(vocab.len(), cfg.d, cfg.k, cfg.pe, cfg.sigma, cfg.seed);
    model.capacity = cfg.capacity;
    let mut adam = AdamState::new(&model.emb);
    let mut logs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let lr = cfg.lr_at(epoch);
        let linear = epoch <= cfg.linear_start_epochs;
        let remapped: Vec<EncodedKg>;
        let epoch_kgs = if cfg.remap_each_epoch {
            remapped = kgs
                .iter()
                .map(|kg| remap(kg, vocab, derive_seed(cfg.seed, &kg.kg_id, &format!("remap{epoch}"))))
                .collect();
            &remapped[..]
        } else {
            kgs
        };
        let batches = epoch_batches(epoch_kgs, cfg, epoch);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (bi, (ki, batch)) in batches.iter().enumerate() {
            let mut out = model.loss_and_grads(&epoch_kgs[*ki].memory, batch, linear)?;
            if !out.loss.is_finite() || !out.grads.iter().all(|g| g.is_finite()) {
                return Err(ModelError::NumericFault { epoch, batch: bi });
            }
            clip_global_norm(&mut out.grads, cfg.clip);
            adam_step(&mut model.emb, &out.grads, &mut adam, lr)?;
            loss_sum += out.loss;
            correct += out.correct;
        }
        let total = batches.len() * cfg.batch_size;
        let log = EpochLog {
            epoch,
            lr,
            linear,
            loss: loss_sum / batches.len() as f64,
            accuracy: correct as f64 / total as f64,
            batches: batches.len(),
        };
        on_epoch(&log, &model)?;
        logs.push(log);
    }
    Ok((model, logs))
}

/// Mean loss of `model` over the padded batches of `kgs` (no updates).
pub fn dataset_loss(model: &Model, kgs: &[EncodedKg], batch_size: usize, linear: bool) -> Result<f64, ModelError> {
    let cfg = TrainConfig {
        batch_size,
        ..TrainConfig::default()
    };
    let batches = epoch_batches(kgs, &cfg, 0);
    let mut sum = 0.0;
    for (ki, batch) in &batches {
        sum += model.batch_loss(&kgs[*ki].memory, batch, linear)?;
    }
    Ok(sum / batches.len().max(1) as f64)
}
