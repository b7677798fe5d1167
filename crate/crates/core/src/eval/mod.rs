//! Scoring: per-class precision/recall/F without the padding class, accuracy
//! with it, macro averages over KGs, per-hop tables, embedding export, PCA
//! and run comparison.

mod pca;
mod report;

pub use pca::{pca_2d, Pca};
pub use report::{compare_runs, deltas_tsv, hop_distribution_tsv, Delta};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::Label;
use crate::error::EvalError;
use crate::memnet::{EncodedKg, Model, PredictMode, Prediction, TokenIds};
use crate::normalize::{TokenClass, Vocab};

/// Predicted-label column for argmaxes outside the answer tokens.
pub const OTHER: usize = 3;

fn label_index(l: Label) -> usize {
    match l {
        Label::Yes => 0,
        Label::No => 1,
        Label::Pad => 2,
    }
}

fn predicted_index(p: Option<Label>) -> usize {
    p.map_or(OTHER, label_index)
}

/// Counts over true label (Yes, No, Pad) × predicted (Yes, No, Pad, other).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 4]; 3],
}

impl ConfusionMatrix {
    pub fn add(&mut self, truth: Label, predicted: Option<Label>) {
        self.counts[label_index(truth)][predicted_index(predicted)] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
    }

    /// Precision/recall/F of one answer class.
    pub fn class(&self, l: Label) -> ClassMetrics {
        let i = label_index(l);
        let tp = self.counts[i][i];
        let predicted: usize = (0..3).map(|t| self.counts[t][i]).sum();
        let actual: usize = self.counts[i].iter().sum();
        ClassMetrics::from_counts(tp, predicted, actual)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total()).unwrap_or(0.0)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Fractions in [0, 1]. A zero denominator yields 0 and clears the flag.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
}

impl ClassMetrics {
    pub fn from_counts(tp: usize, predicted: usize, actual: usize) -> Self {
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        let (precision, recall) = (p.unwrap_or(0.0), r.unwrap_or(0.0));
        ClassMetrics {
            precision,
            recall,
            f: f_measure(precision, recall),
            precision_defined: p.is_some(),
            recall_defined: r.is_some(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KgMetrics {
    pub kg_id: String,
    pub confusion: ConfusionMatrix,
    pub yes: ClassMetrics,
    pub no: ClassMetrics,
    /// Recall of the No class.
    pub specificity: f64,
    /// Over all samples, padding included.
    pub accuracy: f64,
}

impl KgMetrics {
    pub fn from_confusion(kg_id: impl Into<String>, confusion: ConfusionMatrix) -> Self {
        let yes = confusion.class(Label::Yes);
        let no = confusion.class(Label::No);
        KgMetrics {
            kg_id: kg_id.into(),
            confusion,
            yes,
            no,
            specificity: no.recall,
            accuracy: confusion.accuracy(),
        }
    }
}

/// Unweighted means over KGs; F is the mean of per-KG F values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MacroMetrics {
    pub yes: ClassMetrics,
    pub no: ClassMetrics,
    pub specificity: f64,
    pub accuracy: f64,
}

impl MacroMetrics {
    pub fn over(kgs: &[KgMetrics]) -> Self {
        if kgs.is_empty() {
            return MacroMetrics::default();
        }
        let n = kgs.len() as f64;
        let mean = |f: &dyn Fn(&KgMetrics) -> f64| kgs.iter().map(f).sum::<f64>() / n;
        let class = |pick: &dyn Fn(&KgMetrics) -> ClassMetrics| ClassMetrics {
            precision: mean(&|k| pick(k).precision),
            recall: mean(&|k| pick(k).recall),
            f: mean(&|k| pick(k).f),
            precision_defined: kgs.iter().all(|k| pick(k).precision_defined),
            recall_defined: kgs.iter().all(|k| pick(k).recall_defined),
        };
        MacroMetrics {
            yes: class(&|k| k.yes),
            no: class(&|k| k.no),
            specificity: mean(&|k| k.specificity),
            accuracy: mean(&|k| k.accuracy),
        }
    }

    /// Named values in a fixed order, as fractions.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("yes_precision", self.yes.precision),
            ("yes_recall", self.yes.recall),
            ("yes_f", self.yes.f),
            ("no_precision", self.no.precision),
            ("no_recall", self.no.recall),
            ("no_f", self.no.f),
            ("specificity", self.specificity),
            ("accuracy", self.accuracy),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub dataset_hash: String,
    /// Sorted by kg_id.
    pub per_kg: Vec<KgMetrics>,
    pub macro_avg: MacroMetrics,
    pub pooled: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_kgs(dataset_hash: impl Into<String>, mut per_kg: Vec<KgMetrics>) -> Self {
        per_kg.sort_by(|a, b| a.kg_id.cmp(&b.kg_id));
        let mut pooled = ConfusionMatrix::default();
        for k in &per_kg {
            pooled.merge(&k.confusion);
        }
        MetricsReport {
            dataset_hash: dataset_hash.into(),
            macro_avg: MacroMetrics::over(&per_kg),
            per_kg,
            pooled,
        }
    }
}

/// Predictions for every sample of every KG, in sample order.
pub fn predict_all(model: &Model, kgs: &[EncodedKg], mode: PredictMode) -> Result<Vec<Vec<Prediction>>, EvalError> {
    kgs.par_iter()
        .map(|kg| {
            let queries: Vec<TokenIds> = kg.samples.iter().map(|s| s.query).collect();
            if queries.is_empty() {
                return Ok(Vec::new());
            }
            Ok(model.predict_many(&kg.memory, &queries, mode)?)
        })
        .collect()
}

pub fn metrics_from_predictions(kgs: &[EncodedKg], predictions: &[Vec<Prediction>], dataset_hash: &str) -> MetricsReport {
    let per_kg = kgs
        .iter()
        .zip(predictions)
        .map(|(kg, preds)| {
            let mut cm = ConfusionMatrix::default();
            for (s, p) in kg.samples.iter().zip(preds) {
                cm.add(s.label, p.label);
            }
            KgMetrics::from_confusion(kg.kg_id.clone(), cm)
        })
        .collect();
    MetricsReport::from_kgs(dataset_hash, per_kg)
}

pub fn evaluate(model: &Model, kgs: &[EncodedKg], mode: PredictMode, dataset_hash: &str) -> Result<MetricsReport, EvalError> {
    let preds = predict_all(model, kgs, mode)?;
    Ok(metrics_from_predictions(kgs, &preds, dataset_hash))
}

/// Yes-class scores of one hop; negatives are shared by every hop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopCell {
    pub yes_samples: usize,
    pub true_positives: usize,
    pub metrics: ClassMetrics,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HopMetrics {
    /// Only hops with at least one Yes sample appear.
    pub cells: BTreeMap<u32, HopCell>,
    /// Non-Yes samples predicted Yes, pooled over KGs.
    pub false_positives: usize,
}

/// Per-hop Yes metrics from pooled counts over all KGs.
pub fn hop_metrics(kgs: &[EncodedKg], predictions: &[Vec<Prediction>]) -> Result<HopMetrics, EvalError> {
    let mut tp: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    let mut fp = 0usize;
    for (kg, preds) in kgs.iter().zip(predictions) {
        for (s, p) in kg.samples.iter().zip(preds) {
            let said_yes = p.label == Some(Label::Yes);
            match s.label {
                Label::Yes => {
                    let hop = s.hop.ok_or_else(|| EvalError::MissingHopLabels { kg_id: kg.kg_id.clone() })?;
                    let cell = tp.entry(hop).or_default();
                    cell.0 += 1;
                    cell.1 += said_yes as usize;
                }
                Label::No => fp += said_yes as usize,
                Label::Pad => {}
            }
        }
    }
    let cells = tp
        .into_iter()
        .map(|(hop, (n, hits))| {
            (
                hop,
                HopCell {
                    yes_samples: n,
                    true_positives: hits,
                    metrics: ClassMetrics::from_counts(hits, hits + fp, n),
                },
            )
        })
        .collect();
    Ok(HopMetrics {
        cells,
        false_positives: fp,
    })
}

/// Adds every memory triple as a hop-0 Yes query.
pub fn with_base_slice(kgs: &[EncodedKg]) -> Vec<EncodedKg> {
    kgs.iter()
        .map(|kg| {
            let mut kg = kg.clone();
            let base = kg.memory.iter().map(|&query| crate::memnet::EncodedSample {
                query,
                label: Label::Yes,
                hop: Some(0),
            });
            kg.samples.extend(base.collect::<Vec<_>>());
            kg
        })
        .collect()
}

pub fn evaluate_per_hop(model: &Model, kgs: &[EncodedKg], mode: PredictMode, base_slice: bool) -> Result<HopMetrics, EvalError> {
    let extended;
    let kgs = if base_slice {
        extended = with_base_slice(kgs);
        &extended[..]
    } else {
        kgs
    };
    let preds = predict_all(model, kgs, mode)?;
    hop_metrics(kgs, &preds)
}

/// Percentage of Yes samples per hop, averaged over KGs that have any.
pub fn hop_distribution(kgs: &[EncodedKg]) -> Result<BTreeMap<u32, f64>, EvalError> {
    let mut sums: BTreeMap<u32, f64> = BTreeMap::new();
    let mut counted = 0usize;
    for kg in kgs {
        let mut per: BTreeMap<u32, usize> = BTreeMap::new();
        for s in kg.samples.iter().filter(|s| s.label == Label::Yes) {
            let hop = s.hop.ok_or_else(|| EvalError::MissingHopLabels { kg_id: kg.kg_id.clone() })?;
            *per.entry(hop).or_default() += 1;
        }
        let total: usize = per.values().sum();
        if total == 0 {
            continue;
        }
        counted += 1;
        for (hop, n) in per {
            *sums.entry(hop).or_default() += 100.0 * n as f64 / total as f64;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(h, s)| (h, s / counted as f64))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    /// `E_0`, the query embedding.
    Query,
    /// `E_K`, the final output embedding (tied to the classifier).
    Output,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingRow {
    pub token: String,
    pub class: TokenClass,
    pub values: Vec<f64>,
}

pub fn export_embeddings(model: &Model, vocab: &Vocab, which: EmbeddingKind) -> Vec<EmbeddingRow> {
    assert_eq!(vocab.len(), model.vocab_size(), "vocabulary does not match the model");
    let e = match which {
        EmbeddingKind::Query => &model.emb[0],
        EmbeddingKind::Output => &model.emb[model.k],
    };
    (0..vocab.len())
        .map(|i| EmbeddingRow {
            token: vocab.token(i as u32).to_string(),
            class: vocab.class_of(i as u32),
            values: e.row(i).to_vec(),
        })
        .collect()
}

/// `token<TAB>class<TAB>v_1 … v_d`, with a header line.
pub fn embeddings_tsv(rows: &[EmbeddingRow]) -> String {
    let d = rows.first().map_or(0, |r| r.values.len());
    let mut out = String::from("token\tclass");
    for i in 1..=d {
        out.push_str(&format!("\tv{i}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r.token);
        out.push('\t');
        out.push_str(&r.class.to_string());
        for v in &r.values {
            out.push_str(&format!("\t{v:e}"));
        }
        out.push('\n');
    }
    out
}
