//! TSV persistence of reports and run comparison.
//!
//! Metrics reports store confusion counts; every score is recomputed on read.

use std::collections::BTreeMap;

use super::{ConfusionMatrix, HopMetrics, KgMetrics, MetricsReport};
use crate::error::EvalError;

const COUNT_COLUMNS: [&str; 12] = [
    "yes_yes", "yes_no", "yes_pad", "yes_other", "no_yes", "no_no", "no_pad", "no_other", "pad_yes", "pad_no",
    "pad_pad", "pad_other",
];
const SCORE_COLUMNS: [&str; 8] = [
    "yes_precision",
    "yes_recall",
    "yes_f",
    "no_precision",
    "no_recall",
    "no_f",
    "specificity",
    "accuracy",
];

fn header() -> String {
    let mut h = vec!["kg_id"];
    h.extend(COUNT_COLUMNS);
    h.extend(SCORE_COLUMNS);
    h.join("\t")
}

fn scores(m: &KgMetrics) -> [f64; 8] {
    [
        m.yes.precision,
        m.yes.recall,
        m.yes.f,
        m.no.precision,
        m.no.recall,
        m.no.f,
        m.specificity,
        m.accuracy,
    ]
}

impl MetricsReport {
    /// `# dataset_hash=…`, a header, one row per KG, then a `macro` row
    /// whose count columns hold the pooled counts.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# dataset_hash={}\n{}\n", self.dataset_hash, header());
        let row = |id: &str, cm: &ConfusionMatrix, s: [f64; 8]| {
            let mut cells = vec![id.to_string()];
            cells.extend(cm.counts.iter().flatten().map(|c| c.to_string()));
            cells.extend(s.iter().map(|v| format!("{v:.6}")));
            cells.join("\t") + "\n"
        };
        for m in &self.per_kg {
            out.push_str(&row(&m.kg_id, &m.confusion, scores(m)));
        }
        let a = &self.macro_avg;
        let macro_scores = [
            a.yes.precision,
            a.yes.recall,
            a.yes.f,
            a.no.precision,
            a.no.recall,
            a.no.f,
            a.specificity,
            a.accuracy,
        ];
        out.push_str(&row("macro", &self.pooled, macro_scores));
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or("empty report")?;
        let hash = first
            .strip_prefix("# dataset_hash=")
            .ok_or("line 1: expected '# dataset_hash=…'")?;
        let (_, h) = lines.next().ok_or("missing header")?;
        if h != header() {
            return Err("line 2: unexpected header".into());
        }
        let mut per_kg = Vec::new();
        for (i, line) in lines {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != 1 + COUNT_COLUMNS.len() + SCORE_COLUMNS.len() {
                return Err(format!("line {}: expected {} columns", i + 1, 21));
            }
            if cells[0] == "macro" {
                continue;
            }
            let mut cm = ConfusionMatrix::default();
            for (slot, cell) in cm.counts.iter_mut().flatten().zip(&cells[1..13]) {
                *slot = cell.parse().map_err(|_| format!("line {}: bad count {cell:?}", i + 1))?;
            }
            per_kg.push(KgMetrics::from_confusion(cells[0], cm));
        }
        Ok(MetricsReport::from_kgs(hash, per_kg))
    }

    /// Human-readable macro summary, in percent.
    pub fn summary(&self) -> String {
        let mut out = format!("kgs\t{}\nsamples\t{}\n", self.per_kg.len(), self.pooled.total());
        for (name, v) in self.macro_avg.named() {
            out.push_str(&format!("{name}\t{:.2}\n", 100.0 * v));
        }
        out
    }
}

impl HopMetrics {
    pub const TSV_HEADER: &'static str = "hop\tyes_samples\ttrue_positives\tprecision\trecall\tf";

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# false_positives={}\n{}\n", self.false_positives, Self::TSV_HEADER);
        for (hop, c) in &self.cells {
            out.push_str(&format!(
                "{hop}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                c.yes_samples, c.true_positives, c.metrics.precision, c.metrics.recall, c.metrics.f
            ));
        }
        out
    }
}

pub fn hop_distribution_tsv(dist: &BTreeMap<u32, f64>) -> String {
    let mut out = String::from("hop\tpercent\n");
    for (h, p) in dist {
        out.push_str(&format!("{h}\t{p:.4}\n"));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Delta {
    pub metric: &'static str,
    pub a: f64,
    pub b: f64,
    /// `b - a`.
    pub delta: f64,
}

/// Macro-metric differences; refuses reports over different datasets.
pub fn compare_runs(a: &MetricsReport, b: &MetricsReport) -> Result<Vec<Delta>, EvalError> {
    if a.dataset_hash != b.dataset_hash {
        return Err(EvalError::DatasetMismatch(a.dataset_hash.clone(), b.dataset_hash.clone()));
    }
    Ok(a.macro_avg
        .named()
        .into_iter()
        .zip(b.macro_avg.named())
        .map(|((metric, x), (_, y))| Delta {
            metric,
            a: x,
            b: y,
            delta: y - x,
        })
        .collect())
}

pub fn deltas_tsv(deltas: &[Delta]) -> String {
    let mut out = String::from("metric\ta\tb\tdelta\n");
    for d in deltas {
        out.push_str(&format!("{}\t{:.6}\t{:.6}\t{:+.6}\n", d.metric, d.a, d.b, d.delta));
    }
    out
}
