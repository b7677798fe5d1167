use std::collections::{BTreeMap, BTreeSet};

use super::{Dataset, KgExample, Label};

const TYPE: &str = "rdf:type";
const SUB_CLASS_OF: &str = "rdfs:subClassOf";

/// Per-KG statistics, recomputable from the persisted memory and queries.
/// Percentages are relative to the number of distinct memory tokens.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KgStats {
    pub kg_id: String,
    pub facts: usize,
    /// Distinct tokens in subject or object position.
    pub entities: usize,
    pub class_pct: f64,
    pub individual_pct: f64,
    pub relation_pct: f64,
    /// Share of positives at hop 1.
    pub axiomatic_pct: f64,
    pub positives: usize,
    pub negatives: usize,
    pub typed_fallbacks: usize,
}

pub const STATS_HEADER: &str =
    "kg_id\tfacts\tentities\tclass_pct\tindividual_pct\trelation_pct\taxiomatic_pct\tpositives\tnegatives\ttyped_fallbacks";

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

impl KgStats {
    pub fn to_tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
            self.kg_id,
            self.facts,
            self.entities,
            self.class_pct,
            self.individual_pct,
            self.relation_pct,
            self.axiomatic_pct,
            self.positives,
            self.negatives,
            self.typed_fallbacks
        )
    }
}

pub fn kg_stats(kg: &KgExample) -> KgStats {
    let mut terms = BTreeSet::new();
    let mut entities = BTreeSet::new();
    let mut predicates = BTreeSet::new();
    let mut classes = BTreeSet::new();
    let mut typed = BTreeSet::new();
    for [s, p, o] in &kg.memory {
        terms.extend([s, p, o]);
        entities.extend([s, o]);
        predicates.insert(p);
        if p == TYPE {
            classes.insert(o);
            typed.insert(s);
        } else if p == SUB_CLASS_OF {
            classes.extend([s, o]);
        }
    }
    let individuals = typed.iter().filter(|t| !classes.contains(*t)).count();
    let positives = kg.count(Label::Yes);
    let hop1 = kg
        .samples
        .iter()
        .filter(|s| s.label == Label::Yes && s.hop == Some(1))
        .count();
    KgStats {
        kg_id: kg.kg_id.clone(),
        facts: kg.memory.len(),
        entities: entities.len(),
        class_pct: pct(classes.len(), terms.len()),
        individual_pct: pct(individuals, terms.len()),
        relation_pct: pct(predicates.len(), terms.len()),
        axiomatic_pct: pct(hop1, positives),
        positives,
        negatives: kg.count(Label::No),
        typed_fallbacks: kg.typed_fallbacks,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetManifest {
    pub meta: BTreeMap<String, String>,
    pub rows: Vec<KgStats>,
}

impl DatasetManifest {
    /// Unweighted mean of every numeric column over KGs; all zero when empty.
    pub fn averages(&self) -> KgStats {
        let n = self.rows.len();
        if n == 0 {
            return KgStats::default();
        }
        let mean = |f: &dyn Fn(&KgStats) -> f64| self.rows.iter().map(f).sum::<f64>() / n as f64;
        let mean_u = |f: &dyn Fn(&KgStats) -> usize| (mean(&|r| f(r) as f64)).round() as usize;
        KgStats {
            kg_id: "mean".into(),
            facts: mean_u(&|r| r.facts),
            entities: mean_u(&|r| r.entities),
            class_pct: mean(&|r| r.class_pct),
            individual_pct: mean(&|r| r.individual_pct),
            relation_pct: mean(&|r| r.relation_pct),
            axiomatic_pct: mean(&|r| r.axiomatic_pct),
            positives: mean_u(&|r| r.positives),
            negatives: mean_u(&|r| r.negatives),
            typed_fallbacks: mean_u(&|r| r.typed_fallbacks),
        }
    }

    pub fn total_positives(&self) -> usize {
        self.rows.iter().map(|r| r.positives).sum()
    }

    pub fn total_negatives(&self) -> usize {
        self.rows.iter().map(|r| r.negatives).sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(STATS_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_tsv_row());
            out.push('\n');
        }
        out
    }
}

/// Manifest rows in kg_id order.
pub fn dataset_stats(dataset: &Dataset) -> DatasetManifest {
    let mut rows: Vec<KgStats> = dataset.kgs.iter().map(kg_stats).collect();
    rows.sort_by(|a, b| a.kg_id.cmp(&b.kg_id));
    DatasetManifest {
        meta: dataset.meta.clone(),
        rows,
    }
}
