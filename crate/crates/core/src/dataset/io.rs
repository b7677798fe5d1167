//! Directory layout: `manifest.tsv` plus, per KG, `kg_<id>/memory.txt`,
//! `kg_<id>/queries.tsv` and `kg_<id>/map.tsv`.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::stats::{dataset_stats, kg_stats, STATS_HEADER};
use super::{Dataset, KgExample, Label, Sample};
use crate::error::DatasetError;
use crate::normalize::{NormalizationMap, TokenTriple};

pub const MANIFEST: &str = "manifest.tsv";
pub const MEMORY: &str = "memory.txt";
pub const QUERIES: &str = "queries.tsv";
pub const MAP: &str = "map.tsv";

fn kg_dir(root: &Path, kg_id: &str) -> PathBuf {
    root.join(format!("kg_{kg_id}"))
}

fn write(path: PathBuf, text: &str) -> Result<(), DatasetError> {
    fs::write(&path, text).map_err(|e| DatasetError::io(path, e))
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))
}

fn triple_text(t: &TokenTriple) -> String {
    t.join(" ")
}

pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|e| DatasetError::io(dir, e))?;
    for kg in &dataset.kgs {
        assert!(
            !kg.kg_id.is_empty() && !kg.kg_id.contains(['/', '\\', '\t', '\n']),
            "kg_id {:?} is not a valid directory suffix",
            kg.kg_id
        );
        let sub = kg_dir(dir, &kg.kg_id);
        fs::create_dir_all(&sub).map_err(|e| DatasetError::io(&sub, e))?;
        let mut memory = String::new();
        for t in &kg.memory {
            memory.push_str(&triple_text(t));
            memory.push('\n');
        }
        write(sub.join(MEMORY), &memory)?;
        let mut queries = String::new();
        for s in &kg.samples {
            let hop = s.hop.map_or_else(|| "-".to_string(), |h| h.to_string());
            queries.push_str(&format!("{}\t{}\t{}\n", triple_text(&s.query), s.label, hop));
        }
        write(sub.join(QUERIES), &queries)?;
        write(sub.join(MAP), &kg.map.to_tsv())?;
    }
    write(dir.join(MANIFEST), &dataset_stats(dataset).to_tsv())
}

fn parse_triple(text: &str, path: &Path, line: usize) -> Result<TokenTriple, DatasetError> {
    let parts: Vec<&str> = text.split(' ').collect();
    match parts.as_slice() {
        [s, p, o] if !s.is_empty() && !p.is_empty() && !o.is_empty() => {
            Ok([s.to_string(), p.to_string(), o.to_string()])
        }
        _ => Err(DatasetError::corrupt(path, line, "expected three space-separated tokens")),
    }
}

fn read_kg(root: &Path, kg_id: &str, typed_fallbacks: usize, identity: bool) -> Result<KgExample, DatasetError> {
    let sub = kg_dir(root, kg_id);
    let memory_path = sub.join(MEMORY);
    let memory = read(&memory_path)?
        .lines()
        .enumerate()
        .map(|(i, l)| parse_triple(l, &memory_path, i + 1))
        .collect::<Result<Vec<_>, _>>()?;

    let queries_path = sub.join(QUERIES);
    let mut samples = Vec::new();
    for (i, line) in read(&queries_path)?.lines().enumerate() {
        let bad = |reason: &str| DatasetError::corrupt(&queries_path, i + 1, reason);
        let fields: Vec<&str> = line.split('\t').collect();
        let [triple, label, hop] = fields.as_slice() else {
            return Err(bad("expected query<TAB>label<TAB>hop"));
        };
        let query = parse_triple(triple, &queries_path, i + 1)?;
        let label: Label = label.parse().map_err(|e: String| bad(&e))?;
        let hop = match *hop {
            "-" => None,
            h => Some(h.parse::<u32>().map_err(|_| bad("hop must be a non-negative integer or '-'"))?),
        };
        let sample = Sample { query, label, hop };
        if !sample.is_valid() {
            return Err(bad("label inconsistent with query or hop"));
        }
        samples.push(sample);
    }

    let map_path = sub.join(MAP);
    let map = NormalizationMap::from_tsv(&read(&map_path)?, 0, identity)
        .map_err(|(line, reason)| DatasetError::corrupt(&map_path, line, reason))?;
    Ok(KgExample {
        kg_id: kg_id.to_string(),
        memory,
        samples,
        map,
        typed_fallbacks,
    })
}

/// Reads a dataset and checks the manifest counts against the files.
pub fn read_dataset(dir: &Path) -> Result<Dataset, DatasetError> {
    let manifest_path = dir.join(MANIFEST);
    let text = read(&manifest_path)?;
    let mut dataset = Dataset::default();
    let mut rows: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let bad = |reason: &str| DatasetError::corrupt(&manifest_path, i + 1, reason);
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected '# key=value'"))?;
            dataset.meta.insert(k.to_string(), v.to_string());
        } else if !header_seen {
            if line != STATS_HEADER {
                return Err(bad("unexpected manifest header"));
            }
            header_seen = true;
        } else {
            let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
            if fields.len() != STATS_HEADER.split('\t').count() {
                return Err(bad("wrong number of columns"));
            }
            rows.push((i + 1, line.to_string(), fields));
        }
    }
    if !header_seen {
        return Err(DatasetError::corrupt(&manifest_path, text.lines().count() + 1, "missing header"));
    }
    let identity = dataset.is_identity();
    for (line, raw, fields) in rows {
        let fallbacks: usize = fields[9]
            .parse()
            .map_err(|_| DatasetError::corrupt(&manifest_path, line, "typed_fallbacks must be an integer"))?;
        let kg = read_kg(dir, &fields[0], fallbacks, identity)?;
        if kg_stats(&kg).to_tsv_row() != raw {
            return Err(DatasetError::corrupt(
                &manifest_path,
                line,
                format!("counts for {} do not match its files", fields[0]),
            ));
        }
        dataset.kgs.push(kg);
    }
    Ok(dataset)
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> Result<(), DatasetError> {
    let entries = fs::read_dir(dir).map_err(|e| DatasetError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| DatasetError::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path
                .strip_prefix(root)
                .expect("walk stays under root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            out.push((rel, path));
        }
    }
    Ok(())
}

/// Content hash of a dataset directory: sha256 over `manifest.tsv` and all
/// `kg_*` files, visited in sorted relative-path order.
pub fn dataset_hash(dir: &Path) -> Result<String, DatasetError> {
    let mut files = Vec::new();
    let manifest = dir.join(MANIFEST);
    if !manifest.is_file() {
        return Err(DatasetError::Missing(manifest));
    }
    files.push((MANIFEST.to_string(), manifest));
    let entries = fs::read_dir(dir).map_err(|e| DatasetError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| DatasetError::io(dir, e))?.path();
        let is_kg = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("kg_"));
        if is_kg && path.is_dir() {
            collect_files(dir, &path, &mut files)?;
        }
    }
    files.sort();
    let mut hasher = Sha256::new();
    for (rel, path) in files {
        let bytes = fs::read(&path).map_err(|e| DatasetError::io(&path, e))?;
        hasher.update(rel.as_bytes());
        hasher.update([0u8]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}
