use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rdfmem::dataset::{
    build_dataset, dataset_hash, gen_ontology_kg, gen_synthetic_chain_kg, read_dataset, write_dataset, BuildConfig,
    ChainMix, ChainSpec, CorruptionMode, Dataset, KgInput, OntologySpec,
};
use rdfmem::eval::{
    compare_runs, deltas_tsv, embeddings_tsv, evaluate, evaluate_per_hop, export_embeddings, hop_distribution,
    hop_distribution_tsv, pca_2d, EmbeddingKind, EmbeddingRow, MetricsReport,
};
use rdfmem::manifest::{file_hash, RunManifest, WALL_TIME_KEY};
use rdfmem::memnet::{encode_dataset, train, EncodedKg, Model, PredictMode, TrainConfig};
use rdfmem::normalize::{build_vocab, identity_normalize, normalize_graph, Vocab};
use rdfmem::rdf::{parse_ntriples_reader, write_ntriples, Graph, ParseOptions, TermTable};
use rdfmem::rdfs::{entail, AxiomaticConfig, EntailOptions, EntailmentResult};
use rdfmem::seed::derive_seed;
use rdfmem::tensor::{read_checkpoint, write_checkpoint, Matrix};
use rdfmem::{EntailError, ModelError};

use crate::{
    BuildDatasetArgs, Command, CompareArgs, EntailArgs, EvalArgs, ExportArgs, HopsArgs, KindArg, MixArg, ModeArg,
    NormalizeArgs, SynthArgs, TrainArgs, ValidateArgs, WhichArg,
};

/// File written beside every single-file output.
const MANIFEST_SUFFIX: &str = ".manifest";
/// Written inside every directory output; `manifest.tsv` is the dataset's own summary.
const RUN_MANIFEST: &str = "run_manifest.txt";

pub fn run(command: Command, threads: Option<usize>) -> Result<()> {
    let start = Instant::now();
    let threads = threads.unwrap_or_else(rayon::current_num_threads);
    let finish = |mut m: RunManifest, path: &Path| -> Result<()> {
        m.set("threads", threads);
        m.set(WALL_TIME_KEY, format!("{:.3}", start.elapsed().as_secs_f64()));
        m.write(path).with_context(|| format!("writing {}", path.display()))
    };
    match command {
        Command::Validate(a) => validate(a),
        Command::Entail(a) => entail_cmd(a, finish),
        Command::Normalize(a) => normalize_cmd(a, finish),
        Command::BuildDataset(a) => build_cmd(a, finish),
        Command::Synth(a) => synth_cmd(a, finish),
        Command::Train(a) => train_cmd(a, finish),
        Command::Eval(a) => eval_cmd(a, finish),
        Command::Hops(a) => hops_cmd(a, finish),
        Command::ExportEmbeddings(a) => export_cmd(a, finish),
        Command::Compare(a) => compare_cmd(a, finish),
    }
}

/// `path` with `suffix` appended to its file name.
fn beside(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn hash(path: &Path) -> Result<String> {
    file_hash(path).with_context(|| format!("hashing {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_file(path: &Path, lenient: bool) -> Result<(rdfmem::rdf::ParseOutcome, TermTable)> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut table = TermTable::new();
    let outcome = parse_ntriples_reader(BufReader::new(file), &mut table, ParseOptions { lenient })
        .with_context(|| format!("parsing {}", path.display()))?;
    for skipped in &outcome.skipped {
        eprintln!("warning: {}: skipped {skipped}", path.display());
    }
    Ok((outcome, table))
}

fn validate(a: ValidateArgs) -> Result<()> {
    let (outcome, table) = parse_file(&a.input, a.lenient)?;
    println!("statements\t{}", outcome.statements);
    println!("distinct_triples\t{}", outcome.graph.len());
    println!("terms\t{}", outcome.graph.terms().len());
    println!("interned\t{}", table.len());
    println!("skipped_lines\t{}", outcome.skipped.len());
    Ok(())
}

fn write_graph(g: &Graph, table: &TermTable, path: &Path) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_ntriples(g, table, &mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

fn write_closure(res: &EntailmentResult, table: &TermTable, a: &EntailArgs) -> Result<()> {
    write_graph(&res.closure, table, &a.output)?;
    if let Some(hops) = &a.hops {
        let file = fs::File::create(hops).with_context(|| format!("creating {}", hops.display()))?;
        let mut w = BufWriter::new(file);
        res.write_hops_tsv(table, &mut w)
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {}", hops.display()))?;
    }
    Ok(())
}

fn entail_cmd(a: EntailArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (outcome, mut table) = parse_file(&a.input, a.lenient)?;
    let opts = EntailOptions {
        axioms: AxiomaticConfig { containers: a.containers },
        max_rounds: a.max_rounds,
        record_derivations: false,
    };
    let mut m = RunManifest::new("entail", 0);
    m.set("input", a.input.display());
    m.set("input_sha256", hash(&a.input)?);
    m.set("max_rounds", a.max_rounds);
    m.set("containers", a.containers.map_or("auto".to_string(), |c| c.to_string()));
    m.set("lenient", a.lenient);
    let result = entail(&outcome.graph, &mut table, &opts);
    let (res, truncated) = match &result {
        Ok(res) => (res, false),
        Err(EntailError::Truncated { partial, .. }) => (partial.as_ref(), true),
    };
    write_closure(res, &table, &a)?;
    m.set("closure_triples", res.closure.len());
    m.set("max_hop", res.max_hop());
    m.set("truncated", truncated);
    finish(m, &beside(&a.output, MANIFEST_SUFFIX))?;
    if truncated {
        eprintln!("partial closure written to {}", a.output.display());
    } else {
        println!("base\t{}\nclosure\t{}\nmax_hop\t{}", outcome.graph.len(), res.closure.len(), res.max_hop());
    }
    result.map(|_| ()).map_err(Into::into)
}

fn normalize_cmd(a: NormalizeArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (outcome, table) = parse_file(&a.input, false)?;
    let (tokens, map) = if a.identity_normalization {
        identity_normalize(&outcome.graph, &table)
    } else {
        normalize_graph(&outcome.graph, &table, &build_vocab(a.vocab_size), a.seed)?
    };
    let text: String = tokens.iter().map(|t| format!("{}\n", t.join("\t"))).collect();
    write_file(&a.output, &text)?;
    write_file(&a.map, &map.to_tsv())?;
    let mut m = RunManifest::new("normalize", a.seed);
    m.set("input", a.input.display());
    m.set("input_sha256", hash(&a.input)?);
    m.set("vocab_size", a.vocab_size);
    m.set("normalization", if a.identity_normalization { "identity" } else { "generic" });
    m.set("renamed_terms", map.len());
    finish(m, &beside(&a.output, MANIFEST_SUFFIX))
}

/// Sorted `*.nt` files of `dir`.
fn nt_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .with_context(|| format!("reading {}", dir.display()))?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "nt"));
    files.sort();
    Ok(files)
}

/// Removes the artifacts of an earlier dataset build from `out`, so that a
/// rebuild never leaves stale KG directories behind.
fn clear_dataset_dir(out: &Path, force: bool) -> Result<()> {
    if !out.exists() {
        return Ok(());
    }
    let mut stale = Vec::new();
    for entry in fs::read_dir(out).with_context(|| format!("reading {}", out.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("kg_") || name == "manifest.tsv" || name == RUN_MANIFEST {
            stale.push(path);
        }
    }
    if stale.is_empty() {
        return Ok(());
    }
    if !force {
        bail!("{} already holds a dataset; pass --force to replace it", out.display());
    }
    for path in stale {
        if path.is_dir() {
            fs::remove_dir_all(&path)
        } else {
            fs::remove_file(&path)
        }
        .with_context(|| format!("removing {}", path.display()))?;
    }
    Ok(())
}

fn build_cmd(a: BuildDatasetArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let files = nt_files(&a.inputs)?;
    let mut m = RunManifest::new("build-dataset", a.seed);
    m.set("inputs", a.inputs.display());
    let mut inputs = Vec::with_capacity(files.len());
    for path in &files {
        let kg_id = path.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?.to_string();
        let (outcome, table) = parse_file(path, false)?;
        m.set(format!("input_sha256.{kg_id}"), hash(path)?);
        inputs.push(KgInput {
            kg_id,
            graph: outcome.graph,
            table,
        });
    }
    let cfg = BuildConfig {
        split: a.split,
        mode: match a.mode {
            ModeArg::Random => CorruptionMode::Random,
            ModeArg::Typed => CorruptionMode::Typed,
        },
        neg_ratio: a.neg_ratio,
        capacity: a.max_triples,
        n_generic: a.vocab_size,
        identity: a.identity_normalization,
        seed: a.seed,
        max_positives: a.max_positives,
        max_positives_per_hop: a.max_positives_per_hop,
        keep_axiomatic: !a.drop_axiomatic,
        max_rounds: a.max_rounds,
        containers: a.containers,
    };
    let dataset = build_dataset(&inputs, &cfg).context("building dataset")?;
    clear_dataset_dir(&a.out, a.force)?;
    write_dataset(&dataset, &a.out)?;
    m.extend("build.", &cfg.to_meta());
    m.set("kgs", dataset.kgs.len());
    m.set("samples", dataset.sample_count());
    m.set("dataset_sha256", dataset_hash(&a.out)?);
    finish(m, &a.out.join(RUN_MANIFEST))?;
    println!("kgs\t{}\nsamples\t{}", dataset.kgs.len(), dataset.sample_count());
    Ok(())
}

fn synth_cmd(a: SynthArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    if a.kind == KindArg::Chain && !(1..=24).contains(&a.depth) {
        bail!("--depth must be in 1..=24");
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mix = match a.mix {
        MixArg::Subclass => ChainMix::Subclass,
        MixArg::Subproperty => ChainMix::Subproperty,
        MixArg::Both => ChainMix::Both,
    };
    for i in 0..a.count {
        let seed = derive_seed(a.seed, "synth", &i.to_string());
        // Distinct namespaces keep KGs of one corpus term-disjoint.
        let namespace = format!("http://synth.example/{:016x}/{i}/", a.seed);
        let mut table = TermTable::new();
        let g = match a.kind {
            KindArg::Chain => {
                let spec = ChainSpec {
                    depth: a.depth,
                    width: a.width,
                    mix,
                    namespace,
                };
                gen_synthetic_chain_kg(&spec, seed, &mut table)
            }
            KindArg::Ontology => gen_ontology_kg(&OntologySpec::new(namespace), seed, &mut table),
        };
        write_graph(&g, &table, &a.out.join(format!("{i:04}.nt")))?;
    }
    let mut m = RunManifest::new("synth", a.seed);
    m.set("kind", format!("{:?}", a.kind).to_lowercase());
    m.set("depth", a.depth);
    m.set("width", a.width);
    m.set("count", a.count);
    m.set("mix", mix);
    finish(m, &a.out.join(RUN_MANIFEST))
}

fn load_dataset(dir: &Path) -> Result<(Dataset, String)> {
    let ds = read_dataset(dir).with_context(|| format!("reading dataset {}", dir.display()))?;
    let h = dataset_hash(dir)?;
    Ok((ds, h))
}

/// The vocabulary a dataset's tokens live in: the generic vocabulary it was
/// built with, or an identity vocabulary over its (and `extra`'s) tokens.
fn dataset_vocab(ds: &Dataset, extra: &[Dataset]) -> Result<Vocab> {
    if ds.is_identity() {
        if let Some(other) = extra.iter().find(|e| !e.is_identity()) {
            bail!("cannot mix identity and generic datasets ({} KGs)", other.kgs.len());
        }
        Ok(Vocab::identity(ds.tokens().chain(extra.iter().flat_map(|e| e.tokens()))))
    } else {
        let n = ds.n_generic().context("dataset manifest lacks n_generic")?;
        Ok(build_vocab(n))
    }
}

fn train_cmd(a: TrainArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (ds, ds_hash) = load_dataset(&a.dataset)?;
    let extra = a
        .vocab_dataset
        .iter()
        .map(|d| load_dataset(d).map(|(ds, _)| ds))
        .collect::<Result<Vec<_>>>()?;
    let vocab = dataset_vocab(&ds, &extra)?;
    if a.remap_each_epoch && ds.is_identity() {
        bail!("--remap-each-epoch needs a generically normalized dataset");
    }
    if a.batch_size == 0 || a.k == 0 || a.d == 0 {
        bail!("--d, --k and --batch-size must be positive");
    }
    let cfg = TrainConfig {
        d: a.d,
        k: a.k,
        capacity: a.capacity,
        batch_size: a.batch_size,
        epochs: a.epochs,
        lr: a.lr,
        lr_decay_epoch: (a.lr_decay_epoch > 0).then_some(a.lr_decay_epoch),
        linear_start_epochs: a.linear_start,
        clip: a.clip,
        sigma: a.sigma,
        seed: a.seed,
        pe: !a.no_pe,
        remap_each_epoch: a.remap_each_epoch,
    };
    let kgs = encode_dataset(&ds, &vocab)?;
    let mut log = format!("{}\n", rdfmem::memnet::EpochLog::TSV_HEADER);
    let (model, logs) = train(&kgs, &vocab, &cfg, |entry, model| {
        eprintln!(
            "epoch {}\tloss {:.4}\taccuracy {:.4}",
            entry.epoch, entry.loss, entry.accuracy
        );
        if a.epoch_checkpoints {
            let path = beside(&a.out, &format!(".epoch{}", entry.epoch));
            write_checkpoint(&model.to_checkpoint(&vocab), &path)?;
        }
        Ok::<(), ModelError>(())
    })?;
    for entry in &logs {
        log.push_str(&entry.to_tsv_row());
        log.push('\n');
    }
    write_checkpoint(&model.to_checkpoint(&vocab), &a.out)?;
    write_file(&beside(&a.out, ".log.tsv"), &log)?;
    let mut m = RunManifest::new("train", a.seed);
    m.set("dataset", a.dataset.display());
    m.set("dataset_sha256", ds_hash);
    for (i, d) in a.vocab_dataset.iter().enumerate() {
        m.set(format!("vocab_dataset.{i}"), d.display());
        m.set(format!("vocab_dataset_sha256.{i}"), dataset_hash(d)?);
    }
    m.set("vocab_size", vocab.len());
    m.extend("train.", &cfg.to_meta());
    m.set("checkpoint_sha256", hash(&a.out)?);
    finish(m, &beside(&a.out, MANIFEST_SUFFIX))
}

fn load_model(path: &Path) -> Result<(Model, Vocab)> {
    let ck = read_checkpoint(path)?;
    Model::from_checkpoint(&ck).map_err(|reason| {
        ModelError::Checkpoint {
            path: path.to_path_buf(),
            reason,
        }
        .into()
    })
}

fn embedding_kind(w: WhichArg) -> EmbeddingKind {
    match w {
        WhichArg::Query => EmbeddingKind::Query,
        WhichArg::Output => EmbeddingKind::Output,
    }
}

/// `token<TAB>class<TAB>pc1<TAB>pc2`, preceded by the explained variances.
fn pca_tsv(rows: &[EmbeddingRow]) -> Result<String> {
    let d = rows.first().map_or(0, |r| r.values.len());
    let x = Matrix::from_vec(rows.len(), d, rows.iter().flat_map(|r| r.values.iter().copied()).collect())?;
    let pca = pca_2d(&x)?;
    let mut out = format!("# variance1={:e}\tvariance2={:e}\ntoken\tclass\tpc1\tpc2\n", pca.variances[0], pca.variances[1]);
    for (i, r) in rows.iter().enumerate() {
        let p = pca.projected.row(i);
        out.push_str(&format!("{}\t{}\t{:e}\t{:e}\n", r.token, r.class, p[0], p[1]));
    }
    Ok(out)
}

/// Writes the requested embedding and PCA files; returns their manifest entries.
fn write_embeddings(
    model: &Model,
    vocab: &Vocab,
    which: WhichArg,
    out: Option<&Path>,
    pca: Option<&Path>,
    m: &mut RunManifest,
) -> Result<()> {
    if out.is_none() && pca.is_none() {
        return Ok(());
    }
    let rows = export_embeddings(model, vocab, embedding_kind(which));
    m.set("embeddings", format!("{which:?}").to_lowercase());
    if let Some(path) = out {
        write_file(path, &embeddings_tsv(&rows))?;
        m.set("embeddings_out", path.display());
    }
    if let Some(path) = pca {
        write_file(path, &pca_tsv(&rows)?)?;
        m.set("pca_out", path.display());
    }
    Ok(())
}

/// Encodes a dataset against a checkpoint's vocabulary.
fn encode_for(ds: &Dataset, vocab: &Vocab, model: &Model) -> Result<Vec<EncodedKg>> {
    if vocab.len() != model.vocab_size() {
        bail!("checkpoint vocabulary does not match its tensors");
    }
    encode_dataset(ds, vocab).context("dataset tokens are outside the checkpoint's vocabulary")
}

fn eval_cmd(a: EvalArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (model, vocab) = load_model(&a.ckpt)?;
    let (ds, ds_hash) = load_dataset(&a.dataset)?;
    let kgs = encode_for(&ds, &vocab, &model)?;
    let mode = if a.full_vocab { PredictMode::FullVocab } else { PredictMode::Answers };
    let report = evaluate(&model, &kgs, mode, &ds_hash)?;
    let report_path = a.report.unwrap_or_else(|| beside(&a.ckpt, ".report.tsv"));
    write_file(&report_path, &report.to_tsv())?;
    print!("{}", report.summary());
    let mut m = RunManifest::new("eval", 0);
    m.set("dataset", a.dataset.display());
    m.set("dataset_sha256", &ds_hash);
    m.set("checkpoint", a.ckpt.display());
    m.set("checkpoint_sha256", hash(&a.ckpt)?);
    m.set("predict", if a.full_vocab { "full_vocab" } else { "answers" });
    m.set("report", report_path.display());
    if a.per_hop || a.base_slice {
        let hops = evaluate_per_hop(&model, &kgs, mode, a.base_slice)?;
        let tsv = hops.to_tsv();
        let path = beside(&report_path, ".hops.tsv");
        write_file(&path, &tsv)?;
        print!("{tsv}");
        m.set("base_slice", a.base_slice);
        m.set("hops_out", path.display());
    }
    write_embeddings(&model, &vocab, a.which, a.export_embeddings.as_deref(), a.pca.as_deref(), &mut m)?;
    finish(m, &beside(&report_path, MANIFEST_SUFFIX))
}

fn hops_cmd(a: HopsArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (ds, ds_hash) = load_dataset(&a.dataset)?;
    let vocab = dataset_vocab(&ds, &[])?;
    let kgs = encode_dataset(&ds, &vocab)?;
    let tsv = hop_distribution_tsv(&hop_distribution(&kgs)?);
    print!("{tsv}");
    if let Some(out) = &a.out {
        write_file(out, &tsv)?;
        let mut m = RunManifest::new("hops", 0);
        m.set("dataset", a.dataset.display());
        m.set("dataset_sha256", ds_hash);
        finish(m, &beside(out, MANIFEST_SUFFIX))?;
    }
    Ok(())
}

fn export_cmd(a: ExportArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (model, vocab) = load_model(&a.ckpt)?;
    let mut m = RunManifest::new("export-embeddings", 0);
    m.set("checkpoint", a.ckpt.display());
    m.set("checkpoint_sha256", hash(&a.ckpt)?);
    write_embeddings(&model, &vocab, a.which, Some(&a.out), a.pca.as_deref(), &mut m)?;
    finish(m, &beside(&a.out, MANIFEST_SUFFIX))
}

fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MetricsReport::from_tsv(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn compare_cmd(a: CompareArgs, finish: impl Fn(RunManifest, &Path) -> Result<()>) -> Result<()> {
    let (ra, rb) = (read_report(&a.a)?, read_report(&a.b)?);
    let tsv = deltas_tsv(&compare_runs(&ra, &rb)?);
    print!("{tsv}");
    if let Some(out) = &a.out {
        write_file(out, &tsv)?;
        let mut m = RunManifest::new("compare", 0);
        let entries: BTreeMap<String, String> = [
            ("a".to_string(), a.a.display().to_string()),
            ("a_sha256".to_string(), hash(&a.a)?),
            ("b".to_string(), a.b.display().to_string()),
            ("b_sha256".to_string(), hash(&a.b)?),
        ]
        .into();
        m.extend("", &entries);
        finish(m, &beside(out, MANIFEST_SUFFIX))?;
    }
    Ok(())
}
