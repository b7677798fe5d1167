//! `rdfmem`: RDFS closure, dataset construction, memory-network training and
//! evaluation from the command line.
//!
//! Exit codes: 0 success, 2 parse error, 3 truncated closure, 4 capacity or
//! vocabulary overflow, 1 anything else.

mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rdfmem", version, about = "RDFS entailment datasets and memory-network reasoning")]
struct Cli {
    /// Worker threads; 1 guarantees bit-identical outputs (the default
    /// reduction order makes every thread count reproducible).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse an N-Triples file and report counts.
    Validate(ValidateArgs),
    /// Compute the RDFS closure with per-triple hop labels.
    Entail(EntailArgs),
    /// Rename a graph's terms into the shared generic vocabulary.
    Normalize(NormalizeArgs),
    /// Build a labelled query dataset from a directory of N-Triples files.
    BuildDataset(BuildDatasetArgs),
    /// Generate synthetic knowledge graphs.
    Synth(SynthArgs),
    /// Train a memory network on a dataset.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Report the per-hop distribution of a dataset's positives.
    Hops(HopsArgs),
    /// Export a checkpoint's embeddings (optionally with a PCA projection).
    ExportEmbeddings(ExportArgs),
    /// Compare two evaluation reports over the same dataset.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Debug)]
struct EntailArgs {
    #[arg(long)]
    input: PathBuf,
    /// Closure as N-Triples.
    #[arg(long)]
    output: PathBuf,
    /// Optional `s<TAB>p<TAB>o<TAB>hop` file.
    #[arg(long)]
    hops: Option<PathBuf>,
    #[arg(long, default_value_t = rdfmem::rdfs::DEFAULT_MAX_ROUNDS)]
    max_rounds: u32,
    /// Container-membership properties given axioms; defaults to the largest
    /// `rdf:_n` in the input.
    #[arg(long)]
    containers: Option<u32>,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Token triples, one per line.
    #[arg(long)]
    output: PathBuf,
    /// Token-to-term map (TSV).
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = rdfmem::normalize::DEFAULT_N_GENERIC)]
    vocab_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep original terms (unnormalized baseline).
    #[arg(long)]
    identity_normalization: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Random,
    Typed,
}

#[derive(Args, Debug)]
struct BuildDatasetArgs {
    /// Directory of `*.nt` files; each file's stem becomes its KG id.
    #[arg(long)]
    inputs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Random)]
    mode: ModeArg,
    /// Negatives per positive in random mode.
    #[arg(long, default_value_t = 1.0)]
    neg_ratio: f64,
    /// Memory capacity; larger graphs are subsampled.
    #[arg(long, default_value_t = 1000)]
    max_triples: usize,
    #[arg(long, default_value_t = rdfmem::normalize::DEFAULT_N_GENERIC)]
    vocab_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    identity_normalization: bool,
    #[arg(long)]
    max_positives: Option<usize>,
    #[arg(long)]
    max_positives_per_hop: Option<usize>,
    /// Drop hop-1 (axiomatic) positives.
    #[arg(long)]
    drop_axiomatic: bool,
    #[arg(long, default_value = "train")]
    split: String,
    #[arg(long, default_value_t = rdfmem::rdfs::DEFAULT_MAX_ROUNDS)]
    max_rounds: u32,
    #[arg(long)]
    containers: Option<u32>,
    /// Replace an existing dataset in `--out`.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Subclass and/or subproperty chains of a given depth.
    Chain,
    /// Small random ontologies with instances and assertions.
    Ontology,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MixArg {
    Subclass,
    Subproperty,
    Both,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Chain)]
    kind: KindArg,
    #[arg(long, default_value_t = 3)]
    depth: u32,
    #[arg(long, default_value_t = 1)]
    width: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, value_enum, default_value_t = MixArg::Both)]
    mix: MixArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Checkpoint path; the epoch log and manifest are written beside it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    d: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.005)]
    lr: f64,
    /// First epoch at half learning rate; 0 disables the decay.
    #[arg(long, default_value_t = 6)]
    lr_decay_epoch: usize,
    #[arg(long, default_value_t = 40.0)]
    clip: f64,
    #[arg(long, default_value_t = 1)]
    linear_start: usize,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 1000)]
    capacity: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bag-of-words slot encoding (positional encoding off).
    #[arg(long)]
    no_pe: bool,
    /// Redraw each KG's generic-token assignment every epoch.
    #[arg(long)]
    remap_each_epoch: bool,
    /// Also write `<out>.epoch<N>` after every epoch.
    #[arg(long)]
    epoch_checkpoints: bool,
    /// Extra datasets whose tokens join an identity vocabulary (so that
    /// held-out terms have embedding rows).
    #[arg(long)]
    vocab_dataset: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhichArg {
    Query,
    Output,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    ckpt: PathBuf,
    /// Report TSV; defaults to `<ckpt>.report.tsv`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print and write the per-hop table.
    #[arg(long)]
    per_hop: bool,
    /// Add every memory triple as a hop-0 query to the per-hop table.
    #[arg(long)]
    base_slice: bool,
    /// Argmax over the full vocabulary instead of the answer tokens.
    #[arg(long)]
    full_vocab: bool,
    #[arg(long)]
    export_embeddings: Option<PathBuf>,
    #[arg(long)]
    pca: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WhichArg::Query)]
    which: WhichArg,
}

#[derive(Args, Debug)]
struct HopsArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = WhichArg::Query)]
    which: WhichArg,
    #[arg(long)]
    pca: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command, cli.threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e))
        }
    }
}
