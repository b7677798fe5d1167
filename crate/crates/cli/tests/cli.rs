use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn rdfmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdfmem"))
        .args(["--threads", "1"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = rdfmem(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    rdfmem(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Relative path to bytes for every file under `dir`, skipping run manifests
/// (their wall time differs between runs).
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.file_name().unwrap() != "run_manifest.txt" {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn manifest(path: &Path) -> rdfmem::manifest::RunManifest {
    rdfmem::manifest::RunManifest::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn synth_ontologies(tmp: &TempDir, name: &str, count: &str) -> PathBuf {
    let dir = tmp.path().join(name);
    ok(&["synth", "--kind", "ontology", "--count", count, "--seed", "5", "--out", p(&dir)]);
    dir
}

#[test]
fn entail_writes_closure_and_hops() {
    let tmp = TempDir::new().unwrap();
    let kg = tmp.path().join("kg");
    ok(&["synth", "--depth", "3", "--count", "1", "--out", p(&kg)]);
    let (closure, hops) = (tmp.path().join("c.nt"), tmp.path().join("h.tsv"));
    ok(&["entail", "--input", p(&kg.join("0000.nt")), "--output", p(&closure), "--hops", p(&hops)]);
    let text = fs::read_to_string(&hops).unwrap();
    let max_hop = text.lines().filter_map(|l| l.rsplit('\t').next()?.parse::<u32>().ok()).max();
    assert_eq!(max_hop, Some(4));
    assert!(fs::read_to_string(&closure).unwrap().lines().count() > 8);
    assert!(tmp.path().join("c.nt.manifest").is_file());
}

#[test]
fn depth_ten_chain_reaches_hop_eleven() {
    let tmp = TempDir::new().unwrap();
    let kg = tmp.path().join("kg");
    ok(&["synth", "--depth", "10", "--mix", "subclass", "--out", p(&kg)]);
    let hops = tmp.path().join("h.tsv");
    ok(&["entail", "--input", p(&kg.join("0000.nt")), "--output", p(&tmp.path().join("c.nt")), "--hops", p(&hops)]);
    let text = fs::read_to_string(&hops).unwrap();
    let max_hop = text.lines().filter_map(|l| l.rsplit('\t').next()?.parse::<u32>().ok()).max();
    assert_eq!(max_hop, Some(11));
}

#[test]
fn malformed_input_exits_with_parse_code_and_line() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.nt");
    fs::write(&bad, "<http://e/a> <http://e/b> <http://e/c> .\n<http://e/a> <http://e/b> .\n").unwrap();
    let out = rdfmem(&["entail", "--input", p(&bad), "--output", p(&tmp.path().join("c.nt"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&["validate", "--input", p(&bad)]), 2);
    assert_eq!(code(&["validate", "--input", p(&bad), "--lenient"]), 0);
}

#[test]
fn truncated_closure_exits_three_and_keeps_partial_output() {
    let tmp = TempDir::new().unwrap();
    let kg = tmp.path().join("kg");
    ok(&["synth", "--depth", "3", "--out", p(&kg)]);
    let (input, closure) = (kg.join("0000.nt"), tmp.path().join("c.nt"));
    let args = ["entail", "--input", p(&input), "--output", p(&closure), "--max-rounds", "1"];
    assert_eq!(code(&args), 3);
    assert!(closure.is_file());
}

#[test]
fn vocabulary_overflow_exits_four() {
    let tmp = TempDir::new().unwrap();
    let kgs = synth_ontologies(&tmp, "kgs", "1");
    let out = rdfmem(&["build-dataset", "--inputs", p(&kgs), "--out", p(&tmp.path().join("ds")), "--vocab-size", "5"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("only 5 generic tokens"));
}

#[test]
fn unknown_flags_are_rejected() {
    assert_ne!(code(&["train", "--bogus"]), 0);
}

#[test]
fn synth_with_zero_count_writes_only_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("empty");
    ok(&["synth", "--count", "0", "--out", p(&out)]);
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["run_manifest.txt"]);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let tmp = TempDir::new().unwrap();
    let a = synth_ontologies(&tmp, "a", "3");
    let b = synth_ontologies(&tmp, "b", "3");
    assert_eq!(tree(&a), tree(&b));
    assert_eq!(tree(&a).len(), 3);
    let c = tmp.path().join("c");
    ok(&["synth", "--kind", "ontology", "--count", "3", "--seed", "6", "--out", p(&c)]);
    assert_ne!(tree(&a), tree(&c));
}

#[test]
fn build_dataset_is_deterministic_and_typed_mode_is_balanced() {
    let tmp = TempDir::new().unwrap();
    let kgs = synth_ontologies(&tmp, "kgs", "3");
    let build = |name: &str| {
        let out = tmp.path().join(name);
        ok(&["build-dataset", "--inputs", p(&kgs), "--out", p(&out), "--mode", "typed", "--seed", "9"]);
        out
    };
    let (a, b) = (build("a"), build("b"));
    assert_eq!(tree(&a), tree(&b));
    assert!(manifest(&a.join("run_manifest.txt")).same_run(&manifest(&b.join("run_manifest.txt"))));
    for kg in ["0000", "0001", "0002"] {
        let queries = fs::read_to_string(a.join(format!("kg_{kg}")).join("queries.tsv")).unwrap();
        let count = |label: &str| queries.lines().filter(|l| l.split('\t').nth(1) == Some(label)).count();
        assert!(count("yes") > 0);
        assert_eq!(count("yes"), count("no"), "kg {kg}");
    }
}

#[test]
fn rebuilding_into_an_existing_dataset_needs_force() {
    let tmp = TempDir::new().unwrap();
    let kgs = synth_ontologies(&tmp, "kgs", "2");
    let out = tmp.path().join("ds");
    ok(&["build-dataset", "--inputs", p(&kgs), "--out", p(&out)]);
    assert_eq!(code(&["build-dataset", "--inputs", p(&kgs), "--out", p(&out)]), 1);
    fs::remove_file(kgs.join("0001.nt")).unwrap();
    ok(&["build-dataset", "--inputs", p(&kgs), "--out", p(&out), "--force"]);
    assert!(out.join("kg_0000").is_dir());
    assert!(!out.join("kg_0001").exists());
}

#[test]
fn train_and_eval_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let kgs = synth_ontologies(&tmp, "kgs", "3");
    let ds = tmp.path().join("ds");
    ok(&["build-dataset", "--inputs", p(&kgs), "--out", p(&ds), "--max-positives", "40", "--vocab-size", "300"]);
    let train = |name: &str, extra: &[&str]| {
        let ckpt = tmp.path().join(name);
        let mut args = vec!["train", "--dataset", p(&ds), "--out", p(&ckpt), "--k", "2", "--d", "8", "--epochs", "2"];
        args.extend_from_slice(extra);
        ok(&args);
        ckpt
    };
    let (a, b) = (train("a.ckpt", &[]), train("b.ckpt", &[]));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(tmp.path().join("a.ckpt.log.tsv")).unwrap(),
        fs::read(tmp.path().join("b.ckpt.log.tsv")).unwrap()
    );
    let (ma, mb) = (manifest(&tmp.path().join("a.ckpt.manifest")), manifest(&tmp.path().join("b.ckpt.manifest")));
    assert!(ma.same_run(&mb));
    assert_eq!(ma.get("train.d"), Some("8"));
    assert_eq!(ma.get("train.capacity"), Some("1000"));
    assert_eq!(ma.get("train.batch_size"), Some("100"));
    assert_eq!(ma.get("train.pe"), Some("true"));
    let no_pe = train("c.ckpt", &["--no-pe"]);
    assert_eq!(manifest(&tmp.path().join("c.ckpt.manifest")).get("train.pe"), Some("false"));
    assert_ne!(fs::read(&a).unwrap(), fs::read(&no_pe).unwrap());

    let eval = |ckpt: &Path, report: &str| {
        let report = tmp.path().join(report);
        let emb = tmp.path().join(format!("{}.emb", report.display()));
        let pca = tmp.path().join(format!("{}.pca", report.display()));
        ok(&[
            "eval", "--dataset", p(&ds), "--ckpt", p(ckpt), "--report", p(&report), "--per-hop",
            "--export-embeddings", p(&emb), "--pca", p(&pca),
        ]);
        (report, emb, pca)
    };
    let (ra, ea, pa) = eval(&a, "ra.tsv");
    let (rb, eb, pb) = eval(&b, "rb.tsv");
    for (x, y) in [(&ra, &rb), (&ea, &eb), (&pa, &pb)] {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
    // Header plus one row per vocabulary token: 3 specials, 30 reserved, 300 generic.
    assert_eq!(fs::read_to_string(&ea).unwrap().lines().count(), 1 + 333);
    let hops = fs::read_to_string(format!("{}.hops.tsv", ra.display())).unwrap();
    assert!(hops.lines().skip(2).count() >= 2);

    let deltas = ok(&["compare", "--a", p(&ra), "--b", p(&rb)]);
    let text = String::from_utf8(deltas.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with("+0.000000")));

    let other = tmp.path().join("other");
    ok(&["build-dataset", "--inputs", p(&kgs), "--out", p(&other), "--seed", "1", "--vocab-size", "300"]);
    let rc = tmp.path().join("rc.tsv");
    ok(&["eval", "--dataset", p(&other), "--ckpt", p(&a), "--report", p(&rc)]);
    assert_eq!(code(&["compare", "--a", p(&ra), "--b", p(&rc)]), 1);
}
