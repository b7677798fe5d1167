//! Run manifests: sorted `key=value` lines describing one invocation.
//! The `wall_time_s` entry is the only field allowed to differ between
//! reruns that must produce identical outputs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

pub const WALL_TIME_KEY: &str = "wall_time_s";
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunManifest {
    pub entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        let mut m = RunManifest::default();
        m.set("subcommand", subcommand);
        m.set("seed", seed);
        m.set("toolkit_version", TOOLKIT_VERSION);
        m
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        let key = key.into();
        let value = value.to_string();
        assert!(!key.contains(['=', '\n']) && !value.contains('\n'), "unencodable manifest entry");
        self.entries.insert(key, value);
    }

    pub fn extend(&mut self, prefix: &str, map: &BTreeMap<String, String>) {
        for (k, v) in map {
            self.set(format!("{prefix}{k}"), v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut m = RunManifest::default();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            m.entries.insert(k.to_string(), v.to_string());
        }
        Ok(m)
    }

    /// Equality ignoring wall time.
    pub fn same_run(&self, other: &RunManifest) -> bool {
        let strip = |m: &RunManifest| {
            let mut e = m.entries.clone();
            e.remove(WALL_TIME_KEY);
            e
        };
        strip(self) == strip(other)
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_text())
    }
}

/// Hex sha256 of a file's bytes.
pub fn file_hash(path: &Path) -> io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}
