//! Checkpoint layout:
//!
//! ```text
//! rdfmem-checkpoint 1
//! key=value            (header lines, sorted by key)
//! tokens <n>           (then n token lines; n may be 0)
//! tensor <name> <rows> <cols> <sha256 of payload>
//! <rows*cols little-endian f64>\n
//! ...
//! end
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::Matrix;
use crate::error::ModelError;

pub const CHECKPOINT_MAGIC: &str = "rdfmem-checkpoint 1";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub header: BTreeMap<String, String>,
    /// Vocabulary tokens, when the vocabulary is not implied by the header.
    pub tokens: Vec<String>,
    pub tensors: Vec<(String, Matrix)>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC.as_bytes());
        out.push(b'\n');
        for (k, v) in &self.header {
            assert!(!k.contains(['=', '\n']) && !v.contains('\n'), "unencodable header entry");
            out.extend_from_slice(format!("{k}={v}\n").as_bytes());
        }
        out.extend_from_slice(format!("tokens {}\n", self.tokens.len()).as_bytes());
        for t in &self.tokens {
            assert!(!t.contains('\n'), "token with newline");
            out.extend_from_slice(t.as_bytes());
            out.push(b'\n');
        }
        for (name, m) in &self.tensors {
            assert!(!name.contains([' ', '\n']), "tensor names are single words");
            let payload: Vec<u8> = m.data().iter().flat_map(|x| x.to_le_bytes()).collect();
            let sum = hex::encode(Sha256::digest(&payload));
            out.extend_from_slice(format!("tensor {name} {} {} {sum}\n", m.rows(), m.cols()).as_bytes());
            out.extend_from_slice(&payload);
            out.push(b'\n');
        }
        out.extend_from_slice(b"end\n");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        let mut pos = 0usize;
        let line = |pos: &mut usize| -> Result<&str, String> {
            let rest = &bytes[*pos..];
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or("unexpected end of checkpoint")?;
            *pos += end + 1;
            std::str::from_utf8(&rest[..end]).map_err(|_| "header is not UTF-8".to_string())
        };
        if line(&mut pos)? != CHECKPOINT_MAGIC {
            return Err("not a checkpoint (bad magic line)".into());
        }
        let mut ck = Checkpoint::default();
        let n_tokens = loop {
            let l = line(&mut pos)?;
            if let Some(n) = l.strip_prefix("tokens ") {
                break n.parse::<usize>().map_err(|_| format!("bad token count {n:?}"))?;
            }
            let (k, v) = l.split_once('=').ok_or_else(|| format!("bad header line {l:?}"))?;
            ck.header.insert(k.to_string(), v.to_string());
        };
        for _ in 0..n_tokens {
            ck.tokens.push(line(&mut pos)?.to_string());
        }
        loop {
            let l = line(&mut pos)?.to_string();
            if l == "end" {
                break;
            }
            let parts: Vec<&str> = l.split(' ').collect();
            let ["tensor", name, rows, cols, sum] = parts.as_slice() else {
                return Err(format!("bad tensor line {l:?}"));
            };
            let rows: usize = rows.parse().map_err(|_| format!("bad rows in {l:?}"))?;
            let cols: usize = cols.parse().map_err(|_| format!("bad cols in {l:?}"))?;
            let len = rows * cols * 8;
            if bytes.len() < pos + len + 1 || bytes[pos + len] != b'\n' {
                return Err(format!("truncated payload for tensor {name}"));
            }
            let payload = &bytes[pos..pos + len];
            if hex::encode(Sha256::digest(payload)) != *sum {
                return Err(format!("checksum mismatch for tensor {name}"));
            }
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            pos += len + 1;
            let m = Matrix::from_vec(rows, cols, data).map_err(|e| e.to_string())?;
            ck.tensors.push((name.to_string(), m));
        }
        Ok(ck)
    }

    pub fn tensor(&self, name: &str) -> Option<&Matrix> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

pub fn write_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), ModelError> {
    fs::write(path, ck.to_bytes()).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, ModelError> {
    let bytes = fs::read(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Checkpoint::from_bytes(&bytes).map_err(|reason| ModelError::Checkpoint {
        path: path.to_path_buf(),
        reason,
    })
}
