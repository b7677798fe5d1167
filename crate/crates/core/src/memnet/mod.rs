//! End-to-end memory network over normalized triples.
//!
//! Parameters are K+1 embedding matrices `E_0 … E_K` (V×d) with adjacent
//! sharing: the query embedding is `E_0`, hop k reads memory through `E_{k-1}`
//! and writes through `E_k`, and the classifier is `E_K` applied to the final
//! state. Every reduction over samples or slots runs in a fixed order, so
//! results do not depend on the number of worker threads.

mod train;

pub use train::{dataset_loss, encode_dataset, train, EncodedKg, EncodedSample, EpochLog, TrainConfig};

use rayon::prelude::*;

use crate::dataset::Label;
use crate::error::ModelError;
use crate::normalize::{Vocab, VocabKind, NO_INDEX, PAD_INDEX, YES_INDEX};
use crate::seed::derive_seed;
use crate::tensor::{axpy, cross_entropy, dot, gaussian_init, softmax, Checkpoint, Matrix};

pub type TokenIds = [u32; 3];

pub const DEFAULT_CAPACITY: usize = 1000;

/// Per-position weights `l_j`, one length-d column per triple position.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionWeights {
    pub columns: [Vec<f64>; 3],
}

/// `l[j][k] = (1 − j/3) − (k/d)(1 − 2j/3)` for 1-based j, k; all ones without PE.
pub fn position_weights(d: usize, pe: bool) -> PositionWeights {
    assert!(d >= 1, "d must be positive");
    let column = |j: usize| -> Vec<f64> {
        (1..=d)
            .map(|k| {
                if pe {
                    let (j, k, d) = (j as f64, k as f64, d as f64);
                    (1.0 - j / 3.0) - (k / d) * (1.0 - 2.0 * j / 3.0)
                } else {
                    1.0
                }
            })
            .collect()
    };
    PositionWeights {
        columns: [column(1), column(2), column(3)],
    }
}

/// `Σ_j l_j ∘ E[tokens_j]`.
pub fn encode_triple(tokens: &TokenIds, e: &Matrix, l: &PositionWeights) -> Vec<f64> {
    let mut out = vec![0.0; e.cols()];
    add_encoding(tokens, e, l, &mut out);
    out
}

fn add_encoding(tokens: &TokenIds, e: &Matrix, l: &PositionWeights, out: &mut [f64]) {
    for (tok, w) in tokens.iter().zip(&l.columns) {
        for ((o, x), wk) in out.iter_mut().zip(e.row(*tok as usize)).zip(w) {
            *o += wk * x;
        }
    }
}

/// `dE[tokens_j] += l_j ∘ grad`.
fn scatter_encoding(tokens: &TokenIds, grad: &[f64], l: &PositionWeights, de: &mut Matrix) {
    for (tok, w) in tokens.iter().zip(&l.columns) {
        for ((g, x), wk) in de.row_mut(*tok as usize).iter_mut().zip(grad).zip(w) {
            *g += wk * x;
        }
    }
}

/// Attention and internal state per hop.
#[derive(Clone, Debug, PartialEq)]
pub struct HopTrace {
    /// `p^k` for k = 1..K.
    pub attention: Vec<Vec<f64>>,
    /// `u^k` for k = 1..K+1.
    pub states: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictMode {
    /// Argmax over the No, Yes and Pad logits only.
    Answers,
    /// Argmax over the whole vocabulary.
    FullVocab,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub token: u32,
    /// `None` when the argmax is not an answer token.
    pub label: Option<Label>,
}

/// Answer tokens in tie-breaking order.
const ANSWER_ORDER: [u32; 3] = [NO_INDEX, YES_INDEX, PAD_INDEX];

fn argmax_answer(logits: &[f64], mode: PredictMode) -> Prediction {
    let mut best = ANSWER_ORDER[0];
    for &t in &ANSWER_ORDER[1..] {
        if logits[t as usize] > logits[best as usize] {
            best = t;
        }
    }
    if mode == PredictMode::FullVocab {
        for (t, &x) in logits.iter().enumerate() {
            if x > logits[best as usize] {
                best = t as u32;
            }
        }
    }
    Prediction {
        token: best,
        label: Label::from_token_index(best),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub d: usize,
    pub k: usize,
    pub pe: bool,
    pub capacity: usize,
    /// `E_0 … E_K`.
    pub emb: Vec<Matrix>,
    weights: PositionWeights,
}

/// Memory encodings under every embedding: `enc[m]` row i = encode(slot i, E_m).
struct MemoryEnc {
    enc: Vec<Matrix>,
}

/// Everything backpropagation needs from one forward pass.
struct Pass {
    states: Vec<Vec<f64>>,
    attention: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

/// Per-sample backward quantities, reduced in sample order afterwards.
struct SampleGrad {
    loss: f64,
    correct: bool,
    dlogits: Vec<f64>,
    /// u^k for k = 1..K+1.
    states: Vec<Vec<f64>>,
    /// p^k per hop.
    attention: Vec<Vec<f64>>,
    /// dL/d o^k per hop.
    dout: Vec<Vec<f64>>,
    /// dL/d a^k (pre-softmax scores) per hop.
    dscore: Vec<Vec<f64>>,
    dquery: Vec<f64>,
}

/// Loss, gradients and correctness of one batch.
pub struct BatchGrads {
    pub loss: f64,
    pub grads: Vec<Matrix>,
    pub correct: usize,
}

impl Model {
    /// Gaussian initialization of every embedding matrix.
    pub fn init(vocab_size: usize, d: usize, k: usize, pe: bool, sigma: f64, seed: u64) -> Self {
        assert!(k >= 1 && d >= 1 && vocab_size >= 3, "invalid model shape");
        let emb = (0..=k)
            .map(|m| gaussian_init(vocab_size, d, 0.0, sigma, derive_seed(seed, "model", &format!("E{m}"))))
            .collect();
        Model {
            d,
            k,
            pe,
            capacity: DEFAULT_CAPACITY,
            emb,
            weights: position_weights(d, pe),
        }
    }

    pub fn from_embeddings(emb: Vec<Matrix>, pe: bool) -> Self {
        assert!(emb.len() >= 2, "need at least E_0 and E_1");
        let (v, d) = emb[0].shape();
        assert!(emb.iter().all(|e| e.shape() == (v, d)), "embedding shapes differ");
        Model {
            d,
            k: emb.len() - 1,
            pe,
            capacity: DEFAULT_CAPACITY,
            emb,
            weights: position_weights(d, pe),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.emb[0].rows()
    }

    pub fn position_weights(&self) -> &PositionWeights {
        &self.weights
    }

    fn check_tokens(&self, t: &TokenIds) -> Result<(), ModelError> {
        let v = self.vocab_size();
        match t.iter().find(|&&x| x as usize >= v) {
            Some(&bad) => Err(ModelError::TokenOutOfRange {
                index: bad as usize,
                vocab: v,
            }),
            None => Ok(()),
        }
    }

    fn check_memory(&self, memory: &[TokenIds]) -> Result<(), ModelError> {
        if memory.is_empty() {
            return Err(ModelError::EmptyMemory);
        }
        if memory.len() > self.capacity {
            return Err(ModelError::CapacityExceeded {
                len: memory.len(),
                capacity: self.capacity,
            });
        }
        memory.iter().try_for_each(|t| self.check_tokens(t))
    }

    fn encode_memory(&self, memory: &[TokenIds]) -> MemoryEnc {
        let enc = self
            .emb
            .iter()
            .map(|e| {
                let mut m = Matrix::zeros(memory.len(), self.d);
                for (i, t) in memory.iter().enumerate() {
                    add_encoding(t, e, &self.weights, m.row_mut(i));
                }
                m
            })
            .collect();
        MemoryEnc { enc }
    }

    fn pass(&self, mem: &MemoryEnc, query: &TokenIds, linear: bool) -> Pass {
        let mut u = encode_triple(query, &self.emb[0], &self.weights);
        let mut states = vec![u.clone()];
        let mut attention = Vec::with_capacity(self.k);
        for hop in 1..=self.k {
            let scores = mem.enc[hop - 1].matvec(&u).expect("state has length d");
            let p = if linear {
                scores
            } else {
                softmax(&scores).expect("finite attention scores")
            };
            let o = mem.enc[hop].matvec_t(&p).expect("attention has one weight per slot");
            axpy(1.0, &o, &mut u);
            states.push(u.clone());
            attention.push(p);
        }
        let logits = self.emb[self.k].matvec(&u).expect("state has length d");
        Pass {
            states,
            attention,
            logits,
        }
    }

    /// Logits over the whole vocabulary and the attention trace.
    pub fn forward(&self, memory: &[TokenIds], query: &TokenIds, linear: bool) -> Result<(Vec<f64>, HopTrace), ModelError> {
        self.check_memory(memory)?;
        self.check_tokens(query)?;
        let mem = self.encode_memory(memory);
        let pass = self.pass(&mem, query, linear);
        Ok((
            pass.logits,
            HopTrace {
                attention: pass.attention,
                states: pass.states,
            },
        ))
    }

    pub fn predict(&self, memory: &[TokenIds], query: &TokenIds, mode: PredictMode) -> Result<(Prediction, HopTrace), ModelError> {
        let (logits, trace) = self.forward(memory, query, false)?;
        Ok((argmax_answer(&logits, mode), trace))
    }

    /// Predictions for many queries against one memory, in query order.
    pub fn predict_many(&self, memory: &[TokenIds], queries: &[TokenIds], mode: PredictMode) -> Result<Vec<Prediction>, ModelError> {
        self.check_memory(memory)?;
        queries.iter().try_for_each(|q| self.check_tokens(q))?;
        let mem = self.encode_memory(memory);
        Ok(queries
            .par_iter()
            .map(|q| argmax_answer(&self.pass(&mem, q, false).logits, mode))
            .collect())
    }

    /// Mean cross-entropy of a batch sharing one memory (forward only).
    pub fn batch_loss(&self, memory: &[TokenIds], batch: &[(TokenIds, u32)], linear: bool) -> Result<f64, ModelError> {
        self.check_memory(memory)?;
        for (q, target) in batch {
            self.check_tokens(q)?;
            self.check_tokens(&[*target; 3])?;
        }
        let mem = self.encode_memory(memory);
        let losses: Vec<f64> = batch
            .par_iter()
            .map(|(q, target)| {
                let logits = self.pass(&mem, q, linear).logits;
                cross_entropy(&logits, *target as usize).expect("finite logits").0
            })
            .collect();
        Ok(losses.iter().sum::<f64>() / batch.len() as f64)
    }

    fn backward_sample(&self, mem: &MemoryEnc, query: &TokenIds, target: u32, linear: bool, scale: f64) -> SampleGrad {
        let pass = self.pass(mem, query, linear);
        let (loss, mut dlogits) = cross_entropy(&pass.logits, target as usize).expect("finite logits");
        let correct = argmax_answer(&pass.logits, PredictMode::Answers).token == target;
        for g in &mut dlogits {
            *g *= scale;
        }
        let mut du = self.emb[self.k].matvec_t(&dlogits).expect("logits have length V");
        let mut dout = vec![Vec::new(); self.k];
        let mut dscore = vec![Vec::new(); self.k];
        for hop in (1..=self.k).rev() {
            let p = &pass.attention[hop - 1];
            let dp = mem.enc[hop].matvec(&du).expect("gradient has length d");
            let da = if linear {
                dp
            } else {
                let inner = dot(p, &dp);
                p.iter().zip(&dp).map(|(pi, dpi)| pi * (dpi - inner)).collect()
            };
            let back = mem.enc[hop - 1].matvec_t(&da).expect("one score per slot");
            dout[hop - 1] = du.clone();
            axpy(1.0, &back, &mut du);
            dscore[hop - 1] = da;
        }
        SampleGrad {
            loss: loss * scale,
            correct,
            dlogits,
            states: pass.states,
            attention: pass.attention,
            dout,
            dscore,
            dquery: du,
        }
    }

    /// Mean cross-entropy of a batch sharing one memory, and the gradient of
    /// that mean with respect to every `E_m`.
    pub fn loss_and_grads(&self, memory: &[TokenIds], batch: &[(TokenIds, u32)], linear: bool) -> Result<BatchGrads, ModelError> {
        self.check_memory(memory)?;
        assert!(!batch.is_empty(), "batch must not be empty");
        for (q, target) in batch {
            self.check_tokens(q)?;
            self.check_tokens(&[*target; 3])?;
        }
        let mem = self.encode_memory(memory);
        let scale = 1.0 / batch.len() as f64;
        let per_sample: Vec<SampleGrad> = batch
            .par_iter()
            .map(|(q, target)| self.backward_sample(&mem, q, *target, linear, scale))
            .collect();

        let v = self.vocab_size();
        let n = memory.len();
        let mut grads: Vec<Matrix> = (0..=self.k).map(|_| Matrix::zeros(v, self.d)).collect();

        // Classifier rows: dE_K[t] = Σ_b dlogits_b[t] u_b, summed in sample order.
        let d = self.d;
        grads[self.k]
            .data_mut()
            .par_chunks_mut(d)
            .enumerate()
            .for_each(|(t, row)| {
                for s in &per_sample {
                    axpy(s.dlogits[t], &s.states[self.k], row);
                }
            });

        // Slot encodings: enc[m] is the output of hop m and the input of hop m+1.
        for m in 0..=self.k {
            let mut denc = Matrix::zeros(n, d);
            denc.data_mut().par_chunks_mut(d).enumerate().for_each(|(i, row)| {
                for s in &per_sample {
                    if m >= 1 {
                        axpy(s.attention[m - 1][i], &s.dout[m - 1], row);
                    }
                    if m < self.k {
                        axpy(s.dscore[m][i], &s.states[m], row);
                    }
                }
            });
            for (i, t) in memory.iter().enumerate() {
                scatter_encoding(t, denc.row(i), &self.weights, &mut grads[m]);
            }
        }
        for ((q, _), s) in batch.iter().zip(&per_sample) {
            scatter_encoding(q, &s.dquery, &self.weights, &mut grads[0]);
        }
        let loss = per_sample.iter().map(|s| s.loss).sum();
        let correct = per_sample.iter().filter(|s| s.correct).count();
        Ok(BatchGrads { loss, grads, correct })
    }

    pub fn to_checkpoint(&self, vocab: &Vocab) -> Checkpoint {
        assert_eq!(vocab.len(), self.vocab_size(), "vocabulary does not match the model");
        let mut ck = Checkpoint::default();
        let mut put = |k: &str, v: String| {
            ck.header.insert(k.to_string(), v);
        };
        put("d", self.d.to_string());
        put("k", self.k.to_string());
        put("v", self.vocab_size().to_string());
        put("sharing", "adjacent".into());
        put("pe", self.pe.to_string());
        put("capacity", self.capacity.to_string());
        match vocab.kind() {
            VocabKind::Generic { n_generic } => {
                put("normalization", "generic".into());
                put("n_generic", n_generic.to_string());
            }
            VocabKind::Identity => {
                put("normalization", "identity".into());
                ck.tokens = vocab.tokens()[crate::normalize::SPECIALS.len() + crate::rdf::vocab::RESERVED.len()..].to_vec();
            }
        }
        ck.tensors = self
            .emb
            .iter()
            .enumerate()
            .map(|(m, e)| (format!("E{m}"), e.clone()))
            .collect();
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<(Model, Vocab), String> {
        let get = |k: &str| ck.header.get(k).ok_or_else(|| format!("missing header field {k}"));
        let num = |k: &str| -> Result<usize, String> { get(k)?.parse().map_err(|_| format!("bad header field {k}")) };
        let (d, k, v) = (num("d")?, num("k")?, num("v")?);
        if get("sharing")? != "adjacent" {
            return Err("unsupported sharing layout".into());
        }
        let pe: bool = get("pe")?.parse().map_err(|_| "bad header field pe".to_string())?;
        let vocab = match get("normalization")?.as_str() {
            "generic" => crate::normalize::build_vocab(num("n_generic")?),
            "identity" => Vocab::identity(&ck.tokens),
            other => return Err(format!("unknown normalization {other:?}")),
        };
        if vocab.len() != v {
            return Err(format!("vocabulary has {} tokens, header says {v}", vocab.len()));
        }
        let mut emb = Vec::with_capacity(k + 1);
        for m in 0..=k {
            let e = ck.tensor(&format!("E{m}")).ok_or_else(|| format!("missing tensor E{m}"))?;
            if e.shape() != (v, d) {
                return Err(format!("tensor E{m} has shape {:?}, expected ({v}, {d})", e.shape()));
            }
            emb.push(e.clone());
        }
        let mut model = Model::from_embeddings(emb, pe);
        model.capacity = num("capacity")?;
        Ok((model, vocab))
    }
}
