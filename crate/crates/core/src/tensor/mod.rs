//! Dense `f64` kernel for the memory network: shape-checked matrices,
//! stable softmax, cross-entropy, Gaussian init, norm clipping and Adam.

mod checkpoint;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC};

use rand_distr::{Distribution, Normal};

use crate::error::TensorError;
use crate::seed::rng;

/// Row-major dense matrix. A vector is a matrix with one row.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        if data.len() != rows * cols {
            return Err(TensorError::ShapeMismatch {
                op: "from_vec",
                left: (rows, cols),
                right: (1, data.len()),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    fn check_same(&self, other: &Matrix, op: &'static str) -> Result<(), TensorError> {
        if self.shape() != other.shape() {
            return Err(TensorError::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// `self · x` for a vector of length `cols`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, TensorError> {
        if x.len() != self.cols {
            return Err(TensorError::ShapeMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `selfᵀ · y` for a vector of length `rows`.
    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>, TensorError> {
        if y.len() != self.rows {
            return Err(TensorError::ShapeMismatch {
                op: "matvec_t",
                left: self.shape(),
                right: (y.len(), 1),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            axpy(yi, self.row(i), &mut out);
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Matrix) -> Result<(), TensorError> {
        self.check_same(other, "add_assign")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.data {
            *a *= factor;
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha · x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Max-shifted softmax.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>, TensorError> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(TensorError::NonFiniteInput("softmax"));
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    Ok(exp.into_iter().map(|e| e / sum).collect())
}

/// `−log softmax(logits)[target]` and its gradient `softmax − onehot`.
pub fn cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>), TensorError> {
    assert!(target < logits.len(), "target {target} out of range");
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p = softmax(logits)?;
    let log_sum: f64 = logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln() + max;
    let loss = log_sum - logits[target];
    let mut grad = p;
    grad[target] -= 1.0;
    Ok((loss, grad))
}

pub fn global_norm(tensors: &[Matrix]) -> f64 {
    tensors.iter().map(Matrix::norm_sq).sum::<f64>().sqrt()
}

/// Rescales all tensors jointly so their global L2 norm is at most
/// `max_norm`. Returns the norm before clipping.
pub fn clip_global_norm(tensors: &mut [Matrix], max_norm: f64) -> f64 {
    let norm = global_norm(tensors);
    if norm > max_norm {
        let factor = max_norm / norm;
        for t in tensors.iter_mut() {
            t.scale(factor);
        }
    }
    norm
}

/// Seeded `N(mu, sigma²)` samples in row-major order.
pub fn gaussian_init(rows: usize, cols: usize, mu: f64, sigma: f64, seed: u64) -> Matrix {
    assert!(sigma > 0.0, "sigma must be positive");
    let normal = Normal::new(mu, sigma).expect("valid normal parameters");
    let mut rng = rng(seed);
    Matrix {
        rows,
        cols,
        data: (0..rows * cols).map(|_| normal.sample(&mut rng)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl AdamState {
    pub fn new(params: &[Matrix]) -> Self {
        Self::with_hyper(params, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(params: &[Matrix], beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros = || params.iter().map(|p| Matrix::zeros(p.rows, p.cols)).collect();
        AdamState {
            beta1,
            beta2,
            eps,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut [Matrix], grads: &[Matrix], state: &mut AdamState, lr: f64) -> Result<(), TensorError> {
    assert_eq!(params.len(), grads.len(), "one gradient per parameter");
    assert_eq!(params.len(), state.m.len(), "state built for these parameters");
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        p.check_same(g, "adam_step")?;
        p.check_same(m, "adam_step")?;
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for i in 0..p.data.len() {
            let gi = g.data[i];
            m.data[i] = b1 * m.data[i] + (1.0 - b1) * gi;
            v.data[i] = b2 * v.data[i] + (1.0 - b2) * gi * gi;
            let m_hat = m.data[i] / c1;
            let v_hat = v.data[i] / c2;
            p.data[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn softmax_cases() {
        assert!(close(&softmax(&[0.0, 0.0]).unwrap(), &[0.5, 0.5], 1e-15));
        for c in [-50.0, 0.0, 3.5, 700.0] {
            assert!(close(&softmax(&[c, c, c]).unwrap(), &[1.0 / 3.0; 3], 1e-15));
        }
        let p = softmax(&[1000.0, 0.0]).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] < 1e-300);
        assert!(matches!(softmax(&[f64::NAN]), Err(TensorError::NonFiniteInput(_))));
    }

    #[test]
    fn cross_entropy_cases() {
        let (loss, grad) = cross_entropy(&[0.0, 0.0], 0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(grad.iter().sum::<f64>().abs() < 1e-15);
        let (loss, _) = cross_entropy(&[1000.0, 0.0], 1).unwrap();
        assert!((loss - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let logits = [0.3, -1.2, 2.0, 0.7];
        let (_, grad) = cross_entropy(&logits, 2).unwrap();
        let h = 1e-5;
        for i in 0..logits.len() {
            let mut up = logits;
            let mut down = logits;
            up[i] += h;
            down[i] -= h;
            let fd = (cross_entropy(&up, 2).unwrap().0 - cross_entropy(&down, 2).unwrap().0) / (2.0 * h);
            let rel = (fd - grad[i]).abs() / grad[i].abs().max(1e-12);
            assert!(rel <= 1e-6, "coordinate {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn clipping() {
        let mut t = vec![Matrix::from_vec(1, 2, vec![0.0, 80.0]).unwrap()];
        assert_eq!(clip_global_norm(&mut t, 40.0), 80.0);
        assert_eq!(t[0].data(), &[0.0, 40.0]);
        let mut small = vec![Matrix::from_vec(1, 2, vec![3.0, 4.0]).unwrap()];
        clip_global_norm(&mut small, 40.0);
        assert_eq!(small[0].data(), &[3.0, 4.0]);
        let mut zero = vec![Matrix::zeros(2, 2)];
        clip_global_norm(&mut zero, 40.0);
        assert_eq!(zero[0], Matrix::zeros(2, 2));
    }

    #[test]
    fn gaussian_statistics() {
        let m = gaussian_init(1000, 100, 0.0, 0.1, 42);
        let n = m.data().len() as f64;
        let mean = m.data().iter().sum::<f64>() / n;
        let std = (m.data().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() <= 0.002, "mean {mean}");
        assert!((std - 0.1).abs() <= 0.002, "std {std}");
        assert_eq!(m, gaussian_init(1000, 100, 0.0, 0.1, 42));
        assert_ne!(m, gaussian_init(1000, 100, 0.0, 0.1, 43));
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut params = vec![Matrix::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap()];
        let grads = vec![Matrix::from_vec(1, 3, vec![0.5, -2.0, 0.0]).unwrap()];
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 0.01).unwrap();
        assert_eq!(state.step, 1);
        let p = params[0].data();
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] - 1.01).abs() < 1e-9);
        assert_eq!(p[2], 1.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(a.matvec(&[1.0]), Err(TensorError::ShapeMismatch { op: "matvec", .. })));
        let mut b = Matrix::zeros(3, 2);
        assert!(b.add_assign(&a).is_err());
        let mut params = vec![Matrix::zeros(2, 2)];
        let mut state = AdamState::new(&params);
        assert!(adam_step(&mut params, &[Matrix::zeros(1, 2)], &mut state, 0.1).is_err());
        assert_eq!(a.matvec_t(&[1.0, 2.0]).unwrap(), vec![0.0; 3]);
    }
}
