//! Two-component PCA by power iteration with deflation.

use crate::error::EvalError;
use crate::tensor::{dot, Matrix};

const MAX_ITERATIONS: usize = 100_000;
const TOLERANCE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    /// Unit principal axes; the largest-magnitude loading of each is positive.
    pub components: [Vec<f64>; 2],
    /// Variances along each axis (eigenvalues of the sample covariance).
    pub variances: [f64; 2],
    /// Centered rows projected onto the axes (n × 2).
    pub projected: Matrix,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn fix_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Removes the components of `v` along each of `basis` (unit vectors).
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Dominant eigenvector of symmetric `c` restricted to the complement of `found`.
fn dominant(c: &Matrix, found: &[Vec<f64>]) -> Result<(Vec<f64>, f64), EvalError> {
    let d = c.rows();
    // Fixed, non-symmetric start so no axis is systematically orthogonal to it.
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + (i as f64 + 1.0).sqrt().fract()).collect();
    orthogonalize(&mut v, found);
    if normalize(&mut v) == 0.0 {
        return Ok((unit_complement(d, found), 0.0));
    }
    for _ in 0..MAX_ITERATIONS {
        let mut w = c.matvec(&v).expect("square covariance");
        orthogonalize(&mut w, found);
        let lambda = dot(&w, &v);
        if normalize(&mut w) <= f64::EPSILON * (1.0 + lambda.abs()) {
            // The remaining spectrum is zero; any complement axis will do.
            return Ok((unit_complement(d, found), 0.0));
        }
        if lambda < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
        let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < TOLERANCE {
            let cv = c.matvec(&v).expect("square covariance");
            return Ok((v.clone(), dot(&cv, &v)));
        }
    }
    Err(EvalError::ConvergenceFailure {
        iterations: MAX_ITERATIONS,
    })
}

fn unit_complement(d: usize, found: &[Vec<f64>]) -> Vec<f64> {
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        orthogonalize(&mut e, found);
        if normalize(&mut e) > 1e-8 {
            return e;
        }
    }
    vec![0.0; d]
}

/// Projects the rows of `x` (n × d, d ≥ 2) onto their two principal axes.
pub fn pca_2d(x: &Matrix) -> Result<Pca, EvalError> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(EvalError::TooFewRows(n));
    }
    assert!(d >= 2, "PCA needs at least two columns");
    let mut mean = vec![0.0; d];
    for r in 0..n {
        mean.iter_mut().zip(x.row(r)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = x.clone();
    for r in 0..n {
        centered.row_mut(r).iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }
    let mut cov = Matrix::zeros(d, d);
    for r in 0..n {
        let row = centered.row(r);
        for i in 0..d {
            for j in i..d {
                let v = cov.get(i, j) + row[i] * row[j];
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / (n - 1) as f64;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    let (mut a, la) = dominant(&cov, &[])?;
    fix_sign(&mut a);
    let (mut b, lb) = dominant(&cov, std::slice::from_ref(&a))?;
    fix_sign(&mut b);
    let mut projected = Matrix::zeros(n, 2);
    for r in 0..n {
        projected.set(r, 0, dot(centered.row(r), &a));
        projected.set(r, 1, dot(centered.row(r), &b));
    }
    Ok(Pca {
        components: [a, b],
        variances: [la, lb],
        projected,
    })
}
