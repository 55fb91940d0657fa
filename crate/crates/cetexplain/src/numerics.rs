//! Dense linear algebra and optimization primitives.
//!
//! Everything downstream (the R-GCN forward/backward passes and the mask
//! optimizer) is built on [`Matrix`], [`AdamState`] and
//! [`finite_diff_grad`]. Values are `f64` throughout; public operations
//! reject non-finite results.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
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

    /// Build from row-major data; rejects length mismatch and non-finite
    /// entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite matrix entry at flat index {bad}"
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Identity matrix.
    pub fn eye(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Uniform random entries in `(-scale, scale)`.
    pub fn random_uniform(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Self {
        Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
    }

    /// Glorot-style init for a weight of shape `(fan_in, fan_out)`.
    pub fn glorot(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        let scale = (6.0 / (fan_in + fan_out) as f64).sqrt();
        Matrix::random_uniform(fan_in, fan_out, scale, rng)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self += scale * other`, shapes must match.
    pub fn add_scaled(&mut self, other: &Matrix, scale: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "add_scaled shapes {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn sq_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn assert_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numeric(format!("non-finite entries in {what}")))
        }
    }
}

/// Standard matrix product; errors on inner-dimension mismatch.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "matmul: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let arow = a.row(i);
        let orow = out.row_mut(i);
        for (k, &aik) in arow.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let brow = b.row(k);
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    out.assert_finite("matmul result")?;
    Ok(out)
}

/// `out[j] += scale * row · w[:, j]` for a single row vector against a weight
/// matrix; the workhorse of message passing.
pub fn accumulate_row_matmul(row: &[f64], w: &Matrix, scale: f64, out: &mut [f64]) {
    debug_assert_eq!(row.len(), w.rows);
    debug_assert_eq!(out.len(), w.cols);
    for (k, &rk) in row.iter().enumerate() {
        let x = scale * rk;
        if x == 0.0 {
            continue;
        }
        let wrow = w.row(k);
        for (o, &wkj) in out.iter_mut().zip(wrow) {
            *o += x * wkj;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Adam optimizer state for one parameter matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Conventional defaults; the learning rate is the caller's choice.
    pub fn new(param_len: usize, lr: f64) -> Self {
        AdamState {
            first_moment: vec![0.0; param_len],
            second_moment: vec![0.0; param_len],
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// In-place Adam update with bias correction.
    pub fn update(&mut self, params: &mut Matrix, grads: &Matrix) -> Result<()> {
        if params.rows != grads.rows || params.cols != grads.cols {
            return Err(Error::Dimension(format!(
                "adam_update shapes {}x{} vs {}x{}",
                params.rows, params.cols, grads.rows, grads.cols
            )));
        }
        if params.len() != self.first_moment.len() {
            return Err(Error::Dimension(format!(
                "adam state tracks {} parameters, got {}",
                self.first_moment.len(),
                params.len()
            )));
        }
        self.step += 1;
        let b1t = 1.0 - self.beta1.powi(self.step as i32);
        let b2t = 1.0 - self.beta2.powi(self.step as i32);
        for idx in 0..params.data.len() {
            let g = grads.data[idx];
            let m = &mut self.first_moment[idx];
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            let v = &mut self.second_moment[idx];
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / b1t;
            let v_hat = *v / b2t;
            params.data[idx] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        params.assert_finite("adam-updated parameters")
    }
}

/// Functional form of the Adam step: returns the updated parameters.
pub fn adam_update(params: &Matrix, grads: &Matrix, state: &mut AdamState) -> Result<Matrix> {
    let mut out = params.clone();
    state.update(&mut out, grads)?;
    Ok(out)
}

/// Central-difference gradient estimate of a scalar function of a matrix.
pub fn finite_diff_grad(
    mut f: impl FnMut(&Matrix) -> Result<f64>,
    x: &Matrix,
    h: f64,
) -> Result<Matrix> {
    let mut grad = Matrix::zeros(x.rows, x.cols);
    let mut probe = x.clone();
    for idx in 0..x.data.len() {
        let orig = probe.data[idx];
        probe.data[idx] = orig + h;
        let fp = f(&probe)?;
        probe.data[idx] = orig - h;
        let fm = f(&probe)?;
        probe.data[idx] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite function value during finite differences at index {idx}"
            )));
        }
        grad.data[idx] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}

/// Elementwise relative-error comparison with an absolute floor, the
/// convention used by every gradient check in the crate.
pub fn max_relative_error(a: &Matrix, b: &Matrix, abs_floor: f64) -> f64 {
    assert_eq!(a.data.len(), b.data.len());
    a.data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let denom = x.abs().max(y.abs()).max(abs_floor);
            (x - y).abs() / denom
        })
        .fold(0.0, f64::max)
}
