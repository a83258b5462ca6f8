//! Linear SVM trained by dual coordinate descent.
//!
//! One-vs-rest binary classifiers minimizing L2-regularized hinge loss with
//! weight `c`. The solver sweeps the dual coordinates in a fixed cyclic
//! order, so training is deterministic without any RNG; it stops when the
//! largest projected-gradient violation of an epoch drops below `tol`.
//! A constant bias feature is appended internally.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-4,
            max_iter: 10_000,
        }
    }
}

/// Trained one-vs-rest linear classifier.
#[derive(Debug, Clone)]
pub struct SvmModel {
    /// Lexicographically sorted label set.
    pub labels: Vec<String>,
    /// One weight vector per label; the last entry is the bias.
    weights: Vec<Vec<f64>>,
}

impl SvmModel {
    /// Per-label decision values `w . x + b`, in label order.
    pub fn decision(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| {
                let dot: f64 = w[..w.len() - 1]
                    .iter()
                    .zip(row)
                    .map(|(wi, xi)| wi * xi)
                    .sum();
                dot + w[w.len() - 1]
            })
            .collect()
    }

    /// Label with the highest decision value; ties go to the
    /// lexicographically smaller label.
    pub fn predict(&self, row: &[f64]) -> &str {
        let decisions = self.decision(row);
        let mut best = 0;
        for ix in 1..decisions.len() {
            if decisions[ix] > decisions[best] {
                best = ix;
            }
        }
        &self.labels[best]
    }
}

/// Train one-vs-rest linear SVMs. Rows are expected standardized; labels must
/// cover at least two classes and features must be finite.
pub fn train(x: &[Vec<f64>], y: &[String], params: SvmParams) -> Result<SvmModel> {
    assert_eq!(x.len(), y.len());
    for (r, row) in x.iter().enumerate() {
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: r, col: c });
        }
    }
    let mut labels: Vec<String> = y.to_vec();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let weights = labels
        .iter()
        .map(|label| {
            let signs: Vec<f64> = y
                .iter()
                .map(|l| if l == label { 1.0 } else { -1.0 })
                .collect();
            solve_binary(x, &signs, &params)
        })
        .collect();
    Ok(SvmModel { labels, weights })
}

/// Dual coordinate descent for `min 1/2 |w|^2 + C sum max(0, 1 - y w.x)`,
/// with the bias folded in as a constant feature.
fn solve_binary(x: &[Vec<f64>], y: &[f64], params: &SvmParams) -> Vec<f64> {
    let l = x.len();
    let dim = x.first().map_or(0, Vec::len) + 1;
    // Q_ii = |x_i|^2 + 1 (the +1 is the bias feature)
    let q_diag: Vec<f64> = x
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .collect();
    let mut alpha = vec![0.0f64; l];
    let mut w = vec![0.0f64; dim];

    let dot_aug = |w: &[f64], row: &[f64]| -> f64 {
        w[..dim - 1]
            .iter()
            .zip(row)
            .map(|(wi, xi)| wi * xi)
            .sum::<f64>()
            + w[dim - 1]
    };

    for _ in 0..params.max_iter {
        let mut max_violation = 0.0f64;
        for i in 0..l {
            let g = y[i] * dot_aug(&w, &x[i]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == params.c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-12 {
                let new_alpha = (alpha[i] - g / q_diag[i]).clamp(0.0, params.c);
                let delta = (new_alpha - alpha[i]) * y[i];
                if delta != 0.0 {
                    for (wk, xk) in w[..dim - 1].iter_mut().zip(&x[i]) {
                        *wk += delta * xk;
                    }
                    w[dim - 1] += delta;
                }
                alpha[i] = new_alpha;
            }
        }
        if max_violation < params.tol {
            break;
        }
    }
    w
}
