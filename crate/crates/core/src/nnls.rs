//! Non-negative least squares by the Lawson–Hanson active-set method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of `min ‖A x − b‖₂` subject to `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// `‖A x − b‖₂`.
    pub residual_norm: f64,
    /// `max_j |min(x_j, g_j)| / max(‖Aᵀ b‖∞, tiny)` with `g = Aᵀ(A x − b)`;
    /// zero exactly at a KKT point.
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// Solve the NNLS problem. `max_iter` bounds the number of outer
/// (column-adding) iterations; `3 · ncols` is ample in practice.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> Result<NnlsSolution> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(Error::Mismatch {
            context: "nnls right-hand side",
            expected: rows,
            got: b.len(),
        });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "nnls input".into(),
        });
    }
    let norm1 = (0..cols).map(|j| a.column(j).abs().sum()).fold(0.0, f64::max);
    let tol = 10.0 * f64::EPSILON * norm1 * rows.max(cols) as f64;

    let mut x = DVector::<f64>::zeros(cols);
    let mut passive = vec![false; cols];
    let mut w = a.tr_mul(&(b - a * &x));
    let mut iterations = 0;
    while iterations < max_iter {
        let candidate = (0..cols)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        iterations += 1;
        loop {
            let s = passive_solve(a, b, &passive);
            let blocking: Vec<usize> = (0..cols).filter(|&i| passive[i] && s[i] <= tol).collect();
            if blocking.is_empty() {
                x = s;
                break;
            }
            let alpha = blocking
                .iter()
                .map(|&i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            for i in 0..cols {
                if passive[i] {
                    x[i] += alpha * (s[i] - x[i]);
                    if x[i] <= tol {
                        x[i] = 0.0;
                        passive[i] = false;
                    }
                }
            }
        }
        w = a.tr_mul(&(b - a * &x));
    }

    let residual = a * &x - b;
    let grad = a.tr_mul(&residual);
    let scale = a.tr_mul(b).amax().max(f64::MIN_POSITIVE);
    let kkt = x
        .iter()
        .zip(grad.iter())
        .map(|(xi, gi)| xi.min(*gi).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(NnlsSolution {
        x: x.iter().copied().collect(),
        residual_norm: residual.norm(),
        kkt_residual: kkt,
        iterations,
    })
}

/// Unconstrained least squares on the passive columns, zero elsewhere.
fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = a.select_columns(&idx);
    let svd = sub.svd(true, true);
    let eps = f64::EPSILON * svd.singular_values.max() * a.nrows().max(idx.len()) as f64;
    let sol = svd.solve(b, eps).expect("both singular-vector sets were computed");
    let mut s = DVector::zeros(passive.len());
    for (k, &i) in idx.iter().enumerate() {
        s[i] = sol[k];
    }
    s
}
