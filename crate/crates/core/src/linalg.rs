//! Dense complex solves with a residual check and a cheap conditioning
//! estimate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Result of a dense solve.
#[derive(Debug, Clone)]
pub struct Solved {
    pub x: CVector,
    /// `‖Ax − b‖∞ / ‖b‖∞` (0 for a zero right-hand side).
    pub residual: f64,
    /// Lower bound on the 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`, from
    /// `‖A⁻¹v‖₁/‖v‖₁` over the right-hand side and one fixed probe vector.
    pub condition: f64,
}

fn norm1(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

fn norm_inf(v: &CVector) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn matrix_norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU solve with partial pivoting. `lambda` only labels errors.
pub fn solve_dense(a: &CMatrix, b: &CVector, lambda: f64) -> Result<Solved> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Mismatch {
            context: "dense solve",
            expected: n,
            got: b.len(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("system matrix at lambda = {lambda} nm"),
        });
    }
    let lu = a.clone().lu();
    let anorm = matrix_norm1(a);
    let singular = || Error::Singular {
        lambda,
        cond: f64::INFINITY,
    };
    let x = lu.solve(b).ok_or_else(singular)?;
    // Alternating-sign probe with growing magnitude, in the spirit of the
    // LAPACK estimators, to catch ill-conditioning the data vector misses.
    let probe = CVector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
    });
    let y = lu.solve(&probe).ok_or_else(singular)?;
    let mut inv_norm = norm1(&y) / norm1(&probe);
    let bnorm = norm1(b);
    if bnorm > 0.0 {
        inv_norm = inv_norm.max(norm1(&x) / bnorm);
    }
    let condition = anorm * inv_norm;
    if !condition.is_finite() || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular {
            lambda,
            cond: condition,
        });
    }
    let r = a * &x - b;
    let binf = norm_inf(b);
    let residual = if binf > 0.0 { norm_inf(&r) / binf } else { norm_inf(&r) };
    Ok(Solved {
        x,
        residual,
        condition,
    })
}
