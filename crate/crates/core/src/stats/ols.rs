use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::pop_std;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub intercept: f64,
    /// One per predictor column, in input order.
    pub coefficients: Vec<f64>,
    pub standardized_betas: Vec<f64>,
    pub t_values: Vec<f64>,
    pub r_squared: f64,
    pub vif: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Relative size below which an R diagonal marks a dependent column.
const RANK_TOLERANCE: f64 = 1e-10;

struct CoreFit {
    beta: DVector<f64>,
    residuals: DVector<f64>,
    r_inv: DMatrix<f64>,
    r_squared: f64,
}

fn design(columns: &[&[f64]], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, columns.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            columns[j - 1][i]
        }
    })
}

fn fit_core(columns: &[&[f64]], y: &[f64]) -> Result<CoreFit> {
    let n = y.len();
    let x = design(columns, n);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let deficient: Vec<usize> = (1..r.ncols())
        .filter(|&j| r[(j, j)].abs() <= RANK_TOLERANCE * scale)
        .map(|j| j - 1)
        .collect();
    if !deficient.is_empty() || scale == 0.0 {
        return Err(Error::RankDeficient { columns: deficient });
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient {
        columns: Vec::new(),
    })?;
    let residuals = &yv - &x * &beta;
    let y_mean = yv.mean();
    let tss: f64 = yv.iter().map(|v| (v - y_mean).powi(2)).sum();
    let rss = residuals.norm_squared();
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let identity = DMatrix::<f64>::identity(r.nrows(), r.ncols());
    let r_inv = r
        .solve_upper_triangular(&identity)
        .ok_or(Error::RankDeficient {
            columns: Vec::new(),
        })?;
    Ok(CoreFit {
        beta,
        residuals,
        r_inv,
        r_squared,
    })
}

/// Fits `y ~ 1 + columns` through a Householder QR decomposition.
///
/// VIF for predictor `j` is `1 / (1 - R²_j)` from regressing it on the others.
pub fn ols_fit(columns: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    let p = columns.len();
    if p == 0 {
        return Err(Error::InvalidParameter(
            "at least one predictor required".into(),
        ));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::LengthMismatch {
            left: c.len(),
            right: n,
        });
    }
    if n <= p + 1 {
        return Err(Error::TooFewPoints {
            needed: p + 2,
            got: n,
        });
    }
    let cols: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    let core = fit_core(&cols, y)?;

    let dof = (n - p - 1) as f64;
    let sigma2 = core.residuals.norm_squared() / dof;
    let y_std = pop_std(y);
    let mut coefficients = Vec::with_capacity(p);
    let mut standardized_betas = Vec::with_capacity(p);
    let mut t_values = Vec::with_capacity(p);
    for (j, column) in columns.iter().enumerate() {
        let b = core.beta[j + 1];
        // diag((X'X)^-1) = row norms of R^-1
        let se = (sigma2 * core.r_inv.row(j + 1).norm_squared()).sqrt();
        coefficients.push(b);
        standardized_betas.push(if y_std > 0.0 {
            b * pop_std(column) / y_std
        } else {
            0.0
        });
        t_values.push(b / se);
    }

    let vif = if p == 1 {
        vec![1.0]
    } else {
        (0..p)
            .map(|j| {
                let others: Vec<&[f64]> = (0..p).filter(|&k| k != j).map(|k| cols[k]).collect();
                let r2 = fit_core(&others, cols[j])?.r_squared;
                Ok(if r2 < 1.0 {
                    1.0 / (1.0 - r2)
                } else {
                    f64::INFINITY
                })
            })
            .collect::<Result<Vec<_>>>()?
    };

    Ok(OlsFit {
        intercept: core.beta[0],
        coefficients,
        standardized_betas,
        t_values,
        r_squared: core.r_squared,
        vif,
        residuals: core.residuals.iter().copied().collect(),
    })
}
