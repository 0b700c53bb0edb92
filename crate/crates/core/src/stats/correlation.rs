use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::rank::midranks;
use crate::error::{Error, Result};
use crate::numeric::mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a correlation via the t approximation.
fn correlation_p(r: f64, dof: usize) -> f64 {
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r * (dof as f64 / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

fn check(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::TooShort {
            needed: min,
            got: x.len(),
        });
    }
    Ok(())
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check(x, y, 3)?;
    let rho = pearson(&midranks(x)?, &midranks(y)?).ok_or(Error::ConstantInput)?;
    Ok(Correlation {
        rho,
        p_value: correlation_p(rho, x.len() - 2),
        n: x.len(),
    })
}

/// Spearman correlation of `x` and `y` controlling for `z`.
pub fn partial_spearman(x: &[f64], y: &[f64], z: &[f64]) -> Result<Correlation> {
    check(x, y, 4)?;
    check(x, z, 4)?;
    let (rx, ry, rz) = (midranks(x)?, midranks(y)?, midranks(z)?);
    let r_xy = pearson(&rx, &ry).ok_or(Error::ConstantInput)?;
    let r_xz = pearson(&rx, &rz).ok_or(Error::ConstantInput)?;
    let r_yz = pearson(&ry, &rz).ok_or(Error::ConstantInput)?;
    let denom = (1.0 - r_xz * r_xz) * (1.0 - r_yz * r_yz);
    if denom <= 1e-24 {
        return Err(Error::DegenerateControl);
    }
    let rho = ((r_xy - r_xz * r_yz) / denom.sqrt()).clamp(-1.0, 1.0);
    Ok(Correlation {
        rho,
        p_value: correlation_p(rho, x.len() - 3),
        n: x.len(),
    })
}
