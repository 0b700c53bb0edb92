use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::rank::{midranks, tie_term};
use super::TestResult;
use crate::error::{Error, Result};

fn chi2_sf(statistic: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(statistic.max(0.0)).clamp(0.0, 1.0)
}

/// Pearson chi-square test of independence on an `r x c` table of counts.
pub fn chi_square_independence(table: &[Vec<f64>]) -> Result<TestResult> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least a 2x2 table, got {rows}x{cols}"
        )));
    }
    if let Some(bad) = table.iter().find(|r| r.len() != cols) {
        return Err(Error::LengthMismatch {
            left: bad.len(),
            right: cols,
        });
    }
    if table.iter().flatten().any(|&c| !c.is_finite() || c < 0.0) {
        return Err(Error::InvalidParameter(
            "counts must be finite and non-negative".into(),
        ));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    if row_sums.iter().chain(&col_sums).any(|&m| m == 0.0) {
        return Err(Error::ZeroMarginal);
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    let dof = (rows - 1) * (cols - 1);
    Ok(TestResult {
        statistic,
        p_value: chi2_sf(statistic, dof),
        dof: Some(dof),
        effect_direction: None,
    })
}

/// Kruskal-Wallis H with tie correction.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameter("need at least two groups".into()));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::EmptyInput);
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len();
    if n < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: n });
    }
    let ranks = midranks(&pooled)?;
    let nf = n as f64;
    let correction = 1.0 - tie_term(&pooled) / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Err(Error::AllIdentical);
    }
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = ((12.0 / (nf * (nf + 1.0)) * sum - 3.0 * (nf + 1.0)) / correction).max(0.0);
    let dof = groups.len() - 1;
    Ok(TestResult {
        statistic: h,
        p_value: chi2_sf(h, dof),
        dof: Some(dof),
        effect_direction: None,
    })
}

/// Mann-Whitney U (reported as the smaller of the two U values) with a
/// tie-corrected, continuity-corrected normal approximation.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    let u_b = na * nb - u_a;
    let mu = na * nb / 2.0;
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_term(&pooled) / (n * (n - 1.0)));
    let p_value = if variance > 0.0 {
        let z = ((u_a - mu).abs() - 0.5).max(0.0) / variance.sqrt();
        (2.0 * Normal::standard().sf(z)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let direction = if u_a > mu {
        1
    } else if u_a < mu {
        -1
    } else {
        0
    };
    Ok(TestResult {
        statistic: u_a.min(u_b),
        p_value,
        dof: None,
        effect_direction: Some(direction),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_cases() {
        let r = chi_square_independence(&[vec![10.0, 10.0], vec![10.0, 10.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = chi_square_independence(&[vec![20.0, 0.0], vec![0.0, 20.0]]).unwrap();
        assert!((r.statistic - 40.0).abs() < 1e-12);
        assert_eq!(r.dof, Some(1));
        let big = vec![vec![5.0, 7.0, 9.0]; 11];
        assert_eq!(chi_square_independence(&big).unwrap().dof, Some(20));
        assert!(matches!(
            chi_square_independence(&[vec![0.0, 0.0], vec![1.0, 2.0]]),
            Err(Error::ZeroMarginal)
        ));
    }

    #[test]
    fn chi_square_transpose_invariant() {
        let t = vec![vec![12.0, 5.0, 9.0], vec![3.0, 14.0, 8.0]];
        let tt: Vec<Vec<f64>> = (0..3).map(|j| t.iter().map(|r| r[j]).collect()).collect();
        let a = chi_square_independence(&t).unwrap();
        let b = chi_square_independence(&tt).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-12);
        assert_eq!(a.dof, b.dof);
    }

    #[test]
    fn kruskal_cases() {
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert!((r.statistic - 27.0 / 7.0).abs() < 1e-12);
        assert_eq!(r.dof, Some(1));
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(matches!(
            kruskal_wallis(&[vec![1.0; 3], vec![1.0; 3]]),
            Err(Error::AllIdentical)
        ));
        assert!(kruskal_wallis(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn mann_whitney_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.statistic, 8.0);
        assert_eq!(r.p_value, 1.0);
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.effect_direction, Some(-1));
        assert_eq!(mann_whitney_u(&[5.0; 3], &[5.0; 3]).unwrap().p_value, 1.0);
    }
}
