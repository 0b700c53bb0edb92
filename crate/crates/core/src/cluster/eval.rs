use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use super::ward::Dendrogram;
use crate::error::{Error, Result};
use crate::numeric::squared_euclidean;

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// Sum of squared distances from each point to its cluster mean.
pub fn wcss<P: AsRef<[f64]>>(points: &[P], labels: &[usize]) -> Result<f64> {
    check_lengths(points.len(), labels.len())?;
    if points.is_empty() {
        return Ok(0.0);
    }
    let dim = points[0].as_ref().len();
    let mut sums: HashMap<usize, (Vec<f64>, usize)> = HashMap::new();
    for (p, &l) in points.iter().zip(labels) {
        let entry = sums.entry(l).or_insert_with(|| (vec![0.0; dim], 0));
        entry.1 += 1;
        for (s, x) in entry.0.iter_mut().zip(p.as_ref()) {
            *s += x;
        }
    }
    let means: HashMap<usize, Vec<f64>> = sums
        .into_iter()
        .map(|(l, (s, c))| (l, s.into_iter().map(|x| x / c as f64).collect()))
        .collect();
    Ok(points
        .iter()
        .zip(labels)
        .map(|(p, l)| squared_euclidean(p.as_ref(), &means[l]))
        .sum())
}

/// Mean silhouette under Euclidean distance; singleton clusters score 0.
pub fn silhouette<P: AsRef<[f64]>>(points: &[P], labels: &[usize]) -> Result<f64> {
    check_lengths(points.len(), labels.len())?;
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let slot: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut sizes = vec![0usize; ids.len()];
    for l in labels {
        sizes[slot[l]] += 1;
    }
    let n = points.len();
    let mut total = 0.0;
    let mut sum_to = vec![0.0; ids.len()];
    for i in 0..n {
        let own = slot[&labels[i]];
        if sizes[own] == 1 {
            continue;
        }
        sum_to.fill(0.0);
        for j in 0..n {
            if i != j {
                sum_to[slot[&labels[j]]] +=
                    squared_euclidean(points[i].as_ref(), points[j].as_ref()).sqrt();
            }
        }
        let a = sum_to[own] / (sizes[own] - 1) as f64;
        let b = (0..ids.len())
            .filter(|&c| c != own)
            .map(|c| sum_to[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

fn pairs(x: usize) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Permutation-adjusted Rand index. Two trivial partitions score 1.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(
    labels_a: &[A],
    labels_b: &[B],
) -> Result<f64> {
    check_lengths(labels_a.len(), labels_b.len())?;
    let mut table: HashMap<(&A, &B), usize> = HashMap::new();
    let mut rows: HashMap<&A, usize> = HashMap::new();
    let mut cols: HashMap<&B, usize> = HashMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        *table.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(labels_a.len());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KDiagnostics {
    pub k: usize,
    pub wcss: f64,
    pub silhouette: Option<f64>,
    /// Percent reduction in WCSS relative to the previous row.
    pub marginal_pct: Option<f64>,
}

/// WCSS and silhouette for each `k` by cutting one dendrogram.
pub fn k_selection<P: AsRef<[f64]>>(
    points: &[P],
    dendrogram: &Dendrogram,
    ks: &[usize],
) -> Result<Vec<KDiagnostics>> {
    let mut out: Vec<KDiagnostics> = Vec::with_capacity(ks.len());
    for &k in ks {
        let labels = dendrogram.cut(k)?;
        let w = wcss(points, &labels)?;
        let s = if k >= 2 {
            Some(silhouette(points, &labels)?)
        } else {
            None
        };
        let marginal_pct = out
            .last()
            .filter(|prev| prev.wcss > 0.0)
            .map(|prev| 100.0 * (prev.wcss - w) / prev.wcss);
        out.push(KDiagnostics {
            k,
            wcss: w,
            silhouette: s,
            marginal_pct,
        });
    }
    Ok(out)
}
