use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{ClusterModel, Provenance};
use crate::error::{Error, Result};
use crate::numeric::squared_euclidean;
use crate::repr::dtw_distance;

/// One agglomeration step. Ids below `n` are observations; id `n + s` is the
/// cluster created at step `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub cluster_a: usize,
    pub cluster_b: usize,
    /// Square root of the increase in within-cluster sum of squares.
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    observations: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn observations(&self) -> usize {
        self.observations
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Observation indices of every cluster id, in merge-table numbering.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let n = self.observations;
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = members[m.cluster_a].clone();
            joined.extend_from_slice(&members[m.cluster_b]);
            joined.sort_unstable();
            members.push(joined);
        }
        members
    }

    /// Flat labels after applying the first `n - k` merges.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        cut_labels(self, k)
    }
}

/// Labels are numbered by the smallest observation index in each cluster.
pub fn cut_labels(dendrogram: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let n = dendrogram.observations;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot cut {n} observations into {k} clusters"
        )));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // every cluster id maps to a representative observation
    let mut rep: Vec<usize> = (0..n).collect();
    for m in &dendrogram.merges[..n - k] {
        let (ra, rb) = (
            find(&mut parent, rep[m.cluster_a]),
            find(&mut parent, rep[m.cluster_b]),
        );
        parent[ra.max(rb)] = ra.min(rb);
        rep.push(ra.min(rb));
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = find(&mut parent, i);
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = next;
            next += 1;
        }
        labels.push(label_of_root[r]);
    }
    Ok(labels)
}

fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

/// Ward agglomeration over a condensed matrix of initial merge costs
/// (increase in within-cluster SSE for every pair of singletons).
///
/// Uses the nearest-neighbour chain with the Lance-Williams update, then
/// sorts merges by cost. Nearest-neighbour ties prefer the chain predecessor,
/// then the lowest index.
pub fn ward_linkage_from_dissimilarities(n: usize, mut cost: Vec<f64>) -> Result<Dendrogram> {
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if cost.len() != n * (n - 1) / 2 {
        return Err(Error::InvalidParameter(format!(
            "condensed matrix for {n} points needs {} entries, got {}",
            n * (n - 1) / 2,
            cost.len()
        )));
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    // (slot_a, slot_b, cost, size, algorithm order)
    let mut raw: Vec<(usize, usize, f64, usize)> = Vec::with_capacity(n.saturating_sub(1));

    while raw.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).unwrap());
        }
        loop {
            let a = *chain.last().unwrap();
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let mut best = prev;
            let mut best_cost = prev.map_or(f64::INFINITY, |p| cost[condensed_index(n, a, p)]);
            for b in (0..n).filter(|&b| b != a && active[b]) {
                let c = cost[condensed_index(n, a, b)];
                if c < best_cost || (c == best_cost && best.is_none()) {
                    best = Some(b);
                    best_cost = c;
                }
            }
            let b = best.expect("at least two active clusters");
            if Some(b) == prev {
                chain.pop();
                chain.pop();
                let (lo, hi) = (a.min(b), a.max(b));
                let (n_lo, n_hi) = (size[lo], size[hi]);
                let d_lohi = best_cost;
                for k in (0..n).filter(|&k| active[k] && k != lo && k != hi) {
                    let n_k = size[k];
                    let d_lo = cost[condensed_index(n, lo, k)];
                    let d_hi = cost[condensed_index(n, hi, k)];
                    cost[condensed_index(n, lo, k)] = ((n_lo + n_k) as f64 * d_lo
                        + (n_hi + n_k) as f64 * d_hi
                        - n_k as f64 * d_lohi)
                        / (n_lo + n_hi + n_k) as f64;
                }
                active[hi] = false;
                size[lo] = n_lo + n_hi;
                raw.push((lo, hi, d_lohi, n_lo + n_hi));
                break;
            }
            chain.push(b);
        }
    }

    // stable: equal costs keep algorithm order
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));

    let mut parent: Vec<usize> = (0..n).collect();
    let mut cluster_of_root: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let merges = raw
        .into_iter()
        .enumerate()
        .map(|(step, (a, b, c, s))| {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            let (ca, cb) = (cluster_of_root[ra], cluster_of_root[rb]);
            let root = ra.min(rb);
            parent[ra.max(rb)] = root;
            cluster_of_root[root] = n + step;
            Merge {
                cluster_a: ca.min(cb),
                cluster_b: ca.max(cb),
                distance: c.max(0.0).sqrt(),
                size: s,
            }
        })
        .collect();
    Ok(Dendrogram {
        observations: n,
        merges,
    })
}

/// Ward linkage on points under squared Euclidean geometry.
pub fn ward_linkage<P: AsRef<[f64]>>(points: &[P]) -> Result<Dendrogram> {
    let n = points.len();
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let dim = points[0].as_ref().len();
    let mut cost = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let pi = points[i].as_ref();
        if pi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: pi.len(),
            });
        }
        for pj in &points[i + 1..] {
            // merging two singletons adds half their squared distance to the SSE
            cost.push(0.5 * squared_euclidean(pi, pj.as_ref()));
        }
    }
    ward_linkage_from_dissimilarities(n, cost)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WardOptions {
    /// Fit on a seeded random subsample of this many points.
    pub sample: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct WardFit {
    pub dendrogram: Dendrogram,
    pub model: ClusterModel,
    /// Cluster label for each fitted point (parallel to `sample_indices`).
    pub labels: Vec<usize>,
    /// Input indices that were fitted, ascending.
    pub sample_indices: Vec<usize>,
}

pub fn ward_fit<P: AsRef<[f64]>>(points: &[P], k: usize, options: WardOptions) -> Result<WardFit> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let sample_indices: Vec<usize> = match options.sample {
        Some(m) if m < points.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let mut idx = rand::seq::index::sample(&mut rng, points.len(), m).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..points.len()).collect(),
    };
    if sample_indices.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: sample_indices.len(),
        });
    }
    let fitted: Vec<&[f64]> = sample_indices.iter().map(|&i| points[i].as_ref()).collect();
    let dendrogram = ward_linkage(&fitted)?;
    let labels = dendrogram.cut(k)?;

    let dim = fitted[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in fitted.iter().zip(&labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p.iter()) {
            *s += x;
        }
    }
    let centroids = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s.into_iter().map(|x| x / c as f64).collect())
        .collect();
    let names = (0..k).map(|i| format!("cluster_{i}")).collect();
    let model = ClusterModel::new(centroids, names, Provenance::Fitted)?;
    Ok(WardFit {
        dendrogram,
        model,
        labels,
        sample_indices,
    })
}

/// Experimental: Ward agglomeration over pairwise DTW distances, treated as
/// if they were Euclidean. Returns flat labels for `k` clusters.
pub fn dtw_ward_labels<S: AsRef<[f64]>>(
    series: &[S],
    k: usize,
    band: Option<usize>,
) -> Result<Vec<usize>> {
    let n = series.len();
    if n < k || k == 0 {
        return Err(Error::TooFewPoints {
            needed: k.max(1),
            got: n,
        });
    }
    let mut cost = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = dtw_distance(series[i].as_ref(), series[j].as_ref(), band)?;
            cost.push(0.5 * d * d);
        }
    }
    ward_linkage_from_dissimilarities(n, cost)?.cut(k)
}
