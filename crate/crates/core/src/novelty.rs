//! Semantic novelty: the cosine distance between each paragraph embedding and
//! the running centroid of every paragraph before it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, mean, pop_std};

/// Ordered per-paragraph embedding vectors for one book, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    book_id: String,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingSequence {
    pub fn new(book_id: impl Into<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "embedding dimension must be positive".into(),
            ));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        Ok(Self {
            book_id: book_id.into(),
            dim,
            data,
        })
    }

    pub fn from_rows(book_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(book_id, dim, data)
    }

    pub fn book_id(&self) -> &str {
        &self.book_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Novelty values for paragraphs 2..n of a book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyCurve {
    pub book_id: String,
    pub values: Vec<f64>,
    /// Number of paragraphs in the source book (`values.len() + 1`).
    pub paragraph_count: usize,
}

impl NoveltyCurve {
    /// Wraps precomputed values, e.g. a curve read back from a published dataset.
    pub fn from_values(book_id: impl Into<String>, values: Vec<f64>) -> Self {
        let paragraph_count = values.len() + 1;
        Self {
            book_id: book_id.into(),
            values,
            paragraph_count,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CurveType {
    Convergent,
    Plateau,
    Divergent,
}

impl CurveType {
    pub const ALL: [CurveType; 3] = [
        CurveType::Convergent,
        CurveType::Plateau,
        CurveType::Divergent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveType::Convergent => "convergent",
            CurveType::Plateau => "plateau",
            CurveType::Divergent => "divergent",
        }
    }
}

impl std::fmt::Display for CurveType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CurveType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "convergent" | "green" => Ok(CurveType::Convergent),
            "plateau" | "blue" => Ok(CurveType::Plateau),
            "divergent" | "red" => Ok(CurveType::Divergent),
            other => Err(Error::InvalidRecord(format!(
                "unknown curve type {other:?}"
            ))),
        }
    }
}

impl TryFrom<String> for CurveType {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CurveType> for String {
    fn from(t: CurveType) -> String {
        t.as_str().to_string()
    }
}

/// Per-book summary statistics of a novelty curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltySummary {
    pub mean_novelty: f64,
    pub std_novelty: f64,
    pub ti_ratio: f64,
    pub trend_slope: f64,
    pub mean_compression_progress: f64,
    pub curve_type_3: CurveType,
}

pub const DEFAULT_TAIL_FRACTION: f64 = 0.10;
pub const DEFAULT_TAU: f64 = 0.5;

/// Computes the novelty curve with an incrementally maintained running sum.
///
/// Cosine distance is scale invariant, so the running sum stands in for the
/// running mean without dividing at each step.
pub fn compute_novelty_curve(seq: &EmbeddingSequence) -> Result<NoveltyCurve> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let norms: Vec<f64> = seq.rows().map(|r| dot(r, r).sqrt()).collect();
    if let Some(index) = norms.iter().position(|&norm| norm == 0.0) {
        return Err(Error::ZeroVector { index });
    }

    let mut running = seq.row(0).to_vec();
    let mut values = Vec::with_capacity(n - 1);
    for (i, (e, norm)) in seq.rows().zip(&norms).enumerate().skip(1) {
        let centroid_norm = dot(&running, &running).sqrt();
        if centroid_norm == 0.0 {
            return Err(Error::ZeroVector { index: i });
        }
        let cosine = dot(e, &running) / (norm * centroid_norm);
        values.push(1.0 - cosine);
        for (acc, x) in running.iter_mut().zip(e) {
            *acc += x;
        }
    }

    Ok(NoveltyCurve {
        book_id: seq.book_id().to_string(),
        values,
        paragraph_count: n,
    })
}

/// Window width for terminal/initial means: `max(1, ceil(fraction * len))`.
pub fn tail_window(len: usize, tail_fraction: f64) -> usize {
    ((tail_fraction * len as f64).ceil() as usize)
        .max(1)
        .min(len)
}

/// Ordinary least-squares slope of `values` against their 0-based index.
pub fn trend_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = mean(values);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn summarize_curve(
    curve: &NoveltyCurve,
    tail_fraction: f64,
    tau: f64,
) -> Result<NoveltySummary> {
    summarize_values(&curve.values, tail_fraction, tau)
}

pub fn summarize_values(values: &[f64], tail_fraction: f64, tau: f64) -> Result<NoveltySummary> {
    let len = values.len();
    if len < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: len,
        });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "tail_fraction must lie in (0, 0.5], got {tail_fraction}"
        )));
    }

    let w = tail_window(len, tail_fraction);
    let initial = mean(&values[..w]);
    let terminal = mean(&values[len - w..]);
    if initial == 0.0 {
        return Err(Error::DegenerateTI);
    }

    let slope = trend_slope(values);
    let std_novelty = pop_std(values);
    let mut summary = NoveltySummary {
        mean_novelty: mean(values),
        std_novelty,
        ti_ratio: terminal / initial,
        trend_slope: slope,
        // mean of first differences of the negated curve telescopes
        mean_compression_progress: (values[0] - values[len - 1]) / (len - 1) as f64,
        curve_type_3: CurveType::Plateau,
    };
    summary.curve_type_3 = classify_curve_type3(&summary, len, tau);
    Ok(summary)
}

/// Total trend excursion over the curve, in within-book standard deviations.
pub fn trend_drift(summary: &NoveltySummary, curve_length: usize) -> f64 {
    if summary.std_novelty <= 0.0 || curve_length < 2 {
        return 0.0;
    }
    summary.trend_slope * (curve_length - 1) as f64 / summary.std_novelty
}

pub fn classify_curve_type3(summary: &NoveltySummary, curve_length: usize, tau: f64) -> CurveType {
    classify_drift(trend_drift(summary, curve_length), tau)
}

pub fn classify_drift(drift: f64, tau: f64) -> CurveType {
    if drift < -tau {
        CurveType::Convergent
    } else if drift > tau {
        CurveType::Divergent
    } else {
        CurveType::Plateau
    }
}

/// Target convergent/plateau/divergent shares of the published corpus.
pub const CORPUS_TYPE_PROPORTIONS: [f64; 3] = [0.225, 0.590, 0.186];

/// Sweeps `tau` over `grid` and returns the value whose convergent/plateau/divergent
/// proportions over `drifts` are closest (L1) to `target`, with that distance.
pub fn calibrate_tau(
    drifts: &[f64],
    target: [f64; 3],
    grid: impl IntoIterator<Item = f64>,
) -> Option<(f64, f64)> {
    if drifts.is_empty() {
        return None;
    }
    let n = drifts.len() as f64;
    let mut best: Option<(f64, f64)> = None;
    for tau in grid {
        let mut counts = [0usize; 3];
        for &d in drifts {
            counts[classify_drift(d, tau) as usize] += 1;
        }
        let dist: f64 = counts
            .iter()
            .zip(target)
            .map(|(&c, t)| (c as f64 / n - t).abs())
            .sum();
        if best.is_none_or(|(_, b)| dist < b) {
            best = Some((tau, dist));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(rows: &[&[f64]]) -> EmbeddingSequence {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        EmbeddingSequence::from_rows("t", &rows).unwrap()
    }

    /// Re-averages every predecessor at each step.
    fn full_recompute(rows: &[Vec<f64>]) -> Vec<f64> {
        (1..rows.len())
            .map(|i| {
                let dim = rows[0].len();
                let centroid: Vec<f64> = (0..dim)
                    .map(|d| rows[..i].iter().map(|r| r[d]).sum::<f64>() / i as f64)
                    .collect();
                let e = &rows[i];
                let cos = dot(e, &centroid) / (dot(e, e).sqrt() * dot(&centroid, &centroid).sqrt());
                1.0 - cos
            })
            .collect()
    }

    fn random_unit_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = dot(&v, &v).sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect()
    }

    #[test]
    fn parallel_and_orthogonal_pairs() {
        let c = compute_novelty_curve(&seq(&[&[1.0, 0.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(c.values, vec![0.0]);
        let c = compute_novelty_curve(&seq(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(c.values, vec![1.0]);
        assert_eq!(c.paragraph_count, 2);
    }

    #[test]
    fn anti_correlated_exceeds_one() {
        let c = compute_novelty_curve(&seq(&[&[1.0, 0.0], &[-1.0, 0.0]])).unwrap();
        assert_eq!(c.values, vec![2.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            compute_novelty_curve(&seq(&[&[1.0, 0.0]])),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            compute_novelty_curve(&seq(&[&[1.0, 0.0], &[0.0, 0.0]])),
            Err(Error::ZeroVector { index: 1 })
        ));
        // running centroid cancels to zero before the third paragraph
        assert!(matches!(
            compute_novelty_curve(&seq(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0]])),
            Err(Error::ZeroVector { index: 2 })
        ));
    }

    #[test]
    fn matches_full_recompute_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows = random_unit_rows(&mut rng, 50, 8);
        let curve =
            compute_novelty_curve(&EmbeddingSequence::from_rows("r", &rows).unwrap()).unwrap();
        let oracle = full_recompute(&rows);
        assert_eq!(curve.values.len(), 49);
        for (a, b) in curve.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = random_unit_rows(&mut rng, 30, 5);
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x * 7.5).collect())
            .collect();
        let a = compute_novelty_curve(&EmbeddingSequence::from_rows("a", &rows).unwrap()).unwrap();
        let b =
            compute_novelty_curve(&EmbeddingSequence::from_rows("b", &scaled).unwrap()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_curve_summary() {
        let s = summarize_values(&[0.3; 20], 0.10, DEFAULT_TAU).unwrap();
        assert!((s.ti_ratio - 1.0).abs() < 1e-12);
        assert_eq!(s.trend_slope, 0.0);
        assert_eq!(s.mean_compression_progress, 0.0);
        assert_eq!(s.curve_type_3, CurveType::Plateau);
    }

    #[test]
    fn ramp_summary() {
        let ramp: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let s = summarize_values(&ramp, 0.10, DEFAULT_TAU).unwrap();
        assert!((s.trend_slope - 0.1).abs() < 1e-12);
        assert!((s.mean_compression_progress + 0.1).abs() < 1e-12);
    }

    #[test]
    fn ti_ratio_windows() {
        let mut v = vec![0.2; 2];
        v.extend([0.3; 16]);
        v.extend([0.22; 2]);
        let s = summarize_values(&v, 0.10, DEFAULT_TAU).unwrap();
        assert!((s.ti_ratio - 1.1).abs() < 1e-12);
        assert_eq!(tail_window(3, 0.1), 1);
        assert_eq!(tail_window(20, 0.1), 2);
        assert_eq!(tail_window(21, 0.1), 3);
    }

    #[test]
    fn degenerate_ti_and_bad_fraction() {
        assert!(matches!(
            summarize_values(&[0.0, 0.0, 0.5, 0.7], 0.1, DEFAULT_TAU),
            Err(Error::DegenerateTI)
        ));
        assert!(summarize_values(&[0.1, 0.2], 0.6, DEFAULT_TAU).is_err());
        assert!(summarize_values(&[0.1, 0.2], 0.0, DEFAULT_TAU).is_err());
        assert!(summarize_values(&[0.1], 0.1, DEFAULT_TAU).is_err());
    }

    #[test]
    fn classification() {
        let base = NoveltySummary {
            mean_novelty: 0.5,
            std_novelty: 0.1,
            ti_ratio: 1.0,
            trend_slope: 0.0,
            mean_compression_progress: 0.0,
            curve_type_3: CurveType::Plateau,
        };
        // drift = slope * 10 / 0.1 = 3.0
        let steep = NoveltySummary {
            trend_slope: 0.03,
            ..base.clone()
        };
        assert!((trend_drift(&steep, 11) - 3.0).abs() < 1e-12);
        assert_eq!(classify_curve_type3(&steep, 11, 0.5), CurveType::Divergent);
        let down = NoveltySummary {
            trend_slope: -0.03,
            ..base.clone()
        };
        assert_eq!(classify_curve_type3(&down, 11, 0.5), CurveType::Convergent);
        let flat = NoveltySummary {
            std_novelty: 0.0,
            trend_slope: 0.5,
            ..base
        };
        assert_eq!(classify_curve_type3(&flat, 11, 0.5), CurveType::Plateau);
    }

    #[test]
    fn negation_swaps_types() {
        let ramp: Vec<f64> = (0..30)
            .map(|i| 1.0 + (i as f64 * 0.3).sin() * 0.1 + i as f64 * 0.02)
            .collect();
        let neg: Vec<f64> = ramp.iter().map(|x| 3.0 - x).collect();
        let a = summarize_values(&ramp, 0.1, 0.5).unwrap().curve_type_3;
        let b = summarize_values(&neg, 0.1, 0.5).unwrap().curve_type_3;
        assert_eq!(a, CurveType::Divergent);
        assert_eq!(b, CurveType::Convergent);
    }

    #[test]
    fn tau_calibration_hits_target() {
        // drifts uniformly spread on [-2, 2]: tau = t gives (2-t)/4 in each tail
        let drifts: Vec<f64> = (0..4001).map(|i| -2.0 + i as f64 * 0.001).collect();
        let grid = (0..=200).map(|i| i as f64 * 0.01);
        let (tau, dist) = calibrate_tau(&drifts, [0.25, 0.5, 0.25], grid).unwrap();
        assert!((tau - 1.0).abs() < 0.011, "tau = {tau}");
        assert!(dist < 0.01);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn compression_progress_telescopes(v in prop::collection::vec(0.05f64..1.5, 2..60)) {
                let s = summarize_values(&v, 0.1, 0.5).unwrap();
                let diffs: Vec<f64> = v.windows(2).map(|w| -(w[1] - w[0])).collect();
                let direct = diffs.iter().sum::<f64>() / diffs.len() as f64;
                prop_assert!((s.mean_compression_progress - direct).abs() < 1e-12);
            }

            #[test]
            fn type3_scale_free(v in prop::collection::vec(0.05f64..1.5, 3..60), k in 0.01f64..50.0) {
                let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
                let a = summarize_values(&v, 0.1, 0.5).unwrap();
                let b = summarize_values(&scaled, 0.1, 0.5).unwrap();
                let (da, db) = (trend_drift(&a, v.len()), trend_drift(&b, v.len()));
                prop_assert!((da - db).abs() < 1e-9 * (1.0 + da.abs()));
                if (da.abs() - 0.5).abs() > 1e-9 {
                    prop_assert_eq!(a.curve_type_3, b.curve_type_3);
                }
            }
        }
    }
}
