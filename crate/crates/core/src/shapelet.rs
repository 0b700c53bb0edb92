//! Shapelet discovery over PAA vectors: short fragments whose best-match
//! distance separates two labelled classes by information gain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionBucket {
    Opening,
    Middle,
    Late,
}

impl PositionBucket {
    /// Starts 0-4 open, 5-10 are middle, 11 onward are late.
    pub fn from_start(start: usize) -> Self {
        match start {
            0..=4 => PositionBucket::Opening,
            5..=10 => PositionBucket::Middle,
            _ => PositionBucket::Late,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PositionBucket::Opening => "opening",
            PositionBucket::Middle => "middle",
            PositionBucket::Late => "late",
        }
    }
}

/// A PAA vector with a binary class (`true` is the first class).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub id: u64,
    pub values: Vec<f64>,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shapelet {
    pub values: Vec<f64>,
    pub source_book: u64,
    pub start_index: usize,
    pub info_gain: f64,
    pub split_threshold: f64,
    /// Mean distance right of the split minus mean distance left of it.
    pub separation_gap: f64,
    pub position_bucket: PositionBucket,
}

#[derive(Debug, Clone, Copy)]
pub struct ShapeletConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub top_k: usize,
    /// Draw candidates from at most this many (seeded) training series.
    pub sample: Option<usize>,
    pub seed: u64,
}

impl Default for ShapeletConfig {
    fn default() -> Self {
        Self {
            min_len: 3,
            max_len: 8,
            top_k: 10,
            sample: None,
            seed: 0,
        }
    }
}

/// Minimum mean squared deviation over all aligned offsets.
pub fn subsequence_distance(shapelet: &[f64], series: &[f64]) -> Result<f64> {
    let len = shapelet.len();
    if len == 0 {
        return Err(Error::EmptySeries);
    }
    if len > series.len() {
        return Err(Error::ShapeletTooLong {
            len,
            series: series.len(),
        });
    }
    Ok(series
        .windows(len)
        .map(|w| {
            w.iter()
                .zip(shapelet)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / len as f64
        })
        .fold(f64::INFINITY, f64::min))
}

fn entropy(pos: usize, neg: usize) -> f64 {
    let n = (pos + neg) as f64;
    [pos, neg]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn split_gain(left: (usize, usize), right: (usize, usize)) -> f64 {
    let nl = (left.0 + left.1) as f64;
    let nr = (right.0 + right.1) as f64;
    let n = nl + nr;
    let parent = entropy(left.0 + right.0, left.1 + right.1);
    (parent - (nl / n) * entropy(left.0, left.1) - (nr / n) * entropy(right.0, right.1)).max(0.0)
}

/// Information gain (bits) of splitting at `distance <= threshold`.
pub fn information_gain(distances: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyInput);
    }
    if distances.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: distances.len(),
            right: labels.len(),
        });
    }
    let (mut left, mut right) = ((0, 0), (0, 0));
    for (&d, &l) in distances.iter().zip(labels) {
        let side = if d <= threshold {
            &mut left
        } else {
            &mut right
        };
        if l {
            side.0 += 1;
        } else {
            side.1 += 1;
        }
    }
    Ok(split_gain(left, right))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub gain: f64,
    pub threshold: f64,
    pub gap: f64,
}

/// Scans midpoints between consecutive distinct sorted distances; the best
/// split maximizes gain, then separation gap, then prefers the lower threshold.
pub fn best_split(distances: &[f64], labels: &[bool]) -> Result<Split> {
    if distances.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pairs: Vec<(f64, bool)> = distances
        .iter()
        .copied()
        .zip(labels.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = pairs.len();
    let total_pos = pairs.iter().filter(|p| p.1).count();
    let total_sum: f64 = pairs.iter().map(|p| p.0).sum();

    let mut best = Split {
        gain: 0.0,
        threshold: pairs[n - 1].0,
        gap: 0.0,
    };
    let (mut pos, mut sum) = (0usize, 0.0);
    for i in 0..n - 1 {
        pos += pairs[i].1 as usize;
        sum += pairs[i].0;
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let left_n = i + 1;
        let gain = split_gain(
            (pos, left_n - pos),
            (total_pos - pos, n - left_n - (total_pos - pos)),
        );
        let gap = (total_sum - sum) / (n - left_n) as f64 - sum / left_n as f64;
        if gain > best.gain || (gain == best.gain && gap > best.gap) {
            best = Split {
                gain,
                threshold: 0.5 * (pairs[i].0 + pairs[i + 1].0),
                gap,
            };
        }
    }
    Ok(best)
}

pub fn discover_shapelets(
    dataset: &[LabeledSeries],
    config: &ShapeletConfig,
) -> Result<Vec<Shapelet>> {
    if !dataset.iter().any(|s| s.label) || !dataset.iter().any(|s| !s.label) {
        return Err(Error::SingleClass);
    }
    if config.min_len == 0 || config.min_len > config.max_len {
        return Err(Error::InvalidParameter(format!(
            "shapelet lengths {}..={}",
            config.min_len, config.max_len
        )));
    }
    let series_len = dataset.iter().map(|s| s.values.len()).min().unwrap_or(0);
    if config.max_len > series_len {
        return Err(Error::ShapeletTooLong {
            len: config.max_len,
            series: series_len,
        });
    }

    // canonical order makes results independent of input order
    let mut ordered: Vec<&LabeledSeries> = dataset.iter().collect();
    ordered.sort_by(|a, b| {
        a.id.cmp(&b.id).then(a.label.cmp(&b.label)).then(
            a.values
                .iter()
                .map(|x| x.to_bits())
                .cmp(b.values.iter().map(|x| x.to_bits())),
        )
    });
    let sources: Vec<&LabeledSeries> = match config.sample {
        Some(m) if m < ordered.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut idx = rand::seq::index::sample(&mut rng, ordered.len(), m).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| ordered[i]).collect()
        }
        _ => ordered.clone(),
    };
    let labels: Vec<bool> = ordered.iter().map(|s| s.label).collect();

    let candidates: Vec<(&LabeledSeries, usize, usize)> = sources
        .iter()
        .flat_map(|s| {
            (config.min_len..=config.max_len)
                .flat_map(move |len| (0..=s.values.len() - len).map(move |start| (*s, len, start)))
        })
        .collect();

    let mut scored: Vec<Shapelet> = candidates
        .par_iter()
        .map(|&(src, len, start)| {
            let values = src.values[start..start + len].to_vec();
            let distances: Vec<f64> = ordered
                .iter()
                .map(|s| subsequence_distance(&values, &s.values))
                .collect::<Result<_>>()?;
            let split = best_split(&distances, &labels)?;
            Ok(Shapelet {
                values,
                source_book: src.id,
                start_index: start,
                info_gain: split.gain,
                split_threshold: split.threshold,
                separation_gap: split.gap,
                position_bucket: PositionBucket::from_start(start),
            })
        })
        .collect::<Result<_>>()?;

    scored.sort_by(|a, b| {
        b.info_gain
            .total_cmp(&a.info_gain)
            .then(b.separation_gap.total_cmp(&a.separation_gap))
            .then(a.values.len().cmp(&b.values.len()))
            .then(a.source_book.cmp(&b.source_book))
            .then(a.start_index.cmp(&b.start_index))
    });
    scored.truncate(config.top_k);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn distance_cases() {
        let paa: Vec<f64> = (0..16).map(|i| i as f64 * 0.1).collect();
        assert_eq!(subsequence_distance(&paa[..4], &paa).unwrap(), 0.0);
        assert_eq!(subsequence_distance(&[0.0; 3], &[1.0; 16]).unwrap(), 1.0);
        assert!(matches!(
            subsequence_distance(&[0.0; 17], &[1.0; 16]),
            Err(Error::ShapeletTooLong { .. })
        ));
    }

    #[test]
    fn distance_matches_offset_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let s: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..16).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut best = f64::INFINITY;
            for off in 0..=12 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += (p[off + k] - s[k]).powi(2);
                }
                best = best.min(acc / 4.0);
            }
            assert!((subsequence_distance(&s, &p).unwrap() - best).abs() < 1e-12);
        }
    }

    #[test]
    fn gain_cases() {
        let d = [0.1, 0.2, 0.9, 1.0];
        let l = [true, true, false, false];
        assert!((information_gain(&d, &l, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(information_gain(&d, &l, 0.0).unwrap(), 0.0);
        assert!(matches!(
            information_gain(&[], &[], 0.0),
            Err(Error::EmptyInput)
        ));

        // six points, split {0.1 A, 0.2 A, 0.3 B | 0.7 A, 0.8 B, 0.9 B}
        let d = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
        let l = [true, true, false, true, false, false];
        let h13 = -(1.0f64 / 3.0) * (1.0f64 / 3.0).log2() - (2.0f64 / 3.0) * (2.0f64 / 3.0).log2();
        let expected = 1.0 - h13;
        assert!((information_gain(&d, &l, 0.5).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn best_split_picks_midpoint() {
        let s = best_split(&[0.1, 0.2, 0.9, 1.0], &[true, true, false, false]).unwrap();
        assert!((s.gain - 1.0).abs() < 1e-12);
        assert!((s.threshold - 0.55).abs() < 1e-12);
        assert!((s.gap - 0.8).abs() < 1e-12);
    }

    #[test]
    fn buckets() {
        assert_eq!(PositionBucket::from_start(3), PositionBucket::Opening);
        assert_eq!(PositionBucket::from_start(7), PositionBucket::Middle);
        assert_eq!(PositionBucket::from_start(12), PositionBucket::Late);
        assert_eq!(PositionBucket::from_start(4), PositionBucket::Opening);
        assert_eq!(PositionBucket::from_start(5), PositionBucket::Middle);
        assert_eq!(PositionBucket::from_start(10), PositionBucket::Middle);
        assert_eq!(PositionBucket::from_start(11), PositionBucket::Late);
    }

    fn planted(seed: u64, per_class: usize) -> Vec<LabeledSeries> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        (0..2 * per_class)
            .map(|i| {
                let label = i < per_class;
                let mut values: Vec<f64> = (0..16).map(|_| noise.sample(&mut rng)).collect();
                if label {
                    let p = rng.random_range(0..=13);
                    for v in &mut values[p..p + 3] {
                        *v += 2.0;
                    }
                }
                LabeledSeries {
                    id: i as u64,
                    values,
                    label,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_planted_motif() {
        let data = planted(1, 12);
        let top = discover_shapelets(
            &data,
            &ShapeletConfig {
                top_k: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let best = &top[0];
        assert!(best.info_gain > 0.9);
        assert!(
            best.values.iter().all(|v| (v - 2.0).abs() < 0.5),
            "{best:?}"
        );
    }

    #[test]
    fn shuffle_invariant() {
        let data = planted(2, 8);
        let mut shuffled = data.clone();
        shuffled.reverse();
        shuffled.swap(0, 5);
        let cfg = ShapeletConfig {
            top_k: 5,
            ..Default::default()
        };
        assert_eq!(
            discover_shapelets(&data, &cfg).unwrap(),
            discover_shapelets(&shuffled, &cfg).unwrap()
        );
    }

    #[test]
    fn identical_classes_have_no_gain() {
        let v: Vec<f64> = (0..16).map(|i| (i as f64).cos()).collect();
        let data: Vec<LabeledSeries> = (0..6)
            .map(|i| LabeledSeries {
                id: i,
                values: v.clone(),
                label: i % 2 == 0,
            })
            .collect();
        let top = discover_shapelets(
            &data,
            &ShapeletConfig {
                top_k: 100,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(top.iter().all(|s| s.info_gain == 0.0));
    }

    #[test]
    fn single_class_rejected() {
        let data = vec![LabeledSeries {
            id: 0,
            values: vec![0.0; 16],
            label: true,
        }];
        assert!(matches!(
            discover_shapelets(&data, &ShapeletConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn gain_bounded_by_parent_entropy(
                d in prop::collection::vec(0.0f64..5.0, 2..40),
                seed in any::<u64>(),
                t in 0.0f64..5.0,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let l: Vec<bool> = d.iter().map(|_| rng.random_bool(0.5)).collect();
                let pos = l.iter().filter(|&&x| x).count();
                let h = entropy(pos, l.len() - pos);
                let g = information_gain(&d, &l, t).unwrap();
                prop_assert!(g <= h + 1e-12);
                prop_assert!(g >= 0.0);
            }

            #[test]
            fn shifted_plant_keeps_distance(v in prop::collection::vec(-2.0f64..2.0, 16), c in -3.0f64..3.0, start in 0usize..12) {
                let shapelet = v[start..start + 4].to_vec();
                let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
                let shifted_shapelet: Vec<f64> = shapelet.iter().map(|x| x + c).collect();
                let a = subsequence_distance(&shapelet, &v).unwrap();
                let b = subsequence_distance(&shifted_shapelet, &shifted).unwrap();
                prop_assert!(a < 1e-12 && b < 1e-12);
            }
        }
    }
}
