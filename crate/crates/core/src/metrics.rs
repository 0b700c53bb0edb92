//! Shape metrics computed on raw (un-normalized) novelty curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pop_variance;
use crate::repr::{rolling_mean, DEFAULT_SMOOTHING_WINDOW};

pub const DEFAULT_ENTROPY_BINS: usize = 20;
const DEGENERATE_DISPLACEMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub speed: f64,
    pub volume: f64,
    /// `+inf` when the net displacement is (numerically) zero.
    pub circuitousness: f64,
    pub circuitousness_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderMetrics {
    pub acceleration: f64,
    pub roughness: f64,
    pub peak_count: usize,
    /// Shannon entropy in bits.
    pub curve_entropy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMetrics {
    pub speed: f64,
    pub volume: f64,
    pub circuitousness: f64,
    pub circuitousness_degenerate: bool,
    pub acceleration: f64,
    pub roughness: f64,
    pub peak_count: usize,
    pub curve_entropy: f64,
}

impl ShapeMetrics {
    /// Circuitousness with the degenerate case mapped to `None`.
    pub fn circuitousness(&self) -> Option<f64> {
        (!self.circuitousness_degenerate).then_some(self.circuitousness)
    }
}

fn abs_diffs(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn path_metrics(values: &[f64]) -> Result<PathMetrics> {
    if values.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: values.len(),
        });
    }
    let path: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let displacement = (values[values.len() - 1] - values[0]).abs();
    let degenerate = displacement < DEGENERATE_DISPLACEMENT;
    Ok(PathMetrics {
        speed: path / (values.len() - 1) as f64,
        volume: pop_variance(values),
        circuitousness: if degenerate {
            f64::INFINITY
        } else {
            path / displacement
        },
        circuitousness_degenerate: degenerate,
    })
}

/// Entropy (bits) of the histogram of `values` over `bins` equal-width bins
/// spanning their range. A zero-width range is one occupied bin.
pub fn histogram_entropy(values: &[f64], bins: usize) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    if bins <= 1 || width.is_nan() || width <= 0.0 {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let n = values.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Strict interior local maxima.
pub fn count_peaks(values: &[f64]) -> usize {
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count()
}

pub fn higher_order_metrics(values: &[f64], entropy_bins: usize) -> Result<HigherOrderMetrics> {
    if values.len() < 4 {
        return Err(Error::TooShort {
            needed: 4,
            got: values.len(),
        });
    }
    if entropy_bins == 0 {
        return Err(Error::InvalidParameter(
            "entropy bins must be positive".into(),
        ));
    }
    let d1 = abs_diffs(values);
    let d2 = abs_diffs(&d1);
    let d3 = abs_diffs(&d2);
    let mean_abs = |d: &[f64]| d.iter().map(|x| x.abs()).sum::<f64>() / d.len() as f64;
    Ok(HigherOrderMetrics {
        acceleration: mean_abs(&d2),
        roughness: mean_abs(&d3),
        peak_count: count_peaks(&rolling_mean(values, DEFAULT_SMOOTHING_WINDOW)),
        curve_entropy: histogram_entropy(values, entropy_bins),
    })
}

pub fn shape_metrics(values: &[f64]) -> Result<ShapeMetrics> {
    let t = path_metrics(values)?;
    let h = higher_order_metrics(values, DEFAULT_ENTROPY_BINS)?;
    Ok(ShapeMetrics {
        speed: t.speed,
        volume: t.volume,
        circuitousness: t.circuitousness,
        circuitousness_degenerate: t.circuitousness_degenerate,
        acceleration: h.acceleration,
        roughness: h.roughness,
        peak_count: h.peak_count,
        curve_entropy: h.curve_entropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_curve() {
        let t = path_metrics(&[0.4; 10]).unwrap();
        assert_eq!(t.speed, 0.0);
        assert!(t.volume.abs() < 1e-24);
        assert!(t.circuitousness_degenerate);
        assert!(t.circuitousness.is_infinite());
        let h = higher_order_metrics(&[0.4; 10], 20).unwrap();
        assert_eq!(h.curve_entropy, 0.0);
        assert_eq!(h.peak_count, 0);
    }

    #[test]
    fn ramp_of_four() {
        let t = path_metrics(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        assert!((t.speed - 1.0 / 3.0).abs() < 1e-12);
        assert!((t.circuitousness - 1.0).abs() < 1e-12);
        assert!((t.volume - 5.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn linear_ramp_has_no_higher_differences() {
        let ramp: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
        let h = higher_order_metrics(&ramp, 20).unwrap();
        assert_eq!(h.acceleration, 0.0);
        assert_eq!(h.roughness, 0.0);
    }

    #[test]
    fn uniform_bins_entropy() {
        // 0..=19 over [0, 19] puts exactly one value in each of 20 bins
        let exact: Vec<f64> = (0..=19).map(|i| i as f64).collect();
        assert!((histogram_entropy(&exact, 20) - 20f64.log2()).abs() < 1e-12);
        let doubled: Vec<f64> = exact.iter().chain(&exact).copied().collect();
        assert!((histogram_entropy(&doubled, 20) - 20f64.log2()).abs() < 1e-12);
        assert_eq!(histogram_entropy(&[1.0, 1.0, 2.0, 2.0], 20), 1.0);
    }

    #[test]
    fn peaks_on_smoothed_curve() {
        let wave: Vec<f64> = (0..200)
            .map(|i| (i as f64 * std::f64::consts::TAU / 50.0).sin())
            .collect();
        let h = higher_order_metrics(&wave, 20).unwrap();
        assert_eq!(h.peak_count, 4);
    }

    #[test]
    fn too_short() {
        assert!(path_metrics(&[1.0]).is_err());
        assert!(higher_order_metrics(&[1.0, 2.0, 3.0], 20).is_err());
    }

    proptest! {
        #[test]
        fn monotone_circuitousness_is_one(steps in prop::collection::vec(0.001f64..1.0, 1..100), start in -1.0f64..1.0) {
            let mut v = vec![start];
            for s in steps { let last = *v.last().unwrap(); v.push(last + s); }
            let t = path_metrics(&v).unwrap();
            prop_assert!((t.circuitousness - 1.0).abs() < 1e-12);
        }

        #[test]
        fn shift_and_scale(v in prop::collection::vec(0.0f64..1.5, 4..80), c in -3.0f64..3.0, k in 0.1f64..10.0) {
            let a = shape_metrics(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let b = shape_metrics(&shifted).unwrap();
            prop_assert!((a.speed - b.speed).abs() < 1e-9);
            prop_assert!((a.volume - b.volume).abs() < 1e-9);
            prop_assert!((a.acceleration - b.acceleration).abs() < 1e-9);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let s = shape_metrics(&scaled).unwrap();
            prop_assert!((s.speed - k * a.speed).abs() < 1e-9 * k);
            prop_assert!((s.volume - k * k * a.volume).abs() < 1e-9 * k * k);
            prop_assert!((s.roughness - k * a.roughness).abs() < 1e-9 * k);
            prop_assert_eq!(s.peak_count, a.peak_count);
            if !a.circuitousness_degenerate && !s.circuitousness_degenerate {
                prop_assert!((s.circuitousness - a.circuitousness).abs() < 1e-6 * a.circuitousness);
            }
            prop_assert!(a.speed >= 0.0 && a.volume >= 0.0);
            prop_assert!(a.curve_entropy >= 0.0 && a.curve_entropy <= 20f64.log2() + 1e-12);
            if !a.circuitousness_degenerate {
                prop_assert!(a.circuitousness >= 1.0 - 1e-12);
            }
            let path: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            prop_assert!((a.speed * (v.len() - 1) as f64 - path).abs() < 1e-9);
        }
    }
}
