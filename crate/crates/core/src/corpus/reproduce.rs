//! Recomputes the curve-derived columns of a published dataset and measures
//! agreement with the published values.

use serde::Serialize;

use super::pipeline::{derive_record, DeriveOptions};
use super::record::{BookRecord, SERIES_DIGITS};
use crate::cluster::ClusterModel;
use crate::novelty::{calibrate_tau, summarize_values, trend_drift, CORPUS_TYPE_PROPORTIONS};
use crate::repr::SAX_BREAKPOINTS;

/// Share of books that must agree on every gated column.
pub const REPRODUCE_THRESHOLD: f64 = 0.99;

/// Columns whose agreement decides the verdict.
pub const GATED_COLUMNS: [&str; 6] = [
    "paa_16",
    "sax_16_5",
    "speed",
    "volume",
    "circuitousness",
    "cluster_8",
];

/// Columns compared and reported without affecting the verdict.
pub const INFORMATIONAL_COLUMNS: [&str; 8] = [
    "sax_16_5_exact",
    "reversal_count",
    "mean_novelty",
    "std_novelty",
    "ti_ratio",
    "trend_slope",
    "mean_compression_progress",
    "curve_type_3",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute tolerance per PAA segment.
    pub paa_abs: f64,
    /// Relative tolerance for real-valued metrics.
    pub rel: f64,
    /// Absolute floor below which real values count as equal.
    pub abs_floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        // published curves carry 4 significant digits, so recomputed values
        // can only be expected to agree to roughly that precision
        Self {
            paa_abs: 5e-3,
            rel: 1e-2,
            abs_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnAgreement {
    pub column: String,
    pub gated: bool,
    pub matched: usize,
    pub compared: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub books: usize,
    /// Books whose curve could not be processed at all.
    pub failures: usize,
    pub columns: Vec<ColumnAgreement>,
    /// Share of books agreeing on all gated columns at once.
    pub all_gated_rate: f64,
    pub pass: bool,
    /// Trend-drift threshold whose type shares come closest to the corpus shares.
    pub calibrated_tau: Option<f64>,
    pub calibration_distance: Option<f64>,
}

fn close(a: f64, b: f64, tol: &Tolerance) -> bool {
    if a.is_nan() || b.is_nan() {
        return false;
    }
    let diff = (a - b).abs();
    diff <= tol.abs_floor || diff <= tol.rel * a.abs().max(b.abs())
}

/// Half a unit in the last place of `x` printed with `digits` significant digits.
fn rounding_radius(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return 0.0;
    }
    0.5 * 10f64.powi(x.abs().log10().floor() as i32 - digits as i32 + 1)
}

/// Range of circuitousness values consistent with `curve` once each point is
/// perturbed by up to its rounding radius.
fn circuitousness_interval(curve: &[f64]) -> (f64, f64) {
    let radius: Vec<f64> = curve
        .iter()
        .map(|&x| rounding_radius(x, SERIES_DIGITS))
        .collect();
    let path: f64 = curve.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let path_slack: f64 = radius.windows(2).map(|r| r[0] + r[1]).sum();
    let n = curve.len();
    let disp = (curve[n - 1] - curve[0]).abs();
    let disp_slack = radius[0] + radius[n - 1];
    let lo = (path - path_slack).max(0.0) / (disp + disp_slack);
    let hi = if disp > disp_slack {
        (path + path_slack) / (disp - disp_slack)
    } else {
        f64::INFINITY
    };
    (lo, hi)
}

/// Whether `published` can be the SAX word of a PAA vector within `tol` of `paa`:
/// every differing symbol must be adjacent to ours with the breakpoint between
/// them inside the tolerance.
fn sax_consistent(published: &str, ours: &str, paa: &[f64], tol: f64) -> bool {
    let (p, o): (Vec<char>, Vec<char>) = (published.chars().collect(), ours.chars().collect());
    if p.len() != o.len() || p.len() != paa.len() {
        return false;
    }
    p.iter().zip(&o).zip(paa).all(|((&a, &b), &v)| {
        if a == b {
            return true;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (li, hi_i) = (lo as usize - 'a' as usize, hi as usize - 'a' as usize);
        hi_i == li + 1 && li < SAX_BREAKPOINTS.len() && (v - SAX_BREAKPOINTS[li]).abs() <= tol
    })
}

fn cluster_matches(published: &BookRecord, ours: &BookRecord, model: &ClusterModel) -> bool {
    // names are unambiguous; bare indices may follow another numbering
    match model.index_of(&published.cluster_name) {
        Some(idx) if !published.cluster_name.is_empty() => idx == ours.cluster_8,
        _ => published.cluster_8 == ours.cluster_8,
    }
}

/// Compares each derived column. Returns `(column, matched)` pairs in
/// gated-then-informational order.
fn compare(
    published: &BookRecord,
    ours: &BookRecord,
    model: &ClusterModel,
    tol: &Tolerance,
) -> Vec<(&'static str, bool)> {
    let (lo, hi) = circuitousness_interval(&published.novelty_curve);
    let circ = match (published.circuitousness, ours.circuitousness) {
        (None, None) => true,
        (Some(a), Some(b)) => {
            close(a, b, tol) || (lo * (1.0 - tol.rel) <= a && a <= hi * (1.0 + tol.rel))
        }
        // a published null is consistent with a displacement inside the rounding noise
        (None, Some(_)) => hi.is_infinite(),
        (Some(a), None) => hi.is_infinite() && a >= lo,
    };
    vec![
        (
            "paa_16",
            published.paa_16.len() == ours.paa_16.len()
                && published
                    .paa_16
                    .iter()
                    .zip(&ours.paa_16)
                    .all(|(a, b)| (a - b).abs() <= tol.paa_abs),
        ),
        (
            "sax_16_5",
            sax_consistent(
                &published.sax_16_5,
                &ours.sax_16_5,
                &ours.paa_16,
                tol.paa_abs,
            ),
        ),
        ("speed", close(published.speed, ours.speed, tol)),
        ("volume", close(published.volume, ours.volume, tol)),
        ("circuitousness", circ),
        ("cluster_8", cluster_matches(published, ours, model)),
        ("sax_16_5_exact", published.sax_16_5 == ours.sax_16_5),
        (
            "reversal_count",
            published.reversal_count == ours.reversal_count,
        ),
        (
            "mean_novelty",
            close(published.mean_novelty, ours.mean_novelty, tol),
        ),
        (
            "std_novelty",
            close(published.std_novelty, ours.std_novelty, tol),
        ),
        ("ti_ratio", close(published.ti_ratio, ours.ti_ratio, tol)),
        (
            "trend_slope",
            close(published.trend_slope, ours.trend_slope, tol),
        ),
        (
            "mean_compression_progress",
            close(
                published.mean_compression_progress,
                ours.mean_compression_progress,
                tol,
            ),
        ),
        ("curve_type_3", published.curve_type_3 == ours.curve_type_3),
    ]
}

pub fn reproduce(
    published: &[BookRecord],
    opts: DeriveOptions<'_>,
    tol: &Tolerance,
) -> ReproduceReport {
    let names: Vec<&str> = GATED_COLUMNS
        .iter()
        .chain(&INFORMATIONAL_COLUMNS)
        .copied()
        .collect();
    let mut matched = vec![0usize; names.len()];
    let mut all_gated = 0;
    let mut failures = 0;
    let mut drifts = Vec::new();

    for book in published {
        let curve = &book.novelty_curve;
        match derive_record(&book.meta(), curve, book.paragraph_count, opts) {
            Ok(ours) => {
                let result = compare(book, &ours, opts.model, tol);
                for (i, (_, ok)) in result.iter().enumerate() {
                    matched[i] += usize::from(*ok);
                }
                if result[..GATED_COLUMNS.len()].iter().all(|(_, ok)| *ok) {
                    all_gated += 1;
                }
                if let Ok(summary) = summarize_values(curve, opts.tail_fraction, opts.tau) {
                    drifts.push(trend_drift(&summary, curve.len()));
                }
            }
            Err(e) => {
                log::warn!("book {}: cannot recompute: {e}", book.gutenberg_id);
                failures += 1;
            }
        }
    }

    let n = published.len();
    let rate = |m: usize| if n == 0 { 0.0 } else { m as f64 / n as f64 };
    let columns: Vec<ColumnAgreement> = names
        .iter()
        .zip(&matched)
        .enumerate()
        .map(|(i, (name, &m))| ColumnAgreement {
            column: name.to_string(),
            gated: i < GATED_COLUMNS.len(),
            matched: m,
            compared: n,
            rate: rate(m),
        })
        .collect();
    let pass = n > 0
        && columns
            .iter()
            .filter(|c| c.gated)
            .all(|c| c.rate >= REPRODUCE_THRESHOLD);
    let grid = (0..=400).map(|i| f64::from(i) * 0.01);
    let calibration = calibrate_tau(&drifts, CORPUS_TYPE_PROPORTIONS, grid);

    ReproduceReport {
        books: n,
        failures,
        columns,
        all_gated_rate: rate(all_gated),
        pass,
        calibrated_tau: calibration.map(|c| c.0),
        calibration_distance: calibration.map(|c| c.1),
    }
}
