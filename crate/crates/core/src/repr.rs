//! Fixed-length and symbolic representations of novelty curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean, pop_std};

pub const PAA_SEGMENTS: usize = 16;
pub const SAX_ALPHABET: [char; 5] = ['a', 'b', 'c', 'd', 'e'];
/// Standard-normal quintile breakpoints at two decimals.
pub const SAX_BREAKPOINTS: [f64; 4] = [-0.84, -0.25, 0.25, 0.84];
pub const DEFAULT_SMOOTHING_WINDOW: usize = 10;

const DEGENERATE_STD: f64 = 1e-12;

/// Segment means of a (usually z-normalized) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaaVector(Vec<f64>);

impl PaaVector {
    pub fn new(segments: Vec<f64>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self(segments))
    }

    pub fn segments(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for PaaVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A SAX word over the five-letter alphabet `a..=e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SaxString(String);

impl SaxString {
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || !s.chars().all(|c| SAX_ALPHABET.contains(&c)) {
            return Err(Error::InvalidRecord(format!("not a SAX word: {s:?}")));
        }
        Ok(Self(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for SaxString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Rescales to population mean 0 and std 1; near-constant input maps to zeros.
pub fn znormalize(series: &[f64]) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    let m = mean(series);
    let s = pop_std(series);
    if s < DEGENERATE_STD {
        return vec![0.0; series.len()];
    }
    series.iter().map(|x| (x - m) / s).collect()
}

/// Piecewise aggregate approximation with fractional boundary weights.
///
/// Works on a grid scaled by `w * n`: point `i` covers `[i*w, (i+1)*w)` and
/// segment `j` covers `[j*n, (j+1)*n)`, so every overlap is an integer and
/// each segment's total weight is exactly `n`.
pub fn paa(series: &[f64], w: usize) -> Result<PaaVector> {
    let n = series.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    if w == 0 {
        return Err(Error::InvalidParameter(
            "PAA segment count must be positive".into(),
        ));
    }
    let mut out = Vec::with_capacity(w);
    for j in 0..w {
        let (seg_lo, seg_hi) = (j * n, (j + 1) * n);
        let first = seg_lo / w;
        let last = (seg_hi - 1) / w;
        let mut acc = 0.0;
        for (i, x) in series.iter().enumerate().take(last + 1).skip(first) {
            let lo = seg_lo.max(i * w);
            let hi = seg_hi.min((i + 1) * w);
            acc += (hi - lo) as f64 * x;
        }
        out.push(acc / n as f64);
    }
    Ok(PaaVector(out))
}

pub fn sax_symbol(v: f64) -> char {
    let idx = SAX_BREAKPOINTS.iter().take_while(|&&b| v >= b).count();
    SAX_ALPHABET[idx]
}

pub fn sax(paa: &PaaVector) -> SaxString {
    SaxString(paa.segments().iter().map(|&v| sax_symbol(v)).collect())
}

/// z-normalize, reduce to `w` segments, and discretize.
pub fn paa_sax(curve: &[f64], w: usize) -> Result<(PaaVector, SaxString)> {
    let p = paa(&znormalize(curve), w)?;
    let s = sax(&p);
    Ok((p, s))
}

/// Centered rolling mean. A window of width `w` spans `w / 2` points before
/// and `w - 1 - w / 2` after; it shrinks at the edges.
///
/// Each mean is accumulated as offsets from the window's first point, so
/// constant runs stay exactly constant and identical windows give identical
/// means.
pub fn rolling_mean(series: &[f64], window: usize) -> Vec<f64> {
    let n = series.len();
    let window = window.max(1);
    let before = window / 2;
    let after = window - 1 - before;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(n);
            let base = series[lo];
            let offset: f64 = series[lo..hi].iter().map(|x| x - base).sum();
            base + offset / (hi - lo) as f64
        })
        .collect()
}

pub fn first_diff(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Sign changes in the derivative of the smoothed curve, ignoring exact zeros.
pub fn count_reversals(curve: &[f64], window: usize) -> Result<usize> {
    if curve.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: curve.len(),
        });
    }
    let d = first_diff(&rolling_mean(curve, window))?;
    let signs: Vec<bool> = d.iter().filter(|&&x| x != 0.0).map(|&x| x > 0.0).collect();
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

/// Dynamic time warping with squared local cost; returns the square root of
/// the minimal accumulated cost. `band` is a Sakoe-Chiba half-width.
pub fn dtw_distance(a: &[f64], b: &[f64], band: Option<usize>) -> Result<f64> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(Error::EmptySeries);
    }
    if let Some(band) = band {
        if n.abs_diff(m) > band {
            return Err(Error::BandInfeasible { band, a: n, b: m });
        }
    }
    let band = band.unwrap_or(usize::MAX);

    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur.fill(f64::INFINITY);
        let lo = i.saturating_sub(band).max(1);
        let hi = i.saturating_add(band).min(m);
        for j in lo..=hi {
            let diff = a[i - 1] - b[j - 1];
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = diff * diff + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m].sqrt())
}
