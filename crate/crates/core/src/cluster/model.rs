use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::novelty::CurveType;
use crate::numeric::squared_euclidean;

pub const ARCHETYPE_NAMES: [&str; 8] = [
    "Steep Descent",
    "Gradual Descent",
    "Early Plateau",
    "Late Plateau",
    "U-Shape",
    "Flat",
    "Gradual Ascent",
    "Steep Ascent",
];

#[rustfmt::skip]
pub const BUILTIN_CENTROIDS: [[f64; 16]; 8] = [
    [0.55, 0.69, 0.50, 0.26, 0.11, -0.01, -0.12, -0.16, -0.23, -0.24, -0.27, -0.27, -0.27, -0.26, -0.23, -0.02],
    [-2.25, 1.36, 0.78, 0.25, 0.21, 0.04, -0.02, -0.13, -0.16, -0.17, -0.18, -0.19, -0.12, -0.17, -0.16, 0.14],
    [0.55, 0.09, -0.06, -0.10, -0.11, -0.11, -0.10, -0.10, -0.08, -0.04, 0.01, -0.01, 0.00, 0.02, -0.03, 0.09],
    [-0.16, -0.28, -0.24, -0.18, -0.10, -0.03, 0.03, 0.09, 0.12, 0.11, 0.09, 0.05, 0.07, 0.08, 0.10, 0.24],
    [0.32, 0.10, -0.04, -0.09, -0.13, -0.16, -0.15, -0.16, -0.16, -0.17, -0.16, -0.18, -0.16, -0.14, 0.06, 1.21],
    [0.00, 0.02, 0.08, 0.10, 0.08, 0.06, 0.04, 0.02, -0.01, -0.03, -0.05, -0.05, -0.06, -0.09, -0.09, -0.03],
    [0.03, -0.18, -0.21, -0.20, -0.22, -0.21, -0.22, -0.23, -0.24, -0.26, -0.25, -0.21, 0.01, 0.47, 0.93, 0.98],
    [-0.13, -0.36, -0.37, -0.40, -0.39, -0.37, -0.36, -0.30, -0.18, 0.03, 0.29, 0.54, 0.59, 0.51, 0.43, 0.47],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Fitted,
    Builtin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub names: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub index: usize,
    pub name: String,
    pub distance: f64,
}

/// The eight published archetype centroids (16-segment z-scored PAA).
pub fn builtin_centroids() -> ClusterModel {
    ClusterModel {
        centroids: BUILTIN_CENTROIDS.iter().map(|r| r.to_vec()).collect(),
        names: ARCHETYPE_NAMES.iter().map(|s| s.to_string()).collect(),
        provenance: Provenance::Builtin,
    }
}

/// Three-way grouping of the eight builtin archetypes (0-based cluster index).
pub fn legacy_curve_type(cluster: usize) -> Option<CurveType> {
    match cluster {
        0..=2 => Some(CurveType::Convergent),
        3..=5 => Some(CurveType::Plateau),
        6 | 7 => Some(CurveType::Divergent),
        _ => None,
    }
}

impl ClusterModel {
    pub fn new(
        centroids: Vec<Vec<f64>>,
        names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if centroids.is_empty() || centroids.len() != names.len() {
            return Err(Error::InvalidParameter(format!(
                "{} centroids with {} names",
                centroids.len(),
                names.len()
            )));
        }
        let dim = centroids[0].len();
        if let Some(bad) = centroids.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self {
            centroids,
            names,
            provenance,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    /// Nearest centroid by Euclidean distance; ties go to the lowest index.
    pub fn assign(&self, paa: &[f64]) -> Result<Assignment> {
        if paa.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: paa.len(),
            });
        }
        let (index, d2) = self
            .centroids
            .iter()
            .map(|c| squared_euclidean(c, paa))
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, d)| if d < best.1 { (i, d) } else { best },
            );
        Ok(Assignment {
            index,
            name: self.names[index].clone(),
            distance: d2.sqrt(),
        })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name.trim()))
    }

    /// One centroid per line: tab-separated values, then the name.
    pub fn to_text(&self) -> String {
        let provenance = match self.provenance {
            Provenance::Fitted => "fitted",
            Provenance::Builtin => "builtin",
        };
        let mut out = format!(
            "# novelty cluster model k={} provenance={}\n",
            self.k(),
            provenance
        );
        for (c, name) in self.centroids.iter().zip(&self.names) {
            for v in c {
                write!(out, "{v}\t").unwrap();
            }
            out.push_str(name);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut provenance = Provenance::Fitted;
        let mut centroids = Vec::new();
        let mut names = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if let Some(header) = line.strip_prefix('#') {
                if header.contains("provenance=builtin") {
                    provenance = Provenance::Builtin;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 {
                return Err(Error::InvalidRecord(format!(
                    "model line {}: too few fields",
                    lineno + 1
                )));
            }
            let (values, name) = fields.split_at(fields.len() - 1);
            let row = values
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidRecord(format!("model line {}: {e}", lineno + 1)))?;
            centroids.push(row);
            names.push(name[0].trim().to_string());
        }
        Self::new(centroids, names, provenance)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::WriteFailure {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
