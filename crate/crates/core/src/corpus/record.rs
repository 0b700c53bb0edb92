//! The 24-column per-book dataset row and its CSV/JSONL serialization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::genre::{classify_genre, Genre};
use super::table::{
    cell_f64, cell_f64_list, cell_integer, cell_required_f64, cell_str, cell_str_list, read_table,
    Row, TableFormat,
};
use crate::error::{Error, Result};
use crate::novelty::CurveType;
use crate::repr::{PAA_SEGMENTS, SAX_ALPHABET};

pub const DATASET_COLUMNS: [&str; 24] = [
    "gutenberg_id",
    "title",
    "authors",
    "pub_year",
    "subjects",
    "bookshelves",
    "download_count",
    "primary_genre",
    "paragraph_count",
    "mean_novelty",
    "std_novelty",
    "ti_ratio",
    "trend_slope",
    "mean_compression_progress",
    "curve_type_3",
    "cluster_8",
    "cluster_name",
    "speed",
    "volume",
    "circuitousness",
    "reversal_count",
    "sax_16_5",
    "novelty_curve",
    "paa_16",
];

/// Significant digits for scalar reals in exports.
pub const SCALAR_DIGITS: usize = 6;
/// Significant digits for the elements of `novelty_curve` and `paa_16`.
pub const SERIES_DIGITS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookMeta {
    pub gutenberg_id: u64,
    pub title: String,
    pub authors: Vec<String>,
    pub pub_year: Option<i64>,
    pub subjects: Vec<String>,
    pub bookshelves: Vec<String>,
    pub download_count: u64,
    pub primary_genre: Genre,
}

impl BookMeta {
    /// Placeholder metadata for a book missing from the metadata table.
    pub fn unknown(gutenberg_id: u64) -> Self {
        Self {
            gutenberg_id,
            title: String::new(),
            authors: Vec::new(),
            pub_year: None,
            subjects: Vec::new(),
            bookshelves: Vec::new(),
            download_count: 0,
            primary_genre: Genre::Other,
        }
    }

    /// Reads the metadata columns of a row. A missing or unrecognized
    /// `primary_genre` is derived from the subject headings.
    pub fn from_row(row: &Row) -> Result<Self> {
        let gutenberg_id = cell_integer(row, "gutenberg_id")?
            .filter(|&id| id >= 0)
            .ok_or_else(|| {
                Error::InvalidRecord("gutenberg_id must be a non-negative integer".into())
            })? as u64;
        let optional_list = |col: &str| {
            if row.contains_key(col) {
                cell_str_list(row, col)
            } else {
                Ok(Vec::new())
            }
        };
        let subjects = optional_list("subjects")?;
        let download_count = if row.contains_key("download_count") {
            cell_integer(row, "download_count")?.unwrap_or(0)
        } else {
            0
        };
        if download_count < 0 {
            return Err(Error::InvalidRecord(format!(
                "book {gutenberg_id}: negative download_count"
            )));
        }
        let primary_genre = cell_str(row, "primary_genre")
            .parse()
            .unwrap_or_else(|_| classify_genre(&subjects));
        Ok(Self {
            gutenberg_id,
            title: cell_str(row, "title"),
            authors: optional_list("authors")?,
            pub_year: if row.contains_key("pub_year") {
                cell_integer(row, "pub_year")?
            } else {
                None
            },
            subjects,
            bookshelves: optional_list("bookshelves")?,
            download_count: download_count as u64,
            primary_genre,
        })
    }

    pub fn to_row(&self) -> Row {
        let mut row = Row::new();
        row.insert("gutenberg_id".into(), self.gutenberg_id.into());
        row.insert("title".into(), self.title.clone().into());
        row.insert("authors".into(), self.authors.clone().into());
        row.insert(
            "pub_year".into(),
            self.pub_year.map_or(Value::Null, Value::from),
        );
        row.insert("subjects".into(), self.subjects.clone().into());
        row.insert("bookshelves".into(), self.bookshelves.clone().into());
        row.insert("download_count".into(), self.download_count.into());
        row.insert("primary_genre".into(), self.primary_genre.as_str().into());
        row
    }
}

pub fn read_meta_table(path: &Path) -> Result<Vec<BookMeta>> {
    read_table(path)?.iter().map(BookMeta::from_row).collect()
}

pub fn write_meta_jsonl(metas: &[BookMeta], path: &Path) -> Result<()> {
    let wrap = |source| Error::WriteFailure {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    for m in metas {
        writeln!(w, "{}", Value::Object(m.to_row())).map_err(wrap)?;
    }
    w.flush().map_err(wrap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BookRecord {
    pub gutenberg_id: u64,
    pub title: String,
    pub authors: Vec<String>,
    pub pub_year: Option<i64>,
    pub subjects: Vec<String>,
    pub bookshelves: Vec<String>,
    pub download_count: u64,
    pub primary_genre: Genre,
    pub paragraph_count: usize,
    pub mean_novelty: f64,
    pub std_novelty: f64,
    pub ti_ratio: f64,
    pub trend_slope: f64,
    pub mean_compression_progress: f64,
    pub curve_type_3: CurveType,
    pub cluster_8: usize,
    pub cluster_name: String,
    pub speed: f64,
    pub volume: f64,
    /// `None` when the net displacement of the curve is zero.
    pub circuitousness: Option<f64>,
    pub reversal_count: usize,
    pub sax_16_5: String,
    pub novelty_curve: Vec<f64>,
    pub paa_16: Vec<f64>,
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn real(x: f64, digits: usize) -> Value {
    serde_json::Number::from_f64(round_significant(x, digits)).map_or(Value::Null, Value::Number)
}

fn reals(xs: &[f64], digits: usize) -> Value {
    Value::Array(xs.iter().map(|&x| real(x, digits)).collect())
}

impl BookRecord {
    pub fn meta(&self) -> BookMeta {
        BookMeta {
            gutenberg_id: self.gutenberg_id,
            title: self.title.clone(),
            authors: self.authors.clone(),
            pub_year: self.pub_year,
            subjects: self.subjects.clone(),
            bookshelves: self.bookshelves.clone(),
            download_count: self.download_count,
            primary_genre: self.primary_genre,
        }
    }

    /// Column values in dataset order, rounded as exported.
    pub fn to_values(&self) -> [Value; 24] {
        [
            self.gutenberg_id.into(),
            self.title.clone().into(),
            self.authors.clone().into(),
            self.pub_year.map_or(Value::Null, Value::from),
            self.subjects.clone().into(),
            self.bookshelves.clone().into(),
            self.download_count.into(),
            self.primary_genre.as_str().into(),
            self.paragraph_count.into(),
            real(self.mean_novelty, SCALAR_DIGITS),
            real(self.std_novelty, SCALAR_DIGITS),
            real(self.ti_ratio, SCALAR_DIGITS),
            real(self.trend_slope, SCALAR_DIGITS),
            real(self.mean_compression_progress, SCALAR_DIGITS),
            self.curve_type_3.as_str().into(),
            self.cluster_8.into(),
            self.cluster_name.clone().into(),
            real(self.speed, SCALAR_DIGITS),
            real(self.volume, SCALAR_DIGITS),
            self.circuitousness
                .map_or(Value::Null, |c| real(c, SCALAR_DIGITS)),
            self.reversal_count.into(),
            self.sax_16_5.clone().into(),
            reals(&self.novelty_curve, SERIES_DIGITS),
            reals(&self.paa_16, SERIES_DIGITS),
        ]
    }

    /// The record as it reads back after an export.
    pub fn rounded(&self) -> Self {
        let mut r = self.clone();
        for x in [
            &mut r.mean_novelty,
            &mut r.std_novelty,
            &mut r.ti_ratio,
            &mut r.trend_slope,
            &mut r.mean_compression_progress,
            &mut r.speed,
            &mut r.volume,
        ] {
            *x = round_significant(*x, SCALAR_DIGITS);
        }
        r.circuitousness = r
            .circuitousness
            .map(|c| round_significant(c, SCALAR_DIGITS));
        for x in r.novelty_curve.iter_mut().chain(r.paa_16.iter_mut()) {
            *x = round_significant(*x, SERIES_DIGITS);
        }
        r
    }

    pub fn from_row(row: &Row) -> Result<Self> {
        let meta = BookMeta::from_row(row)?;
        let id = meta.gutenberg_id;
        let context = |e: Error| Error::InvalidRecord(format!("book {id}: {e}"));
        let count = |col: &str| -> Result<usize> {
            cell_integer(row, col)?
                .filter(|&v| v >= 0)
                .map(|v| v as usize)
                .ok_or_else(|| {
                    Error::InvalidRecord(format!("column {col:?} must be a non-negative integer"))
                })
        };
        let build = || -> Result<Self> {
            Ok(Self {
                paragraph_count: count("paragraph_count")?,
                mean_novelty: cell_required_f64(row, "mean_novelty")?,
                std_novelty: cell_required_f64(row, "std_novelty")?,
                ti_ratio: cell_f64(row, "ti_ratio")?.unwrap_or(f64::NAN),
                trend_slope: cell_required_f64(row, "trend_slope")?,
                mean_compression_progress: cell_required_f64(row, "mean_compression_progress")?,
                curve_type_3: cell_str(row, "curve_type_3").parse()?,
                cluster_8: count("cluster_8")?,
                cluster_name: cell_str(row, "cluster_name"),
                speed: cell_required_f64(row, "speed")?,
                volume: cell_required_f64(row, "volume")?,
                circuitousness: cell_f64(row, "circuitousness")?,
                reversal_count: count("reversal_count")?,
                sax_16_5: cell_str(row, "sax_16_5"),
                novelty_curve: cell_f64_list(row, "novelty_curve")?,
                paa_16: cell_f64_list(row, "paa_16")?,
                gutenberg_id: meta.gutenberg_id,
                title: meta.title.clone(),
                authors: meta.authors.clone(),
                pub_year: meta.pub_year,
                subjects: meta.subjects.clone(),
                bookshelves: meta.bookshelves.clone(),
                download_count: meta.download_count,
                primary_genre: meta.primary_genre,
            })
        };
        build().map_err(context)
    }

    /// Checks the schema invariants required of every exported row.
    pub fn validate(&self, min_paragraphs: usize) -> Result<()> {
        let fail = |msg: String| {
            Err(Error::InvalidRecord(format!(
                "book {}: {msg}",
                self.gutenberg_id
            )))
        };
        if self.sax_16_5.chars().count() != PAA_SEGMENTS
            || !self.sax_16_5.chars().all(|c| SAX_ALPHABET.contains(&c))
        {
            return fail(format!(
                "sax_16_5 {:?} is not 16 symbols over a..e",
                self.sax_16_5
            ));
        }
        if self.paa_16.len() != PAA_SEGMENTS {
            return fail(format!("paa_16 has {} segments", self.paa_16.len()));
        }
        if self.paragraph_count < min_paragraphs {
            return fail(format!(
                "paragraph_count {} below {min_paragraphs}",
                self.paragraph_count
            ));
        }
        if self.novelty_curve.len() + 1 != self.paragraph_count {
            return fail(format!(
                "novelty_curve has {} points for {} paragraphs",
                self.novelty_curve.len(),
                self.paragraph_count
            ));
        }
        if let Some(c) = self.circuitousness {
            if !c.is_finite() {
                return fail("circuitousness must be finite or null".into());
            }
        }
        Ok(())
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn write_dataset<W: Write>(
    records: &[BookRecord],
    writer: W,
    format: TableFormat,
) -> Result<()> {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(DATASET_COLUMNS)?;
            for r in records {
                w.write_record(r.to_values().iter().map(csv_cell))?;
            }
            w.flush()?;
        }
        TableFormat::Jsonl => {
            let mut w = writer;
            for r in records {
                // written by hand so keys keep dataset order
                let mut line = String::from("{");
                for (i, (col, v)) in DATASET_COLUMNS.iter().zip(r.to_values()).enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    line.push_str(&Value::from(*col).to_string());
                    line.push(':');
                    line.push_str(&v.to_string());
                }
                line.push_str("}\n");
                w.write_all(line.as_bytes())?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn export_dataset(records: &[BookRecord], path: &Path, format: TableFormat) -> Result<()> {
    let wrap = |source| Error::WriteFailure {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(wrap)?;
    write_dataset(records, BufWriter::new(file), format).map_err(|e| match e {
        Error::Io(source) => wrap(source),
        Error::Csv(c) => wrap(std::io::Error::other(c)),
        other => other,
    })
}

pub fn import_dataset(path: &Path) -> Result<Vec<BookRecord>> {
    read_table(path)?.iter().map(BookRecord::from_row).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::super::table::{read_csv, read_jsonl};
    use super::*;

    pub(crate) fn sample_record(id: u64) -> BookRecord {
        let novelty_curve: Vec<f64> = (0..21)
            .map(|i| 0.5 + 0.01234567 * (i as f64).sin())
            .collect();
        BookRecord {
            gutenberg_id: id,
            title: "A \"Quoted\", Title".into(),
            authors: vec!["Doe, Jane".into()],
            pub_year: Some(1851),
            subjects: vec!["Whales -- Fiction".into(), "Sea stories".into()],
            bookshelves: vec![],
            download_count: 12345,
            primary_genre: Genre::Fiction,
            paragraph_count: 22,
            mean_novelty: 0.512345678,
            std_novelty: 0.0087654321,
            ti_ratio: 1.0123456789,
            trend_slope: -1.23456789e-5,
            mean_compression_progress: 3.3333333e-4,
            curve_type_3: CurveType::Plateau,
            cluster_8: 3,
            cluster_name: "Steady Plateau".into(),
            speed: 0.0111111111,
            volume: 7.77777777e-5,
            circuitousness: None,
            reversal_count: 4,
            sax_16_5: "cccdddcccbbbcccc".into(),
            novelty_curve,
            paa_16: (0..16).map(|i| (i as f64 - 7.5) / 4.123456).collect(),
        }
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_significant(0.123456789, 6), 0.123457);
        assert_eq!(round_significant(-98765.4321, 4), -98770.0);
        assert_eq!(round_significant(1.23456789e-7, 6), 1.23457e-7);
        assert_eq!(round_significant(0.0, 6), 0.0);
    }

    #[test]
    fn csv_header_is_the_column_list() {
        let mut buf = Vec::new();
        write_dataset(&[], &mut buf, TableFormat::Csv).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\n", DATASET_COLUMNS.join(","))
        );
        let mut buf = Vec::new();
        write_dataset(&[], &mut buf, TableFormat::Jsonl).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn jsonl_round_trip() {
        let mut r = sample_record(11);
        r.circuitousness = Some(3.25159265);
        let records = vec![sample_record(10), r];
        let mut buf = Vec::new();
        write_dataset(&records, &mut buf, TableFormat::Jsonl).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"gutenberg_id\":10,\"title\":"));
        assert!(text.contains("\"circuitousness\":null"));
        let back: Vec<BookRecord> = read_jsonl(&buf[..])
            .unwrap()
            .iter()
            .map(|r| BookRecord::from_row(r).unwrap())
            .collect();
        let expected: Vec<BookRecord> = records.iter().map(BookRecord::rounded).collect();
        assert_eq!(back, expected);
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![sample_record(5)];
        let mut buf = Vec::new();
        write_dataset(&records, &mut buf, TableFormat::Csv).unwrap();
        let back = BookRecord::from_row(&read_csv(&buf[..]).unwrap()[0]).unwrap();
        assert_eq!(back, records[0].rounded());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"[\"\"Doe, Jane\"\"]\""));
    }

    #[test]
    fn validation() {
        let r = sample_record(1);
        assert!(r.validate(20).is_ok());
        assert!(r.validate(30).is_err());
        let mut bad = r.clone();
        bad.sax_16_5 = "cccf".into();
        assert!(bad.validate(20).is_err());
        let mut bad = r;
        bad.paa_16.pop();
        assert!(bad.validate(20).is_err());
    }

    #[test]
    fn meta_genre_fallback() {
        let row =
            read_jsonl(r#"{"gutenberg_id": 9, "subjects": ["Voyages and travels"]}"#.as_bytes())
                .unwrap();
        let m = BookMeta::from_row(&row[0]).unwrap();
        assert_eq!(m.primary_genre, Genre::TravelGeography);
        assert_eq!(m.pub_year, None);
    }
}
