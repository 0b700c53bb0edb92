//! Batch analysis of a directory of books.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::embedder::{hash_embedder, DEFAULT_HASH_DIM};
use super::genre::Genre;
use super::paragraphs::{format_paragraph_records, parse_paragraph_records, split_paragraphs};
use super::record::{read_meta_table, BookMeta, BookRecord};
use super::sne::{read_embeddings, SNE_EXTENSION};
use crate::cluster::ClusterModel;
use crate::error::{Error, Result};
use crate::metrics::path_metrics;
use crate::novelty::{
    compute_novelty_curve, summarize_values, CurveType, EmbeddingSequence, DEFAULT_TAIL_FRACTION,
    DEFAULT_TAU,
};
use crate::repr::{count_reversals, paa_sax, DEFAULT_SMOOTHING_WINDOW, PAA_SEGMENTS};

pub const MIN_PARAGRAPHS: usize = 20;
pub const TEXT_EXTENSION: &str = "txt";
pub const PARAGRAPH_EXTENSION: &str = "para";

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSource {
    /// One `<gutenberg_id>.sne1` file per book.
    Directory(PathBuf),
    /// The deterministic hashing embedder applied to the input texts.
    Hash { dim: usize },
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Directory of `<id>.txt` book texts or `<id>.para` pre-split paragraphs.
    pub input: Option<PathBuf>,
    pub embeddings: EmbeddingSource,
    pub meta: Option<PathBuf>,
    pub model: ClusterModel,
    pub min_paragraphs: usize,
    pub seed: u64,
    pub workers: usize,
    pub tail_fraction: f64,
    pub tau: f64,
    pub smoothing_window: usize,
    /// Where to write `<id>.para` paragraph files for external embedding.
    pub dump_paragraphs: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(embeddings: EmbeddingSource, model: ClusterModel) -> Self {
        Self {
            input: None,
            embeddings,
            meta: None,
            model,
            min_paragraphs: MIN_PARAGRAPHS,
            seed: 0,
            workers: 1,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            tau: DEFAULT_TAU,
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
            dump_paragraphs: None,
        }
    }

    pub fn hash(dim: usize) -> EmbeddingSource {
        EmbeddingSource::Hash { dim }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::new(
            EmbeddingSource::Hash {
                dim: DEFAULT_HASH_DIM,
            },
            crate::cluster::builtin_centroids(),
        )
    }
}

/// Parameters shared by every per-book derivation.
#[derive(Debug, Clone, Copy)]
pub struct DeriveOptions<'a> {
    pub model: &'a ClusterModel,
    pub tail_fraction: f64,
    pub tau: f64,
    pub smoothing_window: usize,
}

impl<'a> DeriveOptions<'a> {
    pub fn new(model: &'a ClusterModel) -> Self {
        Self {
            model,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            tau: DEFAULT_TAU,
            smoothing_window: DEFAULT_SMOOTHING_WINDOW,
        }
    }
}

/// Builds the full dataset row from metadata and a novelty curve.
pub fn derive_record(
    meta: &BookMeta,
    curve: &[f64],
    paragraph_count: usize,
    opts: DeriveOptions<'_>,
) -> Result<BookRecord> {
    let summary = summarize_values(curve, opts.tail_fraction, opts.tau)?;
    let (paa, sax) = paa_sax(curve, PAA_SEGMENTS)?;
    let path = path_metrics(curve)?;
    let reversal_count = count_reversals(curve, opts.smoothing_window)?;
    let assignment = opts.model.assign(paa.segments())?;
    Ok(BookRecord {
        gutenberg_id: meta.gutenberg_id,
        title: meta.title.clone(),
        authors: meta.authors.clone(),
        pub_year: meta.pub_year,
        subjects: meta.subjects.clone(),
        bookshelves: meta.bookshelves.clone(),
        download_count: meta.download_count,
        primary_genre: meta.primary_genre,
        paragraph_count,
        mean_novelty: summary.mean_novelty,
        std_novelty: summary.std_novelty,
        ti_ratio: summary.ti_ratio,
        trend_slope: summary.trend_slope,
        mean_compression_progress: summary.mean_compression_progress,
        curve_type_3: summary.curve_type_3,
        cluster_8: assignment.index,
        cluster_name: assignment.name,
        speed: path.speed,
        volume: path.volume,
        circuitousness: (!path.circuitousness_degenerate).then_some(path.circuitousness),
        reversal_count,
        sax_16_5: sax.as_str().to_string(),
        novelty_curve: curve.to_vec(),
        paa_16: paa.into_inner(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedBook {
    pub book: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterCount {
    pub index: usize,
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub books_seen: usize,
    pub books_exported: usize,
    pub books_skipped: usize,
    pub per_cluster: Vec<ClusterCount>,
    pub per_genre: BTreeMap<String, usize>,
    pub per_curve_type: BTreeMap<String, usize>,
    pub skipped: Vec<SkippedBook>,
}

impl RunReport {
    pub fn nonempty_clusters(&self) -> usize {
        self.per_cluster.iter().filter(|c| c.count > 0).count()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Exported rows, ordered by `gutenberg_id`.
    pub records: Vec<BookRecord>,
    pub report: RunReport,
}

#[derive(Debug, Clone, Default)]
struct Job {
    id: u64,
    text: Option<PathBuf>,
    pre_split: Option<PathBuf>,
    embeddings: Option<PathBuf>,
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn book_id_of(path: &Path) -> Option<u64> {
    path.file_stem()?.to_str()?.parse().ok()
}

fn extension_of(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}

fn discover(config: &PipelineConfig, skipped: &mut Vec<SkippedBook>) -> Result<Vec<Job>> {
    let mut jobs: BTreeMap<u64, Job> = BTreeMap::new();
    let note_bad_name = |path: &Path, skipped: &mut Vec<SkippedBook>| {
        skipped.push(SkippedBook {
            book: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            reason: "file name is not a numeric book id".into(),
        });
    };

    if let Some(input) = &config.input {
        for path in list_files(input)? {
            let ext = extension_of(&path);
            if ext != TEXT_EXTENSION && ext != PARAGRAPH_EXTENSION {
                continue;
            }
            let Some(id) = book_id_of(&path) else {
                note_bad_name(&path, skipped);
                continue;
            };
            let job = jobs.entry(id).or_insert_with(|| Job {
                id,
                ..Job::default()
            });
            if ext == TEXT_EXTENSION {
                job.text = Some(path);
            } else {
                job.pre_split = Some(path);
            }
        }
    }

    match &config.embeddings {
        EmbeddingSource::Directory(dir) => {
            for path in list_files(dir)? {
                if extension_of(&path) != SNE_EXTENSION {
                    continue;
                }
                let Some(id) = book_id_of(&path) else {
                    note_bad_name(&path, skipped);
                    continue;
                };
                jobs.entry(id)
                    .or_insert_with(|| Job {
                        id,
                        ..Job::default()
                    })
                    .embeddings = Some(path);
            }
        }
        EmbeddingSource::Hash { dim } => {
            if config.input.is_none() {
                return Err(Error::Config(
                    "the hash embedder needs an input directory of texts".into(),
                ));
            }
            if *dim < 2 {
                return Err(Error::Config(format!(
                    "hash embedding dimension must be at least 2, got {dim}"
                )));
            }
        }
    }
    Ok(jobs.into_values().collect())
}

fn load_paragraphs(job: &Job) -> Result<Option<Vec<String>>> {
    // pre-split paragraphs take precedence over raw text
    if let Some(path) = &job.pre_split {
        return Ok(Some(parse_paragraph_records(&std::fs::read_to_string(
            path,
        )?)));
    }
    if let Some(path) = &job.text {
        let bytes = std::fs::read(path)?;
        return split_paragraphs(&String::from_utf8_lossy(&bytes)).map(Some);
    }
    Ok(None)
}

fn process(
    job: &Job,
    meta: &BookMeta,
    config: &PipelineConfig,
) -> std::result::Result<BookRecord, String> {
    let paragraphs = load_paragraphs(job).map_err(|e| e.to_string())?;
    if let (Some(dir), Some(paras)) = (&config.dump_paragraphs, &paragraphs) {
        let path = dir.join(format!("{}.{PARAGRAPH_EXTENSION}", job.id));
        std::fs::write(&path, format_paragraph_records(paras))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    let seq = match &config.embeddings {
        EmbeddingSource::Directory(_) => {
            let path = job.embeddings.as_ref().ok_or("no embeddings file")?;
            let seq = read_embeddings(path).map_err(|e| e.to_string())?;
            if let Some(paras) = &paragraphs {
                if paras.len() != seq.len() {
                    return Err(format!(
                        "paragraph count {} does not match embedding count {}",
                        paras.len(),
                        seq.len()
                    ));
                }
            }
            seq
        }
        EmbeddingSource::Hash { dim } => {
            let paras = paragraphs.as_ref().ok_or("no text")?;
            let mut data = Vec::with_capacity(paras.len() * dim);
            for p in paras {
                data.extend(hash_embedder(p, *dim, config.seed));
            }
            EmbeddingSequence::new(job.id.to_string(), *dim, data).map_err(|e| e.to_string())?
        }
    };

    if seq.len() < config.min_paragraphs {
        return Err(format!(
            "below minimum {} paragraphs",
            config.min_paragraphs
        ));
    }
    let curve = compute_novelty_curve(&seq).map_err(|e| e.to_string())?;
    let opts = DeriveOptions {
        model: &config.model,
        tail_fraction: config.tail_fraction,
        tau: config.tau,
        smoothing_window: config.smoothing_window,
    };
    let record = derive_record(meta, &curve.values, seq.len(), opts).map_err(|e| e.to_string())?;
    record
        .validate(config.min_paragraphs)
        .map_err(|e| e.to_string())?;
    Ok(record)
}

/// Runs every book through the pipeline on a pool of `config.workers` threads.
/// Per-book failures are reported, not propagated.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutput> {
    if let Some(input) = &config.input {
        if !input.is_dir() {
            return Err(Error::Config(format!(
                "input directory {} does not exist",
                input.display()
            )));
        }
    }
    if let EmbeddingSource::Directory(dir) = &config.embeddings {
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "embeddings directory {} does not exist",
                dir.display()
            )));
        }
    }
    if config.model.dim() != PAA_SEGMENTS {
        return Err(Error::Config(format!(
            "cluster model has {} dimensions, expected {PAA_SEGMENTS}",
            config.model.dim()
        )));
    }
    if let Some(dir) = &config.dump_paragraphs {
        std::fs::create_dir_all(dir).map_err(|source| Error::WriteFailure {
            path: dir.clone(),
            source,
        })?;
    }

    let metas: BTreeMap<u64, BookMeta> = match &config.meta {
        Some(path) => read_meta_table(path)?
            .into_iter()
            .map(|m| (m.gutenberg_id, m))
            .collect(),
        None => BTreeMap::new(),
    };

    let mut skipped = Vec::new();
    let jobs = discover(config, &mut skipped)?;
    let missing_meta: BTreeSet<u64> = jobs
        .iter()
        .map(|j| j.id)
        .filter(|id| !metas.contains_key(id))
        .collect();
    if config.meta.is_some() && !missing_meta.is_empty() {
        warn!("{} books have no metadata row", missing_meta.len());
    }
    info!(
        "processing {} books on {} workers",
        jobs.len(),
        config.workers.max(1)
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(u64, std::result::Result<BookRecord, String>)> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let unknown;
                let meta = match metas.get(&job.id) {
                    Some(m) => m,
                    None => {
                        unknown = BookMeta::unknown(job.id);
                        &unknown
                    }
                };
                (job.id, process(job, meta, config))
            })
            .collect()
    });

    let mut records = Vec::new();
    for (id, result) in results {
        match result {
            Ok(r) => records.push(r),
            Err(reason) => {
                warn!("skipping book {id}: {reason}");
                skipped.push(SkippedBook {
                    book: id.to_string(),
                    reason,
                });
            }
        }
    }
    records.sort_by_key(|r| r.gutenberg_id);
    let report = build_report(&records, skipped, &config.model);
    Ok(RunOutput { records, report })
}

/// Re-assigns every record against `model` and rebuilds the report counts.
pub fn reassign_clusters(output: &mut RunOutput, model: &ClusterModel) -> Result<()> {
    for r in &mut output.records {
        let a = model.assign(&r.paa_16)?;
        r.cluster_8 = a.index;
        r.cluster_name = a.name;
    }
    let skipped = std::mem::take(&mut output.report.skipped);
    output.report = build_report(&output.records, skipped, model);
    Ok(())
}

fn build_report(
    records: &[BookRecord],
    skipped: Vec<SkippedBook>,
    model: &ClusterModel,
) -> RunReport {
    let mut per_cluster: Vec<ClusterCount> = model
        .names
        .iter()
        .enumerate()
        .map(|(index, name)| ClusterCount {
            index,
            name: name.clone(),
            count: 0,
        })
        .collect();
    let mut per_genre: BTreeMap<String, usize> =
        Genre::ALL.iter().map(|g| (g.to_string(), 0)).collect();
    let mut per_curve_type: BTreeMap<String, usize> =
        CurveType::ALL.iter().map(|t| (t.to_string(), 0)).collect();
    for r in records {
        per_cluster[r.cluster_8].count += 1;
        *per_genre.entry(r.primary_genre.to_string()).or_default() += 1;
        *per_curve_type
            .entry(r.curve_type_3.to_string())
            .or_default() += 1;
    }
    RunReport {
        books_seen: records.len() + skipped.len(),
        books_exported: records.len(),
        books_skipped: skipped.len(),
        per_cluster,
        per_genre,
        per_curve_type,
        skipped,
    }
}
