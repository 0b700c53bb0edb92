use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use novelty_core::cluster::{k_selection, silhouette, ward_fit, wcss, WardOptions};
use novelty_core::corpus::synth::{
    synthetic_corpus, write_synthetic_corpus, SyntheticCorpusConfig,
};
use novelty_core::corpus::{
    cell_f64, cell_f64_list, cell_integer, cell_str, export_dataset, import_dataset, read_table,
    reassign_clusters, reproduce, round_significant, run_pipeline, DeriveOptions, EmbeddingSource,
    PipelineConfig, Row, TableFormat, Tolerance, SERIES_DIGITS,
};
use novelty_core::repr::{paa_sax, PAA_SEGMENTS};
use novelty_core::shapelet::{discover_shapelets, LabeledSeries, ShapeletConfig};
use novelty_core::stats::{
    chi_square_independence, kruskal_wallis, mann_whitney_u, ols_fit, partial_spearman, spearman,
};
use novelty_core::{builtin_centroids, ClusterModel};
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, AssignArgs, FitArgs, Format, ReproduceArgs, SaxArgs, ShapeletArgs, StatsArgs,
    SynthArgs,
};

/// Successful runs either complete or complete with some inputs rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    Partial,
}

pub const WORKERS_ENV: &str = "NOVELTY_WORKERS";

fn load_model(arg: &str) -> Result<ClusterModel> {
    if arg.eq_ignore_ascii_case("builtin") {
        return Ok(builtin_centroids());
    }
    ClusterModel::read(Path::new(arg)).with_context(|| format!("cannot load cluster model {arg}"))
}

fn resolve_workers(flag: usize) -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("{WORKERS_ENV}={v:?} is not a positive integer")),
        Err(_) if flag == 0 => bail!("--workers must be positive"),
        Err(_) => Ok(flag),
    }
}

fn print_json(value: &Value) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn row_id(row: &Row, index: usize) -> String {
    match cell_integer(row, "gutenberg_id") {
        Ok(Some(id)) => id.to_string(),
        _ => index.to_string(),
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Outcome> {
    let format = match args.format {
        Some(Format::Csv) => TableFormat::Csv,
        Some(Format::Jsonl) => TableFormat::Jsonl,
        None => TableFormat::from_path(&args.out).unwrap_or(TableFormat::Csv),
    };
    let fit = args.centroids.eq_ignore_ascii_case("fit");
    let model = if fit {
        builtin_centroids()
    } else {
        load_model(&args.centroids)?
    };
    let embeddings = match &args.embeddings {
        Some(dir) => EmbeddingSource::Directory(dir.clone()),
        None => EmbeddingSource::Hash { dim: args.hash_dim },
    };

    let mut config = PipelineConfig::new(embeddings, model);
    config.input = args.input.clone();
    config.meta = args.meta.clone();
    config.min_paragraphs = args.min_paragraphs;
    config.seed = args.seed;
    config.workers = resolve_workers(args.workers)?;
    config.tau = args.tau;
    config.dump_paragraphs = args.dump_paragraphs.clone();

    let mut output = run_pipeline(&config)?;
    if fit {
        let points: Vec<&[f64]> = output.records.iter().map(|r| r.paa_16.as_slice()).collect();
        let options = WardOptions {
            sample: Some(args.fit_sample),
            seed: args.seed,
        };
        let fitted = ward_fit(&points, args.fit_k, options).context("cluster fit failed")?;
        reassign_clusters(&mut output, &fitted.model)?;
    }

    export_dataset(&output.records, &args.out, format)?;
    let report_path = args.report.clone().unwrap_or_else(|| {
        let mut name = args.out.clone().into_os_string();
        name.push(".report.json");
        PathBuf::from(name)
    });
    write_file(&report_path, &serde_json::to_string_pretty(&output.report)?)?;
    info!(
        "exported {} books to {}, skipped {}",
        output.report.books_exported,
        args.out.display(),
        output.report.books_skipped
    );
    Ok(if output.report.books_skipped > 0 {
        Outcome::Partial
    } else {
        Outcome::Complete
    })
}

fn read_vectors(path: &Path, column: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let rows = read_table(path)?;
    let mut ids = Vec::with_capacity(rows.len());
    let mut vectors = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let v = cell_f64_list(row, column).with_context(|| format!("row {}", i + 1))?;
        ids.push(row_id(row, i));
        vectors.push(v);
    }
    Ok((ids, vectors))
}

fn parse_k_range(arg: &str) -> Result<Vec<usize>> {
    let (a, b) = arg
        .split_once('-')
        .ok_or_else(|| anyhow!("expected a range like 4-12, got {arg:?}"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a == 0 || a > b {
        bail!("invalid k range {arg:?}");
    }
    Ok((a..=b).collect())
}

pub fn fit_clusters(args: &FitArgs) -> Result<Outcome> {
    let (_, points) = read_vectors(&args.paa, &args.column)?;
    let sample = (args.sample < points.len()).then_some(args.sample);
    let fit = ward_fit(
        &points,
        args.k,
        WardOptions {
            sample,
            seed: args.seed,
        },
    )?;
    fit.model.write(&args.out)?;

    let fitted: Vec<&[f64]> = fit
        .sample_indices
        .iter()
        .map(|&i| points[i].as_slice())
        .collect();
    let mut sizes = vec![0usize; args.k];
    for &l in &fit.labels {
        sizes[l] += 1;
    }
    let mut summary = json!({
        "k": args.k,
        "points": points.len(),
        "fitted": fitted.len(),
        "cluster_sizes": sizes,
        "wcss": wcss(&fitted, &fit.labels)?,
        "silhouette": if args.k >= 2 { Some(silhouette(&fitted, &fit.labels)?) } else { None },
        "model": args.out,
    });
    if let Some(arg) = &args.diagnostics {
        let ks = parse_k_range(arg)?;
        summary["diagnostics"] = serde_json::to_value(k_selection(&fitted, &fit.dendrogram, &ks)?)?;
    }
    print_json(&summary)?;
    Ok(Outcome::Complete)
}

fn csv_output(out: Option<&PathBuf>) -> Result<csv::Writer<Box<dyn std::io::Write>>> {
    let sink: Box<dyn std::io::Write> = match out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

pub fn assign(args: &AssignArgs) -> Result<Outcome> {
    let model = load_model(&args.model)?;
    let (ids, vectors) = read_vectors(&args.paa, &args.column)?;
    let mut w = csv_output(args.out.as_ref())?;
    w.write_record(["id", "cluster_8", "cluster_name", "distance"])?;
    for (id, v) in ids.iter().zip(&vectors) {
        let a = model.assign(v).with_context(|| format!("row {id}"))?;
        w.write_record([
            id.clone(),
            a.index.to_string(),
            a.name,
            a.distance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(Outcome::Complete)
}

fn read_curves(path: &Path, column: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let is_table = TableFormat::from_path(path).is_ok();
    if is_table {
        return read_vectors(path, column);
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut ids = Vec::new();
    let mut curves = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let curve = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("line {}", i + 1))?;
        ids.push(curves.len().to_string());
        curves.push(curve);
    }
    Ok((ids, curves))
}

pub fn sax(args: &SaxArgs) -> Result<Outcome> {
    let (ids, curves) = read_curves(&args.curves, &args.column)?;
    let mut w = csv_output(args.out.as_ref())?;
    w.write_record(["id", "sax_16_5", "paa_16"])?;
    let mut rejected = 0;
    for (id, curve) in ids.iter().zip(&curves) {
        match paa_sax(curve, PAA_SEGMENTS) {
            Ok((paa, sax)) => {
                let rounded: Vec<f64> = paa
                    .segments()
                    .iter()
                    .map(|&x| round_significant(x, SERIES_DIGITS))
                    .collect();
                w.write_record([id.as_str(), sax.as_str(), &serde_json::to_string(&rounded)?])?;
            }
            Err(e) => {
                log::warn!("curve {id}: {e}");
                rejected += 1;
            }
        }
    }
    w.flush()?;
    Ok(if rejected > 0 {
        Outcome::Partial
    } else {
        Outcome::Complete
    })
}

fn split_pair<'a>(arg: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    arg.split_once(':')
        .map(|(a, b)| (a.trim(), b.trim()))
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| anyhow!("{what} expects A:B, got {arg:?}"))
}

/// Rows where every requested numeric column is present, as parallel columns.
fn numeric_columns(rows: &[Row], cols: &[&str]) -> Result<(Vec<Vec<f64>>, usize)> {
    let mut out = vec![Vec::new(); cols.len()];
    let mut dropped = 0;
    for (i, row) in rows.iter().enumerate() {
        let values = cols
            .iter()
            .map(|c| cell_f64(row, c).with_context(|| format!("row {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        if values.iter().all(Option::is_some) {
            for (col, v) in out.iter_mut().zip(values) {
                col.push(v.expect("checked"));
            }
        } else {
            dropped += 1;
        }
    }
    Ok((out, dropped))
}

/// Numeric values of `value_col` grouped by the text of `group_col`.
fn grouped(
    rows: &[Row],
    group_col: &str,
    value_col: &str,
) -> Result<(BTreeMap<String, Vec<f64>>, usize)> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut dropped = 0;
    for (i, row) in rows.iter().enumerate() {
        if !row.contains_key(group_col) {
            bail!("missing column {group_col:?}");
        }
        let g = cell_str(row, group_col);
        match cell_f64(row, value_col).with_context(|| format!("row {}", i + 1))? {
            Some(v) if !g.is_empty() => groups.entry(g).or_default().push(v),
            _ => dropped += 1,
        }
    }
    Ok((groups, dropped))
}

pub fn stats(args: &StatsArgs) -> Result<Outcome> {
    let rows = read_table(&args.data)?;
    let result = if let Some(arg) = &args.pair {
        let (x, y) = split_pair(arg, "--pair")?;
        match &args.control {
            Some(z) => {
                let (cols, dropped) = numeric_columns(&rows, &[x, y, z])?;
                let c = partial_spearman(&cols[0], &cols[1], &cols[2])?;
                json!({"test": "partial_spearman", "x": x, "y": y, "control": z, "rho": c.rho,
                       "p_value": c.p_value, "n": c.n, "dropped": dropped})
            }
            None => {
                let (cols, dropped) = numeric_columns(&rows, &[x, y])?;
                let c = spearman(&cols[0], &cols[1])?;
                json!({"test": "spearman", "x": x, "y": y, "rho": c.rho, "p_value": c.p_value,
                       "n": c.n, "dropped": dropped})
            }
        }
    } else if let Some(arg) = &args.chisq {
        let (a, b) = split_pair(arg, "--chisq")?;
        let mut counts: BTreeMap<(String, String), f64> = BTreeMap::new();
        for row in &rows {
            let (va, vb) = (cell_str(row, a), cell_str(row, b));
            if !va.is_empty() && !vb.is_empty() {
                *counts.entry((va, vb)).or_default() += 1.0;
            }
        }
        let row_levels: Vec<String> = counts
            .keys()
            .map(|k| k.0.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let col_levels: Vec<String> = counts
            .keys()
            .map(|k| k.1.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let table: Vec<Vec<f64>> = row_levels
            .iter()
            .map(|r| {
                col_levels
                    .iter()
                    .map(|c| counts.get(&(r.clone(), c.clone())).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        let t = chi_square_independence(&table)?;
        json!({"test": "chi_square", "rows": a, "columns": b, "row_levels": row_levels,
               "column_levels": col_levels, "table": table, "statistic": t.statistic,
               "dof": t.dof, "p_value": t.p_value})
    } else if let Some(arg) = &args.kw {
        let (g, v) = split_pair(arg, "--kw")?;
        let (groups, dropped) = grouped(&rows, g, v)?;
        let samples: Vec<Vec<f64>> = groups.values().cloned().collect();
        let t = kruskal_wallis(&samples)?;
        let sizes: BTreeMap<&String, usize> = groups.iter().map(|(k, s)| (k, s.len())).collect();
        json!({"test": "kruskal_wallis", "group": g, "value": v, "group_sizes": sizes,
               "statistic": t.statistic, "dof": t.dof, "p_value": t.p_value, "dropped": dropped})
    } else if let Some(arg) = &args.mw {
        let (g, v) = split_pair(arg, "--mw")?;
        let (groups, dropped) = grouped(&rows, g, v)?;
        let levels: Vec<String> = match &args.groups {
            Some(l) if l.len() == 2 => l.clone(),
            Some(l) => bail!("--groups needs exactly two levels, got {}", l.len()),
            None if groups.len() == 2 => groups.keys().cloned().collect(),
            None => bail!(
                "column {g:?} has {} levels; choose two with --groups",
                groups.len()
            ),
        };
        let sample = |l: &String| {
            groups
                .get(l)
                .cloned()
                .ok_or_else(|| anyhow!("no rows with {g} = {l:?}"))
        };
        let (a, b) = (sample(&levels[0])?, sample(&levels[1])?);
        let t = mann_whitney_u(&a, &b)?;
        json!({"test": "mann_whitney_u", "group": g, "value": v, "levels": levels,
               "sizes": [a.len(), b.len()], "u": t.statistic, "p_value": t.p_value,
               "effect_direction": t.effect_direction, "dropped": dropped})
    } else if let Some(arg) = &args.ols {
        let (y, xs) = split_pair(arg, "--ols")?;
        let predictors: Vec<&str> = xs
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let mut cols: Vec<&str> = vec![y];
        cols.extend(&predictors);
        let (mut data, dropped) = numeric_columns(&rows, &cols)?;
        let yv = data.remove(0);
        let fit = ols_fit(&data, &yv)?;
        json!({"test": "ols", "response": y, "predictors": predictors, "fit": fit, "n": yv.len(),
               "dropped": dropped})
    } else {
        bail!("no test requested");
    };
    print_json(&result)?;
    Ok(Outcome::Complete)
}

pub fn shapelets(args: &ShapeletArgs) -> Result<Outcome> {
    let [positive, negative] = args.classes.as_slice() else {
        bail!(
            "--classes expects exactly two labels, got {:?}",
            args.classes
        );
    };
    let rows = read_table(&args.data)?;
    let mut dataset = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let label = cell_str(row, &args.label_col);
        let class = if &label == positive {
            true
        } else if &label == negative {
            false
        } else {
            continue;
        };
        let id = match cell_integer(row, "gutenberg_id") {
            Ok(Some(id)) if id >= 0 => id as u64,
            _ => i as u64,
        };
        let values =
            cell_f64_list(row, &args.series_col).with_context(|| format!("row {}", i + 1))?;
        dataset.push(LabeledSeries {
            id,
            values,
            label: class,
        });
    }
    let config = ShapeletConfig {
        min_len: args.min_len,
        max_len: args.max_len,
        top_k: args.top_k,
        sample: args.sample,
        seed: args.seed,
    };
    let found = discover_shapelets(&dataset, &config)?;
    let positives = dataset.iter().filter(|s| s.label).count();
    print_json(&json!({
        "positive_class": positive,
        "negative_class": negative,
        "series": dataset.len(),
        "positives": positives,
        "shapelets": found,
    }))?;
    Ok(Outcome::Complete)
}

pub fn reproduce_cmd(args: &ReproduceArgs) -> Result<Outcome> {
    let model = load_model(&args.centroids)?;
    let records = import_dataset(&args.dataset)
        .with_context(|| format!("cannot import {}", args.dataset.display()))?;
    let report = reproduce(&records, DeriveOptions::new(&model), &Tolerance::default());
    let value = serde_json::to_value(&report)?;
    if let Some(path) = &args.report {
        write_file(path, &serde_json::to_string_pretty(&value)?)?;
    }
    print_json(&value)?;
    Ok(if report.pass {
        Outcome::Complete
    } else {
        Outcome::Partial
    })
}

pub fn synth(args: &SynthArgs) -> Result<Outcome> {
    let config = SyntheticCorpusConfig {
        books_per_archetype: args.books_per_archetype,
        paragraphs: args.paragraphs,
        dim: args.dim,
        noise: args.noise,
        short_books: args.short_books,
        seed: args.seed,
        ..SyntheticCorpusConfig::default()
    };
    let books = synthetic_corpus(&config)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_synthetic_corpus(
        &books,
        &args.out.join("embeddings"),
        &args.out.join("meta.jsonl"),
    )?;
    info!(
        "wrote {} synthetic books to {}",
        books.len(),
        args.out.display()
    );
    Ok(Outcome::Complete)
}
