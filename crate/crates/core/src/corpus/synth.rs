//! Synthetic books with prescribed novelty curves, generated from the builtin
//! archetype centroids.

use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::genre::classify_genre;
use super::record::{write_meta_jsonl, BookMeta};
use super::sne::{write_embeddings, SNE_EXTENSION};
use crate::cluster::{ARCHETYPE_NAMES, BUILTIN_CENTROIDS};
use crate::error::{Error, Result};
use crate::novelty::EmbeddingSequence;
use crate::numeric::dot;

/// Linear interpolation of a segment profile to `len` points, with knot `j`
/// at the centre of segment `j`. Ends are held flat.
pub fn interpolate_profile(profile: &[f64], len: usize) -> Vec<f64> {
    let w = profile.len();
    (0..len)
        .map(|i| {
            let t = ((i as f64 + 0.5) * w as f64 / len as f64 - 0.5).clamp(0.0, (w - 1) as f64);
            let lo = t.floor() as usize;
            let hi = (lo + 1).min(w - 1);
            let frac = t - lo as f64;
            profile[lo] * (1.0 - frac) + profile[hi] * frac
        })
        .collect()
}

/// Interpolated archetype plus i.i.d. Gaussian noise of standard deviation `sigma`.
pub fn archetype_curve<R: Rng + ?Sized>(
    archetype: usize,
    len: usize,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let profile = BUILTIN_CENTROIDS
        .get(archetype)
        .ok_or_else(|| Error::InvalidParameter(format!("archetype {archetype} out of range")))?;
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(interpolate_profile(profile, len)
        .into_iter()
        .map(|x| x + noise.sample(rng))
        .collect())
}

fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Unit embeddings whose novelty curve equals `targets`.
///
/// Each new vector is `cosθ·ĉ + sinθ·u` with `ĉ` the normalized running sum,
/// `u` a random unit vector orthogonal to it, and `cosθ = 1 − target`.
pub fn embeddings_for_curve<R: Rng + ?Sized>(
    book_id: impl Into<String>,
    targets: &[f64],
    dim: usize,
    rng: &mut R,
) -> Result<EmbeddingSequence> {
    if dim < 2 {
        return Err(Error::InvalidParameter(
            "synthetic embeddings need dim >= 2".into(),
        ));
    }
    if let Some(t) = targets.iter().find(|t| !(0.0..=2.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!(
            "novelty target {t} outside [0, 2]"
        )));
    }
    let mut data = Vec::with_capacity((targets.len() + 1) * dim);
    let first = random_unit(dim, rng);
    let mut running = first.clone();
    data.extend(first);
    for &target in targets {
        let norm = dot(&running, &running).sqrt();
        let c: Vec<f64> = running.iter().map(|x| x / norm).collect();
        let u = loop {
            let mut u = random_unit(dim, rng);
            let proj = dot(&u, &c);
            u.iter_mut().zip(&c).for_each(|(x, ci)| *x -= proj * ci);
            let n = dot(&u, &u).sqrt();
            if n > 1e-6 {
                break u.into_iter().map(|x| x / n).collect::<Vec<_>>();
            }
        };
        let cos = 1.0 - target;
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let e: Vec<f64> = c
            .iter()
            .zip(&u)
            .map(|(ci, ui)| cos * ci + sin * ui)
            .collect();
        running.iter_mut().zip(&e).for_each(|(r, x)| *r += x);
        data.extend(e);
    }
    EmbeddingSequence::new(book_id, dim, data)
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpusConfig {
    pub books_per_archetype: usize,
    pub paragraphs: usize,
    pub dim: usize,
    /// Noise on the archetype profile scale.
    pub noise: f64,
    /// Novelty level the profile is centred on.
    pub novelty_mean: f64,
    /// Novelty units per profile unit.
    pub novelty_scale: f64,
    /// Additional books too short to pass the paragraph filter.
    pub short_books: usize,
    pub seed: u64,
}

impl Default for SyntheticCorpusConfig {
    fn default() -> Self {
        Self {
            books_per_archetype: 10,
            paragraphs: 60,
            dim: 32,
            noise: 0.25,
            novelty_mean: 0.55,
            novelty_scale: 0.12,
            short_books: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticBook {
    pub meta: BookMeta,
    /// Generating archetype; `None` for the short filler books.
    pub archetype: Option<usize>,
    pub embeddings: EmbeddingSequence,
}

const SUBJECT_POOL: [&str; 12] = [
    "Adventure stories",
    "Sonnets, English",
    "English drama -- Comedies",
    "Great Britain -- History",
    "Botany",
    "Christian life",
    "Voyages and travels",
    "Authors -- Correspondence",
    "Children's literature",
    "Political science",
    "Cookery",
    "Sea stories",
];

fn synthetic_meta<R: Rng + ?Sized>(id: u64, label: &str, rng: &mut R) -> BookMeta {
    let subjects = vec![SUBJECT_POOL.choose(rng).expect("nonempty pool").to_string()];
    BookMeta {
        gutenberg_id: id,
        title: format!("Synthetic {label} #{id}"),
        authors: vec![format!("Author {}", rng.random_range(1..=40))],
        pub_year: Some(rng.random_range(1700..=1930)),
        primary_genre: classify_genre(&subjects),
        subjects,
        bookshelves: Vec::new(),
        download_count: rng.random_range(0..50_000),
    }
}

/// Books cycling through the archetypes, with ids starting at 1.
pub fn synthetic_corpus(config: &SyntheticCorpusConfig) -> Result<Vec<SyntheticBook>> {
    if config.paragraphs < 3 {
        return Err(Error::InvalidParameter(
            "synthetic books need at least 3 paragraphs".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let k = BUILTIN_CENTROIDS.len();
    let total = config.books_per_archetype * k;
    let mut books = Vec::with_capacity(total + config.short_books);
    for b in 0..total {
        let id = b as u64 + 1;
        let archetype = b % k;
        let profile = archetype_curve(archetype, config.paragraphs - 1, config.noise, &mut rng)?;
        let targets: Vec<f64> = profile
            .iter()
            .map(|z| (config.novelty_mean + config.novelty_scale * z).clamp(0.02, 1.5))
            .collect();
        let embeddings = embeddings_for_curve(id.to_string(), &targets, config.dim, &mut rng)?;
        books.push(SyntheticBook {
            meta: synthetic_meta(id, ARCHETYPE_NAMES[archetype], &mut rng),
            archetype: Some(archetype),
            embeddings,
        });
    }
    for s in 0..config.short_books {
        let id = (total + s) as u64 + 1;
        let targets: Vec<f64> = (0..9).map(|_| rng.random_range(0.3..0.8)).collect();
        books.push(SyntheticBook {
            meta: synthetic_meta(id, "short", &mut rng),
            archetype: None,
            embeddings: embeddings_for_curve(id.to_string(), &targets, config.dim, &mut rng)?,
        });
    }
    Ok(books)
}

/// Writes `<id>.sne1` files into `embeddings_dir` and the metadata table to `meta_path`.
pub fn write_synthetic_corpus(
    books: &[SyntheticBook],
    embeddings_dir: &Path,
    meta_path: &Path,
) -> Result<()> {
    std::fs::create_dir_all(embeddings_dir).map_err(|source| Error::WriteFailure {
        path: embeddings_dir.to_path_buf(),
        source,
    })?;
    for book in books {
        let path = embeddings_dir.join(format!("{}.{SNE_EXTENSION}", book.meta.gutenberg_id));
        write_embeddings(&book.embeddings, &path)?;
    }
    let metas: Vec<BookMeta> = books.iter().map(|b| b.meta.clone()).collect();
    write_meta_jsonl(&metas, meta_path)
}
