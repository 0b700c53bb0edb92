//! Corpus ingestion, embedding files, dataset export, and batch orchestration.

mod embedder;
mod genre;
mod paragraphs;
mod pipeline;
mod record;
mod reproduce;
mod sne;
pub mod synth;
mod table;

pub use embedder::{hash_embedder, token_hash, tokenize, DEFAULT_HASH_DIM};
pub use genre::{classify_genre, Genre};
pub use paragraphs::{
    format_paragraph_records, parse_paragraph_records, split_paragraphs, MIN_PARAGRAPH_CHARS,
    RECORD_SEPARATOR,
};
pub use pipeline::{
    derive_record, reassign_clusters, run_pipeline, ClusterCount, DeriveOptions, EmbeddingSource,
    PipelineConfig, RunOutput, RunReport, SkippedBook, MIN_PARAGRAPHS, PARAGRAPH_EXTENSION,
    TEXT_EXTENSION,
};
pub use record::{
    export_dataset, import_dataset, read_meta_table, round_significant, write_dataset,
    write_meta_jsonl, BookMeta, BookRecord, DATASET_COLUMNS, SCALAR_DIGITS, SERIES_DIGITS,
};
pub use reproduce::{
    reproduce, ColumnAgreement, ReproduceReport, Tolerance, GATED_COLUMNS, INFORMATIONAL_COLUMNS,
    REPRODUCE_THRESHOLD,
};
pub use sne::{
    decode_embeddings, encode_embeddings, read_embeddings, write_embeddings, SNE_EXTENSION,
    SNE_MAGIC, SNE_VERSION,
};
pub use table::{
    cell_f64, cell_f64_list, cell_integer, cell_str, cell_str_list, read_csv, read_jsonl,
    read_table, Row, TableFormat,
};
