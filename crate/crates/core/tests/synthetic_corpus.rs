use novelty_core::builtin_centroids;
use novelty_core::corpus::synth::{
    synthetic_corpus, write_synthetic_corpus, SyntheticCorpusConfig,
};
use novelty_core::corpus::{
    import_dataset, run_pipeline, write_dataset, EmbeddingSource, PipelineConfig, TableFormat,
};

fn corpus_config(dir: &std::path::Path, workers: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(
        EmbeddingSource::Directory(dir.join("emb")),
        builtin_centroids(),
    );
    cfg.meta = Some(dir.join("meta.jsonl"));
    cfg.workers = workers;
    cfg
}

#[test]
fn eighty_books_fill_all_eight_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let books = synthetic_corpus(&SyntheticCorpusConfig {
        short_books: 2,
        seed: 42,
        ..Default::default()
    })
    .unwrap();
    write_synthetic_corpus(
        &books,
        &dir.path().join("emb"),
        &dir.path().join("meta.jsonl"),
    )
    .unwrap();

    let out = run_pipeline(&corpus_config(dir.path(), 4)).unwrap();
    assert_eq!(out.records.len(), 80);
    assert_eq!(
        out.report.nonempty_clusters(),
        8,
        "{:?}",
        out.report.per_cluster
    );
    assert_eq!(out.report.books_skipped, 2);
    assert!(out
        .report
        .skipped
        .iter()
        .all(|s| s.reason == "below minimum 20 paragraphs"));

    let recovered = out
        .records
        .iter()
        .filter(|r| books[r.gutenberg_id as usize - 1].archetype == Some(r.cluster_8))
        .count();
    assert!(recovered >= 64, "recovered {recovered} of 80");
    let ids: Vec<u64> = out.records.iter().map(|r| r.gutenberg_id).collect();
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn exports_are_identical_across_worker_counts_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let books = synthetic_corpus(&SyntheticCorpusConfig {
        books_per_archetype: 3,
        seed: 5,
        ..Default::default()
    })
    .unwrap();
    write_synthetic_corpus(
        &books,
        &dir.path().join("emb"),
        &dir.path().join("meta.jsonl"),
    )
    .unwrap();

    let export = |workers| {
        let out = run_pipeline(&corpus_config(dir.path(), workers)).unwrap();
        let mut buf = Vec::new();
        write_dataset(&out.records, &mut buf, TableFormat::Csv).unwrap();
        buf
    };
    let one = export(1);
    assert_eq!(one, export(8));
    assert_eq!(one, export(1));

    let path = dir.path().join("out.csv");
    std::fs::write(&path, &one).unwrap();
    let back = import_dataset(&path).unwrap();
    assert_eq!(back.len(), 24);
    assert!(back.iter().all(|r| r.validate(20).is_ok()));
}
