//! Side-by-side latency and storage of the two retrieval designs: fixed
//! length vectors behind a scalar pivot index, and winnowing fingerprints
//! matched by exhaustive scan.
//!
//! Query embedding is not timed; both sides are given the query in the
//! form they consume (a vector, or the code text to fingerprint).

use std::fs;
use std::hint::black_box;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FragKey;
use crate::lang::Language;
use crate::pv::{cosine, DocVector};
use crate::store::VectorStore;
use crate::winnow::{fingerprint, FingerprintStore, DEFAULT_GRAM, DEFAULT_WINDOW};

pub const FINGERPRINT_FILE: &str = "fingerprints.jsonl";

#[derive(Debug, Clone)]
pub struct BenchFragment {
    pub key: FragKey,
    pub language: Language,
    pub code: String,
    pub vector: DocVector,
}

#[derive(Debug, Clone)]
pub struct BenchQuery {
    pub language: Language,
    pub code: String,
    pub vector: DocVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchOptions {
    pub k: usize,
    pub runs: usize,
    pub gram: usize,
    pub window: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            k: 5,
            runs: 20,
            gram: DEFAULT_GRAM,
            window: DEFAULT_WINDOW,
        }
    }
}

/// Per-query latency summary in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub p50: f64,
    pub p90: f64,
    pub mean: f64,
    pub samples: usize,
}

impl Latency {
    fn from_samples(mut micros: Vec<f64>) -> Latency {
        micros.sort_by(f64::total_cmp);
        let n = micros.len();
        let at = |q: f64| micros[((n - 1) as f64 * q).round() as usize];
        Latency {
            p50: at(0.5),
            p90: at(0.9),
            mean: micros.iter().sum::<f64>() / n as f64,
            samples: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub fragments: usize,
    pub fingerprinted: usize,
    pub queries: usize,
    pub options: BenchOptions,
    pub vector_store_bytes: u64,
    pub fingerprint_store_bytes: u64,
    /// vector bytes / fingerprint bytes
    pub storage_ratio: f64,
    pub storage_reduction_pct: f64,
    pub pivot_latency_us: Latency,
    pub fingerprint_latency_us: Latency,
    /// pivot median / fingerprint median
    pub latency_ratio: f64,
    pub time_reduction_pct: f64,
}

/// Total size of the regular files directly inside `dir`.
pub fn dir_bytes(dir: &Path) -> Result<u64> {
    let mut total = 0;
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let meta = entry.metadata().map_err(|e| Error::io(entry.path(), e))?;
        if meta.is_file() {
            total += meta.len();
        }
    }
    Ok(total)
}

/// Build both stores under `work_dir`, then compare them.
pub fn bench_compare(
    fragments: &[BenchFragment],
    queries: &[BenchQuery],
    work_dir: &Path,
    options: &BenchOptions,
) -> Result<BenchReport> {
    if fragments.is_empty() {
        return Err(Error::EmptyCorpus("no fragments to benchmark".into()));
    }
    let dim = fragments[0].vector.len();
    let store = VectorStore::build(
        dim,
        fragments
            .iter()
            .map(|f| (f.key, f.language, f.vector.clone())),
    )?;
    let vector_dir = work_dir.join("vectors");
    fs::create_dir_all(&vector_dir).map_err(|e| Error::io(&vector_dir, e))?;
    store.save(&vector_dir)?;

    let mut fps = FingerprintStore::new(options.gram, options.window);
    for f in fragments {
        fps.insert(f.key, &f.code)?;
    }
    let fp_path = work_dir.join(FINGERPRINT_FILE);
    fps.save(&fp_path)?;

    let vector_bytes = dir_bytes(&vector_dir)?;
    let fp_bytes = fs::metadata(&fp_path)
        .map_err(|e| Error::io(&fp_path, e))?
        .len();
    compare_stores(&store, vector_bytes, &fps, fp_bytes, queries, options)
}

/// Compare already-built stores whose on-disk sizes are known.
pub fn compare_stores(
    store: &VectorStore,
    vector_bytes: u64,
    fingerprints: &FingerprintStore,
    fingerprint_bytes: u64,
    queries: &[BenchQuery],
    options: &BenchOptions,
) -> Result<BenchReport> {
    if store.is_empty() || fingerprints.is_empty() {
        return Err(Error::EmptyCorpus("benchmark stores are empty".into()));
    }
    if queries.is_empty() {
        return Err(Error::Config("no benchmark queries".into()));
    }
    if options.runs == 0 || options.k == 0 {
        return Err(Error::Config("runs and k must be positive".into()));
    }
    let references = queries
        .iter()
        .map(|q| {
            store
                .reference(q.language)
                .map(|r| &r.vector)
                .ok_or(Error::MissingReference(q.language))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pivot = Vec::with_capacity(options.runs * queries.len());
    let mut scan = Vec::with_capacity(options.runs * queries.len());
    for _ in 0..options.runs {
        for (q, reference) in queries.iter().zip(&references) {
            let t = Instant::now();
            let alpha = cosine(&q.vector, reference)?;
            black_box(store.topk_by_pivot(alpha, options.k, q.language));
            pivot.push(t.elapsed().as_secs_f64() * 1e6);
        }
        for q in queries {
            let t = Instant::now();
            let fp = fingerprint(&q.code, fingerprints.k, fingerprints.w)?;
            black_box(fingerprints.top_matches(&fp, options.k)?);
            scan.push(t.elapsed().as_secs_f64() * 1e6);
        }
    }
    let pivot = Latency::from_samples(pivot);
    let scan = Latency::from_samples(scan);
    let storage_ratio = vector_bytes as f64 / fingerprint_bytes.max(1) as f64;
    let latency_ratio = pivot.p50.max(1e-3) / scan.p50.max(1e-3);
    Ok(BenchReport {
        fragments: store.len(),
        fingerprinted: fingerprints.len(),
        queries: queries.len(),
        options: *options,
        vector_store_bytes: vector_bytes,
        fingerprint_store_bytes: fingerprint_bytes,
        storage_ratio,
        storage_reduction_pct: (1.0 - storage_ratio) * 100.0,
        pivot_latency_us: pivot,
        fingerprint_latency_us: scan,
        latency_ratio,
        time_reduction_pct: (1.0 - latency_ratio) * 100.0,
    })
}
