#![allow(dead_code)]

use std::collections::HashMap;
use std::path::Path;

use crowdreview::defect::{DefectScore, ScoreRecord};
use crowdreview::functions::extract_functions;
use crowdreview::ingest::{load_training_corpus, CodeFragment, CorpusManifest, FragKey};
use crowdreview::preproc::preprocess;
use crowdreview::pv::{train, PvModel, TrainingConfig};
use crowdreview::store::VectorStore;
use crowdreview::synth::{synth_function, write_corpus};
use crowdreview::Language;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn small_config(vector_size: usize, epochs: usize) -> TrainingConfig {
    TrainingConfig {
        vector_size,
        epochs,
        min_token_count: 1,
        ..TrainingConfig::default()
    }
}

/// `docs` synthetic Java files, one function each, loaded as a corpus.
pub fn java_corpus(dir: &Path, docs: usize, seed: u64) -> CorpusManifest {
    write_corpus(dir, Language::Java, docs, 1, seed).unwrap();
    load_training_corpus(dir, Language::Java).unwrap()
}

pub fn java_model(dir: &Path, docs: usize, config: &TrainingConfig) -> (CorpusManifest, PvModel) {
    let corpus = java_corpus(dir, docs, 11);
    let model = train(&corpus, config).unwrap();
    (corpus, model)
}

pub fn random_scores(
    keys: impl IntoIterator<Item = FragKey>,
    seed: u64,
) -> HashMap<FragKey, ScoreRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    keys.into_iter()
        .map(|key| {
            let delta = DefectScore::ALL[rng.gen_range(0..3)];
            let record = ScoreRecord {
                post_id: key.post_id,
                frag_id: key.frag_id,
                delta,
                title: format!("post {}", key.post_id),
            };
            (key, record)
        })
        .collect()
}

/// Mode with ties resolved -1, then 300, then 1. Written independently of
/// the library's vote.
pub fn oracle_mode(votes: &[DefectScore]) -> DefectScore {
    let count = |v: i32| votes.iter().filter(|d| d.value() == v).count();
    let (neg, unp, pos) = (count(-1), count(300), count(1));
    if neg >= unp && neg >= pos {
        DefectScore::LIKELY_DEFECTIVE
    } else if unp >= pos {
        DefectScore::UNPREDICTABLE
    } else {
        DefectScore::UNLIKELY_DEFECTIVE
    }
}

fn oracle_cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum();
    let na: f64 = a
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    let nb: f64 = b
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    dot / (na * nb)
}

/// Review verdict recomputed without the sorted index: α′ is recomputed for
/// every stored vector and the K nearest by |α′ - α| are found by a full
/// sort. Returns the votes (sorted) and whether the K-th boundary is a
/// near tie that could legitimately resolve either way.
pub fn oracle_review(
    source: &str,
    model: &PvModel,
    store: &VectorStore,
    scores: &HashMap<FragKey, ScoreRecord>,
    k: usize,
) -> (Vec<DefectScore>, bool) {
    let language = model.language;
    let reference = store
        .reference(language)
        .unwrap()
        .vector
        .as_slice()
        .to_vec();
    let entries: Vec<(f64, FragKey)> = store
        .entries_for(language)
        .map(|e| (oracle_cosine(e.vector.as_slice(), &reference), e.key))
        .collect();
    let mut votes = Vec::new();
    let mut ambiguous = false;
    for unit in extract_functions(source, language) {
        let v = model.infer(&preprocess(&unit.body_text, language)).vector;
        let alpha = oracle_cosine(v.as_slice(), &reference);
        let mut by_distance: Vec<(f64, FragKey)> = entries
            .iter()
            .map(|&(a, key)| ((a - alpha).abs(), key))
            .collect();
        by_distance.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
        if by_distance.len() > k && (by_distance[k].0 - by_distance[k - 1].0).abs() < 1e-9 {
            ambiguous = true;
        }
        votes.extend(by_distance.iter().take(k).map(|(_, key)| scores[key].delta));
    }
    votes.sort();
    (votes, ambiguous)
}

/// Fragments made of single synthetic functions, keyed (10 + i, 0).
pub fn function_fragments(language: Language, n: usize, seed: u64) -> Vec<CodeFragment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| CodeFragment {
            post_id: 10 + i as u64,
            frag_id: 0,
            language,
            preceding_text: String::new(),
            code: synth_function(&mut rng, language, &format!("frag{i}")),
        })
        .collect()
}

/// Run the CLI binary; returns (success, stdout, stderr).
pub fn cli(args: &[&str]) -> (bool, String, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_crowdreview"))
        .args(args)
        .env_remove("CROWDREVIEW_DATA")
        .output()
        .expect("spawn crowdreview");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// synth, ingest, train, index, score and review one query under `root`.
/// Returns the review JSON printed on stdout.
pub fn full_cli_run(root: &Path, inputs: &Path, query: &Path) -> String {
    let root = root.to_str().unwrap();
    let inputs_s = inputs.to_str().unwrap();
    let common = ["--data-root", root, "-l", "java", "--seed", "7"];
    let step = |args: &[&str]| {
        let mut all: Vec<&str> = common.to_vec();
        all.extend_from_slice(args);
        let (ok, stdout, stderr) = cli(&all);
        assert!(ok, "{args:?} failed: {stderr}");
        stdout
    };
    if !inputs.join("Posts.xml").exists() {
        step(&[
            "synth",
            inputs_s,
            "--files",
            "40",
            "--functions",
            "2",
            "--questions",
            "60",
            "--queries",
            "3",
        ]);
    }
    let dump = inputs.join("Posts.xml");
    let corpus = inputs.join("corpus");
    step(&["ingest", "--dump", dump.to_str().unwrap()]);
    step(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--vector-size",
        "24",
        "--epochs",
        "5",
        "--threads",
        "1",
    ]);
    step(&["index"]);
    step(&["score"]);
    step(&["review", query.to_str().unwrap(), "--format", "json"])
}
