use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Deserialize;

use crowdreview::bench::{compare_stores, dir_bytes, BenchOptions, BenchQuery};
use crowdreview::config::{file_stem, vectors_dir, RunConfig};
use crowdreview::defect::{score_statistics, DefectScore};
use crowdreview::ingest::load_training_corpus;
use crowdreview::metrics::compute_metrics;
use crowdreview::pipeline::{
    detect_language, index_store, ingest_dump, load_fragments, load_posts, load_vectors,
    score_store,
};
use crowdreview::preproc::preprocess;
use crowdreview::pv::{load_model, save_model, train_with_stats};
use crowdreview::review::{review_file, ReviewOptions};
use crowdreview::sentiment::SentimentLexicon;
use crowdreview::store::load_scores;
use crowdreview::synth::{synth_posts_dump, write_corpus, DumpShape};
use crowdreview::winnow::FingerprintStore;
use crowdreview::{jsonl, Error, Language, Result};

#[derive(Parser)]
#[command(
    name = "crowdreview",
    version,
    about = "Estimate source-file defectiveness from crowd-scored code fragments"
)]
struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data root (default: $CROWDREVIEW_DATA, then ./crowdreview-data).
    #[arg(long, global = true)]
    data_root: Option<PathBuf>,
    #[arg(long, short = 'l', global = true)]
    language: Option<Language>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short = 'v', global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine code fragments from a posts dump.
    Ingest {
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Output directory (default: the store root).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a paragraph-vector model on a directory of source files.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        vector_size: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Embed mined fragments and build the vector store.
    Index {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Pre-compute defect scores for every mined fragment.
    Score {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        question_threshold: Option<f64>,
        #[arg(long)]
        answer_threshold: Option<f64>,
        /// Sentiment lexicon (token<TAB>valence); default is built in.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Review a source file.
    Review {
        file: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(short = 'k', long)]
        k: Option<usize>,
        /// Report likely-defective if any match is.
        #[arg(long)]
        conservative: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// JSON report path (default: under the reports directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare pivot retrieval against fingerprint matching.
    Bench {
        /// Query source file or directory.
        queries: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(short = 'k', long)]
        k: Option<usize>,
    },
    /// Accuracy, precision, recall and F1 over labelled predictions.
    Eval {
        /// JSONL of {"predicted": δ, "actual": δ}.
        predictions: PathBuf,
    },
    /// Vote-score statistics of the ingested posts.
    Stats {
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Write a synthetic corpus, posts dump and query files.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        files: usize,
        #[arg(long, default_value_t = 3)]
        functions: usize,
        #[arg(long, default_value_t = 200)]
        questions: usize,
        #[arg(long, default_value_t = 2)]
        answers: usize,
        #[arg(long, default_value_t = 5)]
        queries: usize,
    },
    /// Print the effective configuration.
    Config,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Deserialize)]
struct Prediction {
    predicted: DefectScore,
    actual: DefectScore,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crowdreview: error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.data_root.is_some() {
        cfg.data_root = cli.data_root.clone();
    }
    if cli.language.is_some() {
        cfg.language = cli.language;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    Ok(cfg)
}

fn require(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.ok_or_else(|| Error::Config(format!("no {what} given (flag or config `paths.{what}`)")))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Ingest { dump, out } => {
            let dump = require(dump.or(cfg.paths.dump.clone()), "dump")?;
            let out = out.unwrap_or_else(|| cfg.store_dir());
            let summary = ingest_dump(&dump, &out)?;
            if summary.skipped_rows > 0 {
                warn!("skipped {} malformed rows", summary.skipped_rows);
            }
            print(&(serde_json::to_string_pretty(&summary)? + "\n"));
        }
        Command::Train {
            corpus,
            model,
            vector_size,
            epochs,
            threads,
        } => {
            let language = cfg.language()?;
            let corpus = require(corpus.or(cfg.paths.corpus.clone()), "corpus")?;
            if let Some(v) = vector_size {
                cfg.training.vector_size = v;
            }
            if let Some(e) = epochs {
                cfg.training.epochs = e;
            }
            if let Some(t) = threads {
                cfg.training.threads = t;
            }
            let model_path = model.unwrap_or_else(|| cfg.model_path(language));
            let manifest = load_training_corpus(&corpus, language)?;
            info!("training on {} documents", manifest.len());
            let (model, stats) = train_with_stats(&manifest, &cfg.training())?;
            save_model(&model, &model_path)?;
            println!(
                "trained {} model: {} documents ({} truncated), vocabulary {}, final loss {:.4}, saved to {}",
                language,
                stats.documents,
                stats.truncated,
                model.vocabulary.len(),
                stats.epoch_losses.last().copied().unwrap_or(f64::NAN),
                model_path.display()
            );
        }
        Command::Index { store, model } => {
            let language = cfg.language()?;
            let store = store.unwrap_or_else(|| cfg.store_dir());
            let model_path = model.unwrap_or_else(|| cfg.model_path(language));
            let model = load_model(&model_path)?;
            let summary = index_store(&store, &model)?;
            if summary.low_confidence > 0 {
                warn!(
                    "{} fragments had no known tokens and were not indexed",
                    summary.low_confidence
                );
            }
            println!(
                "indexed {} of {} {} fragments into {}",
                summary.indexed,
                summary.candidates,
                language,
                vectors_dir(&store, language).display()
            );
        }
        Command::Score {
            store,
            question_threshold,
            answer_threshold,
            lexicon,
        } => {
            let store = store.unwrap_or_else(|| cfg.store_dir());
            if let Some(q) = question_threshold {
                cfg.thresholds.question_score = q;
            }
            if let Some(a) = answer_threshold {
                cfg.thresholds.answer_score = a;
            }
            let lexicon = match lexicon.or(cfg.paths.lexicon.clone()) {
                Some(path) => SentimentLexicon::load(&path)?,
                None => SentimentLexicon::embedded(),
            };
            let scores = score_store(&store, &cfg.thresholds, &lexicon)?;
            let count = |s: DefectScore| scores.iter().filter(|r| r.delta == s).count();
            println!(
                "scored {} fragments: {} likely-defective, {} unlikely-defective, {} unpredictable",
                scores.len(),
                count(DefectScore::LIKELY_DEFECTIVE),
                count(DefectScore::UNLIKELY_DEFECTIVE),
                count(DefectScore::UNPREDICTABLE)
            );
        }
        Command::Review {
            file,
            model,
            store,
            k,
            conservative,
            format,
            out,
        } => {
            let language = match cfg.language {
                Some(l) => l,
                None => detect_language(&file).ok_or_else(|| {
                    Error::UnsupportedLanguage(format!(
                        "cannot infer language of {}",
                        file.display()
                    ))
                })?,
            };
            let store = store.unwrap_or_else(|| cfg.store_dir());
            let vectors = load_vectors(&store, language)?;
            let scores = load_scores(&store)?;
            let model = load_model(&model.unwrap_or_else(|| cfg.model_path(language)))?;
            let options = ReviewOptions {
                k: k.unwrap_or(cfg.k),
                conservative: conservative || cfg.conservative,
                thresholds: cfg.alpha_thresholds(),
            };
            let report = review_file(&file, language, &model, &vectors, &scores, &options)?;
            let json = report.to_json()?;
            let out = out.unwrap_or_else(|| {
                let name = file
                    .file_name()
                    .map_or("report".into(), |n| n.to_string_lossy().into_owned());
                cfg.reports_dir().join(format!("review-{name}.json"))
            });
            write_text(&out, &json)?;
            match format {
                Format::Json => print(&json),
                Format::Table => print(&report.render_table()),
            }
        }
        Command::Bench {
            queries,
            store,
            model,
            runs,
            k,
        } => {
            let language = cfg.language()?;
            let store = store.unwrap_or_else(|| cfg.store_dir());
            let model = load_model(&model.unwrap_or_else(|| cfg.model_path(language)))?;
            let vectors = load_vectors(&store, language)?;
            let vector_bytes = dir_bytes(&vectors_dir(&store, language))?;

            let options = BenchOptions {
                k: k.unwrap_or(cfg.k),
                runs,
                ..BenchOptions::default()
            };
            let mut fps = FingerprintStore::new(options.gram, options.window);
            for f in load_fragments(&store)?
                .iter()
                .filter(|f| f.language == language)
            {
                fps.insert(f.key(), &f.code)?;
            }
            let fp_path = store
                .join("baseline")
                .join(format!("{}.jsonl", file_stem(language)));
            write_text(&fp_path, "")?;
            fps.save(&fp_path)?;
            let fp_bytes = fs::metadata(&fp_path)
                .map_err(|e| Error::io(&fp_path, e))?
                .len();

            let files = query_files(&queries, language)?;
            let mut bench_queries = Vec::with_capacity(files.len());
            for path in files {
                let code = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let inference = model.infer(&preprocess(&code, language));
                bench_queries.push(BenchQuery {
                    language,
                    code,
                    vector: inference.vector,
                });
            }
            let report = compare_stores(
                &vectors,
                vector_bytes,
                &fps,
                fp_bytes,
                &bench_queries,
                &options,
            )?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            write_text(
                &cfg.reports_dir()
                    .join(format!("bench-{}.json", file_stem(language))),
                &json,
            )?;
            print(&json);
        }
        Command::Eval { predictions } => {
            let rows: Vec<Prediction> = jsonl::read_jsonl(&predictions)?;
            let pairs: Vec<_> = rows
                .iter()
                .map(|p| (p.predicted.label(), p.actual.label()))
                .collect();
            let metrics = compute_metrics(&pairs)?;
            print(&(serde_json::to_string_pretty(&metrics)? + "\n"));
        }
        Command::Stats { store } => {
            let store = store.unwrap_or_else(|| cfg.store_dir());
            let posts = load_posts(&store)?;
            println!(
                "{:<12} {:<9} {:>8} {:>6} {:>6} {:>8} {:>8}",
                "language", "type", "count", "min", "max", "avg", "stddev"
            );
            for ((lang, kind), s) in score_statistics(&posts) {
                println!(
                    "{:<12} {:<9} {:>8} {:>6} {:>6} {:>8.3} {:>8.3}",
                    lang.to_string(),
                    kind,
                    s.count,
                    s.min,
                    s.max,
                    s.avg,
                    s.stddev
                );
            }
        }
        Command::Synth {
            out,
            files,
            functions,
            questions,
            answers,
            queries,
        } => {
            let language = cfg.language.unwrap_or(Language::Java);
            let seed = cfg.training().seed;
            write_corpus(&out.join("corpus"), language, files, functions, seed)?;
            write_corpus(
                &out.join("queries"),
                language,
                queries,
                functions,
                seed.wrapping_add(1),
            )?;
            let dump = synth_posts_dump(
                language,
                DumpShape {
                    questions,
                    max_answers: answers,
                },
                seed.wrapping_add(2),
            );
            write_text(&out.join("Posts.xml"), &dump)?;
            println!("wrote synthetic {} data to {}", language, out.display());
        }
        Command::Config => print(&cfg.to_toml()?),
    }
    Ok(())
}

/// `path` itself, or the files directly inside it written in `language`.
fn query_files(path: &Path, language: Language) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && detect_language(p) == Some(language))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no {language} query files in {}",
            path.display()
        )));
    }
    Ok(files)
}
