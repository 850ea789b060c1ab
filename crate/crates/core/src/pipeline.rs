//! The pipeline stages over on-disk artifacts, as run by the CLI.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{vectors_dir, FRAGMENTS_FILE, POSTS_FILE};
use crate::defect::{score_fragments, DefectThresholds, ScoreRecord};
use crate::error::{Error, Result};
use crate::ingest::{
    inherit_answer_tags, parse_posts_dump, select_fragments, CodeFragment, SoPost,
};
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::lang::Language;
use crate::preproc::preprocess;
use crate::pv::PvModel;
use crate::sentiment::SentimentLexicon;
use crate::store::{save_scores, VectorStore};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestSummary {
    pub posts: usize,
    pub skipped_rows: usize,
    pub orphan_answers: usize,
    pub fragments: usize,
    pub per_language: BTreeMap<Language, usize>,
}

/// Parse a posts dump and write `fragments.jsonl` and `posts.jsonl` (posts
/// that yielded at least one fragment) into `out_dir`.
pub fn ingest_dump(dump: &Path, out_dir: &Path) -> Result<IngestSummary> {
    if !dump.is_file() {
        return Err(Error::MissingArtifact(dump.to_path_buf()));
    }
    let file = File::open(dump).map_err(|e| Error::io(dump, e))?;
    let mut reader = parse_posts_dump(BufReader::new(file));
    let mut posts: Vec<SoPost> = reader.by_ref().collect::<Result<_>>()?;
    let skipped_rows = reader.skipped();
    let orphan_answers = inherit_answer_tags(&mut posts);
    posts.sort_by_key(|p| p.post_id);

    let mut fragments = Vec::new();
    let mut kept = Vec::new();
    for post in &posts {
        let frags = select_fragments(post);
        if !frags.is_empty() {
            kept.push(post);
            fragments.extend(frags);
        }
    }
    let mut per_language = BTreeMap::new();
    for f in &fragments {
        *per_language.entry(f.language).or_insert(0) += 1;
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_jsonl(&out_dir.join(FRAGMENTS_FILE), &fragments)?;
    write_jsonl(&out_dir.join(POSTS_FILE), kept.iter().copied())?;
    Ok(IngestSummary {
        posts: posts.len(),
        skipped_rows,
        orphan_answers,
        fragments: fragments.len(),
        per_language,
    })
}

pub fn load_fragments(store_root: &Path) -> Result<Vec<CodeFragment>> {
    read_jsonl(&store_root.join(FRAGMENTS_FILE))
}

pub fn load_posts(store_root: &Path) -> Result<Vec<SoPost>> {
    read_jsonl(&store_root.join(POSTS_FILE))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexSummary {
    pub candidates: usize,
    pub indexed: usize,
    pub low_confidence: usize,
}

/// Embed every fragment of the model's language and index the result.
/// Fragments with no in-vocabulary token are left out.
pub fn index_fragments(
    fragments: &[CodeFragment],
    model: &PvModel,
) -> Result<(VectorStore, IndexSummary)> {
    let language = model.language;
    let candidates: Vec<&CodeFragment> = fragments
        .iter()
        .filter(|f| f.language == language)
        .collect();
    let inferred: Vec<_> = candidates
        .par_iter()
        .map(|f| (f.key(), model.infer(&preprocess(&f.code, language))))
        .collect();
    let low_confidence = inferred
        .iter()
        .filter(|(_, inf)| inf.low_confidence)
        .count();
    let items: Vec<_> = inferred
        .into_iter()
        .filter(|(_, inf)| !inf.low_confidence && !inf.vector.is_zero())
        .map(|(key, inf)| (key, language, inf.vector))
        .collect();
    if items.is_empty() {
        return Err(Error::EmptyPartition(language));
    }
    let summary = IndexSummary {
        candidates: candidates.len(),
        indexed: items.len(),
        low_confidence,
    };
    Ok((VectorStore::build(model.vector_size(), items)?, summary))
}

/// `index_fragments`, reading from and writing to a store root.
pub fn index_store(store_root: &Path, model: &PvModel) -> Result<IndexSummary> {
    let fragments = load_fragments(store_root)?;
    let (store, summary) = index_fragments(&fragments, model)?;
    let dir = vectors_dir(store_root, model.language);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    store.save(&dir)?;
    Ok(summary)
}

pub fn load_vectors(store_root: &Path, language: Language) -> Result<VectorStore> {
    VectorStore::load(&vectors_dir(store_root, language))
}

/// Score every fragment in a store root and write `scores.jsonl`.
pub fn score_store(
    store_root: &Path,
    thresholds: &DefectThresholds,
    lexicon: &SentimentLexicon,
) -> Result<Vec<ScoreRecord>> {
    let fragments = load_fragments(store_root)?;
    let posts: HashMap<u64, SoPost> = load_posts(store_root)?
        .into_iter()
        .map(|p| (p.post_id, p))
        .collect();
    let mut scores = score_fragments(&fragments, &posts, thresholds, lexicon);
    scores.sort_by_key(|s| s.key());
    save_scores(store_root, &scores)?;
    Ok(scores)
}

/// Language implied by a file's extension.
pub fn detect_language(path: &Path) -> Option<Language> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    Language::ALL
        .into_iter()
        .find(|l| l.extensions().contains(&ext.as_str()))
}
