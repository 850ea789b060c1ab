//! On-disk store layout:
//!
//! - `vectors.bin`: rows of little-endian `f32`, no header
//! - `index.jsonl`: one entry per row: key, language, α′, row number
//! - `reference.json`: format version, dimension, per-language references
//! - `scores.jsonl`: pre-computed defect scores, written by the scoring step

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ReferenceVector, VectorStore};
use crate::defect::ScoreRecord;
use crate::error::{Error, Result};
use crate::ingest::FragKey;
use crate::jsonl::{read_jsonl, write_jsonl};
use crate::lang::Language;
use crate::pv::{cosine, DocVector};

pub const VECTORS_FILE: &str = "vectors.bin";
pub const INDEX_FILE: &str = "index.jsonl";
pub const REFERENCE_FILE: &str = "reference.json";
pub const SCORES_FILE: &str = "scores.jsonl";
pub const STORE_FORMAT_VERSION: u32 = 1;

/// Tolerance for re-deriving α′ from the stored vectors on load.
const ALPHA_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct IndexRecord {
    post_id: u64,
    frag_id: u32,
    language: Language,
    alpha: f64,
    row: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ReferenceRecord {
    language: Language,
    post_id: u64,
    frag_id: u32,
    vector: DocVector,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReferenceFile {
    version: u32,
    dim: usize,
    references: Vec<ReferenceRecord>,
}

impl VectorStore {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let path = dir.join(VECTORS_FILE);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        for entry in &self.entries {
            for v in entry.vector.as_slice() {
                out.write_all(&v.to_le_bytes())
                    .map_err(|e| Error::io(&path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(&path, e))?;

        let index: Vec<IndexRecord> = self
            .entries
            .iter()
            .enumerate()
            .map(|(row, e)| IndexRecord {
                post_id: e.key.post_id,
                frag_id: e.key.frag_id,
                language: e.language,
                alpha: e.cos_sim_to_ref,
                row,
            })
            .collect();
        write_jsonl(&dir.join(INDEX_FILE), &index)?;

        let references = ReferenceFile {
            version: STORE_FORMAT_VERSION,
            dim: self.dim,
            references: self
                .partitions
                .values()
                .filter_map(|p| p.reference.as_ref())
                .map(|r| ReferenceRecord {
                    language: r.language,
                    post_id: r.source_key.post_id,
                    frag_id: r.source_key.frag_id,
                    vector: r.vector.clone(),
                })
                .collect(),
        };
        let path = dir.join(REFERENCE_FILE);
        let text = serde_json::to_string_pretty(&references)?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<VectorStore> {
        let ref_path = dir.join(REFERENCE_FILE);
        if !ref_path.exists() {
            return Err(Error::MissingArtifact(ref_path));
        }
        let text = fs::read_to_string(&ref_path).map_err(|e| Error::io(&ref_path, e))?;
        let refs: ReferenceFile =
            serde_json::from_str(&text).map_err(|e| Error::format(&ref_path, e.to_string()))?;
        if refs.version != STORE_FORMAT_VERSION {
            return Err(Error::format(
                &ref_path,
                format!(
                    "store version {} is not {STORE_FORMAT_VERSION}",
                    refs.version
                ),
            ));
        }

        let mut store = VectorStore::new(refs.dim);
        for r in refs.references {
            store.set_reference(ReferenceVector {
                language: r.language,
                vector: r.vector,
                source_key: FragKey::new(r.post_id, r.frag_id),
            })?;
        }

        let vec_path = dir.join(VECTORS_FILE);
        if !vec_path.exists() {
            return Err(Error::MissingArtifact(vec_path));
        }
        let raw = fs::read(&vec_path).map_err(|e| Error::io(&vec_path, e))?;
        let row_bytes = refs.dim * 4;
        if row_bytes == 0 || raw.len() % row_bytes != 0 {
            return Err(Error::format(
                &vec_path,
                "size is not a whole number of rows",
            ));
        }
        let rows = raw.len() / row_bytes;

        let index: Vec<IndexRecord> = read_jsonl(&dir.join(INDEX_FILE))?;
        if index.len() != rows {
            return Err(Error::format(
                dir.join(INDEX_FILE),
                format!("{} index records for {rows} vector rows", index.len()),
            ));
        }
        for rec in index {
            if rec.row >= rows {
                return Err(Error::format(
                    dir.join(INDEX_FILE),
                    format!("row {} out of range", rec.row),
                ));
            }
            let bytes = &raw[rec.row * row_bytes..(rec.row + 1) * row_bytes];
            let vector = DocVector::new(
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            );
            let reference = store
                .reference(rec.language)
                .ok_or(Error::MissingReference(rec.language))?;
            let recomputed = cosine(&vector, &reference.vector)?;
            if (recomputed - rec.alpha).abs() > ALPHA_TOLERANCE {
                return Err(Error::format(
                    dir.join(INDEX_FILE),
                    format!(
                        "stored similarity for ({}, {}) disagrees with its vector",
                        rec.post_id, rec.frag_id
                    ),
                ));
            }
            store.insert_with_alpha(
                FragKey::new(rec.post_id, rec.frag_id),
                rec.language,
                vector,
                rec.alpha,
            )?;
        }
        Ok(store)
    }
}

pub fn save_scores(dir: &Path, scores: &[ScoreRecord]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(&dir.join(SCORES_FILE), scores)
}

pub fn load_scores(dir: &Path) -> Result<HashMap<FragKey, ScoreRecord>> {
    let records: Vec<ScoreRecord> = read_jsonl(&dir.join(SCORES_FILE))?;
    Ok(records.into_iter().map(|r| (r.key(), r)).collect())
}
