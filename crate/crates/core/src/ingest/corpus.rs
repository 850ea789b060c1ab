use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;
use crate::preproc::{preprocess, TokenSequence};

/// A tokenized training document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub tokens: TokenSequence,
    pub source: String,
}

/// Where a training corpus came from. Recorded, never enforced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusProvenance {
    pub repository: Option<String>,
    pub stars: Option<u32>,
    pub file_count: Option<u32>,
}

impl CorpusProvenance {
    /// At least 100 stars and more than 1000 files.
    pub fn meets_selection_criteria(&self) -> bool {
        self.stars.is_some_and(|s| s >= 100) && self.file_count.is_some_and(|f| f > 1000)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub language: Language,
    pub documents: Vec<Document>,
    pub source_description: String,
    #[serde(default)]
    pub provenance: CorpusProvenance,
}

impl CorpusManifest {
    /// Build a manifest from token sequences, dropping empty ones and
    /// assigning dense ids.
    pub fn from_documents<I>(
        language: Language,
        source_description: impl Into<String>,
        docs: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (String, TokenSequence)>,
    {
        let documents: Vec<Document> = docs
            .into_iter()
            .filter(|(_, tokens)| !tokens.is_empty())
            .enumerate()
            .map(|(id, (source, tokens))| Document { id, tokens, source })
            .collect();
        let source_description = source_description.into();
        if documents.is_empty() {
            return Err(Error::EmptyCorpus(source_description));
        }
        Ok(CorpusManifest {
            language,
            documents,
            source_description,
            provenance: CorpusProvenance::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Optional metadata file read from the corpus root.
pub const PROVENANCE_FILE: &str = "corpus.toml";

/// Load every file under `root` with one of the language's extensions, in
/// lexicographic path order, one document per file.
pub fn load_training_corpus(root: &Path, language: Language) -> Result<CorpusManifest> {
    if !root.is_dir() {
        return Err(Error::MissingArtifact(root.to_path_buf()));
    }
    let mut paths = Vec::new();
    collect_files(root, language, &mut paths)?;
    paths.sort();

    let mut docs = Vec::with_capacity(paths.len());
    for path in paths {
        match fs::read(&path) {
            Ok(bytes) => {
                let text = String::from_utf8_lossy(&bytes);
                let rel = path.strip_prefix(root).unwrap_or(&path);
                docs.push((
                    rel.to_string_lossy().into_owned(),
                    preprocess(&text, language),
                ));
            }
            Err(e) => log::warn!("skipping unreadable {}: {e}", path.display()),
        }
    }

    let mut manifest = CorpusManifest::from_documents(language, root.display().to_string(), docs)?;
    let meta = root.join(PROVENANCE_FILE);
    if meta.is_file() {
        let text = fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
        manifest.provenance =
            toml::from_str(&text).map_err(|e| Error::format(&meta, e.to_string()))?;
        if !manifest.provenance.meets_selection_criteria() {
            log::warn!("corpus provenance does not meet the repository selection criteria");
        }
    }
    Ok(manifest)
}

fn collect_files(dir: &Path, language: Language, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) => {
            log::warn!("skipping unreadable directory {}: {e}", dir.display());
            return Ok(());
        }
    };
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let file_type = entry.file_type().map_err(|e| Error::io(&path, e))?;
        if file_type.is_dir() {
            collect_files(&path, language, out)?;
        } else if path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|ext| language.extensions().contains(&ext))
        {
            out.push(path);
        }
    }
    Ok(())
}
