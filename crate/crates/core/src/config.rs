//! Run configuration and the on-disk artifact layout.
//!
//! Artifacts live under `<data root>/v1/`:
//!
//! ```text
//! model/<lang>.pvm          trained paragraph-vector model
//! store/fragments.jsonl     mined fragments (all languages)
//! store/posts.jsonl         post metadata for scoring
//! store/scores.jsonl        pre-computed defect scores
//! store/<lang>/             vector store for one language
//! reports/                  review and benchmark output
//! ```

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::defect::DefectThresholds;
use crate::error::{Error, Result};
use crate::lang::Language;
use crate::pv::TrainingConfig;
use crate::review::DEFAULT_TOP_K;
use crate::store::AlphaThresholds;

pub const DATA_ENV: &str = "CROWDREVIEW_DATA";
pub const LAYOUT_VERSION: &str = "v1";
pub const DEFAULT_DATA_ROOT: &str = "crowdreview-data";

pub const FRAGMENTS_FILE: &str = "fragments.jsonl";
pub const POSTS_FILE: &str = "posts.jsonl";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub dump: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub language: Option<Language>,
    pub data_root: Option<PathBuf>,
    pub paths: Paths,
    pub training: TrainingConfig,
    pub thresholds: DefectThresholds,
    pub k: usize,
    /// Per-language α̂ overrides.
    pub alpha: BTreeMap<Language, f64>,
    pub conservative: bool,
    /// Overrides `training.seed` when set.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            language: None,
            data_root: None,
            paths: Paths::default(),
            training: TrainingConfig::default(),
            thresholds: DefectThresholds::default(),
            k: DEFAULT_TOP_K,
            alpha: BTreeMap::new(),
            conservative: false,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn training(&self) -> TrainingConfig {
        let mut t = self.training.clone();
        if let Some(seed) = self.seed {
            t.seed = seed;
        }
        t
    }

    pub fn alpha_thresholds(&self) -> AlphaThresholds {
        self.alpha
            .iter()
            .fold(AlphaThresholds::default(), |acc, (&l, &v)| {
                acc.with_override(l, v)
            })
    }

    pub fn language(&self) -> Result<Language> {
        self.language.ok_or_else(|| {
            Error::Config("no language given (use --language or set `language`)".into())
        })
    }

    /// Flag, then config, then the environment, then the default.
    pub fn layout(&self) -> Layout {
        let root = self
            .data_root
            .clone()
            .or_else(|| env::var_os(DATA_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_ROOT));
        Layout::new(root)
    }

    pub fn model_path(&self, language: Language) -> PathBuf {
        self.paths
            .model
            .clone()
            .unwrap_or_else(|| self.layout().model_file(language))
    }

    pub fn store_dir(&self) -> PathBuf {
        self.paths
            .store
            .clone()
            .unwrap_or_else(|| self.layout().store_dir())
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.paths
            .reports
            .clone()
            .unwrap_or_else(|| self.layout().reports_dir())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn version_dir(&self) -> PathBuf {
        self.root.join(LAYOUT_VERSION)
    }

    pub fn model_dir(&self) -> PathBuf {
        self.version_dir().join("model")
    }

    pub fn model_file(&self, language: Language) -> PathBuf {
        self.model_dir()
            .join(format!("{}.pvm", file_stem(language)))
    }

    pub fn store_dir(&self) -> PathBuf {
        self.version_dir().join("store")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.version_dir().join("reports")
    }
}

/// Vector store directory for one language inside a store root.
pub fn vectors_dir(store_root: &Path, language: Language) -> PathBuf {
    store_root.join(file_stem(language))
}

/// Filesystem-safe language name.
pub fn file_stem(language: Language) -> &'static str {
    match language {
        Language::CSharp => "csharp",
        other => other.tag(),
    }
}
