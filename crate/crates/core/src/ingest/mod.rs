//! Q&A dump ingestion: posts, code fragments and training corpora.

mod corpus;
mod dump;
mod fragments;

pub use corpus::{load_training_corpus, CorpusManifest, CorpusProvenance, Document};
pub use dump::{inherit_answer_tags, parse_posts_dump, PostReader};
pub use fragments::{accept_fragment, extract_fragments, non_whitespace_len, select_fragments};

use serde::{Deserialize, Serialize};

use crate::lang::Language;

/// Minimum non-whitespace size (exclusive) for a fragment to be kept.
pub const MIN_FRAGMENT_CHARS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PostType {
    Question,
    Answer,
}

impl PostType {
    /// Map the dump's `PostTypeId` attribute. Other row types are out of domain.
    pub fn from_type_id(id: u32) -> Option<PostType> {
        match id {
            1 => Some(PostType::Question),
            2 => Some(PostType::Answer),
            _ => None,
        }
    }
}

/// One question or answer row from a posts dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SoPost {
    pub post_id: u64,
    pub post_type: PostType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<u64>,
    pub score: i64,
    pub tags: Vec<String>,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing)]
    pub body: String,
}

impl SoPost {
    /// First tag that names a supported language.
    pub fn language(&self) -> Option<Language> {
        self.tags.iter().find_map(|t| Language::from_tag(t))
    }

    pub fn languages(&self) -> Vec<Language> {
        let mut langs: Vec<Language> = self
            .tags
            .iter()
            .filter_map(|t| Language::from_tag(t))
            .collect();
        langs.dedup();
        langs
    }
}

/// A code block paired with the narrative that precedes it.
///
/// Field order is the interchange record layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CodeFragment {
    pub post_id: u64,
    pub frag_id: u32,
    pub language: Language,
    pub preceding_text: String,
    pub code: String,
}

impl CodeFragment {
    pub fn key(&self) -> FragKey {
        FragKey::new(self.post_id, self.frag_id)
    }
}

/// `(postId, fragId)`, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FragKey {
    pub post_id: u64,
    pub frag_id: u32,
}

impl FragKey {
    pub fn new(post_id: u64, frag_id: u32) -> Self {
        FragKey { post_id, frag_id }
    }
}
