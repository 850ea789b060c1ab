//! Defectiveness scores for mined fragments, from post metadata and
//! narrative sentiment.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CodeFragment, FragKey, PostType, SoPost};
use crate::lang::Language;
use crate::sentiment::{analyze, decide, Sentiment, SentimentLexicon};

/// Score cut-offs above which a post's votes are taken as signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DefectThresholds {
    pub question_score: f64,
    pub answer_score: f64,
}

impl Default for DefectThresholds {
    fn default() -> Self {
        DefectThresholds {
            question_score: 1.0,
            answer_score: 1.9,
        }
    }
}

/// One of -1 (likely defective), 1 (unlikely defective), 300 (unpredictable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct DefectScore(i32);

impl DefectScore {
    pub const LIKELY_DEFECTIVE: DefectScore = DefectScore(-1);
    pub const UNLIKELY_DEFECTIVE: DefectScore = DefectScore(1);
    pub const UNPREDICTABLE: DefectScore = DefectScore(300);

    pub const ALL: [DefectScore; 3] = [
        DefectScore::LIKELY_DEFECTIVE,
        DefectScore::UNLIKELY_DEFECTIVE,
        DefectScore::UNPREDICTABLE,
    ];

    pub fn value(self) -> i32 {
        self.0
    }

    pub fn label(self) -> DefectLabel {
        match self.0 {
            -1 => DefectLabel::LikelyDefective,
            1 => DefectLabel::UnlikelyDefective,
            _ => DefectLabel::Unpredictable,
        }
    }
}

impl TryFrom<i32> for DefectScore {
    type Error = Error;

    fn try_from(value: i32) -> Result<Self> {
        match value {
            -1 | 1 | 300 => Ok(DefectScore(value)),
            other => Err(Error::InvalidScore(other)),
        }
    }
}

impl From<DefectScore> for i32 {
    fn from(score: DefectScore) -> i32 {
        score.0
    }
}

impl fmt::Display for DefectScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefectLabel {
    LikelyDefective,
    UnlikelyDefective,
    Unpredictable,
}

impl DefectLabel {
    pub fn score(self) -> DefectScore {
        match self {
            DefectLabel::LikelyDefective => DefectScore::LIKELY_DEFECTIVE,
            DefectLabel::UnlikelyDefective => DefectScore::UNLIKELY_DEFECTIVE,
            DefectLabel::Unpredictable => DefectScore::UNPREDICTABLE,
        }
    }
}

impl fmt::Display for DefectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefectLabel::LikelyDefective => "Likely-defective",
            DefectLabel::UnlikelyDefective => "Unlikely-defective",
            DefectLabel::Unpredictable => "Unpredictable",
        })
    }
}

/// Map a raw integer onto its label.
pub fn label(value: i32) -> Result<DefectLabel> {
    DefectScore::try_from(value).map(DefectScore::label)
}

pub fn narrative_score(sentiment: Sentiment) -> DefectScore {
    match sentiment {
        Sentiment::Negative => DefectScore::LIKELY_DEFECTIVE,
        Sentiment::Positive => DefectScore::UNLIKELY_DEFECTIVE,
        Sentiment::Neutral => DefectScore::UNPREDICTABLE,
    }
}

/// The decision table over post type, vote score and narrative sentiment.
///
/// A question voted above its threshold is a known problem: -1 whatever the
/// narrative says. An answer starts at 1 when voted above its threshold and
/// -1 otherwise, then takes the minimum with the narrative score. A question
/// at or below its threshold takes the narrative score alone.
pub fn estimate(
    post_type: PostType,
    score: f64,
    sentiment: Sentiment,
    thresholds: &DefectThresholds,
) -> DefectScore {
    let narrative = narrative_score(sentiment);
    match post_type {
        PostType::Question if score > thresholds.question_score => DefectScore::LIKELY_DEFECTIVE,
        PostType::Question => narrative,
        PostType::Answer => {
            let base = if score > thresholds.answer_score {
                DefectScore::UNLIKELY_DEFECTIVE
            } else {
                DefectScore::LIKELY_DEFECTIVE
            };
            base.min(narrative)
        }
    }
}

pub fn estimate_post(
    post: &SoPost,
    narrative: &str,
    thresholds: &DefectThresholds,
    lexicon: &SentimentLexicon,
) -> DefectScore {
    let sentiment = decide(&analyze(narrative, lexicon));
    estimate(post.post_type, post.score as f64, sentiment, thresholds)
}

/// Pre-computed score for one stored fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreRecord {
    pub post_id: u64,
    pub frag_id: u32,
    pub delta: DefectScore,
    #[serde(default)]
    pub title: String,
}

impl ScoreRecord {
    pub fn key(&self) -> FragKey {
        FragKey::new(self.post_id, self.frag_id)
    }
}

/// Score every fragment whose post is known, using its preceding narrative.
/// Output order follows `fragments`; fragments with no post are skipped.
pub fn score_fragments(
    fragments: &[CodeFragment],
    posts: &HashMap<u64, SoPost>,
    thresholds: &DefectThresholds,
    lexicon: &SentimentLexicon,
) -> Vec<ScoreRecord> {
    fragments
        .par_iter()
        .filter_map(|frag| {
            let post = posts.get(&frag.post_id)?;
            Some(ScoreRecord {
                post_id: frag.post_id,
                frag_id: frag.frag_id,
                delta: estimate_post(post, &frag.preceding_text, thresholds, lexicon),
                title: post.title.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub count: usize,
    pub min: i64,
    pub max: i64,
    pub avg: f64,
    pub stddev: f64,
}

/// Vote-score statistics per (language, post type), for re-deriving
/// thresholds on a different dump.
pub fn score_statistics(posts: &[SoPost]) -> BTreeMap<(Language, String), ScoreSummary> {
    let mut groups: BTreeMap<(Language, String), Vec<i64>> = BTreeMap::new();
    for post in posts {
        if let Some(lang) = post.language() {
            groups
                .entry((lang, format!("{:?}", post.post_type)))
                .or_default()
                .push(post.score);
        }
    }
    groups
        .into_iter()
        .map(|(key, scores)| {
            let n = scores.len() as f64;
            let avg = scores.iter().sum::<i64>() as f64 / n;
            let var = scores
                .iter()
                .map(|&s| (s as f64 - avg).powi(2))
                .sum::<f64>()
                / n;
            let summary = ScoreSummary {
                count: scores.len(),
                min: *scores.iter().min().unwrap(),
                max: *scores.iter().max().unwrap(),
                avg,
                stddev: var.sqrt(),
            };
            (key, summary)
        })
        .collect()
}
