//! Review a source file: embed each function, retrieve the stored
//! fragments whose reference similarity is closest, and vote over their
//! defect scores.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defect::{DefectLabel, DefectScore, ScoreRecord};
use crate::error::{Error, Result};
use crate::functions::extract_functions;
use crate::ingest::FragKey;
use crate::lang::Language;
use crate::preproc::preprocess;
use crate::pv::{cosine, PvModel};
use crate::store::{AlphaThresholds, VectorStore};

/// Matches retrieved per function.
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewOptions {
    pub k: usize,
    /// Report likely-defective whenever any match is, instead of the mode.
    pub conservative: bool,
    pub thresholds: AlphaThresholds,
}

impl Default for ReviewOptions {
    fn default() -> Self {
        ReviewOptions {
            k: DEFAULT_TOP_K,
            conservative: false,
            thresholds: AlphaThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchRecord {
    pub function_name: String,
    pub function_index: usize,
    pub post_id: u64,
    pub frag_id: u32,
    /// The match's stored similarity to the reference.
    pub alpha_prime: f64,
    pub pivot_distance: f64,
    /// Direct cosine between the function and the match.
    pub similarity: f64,
    /// `similarity` falls below the language's α̂. Informational only.
    pub below_threshold: bool,
    pub delta: DefectScore,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FunctionReview {
    pub name: String,
    pub start_line: usize,
    pub end_line: usize,
    /// The function's similarity to the reference vector.
    pub alpha: f64,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReviewReport {
    pub file: String,
    pub language: Language,
    pub function_count: usize,
    pub functions: Vec<FunctionReview>,
    pub matches: Vec<MatchRecord>,
    pub votes: Vec<DefectScore>,
    pub verdict: DefectScore,
    pub verdict_label: DefectLabel,
    pub conservative: bool,
    pub threshold: f64,
}

/// Statistical mode. Ties resolve toward -1, then 300, then 1.
pub fn majority_vote(votes: &[DefectScore]) -> Result<DefectScore> {
    if votes.is_empty() {
        return Err(Error::NoMatches);
    }
    const PREFERENCE: [DefectScore; 3] = [
        DefectScore::LIKELY_DEFECTIVE,
        DefectScore::UNPREDICTABLE,
        DefectScore::UNLIKELY_DEFECTIVE,
    ];
    let count = |s: DefectScore| votes.iter().filter(|&&v| v == s).count();
    let best = PREFERENCE
        .iter()
        .copied()
        .fold((PREFERENCE[0], 0), |(best, n), s| {
            let c = count(s);
            if c > n {
                (s, c)
            } else {
                (best, n)
            }
        });
    Ok(best.0)
}

/// -1 if any vote is -1, otherwise the mode.
pub fn conservative_vote(votes: &[DefectScore]) -> Result<DefectScore> {
    if votes.contains(&DefectScore::LIKELY_DEFECTIVE) {
        Ok(DefectScore::LIKELY_DEFECTIVE)
    } else {
        majority_vote(votes)
    }
}

pub fn review_file(
    path: &Path,
    language: Language,
    model: &PvModel,
    store: &VectorStore,
    scores: &HashMap<FragKey, ScoreRecord>,
    options: &ReviewOptions,
) -> Result<ReviewReport> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let source = String::from_utf8_lossy(&bytes);
    review_source(
        &path.display().to_string(),
        &source,
        language,
        model,
        store,
        scores,
        options,
    )
}

pub fn review_source(
    file: &str,
    source: &str,
    language: Language,
    model: &PvModel,
    store: &VectorStore,
    scores: &HashMap<FragKey, ScoreRecord>,
    options: &ReviewOptions,
) -> Result<ReviewReport> {
    if model.language != language {
        return Err(Error::UnsupportedLanguage(format!(
            "{language} (model was trained for {})",
            model.language
        )));
    }
    if options.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if store.len_for(language) == 0 {
        return Err(Error::EmptyPartition(language));
    }
    let reference = store
        .reference(language)
        .ok_or(Error::MissingReference(language))?;
    let threshold = options.thresholds.threshold_for(language);

    let units = extract_functions(source, language);
    let per_function: Vec<(FunctionReview, Vec<MatchRecord>)> = units
        .par_iter()
        .enumerate()
        .map(|(fi, unit)| {
            let inference = model.infer(&preprocess(&unit.body_text, language));
            let alpha = cosine(&inference.vector, &reference.vector)?;
            let mut matches = Vec::with_capacity(options.k);
            for entry in store.topk_by_pivot(alpha, options.k, language) {
                let score = scores
                    .get(&entry.key)
                    .ok_or(Error::Unscored(entry.key.post_id, entry.key.frag_id))?;
                let similarity = cosine(&inference.vector, &entry.vector)?;
                matches.push(MatchRecord {
                    function_name: unit.name.clone(),
                    function_index: fi,
                    post_id: entry.key.post_id,
                    frag_id: entry.key.frag_id,
                    alpha_prime: entry.cos_sim_to_ref,
                    pivot_distance: (entry.cos_sim_to_ref - alpha).abs(),
                    similarity,
                    below_threshold: similarity < threshold,
                    delta: score.delta,
                    title: score.title.clone(),
                });
            }
            let review = FunctionReview {
                name: unit.name.clone(),
                start_line: unit.start_line,
                end_line: unit.end_line,
                alpha,
                low_confidence: inference.low_confidence,
            };
            Ok((review, matches))
        })
        .collect::<Result<_>>()?;

    let mut functions = Vec::with_capacity(per_function.len());
    let mut matches = Vec::new();
    for (f, m) in per_function {
        functions.push(f);
        matches.extend(m);
    }
    let votes: Vec<DefectScore> = matches.iter().map(|m| m.delta).collect();
    let verdict = if options.conservative {
        conservative_vote(&votes)?
    } else {
        majority_vote(&votes)?
    };
    matches.sort_by(|a, b| {
        a.pivot_distance
            .total_cmp(&b.pivot_distance)
            .then(a.function_index.cmp(&b.function_index))
            .then((a.post_id, a.frag_id).cmp(&(b.post_id, b.frag_id)))
    });

    Ok(ReviewReport {
        file: file.to_string(),
        language,
        function_count: functions.len(),
        functions,
        matches,
        votes,
        verdict,
        verdict_label: verdict.label(),
        conservative: options.conservative,
        threshold,
    })
}

impl ReviewReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "file:     {}", self.file);
        let _ = writeln!(out, "language: {}", self.language);
        let _ = writeln!(out, "verdict:  {} ({})", self.verdict_label, self.verdict);
        let _ = writeln!(
            out,
            "functions: {}  votes: {}",
            self.function_count,
            self.votes.len()
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<24} {:>10} {:>6} {:>9} {:>9} {:>9} {:>5}  title",
            "function", "post", "frag", "alpha'", "distance", "cosine", "delta"
        );
        for m in &self.matches {
            let name = if m.function_name.is_empty() {
                "<file>"
            } else {
                &m.function_name
            };
            let flag = if m.below_threshold { " " } else { "*" };
            let _ = writeln!(
                out,
                "{:<24} {:>10} {:>6} {:>9.5} {:>9.2e} {:>8.4}{} {:>5}  {}",
                truncate(name, 24),
                m.post_id,
                m.frag_id,
                m.alpha_prime,
                m.pivot_distance,
                m.similarity,
                flag,
                m.delta,
                truncate(&m.title, 60)
            );
        }
        let _ = writeln!(
            out,
            "\n* cosine at or above the {:.4} similarity threshold",
            self.threshold
        );
        out
    }
}

fn truncate(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        s.to_string()
    } else {
        s.chars()
            .take(max - 1)
            .chain(std::iter::once('…'))
            .collect()
    }
}
