//! Lexicon-based narrative sentiment and the three-way decision rule.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EMBEDDED_LEXICON: &str = include_str!("data/lexicon.tsv");

const NEGATORS: &[&str] = &[
    "not",
    "no",
    "never",
    "none",
    "nobody",
    "neither",
    "nor",
    "without",
    "isn't",
    "isnt",
    "doesn't",
    "doesnt",
    "don't",
    "dont",
    "didn't",
    "didnt",
    "can't",
    "cant",
    "cannot",
    "won't",
    "wont",
    "wasn't",
    "aren't",
    "shouldn't",
    "wouldn't",
    "couldn't",
    "hardly",
    "nowhere",
];

const BOOSTERS: &[(&str, f64)] = &[
    ("very", 0.293),
    ("really", 0.293),
    ("extremely", 0.293),
    ("absolutely", 0.293),
    ("completely", 0.293),
    ("totally", 0.293),
    ("highly", 0.293),
    ("incredibly", 0.293),
    ("so", 0.293),
    ("super", 0.293),
    ("quite", 0.2),
    ("slightly", -0.293),
    ("somewhat", -0.293),
    ("barely", -0.293),
    ("marginally", -0.293),
];

/// How many preceding tokens a negator or booster reaches.
const SCOPE: usize = 3;

/// Proportions of positive, negative and neutral content; sums to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub pos: f64,
    pub neg: f64,
    pub neu: f64,
}

impl SentimentScore {
    pub fn new(pos: f64, neg: f64, neu: f64) -> Self {
        SentimentScore { pos, neg, neu }
    }

    pub fn neutral() -> Self {
        SentimentScore::new(0.0, 0.0, 1.0)
    }

    pub fn is_valid(&self) -> bool {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        in_unit(self.pos)
            && in_unit(self.neg)
            && in_unit(self.neu)
            && (self.pos + self.neg + self.neu - 1.0).abs() <= 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
    negators: HashSet<String>,
    boosters: HashMap<String, f64>,
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        SentimentLexicon::embedded()
    }
}

impl SentimentLexicon {
    /// The built-in developer-discussion lexicon.
    pub fn embedded() -> Self {
        SentimentLexicon::from_tsv(EMBEDDED_LEXICON).expect("embedded lexicon is valid")
    }

    /// Parse `token<TAB>valence` lines. Blank lines and `#` comments are
    /// ignored. Negators and boosters are the built-in sets.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut valences = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |why: &str| Error::Config(format!("lexicon line {}: {why}", lineno + 1));
            let (token, value) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected token<TAB>valence"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| bad("valence is not a number"))?;
            if !(-4.0..=4.0).contains(&value) {
                return Err(bad("valence outside [-4, 4]"));
            }
            valences.insert(token.trim().to_lowercase(), value);
        }
        Ok(SentimentLexicon {
            valences,
            negators: NEGATORS.iter().map(|s| s.to_string()).collect(),
            boosters: BOOSTERS.iter().map(|&(s, v)| (s.to_string(), v)).collect(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SentimentLexicon::from_tsv(&text)
    }

    pub fn valence(&self, token: &str) -> f64 {
        self.valences.get(token).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    /// The same lexicon with every valence sign-flipped.
    pub fn negated(&self) -> Self {
        SentimentLexicon {
            valences: self.valences.iter().map(|(k, v)| (k.clone(), -v)).collect(),
            ..self.clone()
        }
    }
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Score a narrative.
///
/// Each token's valence is flipped when a negator appears within the three
/// preceding tokens and pushed away from zero (or toward it, for dampeners)
/// by boosters in the same span. `neu` is the share of zero-valence tokens;
/// the remainder is split between `pos` and `neg` by their mass.
pub fn analyze(text: &str, lexicon: &SentimentLexicon) -> SentimentScore {
    let tokens = words(text);
    if tokens.is_empty() {
        return SentimentScore::neutral();
    }

    let (mut pos_mass, mut neg_mass, mut zeros) = (0.0f64, 0.0f64, 0usize);
    for (i, token) in tokens.iter().enumerate() {
        let mut v = lexicon.valence(token);
        if v != 0.0 {
            let window = &tokens[i.saturating_sub(SCOPE)..i];
            for (distance, prev) in window.iter().rev().enumerate() {
                if let Some(&inc) = lexicon.boosters.get(prev) {
                    let scaled = inc * (1.0 - 0.05 * distance as f64);
                    v = v.signum() * (v.abs() + scaled).max(0.0);
                }
            }
            if window.iter().any(|w| lexicon.negators.contains(w)) {
                v = -v;
            }
        }
        if v > 0.0 {
            pos_mass += v;
        } else if v < 0.0 {
            neg_mass -= v;
        } else {
            zeros += 1;
        }
    }

    let total = pos_mass + neg_mass;
    if total == 0.0 {
        return SentimentScore::neutral();
    }
    let neu = zeros as f64 / tokens.len() as f64;
    let pos = (1.0 - neu) * pos_mass / total;
    let neg = (1.0 - neu) * neg_mass / total;
    SentimentScore::new(pos, neg, neu)
}

/// Positive iff `pos ≥ 0.5` and `pos > neg`; Negative mirrors it; Neutral
/// when `neu ≥ 0.5` and both others are below 0.5, and for anything no
/// clause covers.
pub fn decide(score: &SentimentScore) -> Sentiment {
    let SentimentScore { pos, neg, .. } = *score;
    if pos >= 0.5 && pos > neg {
        Sentiment::Positive
    } else if neg >= 0.5 && neg > pos {
        Sentiment::Negative
    } else {
        // covers neu >= 0.5 with both others below 0.5, plus the uncovered rest
        Sentiment::Neutral
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_neutral() {
        let lex = SentimentLexicon::embedded();
        assert_eq!(analyze("", &lex), SentimentScore::neutral());
        assert_eq!(analyze("  ...  ", &lex), SentimentScore::neutral());
    }

    #[test]
    fn positive_only_text() {
        let lex = SentimentLexicon::embedded();
        let s = analyze("thanks, works great", &lex);
        assert!(s.pos > s.neg && s.pos > 0.5, "{s:?}");
        assert_eq!(decide(&s), Sentiment::Positive);
    }

    #[test]
    fn negation_flips() {
        let lex = SentimentLexicon::from_tsv("good\t1.9\n").unwrap();
        let s = analyze("not good", &lex);
        assert!(s.neg > s.pos, "{s:?}");
        assert_eq!(decide(&s), Sentiment::Negative);
        // out of reach after three tokens
        let s = analyze("not a b c good", &lex);
        assert!(s.pos > 0.0 && s.neg == 0.0);
    }

    #[test]
    fn boosters_scale_magnitude() {
        let lex = SentimentLexicon::from_tsv("good\t1.0\nbad\t-1.0\n").unwrap();
        let plain = analyze("good bad", &lex);
        let boosted = analyze("very good bad", &lex);
        assert!((plain.pos - plain.neg).abs() < 1e-12);
        assert!(boosted.pos > boosted.neg);
    }

    #[test]
    fn decide_clauses() {
        assert_eq!(
            decide(&SentimentScore::new(0.6, 0.1, 0.3)),
            Sentiment::Positive
        );
        assert_eq!(
            decide(&SentimentScore::new(0.1, 0.6, 0.3)),
            Sentiment::Negative
        );
        assert_eq!(
            decide(&SentimentScore::new(0.1, 0.2, 0.7)),
            Sentiment::Neutral
        );
        assert_eq!(
            decide(&SentimentScore::new(0.45, 0.45, 0.10)),
            Sentiment::Neutral
        );
        assert_eq!(
            decide(&SentimentScore::new(0.5, 0.5, 0.0)),
            Sentiment::Neutral
        );
        assert_eq!(
            decide(&SentimentScore::new(0.5, 0.0, 0.5)),
            Sentiment::Positive
        );
    }

    #[test]
    fn lexicon_rejects_out_of_range() {
        assert!(SentimentLexicon::from_tsv("x\t4.5\n").is_err());
        assert!(SentimentLexicon::from_tsv("x 1.0\n").is_err());
        assert!(SentimentLexicon::embedded().len() >= 200);
    }
}
