use std::collections::HashMap;

use rand::Rng;

use crate::preproc::TokenSequence;

/// Token inventory with counts and the smoothed unigram noise distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    cumulative: Vec<f64>,
}

/// Exponent applied to counts for the noise distribution.
const NOISE_POWER: f64 = 0.75;

impl Vocabulary {
    /// Count tokens across documents and keep those seen at least
    /// `min_count` times. Ordered by descending count, then token text.
    pub fn build<'a, I>(docs: I, min_count: usize) -> Vocabulary
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in docs {
            for token in doc {
                *counts.entry(token.as_str()).or_default() += 1;
            }
        }
        let mut entries: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count as u64)
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Vocabulary::from_counts(
            entries
                .into_iter()
                .map(|(t, c)| (t.to_string(), c))
                .collect(),
        )
    }

    pub fn from_counts(entries: Vec<(String, u64)>) -> Vocabulary {
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (t, c) in entries {
            tokens.push(t);
            counts.push(c);
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(NOISE_POWER);
                acc
            })
            .collect();
        Vocabulary {
            tokens,
            counts,
            index,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.tokens
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    /// Draw `k` noise tokens. Draws that hit `target` are dropped.
    pub fn sample_negatives<R: Rng>(
        &self,
        rng: &mut R,
        target: usize,
        k: usize,
        out: &mut Vec<usize>,
    ) {
        out.clear();
        let Some(&total) = self.cumulative.last() else {
            return;
        };
        for _ in 0..k {
            let u = rng.gen::<f64>() * total;
            let idx = self
                .cumulative
                .partition_point(|&c| c <= u)
                .min(self.len() - 1);
            if idx != target {
                out.push(idx);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::new(s.split_whitespace().map(String::from).collect())
    }

    #[test]
    fn min_count_filters_and_orders() {
        let docs = [seq("a b b c c c"), seq("c d")];
        let v = Vocabulary::build(&docs, 2);
        let toks: Vec<_> = v.iter().collect();
        assert_eq!(toks, vec![("c", 4), ("b", 2)]);
        assert_eq!(v.index("a"), None);
        assert_eq!(v.index("b"), Some(1));
    }

    #[test]
    fn noise_follows_smoothed_counts() {
        let v = Vocabulary::from_counts(vec![("x".into(), 81), ("y".into(), 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut out = Vec::new();
        let mut hits = [0usize; 2];
        for _ in 0..20_000 {
            v.sample_negatives(&mut rng, usize::MAX, 1, &mut out);
            hits[out[0]] += 1;
        }
        // 81^0.75 = 27, so y is drawn with probability 1/28
        let frac = hits[1] as f64 / 20_000.0;
        assert!((frac - 1.0 / 28.0).abs() < 0.006, "{frac}");
    }

    #[test]
    fn target_is_never_a_negative() {
        let v = Vocabulary::from_counts(vec![("x".into(), 5), ("y".into(), 5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut out = Vec::new();
        for _ in 0..100 {
            v.sample_negatives(&mut rng, 0, 5, &mut out);
            assert!(out.iter().all(|&i| i == 1));
        }
    }
}
