//! Fragment vectors indexed by their cosine similarity to a per-language
//! reference vector.
//!
//! Retrieval by pivot compares one scalar per entry: the query's own
//! similarity to the reference is looked up in a sorted array of stored
//! similarities. This is an approximation. Two vectors with close
//! similarities to the reference need not be close to each other, which is
//! why [`VectorStore::topk_exact`] exists alongside it.

mod persist;

pub use persist::{
    load_scores, save_scores, INDEX_FILE, REFERENCE_FILE, SCORES_FILE, STORE_FORMAT_VERSION,
    VECTORS_FILE,
};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FragKey;
use crate::lang::Language;
use crate::pv::{cosine, DocVector};

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedVector {
    pub key: FragKey,
    pub language: Language,
    pub vector: DocVector,
    /// Cosine similarity to the language's reference vector.
    pub cos_sim_to_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceVector {
    pub language: Language,
    pub vector: DocVector,
    pub source_key: FragKey,
}

#[derive(Debug, Clone, Default)]
struct Partition {
    reference: Option<ReferenceVector>,
    /// `(α′, key, entry index)` sorted by α′ then key.
    index: Vec<(f64, FragKey, usize)>,
}

#[derive(Debug, Clone)]
pub struct VectorStore {
    dim: usize,
    entries: Vec<IndexedVector>,
    keys: HashMap<FragKey, usize>,
    partitions: BTreeMap<Language, Partition>,
}

impl VectorStore {
    pub fn new(dim: usize) -> Self {
        VectorStore {
            dim,
            entries: Vec::new(),
            keys: HashMap::new(),
            partitions: BTreeMap::new(),
        }
    }

    /// Build a store in one pass: each language's reference is its entry
    /// with the smallest key, then every entry is inserted in key order.
    pub fn build<I>(dim: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FragKey, Language, DocVector)>,
    {
        let mut items: Vec<_> = items.into_iter().collect();
        items.sort_by_key(|(key, lang, _)| (*lang, *key));
        let mut store = VectorStore::new(dim);
        for (key, language, vector) in &items {
            if store.reference(*language).is_none() {
                store.set_reference(ReferenceVector {
                    language: *language,
                    vector: vector.clone(),
                    source_key: *key,
                })?;
            }
        }
        for (key, language, vector) in items {
            store.insert(key, language, vector)?;
        }
        Ok(store)
    }

    pub fn set_reference(&mut self, reference: ReferenceVector) -> Result<()> {
        self.check_vector(&reference.vector)?;
        let part = self.partitions.entry(reference.language).or_default();
        if !part.index.is_empty() {
            return Err(Error::Config(format!(
                "reference for {} cannot change once vectors are indexed",
                reference.language
            )));
        }
        part.reference = Some(reference);
        Ok(())
    }

    /// The entry with the smallest `(postId, fragId)` for `language`.
    pub fn choose_reference(&self, language: Language) -> Result<ReferenceVector> {
        let part = self
            .partitions
            .get(&language)
            .ok_or(Error::EmptyPartition(language))?;
        let &(_, key, idx) = part
            .index
            .iter()
            .min_by_key(|(_, key, _)| *key)
            .ok_or(Error::EmptyPartition(language))?;
        Ok(ReferenceVector {
            language,
            vector: self.entries[idx].vector.clone(),
            source_key: key,
        })
    }

    pub fn reference(&self, language: Language) -> Option<&ReferenceVector> {
        self.partitions.get(&language)?.reference.as_ref()
    }

    fn check_vector(&self, vector: &DocVector) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(())
    }

    /// Index one vector, computing its similarity to the reference.
    pub fn insert(
        &mut self,
        key: FragKey,
        language: Language,
        vector: DocVector,
    ) -> Result<&IndexedVector> {
        self.check_vector(&vector)?;
        if self.keys.contains_key(&key) {
            return Err(Error::DuplicateKey(key.post_id, key.frag_id));
        }
        let reference = self
            .reference(language)
            .ok_or(Error::MissingReference(language))?;
        let alpha = cosine(&vector, &reference.vector)?;
        self.insert_with_alpha(key, language, vector, alpha)
    }

    /// Insert with an already known α′, as when reloading a saved store.
    pub(crate) fn insert_with_alpha(
        &mut self,
        key: FragKey,
        language: Language,
        vector: DocVector,
        alpha: f64,
    ) -> Result<&IndexedVector> {
        if self.keys.contains_key(&key) {
            return Err(Error::DuplicateKey(key.post_id, key.frag_id));
        }
        let idx = self.entries.len();
        let part = self
            .partitions
            .get_mut(&language)
            .ok_or(Error::MissingReference(language))?;
        let pos = part
            .index
            .partition_point(|&(a, k, _)| a.total_cmp(&alpha).then(k.cmp(&key)).is_lt());
        part.index.insert(pos, (alpha, key, idx));
        self.keys.insert(key, idx);
        self.entries.push(IndexedVector {
            key,
            language,
            vector,
            cos_sim_to_ref: alpha,
        });
        Ok(&self.entries[idx])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len_for(&self, language: Language) -> usize {
        self.partitions.get(&language).map_or(0, |p| p.index.len())
    }

    pub fn languages(&self) -> impl Iterator<Item = Language> + '_ {
        self.partitions.keys().copied()
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[IndexedVector] {
        &self.entries
    }

    /// Entries of one language in ascending α′ order.
    pub fn entries_for(&self, language: Language) -> impl Iterator<Item = &IndexedVector> + '_ {
        self.partitions
            .get(&language)
            .into_iter()
            .flat_map(|p| p.index.iter())
            .map(|&(_, _, idx)| &self.entries[idx])
    }

    pub fn get(&self, key: FragKey) -> Option<&IndexedVector> {
        self.keys.get(&key).map(|&idx| &self.entries[idx])
    }

    /// The `k` entries whose α′ is closest to `alpha`, nearest first, ties
    /// broken by key. Returns everything when fewer than `k` exist.
    pub fn topk_by_pivot(&self, alpha: f64, k: usize, language: Language) -> Vec<&IndexedVector> {
        let Some(part) = self.partitions.get(&language) else {
            return Vec::new();
        };
        let index = &part.index;
        if k == 0 || index.is_empty() {
            return Vec::new();
        }
        let dist = |i: usize| (index[i].0 - alpha).abs();

        // Expand outward from the insertion point, always taking the nearer
        // side, until k are taken; then keep taking while the next candidate
        // ties the k-th distance so the key tie-break can see all of them.
        let mut right = index.partition_point(|&(a, _, _)| a < alpha);
        let mut left = right;
        let mut taken: Vec<usize> = Vec::with_capacity(k + 2);
        let mut kth = f64::INFINITY;
        loop {
            let l = (left > 0).then(|| dist(left - 1));
            let r = (right < index.len()).then(|| dist(right));
            let (take_left, d) = match (l, r) {
                (Some(l), Some(r)) if l <= r => (true, l),
                (_, Some(r)) => (false, r),
                (Some(l), None) => (true, l),
                (None, None) => break,
            };
            if taken.len() >= k && d > kth {
                break;
            }
            if take_left {
                left -= 1;
                taken.push(left);
            } else {
                taken.push(right);
                right += 1;
            }
            if taken.len() == k {
                kth = d;
            }
        }
        taken.sort_by(|&a, &b| {
            dist(a)
                .total_cmp(&dist(b))
                .then(index[a].1.cmp(&index[b].1))
        });
        taken.truncate(k);
        taken
            .into_iter()
            .map(|i| &self.entries[index[i].2])
            .collect()
    }

    /// The `k` entries most cosine-similar to `query`, most similar first,
    /// ties broken by key. Exhaustive.
    pub fn topk_exact(
        &self,
        query: &DocVector,
        k: usize,
        language: Language,
    ) -> Result<Vec<(f64, &IndexedVector)>> {
        let mut scored = Vec::with_capacity(self.len_for(language));
        for entry in self.entries_for(language) {
            scored.push((cosine(query, &entry.vector)?, entry));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.key.cmp(&b.1.key)));
        scored.truncate(k);
        Ok(scored)
    }
}

/// Per-language similarity above which two samples count as near-identical.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlphaThresholds {
    overrides: BTreeMap<Language, f64>,
}

impl AlphaThresholds {
    pub fn default_for(language: Language) -> f64 {
        match language {
            Language::C => 0.963,
            Language::CSharp => 0.954,
            Language::Java => 0.97,
            Language::JavaScript => 0.967,
            Language::Python => 0.9617,
        }
    }

    pub fn with_override(mut self, language: Language, value: f64) -> Self {
        self.overrides.insert(language, value);
        self
    }

    pub fn threshold_for(&self, language: Language) -> f64 {
        self.overrides
            .get(&language)
            .copied()
            .unwrap_or_else(|| AlphaThresholds::default_for(language))
    }
}

/// Look a threshold up by language name.
pub fn threshold_for(language: &str) -> Result<f64> {
    Ok(AlphaThresholds::default_for(language.parse()?))
}
