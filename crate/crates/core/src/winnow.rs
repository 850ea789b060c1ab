//! Winnowing fingerprints: the variable-length baseline representation.
//!
//! Every k-gram of characters is hashed with a 64-bit polynomial rolling
//! hash; in each window of `w` consecutive gram hashes the minimum is
//! selected (rightmost on ties). A selection is recorded once even when it
//! stays minimal across several windows.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FragKey;
use crate::jsonl::read_jsonl;

pub const DEFAULT_GRAM: usize = 5;
pub const DEFAULT_WINDOW: usize = 4;

const BASE: u64 = 0x0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub k: usize,
    pub w: usize,
    /// (hash, gram position), positions strictly increasing.
    pub hashes: Vec<(u64, usize)>,
}

impl Fingerprint {
    pub fn hash_set(&self) -> HashSet<u64> {
        self.hashes.iter().map(|&(h, _)| h).collect()
    }

    /// Distinct hashes, ascending.
    pub fn sorted_hashes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.hashes.iter().map(|&(h, _)| h).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Rolling hashes of every k-gram of `chars`.
pub fn gram_hashes(chars: &[char], k: usize) -> Vec<u64> {
    if k == 0 || chars.len() < k {
        return Vec::new();
    }
    let top = (1..k).fold(1u64, |acc, _| acc.wrapping_mul(BASE));
    let code = |c: char| c as u64 + 1;
    let mut h = chars[..k]
        .iter()
        .fold(0u64, |acc, &c| acc.wrapping_mul(BASE).wrapping_add(code(c)));
    let mut out = Vec::with_capacity(chars.len() - k + 1);
    out.push(h);
    for i in k..chars.len() {
        h = h
            .wrapping_sub(code(chars[i - k]).wrapping_mul(top))
            .wrapping_mul(BASE)
            .wrapping_add(code(chars[i]));
        out.push(h);
    }
    out
}

pub fn fingerprint(code: &str, k: usize, w: usize) -> Result<Fingerprint> {
    if k == 0 || w == 0 {
        return Err(Error::Config(
            "gram and window sizes must be positive".into(),
        ));
    }
    let chars: Vec<char> = code.chars().collect();
    if chars.len() < k {
        return Err(Error::BelowGramSize {
            len: chars.len(),
            k,
        });
    }
    let grams = gram_hashes(&chars, k);
    // Inputs with fewer grams than a window still select their minimum.
    let span = w.min(grams.len());
    let mut hashes: Vec<(u64, usize)> = Vec::new();
    for start in 0..=grams.len() - span {
        let mut best = start;
        for i in start..start + span {
            if grams[i] <= grams[best] {
                best = i;
            }
        }
        if hashes.last().is_none_or(|&(_, p)| p != best) {
            hashes.push((grams[best], best));
        }
    }
    Ok(Fingerprint { k, w, hashes })
}

/// Containment of `a` in `b`: shared distinct hashes over `a`'s distinct hashes.
pub fn match_score(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if (a.k, a.w) != (b.k, b.w) {
        return Err(Error::FingerprintMismatch(a.k, a.w, b.k, b.w));
    }
    let sa = a.hash_set();
    if sa.is_empty() {
        return Ok(0.0);
    }
    let sb = b.hash_set();
    Ok(sa.intersection(&sb).count() as f64 / sa.len() as f64)
}

/// Containment over ascending deduplicated hash lists.
pub fn containment_sorted(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared as f64 / a.len() as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FingerprintRecord {
    pub post_id: u64,
    pub frag_id: u32,
    pub k: usize,
    pub w: usize,
    pub hashes: Vec<u64>,
}

/// Fingerprints of stored fragments, matched by exhaustive scan.
#[derive(Debug, Clone, Default)]
pub struct FingerprintStore {
    pub k: usize,
    pub w: usize,
    pub records: Vec<FingerprintRecord>,
}

impl FingerprintStore {
    pub fn new(k: usize, w: usize) -> Self {
        FingerprintStore {
            k,
            w,
            records: Vec::new(),
        }
    }

    /// Adds a fragment. Fragments shorter than `k` are skipped and reported
    /// as `false`.
    pub fn insert(&mut self, key: FragKey, code: &str) -> Result<bool> {
        match fingerprint(code, self.k, self.w) {
            Ok(fp) => {
                self.records.push(FingerprintRecord {
                    post_id: key.post_id,
                    frag_id: key.frag_id,
                    k: self.k,
                    w: self.w,
                    hashes: fp.sorted_hashes(),
                });
                Ok(true)
            }
            Err(Error::BelowGramSize { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Top `k` records by containment of `query` in them, ties by key.
    pub fn top_matches(&self, query: &Fingerprint, k: usize) -> Result<Vec<(f64, FragKey)>> {
        if (query.k, query.w) != (self.k, self.w) {
            return Err(Error::FingerprintMismatch(query.k, query.w, self.k, self.w));
        }
        let q = query.sorted_hashes();
        let mut scored: Vec<(f64, FragKey)> = self
            .records
            .iter()
            .map(|r| {
                (
                    containment_sorted(&q, &r.hashes),
                    FragKey::new(r.post_id, r.frag_id),
                )
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(k);
        Ok(scored)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let records: Vec<FingerprintRecord> = read_jsonl(path)?;
        let (k, w) = records
            .first()
            .map_or((DEFAULT_GRAM, DEFAULT_WINDOW), |r| (r.k, r.w));
        if let Some(r) = records.iter().find(|r| (r.k, r.w) != (k, w)) {
            return Err(Error::FingerprintMismatch(k, w, r.k, r.w));
        }
        Ok(FingerprintStore { k, w, records })
    }
}
