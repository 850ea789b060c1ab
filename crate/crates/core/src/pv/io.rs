//! Binary model container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic[8] version:u32 language:u8
//! config block
//! vocab_len:u64 { token_len:u32 token[token_len] count:u64 }*
//! 3 × { rows:u64 cols:u32 f32[rows*cols] }   word, output, doc
//! checksum:u64   FNV-1a of every preceding byte
//! ```

use std::fs;
use std::path::Path;

use super::{Matrix, PvModel, TrainingConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::lang::Language;

pub const MODEL_MAGIC: &[u8; 8] = b"PVDBOW\0\0";
pub const MODEL_FORMAT_VERSION: u32 = 1;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn encode_model(model: &PvModel) -> Vec<u8> {
    let c = &model.config;
    let mut buf = Vec::new();
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    buf.push(model.language.code());

    for v in [
        c.vector_size,
        c.epochs,
        c.max_samples,
        c.window,
        c.negatives,
        c.min_token_count,
        c.infer_epochs,
        c.threads,
    ] {
        buf.extend_from_slice(&(v as u64).to_le_bytes());
    }
    buf.extend_from_slice(&c.initial_learning_rate.to_le_bytes());
    buf.extend_from_slice(&c.final_learning_rate.to_le_bytes());
    buf.extend_from_slice(&c.seed.to_le_bytes());
    buf.push(u8::from(c.train_words));

    buf.extend_from_slice(&(model.vocabulary.len() as u64).to_le_bytes());
    for (token, count) in model.vocabulary.iter() {
        buf.extend_from_slice(&(token.len() as u32).to_le_bytes());
        buf.extend_from_slice(token.as_bytes());
        buf.extend_from_slice(&count.to_le_bytes());
    }
    for m in [
        &model.word_vectors,
        &model.output_weights,
        &model.doc_vectors,
    ] {
        buf.extend_from_slice(&(m.rows() as u64).to_le_bytes());
        buf.extend_from_slice(&(m.cols() as u32).to_le_bytes());
        for v in m.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let sum = fnv1a(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    buf
}

/// Write via a temporary file and rename, so readers never see a partial model.
pub fn save_model(model: &PvModel, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, encode_model(model)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<PvModel> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes).map_err(|reason| Error::format(path, reason))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or("truncated model file")?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize, String> {
        usize::try_from(self.u64()?).map_err(|_| "size overflow".to_string())
    }

    fn f32(&mut self) -> Result<f32, String> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn matrix(&mut self) -> Result<Matrix, String> {
        let rows = self.usize()?;
        let cols = self.u32()? as usize;
        let n = rows.checked_mul(cols).ok_or("matrix size overflow")?;
        let raw = self.take(n.checked_mul(4).ok_or("matrix size overflow")?)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Matrix::from_vec(rows, cols, data).expect("length checked"))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<PvModel, String> {
    if bytes.len() < MODEL_MAGIC.len() + 4 + 8 {
        return Err("truncated model file".into());
    }
    if &bytes[..8] != MODEL_MAGIC {
        return Err("bad magic bytes".into());
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let mut cur = Cursor {
        bytes: body,
        pos: 8,
    };
    let version = cur.u32()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(format!(
            "unsupported model version {version}, expected {MODEL_FORMAT_VERSION}"
        ));
    }
    if fnv1a(body) != u64::from_le_bytes(tail.try_into().unwrap()) {
        return Err("checksum mismatch (corrupted or truncated)".into());
    }

    let language = Language::from_code(cur.u8()?).ok_or("unknown language code")?;
    let mut ints = [0usize; 8];
    for v in &mut ints {
        *v = cur.usize()?;
    }
    let [vector_size, epochs, max_samples, window, negatives, min_token_count, infer_epochs, threads] =
        ints;
    let config = TrainingConfig {
        vector_size,
        epochs,
        max_samples,
        window,
        negatives,
        min_token_count,
        infer_epochs,
        threads,
        initial_learning_rate: cur.f32()?,
        final_learning_rate: cur.f32()?,
        seed: cur.u64()?,
        train_words: cur.u8()? != 0,
    };
    config.validate().map_err(|e| e.to_string())?;

    let vocab_len = cur.usize()?;
    let mut entries = Vec::with_capacity(vocab_len.min(1 << 20));
    for _ in 0..vocab_len {
        let len = cur.u32()? as usize;
        let token = std::str::from_utf8(cur.take(len)?).map_err(|_| "token is not UTF-8")?;
        entries.push((token.to_string(), cur.u64()?));
    }
    let vocabulary = Vocabulary::from_counts(entries);

    let word_vectors = cur.matrix()?;
    let output_weights = cur.matrix()?;
    let doc_vectors = cur.matrix()?;
    if cur.pos != body.len() {
        return Err("trailing bytes after matrices".into());
    }
    for (name, m, rows) in [
        ("word", &word_vectors, vocab_len),
        ("output", &output_weights, vocab_len),
        ("doc", &doc_vectors, doc_vectors.rows()),
    ] {
        if m.shape() != (rows, vector_size) {
            return Err(format!("{name} matrix has shape {:?}", m.shape()));
        }
        if !m.is_finite() {
            return Err(format!("{name} matrix has non-finite values"));
        }
    }

    Ok(PvModel {
        language,
        config,
        vocabulary,
        word_vectors,
        output_weights,
        doc_vectors,
    })
}
