//! Defectiveness triage for source files using crowd-scored Q&A code
//! fragments.
//!
//! Fragments mined from a posts dump are embedded with paragraph vectors
//! and indexed by their cosine similarity to a per-language reference
//! vector. Reviewing a file embeds each of its functions, retrieves the
//! fragments whose scalar similarity is closest, and takes the mode of
//! their pre-computed defect scores.

pub mod bench;
pub mod config;
pub mod defect;
pub mod error;
pub mod functions;
pub mod ingest;
pub mod jsonl;
pub mod lang;
pub mod metrics;
pub mod pipeline;
pub mod preproc;
pub mod pv;
pub mod review;
pub mod sentiment;
pub mod store;
pub mod synth;
pub mod winnow;

pub use error::{Error, Result};
pub use lang::Language;
