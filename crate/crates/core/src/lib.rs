//! Cloze-style factual knowledge probing.
//!
//! The crate turns knowledge-graph triples into full/hard cloze benchmarks
//! ([`curator`]), rewires a text encoder with a short self-supervised
//! contrastive run ([`rewire`]), probes it by retrieval or with masked/generative
//! baselines ([`probers`]) and scores the predictions ([`eval`]). Model
//! access goes through the traits in [`encoders`].

pub mod cli;
pub mod curator;
pub mod encoders;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod probers;
pub mod rewire;
pub mod text;

pub use error::{ProbeError, Result};
