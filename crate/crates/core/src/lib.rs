//! Query performance prediction from generated relevance judgments.
//!
//! The pipeline judges the top of each ranked list with a pluggable
//! [`judging::Judge`], computes a target measure from those pseudo-labels
//! ([`metrics`]), and compares the per-query predictions with actual
//! quality ([`eval`]). Score-distribution baselines live in [`baselines`];
//! file formats in [`trec_io`].

pub mod baselines;
pub mod eval;
pub mod judging;
pub mod metrics;
pub mod trec_io;
