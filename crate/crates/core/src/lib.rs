//! Conversational flow analysis for two-sided, round-structured debates.
//!
//! The pipeline runs from canonical JSON transcripts ([`corpus`]) through
//! content-term extraction ([`textproc`]) to per-side talking points
//! ([`divergence`]), coverage and discussion-point flow ([`flow`]), labeled
//! feature vectors ([`features`]) and leave-one-out winner prediction
//! ([`learn`]). [`stats`] holds the significance tests and [`synth`] a seeded
//! generator of synthetic debates.

pub mod corpus;
pub mod textproc;
pub mod divergence;
pub mod flow;
pub mod features;
pub mod learn;
pub mod stats;
pub mod pipeline;
pub mod synth;
