//! Normalization of epidemiological event databases into hierarchical,
//! multi-granularity events, and the retrospective comparison of event-based
//! surveillance systems against a gold-standard database.
//!
//! The crate is organised by subsystem:
//!
//! * [`model`]: hierarchies, events, event databases, scale fixing, selection
//!   and geographic distance.
//! * [`similarity`]: event similarity and event matching as a rectangular
//!   assignment problem.
//! * [`normalize`]: lexicon-driven entity extraction, event completion,
//!   geocoding, date normalization and corpus-event clustering.
//! * [`mining`]: periodic-frequent spatial patterns and multidimensional
//!   patterns over hierarchy-expanded databases.
//! * [`metrics`]: the quantitative evaluation scores (ranking F-measure,
//!   representativeness, timeliness, periodicity, thematic, source).
//! * [`sources`]: co-report networks with PageRank, cascades with CELF.

mod csvio;
pub mod error;
pub mod metrics;
pub mod mining;
pub mod model;
pub mod normalize;
pub mod similarity;
pub mod sources;

pub use error::{Error, Result};
