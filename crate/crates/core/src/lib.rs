//! Hybrid-morphology toolkit for Maltese verb forms.
//!
//! Two pipelines share the segmentation machinery in [`affixes`]:
//!
//! * unsupervised grouping of related word forms: discover affixes from a
//!   raw corpus, segment words, cluster them by stem ([`clustering`]), then
//!   summarise expert evaluations of the clusters ([`cluster_stats`]);
//! * supervised labelling of verbal properties: decision trees
//!   ([`classify`]) arranged in a property cascade ([`cascade`]) and scored
//!   against gold annotations ([`evaluation`]).
//!
//! [`lexicon`] holds the corpus and annotation file formats; all fallible
//! APIs return [`error::Error`].

pub mod affixes;
pub mod cascade;
pub mod classify;
pub mod cluster_stats;
pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod lexicon;

pub use error::{Error, Result};
