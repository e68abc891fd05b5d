//! Opinion mining by robot navigation.
//!
//! Sub-concept assessments collected in an interview are turned into
//! landmark displacements on a square landscape. An EKF-SLAM robot maps
//! that landscape, and the x-axis aberration of its map against the imposed
//! ground truth gives a signed polarity score. The corpus and lexicon layers
//! supply concordance citations and PMI semantic orientation for answers
//! given in words.

pub mod config;
pub mod corpus;
pub mod error;
pub mod interview;
pub mod landscape;
pub mod lexicon;
pub mod montecarlo;
pub mod pipeline;
pub mod polarity;
pub mod slam;
pub mod svg;

pub use error::{Error, Result};
