//! Abstraction and PCTL model checking for labelled discrete-time Markov
//! chains.
//!
//! The pipeline: a concrete chain ([`model::LabeledMarkovChain`]) is grouped
//! into label-induced blocks, then abstracted either into a lumped chain
//! built from per-block representative rows ([`abstraction::LumpedChain`])
//! or into an interval-valued abstraction whose rows are the smallest
//! interval sets covering each block's transition rows
//! ([`abstraction::Imdpa`]). Interval rows convert to finite action sets via
//! polytope vertex enumeration ([`abstraction::Mdpa`]), on which
//! [`engine`] computes extremal PCTL probabilities with sound propagated
//! error bounds.

pub mod abstraction;
pub mod engine;
mod error;
pub mod format;
pub mod interval;
pub mod model;
pub mod pctl;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
