//! Selective binary pixel encodings for stochastic self-assembly.
//!
//! The pipeline: construct or enumerate candidate pixel matrices
//! ([`matrix`]), score their mutual attraction over translations and
//! rotations ([`scoring`], [`rotation`]), reduce mutually compatible sets to
//! maximal cliques under a threshold sweep ([`clique`]), map a clique onto an
//! assembly's mating faces ([`assembly`]), and export the results as plotter
//! G-code ([`plotter`]), force-prediction maps ([`force`]) and DNA edge codes
//! ([`dna`]).

pub mod assembly;
pub mod clique;
pub mod dna;
pub mod error;
pub mod force;
pub mod matrix;
pub mod plotter;
pub mod rotation;
pub mod scoring;

pub use error::{Error, Result};
pub use matrix::PixelMatrix;
