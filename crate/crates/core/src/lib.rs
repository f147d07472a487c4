//! Construction and verification of graphical small cancellation
//! presentations: Rips–Segev graphs, the graphical Comerford transform for
//! finite-index subgroups, and certificates that the resulting groups have
//! no unique product.

pub mod cancel;
pub mod comerford;
pub mod dot;
pub mod error;
pub mod graph;
pub mod pipeline;
pub mod ripssegev;
pub mod updcert;
pub mod word;

pub use error::{Error, Result};
pub use graph::{Edge, LabelledGraph, Path, Step};
pub use word::{Alphabet, Gen, LengthFunction, Letter, Word};
