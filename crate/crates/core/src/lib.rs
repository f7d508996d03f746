//! Constructive combinatorics of Cantor space.
//!
//! Binary words and sequences, decidable sets of words, trees and their
//! completion, omniscience oracles and the reductions between them, the fan
//! theorem layer, and query functionals with moduli of continuity. Every
//! positive answer is backed by a certificate that a level scan can re-check.

pub mod budget;
pub mod cli;
pub mod continuity;
pub mod error;
pub mod fan;
pub mod oracles;
pub mod sets;
pub mod trees;
pub mod witness;
pub mod words;

pub use error::{Error, Result};
pub use sets::{DSet, Evidence, Flags, Verdict};

pub use trees::{PathGen, Tree};
pub use witness::Witness;
pub use words::{Concat, Seq, Word};
