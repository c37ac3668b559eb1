//! Certified covering lemmas on squares: the `M`-adic admissible-square
//! construction with exact area accounting, its dyadic density variant, and
//! generators of hypothesis-satisfying instances.

mod cellset;
mod constants;
mod lemma1;
mod lemma2;
mod region;
mod square;
mod synth;

pub use cellset::{CellSetE, ExclusionCell, HypothesisReport, CELL_UNITS};
pub use constants::{lemma1_constants, ChainCheck, LemmaConstants};
pub use lemma1::{
    certify_lemma1, classify_admissible, generation_statistics, select_f_square, FChoice, GenerationData,
    GenerationDecomposition, Lemma1Report, PropertyVerdict,
};
pub use lemma2::{certify_lemma2, synth_lemma2, DensityCellSet, Lemma2Report};
pub use region::{Region, TwoCopies};
pub use square::{LatticeBox, MadicSquare};
pub use synth::{single_cell_instance, synth_exclusion_set, SynthOptions};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("square does not meet E")]
    DisjointSquare,
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{cells} cells need squares deeper than resolution {depth} at generation {n}")]
    ResolutionExceeded { n: usize, depth: usize, cells: usize },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

/// Exact rationals in reports, written as `"p/q"` strings.
pub(crate) mod rational_str {
    use crate::scalar::Rational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_str(&q.to_string()),
                None => s.serialize_none(),
            }
        }
    }
}
