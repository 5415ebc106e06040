//! Bars over fans and spreads: uniform bounds, embeddings of fans into the
//! binary fan, and moduli of uniform continuity for functions on fans and on
//! compact metric spaces presented by trees.

pub mod bars;
pub mod continuity;
pub mod error;
pub mod fan_embed;
pub mod instances;
pub mod metric;
pub mod rational;
pub mod seqcode;
pub mod trees;

pub use error::{Error, Result};
pub use seqcode::FinSeq;
