//! Random enriched trees: exact samplers, bijective decoders and
//! limit-law experiments.

pub mod analysis;
pub mod decode;
pub mod enrich;
pub mod error;
pub mod numeric;
pub mod parallel;
pub mod series;
pub mod species;
pub mod treegen;

pub use error::{Error, Result};
