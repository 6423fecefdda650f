pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod selection;
pub mod synth;
pub mod wfdb;

pub use error::{Error, Result};
