pub mod active;
pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod nn;
pub mod run;
pub mod service;
pub mod siamese;
pub mod text;
pub mod trees;

pub use error::{Error, Result};
