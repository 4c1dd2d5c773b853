//! Clustering of units by their counterfactual mean outcome vectors.

pub mod assignment;
pub mod cli;
pub mod density;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linkage;
pub mod metrics;
pub mod model;
pub mod regression;
pub mod robust;
pub mod simulation;
pub mod union_find;

pub use error::{Error, Result};
