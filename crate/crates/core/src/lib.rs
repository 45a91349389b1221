#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod approx;
pub mod error;
pub mod experiment;
pub mod io;
pub mod maxconv;
pub mod provable;
pub mod tropical;
pub mod vector;

pub use error::{Error, Result};
pub use vector::{summarize, RealVector, VectorSummary};
