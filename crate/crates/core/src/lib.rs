// `!(x > 0.0)` is used deliberately throughout so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bht;
pub mod catalog;
pub mod dual;
pub mod error;
pub mod fit;
pub mod harness;
pub mod lebesgue;
pub mod quadrature;

pub use error::{Error, Result};
