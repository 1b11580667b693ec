#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod pencil;
pub mod poly;
pub mod range;
pub mod scale;
pub mod structure;

pub use error::{Error, Result};
