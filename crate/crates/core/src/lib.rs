#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod epiplexity;
pub mod error;
pub mod mdlproxy;
pub mod probcore;
pub mod report;
pub mod rng;
pub mod thermo;
pub mod thermosim;

pub use error::{Error, Result};
