// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fluid;
pub mod metrics;
pub mod packet;
pub mod port;
pub mod report;
pub mod sim;
pub mod time;
pub mod workload;

pub use error::{Error, Result};
pub use time::SimTime;
