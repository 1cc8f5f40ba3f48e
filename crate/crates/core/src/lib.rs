// `!(x > 0.0)` is used on purpose so NaN takes the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod currents;
pub mod model;
pub mod oracle;
mod quad;
pub mod quantize;
pub mod specfun;
