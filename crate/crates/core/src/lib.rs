//! Delay minimization for federated learning over an FDMA uplink, and a
//! simulator for the federated training loop it models.

// `!(x > 0.0)` is used on purpose throughout so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fixtures;
pub mod fl_sim;
pub mod model;
pub mod numerics;
pub mod optimizer;
pub mod sweep;
pub mod verify;
