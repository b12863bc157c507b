//! Statistics of measured volatility and the capital rules built on it.
//!
//! The crate covers four areas:
//!
//! * [`statfn`]: exact small-sample law of the sample standard deviation of
//!   normal returns, its conditional tail expectations and the special
//!   functions behind them.
//! * [`montecarlo`]: seeded simulation of normal and jump-replaced fat-tailed
//!   returns, plus Basel I / Basel II style risk measurements over them.
//! * [`panel`]: a dated returns panel pipeline that buckets securities by past
//!   volatility and tracks how their future volatility compares.
//! * [`response`]: an exposure-maximizing bank model that picks whatever the
//!   capital rule makes cheapest, and the resulting excess risk and overlap.
//!
//! Every stochastic routine takes an explicit seed and derives one
//! independent random substream per security (see [`rng`]), so results do
//! not depend on thread count or evaluation order.

// `!(a < b)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod montecarlo;
pub mod panel;
pub mod response;
pub mod rng;
pub mod statfn;

pub use error::{Error, Result};
