//! Profit-driven elastic container layouts for tree-shaped query plans.
//!
//! [`forecast`] predicts query times and profit for candidate layouts and
//! picks the next one, [`placement`] keeps partitioned data on a
//! consistent-hash ring that moves little on resize, [`scheduler`] maps
//! plan operators onto containers and [`sim`] runs the whole loop as a
//! deterministic discrete-event simulation.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forecast;
pub mod model;
pub mod optim;
pub mod placement;
pub mod presets;
pub mod scheduler;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/forecast.md")]
    mod forecast {}
    #[doc = include_str!("../../../book/src/placement.md")]
    mod placement {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/seeds.md")]
    mod seeds {}
}
