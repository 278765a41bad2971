//! Finite-blocklength analysis of two-hop decode-and-forward relaying over
//! quasi-static Rayleigh fading with rate selection from average CSI.
//!
//! The crate evaluates the normal approximation of the coding rate and block
//! error, averages it over fading by quadrature, composes the relay error,
//! and derives the blocklength-limited throughput and the maximum sustainable
//! data rate under a delay requirement. A seeded Monte Carlo engine provides
//! an independent estimate of every averaged quantity.

// Negated comparisons are the NaN-rejecting form of range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod evaluate;
pub mod fading;
pub mod fbl;
pub mod link_layer;
pub mod montecarlo;
pub mod optimize;
pub mod params;
pub mod quad;
pub mod relay;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};
pub use params::{LinkGains, SystemParams};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/finite-blocklength.md")]
    mod finite_blocklength {}
    #[doc = include_str!("../../../book/src/relaying.md")]
    mod relaying {}
    #[doc = include_str!("../../../book/src/fading-averages.md")]
    mod fading_averages {}
    #[doc = include_str!("../../../book/src/link-layer.md")]
    mod link_layer {}
    #[doc = include_str!("../../../book/src/weight-factor.md")]
    mod weight_factor {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproduction.md")]
    mod reproduction {}
}
