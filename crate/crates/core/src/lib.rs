//! Mixing profiles and limit-profile continuity conditions for finite
//! reversible Markov chains.
//!
//! The pipeline is: build or load a [`chain::ReversibleChain`], take its
//! spectrum ([`spectral`]), evaluate distances to stationarity along a
//! cutoff schedule ([`distance`], [`family`]) and compare them with the
//! spectral continuity conditions ([`conditions`]) and the known limit
//! profiles ([`profiles`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod conditions;
pub mod distance;
pub mod error;
pub mod export;
pub mod family;
pub mod profiles;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
