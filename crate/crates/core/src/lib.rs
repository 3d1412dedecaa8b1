//! Prior-free auction laboratory: benchmarks, truthful mechanisms, exact
//! competitive-ratio formulas, and the Monte Carlo harness that checks
//! them against independent oracles.
//!
//! The library is organized in layers:
//!
//! * [`core`] holds the shared vocabulary: bid profiles, environments,
//!   outcomes with feasibility post-checks, deterministic randomness.
//! * [`benchmarks`] computes the revenue benchmarks a mechanism is
//!   measured against, from the fixed-price family to its concave
//!   envelope and the online variant.
//! * [`auctions`] implements the truthful mechanisms: Vickrey, fixed
//!   price sales, profile-extraction compositions, sampling auctions,
//!   and the mixtures that trade between them.
//! * [`online`] runs sequential-arrival sales with bid-independent
//!   pricing and checks the order/subset revenue decomposition.
//! * [`analytics`] evaluates the closed forms: ratio sequences, their
//!   limits, survival functions, and the sampling-rate optimization.
//! * [`harness`] is the verification layer: a reproducible Monte Carlo
//!   engine, truthfulness audits, brute-force oracles, and the property
//!   suites behind the `verify` command.
//!
//! Every randomized path takes a [`RandomSource`], a master seed plus a
//! stream index, so each reported number is replayable bit for bit.

#![forbid(unsafe_code)]

pub mod analytics;
pub mod auctions;
pub mod benchmarks;
pub mod core;
pub mod harness;
pub mod online;

pub use crate::analytics::RatioReport;
pub use crate::core::{
    AuctionLabError, AuctionOutcome, BidProfile, EnvironmentSpec, RandomSource,
};
pub use crate::harness::EstimateWithCI;
