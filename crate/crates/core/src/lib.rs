//! Rate control and power allocation for downlink NOMA in Poisson cellular
//! networks.
//!
//! The base station knows only average received powers (serving and
//! interfering) and each user's target error probability. From these it picks
//! an SIR threshold per user that meets the reliability target exactly under
//! Rayleigh fading, splits power between two superposed users, and fixes the
//! SIC decoding order. The crate also provides:
//!
//! * Poisson deployments with nearest-BS association ([`geometry`]),
//! * fading, interference and post-SIC SIR ([`channel`]),
//! * the single-user threshold and its closed-form approximation ([`rate_control`]),
//! * every 2-user decision: order, equal-rate and max-sum-rate splits, NOMA vs
//!   OMA gates, fairness ([`pair`]),
//! * the distribution of the allocated threshold over network realizations via
//!   numerical Laplace inversion ([`threshold`]),
//! * a seeded, parallel Monte-Carlo engine with figure tables ([`experiments`]).

pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod pair;
pub mod rate_control;
pub mod rng;
pub mod table;
pub mod threshold;

pub use error::{Error, Result};
