//! Retrieval of forum threads by fusing per-message relevance scores.
//!
//! A forum thread is a sequence of messages, and the unit a searcher wants
//! back is the thread, not the message. This crate ranks threads two ways:
//!
//! * **Virtual documents**: concatenate each thread's messages into one
//!   document and rank those directly with a query-likelihood model.
//! * **Voting fusion**: rank individual messages with the same model, treat
//!   each retrieved message as a vote for its parent thread, and combine the
//!   votes with one of thirteen fusion techniques ([`fusion::FusionMethod`]).
//!
//! The pipeline is: [`corpus`] ingestion → [`text`] analysis → [`index`]
//! construction → [`score`] message/thread ranking → [`fusion`] thread
//! scoring → [`eval`] metrics, significance tests, and parameter sweeps.
//!
//! Everything here is deterministic: ordered maps throughout, explicit
//! tie-breaks on ids, and a seeded [`rng`] for the few randomized procedures
//! (fold assignment, Monte Carlo significance sampling). Running the same
//! inputs twice produces byte-identical output.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable the default
//! `std` feature and enable `libm` to supply float math.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("threadrank-core requires either the `std` feature or the `libm` feature");

extern crate alloc;

pub mod corpus;
pub mod eval;
pub mod fusion;
pub mod index;
pub mod math;
pub mod rng;
pub mod score;
pub mod text;
