//! Core algorithms for learning on gradually drifting data streams.
//!
//! The central object is a time-indexed importance weight
//! `omega(x, T, t) = exp(g(x, T) - g(x, t))`, estimated by a small neural
//! network `g` trained with a pairwise logistic loss on (sample, time)
//! contrasts. The weight rescales a sample drawn at step `t` so that it
//! behaves like a sample from the distribution at step `T`, which lets a
//! model train on an entire stream while matching the current step.
//!
//! The crate is `no_std` + `alloc` so the numeric kernels can be reused in
//! embedded or wasm harnesses; everything that touches files, clocks, or
//! threads lives in the companion `driftweight` crate.
//!
//! Modules:
//! - [`nn`]: dense networks, Adam, snapshot text format
//! - [`drift`]: synthetic drifting-stream generators
//! - [`omega`]: the weight estimator and the standard propensity baseline
//! - [`trainers`]: per-step training protocols and next-step evaluation
//! - [`rl`]: drifting-goal gridworld and weighted temporal-difference control
//! - [`validate`]: kernel two-sample diagnostics for weight quality

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod drift;
pub mod error;
pub mod fmath;
pub mod matrix;
pub mod nn;
pub mod omega;
pub mod rl;
pub mod seeding;
pub mod trainers;
pub mod validate;

pub use error::{CoreError, Result};
