//! Synthesis and simulation of the optimal two-player LQR controller when the
//! link between the controllers has a random, bounded delay.
//!
//! The crate is organised bottom-up:
//!
//! - [`plant`] builds the augmented state space with dummy delay atoms;
//! - [`delay`] models the delay process, the effective-delay chain and the
//!   per-node absorption probabilities;
//! - [`infograph`] holds the information graph, node sets, label bookkeeping
//!   and information sets;
//! - [`synthesis`] solves the Riccati recursions for every node;
//! - [`controller`] runs the piecewise-linear optimal controller;
//! - [`sim`] is a closed-loop Monte Carlo harness;
//! - [`config`] and [`verify`] back the command-line tool.

pub mod config;
pub mod controller;
pub mod delay;
pub mod error;
pub mod infograph;
pub mod linalg;
pub mod plant;
pub mod sim;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
