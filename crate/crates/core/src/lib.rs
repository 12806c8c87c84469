//! Cheater detection for long-running grid computations.
//!
//! A supervisor hands out tasks in rounds and can only compare two answers to
//! the same task. This crate builds everything needed to turn that single
//! primitive into worst-case detection of colluding cheaters:
//!
//! * [`digraph`]: unions of random Hamiltonian cycles and exhaustive
//!   `(alpha, beta)`-resilience checks.
//! * [`grid_model`] and [`adversary`]: tasks, participants, responses and
//!   pluggable coalition strategies.
//! * [`diagnosis`]: the 3-round and 5-round protocols that flag every forged
//!   response when at most 5% (resp. 10%) of participants cheat.
//! * [`economics`]: deterrence thresholds and the supervisor's balance
//!   equation.
//! * [`replication_sim`]: round-pipelined duplication experiments.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod adversary;
pub mod diagnosis;
pub mod digraph;
pub mod economics;
pub mod fraction;
pub mod grid_model;
pub mod replication_sim;
pub mod rng;

pub use fraction::Fraction;
