//! Core library for observability synthesis on Markov decision processes.
//!
//! Everything in this crate is pure computation over owned data: explicit
//! MDP/POMDP models with exact rational transition probabilities, numeric
//! solvers for minimal expected total reward, typed parametric Markov chains
//! and their constraint-script encodings, and the partition-enumeration
//! heuristics that drive observation-function synthesis. File formats, the
//! external SMT solver process and the command-line front end live in the
//! companion `optobs-cli` crate.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature is
//! enabled by default.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod chain;
pub mod decomp;
pub mod groups;
pub mod mdp;
pub mod obs;
pub mod oracle;
pub mod partitions;
pub mod rational;
pub mod script;
pub mod solve;
pub mod strategy;
pub mod tpmc;
pub mod value;
pub mod worlds;

pub use chain::MarkovChain;
pub use mdp::Mdp;
pub use obs::{ObsLabel, ObservationFunction};
pub use rational::Rat;
pub use strategy::{PositionalStrategy, StrategyMode};
pub use value::{Value, ValueVector};

mod fmath {
    pub fn abs(x: f64) -> f64 {
        if x < 0.0 {
            -x
        } else {
            x
        }
    }

    pub fn max(a: f64, b: f64) -> f64 {
        if a > b {
            a
        } else {
            b
        }
    }
}
