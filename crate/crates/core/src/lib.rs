//! Analysis of probability-reversal paradoxes and quantum-style belief models.
//!
//! - [`contingency`]: exact rates over stratified two-arm tables, Simpson
//!   reversal detection, Pearson and Fisher tests, back-door adjustment.
//! - [`quantum_belief`]: joint outcome tables from two-stage experiments,
//!   square-root amplitude belief states, staged trees and order effects.
//! - [`prospect`]: two-dimensional prospect state for the disjunction effect,
//!   with a calibrated 2×2 acceptance effect.
//! - [`stpetersburg`]: truncated, bankroll-capped and log-utility valuations of
//!   the St. Petersburg gamble.

pub mod contingency;
pub mod prospect;
pub mod quantum_belief;
pub mod rational;
pub mod stpetersburg;

pub use rational::Rational;
