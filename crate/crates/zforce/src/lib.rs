//! Bounds on the zero forcing number of random d-regular graphs.
//!
//! A zero forcing set of a graph is a set of initially black vertices whose
//! colour spreads to the whole graph under the rule "a black vertex with
//! exactly one white neighbour forces that neighbour black". The zero forcing
//! number `Z(G)` is the minimum size of such a set.
//!
//! This crate bounds `Z(G)/n` for random d-regular graphs three ways:
//!
//! * [`greedy`] runs degree-greedy forcing-set constructions on sampled
//!   graphs ([`graph`] provides the pairing-model sampler) and records the
//!   certificates ([`forcing`] replays and validates them; [`exact`] holds
//!   small-graph oracles).
//! * [`ode`] integrates the fluid-limit phase systems of those greedy
//!   algorithms, yielding the asymptotic upper bound for each degree.
//! * [`hole`] (first-moment lower bound) and [`spectral`] (expander upper
//!   bound) evaluate closed-form bounds.
//!
//! [`mc`] orchestrates deterministic Monte Carlo experiments comparing the
//! empirical runs against the ODE predictions.

pub mod error;
pub mod exact;
pub mod forcing;
pub mod graph;
pub mod greedy;
mod indexed;
pub mod hole;
pub mod mc;
pub mod ode;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
