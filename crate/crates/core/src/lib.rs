//! Simulation and exact-verification toolkit for the two-dimensional Ising
//! interface under Dobrushin boundary conditions in a weak external field
//! `λ = c_λ / N`.
//!
//! * [`lattice`]: boxes, dual lattice, boundary conditions, enlargements.
//! * [`gibbs`]: weights, heat-bath dynamics, monotone coupling, exact enumeration.
//! * [`contour`]: separating edges, contour decomposition, the interface.
//! * [`randomline`]: random-line weights and duality identities on small patches.
//! * [`observables`]: heights, areas, crossings and the events built from them.
//! * [`analysis`]: tail and scaling fits, bootstrap intervals.
//! * [`harness`]: experiment configuration, run records, the verification suite.

pub mod analysis;
pub mod contour;
pub mod error;
pub mod gibbs;
pub mod harness;
pub mod lattice;
pub mod observables;
pub mod randomline;

pub use error::{Error, Result};
