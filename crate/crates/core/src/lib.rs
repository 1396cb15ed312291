//! Goedel encodings of symbolic dynamics and the invariants that survive
//! a change of encoding.
//!
//! The crate is organised bottom-up:
//!
//! * [`symbols`]: alphabets, orderings, words, Goedel encoding, the
//!   ultrametric, cylinder sets and recodings.
//! * [`patterns`]: patterns of equality, recoding orbits and the invariant
//!   partitions of the interval and the unit square.
//! * [`shift`]: versatile shifts, the grammar-to-recognizer compiler and
//!   symbolic run traces.
//! * [`nda`]: the piecewise affine automaton on the unit square, in exact
//!   rational arithmetic.
//! * [`neural`]: the modular recurrent network realising an automaton.
//! * [`observables`]: macroscopic observables and the recoding symmetry.
//! * [`harness`]: experiment configuration, reports, CSV/SVG output and the
//!   property-check suites.

pub mod error;
pub mod harness;
pub mod nda;
pub mod neural;
pub mod observables;
pub mod patterns;
pub mod shift;
pub mod symbols;

pub use error::{Error, Result};
