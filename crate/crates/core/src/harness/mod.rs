//! Batch experiments: configuration, runs under several encodings,
//! invariance verdicts, CSV/SVG output and the property-check suites.

pub mod check;
pub mod config;
pub mod experiment;
pub mod output;
pub mod random;
pub mod svg;
