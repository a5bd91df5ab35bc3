//! Exact and numeric tools for spectral measures built from sequences of
//! Hadamard triples: tower spectra, Parseval checks, equi-positivity bounds,
//! Moran-set dimensions and the explicit constructions.

pub mod constructions;
pub mod digits;
pub mod equipositivity;
pub mod error;
pub mod exact_linalg;
pub mod fractal_dim;
pub mod hadamard;
pub mod measure_lab;
pub mod sequence;
pub mod specfile;
pub mod spectrum_verify;

pub use error::{Error, Result};

/// Default enumeration cap; the CLI overrides it with `SPECLAB_CAP`.
pub const DEFAULT_CAP: u128 = 1_000_000;
