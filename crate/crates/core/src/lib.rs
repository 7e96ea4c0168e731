//! Spectral and Fredholm-module invariants of p.c.f. self-similar fractals.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`structure`]: gluing data → level complexes `V_m` with cell tuples.
//! 2. [`harmonic`]: `(D, r)` → energy forms `E^(m)`, Schur-complement
//!    verification, harmonic extension.
//! 3. [`spectra`]: self-similar measures, lumped masses, generalized
//!    eigenproblems, Weyl counting, Green/heat/potential kernels.
//! 4. [`fredholm`]: the edge-space derivation `∂`, the phase `F = 2P - I`,
//!    commutator singular values and the summability functionals built from
//!    them.

pub mod definition;
pub mod error;
pub mod fredholm;
pub mod functions;
pub mod harmonic;
pub mod pipeline;
pub mod spectra;
pub mod structure;

pub use error::{Error, Result};
