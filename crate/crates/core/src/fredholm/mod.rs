//! Finite-level Fredholm module: derivation into edge space, midpoint action,
//! phase `F = 2P - I`, and the spectral analysis of commutators `[F, a]`.

mod commutator;
mod invariance;
mod module;
mod summability;

pub use commutator::{
    commutator, hs_green_bound, CommutatorSpectrum, HsGreenBound, HsIdentity, HS_IDENTITY_TOL,
    PER_VECTOR_SLACK, ZERO_THRESHOLD,
};
pub use invariance::{invariance_check, FredholmLevel, HolderChain, InvarianceReport};
pub use module::{build_module, build_module_from_edges, energy_measure, EdgeModule};
pub use summability::{
    dixmier_constant, energy_functional, energy_functional_constant, log_averaged_sums, phi_hat,
    schatten_constant, schatten_report, Constants, EnergyFunctional, LogAveragedSums, SchattenReport,
};
