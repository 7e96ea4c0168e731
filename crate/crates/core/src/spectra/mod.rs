//! Measures, eigenproblems, counting functions and spectral kernels.

mod eigen;
mod exponent;
mod kernels;
mod measure;
mod volume;
mod weyl;

pub use eigen::{counting_function, eigensolve, MAX_DENSE_DIM, BoundaryCondition, SpectralData};
pub use exponent::{
    is_lattice, kl_weights, resistance_exponent, solve_for_exponent, solve_spectral_exponent,
    SpectralExponent, LATTICE_MAX_DENOMINATOR, LATTICE_TOL,
};
pub use kernels::{
    c1_estimate, green_diagonal, heat_bound_check, heat_diagonal, heat_kernel, heat_matrix,
    potential_kernel, GreenDiagonal, HeatBoundCheck, HeatConstant, PotentialReport,
};
pub use measure::{mass_vector, tent_integrals, MeasureWeights};
pub use volume::{spectral_volume_estimate, spectral_volume_estimate_at, VolumeEstimate};
pub use weyl::{ratio_band, weyl_fit, WeylFit, WEYL_DEFAULT_TOL, WEYL_MIN_EIGENVALUES};
