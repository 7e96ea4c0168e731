//! Singular values of `[F, M_a]` and the Hilbert–Schmidt bound through the
//! Green function.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredholm::{energy_measure, EdgeModule};
use crate::spectra::{green_diagonal, BoundaryCondition, SpectralData};

/// Singular values below `ZERO_THRESHOLD · max(μ₁, ‖a‖∞)` count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Relative tolerance of `‖[F,a]‖²_HS = 8 ‖P⊥ M_a P‖²_HS`.
pub const HS_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HsIdentity {
    /// `Σ_k μ_k²` from the singular values.
    pub lhs: f64,
    /// `8 ‖P⊥ M_a P‖²_HS` from the Frobenius norm of the block.
    pub rhs: f64,
    pub relative_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorSpectrum {
    /// Descending, one entry per edge.
    pub svals: Vec<f64>,
    pub level: usize,
    pub function_id: String,
    pub d_s: f64,
    pub zero_count: usize,
    /// `E^(m)[a] = ‖∂a‖²`.
    pub energy: f64,
    pub hs_identity: HsIdentity,
}

impl CommutatorSpectrum {
    pub fn hs_norm_sq(&self) -> f64 {
        self.hs_identity.lhs
    }
}

/// Singular values of `[F, M_a]`.
///
/// `[F, M_a] = 2(P M_a P⊥ - P⊥ M_a P)` and the two terms have orthogonal
/// ranges and domains, so the spectrum is `2σ(P⊥ M_a P)` with every value
/// doubled, padded with zeros to the module dimension.
pub fn commutator(em: &EdgeModule, a: &[f64], function_id: &str, d_s: f64) -> Result<CommutatorSpectrum> {
    let block = em.off_diagonal_block(a)?;
    let sigma = block.singular_values();
    let mut svals: Vec<f64> = sigma
        .iter()
        .flat_map(|s| [2.0 * s, 2.0 * s])
        .collect();
    svals.resize(em.dim().max(svals.len()), 0.0);
    svals.truncate(em.dim());
    svals.sort_by(|x, y| y.total_cmp(x));

    let top = svals.first().copied().unwrap_or(0.0);
    let size = a.iter().fold(top, |acc, v| acc.max(v.abs()));
    let zero_count = svals.iter().filter(|&&s| s <= ZERO_THRESHOLD * size).count();

    let lhs: f64 = svals.iter().map(|s| s * s).sum();
    let rhs = 8.0 * block.norm_squared();
    // deviations below ε·‖M_a‖²_HS are round-off
    let spread = a.iter().fold(0.0f64, |acc, v| acc.max((v - a[0]).abs()));
    let floor = em.dim() as f64 * spread * spread * f64::EPSILON;
    let scale = lhs.abs().max(rhs.abs()).max(floor);
    let relative_deviation = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
    let energy = em.derive(a)?.norm_squared();
    Ok(CommutatorSpectrum {
        svals,
        level: em.level(),
        function_id: function_id.to_string(),
        d_s,
        zero_count,
        energy,
        hs_identity: HsIdentity {
            lhs,
            rhs,
            relative_deviation,
            pass: relative_deviation <= HS_IDENTITY_TOL,
        },
    })
}

/// Slack allowed in the per-vector inequality, relative to its terms.
pub const PER_VECTOR_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HsGreenBound {
    pub level: usize,
    /// `max_k (‖P⊥ M_a P ∂a_k‖ - ‖(∂a)·ā_k‖) / scale_k`.
    pub per_vector_worst: f64,
    pub per_vector_pass: bool,
    /// `Σ_k λ_k⁻¹ ‖P⊥ M_a P ∂a_k‖²`.
    pub partial_sum: f64,
    /// `∫ g dΓ(a)`.
    pub green_integral: f64,
    pub partial_pass: bool,
    /// `‖[F, a]‖²_HS`.
    pub hs_norm_sq: f64,
    pub sup_g: f64,
    pub energy: f64,
    /// `‖[F, a]‖²_HS / (8 sup g · E[a])`.
    pub full_ratio: f64,
    /// Set when the full ratio exceeds 1. The eigenfunction gradients span
    /// only a codimension `n0 - 1` subspace of `Im ∂` at finite level.
    pub boundary_defect: bool,
}

/// Three steps of the Hilbert–Schmidt bound for `a`, evaluated on the
/// Dirichlet eigenfunctions `a_k`.
pub fn hs_green_bound(em: &EdgeModule, sd: &SpectralData, a: &[f64]) -> Result<HsGreenBound> {
    sd.require(BoundaryCondition::Dirichlet)?;
    if sd.level != em.level() {
        return Err(Error::LevelMismatch(em.level(), sd.level));
    }
    if sd.eigenvectors.nrows() != em.n_vertices() {
        return Err(Error::InvalidFunction(format!(
            "eigenvectors have {} rows, module has {} vertices",
            sd.eigenvectors.nrows(),
            em.n_vertices()
        )));
    }
    let da = em.derive(a)?;
    let shifted: Vec<f64> = a.iter().map(|v| v - a[0]).collect();
    let abar = em.midpoint(&shifted)?;

    let mut worst = f64::NEG_INFINITY;
    let mut partial_sum = 0.0;
    for (k, &lambda) in sd.eigenvalues.iter().enumerate() {
        let b: Vec<f64> = sd.eigenvectors.column(k).iter().copied().collect();
        let db = em.derive(&b)?;
        let moved: DVector<f64> = abar.component_mul(&em.project(&db));
        let lhs_vec = em.project_perp(&moved);
        let lhs = lhs_vec.norm();
        let rhs = em.midpoint(&b)?.component_mul(&da).norm();
        let scale = rhs.max(moved.norm()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs) / scale);
        partial_sum += lhs * lhs / lambda;
    }

    let g = green_diagonal(sd)?;
    let green_integral = energy_measure(em, a, &g.values)?;
    let block = em.off_diagonal_block(a)?;
    let hs_norm_sq = 8.0 * block.norm_squared();
    let energy = da.norm_squared();
    let full_ratio = if energy > 0.0 {
        hs_norm_sq / (8.0 * g.sup * energy)
    } else {
        0.0
    };
    let spread = shifted.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let floor = em.dim() as f64 * spread * spread * f64::EPSILON * g.sup;
    let slack = (1e-10 * green_integral.abs()).max(floor).max(f64::MIN_POSITIVE);
    Ok(HsGreenBound {
        level: em.level(),
        per_vector_worst: worst,
        per_vector_pass: worst <= PER_VECTOR_SLACK,
        partial_sum,
        green_integral,
        partial_pass: partial_sum <= green_integral + slack,
        hs_norm_sq,
        sup_g: g.sup,
        energy,
        full_ratio,
        boundary_defect: full_ratio > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::fredholm::build_module;
    use crate::functions::FunctionSpec;
    use crate::pipeline::Model;

    #[test]
    fn constant_function_has_zero_spectrum() {
        let model = Model::preset(Preset::Gasket);
        let lv = model.level(2).unwrap();
        let em = build_module(&lv.form).unwrap();
        let cs = commutator(&em, &vec![1.0; em.n_vertices()], "const", model.d_s()).unwrap();
        assert!(cs.svals.iter().all(|&s| s == 0.0));
        assert_eq!(cs.svals.len(), em.dim());
        assert!(cs.hs_identity.pass);
    }

    fn dense_oracle(preset: Preset, m: usize, boundary_values: Vec<f64>) {
        let model = Model::preset(preset);
        let lv = model.level(m).unwrap();
        let em = build_module(&lv.form).unwrap();
        let a = FunctionSpec::Harmonic { level: 0, boundary_values }
            .evaluate(&model, m)
            .unwrap();
        let cs = commutator(&em, &a, "x", model.d_s()).unwrap();
        let mut dense: Vec<f64> = em.commutator_matrix(&a).unwrap().singular_values().iter().copied().collect();
        dense.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in cs.svals.iter().zip(&dense) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        assert!(cs.hs_identity.pass, "{:?}", cs.hs_identity);
    }

    #[test]
    fn interval_phase_is_identity() {
        // a path graph has Im ∂ = ℓ²(edges), so every commutator vanishes
        dense_oracle(Preset::Interval, 4, vec![0.0, 1.0]);
    }

    #[test]
    fn gasket_matches_dense_commutator() {
        dense_oracle(Preset::Gasket, 2, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn green_bound_steps_hold() {
        let model = Model::preset(Preset::Gasket);
        let lv = model.level(3).unwrap();
        let em = build_module(&lv.form).unwrap();
        let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet).unwrap();
        let a = FunctionSpec::RandomHarmonic { level: 1, seed: 5 }.evaluate(&model, 3).unwrap();
        let r = hs_green_bound(&em, &sd, &a).unwrap();
        assert!(r.per_vector_pass, "{r:?}");
        assert!(r.partial_pass, "{r:?}");
        assert!(r.partial_sum <= r.hs_norm_sq / 8.0 * (1.0 + 1e-10));
    }

    #[test]
    fn green_bound_needs_matching_level() {
        let model = Model::preset(Preset::Gasket);
        let lv = model.level(2).unwrap();
        let em = build_module(&lv.form).unwrap();
        let other = model.level(3).unwrap();
        let sd = model.spectrum(&other, BoundaryCondition::Dirichlet).unwrap();
        let a = vec![0.0; em.n_vertices()];
        assert!(matches!(hs_green_bound(&em, &sd, &a), Err(Error::LevelMismatch(2, 3))));
    }
}
