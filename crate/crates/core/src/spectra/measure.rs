//! Self-similar measures and their lumped discretization.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{extension_matrices, HarmonicStructure};
use crate::structure::{LevelComplex, SelfSimilarStructure};

/// Weights `μ_i` of a self-similar probability measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureWeights {
    mu: Vec<f64>,
}

impl MeasureWeights {
    /// Accepts weights that are positive and sum to one within `1e-9`; the
    /// stored weights are renormalized to sum to one exactly (up to rounding).
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::InvalidMeasure(format!("need at least 2 weights, got {}", mu.len())));
        }
        if let Some((i, &w)) = mu.iter().enumerate().find(|(_, &w)| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidMeasure(format!("mu_{} = {w} is not positive", i + 1)));
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self {
            mu: mu.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            mu: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Checks `len == N` and `μ_i r_i < 1`.
    pub fn check_compatible(&self, hs: &HarmonicStructure) -> Result<()> {
        if self.mu.len() != hs.r().len() {
            return Err(Error::InvalidMeasure(format!(
                "{} weights for N = {} maps",
                self.mu.len(),
                hs.r().len()
            )));
        }
        for (i, (m, r)) in self.mu.iter().zip(hs.r()).enumerate() {
            if m * r >= 1.0 {
                return Err(Error::InvalidMeasure(format!(
                    "mu_{0} r_{0} = {1} >= 1",
                    i + 1,
                    m * r
                )));
            }
        }
        Ok(())
    }

    /// `μ_w` for every word of length `m`, lexicographic order.
    pub fn cell_masses(&self, m: usize) -> Vec<f64> {
        let mut masses = vec![1.0];
        for _ in 0..m {
            masses = masses
                .iter()
                .flat_map(|&s| self.mu.iter().map(move |&w| s * w))
                .collect();
        }
        masses
    }
}

/// Integrals `∫ h_p dμ` of the harmonic tents, from the fixed point
/// `I = (Σ_i μ_i A_iᵀ) I` normalized to `Σ_p I_p = 1`.
pub fn tent_integrals(
    s: &SelfSimilarStructure,
    hs: &HarmonicStructure,
    mw: &MeasureWeights,
) -> Result<Vec<f64>> {
    mw.check_compatible(hs)?;
    let a = extension_matrices(s, hs)?;
    let n0 = s.n_boundary();
    let mut b = DMatrix::<f64>::zeros(n0, n0);
    for (ai, &mi) in a.iter().zip(mw.weights()) {
        b += ai.transpose() * mi;
    }

    // (B - I) x = 0 with the last equation replaced by Σ x = 1
    let mut sys = &b - DMatrix::identity(n0, n0);
    for j in 0..n0 {
        sys[(n0 - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n0);
    rhs[n0 - 1] = 1.0;
    let lu = sys.lu();
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("tent-integral fixed point is not unique".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("tent-integral fixed point is not unique".into()));
    }
    let residual = (&b * &x - &x).amax();
    if residual > 1e-12 {
        return Err(Error::Singular(format!(
            "tent-integral fixed point residual {residual:e}"
        )));
    }
    if let Some((p, v)) = x.iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(Error::Singular(format!(
            "tent integral I_{} = {v} is not positive",
            p + 1
        )));
    }
    Ok(x.iter().copied().collect())
}

/// Lumped vertex masses `m_p = Σ_{(w,q) ↦ p} μ_w I_q`.
pub fn mass_vector(complex: &LevelComplex, mw: &MeasureWeights, tents: &[f64]) -> Vec<f64> {
    let masses = mw.cell_masses(complex.level());
    let mut out = vec![0.0; complex.n_vertices()];
    for (cell, &mu_w) in complex.cells().zip(&masses) {
        for (&v, &iq) in cell.iter().zip(tents) {
            out[v] += mu_w * iq;
        }
    }
    out
}
