//! Spectral exponent `d_S`: the root of `Σ γ_i^d = 1` with `γ_i = √(r_i μ_i)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::HarmonicStructure;
use crate::spectra::MeasureWeights;

/// Largest denominator tried by the commensurability test.
pub const LATTICE_MAX_DENOMINATOR: u32 = 64;
/// Absolute tolerance of the commensurability test.
pub const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralExponent {
    pub d_s: f64,
    pub gamma: Vec<f64>,
    /// Whether all `ln γ_i / ln γ_1` are rationals with small denominators.
    pub lattice: bool,
    /// `Σ γ_i^{d_S} - 1`.
    pub residual: f64,
}

impl SpectralExponent {
    /// Self-similar weights `ν_i = γ_i^{d_S}`.
    pub fn kl_weights(&self) -> Vec<f64> {
        kl_weights(self)
    }
}

fn moment(gamma: &[f64], d: f64) -> f64 {
    gamma.iter().map(|g| g.powf(d)).sum::<f64>() - 1.0
}

/// Unique root of the decreasing map `d ↦ Σ γ_i^d - 1` in `(0, ∞)`.
pub fn solve_for_exponent(gamma: &[f64]) -> Result<f64> {
    if gamma.len() < 2 {
        return Err(Error::InvalidMeasure("need at least two ratios".into()));
    }
    if let Some(g) = gamma.iter().find(|&&g| !(g > 0.0 && g < 1.0)) {
        return Err(Error::InvalidMeasure(format!("ratio {g} outside (0, 1)")));
    }
    let mut lo = 1e-12;
    let mut hi = 2.0;
    while moment(gamma, hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidMeasure("no root below 1e6".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if moment(gamma, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    // Newton polish; the bracket keeps it safe
    let mut d = 0.5 * (lo + hi);
    for _ in 0..50 {
        let f = moment(gamma, d);
        let df: f64 = gamma.iter().map(|g| g.powf(d) * g.ln()).sum();
        if df == 0.0 {
            break;
        }
        let next = d - f / df;
        if !(next > lo && next < hi) || (next - d).abs() <= 1e-16 * d {
            d = if next > lo && next < hi { next } else { d };
            break;
        }
        d = next;
    }
    Ok(d)
}

pub fn solve_spectral_exponent(hs: &HarmonicStructure, mw: &MeasureWeights) -> Result<SpectralExponent> {
    mw.check_compatible(hs)?;
    let gamma: Vec<f64> = hs
        .r()
        .iter()
        .zip(mw.weights())
        .map(|(r, m)| (r * m).sqrt())
        .collect();
    let d_s = solve_for_exponent(&gamma)?;
    Ok(SpectralExponent {
        d_s,
        lattice: is_lattice(&gamma),
        residual: moment(&gamma, d_s),
        gamma,
    })
}

pub fn kl_weights(se: &SpectralExponent) -> Vec<f64> {
    se.gamma.iter().map(|g| g.powf(se.d_s)).collect()
}

/// True when every `ln γ_i / ln γ_1` is within [`LATTICE_TOL`] of a rational
/// with denominator at most [`LATTICE_MAX_DENOMINATOR`].
pub fn is_lattice(gamma: &[f64]) -> bool {
    let base = gamma[0].ln();
    gamma.iter().skip(1).all(|g| {
        let x = g.ln() / base;
        (1..=LATTICE_MAX_DENOMINATOR).any(|q| {
            let q = q as f64;
            (x - (x * q).round() / q).abs() <= LATTICE_TOL
        })
    })
}

/// Exponent `d_H` solving `Σ r_i^{d_H} = 1`.
pub fn resistance_exponent(hs: &HarmonicStructure) -> Result<f64> {
    solve_for_exponent(hs.r())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;

    #[test]
    fn interval_exponent() {
        let (_, hs, mw) = Preset::Interval.load();
        let se = solve_spectral_exponent(&hs, &mw).unwrap();
        assert!((se.d_s - 1.0).abs() < 1e-12);
        assert!(se.lattice);
        assert!(se.residual.abs() <= 1e-12);
    }

    #[test]
    fn gasket_exponent() {
        let (_, hs, mw) = Preset::Gasket.load();
        let se = solve_spectral_exponent(&hs, &mw).unwrap();
        let exact = 2.0 * 3f64.ln() / 5f64.ln();
        assert!((se.d_s - exact).abs() < 1e-12, "{} vs {exact}", se.d_s);
        assert!(se.lattice);
        for nu in se.kl_weights() {
            assert!((nu - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_ratios_closed_form() {
        for (n, g) in [(2usize, 0.3), (4, 0.45), (7, 0.2)] {
            let d = solve_for_exponent(&vec![g; n]).unwrap();
            assert!((d - (n as f64).ln() / (1.0 / g).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_interval_is_non_lattice() {
        let gamma = [(0.5f64 * 0.25).sqrt(), (0.5f64 * 0.75).sqrt()];
        assert!(!is_lattice(&gamma));
        let d = solve_for_exponent(&gamma).unwrap();
        assert!(moment(&gamma, d).abs() < 1e-14);
    }

    #[test]
    fn rejects_ratio_at_one() {
        assert!(solve_for_exponent(&[1.0, 0.5]).is_err());
    }
}
