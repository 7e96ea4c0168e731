//! Renewal-theorem estimate of the Weyl limit `lim ρ(x) / x^{d_S/2}`.
//!
//! With `R(x) = ρ_D(x) - Σ_i ρ_D(γ_i² x)` and `U(t) = e^{-t d_S} R(e^{2t})`,
//! the limit equals `d_S (-Σ ν_i ln ν_i)⁻¹ ∫ U`. `R` is a step function, so
//! `U` is integrated exactly piece by piece between consecutive jumps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{counting_function, BoundaryCondition, SpectralData, SpectralExponent};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    /// Truncation point `x_cut`.
    pub cutoff: f64,
    /// Estimate with the integral truncated at `x_cut / 4`.
    pub truncated_estimate: f64,
    /// `|estimate - truncated_estimate|`.
    pub uncertainty: f64,
    pub integral: f64,
    pub entropy: f64,
}

/// Estimate truncated at the top of the middle decade of the spectrum,
/// `x_cut = √10 · √(λ₁ λ_max)`; see [`spectral_volume_estimate_at`].
pub fn spectral_volume_estimate(sd: &SpectralData, se: &SpectralExponent) -> Result<VolumeEstimate> {
    if sd.is_empty() {
        return Err(Error::InsufficientSpectrum { needed: 1, have: 0 });
    }
    let cut = (10.0 * sd.lambda_min_positive() * sd.lambda_max()).sqrt();
    spectral_volume_estimate_at(sd, se, cut)
}

/// Integrates `U` up to `t = ½ ln x_cut`, and again up to `½ ln(x_cut/4)`
/// for the uncertainty band.
///
/// Integrating the renewal identity gives `∫_{-∞}^T U = Σ_i ν_i ∫_{T+ln γ_i}^T f`
/// with `f(t) = e^{-t d_S} ρ(e^{2t})`, so the truncated estimate is a weighted
/// average of `ρ(x)/x^{d_S/2}` just below `x_cut`. `x_cut` must therefore sit
/// where the discrete counting function still follows the continuum one.
pub fn spectral_volume_estimate_at(
    sd: &SpectralData,
    se: &SpectralExponent,
    x_cut: f64,
) -> Result<VolumeEstimate> {
    if se.lattice {
        return Err(Error::LatticeCase(format!(
            "ln γ_i are commensurable for γ = {:?}; the counting function oscillates and has no limit",
            se.gamma
        )));
    }
    sd.require(BoundaryCondition::Dirichlet)?;
    if sd.is_empty() {
        return Err(Error::InsufficientSpectrum { needed: 1, have: 0 });
    }
    let d = se.d_s;
    let nu = se.kl_weights();
    let entropy: f64 = -nu.iter().map(|v| v * v.ln()).sum::<f64>();

    let r_of = |x: f64| -> f64 {
        counting_function(sd, x) as f64
            - se
                .gamma
                .iter()
                .map(|g| counting_function(sd, g * g * x) as f64)
                .sum::<f64>()
    };

    let mut jumps: Vec<f64> = Vec::with_capacity(sd.len() * (se.gamma.len() + 1));
    for &l in &sd.eigenvalues {
        jumps.push(0.5 * l.ln());
        for g in &se.gamma {
            jumps.push(0.5 * (l / (g * g)).ln());
        }
    }
    jumps.sort_by(f64::total_cmp);
    jumps.dedup();

    let integrate = |t_end: f64| -> f64 {
        let t0 = 0.5 * sd.eigenvalues[0].ln();
        let mut total = 0.0;
        let mut prev = t0;
        for &t in jumps.iter().filter(|&&t| t > t0) {
            let b = t.min(t_end);
            if b <= prev {
                break;
            }
            let mid = 0.5 * (prev + b);
            let r = r_of((2.0 * mid).exp());
            total += r * ((-d * prev).exp() - (-d * b).exp()) / d;
            prev = b;
            if t >= t_end {
                break;
            }
        }
        if prev < t_end {
            let r = r_of((2.0 * 0.5 * (prev + t_end)).exp());
            total += r * ((-d * prev).exp() - (-d * t_end).exp()) / d;
        }
        total
    };

    let t_max = 0.5 * x_cut.ln();
    let integral = integrate(t_max);
    let truncated = integrate(t_max - 0.5 * 4f64.ln());
    let estimate = d * integral / entropy;
    let truncated_estimate = d * truncated / entropy;
    Ok(VolumeEstimate {
        estimate,
        cutoff: x_cut,
        truncated_estimate,
        uncertainty: (estimate - truncated_estimate).abs(),
        integral,
        entropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::pipeline::Model;
    use crate::spectra::{weyl_fit, MeasureWeights};

    fn asymmetric_interval() -> Model {
        let (s, hs, _) = Preset::Interval.load();
        Model::new(s, hs, MeasureWeights::new(vec![0.25, 0.75]).unwrap()).unwrap()
    }

    #[test]
    fn lattice_case_refused() {
        let model = Model::preset(Preset::Interval);
        let lv = model.level(6).unwrap();
        let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet).unwrap();
        assert!(matches!(
            spectral_volume_estimate(&sd, &model.exponent),
            Err(Error::LatticeCase(_))
        ));
    }

    #[test]
    fn requires_dirichlet() {
        let model = asymmetric_interval();
        let lv = model.level(5).unwrap();
        let sd = model.spectrum(&lv, BoundaryCondition::Neumann).unwrap();
        assert!(spectral_volume_estimate(&sd, &model.exponent).is_err());
    }

    #[test]
    fn estimate_stable_and_inside_ratio_band() {
        let model = asymmetric_interval();
        assert!(!model.exponent.lattice);
        let mut prev: Option<VolumeEstimate> = None;
        for m in [7, 8] {
            let lv = model.level(m).unwrap();
            let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet).unwrap();
            let v = spectral_volume_estimate(&sd, &model.exponent).unwrap();
            assert!(v.estimate.is_finite() && v.estimate > 0.0);
            assert!(v.uncertainty < 0.1 * v.estimate, "{v:?}");
            let fit = weyl_fit(&sd, model.d_s(), 0.05).unwrap();
            assert!(
                fit.ratio_band[0] <= v.estimate && v.estimate <= fit.ratio_band[1],
                "{v:?} {:?}",
                fit.ratio_band
            );
            if let Some(p) = prev {
                assert!((p.estimate - v.estimate).abs() <= p.uncertainty.max(v.uncertainty));
            }
            prev = Some(v);
        }
    }
}
