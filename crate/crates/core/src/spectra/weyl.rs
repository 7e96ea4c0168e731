//! Log–log fit of the eigenvalue counting function.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{counting_function, SpectralData};

pub const WEYL_MIN_EIGENVALUES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylFit {
    pub slope: f64,
    pub intercept: f64,
    /// `[min, max]` of `ρ(x) / x^{d_S/2}` over the window.
    pub ratio_band: [f64; 2],
    /// `[x_lo, x_hi]`.
    pub window: [f64; 2],
    pub points: usize,
    pub expected_slope: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Default slope tolerance.
pub const WEYL_DEFAULT_TOL: f64 = 0.05;

/// Least-squares fit of `ln k` against `ln λ_k` (eigenvalues counted with
/// multiplicity, so `k = ρ(λ_k)` walks up each jump of the counting function)
/// over the middle decade `[c/√10, c·√10]`, `c = √(λ_min λ_max)`, where
/// `λ_min` is the smallest nonzero eigenvalue.
pub fn weyl_fit(sd: &SpectralData, d_s: f64, tol: f64) -> Result<WeylFit> {
    if sd.len() < WEYL_MIN_EIGENVALUES {
        return Err(Error::InsufficientSpectrum {
            needed: WEYL_MIN_EIGENVALUES,
            have: sd.len(),
        });
    }
    let lo = sd.lambda_min_positive();
    let centre = (lo * sd.lambda_max()).sqrt();
    let half = 10f64.sqrt();
    let window = [centre / half, centre * half];

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &l) in sd.eigenvalues.iter().enumerate() {
        if l >= window[0] && l <= window[1] {
            xs.push(l.ln());
            ys.push(((k + 1) as f64).ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientSpectrum {
            needed: 3,
            have: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let ratio_band = ratio_band(sd, d_s, window);
    let expected_slope = 0.5 * d_s;
    let pass = (slope - expected_slope).abs() <= tol
        && ratio_band[0] > 0.0
        && ratio_band[1].is_finite();
    Ok(WeylFit {
        slope,
        intercept,
        ratio_band,
        window,
        points: xs.len(),
        expected_slope,
        tol,
        pass,
    })
}

/// `[inf, sup]` of `ρ(x) / x^{d_S/2}` over `[lo, hi]`. Between jumps the
/// ratio decreases, so the extremes sit at the window ends and on either side
/// of each jump.
pub fn ratio_band(sd: &SpectralData, d_s: f64, [lo, hi]: [f64; 2]) -> [f64; 2] {
    let e = 0.5 * d_s;
    let at = |x: f64, count: usize| count as f64 / x.powf(e);
    let mut band = [at(lo, counting_function(sd, lo)), at(hi, counting_function(sd, hi))];
    band = [band[0].min(band[1]), band[0].max(band[1])];
    for (k, &l) in sd.eigenvalues.iter().enumerate() {
        if l > lo && l <= hi {
            let before = at(l, k.min(counting_function(sd, l)));
            let after = at(l, counting_function(sd, l));
            band[0] = band[0].min(before);
            band[1] = band[1].max(after);
        }
    }
    band
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::pipeline::Model;
    use crate::spectra::BoundaryCondition;

    #[test]
    fn too_few_eigenvalues() {
        let model = Model::preset(Preset::Interval);
        let lv = model.level(3).unwrap();
        let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(sd.len(), 7);
        assert!(matches!(
            weyl_fit(&sd, 1.0, 0.02),
            Err(Error::InsufficientSpectrum { .. })
        ));
    }

    #[test]
    fn interval_slope() {
        let model = Model::preset(Preset::Interval);
        let lv = model.level(8).unwrap();
        let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet).unwrap();
        let fit = weyl_fit(&sd, 1.0, 0.02).unwrap();
        assert!(fit.pass, "{fit:?}");
        // ρ(x) ≈ √x / π
        let mid = 1.0 / std::f64::consts::PI;
        assert!(fit.ratio_band[0] < mid && mid < fit.ratio_band[1] * 1.01);
    }
}
