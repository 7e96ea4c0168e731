//! Schatten and `(d_S, ∞)` summability of commutators, and the log-averaged
//! surrogate for the Dixmier trace.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredholm::CommutatorSpectrum;
use crate::spectra::{BoundaryCondition, SpectralData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub lambda1: f64,
    #[serde(rename = "dS")]
    pub d_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenReport {
    pub p: f64,
    /// `Σ_k μ_k^p`.
    pub lhs: f64,
    /// `c₂(p)^{p/2} E[a]^{p/2} (Σ_k λ_k^{-p/2})^{1-p/2}`.
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub energy: f64,
    /// `Σ_k λ_k^{-p/2}`.
    pub trace: f64,
    pub constants: Constants,
}

fn dirichlet_at(cs: &CommutatorSpectrum, sd: &SpectralData) -> Result<()> {
    sd.require(BoundaryCondition::Dirichlet)?;
    if sd.level != cs.level {
        return Err(Error::LevelMismatch(cs.level, sd.level));
    }
    if sd.is_empty() {
        return Err(Error::InsufficientSpectrum { needed: 1, have: 0 });
    }
    Ok(())
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `c₂(p) = 16 c₁ (1/λ₁ + 2/(p - d_S)) / Γ(p/2)`.
pub fn schatten_constant(c1: f64, lambda1: f64, p: f64, d_s: f64) -> f64 {
    16.0 * c1 * (1.0 / lambda1 + 2.0 / (p - d_s)) / libm::tgamma(0.5 * p)
}

/// Checks `Σ μ_k^p ≤ c₂(p)^{p/2} E[a]^{p/2} (Σ λ_k^{-p/2})^{1-p/2}` for
/// `d_S < p ≤ 2`.
pub fn schatten_report(cs: &CommutatorSpectrum, sd: &SpectralData, p: f64, c1: f64) -> Result<SchattenReport> {
    dirichlet_at(cs, sd)?;
    if !(p > cs.d_s && p <= 2.0) {
        return Err(Error::ExponentOutOfRange { p, lo: cs.d_s, hi: 2.0 });
    }
    let lhs: f64 = cs.svals.iter().map(|s| s.powf(p)).sum();
    let lambda1 = sd.eigenvalues[0];
    let c2 = schatten_constant(c1, lambda1, p, cs.d_s);
    let trace: f64 = sd.eigenvalues.iter().map(|l| l.powf(-0.5 * p)).sum();
    let rhs = c2.powf(0.5 * p) * cs.energy.powf(0.5 * p) * trace.powf(1.0 - 0.5 * p);
    let ratio = ratio(lhs, rhs);
    Ok(SchattenReport {
        p,
        lhs,
        rhs,
        ratio,
        pass: lhs <= rhs,
        energy: cs.energy,
        trace,
        constants: Constants { c1, c2, lambda1, d_s: cs.d_s },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogAveragedSums {
    /// `(N, (1/ln N) Σ_{k≤N} μ_k^{d_S})` for `N = 2..=len`.
    pub sequence: Vec<(usize, f64)>,
    pub max: f64,
    pub argmax: usize,
    pub at_full: f64,
    pub at_half: f64,
    /// `Σ_k μ_k^{d_S}` without the logarithmic normalization.
    pub total: f64,
}

pub fn log_averaged_sums(cs: &CommutatorSpectrum, d_s: f64) -> LogAveragedSums {
    let mut sequence = Vec::with_capacity(cs.svals.len().saturating_sub(1));
    let mut partial = 0.0;
    for (k, s) in cs.svals.iter().enumerate() {
        partial += s.powf(d_s);
        let n = k + 1;
        if n >= 2 {
            sequence.push((n, partial / (n as f64).ln()));
        }
    }
    let (argmax, max) = sequence
        .iter()
        .fold((0, 0.0f64), |acc, &(n, v)| if v > acc.1 { (n, v) } else { acc });
    let value_at = |n: usize| {
        sequence
            .iter()
            .find(|&&(k, _)| k == n)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    };
    let len = cs.svals.len();
    LogAveragedSums {
        at_full: value_at(len),
        at_half: value_at(len / 2),
        max,
        argmax,
        total: partial,
        sequence,
    }
}

/// `Φ̂(a) = (1/ln N) Σ_{k≤N} μ_k^{d_S}` at `N` = module dimension.
pub fn phi_hat(cs: &CommutatorSpectrum) -> f64 {
    let n = cs.svals.len();
    if n < 2 {
        return 0.0;
    }
    cs.svals.iter().map(|s| s.powf(cs.d_s)).sum::<f64>() / (n as f64).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyFunctional {
    pub phi: f64,
    /// Same surrogate at half truncation.
    pub phi_half: f64,
    pub n_max: usize,
    /// `c₂(d_S)^{d_S/2} E[a]^{d_S/2} [(1/ln K) Σ_{k≤K} λ_k^{-d_S/2}]^{1-d_S/2}`.
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
    pub energy: f64,
    pub constants: Constants,
}

/// `c₂(d_S) = 32 c₁ / Γ(d_S/2)`.
pub fn dixmier_constant(c1: f64, d_s: f64) -> f64 {
    32.0 * c1 / libm::tgamma(0.5 * d_s)
}

/// Constant `c` with `Φ̂(b) ≤ c E[b]^{d_S/2}` at this level.
pub fn energy_functional_constant(sd: &SpectralData, c1: f64, d_s: f64) -> f64 {
    let k = sd.len().max(2);
    let averaged: f64 = sd.eigenvalues.iter().map(|l| l.powf(-0.5 * d_s)).sum::<f64>() / (k as f64).ln();
    dixmier_constant(c1, d_s).powf(0.5 * d_s) * averaged.powf(1.0 - 0.5 * d_s)
}

pub fn energy_functional(cs: &CommutatorSpectrum, sd: &SpectralData, c1: f64) -> Result<EnergyFunctional> {
    dirichlet_at(cs, sd)?;
    let d = cs.d_s;
    let phi = phi_hat(cs);
    let half = cs.svals.len() / 2;
    let phi_half = if half >= 2 {
        cs.svals[..half].iter().map(|s| s.powf(d)).sum::<f64>() / (half as f64).ln()
    } else {
        0.0
    };
    let bound = energy_functional_constant(sd, c1, d) * cs.energy.powf(0.5 * d);
    Ok(EnergyFunctional {
        phi,
        phi_half,
        n_max: cs.svals.len(),
        bound,
        ratio: ratio(phi, bound),
        pass: phi <= bound,
        energy: cs.energy,
        constants: Constants {
            c1,
            c2: dixmier_constant(c1, d),
            lambda1: sd.eigenvalues[0],
            d_s: d,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::fredholm::{build_module, commutator};
    use crate::functions::FunctionSpec;
    use crate::pipeline::Model;
    use crate::spectra::c1_estimate;

    fn setup(m: usize, seed: u64) -> (Model, CommutatorSpectrum, SpectralData, f64) {
        let model = Model::preset(Preset::Gasket);
        let lv = model.level(m).unwrap();
        let em = build_module(&lv.form).unwrap();
        let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet).unwrap();
        let c1 = c1_estimate(&sd, model.d_s()).c1;
        let a = FunctionSpec::RandomHarmonic { level: 1, seed }.evaluate(&model, m).unwrap();
        let cs = commutator(&em, &a, "f", model.d_s()).unwrap();
        (model, cs, sd, c1)
    }

    #[test]
    fn p_two_is_hilbert_schmidt() {
        let (_, cs, sd, c1) = setup(3, 1);
        let r = schatten_report(&cs, &sd, 2.0, c1).unwrap();
        assert!((r.lhs - cs.hs_norm_sq()).abs() <= 1e-12 * r.lhs);
        assert!(r.pass);
    }

    #[test]
    fn rhs_blows_up_toward_d_s() {
        let (model, cs, sd, c1) = setup(3, 2);
        let d = model.d_s();
        let ps = [2.0, 1.6, d + 0.1, d + 0.01, d + 0.001];
        let rhs: Vec<f64> = ps.iter().map(|&p| schatten_report(&cs, &sd, p, c1).unwrap().rhs).collect();
        assert!(rhs[2] < rhs[3] && rhs[3] < rhs[4]);
        assert!(schatten_report(&cs, &sd, d, c1).is_err());
        assert!(schatten_report(&cs, &sd, 2.1, c1).is_err());
    }

    #[test]
    fn log_sums_bounded_by_top_term() {
        let (model, cs, _, _) = setup(3, 3);
        let l = log_averaged_sums(&cs, model.d_s());
        let top = cs.svals[0].powf(model.d_s());
        for &(n, v) in l.sequence.iter().take(10) {
            assert!(v <= n as f64 * top / (n as f64).ln() * (1.0 + 1e-12));
        }
        assert_eq!(l.sequence.len(), cs.svals.len() - 1);
        assert!((l.at_full - phi_hat(&cs)).abs() < 1e-12 * l.at_full);
    }

    #[test]
    fn energy_functional_is_homogeneous() {
        let (model, cs, sd, c1) = setup(3, 4);
        let scaled = CommutatorSpectrum {
            svals: cs.svals.iter().map(|s| 3.0 * s).collect(),
            energy: 9.0 * cs.energy,
            ..cs.clone()
        };
        let e1 = energy_functional(&cs, &sd, c1).unwrap();
        let e3 = energy_functional(&scaled, &sd, c1).unwrap();
        let factor = 3f64.powf(model.d_s());
        assert!((e3.phi - factor * e1.phi).abs() < 1e-10 * e3.phi);
        assert!((e3.ratio - e1.ratio).abs() < 1e-10);
    }
}
