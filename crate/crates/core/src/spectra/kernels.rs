//! Green, heat and potential kernels as spectral sums over mass-normalized
//! eigenfunctions.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{BoundaryCondition, SpectralData};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenDiagonal {
    /// `g(x)` per vertex; zero on `V_0`.
    pub values: Vec<f64>,
    pub sup: f64,
    pub argmax: usize,
}

/// `g(x) = Σ_k λ_k⁻¹ a_k(x)²`, the diagonal of the Dirichlet Green kernel.
pub fn green_diagonal(sd: &SpectralData) -> Result<GreenDiagonal> {
    sd.require(BoundaryCondition::Dirichlet)?;
    let weights: Vec<f64> = sd.eigenvalues.iter().map(|l| l.recip()).collect();
    let values = weighted_diagonal(sd, &weights);
    let (argmax, sup) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(GreenDiagonal { values, sup, argmax })
}

/// `Σ_k w_k a_k(x)²` for every vertex.
fn weighted_diagonal(sd: &SpectralData, weights: &[f64]) -> Vec<f64> {
    let a = &sd.eigenvectors;
    (0..a.nrows())
        .map(|x| {
            a.row(x)
                .iter()
                .zip(weights)
                .map(|(v, w)| w * v * v)
                .sum()
        })
        .collect()
}

/// `p(t, x, y) = Σ_k e^{-λ_k t} a_k(x) a_k(y)`.
pub fn heat_kernel(sd: &SpectralData, t: f64, x: usize, y: usize) -> f64 {
    let a = &sd.eigenvectors;
    sd.eigenvalues
        .iter()
        .enumerate()
        .map(|(k, l)| (-l * t).exp() * a[(x, k)] * a[(y, k)])
        .sum()
}

/// Full heat matrix `[p(t, x, y)]` over all vertices.
pub fn heat_matrix(sd: &SpectralData, t: f64) -> DMatrix<f64> {
    let decay = DVector::from_iterator(sd.len(), sd.eigenvalues.iter().map(|l| (-l * t).exp()));
    let scaled = &sd.eigenvectors * DMatrix::from_diagonal(&decay);
    scaled * sd.eigenvectors.transpose()
}

/// `p(t, x, x)` for every vertex.
pub fn heat_diagonal(sd: &SpectralData, t: f64) -> Vec<f64> {
    let w: Vec<f64> = sd.eigenvalues.iter().map(|l| (-l * t).exp()).collect();
    weighted_diagonal(sd, &w)
}

/// Heat-kernel constant `c₁`: the least `c` with `p(t,x,y) ≤ c t^{-d_S/2}`
/// for `t ∈ (0, 1]` and `p(t,x,y) ≤ c e^{-(t-1)λ₁}` for `t ≥ 1`.
///
/// Off-diagonal values are bounded by the diagonal (Cauchy–Schwarz), the
/// second regime is dominated by `t = 1`, and `t^{d_S/2} p(t,x,x) → 0` as
/// `t → 0` because the discrete kernel is bounded, so the supremum is a
/// maximum over a finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatConstant {
    pub c1: f64,
    /// Time at which the maximum is attained.
    pub t_star: f64,
    /// `sup_{x,y} p(1, x, y)`, i.e. `‖e^{-H}‖_{L¹→L∞}`.
    pub sup_at_one: f64,
}

pub fn c1_estimate(sd: &SpectralData, d_s: f64) -> HeatConstant {
    let sup_at_one = max_of(&heat_diagonal(sd, 1.0));
    let sq = sd.eigenvectors.map(|v| v * v);
    let profile = |t: f64| -> f64 {
        let decay = DVector::from_iterator(sd.len(), sd.eigenvalues.iter().map(|l| (-l * t).exp()));
        t.powf(0.5 * d_s) * (&sq * decay).max()
    };

    let t_hi = 1.0f64;
    let t_lo = (1e-4 / sd.lambda_max().max(1.0)).min(1e-3);
    let n = 240;
    let step = (t_hi / t_lo).ln() / n as f64;
    let grid: Vec<f64> = (0..=n).map(|i| t_lo * (step * i as f64).exp()).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| profile(t)).collect();
    let (best, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });

    // golden-section refinement in log t around the grid maximum
    let mut a = grid[best.saturating_sub(1)].ln();
    let mut b = grid[(best + 1).min(n)].ln();
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let f = |s: f64| profile(s.exp());
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let mut c1 = vals[best];
    let mut t_star = grid[best];
    for (s, v) in [(c, fc), (d, fd)] {
        if v > c1 {
            c1 = v;
            t_star = s.exp();
        }
    }
    if sup_at_one > c1 {
        c1 = sup_at_one;
        t_star = 1.0;
    }
    HeatConstant { c1, t_star, sup_at_one }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatBoundCheck {
    pub c1: f64,
    pub t_min: f64,
    /// Largest `p(t,x,x) / bound(t)` over the checked times.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Checks `p(t,x,x) ≤ c₁ t^{-d_S/2}` on `[1/λ_max, 1]` and
/// `p(t,x,x) ≤ c₁ e^{-(t-1)λ₁}` on `[1, t_max]`.
pub fn heat_bound_check(sd: &SpectralData, d_s: f64, c1: f64, t_max: f64) -> HeatBoundCheck {
    let t_min = 1.0 / sd.lambda_max();
    let lambda1 = sd.lambda_min_positive();
    let mut worst: f64 = 0.0;
    let n = 120;
    for i in 0..=n {
        let t = t_min * (1.0 / t_min).powf(i as f64 / n as f64);
        let bound = c1 * t.powf(-0.5 * d_s);
        worst = worst.max(max_of(&heat_diagonal(sd, t)) / bound);
    }
    for i in 0..=n {
        let t = 1.0 + (t_max - 1.0) * i as f64 / n as f64;
        let bound = c1 * (-(t - 1.0) * lambda1).exp();
        worst = worst.max(max_of(&heat_diagonal(sd, t)) / bound);
    }
    HeatBoundCheck {
        c1,
        t_min,
        worst_ratio: worst,
        pass: worst <= 1.0 + 1e-9,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialReport {
    pub p: f64,
    pub diag: Vec<f64>,
    pub max_diag: f64,
    pub lambda1: f64,
    pub c1: f64,
    /// `c₁ (1/λ₁ + 2/(p - d_S))`.
    pub rhs: f64,
    pub pass: bool,
}

/// Diagonal of `g_p = Γ(p/2) Σ_k λ_k^{-p/2} a_k a_k` and the bound
/// `g_p ≤ c₁ (1/λ₁ + 2/(p - d_S))`.
pub fn potential_kernel(sd: &SpectralData, p: f64, d_s: f64, c1: f64) -> Result<PotentialReport> {
    sd.require(BoundaryCondition::Dirichlet)?;
    if !(p > d_s && p <= 2.0) {
        return Err(Error::ExponentOutOfRange { p, lo: d_s, hi: 2.0 });
    }
    let gamma = libm::tgamma(0.5 * p);
    let weights: Vec<f64> = sd.eigenvalues.iter().map(|l| gamma * l.powf(-0.5 * p)).collect();
    let diag = weighted_diagonal(sd, &weights);
    let max_diag = max_of(&diag);
    let lambda1 = sd.eigenvalues[0];
    let rhs = c1 * (1.0 / lambda1 + 2.0 / (p - d_s));
    Ok(PotentialReport {
        p,
        max_diag,
        lambda1,
        c1,
        rhs,
        pass: max_diag <= rhs,
        diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::harmonic::assemble_energy;
    use crate::spectra::{eigensolve, mass_vector, tent_integrals};
    use crate::structure::build_level;

    fn solve(preset: Preset, m: usize, bc: BoundaryCondition) -> SpectralData {
        let (s, hs, mw) = preset.load();
        let l = build_level(&s, m);
        let f = assemble_energy(&l, &hs).unwrap();
        let mass = mass_vector(&l, &mw, &tent_integrals(&s, &hs, &mw).unwrap());
        eigensolve(&f, &l, &mass, bc).unwrap()
    }

    #[test]
    fn green_matches_direct_inverse() {
        let (s, hs, mw) = Preset::Gasket.load();
        let l = build_level(&s, 3);
        let f = assemble_energy(&l, &hs).unwrap();
        let mass = mass_vector(&l, &mw, &tent_integrals(&s, &hs, &mw).unwrap());
        let sd = eigensolve(&f, &l, &mass, BoundaryCondition::Dirichlet).unwrap();
        let g = green_diagonal(&sd).unwrap();
        let interior = l.interior();
        let h = f.matrix().select_rows(&interior).select_columns(&interior);
        let inv = h.try_inverse().unwrap();
        for (i, &v) in interior.iter().enumerate() {
            assert!((g.values[v] - inv[(i, i)]).abs() <= 1e-8 * inv[(i, i)]);
        }
        assert!(g.values.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn green_requires_dirichlet() {
        let sd = solve(Preset::Interval, 3, BoundaryCondition::Neumann);
        assert!(green_diagonal(&sd).is_err());
    }

    #[test]
    fn heat_kernel_symmetric_and_decaying() {
        let sd = solve(Preset::Gasket, 3, BoundaryCondition::Dirichlet);
        let (x, y) = (sd.dofs[2], sd.dofs[7]);
        for t in [0.001, 0.1, 1.0] {
            assert!((heat_kernel(&sd, t, x, y) - heat_kernel(&sd, t, y, x)).abs() < 1e-12);
        }
        assert!(heat_kernel(&sd, 50.0, x, x) < 1e-100);
    }

    #[test]
    fn neumann_heat_conserves_constants() {
        let sd = solve(Preset::Gasket, 3, BoundaryCondition::Neumann);
        let p = heat_matrix(&sd, 0.01);
        for x in 0..p.nrows() {
            let s: f64 = (0..p.ncols()).map(|y| sd.mass[y] * p[(x, y)]).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn c1_validates_heat_bound() {
        let sd = solve(Preset::Gasket, 4, BoundaryCondition::Dirichlet);
        let d_s = 2.0 * 3f64.ln() / 5f64.ln();
        let hc = c1_estimate(&sd, d_s);
        assert!(hc.c1 >= hc.sup_at_one);
        let check = heat_bound_check(&sd, d_s, hc.c1, 3.0);
        assert!(check.pass, "{check:?}");
    }

    #[test]
    fn potential_at_two_is_green() {
        let sd = solve(Preset::Gasket, 3, BoundaryCondition::Dirichlet);
        let d_s = 2.0 * 3f64.ln() / 5f64.ln();
        let g = green_diagonal(&sd).unwrap();
        let rep = potential_kernel(&sd, 2.0, d_s, 1.0).unwrap();
        for (a, b) in rep.diag.iter().zip(&g.values) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
        assert!(potential_kernel(&sd, d_s, d_s, 1.0).is_err());
        assert!(potential_kernel(&sd, 2.1, d_s, 1.0).is_err());
    }

    #[test]
    fn potential_grows_toward_d_s() {
        let sd = solve(Preset::Gasket, 4, BoundaryCondition::Dirichlet);
        let d_s = 2.0 * 3f64.ln() / 5f64.ln();
        let hi = potential_kernel(&sd, 1.9, d_s, 1.0).unwrap().max_diag;
        let lo = potential_kernel(&sd, d_s + 0.05, d_s, 1.0).unwrap().max_diag;
        assert!(lo > hi);
    }
}
