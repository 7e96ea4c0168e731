//! Self-similar invariance of the energy functional between two levels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredholm::{build_module, commutator, energy_functional_constant, phi_hat, EdgeModule};
use crate::pipeline::{Level, Model};
use crate::spectra::{c1_estimate, resistance_exponent, BoundaryCondition, SpectralData};

/// Everything computed once per level and shared across test functions.
#[derive(Debug, Clone)]
pub struct FredholmLevel {
    pub level: Level,
    pub module: EdgeModule,
    pub dirichlet: SpectralData,
    pub c1: f64,
}

impl FredholmLevel {
    pub fn new(model: &Model, m: usize) -> Result<Self> {
        let level = model.level(m)?;
        let module = build_module(&level.form)?;
        let dirichlet = model.spectrum(&level, BoundaryCondition::Dirichlet)?;
        let c1 = c1_estimate(&dirichlet, model.d_s()).c1;
        Ok(Self { level, module, dirichlet, c1 })
    }

    pub fn m(&self) -> usize {
        self.level.m()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderChain {
    /// `q = d_S / (2 - d_S)`.
    pub exponent: f64,
    /// Root of `Σ r_i^{d_H} = 1`.
    pub d_h: f64,
    /// `(Σ r_i^q)^{(2-d_S)/2}`.
    pub factor: f64,
    /// `Σ_i E[a∘F_i]^{d_S/2}`.
    pub lhs: f64,
    /// `factor · E[a]^{d_S/2}`.
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// Coarse level `m`; `a` lives on `V_{m+1}`.
    pub level: usize,
    /// `Φ̂_{m+1}(a)`.
    pub phi_fine: f64,
    /// `Φ̂_m(a∘F_i)` per map.
    pub phi_cells: Vec<f64>,
    pub phi_sum: f64,
    /// `|Φ̂_{m+1}(a) - Σ_i Φ̂_m(a∘F_i)| / Φ̂_{m+1}(a)`.
    pub relative_gap: f64,
    /// Largest deviation of the level-`(m+1)` derivation on cell `i` from
    /// `r_i^{-1/2}` times the level-`m` derivation of `a∘F_i`.
    pub cell_defect: f64,
    pub energy: f64,
    /// `c · factor · E[a]^{d_S/2}` bounding `phi_sum`.
    pub cell_bound: f64,
    pub cell_bound_pass: bool,
    pub holder: HolderChain,
}

/// Compares `Φ̂` of `a` at the fine level with the sum over the pieces
/// `a∘F_i` at the coarse level.
pub fn invariance_check(
    model: &Model,
    coarse: &FredholmLevel,
    fine: &FredholmLevel,
    a: &[f64],
) -> Result<InvarianceReport> {
    let m = coarse.m();
    if fine.m() != m + 1 {
        return Err(Error::LevelMismatch(m + 1, fine.m()));
    }
    let d = model.d_s();
    let r = model.harmonic.r();
    let fine_cs = commutator(&fine.module, a, "a", d)?;
    let phi_fine = phi_hat(&fine_cs);

    let n = model.structure.n_maps();
    let mut phi_cells = Vec::with_capacity(n);
    let mut cell_energies = Vec::with_capacity(n);
    let mut cell_defect = 0.0f64;
    let fine_da = fine.module.derive(a)?;
    for i in 0..n {
        let idx = coarse.level.complex.child_map(&fine.level.complex, i)?;
        let piece: Vec<f64> = idx.iter().map(|&v| a[v]).collect();
        let cs = commutator(&coarse.module, &piece, "a∘F_i", d)?;
        phi_cells.push(phi_hat(&cs));
        cell_energies.push(cs.energy);
        cell_defect = cell_defect.max(cell_derivation_defect(coarse, fine, &fine_da, &idx, &piece, i, r[i])?);
    }
    let phi_sum: f64 = phi_cells.iter().sum();
    let relative_gap = if phi_fine > 0.0 {
        (phi_fine - phi_sum).abs() / phi_fine
    } else {
        (phi_fine - phi_sum).abs()
    };

    let energy = fine_cs.energy;
    let q = d / (2.0 - d);
    let factor = r.iter().map(|ri| ri.powf(q)).sum::<f64>().powf(0.5 * (2.0 - d));
    let holder_lhs: f64 = cell_energies.iter().map(|e| e.powf(0.5 * d)).sum();
    let holder_rhs = factor * energy.powf(0.5 * d);
    let holder = HolderChain {
        exponent: q,
        d_h: resistance_exponent(&model.harmonic)?,
        factor,
        lhs: holder_lhs,
        rhs: holder_rhs,
        pass: holder_lhs <= holder_rhs * (1.0 + 1e-12),
    };
    let cell_bound = energy_functional_constant(&coarse.dirichlet, coarse.c1, d) * holder_rhs;
    Ok(InvarianceReport {
        level: m,
        phi_fine,
        phi_sum,
        phi_cells,
        relative_gap,
        cell_defect,
        energy,
        cell_bound,
        cell_bound_pass: phi_sum <= cell_bound,
        holder,
    })
}

/// Matches each fine edge of cell `i` with the coarse edge between the
/// preimages of its endpoints.
fn cell_derivation_defect(
    coarse: &FredholmLevel,
    fine: &FredholmLevel,
    fine_da: &nalgebra::DVector<f64>,
    idx: &[usize],
    piece: &[f64],
    i: usize,
    r_i: f64,
) -> Result<f64> {
    let coarse_da = coarse.module.derive(piece)?;
    let scale = r_i.powf(-0.5);
    let cells_per_map = coarse.level.complex.n_cells();
    let mut lookup = std::collections::HashMap::new();
    for (k, e) in coarse.module.edges().iter().enumerate() {
        lookup.insert((idx[e.tail], idx[e.head]), (k, 1.0));
        lookup.insert((idx[e.head], idx[e.tail]), (k, -1.0));
    }
    let mut defect = 0.0f64;
    let mut matched = 0;
    for (k, e) in fine.module.edges().iter().enumerate() {
        if e.cell / cells_per_map != i {
            continue;
        }
        let &(j, sign) = lookup.get(&(e.tail, e.head)).ok_or_else(|| {
            Error::Singular(format!("fine edge {k} of cell {} has no coarse counterpart", i + 1))
        })?;
        if sign < 0.0 {
            return Err(Error::Singular(format!(
                "fine edge {k} of cell {} is oriented against its coarse counterpart",
                i + 1
            )));
        }
        defect = defect.max((fine_da[k] - scale * coarse_da[j]).abs());
        matched += 1;
    }
    if matched != coarse.module.dim() {
        return Err(Error::Singular(format!(
            "cell {} has {matched} fine edges, coarse level has {}",
            i + 1,
            coarse.module.dim()
        )));
    }
    Ok(defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::functions::FunctionSpec;

    #[test]
    fn constant_gives_zero_on_both_sides() {
        let model = Model::preset(Preset::Gasket);
        let c = FredholmLevel::new(&model, 1).unwrap();
        let f = FredholmLevel::new(&model, 2).unwrap();
        let a = vec![0.7; f.module.n_vertices()];
        let r = invariance_check(&model, &c, &f, &a).unwrap();
        assert_eq!(r.phi_fine, 0.0);
        assert_eq!(r.phi_sum, 0.0);
        assert_eq!(r.relative_gap, 0.0);
    }

    #[test]
    fn cell_decomposition_is_exact() {
        for p in Preset::ALL {
            let model = Model::preset(p);
            let c = FredholmLevel::new(&model, 2).unwrap();
            let f = FredholmLevel::new(&model, 3).unwrap();
            let a = FunctionSpec::RandomHarmonic { level: 3, seed: 9 }.evaluate(&model, 3).unwrap();
            let r = invariance_check(&model, &c, &f, &a).unwrap();
            let scale = f.module.derive(&a).unwrap().amax();
            assert!(r.cell_defect <= 1e-12 * scale, "{p:?}: {}", r.cell_defect);
            assert!(r.holder.pass);
        }
    }

    #[test]
    fn gasket_holder_factor_is_one() {
        let model = Model::preset(Preset::Gasket);
        let c = FredholmLevel::new(&model, 1).unwrap();
        let f = FredholmLevel::new(&model, 2).unwrap();
        let a = FunctionSpec::RandomHarmonic { level: 0, seed: 1 }.evaluate(&model, 2).unwrap();
        let r = invariance_check(&model, &c, &f, &a).unwrap();
        assert!((r.holder.factor - 1.0).abs() < 1e-12);
        assert!((r.holder.exponent - r.holder.d_h).abs() < 1e-9);
    }

    #[test]
    fn levels_must_be_consecutive() {
        let model = Model::preset(Preset::Interval);
        let c = FredholmLevel::new(&model, 1).unwrap();
        let f = FredholmLevel::new(&model, 3).unwrap();
        let a = vec![0.0; f.module.n_vertices()];
        assert!(matches!(invariance_check(&model, &c, &f, &a), Err(Error::LevelMismatch(2, 3))));
    }
}
