//! Glue that bundles a definition into reusable per-level data.

use crate::definition::{FractalDefinition, Preset};
use crate::error::{Error, Result};
use crate::harmonic::{assemble_energy, CellExtender, EnergyForm, HarmonicStructure};
use crate::spectra::{
    eigensolve, mass_vector, solve_spectral_exponent, tent_integrals, BoundaryCondition,
    MeasureWeights, SpectralData, SpectralExponent,
};
use crate::structure::{build_level, LevelComplex, SelfSimilarStructure};

pub const DEFAULT_MAX_LEVEL: usize = 10;

/// Structure, harmonic structure and measure with the level-independent
/// quantities derived from them.
#[derive(Debug, Clone)]
pub struct Model {
    pub structure: SelfSimilarStructure,
    pub harmonic: HarmonicStructure,
    pub measure: MeasureWeights,
    pub exponent: SpectralExponent,
    pub tents: Vec<f64>,
    extender: CellExtender,
}

/// Level complex, energy form and lumped masses at one level.
#[derive(Debug, Clone)]
pub struct Level {
    pub complex: LevelComplex,
    pub form: EnergyForm,
    pub mass: Vec<f64>,
}

impl Level {
    pub fn m(&self) -> usize {
        self.complex.level()
    }
}

impl Model {
    pub fn new(
        structure: SelfSimilarStructure,
        harmonic: HarmonicStructure,
        measure: MeasureWeights,
    ) -> Result<Self> {
        harmonic.check_compatible(&structure)?;
        let exponent = solve_spectral_exponent(&harmonic, &measure)?;
        let tents = tent_integrals(&structure, &harmonic, &measure)?;
        let extender = CellExtender::new(&structure, &harmonic)?;
        Ok(Self {
            structure,
            harmonic,
            measure,
            exponent,
            tents,
            extender,
        })
    }

    /// Uses `measure` in place of the definition's own block when given.
    pub fn from_definition(def: &FractalDefinition, measure: Option<MeasureWeights>) -> Result<Self> {
        let hs = def.require_harmonic()?.clone();
        let mw = match measure {
            Some(m) => m,
            None => def.require_measure()?.clone(),
        };
        Self::new(def.structure.clone(), hs, mw)
    }

    pub fn preset(p: Preset) -> Self {
        let (s, hs, mw) = p.load();
        Self::new(s, hs, mw).expect("preset model is valid")
    }

    pub fn d_s(&self) -> f64 {
        self.exponent.d_s
    }

    pub fn complex(&self, m: usize) -> LevelComplex {
        build_level(&self.structure, m)
    }

    pub fn level(&self, m: usize) -> Result<Level> {
        let complex = build_level(&self.structure, m);
        let form = assemble_energy(&complex, &self.harmonic)?;
        let mass = mass_vector(&complex, &self.measure, &self.tents);
        Ok(Level { complex, form, mass })
    }

    pub fn spectrum(&self, level: &Level, bc: BoundaryCondition) -> Result<SpectralData> {
        eigensolve(&level.form, &level.complex, &level.mass, bc)
    }

    pub fn extender(&self) -> &CellExtender {
        &self.extender
    }

    /// Harmonic extension of `u` from level `from` up to level `to`.
    pub fn extend(&self, u: &[f64], from: usize, to: usize) -> Result<Vec<f64>> {
        if to < from {
            return Err(Error::LevelMismatch(from, to));
        }
        let mut coarse = build_level(&self.structure, from);
        if u.len() != coarse.n_vertices() {
            return Err(Error::InvalidFunction(format!(
                "expected {} values on V_{from}, got {}",
                coarse.n_vertices(),
                u.len()
            )));
        }
        let mut values = u.to_vec();
        for m in from..to {
            let fine = build_level(&self.structure, m + 1);
            values = self.extender.extend(&coarse, &fine, &values)?;
            coarse = fine;
        }
        Ok(values)
    }

    /// `u ∘ F_i` as a function on `V_m`, for `u` given on `V_{m+1}`.
    pub fn restrict_to_cell(&self, fine: &LevelComplex, coarse: &LevelComplex, u: &[f64], map: usize) -> Result<Vec<f64>> {
        let idx = coarse.child_map(fine, map)?;
        Ok(idx.into_iter().map(|v| u[v]).collect())
    }
}
