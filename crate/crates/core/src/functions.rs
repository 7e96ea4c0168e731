//! Test functions for the Fredholm pipeline: `m₀`-harmonic functions given by
//! their values on `V_{m₀}`, either explicit or drawn from a seeded RNG.
//!
//! ```json
//! {"type": "harmonic", "level": 0, "boundary_values": [1, 0, 0]}
//! {"type": "random-harmonic", "level": 2, "seed": 7}
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{Model, DEFAULT_MAX_LEVEL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Harmonic {
        level: usize,
        boundary_values: Vec<f64>,
    },
    RandomHarmonic {
        level: usize,
        seed: u64,
    },
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: FunctionSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidFunction(e.to_string()))?;
        if spec.level() > DEFAULT_MAX_LEVEL {
            return Err(Error::InvalidFunction(format!(
                "level {} exceeds maximum {DEFAULT_MAX_LEVEL}",
                spec.level()
            )));
        }
        if let FunctionSpec::Harmonic { boundary_values, .. } = &spec {
            if boundary_values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidFunction("non-finite boundary value".into()));
            }
        }
        Ok(spec)
    }

    pub fn level(&self) -> usize {
        match self {
            FunctionSpec::Harmonic { level, .. } | FunctionSpec::RandomHarmonic { level, .. } => *level,
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            FunctionSpec::Harmonic { level, .. } => format!("harmonic-l{level}"),
            FunctionSpec::RandomHarmonic { level, seed } => format!("random-harmonic-l{level}-s{seed}"),
        }
    }

    /// Values on `V_{m₀}`.
    pub fn seed_values(&self, model: &Model) -> Result<Vec<f64>> {
        let n = model.complex(self.level()).n_vertices();
        match self {
            FunctionSpec::Harmonic { boundary_values, level } => {
                if boundary_values.len() != n {
                    return Err(Error::InvalidFunction(format!(
                        "boundary_values has {} entries but V_{level} has {n} vertices",
                        boundary_values.len()
                    )));
                }
                Ok(boundary_values.clone())
            }
            FunctionSpec::RandomHarmonic { seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
            }
        }
    }

    /// The function on `V_m`, `m ≥ m₀`, by harmonic extension.
    pub fn evaluate(&self, model: &Model, m: usize) -> Result<Vec<f64>> {
        if m < self.level() {
            return Err(Error::InvalidFunction(format!(
                "function is {}-harmonic; cannot evaluate at coarser level {m}",
                self.level()
            )));
        }
        model.extend(&self.seed_values(model)?, self.level(), m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;

    #[test]
    fn parse_variants() {
        let h = FunctionSpec::parse(r#"{"type":"harmonic","level":0,"boundary_values":[1,0,0]}"#).unwrap();
        assert_eq!(h.level(), 0);
        let r = FunctionSpec::parse(r#"{"type":"random-harmonic","level":2,"seed":7}"#).unwrap();
        assert_eq!(r.id(), "random-harmonic-l2-s7");
        assert!(FunctionSpec::parse(r#"{"type":"other"}"#).is_err());
        assert!(FunctionSpec::parse(r#"{"type":"random-harmonic","level":11,"seed":7}"#).is_err());
    }

    #[test]
    fn random_values_are_deterministic() {
        let model = Model::preset(Preset::Gasket);
        let f = FunctionSpec::RandomHarmonic { level: 1, seed: 3 };
        assert_eq!(f.evaluate(&model, 3).unwrap(), f.evaluate(&model, 3).unwrap());
        let g = FunctionSpec::RandomHarmonic { level: 1, seed: 4 };
        assert_ne!(f.seed_values(&model).unwrap(), g.seed_values(&model).unwrap());
    }

    #[test]
    fn wrong_length_rejected() {
        let model = Model::preset(Preset::Gasket);
        let f = FunctionSpec::Harmonic { level: 0, boundary_values: vec![1.0, 2.0] };
        assert!(f.evaluate(&model, 2).is_err());
        let f = FunctionSpec::Harmonic { level: 2, boundary_values: vec![0.0; 15] };
        assert!(f.evaluate(&model, 1).is_err());
    }
}
