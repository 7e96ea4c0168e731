//! Fractal-definition documents and embedded presets.
//!
//! ```json
//! {
//!   "name": "gasket", "N": 3, "n0": 3,
//!   "gluings": [[1,2,2,1], [2,3,3,2], [1,3,3,1]],
//!   "fixed_maps": [1,2,3],
//!   "harmonic": { "D": [2,-1,-1, -1,2,-1, -1,-1,2], "r": [0.6,0.6,0.6] },
//!   "measure": { "mu": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333] }
//! }
//! ```
//!
//! Gluing tuples `[i, p, j, q]` and `fixed_maps` are one-based. `D` may be
//! given row-major flat or as nested rows.

use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::HarmonicStructure;
use crate::spectra::MeasureWeights;
use crate::structure::{Gluing, SelfSimilarStructure};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefinition {
    name: String,
    #[serde(rename = "N")]
    n_maps: i64,
    n0: i64,
    gluings: Vec<[i64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_maps: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    harmonic: Option<RawHarmonic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<RawMeasure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHarmonic {
    #[serde(rename = "D")]
    d: RawMatrix,
    r: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawMatrix {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    mu: Vec<f64>,
}

/// A parsed definition: the structure plus the optional blocks consumed by
/// the harmonic and spectral pipelines.
#[derive(Debug, Clone)]
pub struct FractalDefinition {
    pub structure: SelfSimilarStructure,
    pub harmonic: Option<HarmonicStructure>,
    pub measure: Option<MeasureWeights>,
    raw: RawDefinition,
}

impl FractalDefinition {
    /// Compact JSON re-serialization of the document, stable across
    /// formatting differences of the input. Used for digests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.raw).expect("definition serializes")
    }

    pub fn require_harmonic(&self) -> Result<&HarmonicStructure> {
        self.harmonic
            .as_ref()
            .ok_or_else(|| Error::Malformed("definition has no `harmonic` block".into()))
    }

    pub fn require_measure(&self) -> Result<&MeasureWeights> {
        self.measure
            .as_ref()
            .ok_or_else(|| Error::Malformed("definition has no `measure` block".into()))
    }
}

fn to_index(what: &'static str, value: i64, max: usize) -> Result<usize> {
    if value < 1 || value as u64 > max as u64 {
        return Err(Error::OutOfRange {
            what,
            index: value,
            max,
        });
    }
    Ok(value as usize - 1)
}

fn to_count(what: &str, value: i64) -> Result<usize> {
    usize::try_from(value).map_err(|_| Error::Malformed(format!("{what} must be nonnegative, got {value}")))
}

/// Parses a definition document (JSON).
pub fn parse_definition(text: &str) -> Result<FractalDefinition> {
    let raw: RawDefinition =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let n_maps = to_count("N", raw.n_maps)?;
    let n0 = to_count("n0", raw.n0)?;
    if n_maps < 2 {
        return Err(Error::Malformed(format!("N must be at least 2, got {n_maps}")));
    }
    if n0 < 1 {
        return Err(Error::Malformed("n0 must be at least 1".into()));
    }
    let gluings = raw
        .gluings
        .iter()
        .map(|&[i, p, j, q]| {
            Ok(Gluing::new(
                to_index("cell", i, n_maps)?,
                to_index("boundary label", p, n0)?,
                to_index("cell", j, n_maps)?,
                to_index("boundary label", q, n0)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let fixed_maps = raw
        .fixed_maps
        .as_ref()
        .map(|f| {
            f.iter()
                .map(|&i| to_index("fixed map", i, n_maps))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let structure = SelfSimilarStructure::new(raw.name.clone(), n_maps, n0, gluings, fixed_maps)?;

    let harmonic = raw
        .harmonic
        .as_ref()
        .map(|h| {
            let d = match &h.d {
                RawMatrix::Flat(v) => {
                    if v.len() != n0 * n0 {
                        return Err(Error::Malformed(format!(
                            "D has {} entries, expected n0^2 = {}",
                            v.len(),
                            n0 * n0
                        )));
                    }
                    DMatrix::from_row_slice(n0, n0, v)
                }
                RawMatrix::Rows(rows) => {
                    if rows.len() != n0 || rows.iter().any(|r| r.len() != n0) {
                        return Err(Error::Malformed(format!("D must be {n0}x{n0}")));
                    }
                    DMatrix::from_fn(n0, n0, |i, j| rows[i][j])
                }
            };
            let hs = HarmonicStructure::new(d, h.r.clone())?;
            hs.check_compatible(&structure)?;
            Ok(hs)
        })
        .transpose()?;

    let measure = raw
        .measure
        .as_ref()
        .map(|m| {
            if m.mu.len() != n_maps {
                return Err(Error::InvalidMeasure(format!(
                    "mu has {} weights, expected N = {n_maps}",
                    m.mu.len()
                )));
            }
            MeasureWeights::new(m.mu.clone())
        })
        .transpose()?;

    Ok(FractalDefinition {
        structure,
        harmonic,
        measure,
        raw,
    })
}

/// Parses a definition and returns only its structure.
pub fn parse_structure(text: &str) -> Result<SelfSimilarStructure> {
    parse_definition(text).map(|d| d.structure)
}

/// Parses a comma-separated weight list such as `0.25,0.75`.
pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidMeasure(format!("not a number: {t:?}")))
        })
        .collect()
}

/// Built-in definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Interval,
    Gasket,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Interval, Preset::Gasket];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Interval => "interval",
            Preset::Gasket => "gasket",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Preset::Interval => include_str!("../presets/interval.json"),
            Preset::Gasket => include_str!("../presets/gasket.json"),
        }
    }

    pub fn definition(self) -> FractalDefinition {
        parse_definition(self.source()).expect("embedded preset is valid")
    }

    /// Structure, harmonic structure and measure of the preset.
    pub fn load(self) -> (SelfSimilarStructure, HarmonicStructure, MeasureWeights) {
        let d = self.definition();
        (
            d.structure,
            d.harmonic.expect("preset has harmonic block"),
            d.measure.expect("preset has measure block"),
        )
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown preset {s:?} (known: interval, gasket)")))
    }
}
