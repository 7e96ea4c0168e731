//! Generalized symmetric eigenproblems `H a = λ diag(mass) a`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::EnergyForm;
use crate::structure::LevelComplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::Malformed(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// Full generalized eigendecomposition at one level.
///
/// `eigenvectors` has one column per eigenvalue and one row per vertex of the
/// level complex; for Dirichlet data the boundary rows are zero. Columns are
/// orthonormal in the mass inner product.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub bc: BoundaryCondition,
    pub level: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub mass: Vec<f64>,
    /// Vertices carrying degrees of freedom.
    pub dofs: Vec<usize>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Smallest eigenvalue that is not numerically zero.
    pub fn lambda_min_positive(&self) -> f64 {
        let scale = self.lambda_max().max(1.0);
        self.eigenvalues
            .iter()
            .copied()
            .find(|&l| l > 1e-10 * scale)
            .unwrap_or(0.0)
    }

    /// Position of each eigenvalue inside its multiplicity cluster, counting
    /// from 1. Eigenvalues within `rel_tol` (relative) of the previous one are
    /// treated as repeated.
    pub fn multiplicity_ranks(&self, rel_tol: f64) -> Vec<usize> {
        let scale = self.lambda_max().abs().max(1.0);
        let mut out = Vec::with_capacity(self.len());
        let mut rank = 0;
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            if k > 0 && (l - self.eigenvalues[k - 1]).abs() <= rel_tol * l.abs().max(1e-12 * scale) {
                rank += 1;
            } else {
                rank = 1;
            }
            out.push(rank);
        }
        out
    }

    pub fn require(&self, bc: BoundaryCondition) -> Result<()> {
        if self.bc != bc {
            return Err(Error::BoundaryCondition {
                expected: match bc {
                    BoundaryCondition::Neumann => "neumann",
                    BoundaryCondition::Dirichlet => "dirichlet",
                },
            });
        }
        Ok(())
    }
}

/// Largest dense problem attempted by the eigensolver and the edge module.
pub const MAX_DENSE_DIM: usize = 4096;

/// Solves `(H, diag(mass))` restricted to the degrees of freedom selected by
/// `bc`; Dirichlet drops the `V_0` rows and columns.
pub fn eigensolve(
    form: &EnergyForm,
    complex: &LevelComplex,
    mass: &[f64],
    bc: BoundaryCondition,
) -> Result<SpectralData> {
    let n = form.n_vertices();
    if mass.len() != n || complex.n_vertices() != n {
        return Err(Error::Malformed(format!(
            "mass has {} entries for {} vertices",
            mass.len(),
            n
        )));
    }
    if let Some(v) = mass.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::InvalidMeasure(format!("mass at vertex {v} is not positive")));
    }
    let dofs: Vec<usize> = match bc {
        BoundaryCondition::Neumann => (0..n).collect(),
        BoundaryCondition::Dirichlet => complex.interior(),
    };
    let k = dofs.len();
    if k == 0 {
        return Err(Error::InsufficientSpectrum { needed: 1, have: 0 });
    }
    if k > MAX_DENSE_DIM {
        return Err(Error::TooLarge { what: "eigenproblem", size: k, max: MAX_DENSE_DIM });
    }
    let h = form.matrix();
    let inv_sqrt: Vec<f64> = dofs.iter().map(|&v| mass[v].sqrt().recip()).collect();
    let s = DMatrix::from_fn(k, k, |i, j| h[(dofs[i], dofs[j])] * inv_sqrt[i] * inv_sqrt[j]);
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 100_000).ok_or(Error::Eigen {
        level: form.level(),
        size: k,
    })?;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, k);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        // fix the sign so the largest component is positive
        let pivot = v.iamax();
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, &vert) in dofs.iter().enumerate() {
            eigenvectors[(vert, col)] = sign * v[i] * inv_sqrt[i];
        }
    }
    Ok(SpectralData {
        bc,
        level: form.level(),
        eigenvalues,
        eigenvectors,
        mass: mass.to_vec(),
        dofs,
    })
}

/// `ρ(x) = #{k : λ_k ≤ x}`.
pub fn counting_function(sd: &SpectralData, x: f64) -> usize {
    if x < 0.0 {
        return 0;
    }
    sd.eigenvalues.partition_point(|&l| l <= x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::Preset;
    use crate::harmonic::assemble_energy;
    use crate::spectra::{mass_vector, tent_integrals};
    use crate::structure::build_level;

    fn interval(m: usize, bc: BoundaryCondition) -> SpectralData {
        let (s, hs, mw) = Preset::Interval.load();
        let l = build_level(&s, m);
        let f = assemble_energy(&l, &hs).unwrap();
        let mass = mass_vector(&l, &mw, &tent_integrals(&s, &hs, &mw).unwrap());
        eigensolve(&f, &l, &mass, bc).unwrap()
    }

    #[test]
    fn interval_dirichlet_first_eigenvalue() {
        let sd = interval(8, BoundaryCondition::Dirichlet);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((sd.eigenvalues[0] / pi2 - 1.0).abs() < 0.01);
        assert_eq!(sd.len(), 255);
    }

    #[test]
    fn interval_neumann_kernel_is_constants() {
        let sd = interval(8, BoundaryCondition::Neumann);
        assert!(sd.eigenvalues[0].abs() < 1e-9);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((sd.eigenvalues[1] / pi2 - 1.0).abs() < 0.01);
        let c = sd.eigenvectors.column(0);
        let first = c[0];
        assert!(c.iter().all(|&x| (x - first).abs() < 1e-9));
    }

    #[test]
    fn mass_orthonormal_and_residual() {
        let (s, hs, mw) = Preset::Gasket.load();
        let l = build_level(&s, 3);
        let f = assemble_energy(&l, &hs).unwrap();
        let mass = mass_vector(&l, &mw, &tent_integrals(&s, &hs, &mw).unwrap());
        let h = f.matrix();
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
            let sd = eigensolve(&f, &l, &mass, bc).unwrap();
            let a = &sd.eigenvectors;
            let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&mass));
            let gram = a.transpose() * &m * a;
            let eye = DMatrix::<f64>::identity(sd.len(), sd.len());
            assert!((gram - eye).amax() < 1e-10);
            for k in 0..sd.len() {
                let ak = a.column(k);
                let lhs = &h * ak;
                let rhs = m.clone() * ak * sd.eigenvalues[k];
                let mut r = lhs - rhs;
                if bc == BoundaryCondition::Dirichlet {
                    for &b in l.boundary() {
                        r[b] = 0.0;
                    }
                }
                assert!(r.amax() <= 1e-8 * sd.lambda_max());
            }
        }
    }

    #[test]
    fn counting() {
        let sd = interval(8, BoundaryCondition::Dirichlet);
        assert_eq!(counting_function(&sd, -1.0), 0);
        assert_eq!(counting_function(&sd, sd.lambda_max()), sd.len());
        let c = counting_function(&sd, 100.0) as i64;
        assert!((c - 3).abs() <= 1);
    }

    #[test]
    fn gasket_dirichlet_multiplicities() {
        let (s, hs, mw) = Preset::Gasket.load();
        let l = build_level(&s, 3);
        let f = assemble_energy(&l, &hs).unwrap();
        let mass = mass_vector(&l, &mw, &tent_integrals(&s, &hs, &mw).unwrap());
        let sd = eigensolve(&f, &l, &mass, BoundaryCondition::Dirichlet).unwrap();
        let ranks = sd.multiplicity_ranks(1e-8);
        assert_eq!(ranks[0], 1);
        // the symmetric gasket spectrum has degenerate eigenvalues
        assert!(ranks.iter().any(|&r| r > 1));
    }

    #[test]
    fn parse_bc() {
        assert_eq!("Dirichlet".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Dirichlet);
        assert!("robin".parse::<BoundaryCondition>().is_err());
    }
}
