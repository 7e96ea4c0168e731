//! Edge space of a level complex with its derivation, midpoint action and
//! phase `F = 2P - I`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::harmonic::{Edge, EnergyForm};
use crate::spectra::MAX_DENSE_DIM;

/// Finite-level Hilbert module `ℓ²(edges)`.
///
/// `P` is kept in factored form `P = Q Qᵀ`, with `Q` an orthonormal basis of
/// `Im ∂` taken from the QR factorization of `∂` with one vertex column
/// removed. The removed column is redundant because `∂1 = 0` and the complex
/// is connected.
#[derive(Debug, Clone)]
pub struct EdgeModule {
    level: usize,
    n_vertices: usize,
    edges: Vec<Edge>,
    sqrt_c: Vec<f64>,
    q: DMatrix<f64>,
}

impl EdgeModule {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Dimension of the edge space.
    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `rank P`.
    pub fn rank(&self) -> usize {
        self.q.ncols()
    }

    /// Orthonormal basis of `Im ∂`, one column per basis vector.
    pub fn range_basis(&self) -> &DMatrix<f64> {
        &self.q
    }

    fn check_len(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.n_vertices {
            return Err(Error::InvalidFunction(format!(
                "expected {} vertex values, got {}",
                self.n_vertices,
                a.len()
            )));
        }
        Ok(())
    }

    /// `(∂a)(e) = √c_e (a(e⁺) - a(e⁻))`.
    pub fn derive(&self, a: &[f64]) -> Result<DVector<f64>> {
        self.check_len(a)?;
        Ok(DVector::from_iterator(
            self.dim(),
            self.edges
                .iter()
                .zip(&self.sqrt_c)
                .map(|(e, s)| s * (a[e.head] - a[e.tail])),
        ))
    }

    /// Dense `∂` as an `edges × vertices` matrix.
    pub fn derivation_matrix(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim(), self.n_vertices);
        for (k, (e, s)) in self.edges.iter().zip(&self.sqrt_c).enumerate() {
            d[(k, e.head)] += s;
            d[(k, e.tail)] -= s;
        }
        d
    }

    /// `b̄(e) = (b(e⁺) + b(e⁻)) / 2`, the diagonal of the action of `b`.
    pub fn midpoint(&self, b: &[f64]) -> Result<DVector<f64>> {
        self.check_len(b)?;
        Ok(DVector::from_iterator(
            self.dim(),
            self.edges.iter().map(|e| 0.5 * (b[e.head] + b[e.tail])),
        ))
    }

    /// `b · ξ`.
    pub fn act(&self, b: &[f64], xi: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.midpoint(b)?.component_mul(xi))
    }

    /// `P ξ`.
    pub fn project(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.q * (self.q.tr_mul(xi))
    }

    /// `P⊥ ξ`.
    pub fn project_perp(&self, xi: &DVector<f64>) -> DVector<f64> {
        xi - self.project(xi)
    }

    /// Dense `P`.
    pub fn projection(&self) -> DMatrix<f64> {
        &self.q * self.q.transpose()
    }

    /// Dense `F = 2P - I`.
    pub fn phase(&self) -> DMatrix<f64> {
        let mut f = self.projection() * 2.0;
        for k in 0..self.dim() {
            f[(k, k)] -= 1.0;
        }
        f
    }

    /// `P⊥ M_a P` restricted to `Im ∂`, as the `edges × rank` matrix
    /// `(I - Q Qᵀ) M_a Q`. Its singular values are those of `P⊥ M_a P`.
    pub fn off_diagonal_block(&self, a: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(a)?;
        // constants commute with everything; shifting keeps them exactly zero
        let shifted: Vec<f64> = a.iter().map(|v| v - a[0]).collect();
        let abar = self.midpoint(&shifted)?;
        let mut maq = self.q.clone();
        for (mut row, s) in maq.row_iter_mut().zip(abar.iter()) {
            row *= *s;
        }
        let inner = self.q.tr_mul(&maq);
        Ok(&maq - &self.q * inner)
    }

    /// Dense `[F, M_a]`.
    pub fn commutator_matrix(&self, a: &[f64]) -> Result<DMatrix<f64>> {
        let abar = self.midpoint(a)?;
        let f = self.phase();
        let n = self.dim();
        Ok(DMatrix::from_fn(n, n, |i, j| f[(i, j)] * (abar[j] - abar[i])))
    }
}

pub fn build_module(ef: &EnergyForm) -> Result<EdgeModule> {
    build_module_from_edges(ef.level(), ef.n_vertices(), ef.edges().to_vec())
}

/// Module over an explicit edge list, e.g. with some edges reversed.
pub fn build_module_from_edges(level: usize, n: usize, edges: Vec<Edge>) -> Result<EdgeModule> {
    if n < 2 || edges.is_empty() {
        return Err(Error::Singular(format!(
            "level {level} has {n} vertices and {} edges; the module is trivial",
            edges.len()
        )));
    }
    if edges.len() > MAX_DENSE_DIM {
        return Err(Error::TooLarge { what: "edge module", size: edges.len(), max: MAX_DENSE_DIM });
    }
    if let Some(e) = edges
        .iter()
        .find(|e| e.tail >= n || e.head >= n || e.tail == e.head || !(e.conductance > 0.0))
    {
        return Err(Error::Malformed(format!("invalid edge {e:?} on {n} vertices")));
    }
    let sqrt_c: Vec<f64> = edges.iter().map(|e| e.conductance.sqrt()).collect();
    let mut d = DMatrix::<f64>::zeros(edges.len(), n - 1);
    for (k, (e, s)) in edges.iter().zip(&sqrt_c).enumerate() {
        if e.head > 0 {
            d[(k, e.head - 1)] += s;
        }
        if e.tail > 0 {
            d[(k, e.tail - 1)] -= s;
        }
    }
    let qr = d.qr();
    let r = qr.r();
    let scale = r.diagonal().amax();
    if r.diagonal().iter().any(|x| x.abs() <= 1e-12 * scale) {
        return Err(Error::Singular(format!(
            "derivation at level {level} is rank deficient"
        )));
    }
    Ok(EdgeModule {
        level,
        n_vertices: n,
        edges,
        sqrt_c,
        q: qr.q(),
    })
}

/// `∫ b dΓ(a) = Σ_e c_e b̄(e) (a(e⁺) - a(e⁻))²`.
pub fn energy_measure(em: &EdgeModule, a: &[f64], b: &[f64]) -> Result<f64> {
    let da = em.derive(a)?;
    let bbar = em.midpoint(b)?;
    Ok(da.iter().zip(bbar.iter()).map(|(d, m)| m * d * d).sum())
}
