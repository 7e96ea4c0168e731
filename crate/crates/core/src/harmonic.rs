//! Level-`m` energy forms built from a harmonic structure `(D, r)`.
//!
//! `E^(m)[u] = Σ_{|w|=m} r_w⁻¹ E_D[u ∘ F_w]`, assembled as a weighted edge list.
//! Edges are oriented by boundary-label order inside the cell that produced
//! them, so the edges of cell `i·w` at level `m+1` line up with the edges of
//! cell `w` at level `m`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{build_level, LevelComplex, SelfSimilarStructure};

/// Default absolute max-norm tolerance for [`verify_harmonic`].
pub const DEFAULT_HARMONIC_TOL: f64 = 1e-9;

/// Boundary Laplacian `D` (stored as the nonnegative form matrix, i.e.
/// `E_D[u] = uᵀ D u`) together with resistance weights `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicStructure {
    d: DMatrix<f64>,
    r: Vec<f64>,
}

impl HarmonicStructure {
    pub fn new(d: DMatrix<f64>, r: Vec<f64>) -> Result<Self> {
        let n0 = d.nrows();
        if d.ncols() != n0 || n0 == 0 {
            return Err(Error::InvalidHarmonic(format!(
                "D must be square and nonempty, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        if d.iter().any(|x| !x.is_finite()) || r.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidHarmonic("non-finite entry".into()));
        }
        let scale = d.amax().max(1.0);
        for i in 0..n0 {
            for j in 0..n0 {
                if (d[(i, j)] - d[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidHarmonic(format!(
                        "D not symmetric: D[{},{}] = {} != D[{},{}] = {}",
                        i + 1,
                        j + 1,
                        d[(i, j)],
                        j + 1,
                        i + 1,
                        d[(j, i)]
                    )));
                }
                if i != j && d[(i, j)] > 0.0 {
                    return Err(Error::InvalidHarmonic(format!(
                        "off-diagonal D[{},{}] = {} > 0",
                        i + 1,
                        j + 1,
                        d[(i, j)]
                    )));
                }
            }
        }
        for j in 0..n0 {
            let s: f64 = d.column(j).sum();
            if s.abs() > 1e-10 * scale {
                return Err(Error::InvalidHarmonic(format!(
                    "column {} of D sums to {s}, expected 0",
                    j + 1
                )));
            }
        }
        if n0 > 1 {
            let mut ev: Vec<f64> = SymmetricEigen::new(d.clone()).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            if ev[0] < -1e-10 * scale {
                return Err(Error::InvalidHarmonic(format!(
                    "D not positive semidefinite: smallest eigenvalue {}",
                    ev[0]
                )));
            }
            if ev[1] <= 1e-10 * scale {
                return Err(Error::InvalidHarmonic(format!(
                    "kernel of D larger than the constants: second eigenvalue {}",
                    ev[1]
                )));
            }
        }
        if r.is_empty() {
            return Err(Error::InvalidHarmonic("r is empty".into()));
        }
        for (i, &ri) in r.iter().enumerate() {
            if !(ri > 0.0 && ri < 1.0) {
                return Err(Error::InvalidHarmonic(format!(
                    "regularity requires 0 < r_{} < 1, got {ri}",
                    i + 1
                )));
            }
        }
        Ok(Self { d, r })
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn n_boundary(&self) -> usize {
        self.d.nrows()
    }

    pub fn check_compatible(&self, s: &SelfSimilarStructure) -> Result<()> {
        if self.d.nrows() != s.n_boundary() {
            return Err(Error::InvalidHarmonic(format!(
                "D is {}x{} but n0 = {}",
                self.d.nrows(),
                self.d.ncols(),
                s.n_boundary()
            )));
        }
        if self.r.len() != s.n_maps() {
            return Err(Error::InvalidHarmonic(format!(
                "r has {} entries but N = {}",
                self.r.len(),
                s.n_maps()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    /// `e⁻`
    pub tail: usize,
    /// `e⁺`
    pub head: usize,
    pub conductance: f64,
    /// Lexicographic index of the cell that produced the edge.
    pub cell: usize,
}

/// Graph energy `E^(m)` on the vertices of a level complex.
#[derive(Debug, Clone)]
pub struct EnergyForm {
    level: usize,
    n_vertices: usize,
    edges: Vec<Edge>,
    cell_scales: Vec<f64>,
}

impl EnergyForm {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `r_w` for each word of length `m`, lexicographic order.
    pub fn cell_scales(&self) -> &[f64] {
        &self.cell_scales
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let du = u[e.head] - u[e.tail];
                e.conductance * du * du
            })
            .sum()
    }

    /// Polarized form `E(u, v)`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| e.conductance * (u[e.head] - u[e.tail]) * (v[e.head] - v[e.tail]))
            .sum()
    }

    /// Dense `H_m` with `uᵀ H u = E^(m)[u]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n_vertices, self.n_vertices);
        for e in &self.edges {
            let c = e.conductance;
            h[(e.tail, e.tail)] += c;
            h[(e.head, e.head)] += c;
            h[(e.tail, e.head)] -= c;
            h[(e.head, e.tail)] -= c;
        }
        h
    }
}

/// Assembles `E^(m)` on `complex`: each cell contributes `D / r_w` pushed
/// onto its vertex tuple.
pub fn assemble_energy(complex: &LevelComplex, hs: &HarmonicStructure) -> Result<EnergyForm> {
    let n0 = complex.n_boundary();
    if hs.d.nrows() != n0 || hs.r.len() != complex.n_maps() {
        return Err(Error::InvalidHarmonic(format!(
            "harmonic structure is for n0 = {}, N = {}; complex has n0 = {}, N = {}",
            hs.d.nrows(),
            hs.r.len(),
            n0,
            complex.n_maps()
        )));
    }
    let mut scales = vec![1.0];
    for _ in 0..complex.level() {
        scales = scales
            .iter()
            .flat_map(|&s| hs.r.iter().map(move |&ri| s * ri))
            .collect();
    }

    let mut edges: Vec<Edge> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for (w, cell) in complex.cells().enumerate() {
        for p in 0..n0 {
            for q in p + 1..n0 {
                let coupling = -hs.d[(p, q)];
                if coupling <= 0.0 {
                    continue;
                }
                let (tail, head) = (cell[p], cell[q]);
                if tail == head {
                    continue;
                }
                let c = coupling / scales[w];
                let key = (tail.min(head), tail.max(head));
                match index.get(&key) {
                    Some(&k) => edges[k].conductance += c,
                    None => {
                        index.insert(key, edges.len());
                        edges.push(Edge {
                            tail,
                            head,
                            conductance: c,
                            cell: w,
                        });
                    }
                }
            }
        }
    }
    Ok(EnergyForm {
        level: complex.level(),
        n_vertices: complex.n_vertices(),
        edges,
        cell_scales: scales,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicReport {
    pub pass: bool,
    pub deviation: f64,
    pub tol: f64,
}

/// Splits `h` into the blocks over `fixed` and `free` index sets and returns
/// the Schur complement `H_ff - H_fi H_ii⁻¹ H_if` on `fixed`.
fn schur_complement(h: &DMatrix<f64>, fixed: &[usize], free: &[usize]) -> Result<DMatrix<f64>> {
    let hbb = h.select_rows(fixed).select_columns(fixed);
    if free.is_empty() {
        return Ok(hbb);
    }
    let hbi = h.select_rows(fixed).select_columns(free);
    let hii = h.select_rows(free).select_columns(free);
    let chol = hii
        .cholesky()
        .ok_or_else(|| Error::Singular("interior block is not positive definite".into()))?;
    let x = chol.solve(&hbi.transpose());
    Ok(hbb - hbi * x)
}

/// Schur complement of `H_1` onto `V_0`, compared against `D`.
pub fn verify_harmonic(
    s: &SelfSimilarStructure,
    hs: &HarmonicStructure,
    tol: f64,
) -> Result<HarmonicReport> {
    hs.check_compatible(s)?;
    let l1 = build_level(s, 1);
    let h = assemble_energy(&l1, hs)?.matrix();
    let reduced = schur_complement(&h, l1.boundary(), &l1.interior())?;
    let deviation = (reduced - &hs.d).amax();
    Ok(HarmonicReport {
        pass: deviation <= tol,
        deviation,
        tol,
    })
}

/// Minimizer of `E^(m+1)` among extensions of `u` from `V_m`, computed by a
/// direct solve of the interior system.
pub fn harmonic_extension(
    s: &SelfSimilarStructure,
    hs: &HarmonicStructure,
    m: usize,
    u: &[f64],
) -> Result<Vec<f64>> {
    hs.check_compatible(s)?;
    let coarse = build_level(s, m);
    let fine = build_level(s, m + 1);
    if u.len() != coarse.n_vertices() {
        return Err(Error::InvalidFunction(format!(
            "expected {} values on V_{m}, got {}",
            coarse.n_vertices(),
            u.len()
        )));
    }
    let form = assemble_energy(&fine, hs)?;
    let embed = coarse.refine_map(&fine)?;
    extend_by_solve(&form, &embed, u)
}

/// Harmonic extension of values prescribed on `fixed` (a subset of the form's
/// vertices) by solving `H_ii x = -H_if u`.
pub fn extend_by_solve(form: &EnergyForm, fixed: &[usize], u: &[f64]) -> Result<Vec<f64>> {
    let n = form.n_vertices();
    let mut is_fixed = vec![false; n];
    let mut out = vec![0.0; n];
    for (&v, &x) in fixed.iter().zip(u) {
        is_fixed[v] = true;
        out[v] = x;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !is_fixed[v]).collect();
    if free.is_empty() {
        return Ok(out);
    }
    let h = form.matrix();
    let hii = h.select_rows(&free).select_columns(&free);
    let hif = h.select_rows(&free).select_columns(fixed);
    let rhs = -(hif * DVector::from_column_slice(u));
    let x = hii
        .cholesky()
        .ok_or_else(|| Error::Singular("interior block is not positive definite".into()))?
        .solve(&rhs);
    for (&v, &xv) in free.iter().zip(x.iter()) {
        out[v] = xv;
    }
    Ok(out)
}

/// Harmonic extension matrices `A_i`: `(A_i)_{qp}` is the value at the `q`-th
/// boundary point of cell `i` of the harmonic extension of the indicator of
/// boundary label `p`.
pub fn extension_matrices(
    s: &SelfSimilarStructure,
    hs: &HarmonicStructure,
) -> Result<Vec<DMatrix<f64>>> {
    hs.check_compatible(s)?;
    let n0 = s.n_boundary();
    let l1 = build_level(s, 1);
    let form = assemble_energy(&l1, hs)?;
    let mut a = vec![DMatrix::zeros(n0, n0); s.n_maps()];
    for p in 0..n0 {
        let mut e = vec![0.0; n0];
        e[p] = 1.0;
        let h = extend_by_solve(&form, l1.boundary(), &e)?;
        for (i, ai) in a.iter_mut().enumerate() {
            for q in 0..n0 {
                ai[(q, p)] = h[l1.cell(i)[q]];
            }
        }
    }
    Ok(a)
}

/// Cell-local harmonic extension: boundary values of cell `w·i` are
/// `A_i · (values on cell w)`.
#[derive(Debug, Clone)]
pub struct CellExtender {
    a: Vec<DMatrix<f64>>,
}

impl CellExtender {
    pub fn new(s: &SelfSimilarStructure, hs: &HarmonicStructure) -> Result<Self> {
        Ok(Self {
            a: extension_matrices(s, hs)?,
        })
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.a
    }

    /// Extends `u` from `coarse` to `fine` (one level finer).
    pub fn extend(&self, coarse: &LevelComplex, fine: &LevelComplex, u: &[f64]) -> Result<Vec<f64>> {
        if fine.level() != coarse.level() + 1 {
            return Err(Error::LevelMismatch(coarse.level() + 1, fine.level()));
        }
        let n = coarse.n_maps();
        let n0 = coarse.n_boundary();
        let mut out = vec![0.0; fine.n_vertices()];
        let mut local = DVector::zeros(n0);
        for (w, cell) in coarse.cells().enumerate() {
            for (p, &v) in cell.iter().enumerate() {
                local[p] = u[v];
            }
            for (i, ai) in self.a.iter().enumerate() {
                let child = ai * &local;
                for (q, &v) in fine.cell(w * n + i).iter().enumerate() {
                    out[v] = child[q];
                }
            }
        }
        Ok(out)
    }
}
