//! Combinatorial p.c.f. self-similar structures and their level complexes.
//!
//! A structure is given by `N` contraction maps, `n0` boundary labels and a
//! list of gluings `((i, p), (j, q))` stating that the image of boundary point
//! `p` under map `i` coincides with the image of `q` under map `j`. Boundary
//! label `p` is the fixed point of map `fixed_maps[p]`, which is what lets a
//! level-`k` address be refined to a level-`m` address.
//!
//! Indices are zero-based everywhere in this module; the definition document
//! uses one-based indices and converts on ingest.

use std::fmt;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};

/// Upper bound on `N * n0`, which sizes every per-level slot table.
pub const MAX_SLOTS_PER_CELL_LEVEL: usize = 1 << 12;

/// Identification of boundary point `label_a` of cell `cell_a` with boundary
/// point `label_b` of cell `cell_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gluing {
    pub cell_a: usize,
    pub label_a: usize,
    pub cell_b: usize,
    pub label_b: usize,
}

impl Gluing {
    pub fn new(cell_a: usize, label_a: usize, cell_b: usize, label_b: usize) -> Self {
        Self {
            cell_a,
            label_a,
            cell_b,
            label_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarStructure {
    name: String,
    n_maps: usize,
    n_boundary: usize,
    gluings: Vec<Gluing>,
    fixed_maps: Vec<usize>,
}

impl SelfSimilarStructure {
    /// Validates and builds a structure. `fixed_maps` defaults to the identity
    /// assignment (label `p` fixed by map `p`), which needs `n0 <= N`.
    pub fn new(
        name: impl Into<String>,
        n_maps: usize,
        n_boundary: usize,
        gluings: Vec<Gluing>,
        fixed_maps: Option<Vec<usize>>,
    ) -> Result<Self> {
        if n_maps < 2 {
            return Err(Error::Malformed(format!("N must be at least 2, got {n_maps}")));
        }
        if n_boundary < 1 {
            return Err(Error::Malformed("n0 must be at least 1".into()));
        }
        if n_maps.saturating_mul(n_boundary) > MAX_SLOTS_PER_CELL_LEVEL {
            return Err(Error::Malformed(format!(
                "N * n0 = {} exceeds the supported maximum {}",
                n_maps.saturating_mul(n_boundary),
                MAX_SLOTS_PER_CELL_LEVEL
            )));
        }
        for g in &gluings {
            for (cell, label) in [(g.cell_a, g.label_a), (g.cell_b, g.label_b)] {
                if cell >= n_maps {
                    return Err(Error::OutOfRange {
                        what: "cell",
                        index: cell as i64 + 1,
                        max: n_maps,
                    });
                }
                if label >= n_boundary {
                    return Err(Error::OutOfRange {
                        what: "boundary label",
                        index: label as i64 + 1,
                        max: n_boundary,
                    });
                }
            }
            if g.cell_a == g.cell_b {
                return Err(Error::Malformed(format!(
                    "gluing joins cell {} to itself",
                    g.cell_a + 1
                )));
            }
        }
        let fixed_maps = match fixed_maps {
            Some(f) => {
                if f.len() != n_boundary {
                    return Err(Error::Malformed(format!(
                        "fixed_maps has {} entries, expected n0 = {n_boundary}",
                        f.len()
                    )));
                }
                if let Some(&bad) = f.iter().find(|&&i| i >= n_maps) {
                    return Err(Error::OutOfRange {
                        what: "fixed map",
                        index: bad as i64 + 1,
                        max: n_maps,
                    });
                }
                f
            }
            None => {
                if n_boundary > n_maps {
                    return Err(Error::Malformed(
                        "fixed_maps is required when n0 > N".into(),
                    ));
                }
                (0..n_boundary).collect()
            }
        };

        let s = Self {
            name: name.into(),
            n_maps,
            n_boundary,
            gluings,
            fixed_maps,
        };
        s.check_level_one()?;
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_maps(&self) -> usize {
        self.n_maps
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn fixed_maps(&self) -> &[usize] {
        &self.fixed_maps
    }

    fn check_level_one(&self) -> Result<()> {
        let n0 = self.n_boundary;
        let mut slots = UnionFind::<usize>::new(self.n_maps * n0);
        for g in &self.gluings {
            slots.union(g.cell_a * n0 + g.label_a, g.cell_b * n0 + g.label_b);
        }
        for cell in 0..self.n_maps {
            for p in 0..n0 {
                for q in p + 1..n0 {
                    if slots.equiv(cell * n0 + p, cell * n0 + q) {
                        return Err(Error::DegenerateCell {
                            cell: cell + 1,
                            p: p + 1,
                            q: q + 1,
                        });
                    }
                }
            }
        }
        let mut cells = UnionFind::<usize>::new(self.n_maps);
        for g in &self.gluings {
            cells.union(g.cell_a, g.cell_b);
        }
        let mut roots: Vec<usize> = (0..self.n_maps).map(|i| cells.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() > 1 {
            return Err(Error::Disconnected {
                components: roots.len(),
            });
        }
        Ok(())
    }

    /// Index of the word `w · σ(label)^depth`, i.e. the address of the same
    /// point `depth` levels finer.
    fn refine_word(&self, word: usize, label: usize, depth: u32) -> usize {
        let n = self.n_maps;
        let f = self.fixed_maps[label];
        let scale = n.pow(depth);
        // f * (1 + N + ... + N^(depth-1))
        let tail = f * (scale - 1) / (n - 1);
        word * scale + tail
    }
}

/// A word `w = w_1 … w_m` over the alphabet `{0, …, N-1}`; `F_w = F_{w_1} ∘ … ∘ F_{w_m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    /// Decodes the lexicographic index of a length-`len` word.
    pub fn from_index(mut index: usize, len: usize, n_maps: usize) -> Self {
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = index % n_maps;
            index /= n_maps;
        }
        Word(letters)
    }

    pub fn index(&self, n_maps: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * n_maps + l)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.0 {
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

/// The vertex set `V_m` with its cell incidence.
///
/// Vertices are numbered by the lexicographically least address `(w, p)` in
/// their identification class; cells are stored in lexicographic word order.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelComplex {
    level: usize,
    n_maps: usize,
    n_boundary: usize,
    cells: Vec<usize>,
    addresses: Vec<(usize, usize)>,
    boundary: Vec<usize>,
    fixed_maps: Vec<usize>,
}

impl LevelComplex {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n_maps(&self) -> usize {
        self.n_maps
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn n_vertices(&self) -> usize {
        self.addresses.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / self.n_boundary
    }

    /// Vertex tuple of the cell with lexicographic index `word`.
    pub fn cell(&self, word: usize) -> &[usize] {
        let n0 = self.n_boundary;
        &self.cells[word * n0..(word + 1) * n0]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.n_boundary)
    }

    pub fn word(&self, index: usize) -> Word {
        Word::from_index(index, self.level, self.n_maps)
    }

    /// Canonical address `(word, label)` of a vertex.
    pub fn address(&self, vertex: usize) -> (Word, usize) {
        let (w, p) = self.addresses[vertex];
        (self.word(w), p)
    }

    /// Vertices realizing `V_0`, indexed by boundary label.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, vertex: usize) -> bool {
        self.boundary.contains(&vertex)
    }

    /// Vertices of `V_m` not in `V_0`, ascending.
    pub fn interior(&self) -> Vec<usize> {
        let mut mask = vec![true; self.n_vertices()];
        for &b in &self.boundary {
            mask[b] = false;
        }
        (0..self.n_vertices()).filter(|&v| mask[v]).collect()
    }

    /// Embedding `V_m → V_{m+1}` by address refinement.
    pub fn refine_map(&self, finer: &LevelComplex) -> Result<Vec<usize>> {
        if finer.level != self.level + 1 {
            return Err(Error::LevelMismatch(self.level + 1, finer.level));
        }
        Ok(self
            .addresses
            .iter()
            .map(|&(w, p)| finer.cell(w * self.n_maps + self.fixed_maps[p])[p])
            .collect())
    }

    /// For each level-`m` vertex, the level-`(m+1)` vertex it lands on under
    /// `F_i`, i.e. the map realizing `u ↦ u ∘ F_i`.
    pub fn child_map(&self, finer: &LevelComplex, map: usize) -> Result<Vec<usize>> {
        if finer.level != self.level + 1 {
            return Err(Error::LevelMismatch(self.level + 1, finer.level));
        }
        let offset = map * self.n_cells();
        let mut out = vec![usize::MAX; self.n_vertices()];
        for (w, cell) in self.cells().enumerate() {
            for (p, &v) in cell.iter().enumerate() {
                out[v] = finer.cell(offset + w)[p];
            }
        }
        Ok(out)
    }
}

/// Materializes `V_m` and the cell tuples for words of length `m`.
///
/// Identification classes are the union–find closure of the gluings applied
/// under every prefix word: `F_{wi}(p) ~ F_{wj}(q)`.
pub fn build_level(s: &SelfSimilarStructure, m: usize) -> LevelComplex {
    let n = s.n_maps;
    let n0 = s.n_boundary;
    let n_words = n.pow(m as u32);
    let n_slots = n_words * n0;

    let mut uf = UnionFind::<usize>::new(n_slots);
    for k in 0..m {
        let depth = (m - k - 1) as u32;
        for prefix in 0..n.pow(k as u32) {
            for g in &s.gluings {
                let wa = s.refine_word(prefix * n + g.cell_a, g.label_a, depth);
                let wb = s.refine_word(prefix * n + g.cell_b, g.label_b, depth);
                uf.union(wa * n0 + g.label_a, wb * n0 + g.label_b);
            }
        }
    }

    let mut least = vec![usize::MAX; n_slots];
    for slot in 0..n_slots {
        let root = uf.find(slot);
        if least[root] == usize::MAX {
            least[root] = slot;
        }
    }
    let mut vertex_of_root = vec![usize::MAX; n_slots];
    let mut addresses = Vec::new();
    let mut cells = vec![0; n_slots];
    for slot in 0..n_slots {
        let root = uf.find(slot);
        if least[root] == slot {
            vertex_of_root[root] = addresses.len();
            addresses.push((slot / n0, slot % n0));
        }
        cells[slot] = vertex_of_root[root];
    }

    let boundary = (0..n0)
        .map(|p| {
            let w = s.refine_word(0, p, m as u32);
            cells[w * n0 + p]
        })
        .collect();

    LevelComplex {
        level: m,
        n_maps: n,
        n_boundary: n0,
        cells,
        addresses,
        boundary,
        fixed_maps: s.fixed_maps.clone(),
    }
}
