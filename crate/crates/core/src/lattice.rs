//! Periodic lattices as offset-generated graphs.
//!
//! A lattice is described by `d` basis vectors spanning a Z-module, `s` cell
//! points `p_j`, and a finite set of edge generators `(j, k, m)` meaning that
//! `p_j + v(n)` is adjacent to `p_k + v(n + m)` for every translation `n`.
//! Vertices are addressed by [`VertexId`] = `(cell, n)`; cell indices are
//! zero-based throughout the crate.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex `p_cell + v(n)` of a periodic lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub cell: usize,
    pub n: Vec<i64>,
}

impl VertexId {
    pub fn new(cell: usize, n: impl Into<Vec<i64>>) -> Self {
        Self { cell, n: n.into() }
    }

    pub fn origin(cell: usize, dim: usize) -> Self {
        Self {
            cell,
            n: vec![0; dim],
        }
    }

    /// Euclidean norm of the translation index.
    pub fn index_norm(&self) -> f64 {
        (self.n.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
    }

    /// Same cell, translation index shifted by `m`.
    pub fn shifted(&self, m: &[i64]) -> Self {
        Self {
            cell: self.cell,
            n: self.n.iter().zip(m).map(|(a, b)| a + b).collect(),
        }
    }

    fn with_cell_shift(&self, cell: usize, m: &[i64]) -> Self {
        Self {
            cell,
            n: self.n.iter().zip(m).map(|(a, b)| a + b).collect(),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.cell)?;
        for (i, x) in self.n.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {x}")?;
        }
        write!(f, ")")
    }
}

/// Edge generator `(from, to, shift)`: `p_from + v(n) ~ p_to + v(n + shift)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeGenerator {
    pub from: usize,
    pub to: usize,
    pub shift: Vec<i64>,
}

impl EdgeGenerator {
    pub fn new(from: usize, to: usize, shift: impl Into<Vec<i64>>) -> Self {
        Self {
            from,
            to,
            shift: shift.into(),
        }
    }

    fn reversed(&self) -> Self {
        Self {
            from: self.to,
            to: self.from,
            shift: self.shift.iter().map(|x| -x).collect(),
        }
    }
}

/// Serialized form of a [`LatticeSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub name: String,
    /// Period dimension `d`.
    pub d: usize,
    /// Ambient realization dimension `D >= d`.
    pub ambient_dim: usize,
    pub basis: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub edge_generators: Vec<EdgeGenerator>,
}

/// A validated periodic lattice. Immutable after construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LatticeDocument", into = "LatticeDocument")]
pub struct LatticeSpec {
    doc: LatticeDocument,
    /// Per cell: outgoing `(to, shift)` pairs, in generator order.
    adjacency: Vec<Vec<(usize, Vec<i64>)>>,
}

impl PartialEq for LatticeSpec {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

impl From<LatticeSpec> for LatticeDocument {
    fn from(spec: LatticeSpec) -> Self {
        spec.doc
    }
}

impl TryFrom<LatticeDocument> for LatticeSpec {
    type Error = Error;

    fn try_from(doc: LatticeDocument) -> Result<Self> {
        LatticeSpec::new(doc)
    }
}

impl LatticeSpec {
    /// Validates the document and builds the adjacency tables.
    pub fn new(mut doc: LatticeDocument) -> Result<Self> {
        let d = doc.d;
        let big_d = doc.ambient_dim;
        if d == 0 || big_d < d {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= d <= D, got d = {d}, D = {big_d}"
            )));
        }
        if doc.basis.len() != d || doc.basis.iter().any(|b| b.len() != big_d) {
            return Err(Error::InvalidSpec(format!(
                "basis must hold {d} vectors of length {big_d}"
            )));
        }
        let s = doc.points.len();
        if s == 0 || doc.points.iter().any(|p| p.len() != big_d) {
            return Err(Error::InvalidSpec(format!(
                "need at least one cell point of length {big_d}"
            )));
        }

        let mut seen = HashSet::new();
        for g in &doc.edge_generators {
            if g.from >= s || g.to >= s {
                return Err(Error::InvalidSpec(format!(
                    "generator {g:?} references a cell outside 0..{s}"
                )));
            }
            if g.shift.len() != d {
                return Err(Error::InvalidSpec(format!(
                    "generator {g:?} has a shift of the wrong dimension"
                )));
            }
            if g.from == g.to && g.shift.iter().all(|&x| x == 0) {
                return Err(Error::InvalidSpec(format!("generator {g:?} is a loop")));
            }
            if !seen.insert(g.clone()) {
                return Err(Error::InvalidSpec(format!("duplicate generator {g:?}")));
            }
        }
        for g in &doc.edge_generators {
            if !seen.contains(&g.reversed()) {
                return Err(Error::InvalidSpec(format!(
                    "generator {g:?} has no reverse partner"
                )));
            }
        }

        check_distinct_cosets(&doc)?;

        let mut adjacency = vec![Vec::new(); s];
        for g in &doc.edge_generators {
            adjacency[g.from].push((g.to, g.shift.clone()));
        }
        if let Some(j) = adjacency.iter().position(|a| a.is_empty()) {
            return Err(Error::InvalidSpec(format!("cell point {j} has degree 0")));
        }
        doc.edge_generators.sort();
        let spec = Self { doc, adjacency };
        spec.check_connected()?;
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.doc.name
    }

    pub fn dim(&self) -> usize {
        self.doc.d
    }

    pub fn ambient_dim(&self) -> usize {
        self.doc.ambient_dim
    }

    pub fn num_cells(&self) -> usize {
        self.doc.points.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.doc.basis
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.doc.points
    }

    pub fn generators(&self) -> &[EdgeGenerator] {
        &self.doc.edge_generators
    }

    pub fn document(&self) -> &LatticeDocument {
        &self.doc
    }

    pub fn degree(&self, cell: usize) -> usize {
        self.adjacency[cell].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Outgoing `(to, shift)` pairs of a cell point.
    pub fn cell_adjacency(&self, cell: usize) -> &[(usize, Vec<i64>)] {
        &self.adjacency[cell]
    }

    pub fn validate_vertex(&self, v: &VertexId) -> Result<()> {
        if v.cell >= self.num_cells() {
            return Err(Error::InvalidCell {
                cell: v.cell,
                cells: self.num_cells(),
            });
        }
        if v.n.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.n.len(),
            });
        }
        Ok(())
    }

    /// The neighbour set `N_v`, in generator order.
    pub fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        self.validate_vertex(v)?;
        Ok(self.neighbors_unchecked(v))
    }

    pub(crate) fn neighbors_unchecked(&self, v: &VertexId) -> Vec<VertexId> {
        self.adjacency[v.cell]
            .iter()
            .map(|(to, m)| v.with_cell_shift(*to, m))
            .collect()
    }

    pub fn are_adjacent(&self, v: &VertexId, w: &VertexId) -> bool {
        self.adjacency[v.cell].iter().any(|(to, m)| {
            *to == w.cell && v.n.iter().zip(m).zip(&w.n).all(|((a, b), c)| a + b == *c)
        })
    }

    /// Position `p_cell + sum_i n_i v_i` in the ambient space.
    pub fn realize(&self, v: &VertexId) -> Result<Vec<f64>> {
        self.validate_vertex(v)?;
        let mut x = self.doc.points[v.cell].clone();
        for (ni, bi) in v.n.iter().zip(&self.doc.basis) {
            for (xk, bk) in x.iter_mut().zip(bi) {
                *xk += *ni as f64 * bk;
            }
        }
        Ok(x)
    }

    /// Realized length of every generator, one entry per generator.
    pub fn edge_lengths(&self) -> Vec<f64> {
        let d = self.dim();
        self.doc
            .edge_generators
            .iter()
            .map(|g| {
                let a = self.realize(&VertexId::origin(g.from, d)).expect("valid");
                let b = self
                    .realize(&VertexId::new(g.to, g.shift.clone()))
                    .expect("valid");
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// All vertices with `|n| <= r` (Euclidean norm of the translation index),
    /// every cell, sorted lexicographically in `(cell, n)`.
    pub fn box_vertices(&self, r: f64) -> Vec<VertexId> {
        if !(r >= 0.0) {
            return Vec::new();
        }
        let limit = r.floor() as i64;
        let r2 = r * r * (1.0 + 1e-12);
        let mut out = Vec::new();
        for n in integer_cube(self.dim(), limit) {
            let norm2: i64 = n.iter().map(|x| x * x).sum();
            if (norm2 as f64) <= r2 {
                for cell in 0..self.num_cells() {
                    out.push(VertexId::new(cell, n.clone()));
                }
            }
        }
        out.sort();
        out
    }

    /// All vertices with `max_i |n_i| <= r`, sorted lexicographically.
    pub fn cube_vertices(&self, r: i64) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = integer_cube(self.dim(), r.max(0))
            .into_iter()
            .flat_map(|n| (0..self.num_cells()).map(move |c| VertexId::new(c, n.clone())))
            .collect();
        out.sort();
        out
    }

    /// Connectivity is checked on a sample region: a search confined to
    /// `max |n_i| <= 4` must reach every vertex with `max |n_i| <= 1`.
    fn check_connected(&self) -> Result<()> {
        let d = self.dim();
        let inside = |v: &VertexId| v.n.iter().all(|x| x.abs() <= 4);
        let start = VertexId::origin(0, d);
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors_unchecked(&v) {
                if inside(&w) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        match self
            .cube_vertices(1)
            .into_iter()
            .find(|v| !seen.contains(v))
        {
            Some(v) => Err(Error::InvalidSpec(format!(
                "lattice graph is not connected ({v} unreachable from the origin)"
            ))),
            None => Ok(()),
        }
    }
}

/// `p_j - p_k` must not lie in the Z-span of the basis for `j != k`.
fn check_distinct_cosets(doc: &LatticeDocument) -> Result<()> {
    let d = doc.d;
    let big_d = doc.ambient_dim;
    let basis = DMatrix::from_fn(big_d, d, |r, c| doc.basis[c][r]);
    let gram = basis.transpose() * &basis;
    let gram_inv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidSpec("basis vectors are linearly dependent".to_string()))?;
    let s = doc.points.len();
    for j in 0..s {
        for k in (j + 1)..s {
            let diff = DVector::from_fn(big_d, |r, _| doc.points[j][r] - doc.points[k][r]);
            let coeffs = &gram_inv * basis.transpose() * &diff;
            let residual = (&basis * &coeffs - &diff).norm();
            let integral = coeffs.iter().all(|c| (c - c.round()).abs() < 1e-9);
            if residual < 1e-9 && integral {
                return Err(Error::InvalidSpec(format!(
                    "cell points {j} and {k} differ by a lattice vector"
                )));
            }
        }
    }
    Ok(())
}

/// All integer vectors in `[-r, r]^d`, lexicographic.
pub(crate) fn integer_cube(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-r..=r).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// The builtin lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinLattice {
    Square,
    Triangular,
    Hexagonal,
    Kagome,
    Ladder,
}

impl BuiltinLattice {
    pub const ALL: [BuiltinLattice; 5] = [
        BuiltinLattice::Square,
        BuiltinLattice::Triangular,
        BuiltinLattice::Hexagonal,
        BuiltinLattice::Kagome,
        BuiltinLattice::Ladder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinLattice::Square => "square",
            BuiltinLattice::Triangular => "triangular",
            BuiltinLattice::Hexagonal => "hexagonal",
            BuiltinLattice::Kagome => "kagome",
            BuiltinLattice::Ladder => "ladder",
        }
    }

    /// Whether the period dimension is a free parameter.
    pub fn has_free_dimension(self) -> bool {
        matches!(self, BuiltinLattice::Square | BuiltinLattice::Ladder)
    }

    /// The dimension actually used for a requested `d`.
    pub fn effective_dim(self, d: usize) -> usize {
        if self.has_free_dimension() {
            d
        } else {
            2
        }
    }
}

impl fmt::Display for BuiltinLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuiltinLattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(BuiltinLattice::Square),
            "triangular" => Ok(BuiltinLattice::Triangular),
            "hexagonal" | "honeycomb" => Ok(BuiltinLattice::Hexagonal),
            "kagome" => Ok(BuiltinLattice::Kagome),
            "ladder" => Ok(BuiltinLattice::Ladder),
            _ => Err(Error::UnknownLattice(s.to_string())),
        }
    }
}

fn unit(d: usize, i: usize) -> Vec<i64> {
    let mut e = vec![0; d];
    e[i] = 1;
    e
}

fn neg(v: &[i64]) -> Vec<i64> {
    v.iter().map(|x| -x).collect()
}

/// Builds one of the builtin lattices. `d` is ignored for the planar
/// lattices (triangular, hexagonal, kagome).
pub fn builtin_lattice(kind: BuiltinLattice, d: usize) -> Result<LatticeSpec> {
    let s3 = 3f64.sqrt();
    let doc = match kind {
        BuiltinLattice::Square | BuiltinLattice::Ladder if d < 2 => {
            return Err(Error::DimensionTooSmall {
                name: kind.to_string(),
                d,
            })
        }
        BuiltinLattice::Square => {
            let basis = (0..d)
                .map(|i| (0..d).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
                .collect();
            let mut gens = Vec::new();
            for i in 0..d {
                gens.push(EdgeGenerator::new(0, 0, unit(d, i)));
                gens.push(EdgeGenerator::new(0, 0, neg(&unit(d, i))));
            }
            LatticeDocument {
                name: "square".into(),
                d,
                ambient_dim: d,
                basis,
                points: vec![vec![0.0; d]],
                edge_generators: gens,
            }
        }
        BuiltinLattice::Triangular => {
            // Neighbours x + omega^l, l = 0..5, in the (v1, v2) = (1, omega) basis.
            let steps: [[i64; 2]; 6] = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];
            LatticeDocument {
                name: "triangular".into(),
                d: 2,
                ambient_dim: 2,
                basis: vec![vec![1.0, 0.0], vec![0.5, s3 / 2.0]],
                points: vec![vec![0.0, 0.0]],
                edge_generators: steps
                    .iter()
                    .map(|m| EdgeGenerator::new(0, 0, m.to_vec()))
                    .collect(),
            }
        }
        BuiltinLattice::Hexagonal => {
            let forward: [[i64; 2]; 3] = [[0, 0], [-1, 0], [0, -1]];
            let mut gens = Vec::new();
            for m in forward {
                gens.push(EdgeGenerator::new(0, 1, m.to_vec()));
                gens.push(EdgeGenerator::new(1, 0, neg(&m)));
            }
            LatticeDocument {
                name: "hexagonal".into(),
                d: 2,
                ambient_dim: 2,
                basis: vec![vec![1.5, -s3 / 2.0], vec![1.5, s3 / 2.0]],
                points: vec![vec![1.0, 0.0], vec![2.0, 0.0]],
                edge_generators: gens,
            }
        }
        BuiltinLattice::Kagome => {
            let forward: [(usize, usize, [i64; 2]); 6] = [
                (0, 1, [0, 0]),
                (0, 1, [-1, 1]),
                (0, 2, [0, 0]),
                (0, 2, [-1, 0]),
                (1, 2, [0, 0]),
                (1, 2, [0, -1]),
            ];
            let mut gens = Vec::new();
            for (j, k, m) in forward {
                gens.push(EdgeGenerator::new(j, k, m.to_vec()));
                gens.push(EdgeGenerator::new(k, j, neg(&m)));
            }
            LatticeDocument {
                name: "kagome".into(),
                d: 2,
                ambient_dim: 2,
                basis: vec![vec![0.5, s3 / 2.0], vec![-0.5, s3 / 2.0]],
                points: vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.25, s3 / 4.0]],
                edge_generators: gens,
            }
        }
        BuiltinLattice::Ladder => {
            let big_d = d + 1;
            let basis = (0..d)
                .map(|i| (0..big_d).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
                .collect();
            let mut top = vec![0.0; big_d];
            top[d] = 1.0;
            let mut gens = Vec::new();
            for cell in 0..2 {
                for i in 0..d {
                    gens.push(EdgeGenerator::new(cell, cell, unit(d, i)));
                    gens.push(EdgeGenerator::new(cell, cell, neg(&unit(d, i))));
                }
            }
            gens.push(EdgeGenerator::new(0, 1, vec![0; d]));
            gens.push(EdgeGenerator::new(1, 0, vec![0; d]));
            LatticeDocument {
                name: "ladder".into(),
                d,
                ambient_dim: big_d,
                basis,
                points: vec![vec![0.0; big_d], top],
                edge_generators: gens,
            }
        }
    };
    LatticeSpec::new(doc)
}

/// Finitely supported complex function on the vertices of a lattice.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeFunction {
    values: BTreeMap<VertexId, Complex64>,
}

impl LatticeFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &VertexId) -> Complex64 {
        self.values.get(v).copied().unwrap_or_default()
    }

    /// Stores `value`; zero values are dropped from the support.
    pub fn set(&mut self, v: VertexId, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.values.remove(&v);
        } else {
            self.values.insert(v, value);
        }
    }

    pub fn add(&mut self, v: VertexId, value: Complex64) {
        let cur = self.get(&v);
        self.set(v, cur + value);
    }

    /// Component view `f_j(n)`.
    pub fn component(&self, cell: usize, n: &[i64]) -> Complex64 {
        self.get(&VertexId::new(cell, n.to_vec()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &Complex64)> {
        self.values.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &VertexId> {
        self.values.keys()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values
            .values()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|n|` over the support (0 for the zero function).
    pub fn support_radius(&self) -> f64 {
        self.values
            .keys()
            .map(VertexId::index_norm)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = Self::new();
        for (v, z) in &self.values {
            out.set(v.clone(), a * z);
        }
        out
    }

    pub fn linear_combination(a: Complex64, f: &Self, b: Complex64, g: &Self) -> Self {
        let mut out = f.scaled(a);
        for (v, z) in &g.values {
            out.add(v.clone(), b * z);
        }
        out
    }
}

impl FromIterator<(VertexId, Complex64)> for LatticeFunction {
    fn from_iter<I: IntoIterator<Item = (VertexId, Complex64)>>(iter: I) -> Self {
        let mut f = Self::new();
        for (v, z) in iter {
            f.add(v, z);
        }
        f
    }
}

/// Index lookup for an ordered vertex list.
pub(crate) fn index_map(vertices: &[VertexId]) -> HashMap<VertexId, usize> {
    vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect()
}

/// Vertices outside `set` adjacent to some member of it, sorted.
pub(crate) fn outer_layer(spec: &LatticeSpec, set: &[VertexId]) -> Vec<VertexId> {
    let members: HashSet<&VertexId> = set.iter().collect();
    let mut out = BTreeSet::new();
    for v in set {
        for w in spec.neighbors_unchecked(v) {
            if !members.contains(&w) {
                out.insert(w);
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square2() -> LatticeSpec {
        builtin_lattice(BuiltinLattice::Square, 2).unwrap()
    }

    #[test]
    fn square_neighbors_are_unit_steps() {
        let spec = square2();
        let mut ns: Vec<Vec<i64>> = spec
            .neighbors(&VertexId::new(0, vec![0, 0]))
            .unwrap()
            .into_iter()
            .map(|v| v.n)
            .collect();
        ns.sort();
        assert_eq!(ns, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn hexagonal_neighbors_of_first_cell() {
        let spec = builtin_lattice(BuiltinLattice::Hexagonal, 2).unwrap();
        let ns: BTreeSet<VertexId> = spec
            .neighbors(&VertexId::new(0, vec![0, 0]))
            .unwrap()
            .into_iter()
            .collect();
        let expected: BTreeSet<VertexId> = [
            VertexId::new(1, vec![0, 0]),
            VertexId::new(1, vec![-1, 0]),
            VertexId::new(1, vec![0, -1]),
        ]
        .into_iter()
        .collect();
        assert_eq!(ns, expected);
    }

    #[test]
    fn triangular_neighbors_are_sixth_roots() {
        let spec = builtin_lattice(BuiltinLattice::Triangular, 2).unwrap();
        let origin = VertexId::new(0, vec![0, 0]);
        let ns = spec.neighbors(&origin).unwrap();
        assert_eq!(ns.len(), 6);
        let s3 = 3f64.sqrt();
        for l in 0..6 {
            let angle = std::f64::consts::PI / 3.0 * l as f64;
            let target = [angle.cos(), angle.sin()];
            // Solve n1 v1 + n2 v2 = omega^l in the (1, omega) basis.
            let n2 = (target[1] / (s3 / 2.0)).round() as i64;
            let n1 = (target[0] - 0.5 * n2 as f64).round() as i64;
            assert!(ns.contains(&VertexId::new(0, vec![n1, n2])), "omega^{l}");
        }
    }

    #[test]
    fn invalid_cell_is_rejected() {
        let spec = square2();
        assert!(matches!(
            spec.neighbors(&VertexId::new(3, vec![0, 0])),
            Err(Error::InvalidCell { .. })
        ));
        assert!(matches!(
            spec.realize(&VertexId::new(0, vec![0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn builtin_degrees() {
        let deg = |k, d| {
            let spec = builtin_lattice(k, d).unwrap();
            (0..spec.num_cells())
                .map(|c| spec.degree(c))
                .collect::<Vec<_>>()
        };
        assert_eq!(deg(BuiltinLattice::Square, 2), vec![4]);
        assert_eq!(deg(BuiltinLattice::Square, 3), vec![6]);
        assert_eq!(deg(BuiltinLattice::Triangular, 2), vec![6]);
        assert_eq!(deg(BuiltinLattice::Hexagonal, 2), vec![3, 3]);
        assert_eq!(deg(BuiltinLattice::Kagome, 2), vec![4, 4, 4]);
        assert_eq!(deg(BuiltinLattice::Ladder, 2), vec![5, 5]);
        assert_eq!(deg(BuiltinLattice::Ladder, 3), vec![7, 7]);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            builtin_lattice(BuiltinLattice::Square, 1),
            Err(Error::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            builtin_lattice(BuiltinLattice::Ladder, 0),
            Err(Error::DimensionTooSmall { .. })
        ));
        assert!("pentagonal".parse::<BuiltinLattice>().is_err());
        // Planar lattices ignore d.
        assert_eq!(builtin_lattice(BuiltinLattice::Kagome, 7).unwrap().dim(), 2);
    }

    #[test]
    fn realize_examples() {
        let spec = square2();
        assert_eq!(
            spec.realize(&VertexId::new(0, vec![2, 3])).unwrap(),
            vec![2.0, 3.0]
        );
        let hex = builtin_lattice(BuiltinLattice::Hexagonal, 2).unwrap();
        assert_eq!(
            hex.realize(&VertexId::new(1, vec![0, 0])).unwrap(),
            vec![2.0, 0.0]
        );
        let kag = builtin_lattice(BuiltinLattice::Kagome, 2).unwrap();
        let p = kag.realize(&VertexId::new(2, vec![0, 0])).unwrap();
        assert_eq!(p, vec![0.25, 3f64.sqrt() / 4.0]);
    }

    #[test]
    fn uniform_edge_lengths() {
        for (kind, len) in [
            (BuiltinLattice::Square, 1.0),
            (BuiltinLattice::Triangular, 1.0),
            (BuiltinLattice::Hexagonal, 1.0),
            (BuiltinLattice::Kagome, 0.5),
            (BuiltinLattice::Ladder, 1.0),
        ] {
            let spec = builtin_lattice(kind, 2).unwrap();
            for l in spec.edge_lengths() {
                assert!((l - len).abs() < 1e-12, "{kind}: {l}");
            }
        }
    }

    #[test]
    fn box_vertex_counts() {
        assert_eq!(square2().box_vertices(1.0).len(), 5);
        let hex = builtin_lattice(BuiltinLattice::Hexagonal, 2).unwrap();
        assert_eq!(hex.box_vertices(1.0).len(), 10);
        let kag = builtin_lattice(BuiltinLattice::Kagome, 2).unwrap();
        assert_eq!(kag.box_vertices(0.0).len(), 3);
        // sqrt(2) picks up the diagonal: the 3x3 block.
        assert_eq!(square2().box_vertices(2f64.sqrt()).len(), 9);
        let b = hex.box_vertices(2.5);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_malformed_documents() {
        let mut doc = square2().document().clone();
        doc.edge_generators.pop();
        assert!(LatticeSpec::new(doc).is_err(), "asymmetric generators");

        let mut doc = square2().document().clone();
        doc.edge_generators
            .push(EdgeGenerator::new(0, 0, vec![0, 0]));
        assert!(LatticeSpec::new(doc).is_err(), "loop");

        let mut doc = builtin_lattice(BuiltinLattice::Hexagonal, 2)
            .unwrap()
            .document()
            .clone();
        doc.points[1] = vec![1.0 + 1.5, -3f64.sqrt() / 2.0];
        assert!(LatticeSpec::new(doc).is_err(), "coset collision");

        // Only horizontal edges: disconnected.
        let doc = LatticeDocument {
            name: "stripes".into(),
            d: 2,
            ambient_dim: 2,
            basis: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            points: vec![vec![0.0, 0.0]],
            edge_generators: vec![
                EdgeGenerator::new(0, 0, vec![1, 0]),
                EdgeGenerator::new(0, 0, vec![-1, 0]),
            ],
        };
        assert!(LatticeSpec::new(doc).is_err(), "disconnected");
    }

    #[test]
    fn json_round_trip() {
        for kind in BuiltinLattice::ALL {
            let spec = builtin_lattice(kind, 2).unwrap();
            let text = serde_json::to_string(&spec).unwrap();
            let back: LatticeSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back);
        }
    }

    #[test]
    fn lattice_function_drops_zeros() {
        let mut f = LatticeFunction::new();
        let v = VertexId::new(0, vec![1, 1]);
        f.set(v.clone(), Complex64::new(2.0, 0.0));
        f.add(v.clone(), Complex64::new(-2.0, 0.0));
        assert!(f.is_zero());
        assert_eq!(f.get(&v), Complex64::new(0.0, 0.0));
    }
}
