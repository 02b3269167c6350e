//! Finite graphs with boundary: extreme points, the two-points condition,
//! the triangle assumption on boundary vertices, the Neumann boundary
//! operator, and the joint Dirichlet and Neumann null-space test.
//!
//! Vertices of a [`BoundaryGraph`] are numbered with the interior first
//! (`0..interior_len`) and the boundary after it. Subsets `S` passed to
//! [`extreme_points`] use interior indices.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{index_map, outer_layer, LatticeFunction, LatticeSpec, VertexId};

/// Largest interior for which every subset is enumerated.
pub const EXHAUSTIVE_CAP: usize = 22;

/// Relative singular-value cutoff used by [`dirichlet_neumann_nullity`].
pub const NULLITY_TOL: f64 = 1e-10;

const UNREACHABLE: u32 = u32::MAX;

/// Finite graph split into interior and boundary vertices. Boundary vertices
/// are never adjacent to each other.
#[derive(Debug, Clone)]
pub struct BoundaryGraph {
    interior: usize,
    adjacency: Vec<Vec<usize>>,
    labels: Option<Vec<VertexId>>,
    // BFS distances from every boundary vertex to every vertex.
    boundary_dist: Vec<Vec<u32>>,
}

fn bfs(adjacency: &[Vec<usize>], start: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; adjacency.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

impl BoundaryGraph {
    /// Builds a graph from `interior` interior and `boundary` boundary
    /// vertices. Edges between two boundary vertices are rejected, as are
    /// loops and disconnected graphs.
    pub fn new(interior: usize, boundary: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let total = interior + boundary;
        let mut sets: Vec<HashSet<usize>> = vec![HashSet::new(); total];
        for &(a, b) in edges {
            if a >= total || b >= total || a == b {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b})")));
            }
            if a >= interior && b >= interior {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) joins two boundary vertices"
                )));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        let adjacency: Vec<Vec<usize>> = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<usize> = s.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        if total > 0 && bfs(&adjacency, 0).contains(&UNREACHABLE) {
            return Err(Error::DisconnectedGraph);
        }
        let boundary_dist = (interior..total).map(|z| bfs(&adjacency, z)).collect();
        Ok(Self {
            interior,
            adjacency,
            labels: None,
            boundary_dist,
        })
    }

    /// Interior `vertices` together with their outer neighbours as boundary,
    /// keeping interior-interior and interior-boundary lattice edges.
    pub fn from_vertices(spec: &LatticeSpec, vertices: &[VertexId]) -> Result<Self> {
        let mut interior: Vec<VertexId> = vertices.to_vec();
        interior.sort();
        interior.dedup();
        for v in &interior {
            spec.validate_vertex(v)?;
        }
        let boundary = outer_layer(spec, &interior);
        let all: Vec<VertexId> = interior.iter().chain(&boundary).cloned().collect();
        let index = index_map(&all);
        let mut edges = Vec::new();
        for (i, v) in interior.iter().enumerate() {
            for w in spec.neighbors_unchecked(v) {
                let j = index[&w];
                if j >= interior.len() || i < j {
                    edges.push((i, j));
                }
            }
        }
        let mut g = Self::new(interior.len(), boundary.len(), &edges)?;
        g.labels = Some(all);
        Ok(g)
    }

    pub fn interior_len(&self) -> usize {
        self.interior
    }

    pub fn boundary_len(&self) -> usize {
        self.adjacency.len() - self.interior
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v >= self.interior
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Degree inside the graph.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn are_adjacent(&self, v: usize, w: usize) -> bool {
        self.adjacency[v].binary_search(&w).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, ns) in self.adjacency.iter().enumerate() {
            out.extend(ns.iter().filter(|&&w| v < w).map(|&w| (v, w)));
        }
        out
    }

    /// Lattice vertices behind the indices, when built from a lattice.
    pub fn labels(&self) -> Option<&[VertexId]> {
        self.labels.as_deref()
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|w| w == v)
    }

    fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].to_string(),
            None => v.to_string(),
        }
    }

    /// Samples a lattice function at every graph vertex.
    pub fn values_of(&self, f: &LatticeFunction) -> Result<Vec<Complex64>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("graph has no lattice labels".into()))?;
        Ok(labels.iter().map(|v| f.get(v)).collect())
    }

    pub fn document(&self) -> GraphDocument {
        GraphDocument {
            interior: (0..self.interior).map(|v| self.label(v)).collect(),
            boundary: (self.interior..self.len()).map(|v| self.label(v)).collect(),
            edges: self.edges(),
        }
    }
}

/// JSON form of a boundary graph. Edge endpoints index the concatenation
/// of `interior` and `boundary`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub interior: Vec<String>,
    pub boundary: Vec<String>,
    pub edges: Vec<(usize, usize)>,
}

/// Boundary graph whose interior is the Euclidean index box of radius `r`.
pub fn boundary_graph_from_box(spec: &LatticeSpec, r: f64) -> Result<BoundaryGraph> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "box radius must be positive, got {r}"
        )));
    }
    BoundaryGraph::from_vertices(spec, &spec.box_vertices(r))
}

/// Boundary graph whose interior is `max_i |n_i| <= r`, the parallelogram
/// patch of the planar lattices.
pub fn boundary_graph_from_cube(spec: &LatticeSpec, r: i64) -> Result<BoundaryGraph> {
    if r < 0 {
        return Err(Error::InvalidParameter(format!(
            "cube radius must be non-negative, got {r}"
        )));
    }
    BoundaryGraph::from_vertices(spec, &spec.cube_vertices(r))
}

/// Number of edges on a shortest path, `None` when unreachable.
pub fn graph_distance(g: &BoundaryGraph, v: usize, w: usize) -> Option<usize> {
    let d = if g.is_boundary(v) {
        g.boundary_dist[v - g.interior][w]
    } else if g.is_boundary(w) {
        g.boundary_dist[w - g.interior][v]
    } else {
        bfs(&g.adjacency, v)[w]
    };
    (d != UNREACHABLE).then_some(d as usize)
}

/// Members of `s` that are the unique nearest member of `s` seen from some
/// boundary vertex. Returned sorted.
pub fn extreme_points(g: &BoundaryGraph, s: &[usize]) -> Vec<usize> {
    let mut found = HashSet::new();
    for dist in &g.boundary_dist {
        let mut best = UNREACHABLE;
        let mut who = Vec::new();
        for &v in s {
            let d = dist[v];
            if d < best {
                best = d;
                who.clear();
                who.push(v);
            } else if d == best && d != UNREACHABLE {
                who.push(v);
            }
        }
        if who.len() == 1 {
            found.insert(who[0]);
        }
    }
    let mut out: Vec<usize> = found.into_iter().collect();
    out.sort_unstable();
    out
}

/// Per boundary vertex, interior vertices grouped by distance as bitmasks,
/// nearest first.
fn distance_levels(g: &BoundaryGraph) -> Vec<Vec<u32>> {
    g.boundary_dist
        .iter()
        .map(|dist| {
            let mut by: Vec<(u32, usize)> = (0..g.interior)
                .filter(|&v| dist[v] != UNREACHABLE)
                .map(|v| (dist[v], v))
                .collect();
            by.sort_unstable();
            let mut levels: Vec<u32> = Vec::new();
            let mut last = UNREACHABLE;
            for (d, v) in by {
                if d != last {
                    levels.push(0);
                    last = d;
                }
                *levels.last_mut().unwrap() |= 1 << v;
            }
            levels
        })
        .collect()
}

/// Extreme points of a subset given as a bitmask, stopping once `stop` are
/// known.
fn extreme_mask(levels: &[Vec<u32>], mask: u32, stop: u32) -> u32 {
    let mut found = 0u32;
    for lv in levels {
        if let Some(hit) = lv.iter().map(|l| l & mask).find(|&h| h != 0) {
            if hit.count_ones() == 1 {
                found |= hit;
                if found.count_ones() >= stop {
                    break;
                }
            }
        }
    }
    found
}

fn mask_members(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchMode {
    /// Every subset with at least two members.
    Exhaustive,
    /// `samples` seeded random subsets.
    Random { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every subset was checked.
    Holds,
    /// Sampling found no subset with fewer than two extreme points. This
    /// does not establish the condition.
    NoCounterexampleFound,
    Fails,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "condition holds",
            Verdict::NoCounterexampleFound => "no counterexample found",
            Verdict::Fails => "fails",
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fails
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointsReport {
    pub mode: SearchMode,
    pub verdict: Verdict,
    pub subsets_checked: u64,
    /// Interior indices of the first subset found with at most one extreme
    /// point.
    pub witness: Option<Vec<usize>>,
    pub witness_extreme_points: Vec<usize>,
}

/// Checks that every interior subset with at least two members has at
/// least two extreme points.
pub fn two_points_condition(g: &BoundaryGraph, mode: &SearchMode) -> Result<TwoPointsReport> {
    two_points_condition_with(g, mode, &[])
}

/// As [`two_points_condition`], testing `candidates` before any sampled or
/// enumerated subset. The exhaustive witness is the smallest failing subset
/// in bitmask order (bit `i` is interior vertex `i`).
pub fn two_points_condition_with(
    g: &BoundaryGraph,
    mode: &SearchMode,
    candidates: &[Vec<usize>],
) -> Result<TwoPointsReport> {
    let fail = |s: Vec<usize>, checked: u64| {
        let ext = extreme_points(g, &s);
        TwoPointsReport {
            mode: mode.clone(),
            verdict: Verdict::Fails,
            subsets_checked: checked,
            witness: Some(s),
            witness_extreme_points: ext,
        }
    };
    let mut checked = 0u64;
    for c in candidates {
        let mut s = c.clone();
        s.sort_unstable();
        s.dedup();
        if s.iter().any(|&v| v >= g.interior) {
            return Err(Error::InvalidParameter(format!(
                "candidate {c:?} contains a non-interior vertex"
            )));
        }
        if s.len() < 2 {
            continue;
        }
        checked += 1;
        if extreme_points(g, &s).len() < 2 {
            return Ok(fail(s, checked));
        }
    }
    match *mode {
        SearchMode::Exhaustive => {
            let n = g.interior;
            if n > EXHAUSTIVE_CAP {
                return Err(Error::ExhaustiveCapExceeded {
                    size: n,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            let levels = distance_levels(g);
            let total: u64 = (1u64 << n) - 1 - n as u64;
            let witness = (0u32..(1u32 << n))
                .into_par_iter()
                .filter(|m| m.count_ones() >= 2)
                .find_first(|&m| extreme_mask(&levels, m, 2).count_ones() < 2);
            Ok(match witness {
                Some(m) => {
                    let below = (0..m).filter(|x: &u32| x.count_ones() >= 2).count() as u64;
                    fail(mask_members(m), checked + below + 1)
                }
                None => TwoPointsReport {
                    mode: mode.clone(),
                    verdict: Verdict::Holds,
                    subsets_checked: checked + total,
                    witness: None,
                    witness_extreme_points: Vec::new(),
                },
            })
        }
        SearchMode::Random { samples, seed } => {
            let n = g.interior;
            if n >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    let k = rng.random_range(2..=n);
                    let mut s = sample(&mut rng, n, k).into_vec();
                    s.sort_unstable();
                    checked += 1;
                    if extreme_points(g, &s).len() < 2 {
                        return Ok(fail(s, checked));
                    }
                }
            }
            Ok(TwoPointsReport {
                mode: mode.clone(),
                verdict: Verdict::NoCounterexampleFound,
                subsets_checked: checked,
                witness: None,
                witness_extreme_points: Vec::new(),
            })
        }
    }
}

/// A boundary vertex `z` with interior neighbours `v`, `w` that are not
/// adjacent to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleViolation {
    pub z: usize,
    pub v: usize,
    pub w: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A5Report {
    pub checked_boundary: usize,
    pub violations: Vec<TriangleViolation>,
}

impl A5Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Any two interior neighbours of a boundary vertex must be adjacent.
pub fn check_a5(g: &BoundaryGraph) -> A5Report {
    let mut violations = Vec::new();
    for z in g.interior..g.len() {
        let inner: Vec<usize> = g
            .neighbors(z)
            .iter()
            .copied()
            .filter(|&v| v < g.interior)
            .collect();
        for (i, &v) in inner.iter().enumerate() {
            for &w in &inner[i + 1..] {
                if !g.are_adjacent(v, w) {
                    violations.push(TriangleViolation { z, v, w });
                }
            }
        }
    }
    A5Report {
        checked_boundary: g.boundary_len(),
        violations,
    }
}

/// `(1/deg z) sum_{w interior, w ~ z} (f(w) - f(z))` at a boundary vertex.
pub fn neumann_residual(g: &BoundaryGraph, f: &[Complex64], z: usize) -> Result<Complex64> {
    if !g.is_boundary(z) || z >= g.len() {
        return Err(Error::InvalidParameter(format!(
            "{z} is not a boundary vertex"
        )));
    }
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: g.len(),
            got: f.len(),
        });
    }
    let deg = g.degree(z);
    if deg == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s: Complex64 = g
        .neighbors(z)
        .iter()
        .filter(|&&w| w < g.interior)
        .map(|&w| f[w] - f[z])
        .sum();
    Ok(s / deg as f64)
}

/// `(-Delta + V - lambda) f` at an interior vertex, with `-Delta f(v) =
/// -(1/deg v) sum_{w ~ v} f(w)`.
pub fn interior_residual(
    g: &BoundaryGraph,
    potential: &[f64],
    lambda: f64,
    f: &[Complex64],
    v: usize,
) -> Complex64 {
    let deg = g.degree(v).max(1) as f64;
    let s: Complex64 = g.neighbors(v).iter().map(|&w| f[w]).sum();
    -s / deg + (potential[v] - lambda) * f[v]
}

/// Matrix of the system `(-Delta + V - lambda) f = 0` on the interior,
/// `f = 0` and `d_nu f = 0` on the boundary, in the interior unknowns.
pub fn dirichlet_neumann_matrix(
    g: &BoundaryGraph,
    potential: &[f64],
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let n = g.interior;
    if potential.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: potential.len(),
        });
    }
    let mut m = DMatrix::zeros(g.len(), n);
    for v in 0..n {
        let deg = g.degree(v).max(1) as f64;
        m[(v, v)] = potential[v] - lambda;
        for &w in g.neighbors(v) {
            if w < n {
                m[(v, w)] -= 1.0 / deg;
            }
        }
    }
    for z in n..g.len() {
        let deg = g.degree(z).max(1) as f64;
        for &w in g.neighbors(z) {
            m[(z, w)] += 1.0 / deg;
        }
    }
    Ok(m)
}

/// Null-space dimension of [`dirichlet_neumann_matrix`], counting singular
/// values below `rel_tol * max(1, largest singular value)`.
pub fn dirichlet_neumann_nullity_with(
    g: &BoundaryGraph,
    potential: &[f64],
    lambda: f64,
    rel_tol: f64,
) -> Result<usize> {
    let n = g.interior;
    let m = dirichlet_neumann_matrix(g, potential, lambda)?;
    if n == 0 {
        return Ok(0);
    }
    let sv = m.singular_values();
    let cut = rel_tol * sv.max().max(1.0);
    let rank = sv.iter().filter(|&&s| s > cut).count();
    Ok(n - rank)
}

pub fn dirichlet_neumann_nullity(
    g: &BoundaryGraph,
    potential: &[f64],
    lambda: f64,
) -> Result<usize> {
    dirichlet_neumann_nullity_with(g, potential, lambda, NULLITY_TOL)
}

/// The six vertices of the kagome hexagon at translation `c`, in cycle
/// order. The flat-band vector carries `+1, -1, +1, ...` along this list.
pub fn kagome_hexagon(c: &[i64]) -> Result<[VertexId; 6]> {
    if c.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: c.len(),
        });
    }
    let at = |cell: usize, dx: i64, dy: i64| VertexId::new(cell, vec![c[0] + dx, c[1] + dy]);
    Ok([
        at(2, 0, 0),
        at(1, 0, 1),
        at(0, 0, 1),
        at(2, -1, 1),
        at(1, -1, 1),
        at(0, 0, 0),
    ])
}

fn require_kagome(spec: &LatticeSpec) -> Result<()> {
    let hex = kagome_hexagon(&[0, 0])?;
    let ok = spec.num_cells() == 3
        && spec.dim() == 2
        && (0..6).all(|i| spec.are_adjacent(&hex[i], &hex[(i + 1) % 6]));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "`{}` does not have the kagome hexagon structure",
            spec.name()
        )))
    }
}

/// Alternating `+1/-1` on the hexagon at translation `center`, zero elsewhere.
/// It solves `(-Delta - 1/2) f = 0` everywhere with `V = 0`. The hexagon and
/// all of its neighbours must lie in the Euclidean box of radius `r`.
pub fn kagome_flat_band_vector(
    spec: &LatticeSpec,
    center: &[i64],
    r: f64,
) -> Result<LatticeFunction> {
    require_kagome(spec)?;
    let hex = kagome_hexagon(center)?;
    let in_box: HashSet<VertexId> = spec.box_vertices(r).into_iter().collect();
    let fits = hex.iter().all(|v| {
        in_box.contains(v)
            && spec
                .neighbors_unchecked(v)
                .iter()
                .all(|w| in_box.contains(w))
    });
    if !fits {
        return Err(Error::HexagonNotContained {
            center: center.to_vec(),
            radius: r,
        });
    }
    Ok(hexagon_vector(&hex))
}

fn hexagon_vector(hex: &[VertexId; 6]) -> LatticeFunction {
    hex.iter()
        .enumerate()
        .map(|(i, v)| {
            (
                v.clone(),
                Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
            )
        })
        .collect()
}

/// Interior index sets of every kagome hexagon lying inside the interior of
/// `g`. These are the supports of flat-band eigenvectors and have no extreme
/// points.
pub fn kagome_hexagon_rings(spec: &LatticeSpec, g: &BoundaryGraph) -> Result<Vec<Vec<usize>>> {
    require_kagome(spec)?;
    let labels = g
        .labels()
        .ok_or_else(|| Error::InvalidParameter("graph has no lattice labels".into()))?;
    let index: HashMap<&VertexId, usize> = labels[..g.interior_len()]
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let mut centers: Vec<Vec<i64>> = labels[..g.interior_len()]
        .iter()
        .map(|v| v.n.clone())
        .collect();
    centers.sort();
    centers.dedup();
    let mut rings = Vec::new();
    for c in centers {
        let hex = kagome_hexagon(&c)?;
        if let Some(mut ring) = hex
            .iter()
            .map(|v| index.get(v).copied())
            .collect::<Option<Vec<_>>>()
        {
            ring.sort_unstable();
            rings.push(ring);
        }
    }
    Ok(rings)
}

/// Flat-band vector of a hexagon already known to lie in the graph interior,
/// sampled on every graph vertex.
pub fn kagome_ring_values(
    spec: &LatticeSpec,
    g: &BoundaryGraph,
    center: &[i64],
) -> Result<Vec<Complex64>> {
    require_kagome(spec)?;
    g.values_of(&hexagon_vector(&kagome_hexagon(center)?))
}

/// JSON summary of one condition checked on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpReport {
    pub graph_id: String,
    pub condition: String,
    pub result: String,
    pub witness_vertices: Vec<String>,
}

impl UcpReport {
    pub fn two_points(graph_id: &str, g: &BoundaryGraph, r: &TwoPointsReport) -> Self {
        Self {
            graph_id: graph_id.to_string(),
            condition: "two_points".into(),
            result: r.verdict.as_str().into(),
            witness_vertices: r.witness.iter().flatten().map(|&v| g.label(v)).collect(),
        }
    }

    pub fn a5(graph_id: &str, g: &BoundaryGraph, r: &A5Report) -> Self {
        let witness_vertices = r
            .violations
            .first()
            .map(|t| vec![g.label(t.z), g.label(t.v), g.label(t.w)])
            .unwrap_or_default();
        Self {
            graph_id: graph_id.to_string(),
            condition: "a5".into(),
            result: if r.passed() { "pass" } else { "fail" }.into(),
            witness_vertices,
        }
    }

    pub fn nullity(graph_id: &str, nullity: usize) -> Self {
        Self {
            graph_id: graph_id.to_string(),
            condition: "dirichlet_neumann_nullity".into(),
            result: nullity.to_string(),
            witness_vertices: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{builtin_lattice, BuiltinLattice};
    use crate::operators::apply_laplacian;
    use proptest::prelude::*;
    use rand::Rng;

    fn lattice(kind: BuiltinLattice) -> LatticeSpec {
        builtin_lattice(kind, 2).unwrap()
    }

    fn path2() -> BoundaryGraph {
        // boundary 2 - interior 0 - interior 1 - boundary 3
        BoundaryGraph::new(2, 2, &[(0, 1), (2, 0), (1, 3)]).unwrap()
    }

    fn square3() -> BoundaryGraph {
        boundary_graph_from_box(&lattice(BuiltinLattice::Square), 2f64.sqrt()).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn square_box_boundary_count() {
        let g = square3();
        assert_eq!(g.interior_len(), 9);
        assert_eq!(g.boundary_len(), 12);
    }

    #[test]
    fn no_boundary_edges_are_kept() {
        let g = boundary_graph_from_box(&lattice(BuiltinLattice::Kagome), 1.0).unwrap();
        assert!(g.boundary_len() > 0);
        for (a, b) in g.edges() {
            assert!(!(g.is_boundary(a) && g.is_boundary(b)));
        }
        assert!(BoundaryGraph::new(1, 2, &[(1, 2)]).is_err());
    }

    #[test]
    fn disconnected_graph_is_reported() {
        assert!(matches!(
            BoundaryGraph::new(2, 0, &[]),
            Err(Error::DisconnectedGraph)
        ));
    }

    #[test]
    fn hexagonal_parallelogram_boundary_is_multiple_of_four() {
        for r in 1..4 {
            let g = boundary_graph_from_cube(&lattice(BuiltinLattice::Hexagonal), r).unwrap();
            assert_eq!(g.boundary_len() % 4, 0, "r = {r}");
        }
    }

    #[test]
    fn distance_examples() {
        let g = square3();
        assert_eq!(graph_distance(&g, 3, 3), Some(0));
        let l = g.labels().unwrap();
        let a = g.index_of(&VertexId::new(0, vec![0, 0])).unwrap();
        let b = g.index_of(&VertexId::new(0, vec![1, 0])).unwrap();
        assert_eq!(graph_distance(&g, a, b), Some(1));
        // both boundary, sharing the interior neighbour (1, 1)
        let z1 = g.index_of(&VertexId::new(0, vec![2, 1])).unwrap();
        let z2 = g.index_of(&VertexId::new(0, vec![1, 2])).unwrap();
        assert!(g.is_boundary(z1) && g.is_boundary(z2));
        assert_eq!(graph_distance(&g, z1, z2), Some(2));
        assert_eq!(l.len(), g.len());
    }

    #[test]
    fn singleton_is_its_own_extreme_point() {
        let g = square3();
        assert_eq!(extreme_points(&g, &[4]), vec![4]);
    }

    #[test]
    fn path_graph_passes() {
        let r = two_points_condition(&path2(), &SearchMode::Exhaustive).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.subsets_checked, 1);
    }

    #[test]
    fn square_three_by_three_passes_exhaustively() {
        let r = two_points_condition(&square3(), &SearchMode::Exhaustive).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.subsets_checked, 512 - 10);
    }

    #[test]
    fn mask_and_list_extreme_points_agree() {
        let g = square3();
        let levels = distance_levels(&g);
        for m in 1u32..512 {
            let fast = mask_members(extreme_mask(&levels, m, u32::MAX));
            assert_eq!(fast, extreme_points(&g, &mask_members(m)));
        }
    }

    #[test]
    fn exhaustive_cap() {
        let g = boundary_graph_from_box(&lattice(BuiltinLattice::Square), 3.0).unwrap();
        assert!(matches!(
            two_points_condition(&g, &SearchMode::Exhaustive),
            Err(Error::ExhaustiveCapExceeded { .. })
        ));
    }

    #[test]
    fn random_pass_is_not_a_proof() {
        let r = two_points_condition(
            &square3(),
            &SearchMode::Random {
                samples: 50,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::NoCounterexampleFound);
        assert_eq!(r.verdict.as_str(), "no counterexample found");
    }

    #[test]
    fn a5_examples() {
        assert!(check_a5(&path2()).passed());
        // every boundary vertex of the 3x3 block has a single interior
        // neighbour, so the block passes vacuously
        assert!(check_a5(&square3()).passed());
        let disk = boundary_graph_from_box(&lattice(BuiltinLattice::Square), 2.0).unwrap();
        let bad = check_a5(&disk);
        assert!(!bad.passed());
        let corner = disk.index_of(&VertexId::new(0, vec![2, 1])).unwrap();
        assert!(bad.violations.iter().any(|t| t.z == corner));
        // the parallelogram patch passes; the index disk, which is not a
        // geometric disk in the skew basis, does not
        let tri = lattice(BuiltinLattice::Triangular);
        assert!(check_a5(&boundary_graph_from_cube(&tri, 2).unwrap()).passed());
        assert!(!check_a5(&boundary_graph_from_box(&tri, 2.0).unwrap()).passed());
    }

    #[test]
    fn neumann_examples() {
        let g = path2();
        assert_eq!(neumann_residual(&g, &[c(2.0); 4], 2).unwrap(), c(0.0));
        // boundary vertex of degree 3 with one interior neighbour
        let g = BoundaryGraph::new(3, 1, &[(0, 1), (1, 2), (3, 0), (3, 1), (3, 2)]).unwrap();
        let f = [c(1.0), c(0.0), c(0.0), c(0.0)];
        let r = neumann_residual(&g, &f, 3).unwrap();
        assert!((r - c(1.0 / 3.0)).norm() < 1e-15);
        assert!(neumann_residual(&g, &f, 0).is_err());
    }

    #[test]
    fn dirichlet_eigenvector_has_neumann_data() {
        // lowest Dirichlet eigenvector of the 3x3 interior is positive, so its
        // normal derivative on every edge-adjacent boundary vertex is nonzero
        let g = square3();
        let n = g.interior_len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for v in 0..n {
            for &w in g.neighbors(v) {
                if w < n {
                    a[(v, w)] = -0.25;
                }
            }
        }
        let eig = a.symmetric_eigen();
        let k = eig.eigenvalues.imin();
        let mut f: Vec<Complex64> = eig.eigenvectors.column(k).iter().map(|&x| c(x)).collect();
        f.resize(g.len(), c(0.0));
        let worst = (n..g.len())
            .map(|z| neumann_residual(&g, &f, z).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn nullity_examples() {
        let empty = BoundaryGraph::new(0, 0, &[]).unwrap();
        assert_eq!(dirichlet_neumann_nullity(&empty, &[], 0.3).unwrap(), 0);
        assert_eq!(
            dirichlet_neumann_nullity(&path2(), &[0.1, -0.4], 0.2).unwrap(),
            0
        );
        let spec = lattice(BuiltinLattice::Kagome);
        let g = boundary_graph_from_cube(&spec, 1).unwrap();
        let v = vec![0.0; g.interior_len()];
        assert!(dirichlet_neumann_nullity(&g, &v, 0.5).unwrap() >= 1);
    }

    #[test]
    fn flat_band_vector_solves_the_equation() {
        let spec = lattice(BuiltinLattice::Kagome);
        let f = kagome_flat_band_vector(&spec, &[0, 0], 3.0).unwrap();
        assert_eq!(f.support_len(), 6);
        assert!((f.norm_l2() - 6f64.sqrt()).abs() < 1e-15);
        for v in spec.box_vertices(3.0) {
            let lap = apply_laplacian(&spec, &f, &v).unwrap();
            assert!((-lap - 0.5 * f.get(&v)).norm() <= 1e-14, "{v}");
        }
        assert!(matches!(
            kagome_flat_band_vector(&spec, &[0, 0], 1.0),
            Err(Error::HexagonNotContained { .. })
        ));
        assert!(kagome_flat_band_vector(&lattice(BuiltinLattice::Square), &[0, 0], 3.0).is_err());
    }

    #[test]
    fn hexagon_ring_has_no_extreme_points() {
        let spec = lattice(BuiltinLattice::Kagome);
        let g = boundary_graph_from_cube(&spec, 2).unwrap();
        let rings = kagome_hexagon_rings(&spec, &g).unwrap();
        assert!(!rings.is_empty());
        for ring in &rings {
            assert!(extreme_points(&g, ring).is_empty());
        }
        let r = two_points_condition_with(
            &g,
            &SearchMode::Random {
                samples: 10,
                seed: 3,
            },
            &rings[..1],
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.witness.as_ref(), Some(&rings[0]));
        assert!(r.witness_extreme_points.is_empty());
    }

    #[test]
    fn ring_vector_has_zero_boundary_data() {
        let spec = lattice(BuiltinLattice::Kagome);
        let g = boundary_graph_from_cube(&spec, 1).unwrap();
        let f = kagome_ring_values(&spec, &g, &[0, 0]).unwrap();
        let n = g.interior_len();
        let pot = vec![0.0; n];
        for v in 0..n {
            assert!(interior_residual(&g, &pot, 0.5, &f, v).norm() <= 1e-14);
        }
        for z in n..g.len() {
            assert_eq!(f[z], c(0.0));
            assert!(neumann_residual(&g, &f, z).unwrap().norm() <= 1e-14);
        }
    }

    #[test]
    fn report_json_shape() {
        let g = square3();
        let r = two_points_condition(&g, &SearchMode::Exhaustive).unwrap();
        let json = serde_json::to_value(UcpReport::two_points("square-3x3", &g, &r)).unwrap();
        assert_eq!(json["result"], "condition holds");
        assert!(json["witness_vertices"].as_array().unwrap().is_empty());
        let doc = serde_json::to_value(g.document()).unwrap();
        assert_eq!(doc["boundary"].as_array().unwrap().len(), 12);
    }

    /// Connected graph: interior path plus random chords, each boundary
    /// vertex attached to a random nonempty interior set.
    fn arb_graph() -> impl Strategy<Value = BoundaryGraph> {
        (2usize..8, 1usize..6).prop_flat_map(|(n, m)| {
            let chords = proptest::collection::vec((0..n, 0..n), 0..n);
            let attach = proptest::collection::vec(proptest::collection::vec(0..n, 1..3), m);
            (Just(n), Just(m), chords, attach).prop_map(|(n, m, chords, attach)| {
                let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
                edges.extend(chords.into_iter().filter(|(a, b)| a != b));
                for (j, targets) in attach.iter().enumerate() {
                    edges.extend(targets.iter().map(|&t| (n + j, t)));
                }
                BoundaryGraph::new(n, m, &edges).unwrap()
            })
        })
    }

    /// Every boundary vertex has a single interior neighbour, so the triangle
    /// assumption holds vacuously.
    fn arb_pendant_graph() -> impl Strategy<Value = BoundaryGraph> {
        (2usize..7, 3usize..10).prop_flat_map(|(n, m)| {
            let chords = proptest::collection::vec((0..n, 0..n), 0..n);
            let attach = proptest::collection::vec(0..n, m);
            (Just(n), Just(m), chords, attach).prop_map(|(n, m, chords, attach)| {
                let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
                edges.extend(chords.into_iter().filter(|(a, b)| a != b));
                edges.extend(attach.iter().enumerate().map(|(j, &t)| (n + j, t)));
                BoundaryGraph::new(n, m, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn extreme_points_subset_and_monotone(g in arb_graph(), mask in 1u32..128, t in 0usize..8) {
            let n = g.interior_len();
            let s: Vec<usize> = mask_members(mask).into_iter().filter(|&v| v < n).collect();
            prop_assume!(!s.is_empty() && t < n);
            let ext = extreme_points(&g, &s);
            prop_assert!(ext.iter().all(|v| s.contains(v)));
            // a pendant boundary vertex leaves all other distances alone; one
            // with several neighbours can create ties and remove extreme points
            let mut edges = g.edges();
            edges.push((g.len(), t));
            let richer = BoundaryGraph::new(n, g.boundary_len() + 1, &edges).unwrap();
            let ext2 = extreme_points(&richer, &s);
            prop_assert!(ext.iter().all(|v| ext2.contains(v)));
        }

        #[test]
        fn distance_is_a_metric(g in arb_graph(), a in 0usize..13, b in 0usize..13, c3 in 0usize..13) {
            let n = g.len();
            let (a, b, c3) = (a % n, b % n, c3 % n);
            let d = |x, y| graph_distance(&g, x, y).unwrap();
            prop_assert_eq!(d(a, b), d(b, a));
            prop_assert!(d(a, c3) <= d(a, b) + d(b, c3));
            if g.is_boundary(a) && g.is_boundary(b) && a != b {
                prop_assert!(d(a, b) >= 2);
            }
        }

        #[test]
        fn two_points_and_a5_force_trivial_nullity(g in arb_pendant_graph(), seed in 0u64..1000) {
            prop_assume!(check_a5(&g).passed());
            let r = two_points_condition(&g, &SearchMode::Exhaustive).unwrap();
            prop_assume!(r.verdict == Verdict::Holds);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..100 {
                let v: Vec<f64> = (0..g.interior_len()).map(|_| rng.random_range(-1.0f64..1.0)).collect();
                let lambda = rng.random_range(-2.0f64..2.0);
                prop_assert_eq!(dirichlet_neumann_nullity(&g, &v, lambda).unwrap(), 0);
            }
        }
    }
}
