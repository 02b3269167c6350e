//! Increasing height functions, domains of dependence, the growth estimate
//! along dependence shells and the decay bound sequence.
//!
//! A height function here is affine in the translation index,
//! `h(j, n) = l.n + c_j`, with a successor `v -> v0` given per cell as a
//! target cell and a shift. Its domain is the whole lattice.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BuiltinLattice, LatticeFunction, LatticeSpec, VertexId};
use crate::operators::{apply_schrodinger, Potential};
use num_complex::Complex64;

/// Which set a vertex depends on through the equation at its successor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DependenceMode {
    /// `N_{v0} \ {v}`.
    #[default]
    Definition,
    /// `N_{v0} \ {v}` together with `v0`, the set actually needed when
    /// `V(v0) != lambda`.
    WithSuccessor,
}

/// Affine increasing height function with a per-cell successor.
#[derive(Debug, Clone)]
pub struct HeightFunction {
    spec: LatticeSpec,
    coeffs: Vec<i64>,
    offsets: Vec<i64>,
    k0: i64,
    /// Per cell: successor cell and translation shift.
    successors: Vec<(usize, Vec<i64>)>,
}

impl HeightFunction {
    pub fn affine(
        spec: LatticeSpec,
        coeffs: Vec<i64>,
        offsets: Vec<i64>,
        k0: i64,
        successors: Vec<(usize, Vec<i64>)>,
    ) -> Result<Self> {
        let d = spec.dim();
        let s = spec.num_cells();
        if coeffs.len() != d || offsets.len() != s || successors.len() != s {
            return Err(Error::InvalidParameter(
                "height coefficients, offsets and successors must match the lattice".into(),
            ));
        }
        if k0 < 1 {
            return Err(Error::InvalidParameter(format!(
                "k0 must be >= 1, got {k0}"
            )));
        }
        for (cell, m) in &successors {
            if *cell >= s || m.len() != d {
                return Err(Error::InvalidParameter(format!(
                    "successor ({cell}, {m:?}) is not a vertex offset of this lattice"
                )));
            }
        }
        Ok(Self {
            spec,
            coeffs,
            offsets,
            k0,
            successors,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn k0(&self) -> i64 {
        self.k0
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn height(&self, v: &VertexId) -> i64 {
        self.offsets[v.cell]
            + self
                .coeffs
                .iter()
                .zip(&v.n)
                .map(|(a, b)| a * b)
                .sum::<i64>()
    }

    pub fn successor(&self, v: &VertexId) -> VertexId {
        let (cell, m) = &self.successors[v.cell];
        VertexId::new(
            *cell,
            v.n.iter().zip(m).map(|(a, b)| a + b).collect::<Vec<_>>(),
        )
    }

    fn check_domain(&self, v: &VertexId) -> Result<()> {
        self.spec
            .validate_vertex(v)
            .map_err(|_| Error::OutsideDomain(v.clone()))
    }

    /// Constant `a` with `h(w) <= a |n(w)|` whenever all offsets are zero:
    /// the Euclidean norm of the coefficient vector.
    pub fn growth_constant(&self) -> f64 {
        (self.coeffs.iter().map(|c| (c * c) as f64).sum::<f64>()).sqrt()
    }

    /// Largest dependence-set size over the cells.
    pub fn d0(&self, mode: DependenceMode) -> usize {
        (0..self.spec.num_cells())
            .map(|c| {
                dependence_set(self, &VertexId::origin(c, self.spec.dim()), mode)
                    .map(|s| s.len())
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}

/// The height function of a builtin lattice.
pub fn builtin_height(kind: BuiltinLattice, d: usize) -> Result<HeightFunction> {
    let spec = crate::lattice::builtin_lattice(kind, d)?;
    let dim = spec.dim();
    let e1 = |dim: usize| {
        let mut e = vec![0; dim];
        e[0] = 1;
        e
    };
    match kind {
        BuiltinLattice::Square => {
            HeightFunction::affine(spec, e1(dim), vec![0], 1, vec![(0, e1(dim))])
        }
        BuiltinLattice::Triangular => {
            HeightFunction::affine(spec, vec![1, 2], vec![0], 2, vec![(0, vec![0, 1])])
        }
        BuiltinLattice::Hexagonal => HeightFunction::affine(
            spec,
            vec![-1, 1],
            vec![0, 0],
            1,
            vec![(1, vec![-1, 0]), (0, vec![0, 1])],
        ),
        BuiltinLattice::Ladder => HeightFunction::affine(
            spec,
            e1(dim),
            vec![0, 0],
            1,
            vec![(0, e1(dim)), (1, e1(dim))],
        ),
        BuiltinLattice::Kagome => Err(Error::NoHeightFunction(kind.to_string())),
    }
}

/// One failed requirement found by [`verify_height`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightViolation {
    /// Adjacent vertices whose heights differ by more than `k0`.
    Variation { v: VertexId, w: VertexId, diff: i64 },
    /// The successor is not a neighbour.
    NotAdjacent { v: VertexId, successor: VertexId },
    /// A neighbour of the successor other than `v` is not strictly higher.
    NotIncreasing { v: VertexId, w: VertexId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightReport {
    pub checked: usize,
    pub violations: Vec<HeightViolation>,
}

impl HeightReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks both defining properties at every box vertex whose neighbourhood
/// and successor neighbourhood lie in the box.
pub fn verify_height(hf: &HeightFunction, sample_box_r: f64) -> HeightReport {
    let spec = &hf.spec;
    let inside: BTreeSet<VertexId> = spec.box_vertices(sample_box_r).into_iter().collect();
    let mut report = HeightReport {
        checked: 0,
        violations: Vec::new(),
    };
    for v in &inside {
        let ns = spec.neighbors_unchecked(v);
        let v0 = hf.successor(v);
        let n0 = spec.neighbors_unchecked(&v0);
        if !ns.iter().chain(&n0).all(|w| inside.contains(w)) {
            continue;
        }
        report.checked += 1;
        let hv = hf.height(v);
        for w in &ns {
            let diff = (hf.height(w) - hv).abs();
            if diff > hf.k0 {
                report.violations.push(HeightViolation::Variation {
                    v: v.clone(),
                    w: w.clone(),
                    diff,
                });
            }
        }
        if !spec.are_adjacent(v, &v0) {
            report.violations.push(HeightViolation::NotAdjacent {
                v: v.clone(),
                successor: v0.clone(),
            });
        }
        for w in n0.iter().filter(|w| *w != v) {
            if hf.height(w) < hv + 1 {
                report.violations.push(HeightViolation::NotIncreasing {
                    v: v.clone(),
                    w: w.clone(),
                });
            }
        }
    }
    report
}

/// `D_h(v)`, sorted.
pub fn dependence_set(
    hf: &HeightFunction,
    v: &VertexId,
    mode: DependenceMode,
) -> Result<Vec<VertexId>> {
    hf.check_domain(v)?;
    let v0 = hf.successor(v);
    let mut set: BTreeSet<VertexId> = hf
        .spec
        .neighbors_unchecked(&v0)
        .into_iter()
        .filter(|w| w != v)
        .collect();
    if mode == DependenceMode::WithSuccessor {
        set.insert(v0);
    }
    Ok(set.into_iter().collect())
}

/// The `n`-th dependence shell of a root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceShell {
    pub root: VertexId,
    pub n: usize,
    /// Sorted.
    pub members: Vec<VertexId>,
}

impl DependenceShell {
    /// Whether `h(root) + n <= h(w) <= h(root) + 2 k0 n` for every member.
    pub fn sandwich_holds(&self, hf: &HeightFunction) -> bool {
        let h0 = hf.height(&self.root);
        let n = self.n as i64;
        self.members
            .iter()
            .all(|w| (h0 + n..=h0 + 2 * hf.k0 * n).contains(&hf.height(w)))
    }
}

/// Shells `1..=n_max` of a root, built breadth first.
pub fn dependence_shells(
    hf: &HeightFunction,
    v: &VertexId,
    n_max: usize,
    mode: DependenceMode,
) -> Result<Vec<DependenceShell>> {
    hf.check_domain(v)?;
    let mut shells = Vec::with_capacity(n_max);
    let mut current: BTreeSet<VertexId> = BTreeSet::from([v.clone()]);
    for n in 1..=n_max {
        let mut next = BTreeSet::new();
        for w in &current {
            next.extend(dependence_set(hf, w, mode)?);
        }
        shells.push(DependenceShell {
            root: v.clone(),
            n,
            members: next.iter().cloned().collect(),
        });
        current = next;
    }
    Ok(shells)
}

/// The single shell with index `n >= 1`.
pub fn dependence_shell(
    hf: &HeightFunction,
    v: &VertexId,
    n: usize,
    mode: DependenceMode,
) -> Result<DependenceShell> {
    if n == 0 {
        return Err(Error::InvalidParameter("shell index must be >= 1".into()));
    }
    Ok(dependence_shells(hf, v, n, mode)?.pop().expect("n >= 1"))
}

/// Closed-form domain of dependence of `x` for the builtin height functions.
pub fn cone_membership(kind: BuiltinLattice, x: &VertexId, y: &VertexId) -> Result<bool> {
    let dn: Vec<i64> = y.n.iter().zip(&x.n).map(|(a, b)| a - b).collect();
    let transverse = |dn: &[i64]| dn.iter().skip(1).map(|t| t.abs()).sum::<i64>();
    match kind {
        BuiltinLattice::Square => Ok(transverse(&dn) <= dn[0]),
        BuiltinLattice::Triangular => Ok(dn[0] + dn[1] >= 0 && dn[1] >= 0),
        BuiltinLattice::Hexagonal => {
            if x == y {
                return Ok(false);
            }
            // Twice the horizontal coordinate and the vertical index, both integral.
            let twice_x = |v: &VertexId| 2 * (v.cell as i64 + 1) + 3 * (v.n[0] + v.n[1]);
            let dx = twice_x(y) - twice_x(x);
            let db = dn[1] - dn[0];
            Ok(match x.cell {
                0 => dx <= 0 && 3 * db >= -dx,
                _ => dx >= 0 && 3 * db >= dx,
            })
        }
        BuiltinLattice::Ladder => {
            let lead = if x.cell == y.cell { dn[0] } else { dn[0] - 1 };
            Ok(lead >= transverse(&dn))
        }
        BuiltinLattice::Kagome => Err(Error::NoClosedFormCone(kind.to_string())),
    }
}

/// One row of a growth report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    /// `|f(v)|`.
    pub lhs: f64,
    /// `sup` of `|f|` over the shell.
    pub shell_sup: f64,
    /// `(C0 D0)^n * shell_sup`.
    pub rhs: f64,
    /// `ln(rhs) - ln(lhs)`; non-negative when the bound holds.
    pub log_margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub c0: f64,
    pub d0: usize,
    pub max_relative_residual: f64,
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds).count()
    }
}

/// Relative tolerance on the equation residual at the successor vertices.
pub const GROWTH_RESIDUAL_TOL: f64 = 1e-10;

/// Vertices whose equation the growth bound relies on: successors of the
/// root and of every member of shells `1..n_max`.
fn required_successors(
    hf: &HeightFunction,
    shells: &[DependenceShell],
    v: &VertexId,
) -> Vec<(VertexId, VertexId)> {
    std::iter::once(v)
        .chain(
            shells
                .iter()
                .take(shells.len().saturating_sub(1))
                .flat_map(|s| &s.members),
        )
        .map(|w| (w.clone(), hf.successor(w)))
        .collect()
}

fn relative_residual(
    spec: &LatticeSpec,
    pot: &Potential,
    lambda: f64,
    f: &LatticeFunction,
    s: &VertexId,
) -> Result<f64> {
    let r = apply_schrodinger(spec, pot, lambda, f, s)?.norm();
    let ns = spec.neighbors_unchecked(s);
    let scale = ns.iter().map(|w| f.get(w).norm()).sum::<f64>() / ns.len() as f64
        + (pot.value(s) - lambda).abs() * f.get(s).norm();
    Ok(r / (1.0 + scale))
}

/// Checks `|f(v)| <= (C0 D0)^n sup_{shell n} |f|` for `n = 1..=n_max`, with
/// `C0 = deg_max (1 + sup |V - lambda|)` and the shells taken with the
/// successor included. The equation must hold at every successor the bound
/// relies on, to relative accuracy [`GROWTH_RESIDUAL_TOL`].
pub fn growth_bound_check(
    pot: &Potential,
    f: &LatticeFunction,
    lambda: f64,
    hf: &HeightFunction,
    v: &VertexId,
    n_max: usize,
) -> Result<GrowthReport> {
    let spec = &hf.spec;
    let mode = DependenceMode::WithSuccessor;
    let shells = dependence_shells(hf, v, n_max, mode)?;
    let required = required_successors(hf, &shells, v);
    let mut max_rel: f64 = 0.0;
    for (_, s) in &required {
        let rel = relative_residual(spec, pot, lambda, f, s)?;
        if rel > GROWTH_RESIDUAL_TOL {
            return Err(Error::ResidualTooLarge {
                vertex: s.clone(),
                residual: rel,
                tolerance: GROWTH_RESIDUAL_TOL,
            });
        }
        max_rel = max_rel.max(rel);
    }
    let sup_v = pot.sup_shifted(lambda, required.iter().map(|(_, s)| s));
    let c0 = spec.max_degree() as f64 * (1.0 + sup_v);
    let d0 = hf.d0(mode);
    let lhs = f.get(v).norm();
    let rows = shells
        .iter()
        .map(|shell| {
            let shell_sup = shell
                .members
                .iter()
                .map(|w| f.get(w).norm())
                .fold(0.0, f64::max);
            let log_factor = shell.n as f64 * (c0 * d0 as f64).ln();
            let rhs = log_factor.exp() * shell_sup;
            let log_margin = if lhs == 0.0 {
                f64::INFINITY
            } else {
                log_factor + shell_sup.ln() - lhs.ln()
            };
            GrowthRow {
                n: shell.n,
                lhs,
                shell_sup,
                rhs,
                log_margin,
                holds: log_margin >= 0.0,
            }
        })
        .collect();
    Ok(GrowthReport {
        c0,
        d0,
        max_relative_residual: max_rel,
        rows,
    })
}

/// A solution of the equation at every successor used by the growth bound
/// of `v` up to `n_max`: values above the shells are drawn at random, then
/// each required vertex is solved from the equation at its successor in
/// decreasing height order.
pub fn manufacture_solution(
    pot: &Potential,
    lambda: f64,
    hf: &HeightFunction,
    v: &VertexId,
    n_max: usize,
    seed: u64,
) -> Result<LatticeFunction> {
    let spec = &hf.spec;
    let shells = dependence_shells(hf, v, n_max, DependenceMode::WithSuccessor)?;
    let required = required_successors(hf, &shells, v);
    let unknown: BTreeMap<VertexId, VertexId> = required.iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = LatticeFunction::new();
    // Every vertex the equations touch, fixed at random unless solved for.
    let mut touched = BTreeSet::new();
    for (_, s) in &required {
        touched.insert(s.clone());
        touched.extend(spec.neighbors_unchecked(s));
    }
    for w in &touched {
        if !unknown.contains_key(w) {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            f.set(w.clone(), z);
        }
    }
    let mut order: Vec<&VertexId> = unknown.keys().collect();
    order.sort_by_key(|w| std::cmp::Reverse(hf.height(w)));
    for w in order {
        let s = &unknown[w];
        let deg = spec.degree(s.cell) as f64;
        let rest: Complex64 = spec
            .neighbors_unchecked(s)
            .iter()
            .filter(|u| *u != w)
            .map(|u| f.get(u))
            .sum();
        let value = deg * (pot.value(s) - lambda) * f.get(s) - rest;
        f.set(w.clone(), value);
    }
    Ok(f)
}

/// Whether the bound sequence shrinks, stays put or grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioClass {
    Decreasing,
    Constant,
    /// `A` too small for the decay to beat the growth.
    Increasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// `ln(C0 D0) - A/a`.
    pub log_ratio: f64,
    pub class: RatioClass,
    /// `ln b_n` for `n = 1..=n_max`.
    pub log_terms: Vec<f64>,
    /// First `n` with `b_n < 1e-300`, only when the sequence decreases.
    pub certificate: Option<usize>,
}

impl DecayReport {
    pub fn terms(&self) -> Vec<f64> {
        self.log_terms.iter().map(|l| l.exp()).collect()
    }
}

/// Threshold below which a bound counts as a vanishing certificate.
pub const VANISHING_BOUND: f64 = 1e-300;

/// `b_n = C_A exp(-A h_v / a) (C0 D0 exp(-A/a))^n`, evaluated in log space.
pub fn decay_bound_sequence(
    c0: f64,
    d0: u64,
    c_a: f64,
    big_a: f64,
    a: f64,
    h_v: i64,
    n_max: usize,
) -> Result<DecayReport> {
    for (name, x) in [("C0", c0), ("C_A", c_a), ("A", big_a), ("a", a)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {x}"
            )));
        }
    }
    if d0 < 1 {
        return Err(Error::InvalidParameter("D0 must be >= 1".into()));
    }
    let log_ratio = (c0 * d0 as f64).ln() - big_a / a;
    let class = if log_ratio < 0.0 {
        RatioClass::Decreasing
    } else if log_ratio == 0.0 {
        RatioClass::Constant
    } else {
        RatioClass::Increasing
    };
    let base = c_a.ln() - big_a * h_v as f64 / a;
    let log_terms: Vec<f64> = (1..=n_max).map(|n| base + n as f64 * log_ratio).collect();
    let cut = VANISHING_BOUND.ln();
    let certificate = (class == RatioClass::Decreasing)
        .then(|| log_terms.iter().position(|&l| l < cut).map(|i| i + 1))
        .flatten();
    Ok(DecayReport {
        log_ratio,
        class,
        log_terms,
        certificate,
    })
}
