//! Real-space Laplacian and Schrödinger operator, potentials, box truncations
//! and a checked dense symmetric eigensolver.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{index_map, LatticeFunction, LatticeSpec, VertexId};

/// Default upper bound on the number of vertices in a truncated operator.
pub const DEFAULT_BOX_CAP: usize = 20_000;

const EIGEN_MAX_ITER: usize = 10_000;

/// Real-valued potential on the vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// Explicit values on finitely many vertices, zero elsewhere.
    FiniteSupport { entries: BTreeMap<VertexId, f64> },
    /// `C * s_j(n) * exp(-alpha |n|)` with `s_j(n)` in `[-1, 1]` drawn
    /// deterministically from `(seed, j, n)`.
    Exponential {
        amplitude: f64,
        rate: f64,
        seed: u64,
    },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::zero()
    }
}

impl Potential {
    pub fn zero() -> Self {
        Potential::FiniteSupport {
            entries: BTreeMap::new(),
        }
    }

    /// A single-site potential of the given height.
    pub fn delta(v: VertexId, height: f64) -> Self {
        Potential::FiniteSupport {
            entries: BTreeMap::from([(v, height)]),
        }
    }

    pub fn exponential(amplitude: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be positive, got {rate}"
            )));
        }
        Ok(Potential::Exponential {
            amplitude,
            rate,
            seed,
        })
    }

    pub fn value(&self, v: &VertexId) -> f64 {
        match self {
            Potential::FiniteSupport { entries } => entries.get(v).copied().unwrap_or(0.0),
            Potential::Exponential {
                amplitude,
                rate,
                seed,
            } => amplitude * profile(*seed, v) * (-rate * v.index_norm()).exp(),
        }
    }

    /// `sup |V - lambda|` over a vertex set.
    pub fn sup_shifted<'a>(&self, lambda: f64, vs: impl IntoIterator<Item = &'a VertexId>) -> f64 {
        vs.into_iter()
            .map(|v| (self.value(v) - lambda).abs())
            .fold(0.0, f64::max)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic per-vertex amplitude in `[-1, 1]`.
fn profile(seed: u64, v: &VertexId) -> f64 {
    let mut h = splitmix64(seed ^ (v.cell as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    for &x in &v.n {
        h = splitmix64(h ^ x as u64);
    }
    // 53 random mantissa bits mapped onto [-1, 1].
    (h >> 11) as f64 / ((1u64 << 53) - 1) as f64 * 2.0 - 1.0
}

/// `(1/deg v) * sum_{w ~ v} f(w)`.
pub fn apply_laplacian(spec: &LatticeSpec, f: &LatticeFunction, v: &VertexId) -> Result<Complex64> {
    let ns = spec.neighbors(v)?;
    let sum: Complex64 = ns.iter().map(|w| f.get(w)).sum();
    Ok(sum / ns.len() as f64)
}

/// `((-Δ + V - λ) f)(v)`.
pub fn apply_schrodinger(
    spec: &LatticeSpec,
    potential: &Potential,
    lambda: f64,
    f: &LatticeFunction,
    v: &VertexId,
) -> Result<Complex64> {
    let lap = apply_laplacian(spec, f, v)?;
    Ok(-lap + (potential.value(v) - lambda) * f.get(v))
}

/// `-Δ + V` on a finite box, with values outside the box treated as zero.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    vertices: Vec<VertexId>,
    diagonal: Vec<f64>,
    /// Off-diagonal entries per row, sorted by column.
    rows: Vec<Vec<(usize, f64)>>,
}

impl TruncatedOperator {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
            for &(j, a) in &self.rows[i] {
                m[(i, j)] += a;
            }
        }
        m
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_fn(self.size(), |i, _| {
            let off: Complex64 = self.rows[i].iter().map(|&(j, a)| a * x[j]).sum();
            self.diagonal[i] * x[i] + off
        })
    }

    /// Coordinates of `f` on the box, in vertex order.
    pub fn restrict(&self, f: &LatticeFunction) -> DVector<Complex64> {
        DVector::from_iterator(self.size(), self.vertices.iter().map(|v| f.get(v)))
    }

    pub fn extend(&self, x: &[f64]) -> LatticeFunction {
        self.vertices
            .iter()
            .zip(x)
            .map(|(v, &a)| (v.clone(), Complex64::new(a, 0.0)))
            .collect()
    }

    /// Whether every neighbour of box vertex `i` also lies in the box.
    pub fn is_interior(&self, spec: &LatticeSpec, i: usize) -> bool {
        self.rows[i].len() == spec.degree(self.vertices[i].cell)
    }

    /// Coordinate-format listing, one `row col value` triple per line
    /// (zero-based indices, 17 significant digits).
    pub fn to_coo(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size() {
            let mut entries: Vec<(usize, f64)> = self.rows[i].clone();
            entries.push((i, self.diagonal[i]));
            entries.sort_by_key(|e| e.0);
            for (j, a) in entries {
                if a != 0.0 {
                    writeln!(out, "{i} {j} {a:.16e}").expect("write to string");
                }
            }
        }
        out
    }
}

/// Truncation of `-Δ + V` to `box_vertices(spec, r)`.
pub fn assemble_truncated(
    spec: &LatticeSpec,
    potential: &Potential,
    r: f64,
    cap: usize,
) -> Result<TruncatedOperator> {
    let vertices = spec.box_vertices(r);
    assemble_on(spec, potential, vertices, cap)
}

/// Truncation of `-Δ + V` to an explicit vertex list (kept in the given order).
pub fn assemble_on(
    spec: &LatticeSpec,
    potential: &Potential,
    vertices: Vec<VertexId>,
    cap: usize,
) -> Result<TruncatedOperator> {
    if vertices.len() > cap {
        return Err(Error::BoxCapExceeded {
            size: vertices.len(),
            cap,
        });
    }
    for g in spec.generators() {
        if spec.degree(g.from) != spec.degree(g.to) {
            return Err(Error::NonUniformDegree { a: g.from, b: g.to });
        }
    }
    for v in &vertices {
        spec.validate_vertex(v)?;
    }
    let index = index_map(&vertices);
    let rows: Vec<Vec<(usize, f64)>> = vertices
        .par_iter()
        .map(|v| {
            let w = -1.0 / spec.degree(v.cell) as f64;
            let mut row: BTreeMap<usize, f64> = BTreeMap::new();
            for u in spec.neighbors_unchecked(v) {
                if let Some(&j) = index.get(&u) {
                    *row.entry(j).or_insert(0.0) += w;
                }
            }
            row.into_iter().collect()
        })
        .collect();
    let diagonal = vertices.iter().map(|v| potential.value(v)).collect();
    Ok(TruncatedOperator {
        vertices,
        diagonal,
        rows,
    })
}

/// Eigen-decomposition of a truncated operator.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal columns, matching `values`.
    pub vectors: DMatrix<f64>,
    /// Largest `|T q - λ q|` over all pairs.
    pub max_residual: f64,
}

/// Dense symmetric eigensolve with a residual check of `1e-10 * |T|`.
pub fn eigensolve_symmetric(t: &TruncatedOperator) -> Result<EigenDecomposition> {
    // residuals use the sparse rows; a dense product per vector costs as much
    // as the decomposition itself
    decompose(t.dense(), |q, out| {
        for (i, o) in out.iter_mut().enumerate() {
            *o = t.diagonal()[i] * q[i] + t.row(i).iter().map(|&(j, w)| w * q[j]).sum::<f64>();
        }
    })
}

pub fn eigensolve_dense(m: DMatrix<f64>) -> Result<EigenDecomposition> {
    let a = m.clone();
    decompose(m, move |q, out| {
        let r = &a * DVector::from_column_slice(q);
        out.copy_from_slice(r.as_slice());
    })
}

fn decompose(m: DMatrix<f64>, apply: impl Fn(&[f64], &mut [f64])) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "eigensolve needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, EIGEN_MAX_ITER).ok_or(
        Error::EigenNoConvergence {
            size: n,
            iterations: EIGEN_MAX_ITER,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    let norm = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let bound = 1e-10 * norm.max(f64::MIN_POSITIVE);
    let mut max_residual: f64 = 0.0;
    let mut mq = vec![0.0; n];
    for (k, &mu) in values.iter().enumerate() {
        let q = vectors.column(k);
        apply(q.as_slice(), &mut mq);
        let r = mq
            .iter()
            .zip(q.iter())
            .map(|(a, b)| (a - mu * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if r > bound {
            return Err(Error::EigenResidual {
                index: k,
                residual: r,
                bound,
            });
        }
        max_residual = max_residual.max(r);
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        max_residual,
    })
}

/// `(R, (1/R) * sum_{|n| < R} |f(n)|^2)` for each radius.
pub fn radiation_estimate(f: &LatticeFunction, radii: &[f64]) -> Vec<(f64, f64)> {
    radii
        .iter()
        .map(|&r| {
            let s: f64 = f
                .iter()
                .filter(|(v, _)| v.index_norm() < r)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            (r, if r > 0.0 { s / r } else { 0.0 })
        })
        .collect()
}
