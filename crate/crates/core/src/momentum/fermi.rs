use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::charpoly::CharPoly;
use super::spectrum::Interval;
use super::symbol::{real_point, Symbol};
use crate::error::{Error, Result};
use crate::lattice::BuiltinLattice;

/// Default relative cutoff below which a Fermi point is classified singular.
pub const SINGULAR_CUTOFF: f64 = 1e-6;

/// Points of the real Fermi surface `{x : p(x, lambda) = 0}` found on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermiSample {
    pub lambda: f64,
    pub tol: f64,
    /// Torus points in `[0, 2 pi)^d`.
    pub points: Vec<Vec<f64>>,
    pub abs_p: Vec<f64>,
    pub gradient_norms: Vec<f64>,
}

impl FermiSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether each point has `|grad p| < cutoff * (1 + |lambda|)`.
    pub fn singular_mask(&self, cutoff: f64) -> Vec<bool> {
        let bound = cutoff * (1.0 + self.lambda.abs());
        self.gradient_norms.iter().map(|&g| g < bound).collect()
    }

    pub fn singular_count(&self) -> usize {
        self.singular_mask(SINGULAR_CUTOFF)
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

struct RealPoly<'a> {
    cp: &'a CharPoly,
    lambda: Complex64,
}

impl RealPoly<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.cp.eval(&real_point(x), self.lambda).re
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.cp
            .gradient(&real_point(x), self.lambda)
            .into_iter()
            .map(|c| c.re)
            .collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Root of `p` on the segment `x + t e_axis`, `t in [0, h]`, given a sign change.
fn root_on_segment(f: &RealPoly, x: &[f64], axis: usize, h: f64, tol: f64) -> Vec<f64> {
    let at = |t: f64| {
        let mut y = x.to_vec();
        y[axis] += t;
        y
    };
    let (mut a, mut b) = (0.0, h);
    let mut fa = f.value(&at(a));
    let mut t = 0.5 * h;
    for _ in 0..200 {
        let y = at(t);
        let ft = f.value(&y);
        if ft.abs() <= 0.01 * tol || b - a <= 1e-16 * (1.0 + x[axis].abs()) {
            break;
        }
        if (ft < 0.0) == (fa < 0.0) {
            a = t;
            fa = ft;
        } else {
            b = t;
        }
        let slope = f.grad(&y)[axis];
        let newton = t - ft / slope;
        t = if slope != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
    }
    at(t)
}

/// Newton iteration on `grad p = 0` from `x0`.
fn critical_newton(cp: &CharPoly, lambda: Complex64, x0: &[f64]) -> Vec<f64> {
    let d = x0.len();
    let mut x = x0.to_vec();
    for _ in 0..50 {
        let jet = cp.jet(&real_point(&x), lambda);
        let g = DVector::from_iterator(d, jet.grad.iter().map(|c| c.re));
        if g.norm() < 1e-15 {
            break;
        }
        let hess = DMatrix::from_fn(d, d, |a, b| jet.hessian[(a, b)].re);
        let Some(step) = hess.lu().solve(&(-g)) else {
            break;
        };
        if step.norm() > PI {
            break;
        }
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi += si;
        }
        if step.norm() < 1e-15 {
            break;
        }
    }
    x
}

fn grid_point(idx: usize, n: usize, d: usize, h: f64) -> Vec<f64> {
    let mut rest = idx;
    (0..d)
        .map(|_| {
            let i = rest % n;
            rest /= n;
            i as f64 * h
        })
        .collect()
}

fn shifted(idx: usize, axis: usize, step: i64, n: usize) -> usize {
    let stride = n.pow(axis as u32);
    let i = (idx / stride) % n;
    let j = (i as i64 + step).rem_euclid(n as i64) as usize;
    idx - i * stride + j * stride
}

/// Samples the real Fermi surface at energy `lambda`.
///
/// Sign changes of `p` between grid neighbours along each axis are refined by
/// safeguarded Newton on that axis. Grid local minima of `|p|` without a
/// nearby sign change (tangential contact) are refined by Newton on
/// `grad p = 0`. Only points with `|p| <= tol` are kept.
pub fn fermi_slice(
    sym: &Symbol,
    lambda: f64,
    grid_per_axis: usize,
    tol: f64,
) -> Result<FermiSample> {
    if grid_per_axis < 32 {
        return Err(Error::InvalidParameter(format!(
            "Fermi grid must have at least 32 points per axis, got {grid_per_axis}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let n = grid_per_axis;
    let d = sym.dim();
    let h = 2.0 * PI / n as f64;
    let total = n.pow(d as u32);
    let cp = CharPoly::from_symbol(sym);
    let lam = Complex64::new(lambda, 0.0);
    let f = RealPoly {
        cp: &cp,
        lambda: lam,
    };
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| f.value(&grid_point(idx, n, d, h)))
        .collect();

    let found: Vec<Vec<Vec<f64>>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let f = RealPoly {
                cp: &cp,
                lambda: lam,
            };
            let x = grid_point(idx, n, d, h);
            let v = values[idx];
            let mut out = Vec::new();
            if v.abs() <= tol {
                out.push(x.clone());
                return out;
            }
            let mut sign_change_near = false;
            for axis in 0..d {
                let fwd = values[shifted(idx, axis, 1, n)];
                if fwd.abs() > tol && (fwd < 0.0) != (v < 0.0) {
                    out.push(root_on_segment(&f, &x, axis, h, tol));
                    sign_change_near = true;
                }
                let back = values[shifted(idx, axis, -1, n)];
                sign_change_near |= (back < 0.0) != (v < 0.0);
            }
            if !sign_change_near {
                let is_min = crate::lattice::integer_cube(d, 1)
                    .iter()
                    .filter(|o| o.iter().any(|&c| c != 0))
                    .all(|o| {
                        let mut j = idx;
                        for (axis, &step) in o.iter().enumerate() {
                            j = shifted(j, axis, step, n);
                        }
                        v.abs() <= values[j].abs()
                    });
                if is_min {
                    out.push(critical_newton(&cp, lam, &x));
                }
            }
            out
        })
        .collect();

    let mut sample = FermiSample {
        lambda,
        tol,
        points: Vec::new(),
        abs_p: Vec::new(),
        gradient_norms: Vec::new(),
    };
    for x in found.into_iter().flatten() {
        let x: Vec<f64> = x.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
        let p = f.value(&x).abs();
        if p <= tol {
            sample.gradient_norms.push(norm(&f.grad(&x)));
            sample.abs_p.push(p);
            sample.points.push(x);
        }
    }
    Ok(sample)
}

/// Energies excluded from the uniqueness hypothesis for a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExclusionSet {
    Listed {
        points: Vec<f64>,
        intervals: Vec<Interval>,
    },
    /// No exclusion set is known for this lattice.
    Unspecified,
}

impl ExclusionSet {
    /// `None` when the set is unspecified.
    pub fn contains(&self, lambda: f64, tol: f64) -> Option<bool> {
        match self {
            ExclusionSet::Listed { points, intervals } => Some(
                points.iter().any(|p| (p - lambda).abs() <= tol)
                    || intervals.iter().any(|iv| iv.contains(lambda, tol)),
            ),
            ExclusionSet::Unspecified => None,
        }
    }

    /// Distance from `lambda` to the set (infinite when unspecified).
    pub fn distance(&self, lambda: f64) -> f64 {
        match self {
            ExclusionSet::Listed { points, intervals } => points
                .iter()
                .map(|p| (p - lambda).abs())
                .chain(intervals.iter().map(|iv| {
                    if lambda < iv.lo {
                        iv.lo - lambda
                    } else if lambda > iv.hi {
                        lambda - iv.hi
                    } else {
                        0.0
                    }
                }))
                .fold(f64::INFINITY, f64::min),
            ExclusionSet::Unspecified => f64::INFINITY,
        }
    }
}

/// The exclusion set for a builtin lattice.
pub fn exclusion_set_t1(kind: BuiltinLattice, d: usize) -> ExclusionSet {
    let pts = |v: &[f64]| ExclusionSet::Listed {
        points: v.to_vec(),
        intervals: Vec::new(),
    };
    match kind {
        BuiltinLattice::Square => pts(&[-1.0, 1.0]),
        BuiltinLattice::Hexagonal => pts(&[-1.0, 0.0, 1.0]),
        BuiltinLattice::Kagome => pts(&[-1.0, -0.25, 0.5]),
        BuiltinLattice::Ladder => {
            let q = (2 * d + 1) as f64;
            let edge = (2 * d) as f64 - 1.0;
            ExclusionSet::Listed {
                points: Vec::new(),
                intervals: vec![
                    Interval {
                        lo: -1.0,
                        hi: -edge / q,
                    },
                    Interval {
                        lo: edge / q,
                        hi: 1.0,
                    },
                ],
            }
        }
        BuiltinLattice::Triangular => ExclusionSet::Unspecified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::builtin_lattice;

    fn sym(kind: BuiltinLattice, d: usize) -> Symbol {
        Symbol::from_lattice(&builtin_lattice(kind, d).unwrap())
    }

    #[test]
    fn square_zero_energy_slice() {
        let s = sym(BuiltinLattice::Square, 2);
        let fs = fermi_slice(&s, 0.0, 64, 1e-12).unwrap();
        assert!(!fs.is_empty());
        for x in &fs.points {
            assert!((x[0].cos() + x[1].cos()).abs() < 1e-11);
            assert!(x.iter().all(|&t| (0.0..2.0 * PI).contains(&t)));
        }
        assert!(fs
            .points
            .iter()
            .any(|x| (x[0] - PI / 2.0).abs() < 1e-9 && (x[1] - PI / 2.0).abs() < 1e-9));
        // The saddle points (0, pi), (pi, 0) are singular.
        assert!(fs.singular_count() > 0);
    }

    #[test]
    fn slice_outside_spectrum_is_empty() {
        let s = sym(BuiltinLattice::Square, 2);
        assert!(fermi_slice(&s, 2.0, 32, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn hexagonal_dirac_points_found_by_contact() {
        // At lambda = 0 the surface degenerates to the two conical points.
        let s = sym(BuiltinLattice::Hexagonal, 2);
        let fs = fermi_slice(&s, 0.0, 48, 1e-12).unwrap();
        assert!(!fs.is_empty());
        for x in &fs.points {
            let k1 = (x[0] - 2.0 * PI / 3.0).abs() < 1e-6 && (x[1] - 4.0 * PI / 3.0).abs() < 1e-6;
            let k2 = (x[0] - 4.0 * PI / 3.0).abs() < 1e-6 && (x[1] - 2.0 * PI / 3.0).abs() < 1e-6;
            assert!(k1 || k2, "{x:?}");
        }
    }

    #[test]
    fn exclusion_sets() {
        let sq = exclusion_set_t1(BuiltinLattice::Square, 2);
        assert_eq!(sq.contains(1.0, 0.0), Some(true));
        assert_eq!(sq.contains(0.2, 1e-9), Some(false));
        let lad = exclusion_set_t1(BuiltinLattice::Ladder, 2);
        assert_eq!(lad.contains(-0.7, 0.0), Some(true));
        assert_eq!(lad.contains(0.0, 0.0), Some(false));
        assert!((lad.distance(0.5) - 0.1).abs() < 1e-15);
        assert_eq!(
            exclusion_set_t1(BuiltinLattice::Triangular, 2).contains(0.0, 0.0),
            None
        );
    }
}
