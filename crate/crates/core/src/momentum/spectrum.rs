use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::charpoly::CharPoly;
use super::symbol::{real_point, Symbol};
use crate::error::{Error, Result};

/// Closed real interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// Outcome of the critical-point solve `p = 0, grad_x p = 0` in `(x, lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub abs_p: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Convergence targets of the critical-point solver.
pub const CRITICAL_P_TOL: f64 = 1e-14;
pub const CRITICAL_GRAD_TOL: f64 = 1e-10;
const CRITICAL_MAX_ITER: usize = 500;

/// Distance below which threshold values are identified.
pub const THRESHOLD_DEDUP: f64 = 1e-6;

fn residual(cp: &CharPoly, x: &[f64], lambda: f64) -> (DVector<f64>, DMatrix<f64>) {
    let d = x.len();
    let jet = cp.jet(&real_point(x), Complex64::new(lambda, 0.0));
    let mut f = DVector::zeros(d + 1);
    let mut j = DMatrix::zeros(d + 1, d + 1);
    f[0] = jet.p.re;
    j[(0, d)] = jet.dp_dlambda.re;
    for a in 0..d {
        f[a + 1] = jet.grad[a].re;
        j[(0, a)] = jet.grad[a].re;
        j[(a + 1, d)] = jet.dgrad_dlambda[a].re;
        for b in 0..d {
            j[(a + 1, b)] = jet.hessian[(a, b)].re;
        }
    }
    (f, j)
}

fn split_norms(f: &DVector<f64>) -> (f64, f64) {
    (f[0].abs(), f.rows(1, f.len() - 1).norm())
}

/// Levenberg-Marquardt on `F(x, lambda) = (p, grad_x p)` from a starting guess.
pub fn refine_critical(cp: &CharPoly, x0: &[f64], lambda0: f64) -> CriticalPoint {
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut lambda = lambda0;
    let (mut f, mut j) = residual(cp, &x, lambda);
    let mut cost = f.norm_squared();
    let mut mu = 1e-3 * (j.transpose() * &j).diagonal().max().max(1e-12);
    let mut iterations = 0;
    let done = |f: &DVector<f64>| {
        let (p, g) = split_norms(f);
        p <= CRITICAL_P_TOL && g <= CRITICAL_GRAD_TOL
    };
    while !done(&f) && iterations < CRITICAL_MAX_ITER && mu < 1e20 {
        iterations += 1;
        let jt = j.transpose();
        let mut a = &jt * &j;
        for i in 0..=d {
            a[(i, i)] += mu;
        }
        let rhs = -(&jt * &f);
        let Some(step) = a.lu().solve(&rhs) else {
            mu *= 10.0;
            continue;
        };
        let xt: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let lt = lambda + step[d];
        let (ft, jt_new) = residual(cp, &xt, lt);
        let ct = ft.norm_squared();
        if ct < cost {
            x = xt;
            lambda = lt;
            f = ft;
            j = jt_new;
            cost = ct;
            mu = (mu / 3.0).max(1e-300);
        } else {
            mu *= 4.0;
        }
    }
    let (abs_p, grad_norm) = split_norms(&f);
    CriticalPoint {
        x,
        lambda,
        abs_p,
        grad_norm,
        converged: done(&f),
        iterations,
    }
}

fn wrap(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

fn grid_point(idx: usize, n: usize, d: usize, coord: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut rest = idx;
    let mut x = vec![0.0; d];
    for xj in x.iter_mut() {
        *xj = coord(rest % n);
        rest /= n;
    }
    x
}

/// Union of the band ranges over a closed grid `linspace(0, 2 pi, n)^d`,
/// with extrema polished by the critical-point solver and bands joined
/// when they overlap or nearly touch (gap within grid resolution).
pub fn spectrum(sym: &Symbol, grid_per_axis: usize) -> Result<Vec<Interval>> {
    if grid_per_axis < 16 {
        return Err(Error::InvalidParameter(format!(
            "spectrum grid must have at least 16 points per axis, got {grid_per_axis}"
        )));
    }
    let n = grid_per_axis;
    let d = sym.dim();
    let s = sym.size();
    let h = 2.0 * PI / (n - 1) as f64;
    let total = n.pow(d as u32);
    let coord = |i: usize| i as f64 * h;

    // Per band: (min value, argmin index, max value, argmax index).
    let init = || vec![(f64::INFINITY, 0usize, f64::NEG_INFINITY, 0usize); s];
    let extrema = (0..total)
        .into_par_iter()
        .fold(init, |mut acc, idx| {
            let bands = sym.band_functions(&grid_point(idx, n, d, coord));
            for (k, &b) in bands.iter().enumerate() {
                if b < acc[k].0 {
                    acc[k].0 = b;
                    acc[k].1 = idx;
                }
                if b > acc[k].2 {
                    acc[k].2 = b;
                    acc[k].3 = idx;
                }
            }
            acc
        })
        .reduce(init, |a, b| {
            a.into_iter()
                .zip(b)
                .map(|(p, q)| {
                    let (lo, lo_i) = if q.0 < p.0 || (q.0 == p.0 && q.1 < p.1) {
                        (q.0, q.1)
                    } else {
                        (p.0, p.1)
                    };
                    let (hi, hi_i) = if q.2 > p.2 || (q.2 == p.2 && q.3 < p.3) {
                        (q.2, q.3)
                    } else {
                        (p.2, p.3)
                    };
                    (lo, lo_i, hi, hi_i)
                })
                .collect()
        });

    let cp = CharPoly::from_symbol(sym);
    let slack = sym.lipschitz() * h;
    let polish = |value: f64, idx: usize, lower: bool| -> f64 {
        let x0 = grid_point(idx, n, d, coord);
        let c = refine_critical(&cp, &x0, value);
        if !c.converged {
            return value;
        }
        let snapped = nearest_band(sym, &c.x, c.lambda);
        let better = if lower {
            snapped <= value
        } else {
            snapped >= value
        };
        if better && (snapped - value).abs() <= slack {
            snapped
        } else {
            value
        }
    };
    let mut intervals: Vec<Interval> = extrema
        .iter()
        .map(|&(lo, lo_i, hi, hi_i)| Interval {
            lo: polish(lo, lo_i, true),
            hi: polish(hi, hi_i, false),
        })
        .collect();
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<Interval> = Vec::new();
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv.lo <= last.hi + slack => last.hi = last.hi.max(iv.hi),
            _ => merged.push(iv),
        }
    }
    Ok(merged)
}

fn nearest_band(sym: &Symbol, x: &[f64], lambda: f64) -> f64 {
    sym.band_functions(x)
        .into_iter()
        .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
        .expect("at least one band")
}

/// Critical values of `p` on the real torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// Converged critical values, sorted and deduplicated.
    pub values: Vec<f64>,
    /// Candidates where the solver did not reach the targets; the grid
    /// estimate is kept here.
    pub unconverged: Vec<CriticalPoint>,
    pub candidates: usize,
}

impl ThresholdReport {
    /// Converged values together with retained grid estimates.
    pub fn all_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .values
            .iter()
            .copied()
            .chain(self.unconverged.iter().map(|c| c.lambda))
            .collect();
        v.sort_by(f64::total_cmp);
        dedup(v, THRESHOLD_DEDUP)
    }
}

fn dedup(sorted: Vec<f64>, tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in sorted {
        if out.last().is_none_or(|&last| v - last > tol) {
            out.push(v);
        }
    }
    out
}

/// Real `lambda` at which some real `x` has `p = 0` and `grad_x p = 0`.
///
/// Candidates are discrete local minima of `|grad_x p(x, lambda_k(x))|` on
/// the periodic grid, kept when small compared with the Hessian times the
/// grid spacing, then refined by [`refine_critical`] until `|grad_x p|`
/// drops below `refine_tol`.
pub fn thresholds(sym: &Symbol, grid_per_axis: usize, refine_tol: f64) -> Result<ThresholdReport> {
    if grid_per_axis < 32 {
        return Err(Error::InvalidParameter(format!(
            "threshold grid must have at least 32 points per axis, got {grid_per_axis}"
        )));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "refine_tol must be positive".into(),
        ));
    }
    let n = grid_per_axis;
    let d = sym.dim();
    let s = sym.size();
    let h = 2.0 * PI / n as f64;
    let total = n.pow(d as u32);
    let coord = |i: usize| i as f64 * h;
    let cp = CharPoly::from_symbol(sym);

    // (band values, |grad p| per band, |Hess p| per band) at each grid point.
    let samples: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let x = grid_point(idx, n, d, coord);
            let bands = sym.band_functions(&x);
            let z = real_point(&x);
            let mut g = Vec::with_capacity(s);
            let mut hs = Vec::with_capacity(s);
            for &b in &bands {
                let jet = cp.jet(&z, Complex64::new(b, 0.0));
                g.push(jet.grad.iter().map(|c| c.re * c.re).sum::<f64>().sqrt());
                hs.push(jet.hessian.map(|c| c.re).norm());
            }
            (bands, g, hs)
        })
        .collect();

    let offsets = neighbor_offsets(d);
    let candidates: Vec<(usize, usize)> = (0..total)
        .into_par_iter()
        .flat_map_iter(|idx| {
            let samples = &samples;
            let offsets = &offsets;
            (0..s).filter_map(move |k| {
                let g = samples[idx].1[k];
                let filter = samples[idx].2[k] * h * (d as f64).sqrt() + 1e-12;
                if g > filter {
                    return None;
                }
                let is_min = offsets
                    .iter()
                    .all(|off| g <= samples[shift_index(idx, off, n, d)].1[k]);
                is_min.then_some((idx, k))
            })
        })
        .collect();

    let refined: Vec<CriticalPoint> = candidates
        .par_iter()
        .map(|&(idx, k)| {
            let x0 = grid_point(idx, n, d, coord);
            let mut c = refine_critical(&cp, &x0, samples[idx].0[k]);
            c.converged = c.converged || (c.abs_p <= CRITICAL_P_TOL && c.grad_norm <= refine_tol);
            c.x = c.x.iter().map(|&t| wrap(t)).collect();
            if c.converged {
                c.lambda = nearest_band(sym, &c.x, c.lambda);
            } else {
                c.lambda = samples[idx].0[k];
            }
            c
        })
        .collect();

    let mut values: Vec<f64> = refined
        .iter()
        .filter(|c| c.converged)
        .map(|c| c.lambda)
        .collect();
    values.sort_by(f64::total_cmp);
    let values = dedup(values, THRESHOLD_DEDUP);
    let mut unconverged: Vec<CriticalPoint> = refined
        .into_iter()
        .filter(|c| {
            !c.converged
                && !values
                    .iter()
                    .any(|v| (v - c.lambda).abs() <= THRESHOLD_DEDUP)
        })
        .collect();
    unconverged.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    unconverged.dedup_by(|a, b| (a.lambda - b.lambda).abs() <= THRESHOLD_DEDUP);
    Ok(ThresholdReport {
        values,
        unconverged,
        candidates: candidates.len(),
    })
}

fn neighbor_offsets(d: usize) -> Vec<Vec<i64>> {
    crate::lattice::integer_cube(d, 1)
        .into_iter()
        .filter(|o| o.iter().any(|&x| x != 0))
        .collect()
}

fn shift_index(idx: usize, off: &[i64], n: usize, d: usize) -> usize {
    let mut rest = idx;
    let mut out = 0;
    let mut stride = 1;
    for &o in off.iter().take(d) {
        let i = (rest % n) as i64;
        rest /= n;
        let j = (i + o).rem_euclid(n as i64) as usize;
        out += j * stride;
        stride *= n;
    }
    out
}
