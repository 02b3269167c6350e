//! Explicit paths inside a complex Fermi surface that end on the real torus,
//! for the square and hexagonal lattices.
//!
//! Square lattice: with `w_j = cos z_j` the surface is `sum_j (w_j + lambda)
//! = 0`. Imaginary parts are cancelled pairwise, then real parts are moved
//! pairwise to `-lambda`, each move keeping `w_j` inside the ellipse
//! `cos(D_gamma_j)` so that `|Im z_j|` never grows.
//!
//! Hexagonal lattice: with `eta_j = cos zeta_j`, `zeta = ((z1+z2)/2,
//! (z1-z2)/2)`, the surface is `eta_2 (eta_1 + eta_2) = mu`. The phase of
//! `eta_2` is rotated onto the real axis, then its modulus is moved into the
//! interval where both `eta_j` lie in `(-1, 1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{builtin_lattice, BuiltinLattice};
use crate::momentum::{fermi_slice, CharPoly, Symbol, SINGULAR_CUTOFF};

/// Consecutive samples may be at most `JUMP_FACTOR * sqrt(dt)` apart on the
/// torus. Near `cos zeta = +-1` the inverse cosine moves like a square root,
/// so a linear bound in `dt` would reject genuine paths.
pub const JUMP_FACTOR: f64 = 8.0;

const TAU: f64 = 2.0 * PI;

/// Point of the complexified torus with real parts in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexTorusPoint {
    pub z: Vec<Complex64>,
}

impl ComplexTorusPoint {
    pub fn new(z: &[Complex64]) -> Self {
        Self {
            z: z.iter()
                .map(|c| Complex64::new(c.re.rem_euclid(TAU), c.im))
                .collect(),
        }
    }

    /// `|Im z|`, the Euclidean norm of the imaginary parts.
    pub fn im_norm(&self) -> f64 {
        self.z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt()
    }

    /// Membership in `{ |Im z| < a }`.
    pub fn in_strip(&self, a: f64) -> bool {
        self.z.iter().map(|c| c.im * c.im).sum::<f64>() < a * a
    }

    /// Distance on the torus: real differences are taken modulo `2 pi`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| {
                let dr = (a.re - b.re + PI).rem_euclid(TAU) - PI;
                let di = a.im - b.im;
                dr * dr + di * di
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// The image `cos({ |Im zeta| <= gamma })`: the filled ellipse with semi-axes
/// `cosh gamma`, `sinh gamma`, or the segment `[-1, 1]` when `gamma = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineEllipse {
    pub gamma: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
}

impl CosineEllipse {
    /// `(Re eta / cosh gamma)^2 + (Im eta / sinh gamma)^2`; for the segment,
    /// `|Re eta|` when `eta` is real and infinity otherwise.
    pub fn test_value(&self, eta: Complex64) -> f64 {
        if self.gamma == 0.0 {
            if eta.im == 0.0 {
                eta.re.abs()
            } else {
                f64::INFINITY
            }
        } else {
            (eta.re / self.semi_major).powi(2) + (eta.im / self.semi_minor).powi(2)
        }
    }

    pub fn contains(&self, eta: Complex64, tol: f64) -> bool {
        if self.gamma == 0.0 {
            eta.im.abs() <= tol && eta.re.abs() <= 1.0 + tol
        } else {
            self.test_value(eta) <= 1.0 + tol
        }
    }
}

pub fn cosine_ellipse(gamma: f64) -> Result<CosineEllipse> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    Ok(CosineEllipse {
        gamma,
        semi_major: gamma.cosh(),
        semi_minor: gamma.sinh(),
    })
}

/// Solution of `cos zeta = w` nearest to `hint` among `+-acos(w) + 2 pi k`,
/// polished by Newton steps where `sin zeta` is not small.
pub fn acos_branch(w: Complex64, hint: Complex64) -> Result<Complex64> {
    let z0 = w.acos();
    let mut best = None::<(f64, Complex64)>;
    for s in [z0, -z0] {
        let k = ((hint.re - s.re) / TAU).round();
        let c = s + Complex64::new(k * TAU, 0.0);
        let d = (c - hint).norm();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, c));
        }
    }
    let (_, mut z) = best.expect("two candidates");
    for _ in 0..3 {
        let s = z.sin();
        if s.norm() < 1e-6 {
            break;
        }
        let step = (z.cos() - w) / s;
        if step.norm() < 1e-17 {
            break;
        }
        z += step;
    }
    if (z - hint).norm() > PI / 2.0 {
        return Err(Error::NoBranch { w, hint });
    }
    Ok(z)
}

/// Minimal-norm Newton steps `z -= p conj(grad p) / |grad p|^2` until
/// `|p| <= 1e-14` or the step stalls.
pub fn project_to_surface(cp: &CharPoly, z: &mut [Complex64], lambda: f64) -> f64 {
    let l = Complex64::new(lambda, 0.0);
    let mut p = cp.eval(z, l);
    for _ in 0..30 {
        if p.norm() <= 1e-14 {
            break;
        }
        let g = cp.gradient(z, l);
        let g2: f64 = g.iter().map(|c| c.norm_sqr()).sum();
        if g2 < 1e-24 {
            break;
        }
        for (zj, gj) in z.iter_mut().zip(&g) {
            *zj -= p * gj.conj() / g2;
        }
        p = cp.eval(z, l);
    }
    p.norm()
}

/// Sampled path `c(t)`, `t in [0, 1]`, with the surface residual at every
/// sample and the stage boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub lambda: f64,
    pub a: f64,
    pub t: Vec<f64>,
    pub points: Vec<ComplexTorusPoint>,
    pub residuals: Vec<f64>,
    pub stage_marks: Vec<f64>,
    /// Skipped or degenerate stages.
    pub notes: Vec<String>,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn end(&self) -> &ComplexTorusPoint {
        self.points.last().expect("paths are nonempty")
    }

    /// Index of the sample at `t`, which must be a grid value.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.t.iter().position(|&s| (s - t).abs() < 1e-12)
    }

    /// Rows `t, Re z1, Im z1, ..., Re zd, Im zd, residual`.
    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.t
            .iter()
            .zip(&self.points)
            .zip(&self.residuals)
            .map(|((&t, p), &r)| {
                let mut row = vec![t];
                for c in &p.z {
                    row.push(c.re);
                    row.push(c.im);
                }
                row.push(r);
                row
            })
            .collect()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let d = self.points.first().map_or(0, |p| p.z.len());
        let mut h = vec!["t".to_string()];
        for j in 1..=d {
            h.push(format!("re_z{j}"));
            h.push(format!("im_z{j}"));
        }
        h.push("residual".into());
        h
    }
}

/// Uniform grid over `segments` equal pieces of `[0, 1]`, containing every
/// piece boundary exactly.
fn stage_grid(segments: usize, steps: usize) -> Vec<f64> {
    let per = (steps / segments).max(1);
    let mut t = Vec::with_capacity(segments * per + 1);
    for seg in 0..segments {
        for i in 0..per {
            t.push((seg as f64 + i as f64 / per as f64) / segments as f64);
        }
    }
    t.push(1.0);
    t
}

fn check_start(cp: &CharPoly, z0: &[Complex64], lambda: f64, a: f64) -> Result<()> {
    if !(lambda > -1.0 && lambda < 1.0) {
        return Err(Error::ExcludedEnergy(lambda));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "strip width must be positive, got {a}"
        )));
    }
    let l = Complex64::new(lambda, 0.0);
    let p = cp.eval(z0, l).norm();
    if p > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "start point is off the surface, |p| = {p:e}"
        )));
    }
    if !ComplexTorusPoint::new(z0).in_strip(a) {
        return Err(Error::InvalidParameter(format!(
            "start point is outside |Im z| < {a}"
        )));
    }
    let g: f64 = cp
        .gradient(z0, l)
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if g <= SINGULAR_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "start point is singular, |grad p| = {g:e}"
        )));
    }
    Ok(())
}

/// Lifts values `w_j(t)` or `eta_j(t)` to a continuous branch of arccos,
/// starting from `start`.
struct Lift {
    prev: Vec<Complex64>,
}

impl Lift {
    fn step(&mut self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        for (p, &wj) in self.prev.iter_mut().zip(w) {
            *p = acos_branch(wj, *p)?;
        }
        Ok(self.prev.clone())
    }
}

/// One pairwise transfer: component `part` of `w_i` ramps to zero over
/// `[t0, t1]` while `w_k` absorbs it, keeping the sum fixed. On the last
/// transfer of a phase both ramp to zero.
#[derive(Debug, Clone, Copy)]
struct Transfer {
    t0: f64,
    t1: f64,
    i: usize,
    k: usize,
    last: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Part {
    Im,
    Re,
}

fn get(w: Complex64, part: Part) -> f64 {
    match part {
        Part::Im => w.im,
        Part::Re => w.re,
    }
}

fn set(w: &mut Complex64, part: Part, v: f64) {
    match part {
        Part::Im => w.im = v,
        Part::Re => w.re = v,
    }
}

/// Plans pairwise transfers that zero the values `u_j = get(w_j) - shift`.
/// Each transfer zeroes the smallest nonzero `|u_i|` against the lowest
/// index `k` of opposite sign with `|u_k| >= |u_i|`.
fn plan(w: &[Complex64], part: Part, shift: f64) -> Result<Vec<(usize, usize, bool)>> {
    let scale = w.iter().map(|c| get(*c, part).abs()).fold(1.0, f64::max);
    let zero = 1e-14 * scale;
    let mut u: Vec<f64> = w.iter().map(|c| get(*c, part) - shift).collect();
    for x in &mut u {
        if x.abs() <= zero {
            *x = 0.0;
        }
    }
    let mut out = Vec::new();
    loop {
        let live: Vec<usize> = (0..u.len()).filter(|&j| u[j] != 0.0).collect();
        if live.is_empty() {
            return Ok(out);
        }
        let i = *live
            .iter()
            .min_by(|&&a, &&b| u[a].abs().total_cmp(&u[b].abs()).then(a.cmp(&b)))
            .expect("nonempty");
        let k = live
            .iter()
            .copied()
            .find(|&k| k != i && u[k] * u[i] < 0.0 && u[k].abs() >= u[i].abs())
            .ok_or_else(|| {
                Error::StageInfeasible(format!(
                    "no compensating index for {part:?} part {} at index {i}; the start point violates the surface equation",
                    u[i]
                ))
            })?;
        let last = live.len() == 2;
        out.push((i, k, last));
        if last {
            return Ok(out);
        }
        u[k] += u[i];
        u[i] = 0.0;
        if u[k].abs() <= zero {
            u[k] = 0.0;
        }
    }
}

fn schedule(pairs: &[(usize, usize, bool)], t0: f64, t1: f64) -> Vec<Transfer> {
    let n = pairs.len().max(1) as f64;
    pairs
        .iter()
        .enumerate()
        .map(|(m, &(i, k, last))| Transfer {
            t0: t0 + (t1 - t0) * m as f64 / n,
            t1: t0 + (t1 - t0) * (m + 1) as f64 / n,
            i,
            k,
            last,
        })
        .collect()
}

/// Applies transfers up to time `t`. Completed transfers set their values
/// exactly.
fn replay(
    w0: &[Complex64],
    part: Part,
    shift: f64,
    transfers: &[Transfer],
    t: f64,
) -> Vec<Complex64> {
    let mut w = w0.to_vec();
    for tr in transfers {
        if t <= tr.t0 {
            break;
        }
        let s = ((t - tr.t0) / (tr.t1 - tr.t0)).min(1.0);
        let ui = get(w[tr.i], part) - shift;
        let uk = get(w[tr.k], part) - shift;
        let new_i = if s >= 1.0 { 0.0 } else { ui * (1.0 - s) };
        let new_k = if tr.last {
            if s >= 1.0 {
                0.0
            } else {
                uk * (1.0 - s)
            }
        } else {
            uk + ui * s
        };
        set(&mut w[tr.i], part, shift + new_i);
        set(&mut w[tr.k], part, shift + new_k);
    }
    w
}

fn square_symbol(d: usize) -> Result<Symbol> {
    Ok(Symbol::from_lattice(&builtin_lattice(
        BuiltinLattice::Square,
        d,
    )?))
}

/// Path from `z0` on `{ sum_j cos z_j = -d lambda }` to the real point
/// `(acos(-lambda), ...)` up to branch, inside `|Im z| < a`. Stages end at
/// `t = j/5`: imaginary parts vanish at `t = 2/5`, all but two `w_j` equal
/// `-lambda` at `t = 4/5`, and all do at `t = 1`.
pub fn square_connect(z0: &[Complex64], lambda: f64, a: f64, steps: usize) -> Result<PathSample> {
    let d = z0.len();
    let sym = square_symbol(d)?;
    let cp = CharPoly::from_symbol(&sym);
    check_start(&cp, z0, lambda, a)?;

    let w0: Vec<Complex64> = z0.iter().map(|z| z.cos()).collect();
    let mut notes = Vec::new();
    let im_pairs = plan(&w0, Part::Im, 0.0)?;
    if im_pairs.is_empty() {
        notes.push("imaginary stage skipped: every cos z_j is already real".to_string());
    }
    let im_sched = schedule(&im_pairs, 0.0, 0.4);
    let w2 = replay(&w0, Part::Im, 0.0, &im_sched, 1.0);
    let re_pairs = plan(&w2, Part::Re, -lambda)?;
    if re_pairs.is_empty() {
        notes.push("real stage skipped: every cos z_j already equals -lambda".to_string());
    }
    let (head, tail) = re_pairs.split_at(re_pairs.len().saturating_sub(1));
    if head.is_empty() && !re_pairs.is_empty() {
        notes.push("stage on [2/5, 4/5] is constant: only one real transfer is needed".to_string());
    }
    let mut re_sched = schedule(head, 0.4, 0.8);
    re_sched.extend(schedule(tail, 0.8, 1.0));

    let t = stage_grid(5, steps);
    let mut lift = Lift { prev: z0.to_vec() };
    let mut points = Vec::with_capacity(t.len());
    let mut residuals = Vec::with_capacity(t.len());
    let l = Complex64::new(lambda, 0.0);
    for &ti in &t {
        let w = if ti <= 0.4 {
            replay(&w0, Part::Im, 0.0, &im_sched, ti)
        } else {
            replay(&w2, Part::Re, -lambda, &re_sched, ti)
        };
        let mut z = if ti == 0.0 {
            z0.to_vec()
        } else {
            lift.step(&w)?
        };
        if cp.eval(&z, l).norm() > 1e-13 {
            project_to_surface(&cp, &mut z, lambda);
            lift.prev = z.clone();
        }
        residuals.push(cp.eval(&z, l).norm());
        points.push(ComplexTorusPoint::new(&z));
    }
    Ok(PathSample {
        lambda,
        a,
        t,
        points,
        residuals,
        stage_marks: (0..=5).map(|j| j as f64 / 5.0).collect(),
        notes,
    })
}

/// `rho = (3/2)(3 lambda^2 - 1)` and `mu = (rho + 1)/2`.
pub fn hexagonal_mu(lambda: f64) -> (f64, f64) {
    let rho = 1.5 * (3.0 * lambda * lambda - 1.0);
    (rho, (rho + 1.0) / 2.0)
}

/// Interval of `r > 0` with `r` and `mu/r - r` both in `(-1, 1)`.
pub fn admissible_interval(mu: f64) -> Result<(f64, f64)> {
    let s = (1.0 + 4.0 * mu).sqrt();
    let (lo, hi) = if mu > 0.0 {
        ((s - 1.0) / 2.0, ((1.0 + s) / 2.0).min(1.0))
    } else if mu < 0.0 {
        ((1.0 - s) / 2.0, (1.0 + s) / 2.0)
    } else {
        (0.0, 1.0)
    };
    if !(lo < hi) || !s.is_finite() {
        return Err(Error::StageInfeasible(format!(
            "no admissible radius for mu = {mu}"
        )));
    }
    Ok((lo, hi))
}

/// `(eta_1, eta_2)` along the hexagonal path at time `t`.
fn hex_eta(mu: f64, eta0: (Complex64, Complex64), r1: f64, t: f64) -> (Complex64, Complex64) {
    let (e1, e2) = eta0;
    if mu == 0.0 {
        // one factor of eta_2 (eta_1 + eta_2) vanishes; slide the other to 1/2
        let s = Complex64::new(t, 0.0);
        let half = Complex64::new(0.5, 0.0);
        return if e2.norm() <= (e1 + e2).norm() {
            (e1 * (1.0 - t) + half * s, e2 * (1.0 - t))
        } else {
            let n2 = e2 * (1.0 - t) + half * s;
            (-n2, n2)
        };
    }
    let r = e2.norm();
    let theta0 = e2.arg();
    let target = (theta0 / PI).round() * PI;
    let eta2 = if t <= 0.5 {
        let theta = theta0 + (target - theta0) * (2.0 * t);
        if t == 0.5 {
            Complex64::new(r * target.cos().round(), 0.0)
        } else {
            Complex64::from_polar(r, theta)
        }
    } else {
        let r_half = r * target.cos().round();
        let s = 2.0 * t - 1.0;
        Complex64::new(r_half + (r1.copysign(r_half) - r_half) * s, 0.0)
    };
    let eta1 = if t == 0.0 { e1 } else { mu / eta2 - eta2 };
    (eta1, eta2)
}

fn hexagonal_symbol() -> Result<Symbol> {
    Ok(Symbol::from_lattice(&builtin_lattice(
        BuiltinLattice::Hexagonal,
        2,
    )?))
}

/// Path from `z0` on the hexagonal Fermi surface to the real torus inside
/// `|Im z| < a`. The phase of `eta_2` is rotated onto the real axis on
/// `[0, 1/2]`; its modulus then moves to the middle of the admissible
/// interval on `[1/2, 1]`.
pub fn hexagonal_connect(
    z0: &[Complex64],
    lambda: f64,
    a: f64,
    steps: usize,
) -> Result<PathSample> {
    if z0.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: z0.len(),
        });
    }
    if lambda == 0.0 {
        return Err(Error::ExcludedEnergy(lambda));
    }
    let sym = hexagonal_symbol()?;
    let cp = CharPoly::from_symbol(&sym);
    check_start(&cp, z0, lambda, a)?;
    let (_, mu) = hexagonal_mu(lambda);
    if !(mu > -0.25 && mu < 2.0) {
        return Err(Error::ExcludedEnergy(lambda));
    }
    let half = Complex64::new(0.5, 0.0);
    let zeta0 = [(z0[0] + z0[1]) * half, (z0[0] - z0[1]) * half];
    let eta0 = (zeta0[0].cos(), zeta0[1].cos());
    let ellipses = [
        cosine_ellipse(zeta0[0].im.abs())?,
        cosine_ellipse(zeta0[1].im.abs())?,
    ];
    let (lo, hi) = admissible_interval(mu)?;
    let r1 = 0.5 * (lo + hi);

    let mut notes = Vec::new();
    if mu == 0.0 {
        notes.push("mu = 0: the vanishing factor is kept at zero".to_string());
    } else if eta0.1.im == 0.0 {
        notes.push("phase stage skipped: eta_2 is already real".to_string());
    }

    let t = stage_grid(2, steps);
    let mut lift = Lift {
        prev: zeta0.to_vec(),
    };
    let mut points = Vec::with_capacity(t.len());
    let mut residuals = Vec::with_capacity(t.len());
    let l = Complex64::new(lambda, 0.0);
    for &ti in &t {
        let (e1, e2) = hex_eta(mu, eta0, r1, ti);
        for (j, e) in [e1, e2].into_iter().enumerate() {
            // rounding slack relative to the ellipse size
            if !ellipses[j].contains(e, 1e-9) {
                return Err(Error::StageInfeasible(format!(
                    "eta_{} = {e} leaves cos(D_{}) at t = {ti}",
                    j + 1,
                    ellipses[j].gamma
                )));
            }
        }
        let zeta = if ti == 0.0 {
            zeta0.to_vec()
        } else {
            lift.step(&[e1, e2])?
        };
        let mut z = vec![zeta[0] + zeta[1], zeta[0] - zeta[1]];
        if ti == 0.0 {
            z = z0.to_vec();
        }
        if cp.eval(&z, l).norm() > 1e-13 {
            project_to_surface(&cp, &mut z, lambda);
            lift.prev = vec![(z[0] + z[1]) * half, (z[0] - z[1]) * half];
        }
        residuals.push(cp.eval(&z, l).norm());
        points.push(ComplexTorusPoint::new(&z));
    }
    Ok(PathSample {
        lambda,
        a,
        t,
        points,
        residuals,
        stage_marks: vec![0.0, 0.5, 1.0],
        notes,
    })
}

/// `cos z1 + cos z2 + cos(z1 - z2) - (2 eta_2 (eta_1 + eta_2) - 1)`.
pub fn hexagonal_identity_defect(z: &[Complex64]) -> f64 {
    let half = Complex64::new(0.5, 0.0);
    let e1 = ((z[0] + z[1]) * half).cos();
    let e2 = ((z[0] - z[1]) * half).cos();
    let lhs = z[0].cos() + z[1].cos() + (z[0] - z[1]).cos();
    (lhs - (2.0 * e2 * (e1 + e2) - 1.0)).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub max_residual: f64,
    pub end_imaginary: f64,
    pub max_im_norm: f64,
    pub max_jump: f64,
    pub jump_bound: f64,
    /// `|grad p|` at the endpoint.
    pub end_gradient: f64,
    pub failures: Vec<String>,
}

impl PathReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks residuals, the real endpoint, strip containment and continuity.
pub fn verify_path(ps: &PathSample, sym: &Symbol, tol: f64) -> PathReport {
    let cp = CharPoly::from_symbol(sym);
    let l = Complex64::new(ps.lambda, 0.0);
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut max_im_norm: f64 = 0.0;
    for (t, p) in ps.t.iter().zip(&ps.points) {
        let r = cp.eval(&p.z, l).norm();
        if r > tol && r > max_residual {
            failures.retain(|f: &String| !f.starts_with("residual"));
            failures.push(format!("residual {r:e} at t = {t}"));
        }
        max_residual = max_residual.max(r);
        max_im_norm = max_im_norm.max(p.im_norm());
        if !p.in_strip(ps.a) {
            failures.push(format!("|Im z| = {} >= a at t = {t}", p.im_norm()));
        }
    }
    let max_jump = ps
        .points
        .windows(2)
        .map(|w| w[0].distance(&w[1]))
        .fold(0.0, f64::max);
    let max_dt = ps.t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let jump_bound = JUMP_FACTOR * max_dt.sqrt();
    if max_jump > jump_bound {
        failures.push(format!(
            "jump {max_jump} between consecutive samples exceeds {jump_bound}"
        ));
    }
    let end = ps.end();
    let end_imaginary = end.z.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if end_imaginary > tol {
        failures.push(format!("endpoint imaginary part {end_imaginary:e}"));
    }
    let end_gradient = cp
        .gradient(&end.z, l)
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    PathReport {
        max_residual,
        end_imaginary,
        max_im_norm,
        max_jump,
        jump_bound,
        end_gradient,
        failures,
    }
}

/// Points of the complex Fermi surface inside `|Im z| < a`, obtained by
/// pushing real Fermi points off the torus and projecting back with Newton.
pub fn random_surface_points(
    sym: &Symbol,
    lambda: f64,
    a: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let d = sym.dim();
    let grid = if d <= 2 { 64 } else { 32 };
    let real = fermi_slice(sym, lambda, grid, 1e-12)?;
    if real.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no real Fermi points at lambda = {lambda}"
        )));
    }
    let cp = CharPoly::from_symbol(sym);
    let l = Complex64::new(lambda, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 100 * count + 1000 {
            return Err(Error::StageInfeasible(format!(
                "could not generate {count} surface points at lambda = {lambda}"
            )));
        }
        let x = &real.points[rng.random_range(0..real.len())];
        let size = rng.random_range(0.05..0.6) * a;
        let mut dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        for v in &mut dir {
            *v *= size / n;
        }
        let mut z: Vec<Complex64> = x
            .iter()
            .zip(&dir)
            .map(|(&xr, &y)| Complex64::new(xr + rng.random_range(-0.05..0.05), y))
            .collect();
        let res = project_to_surface(&cp, &mut z, lambda);
        let pt = ComplexTorusPoint::new(&z);
        let g: f64 = cp
            .gradient(&z, l)
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let complex = pt.im_norm() > 1e-3;
        if res <= 1e-12 && pt.in_strip(a) && g > 1e-3 && complex {
            out.push(z);
        }
    }
    Ok(out)
}
