use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::symbol::{phase, Symbol};

/// One monomial `c * lambda^k * exp(-i m.z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub m: Vec<i64>,
    pub k: u32,
    pub c: Complex64,
}

/// `det(H0(z) - lambda)` expanded as a finite sum of monomials, giving exact
/// derivatives in `z` and `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    d: usize,
    terms: Vec<Term>,
}

/// Value and first/second derivatives at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub p: Complex64,
    pub grad: Vec<Complex64>,
    pub hessian: DMatrix<Complex64>,
    pub dp_dlambda: Complex64,
    pub dgrad_dlambda: Vec<Complex64>,
}

type Poly = BTreeMap<(Vec<i64>, u32), Complex64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for ((ma, ka), ca) in a {
        for ((mb, kb), cb) in b {
            let m: Vec<i64> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            *out.entry((m, ka + kb)).or_default() += ca * cb;
        }
    }
    out
}

fn permutations(s: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; s], &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let inversions = (0..s)
                .flat_map(|i| ((i + 1)..s).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

impl CharPoly {
    /// Leibniz expansion of `det(H0 - lambda)`; intended for small cell counts.
    pub fn from_symbol(sym: &Symbol) -> Self {
        let s = sym.size();
        let d = sym.dim();
        let entry = |j: usize, k: usize| -> Poly {
            let mut p = Poly::new();
            for (m, a) in sym.coefficients() {
                if a[(j, k)] != Complex64::new(0.0, 0.0) {
                    *p.entry((m.clone(), 0)).or_default() += a[(j, k)];
                }
            }
            if j == k {
                *p.entry((vec![0; d], 1)).or_default() -= Complex64::new(1.0, 0.0);
            }
            p
        };
        let entries: Vec<Vec<Poly>> = (0..s)
            .map(|j| (0..s).map(|k| entry(j, k)).collect())
            .collect();
        let mut total = Poly::new();
        for (perm, sign) in permutations(s) {
            let mut prod = Poly::from([((vec![0; d], 0), Complex64::new(sign, 0.0))]);
            for (j, &k) in perm.iter().enumerate() {
                prod = poly_mul(&prod, &entries[j][k]);
                if prod.is_empty() {
                    break;
                }
            }
            for (key, c) in prod {
                *total.entry(key).or_default() += c;
            }
        }
        let terms = total
            .into_iter()
            .filter(|(_, c)| c.norm() > 1e-15)
            .map(|((m, k), c)| Term { m, k, c })
            .collect();
        Self { d, terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eval(&self, z: &[Complex64], lambda: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.c * lambda.powu(t.k) * phase(&t.m, z))
            .sum()
    }

    pub fn gradient(&self, z: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.d];
        for t in &self.terms {
            let v = t.c * lambda.powu(t.k) * phase(&t.m, z);
            for (gj, &mj) in g.iter_mut().zip(&t.m) {
                *gj += -Complex64::i() * mj as f64 * v;
            }
        }
        g
    }

    pub fn jet(&self, z: &[Complex64], lambda: Complex64) -> Jet {
        let d = self.d;
        let zero = Complex64::new(0.0, 0.0);
        let mut jet = Jet {
            p: zero,
            grad: vec![zero; d],
            hessian: DMatrix::zeros(d, d),
            dp_dlambda: zero,
            dgrad_dlambda: vec![zero; d],
        };
        for t in &self.terms {
            let e = phase(&t.m, z);
            let v = t.c * lambda.powu(t.k) * e;
            let dv = if t.k == 0 {
                zero
            } else {
                t.c * t.k as f64 * lambda.powu(t.k - 1) * e
            };
            jet.p += v;
            jet.dp_dlambda += dv;
            for a in 0..d {
                let fa = -Complex64::i() * t.m[a] as f64;
                jet.grad[a] += fa * v;
                jet.dgrad_dlambda[a] += fa * dv;
                for b in 0..d {
                    jet.hessian[(a, b)] -= (t.m[a] * t.m[b]) as f64 * v;
                }
            }
        }
        jet
    }
}

/// `p(z, lambda) = det(H0(z) - lambda)` by LU factorisation.
pub fn char_poly(sym: &Symbol, z: &[Complex64], lambda: Complex64) -> Complex64 {
    let mut h = sym.matrix(z);
    for i in 0..sym.size() {
        h[(i, i)] -= lambda;
    }
    h.lu().determinant()
}

/// `grad_z p(z, lambda)` from the term-wise derivative of the expansion.
pub fn grad_char_poly(sym: &Symbol, z: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
    CharPoly::from_symbol(sym).gradient(z, lambda)
}
