use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// `H0(z) = sum_m A_m exp(-i m.z)`, an `s x s` matrix of trigonometric
/// polynomials stored by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    s: usize,
    d: usize,
    coeffs: BTreeMap<Vec<i64>, DMatrix<Complex64>>,
}

/// Multiplicative phase `exp(-i m.z)`.
pub(crate) fn phase(m: &[i64], z: &[Complex64]) -> Complex64 {
    let arg: Complex64 = m.iter().zip(z).map(|(&mj, zj)| mj as f64 * zj).sum();
    (-Complex64::i() * arg).exp()
}

pub(crate) fn real_point(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&t| Complex64::new(t, 0.0)).collect()
}

impl Symbol {
    /// Builds a symbol from raw coefficients, checking `A_{-m} = A_m^*`.
    pub fn new(s: usize, d: usize, coeffs: BTreeMap<Vec<i64>, DMatrix<Complex64>>) -> Result<Self> {
        for (m, a) in &coeffs {
            if m.len() != d || a.nrows() != s || a.ncols() != s {
                return Err(Error::InvalidParameter(format!(
                    "coefficient {m:?} has the wrong shape"
                )));
            }
            let neg: Vec<i64> = m.iter().map(|x| -x).collect();
            let partner = coeffs.get(&neg).map(|b| b.adjoint());
            let ok = match partner {
                Some(b) => (a - b).iter().all(|e| e.norm() <= 1e-14),
                None => a.iter().all(|e| e.norm() == 0.0),
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "coefficients at {m:?} and its negative are not adjoint"
                )));
            }
        }
        Ok(Self { s, d, coeffs })
    }

    /// `H0(x)_{jk} = -(deg_j deg_k)^{-1/2} sum_{(j,k,m)} exp(-i m.x)`.
    pub fn from_lattice(spec: &LatticeSpec) -> Self {
        let s = spec.num_cells();
        let d = spec.dim();
        let mut coeffs: BTreeMap<Vec<i64>, DMatrix<Complex64>> = BTreeMap::new();
        for g in spec.generators() {
            let w = -1.0 / ((spec.degree(g.from) * spec.degree(g.to)) as f64).sqrt();
            let a = coeffs
                .entry(g.shift.clone())
                .or_insert_with(|| DMatrix::zeros(s, s));
            a[(g.from, g.to)] += Complex64::new(w, 0.0);
        }
        Self { s, d, coeffs }
    }

    pub fn size(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<i64>, DMatrix<Complex64>> {
        &self.coeffs
    }

    /// `H0(z)` at a complex torus point.
    pub fn matrix(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let mut h = DMatrix::zeros(self.s, self.s);
        for (m, a) in &self.coeffs {
            h += a * phase(m, z);
        }
        h
    }

    pub fn matrix_real(&self, x: &[f64]) -> DMatrix<Complex64> {
        self.matrix(&real_point(x))
    }

    /// Bound on how far any band moves when every coordinate moves by at
    /// most one unit: `sum_m |A_m|_F |m|_1`.
    pub fn lipschitz(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(m, a)| a.norm() * m.iter().map(|x| x.abs() as f64).sum::<f64>())
            .sum()
    }

    /// Eigenvalues of `H0(x)` for real `x`, ascending.
    pub fn band_functions(&self, x: &[f64]) -> Vec<f64> {
        let h = self.matrix_real(x);
        if self.s == 1 {
            return vec![h[(0, 0)].re];
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest entry of `H0(x) - H0(x)^*` in modulus.
    pub fn hermiticity_defect(&self, x: &[f64]) -> f64 {
        let h = self.matrix_real(x);
        (&h - h.adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }
}
