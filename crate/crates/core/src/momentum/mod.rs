//! Momentum-space symbols, characteristic polynomials, spectra, thresholds
//! and Fermi surfaces.
//!
//! The shift `n -> n + e_k` becomes multiplication by `exp(-i x_k)`, so the
//! symbol of a lattice is `H0(x) = sum_m A_m exp(-i m.x)`.

mod charpoly;
mod fermi;
mod spectrum;
mod symbol;

pub use charpoly::{char_poly, grad_char_poly, CharPoly, Jet, Term};
pub use fermi::{exclusion_set_t1, fermi_slice, ExclusionSet, FermiSample, SINGULAR_CUTOFF};
pub use spectrum::{
    refine_critical, spectrum, thresholds, CriticalPoint, Interval, ThresholdReport,
    CRITICAL_GRAD_TOL, CRITICAL_P_TOL, THRESHOLD_DEDUP,
};
pub use symbol::Symbol;

use crate::lattice::LatticeSpec;

pub fn symbol_from_lattice(spec: &LatticeSpec) -> Symbol {
    Symbol::from_lattice(spec)
}

pub fn band_functions(sym: &Symbol, x: &[f64]) -> Vec<f64> {
    sym.band_functions(x)
}
