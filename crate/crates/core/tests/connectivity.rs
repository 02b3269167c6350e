use lattice_spectral::connectivity::{
    hexagonal_connect, random_surface_points, square_connect, verify_path,
};
use lattice_spectral::momentum::Symbol;
use lattice_spectral::{builtin_lattice, BuiltinLattice, Error};
use num_complex::Complex64;

fn sym(kind: BuiltinLattice, d: usize) -> Symbol {
    Symbol::from_lattice(&builtin_lattice(kind, d).unwrap())
}

#[test]
fn square_paths_verify() {
    for d in [2, 3] {
        let s = sym(BuiltinLattice::Square, d);
        for (i, lambda) in [-0.7, -0.2, 0.35, 0.8].into_iter().enumerate() {
            for z0 in random_surface_points(&s, lambda, 1.0, 3, i as u64).unwrap() {
                let p = square_connect(&z0, lambda, 1.0, 1000).unwrap();
                let r = verify_path(&p, &s, 1e-8);
                assert!(r.passed(), "d={d} lambda={lambda}: {:?}", r.failures);
                assert!(r.end_imaginary <= 1e-10);
            }
        }
    }
}

#[test]
fn hexagonal_paths_verify() {
    let s = sym(BuiltinLattice::Hexagonal, 2);
    for (i, lambda) in [-0.8, -1.0 / 3.0, -0.1, 0.2, 1.0 / 3.0, 0.6]
        .into_iter()
        .enumerate()
    {
        for z0 in random_surface_points(&s, lambda, 1.0, 3, 40 + i as u64).unwrap() {
            let p = hexagonal_connect(&z0, lambda, 1.0, 1000).unwrap();
            let r = verify_path(&p, &s, 1e-8);
            assert!(r.passed(), "lambda={lambda}: {:?}", r.failures);
        }
    }
}

#[test]
fn excluded_energies_are_rejected() {
    let z = vec![Complex64::new(1.0, 0.1), Complex64::new(2.0, -0.1)];
    assert!(matches!(
        hexagonal_connect(&z, 0.0, 1.0, 100),
        Err(Error::ExcludedEnergy(_))
    ));
    assert!(matches!(
        square_connect(&z, 1.0, 1.0, 100),
        Err(Error::ExcludedEnergy(_))
    ));
}

#[test]
fn paths_are_deterministic() {
    let s = sym(BuiltinLattice::Square, 2);
    let z0 = random_surface_points(&s, 0.3, 1.0, 1, 5).unwrap().remove(0);
    let a = square_connect(&z0, 0.3, 1.0, 500).unwrap();
    let b = square_connect(&z0, 0.3, 1.0, 500).unwrap();
    assert_eq!(a.csv_rows(), b.csv_rows());
}
