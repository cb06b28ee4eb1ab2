#![allow(dead_code)]

use geam_core::geam::{build_geam, uniform_weights, Geam, Sign};
use geam_core::linalg::{c, CMatrix};
use geam_core::operator_basis::{gell_mann_basis, partition_basis};
use geam_core::states::GaussianRng;

/// Rescaled complete set of qubit MUBs: frames (x, y, z), S = 1/9.
pub fn qubit_mub() -> Geam {
    let p = partition_basis(gell_mann_basis(2).unwrap(), &[2, 2, 2]).unwrap();
    build_geam(&p, &uniform_weights(3), 1.0 / 9.0, &[Sign::Plus; 3]).unwrap()
}

/// Single frame of four operators, S = 1/6 (a scaled qubit SIC).
pub fn qubit_sic() -> Geam {
    let p = partition_basis(gell_mann_basis(2).unwrap(), &[4]).unwrap();
    build_geam(&p, &[1.0], 1.0 / 6.0, &[Sign::Plus]).unwrap()
}

/// Four frames of three operators on C^3, S = 1/64.
pub fn qutrit() -> Geam {
    let p = partition_basis(gell_mann_basis(3).unwrap(), &[3, 3, 3, 3]).unwrap();
    build_geam(&p, &uniform_weights(4), 1.0 / 64.0, &[Sign::Plus; 4]).unwrap()
}

pub fn references() -> Vec<(&'static str, Geam)> {
    vec![("qubit MUB", qubit_mub()), ("qubit SIC", qubit_sic()), ("qutrit", qutrit())]
}

pub fn random_matrix(n: usize, m: usize, rng: &mut GaussianRng) -> CMatrix {
    rng.ginibre(n, m)
}

/// Haar unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary(n: usize, rng: &mut GaussianRng) -> CMatrix {
    let g = rng.ginibre(n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let z = r[(i, i)];
            z / c(z.norm(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    q * phases
}
