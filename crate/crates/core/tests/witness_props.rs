mod common;

use geam_core::coincidence::max_partial_ioc;
use geam_core::geam::Geam;
use geam_core::linalg::{max_abs_diff, trace, CMatrix};
use geam_core::maps_witness::{
    apply_phi_alpha, build_map, choi_witness, make_rotation, mehta_ratio, min_product_expectation,
    random_generator, random_permutation, witness_closed_form, PositiveMapSpec, RotationMatrix,
    RotationSpec, DEFAULT_RESTARTS,
};
use geam_core::states::{mix_separable, random_separable_mixture, random_state, GaussianRng};

fn random_rotation(size: usize, rng: &mut GaussianRng) -> RotationMatrix {
    let spec = match rng.next_u64() % 3 {
        0 => RotationSpec::Identity { size },
        1 => RotationSpec::Permutation {
            perm: random_permutation(size, rng),
        },
        _ => RotationSpec::Exponential {
            generator: random_generator(size, 1.0, rng),
        },
    };
    make_rotation(size, spec).unwrap()
}

fn random_spec(geam: &Geam, rng: &mut GaussianRng) -> PositiveMapSpec {
    let n = geam.frame_count();
    let k = 1 + (rng.next_u64() % n as u64) as usize;
    let l = 1 + (rng.next_u64() % k as u64) as usize;
    let rotations = (0..k).map(|alpha| random_rotation(geam.frame(alpha).len(), rng)).collect();
    build_map(geam, l, k, rotations).unwrap()
}

fn permutation_rotations(geam: &Geam, k: usize, rng: &mut GaussianRng) -> Vec<RotationMatrix> {
    (0..k)
        .map(|alpha| {
            let size = geam.frame(alpha).len();
            let perm = random_permutation(size, rng);
            make_rotation(size, RotationSpec::Permutation { perm }).unwrap()
        })
        .collect()
}

fn all_block_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|k| (1..=k).map(move |l| (l, k))).collect()
}

#[test]
fn two_routes_agree() {
    let mut rng = GaussianRng::new(21);
    for geam in [common::qubit_mub(), common::qubit_sic(), common::qutrit()] {
        for _ in 0..25 {
            let spec = random_spec(&geam, &mut rng);
            let w = choi_witness(&spec).unwrap();
            assert!(max_abs_diff(w.matrix(), &witness_closed_form(&spec)) <= 1e-10);
        }
    }
}

#[test]
fn mehta_ratio_bound() {
    let mut rng = GaussianRng::new(22);
    for geam in [common::qubit_mub(), common::qubit_sic(), common::qutrit()] {
        let d = geam.dim();
        let limit = 1.0 / (d as f64 - 1.0) + 1e-9;
        for (l, k) in all_block_pairs(geam.frame_count()) {
            let spec = build_map(&geam, l, k, permutation_rotations(&geam, k, &mut rng)).unwrap();
            let worst = (0..500)
                .map(|i| {
                    let p = random_state(d, 1, 10_000 + i).unwrap();
                    mehta_ratio(&spec, p.matrix()).unwrap()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(worst <= limit, "d={d} L={l} K={k}: {worst}");
        }
    }
}

#[test]
fn witnesses_are_block_positive() {
    let mut rng = GaussianRng::new(23);
    for geam in [common::qubit_mub(), common::qutrit()] {
        for _ in 0..4 {
            let spec = random_spec(&geam, &mut rng);
            let w = choi_witness(&spec).unwrap();
            let min = min_product_expectation(w.matrix(), w.dims(), DEFAULT_RESTARTS, 7).unwrap();
            assert!(min.value >= -1e-7, "{}", min.value);
        }
    }
}

#[test]
fn witnesses_nonnegative_on_separable_states() {
    let mut rng = GaussianRng::new(24);
    for geam in [common::qubit_mub(), common::qutrit()] {
        let d = geam.dim();
        let specs: Vec<_> = (0..3).map(|_| random_spec(&geam, &mut rng)).collect();
        let witnesses: Vec<_> = specs.iter().map(|s| choi_witness(s).unwrap()).collect();
        for _ in 0..200 {
            let terms = 1 + (rng.next_u64() % 5) as usize;
            let rho = mix_separable(&random_separable_mixture(d, d, terms, &mut rng).unwrap()).unwrap();
            for w in &witnesses {
                let value = w.hermitian().inner(rho.hermitian());
                assert!(value >= -1e-9, "{value}");
            }
        }
    }
}

#[test]
fn a_forms_agree() {
    for (name, geam) in common::references() {
        let d = geam.dim() as f64;
        let s = geam.certificate().s;
        for (l, k) in all_block_pairs(geam.frame_count()) {
            let from_ioc = d * (2.0 * max_partial_ioc(&geam, l).unwrap() - max_partial_ioc(&geam, k).unwrap());
            let from_mu = (d - 1.0) * s - d * (geam.mu(k) - 2.0 * geam.mu(l));
            assert!((from_ioc - from_mu).abs() <= 1e-12, "{name}");
            let rotations = (0..k).map(|a| RotationMatrix::identity(geam.frame(a).len())).collect();
            let spec = build_map(&geam, l, k, rotations).unwrap();
            assert!((spec.a() - from_mu).abs() <= 1e-12);
            // the trace factor of the map is always (d-1) S
            assert!((spec.trace_factor() - (d - 1.0) * s).abs() <= 1e-12);
        }
    }
}

#[test]
fn trace_of_frame_map_ignores_rotation() {
    let mut rng = GaussianRng::new(25);
    let geam = common::qutrit();
    for _ in 0..20 {
        let x = rng.ginibre(3, 3);
        for (alpha, frame) in geam.frames().iter().enumerate() {
            let p = frame.params();
            let expected = trace(&x) * (p.a * p.gamma);
            let r = random_rotation(frame.len(), &mut rng);
            let out = apply_phi_alpha(&geam, alpha, &r, &x).unwrap();
            assert!((trace(&out) - expected).norm() <= 1e-10);
            let plain = apply_phi_alpha(&geam, alpha, &RotationMatrix::identity(frame.len()), &x).unwrap();
            assert!((trace(&out) - trace(&plain)).norm() <= 1e-10);
        }
    }
}

#[test]
fn rotations_preserve_the_uniform_vector() {
    let mut rng = GaussianRng::new(26);
    for size in 1..=6 {
        for _ in 0..10 {
            let r = random_rotation(size, &mut rng);
            let (orth, sums) = r.residuals();
            assert!(orth <= 1e-10 && sums <= 1e-10);
        }
    }
}

#[test]
fn reduction_witness_on_maximally_mixed() {
    for geam in [common::qubit_mub(), common::qutrit()] {
        let d = geam.dim();
        let n = geam.frame_count();
        let rotations = (0..n).map(|a| RotationMatrix::identity(geam.frame(a).len())).collect();
        let w = choi_witness(&build_map(&geam, n, n, rotations).unwrap()).unwrap();
        let mixed = CMatrix::identity(d * d, d * d).unscale((d * d) as f64);
        assert!(trace(&(w.matrix() * mixed)).re >= 0.0);
    }
}
