//! Acceptance suite: one line per criterion, then a single assertion.

mod common;

use std::fs;
use std::path::Path;

use geam_core::coincidence::{ioc, ioc_bounds, max_ioc, partial_ioc, probabilities};
use geam_core::criteria::{
    correlation_matrix, enhanced_criterion, evaluate_batch, trace_criterion, trace_norm_criterion,
    CRITERION_TOL,
};
use geam_core::geam::Geam;
use geam_core::linalg::{max_abs_diff, CMatrix};
use geam_core::maps_witness::{
    build_map, choi_witness, detect, make_rotation, mehta_ratio, min_product_expectation,
    random_generator, random_permutation, witness_closed_form, RotationMatrix, RotationSpec,
    Witness, DEFAULT_RESTARTS, DETECTION_TOL,
};
use geam_core::states::{
    canonical_state, max_entangled_matrix, mix_separable, random_separable_mixture, random_state,
    random_state_with, CanonicalKind, DensityMatrix, GaussianRng,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn block_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|k| (1..=k).map(move |l| (l, k))).collect()
}

fn identity_rotations(geam: &Geam, k: usize) -> Vec<RotationMatrix> {
    (0..k).map(|a| RotationMatrix::identity(geam.frame(a).len())).collect()
}

fn permutation_rotations(geam: &Geam, k: usize, rng: &mut GaussianRng) -> Vec<RotationMatrix> {
    (0..k)
        .map(|a| {
            let size = geam.frame(a).len();
            let perm = random_permutation(size, rng);
            make_rotation(size, RotationSpec::Permutation { perm }).unwrap()
        })
        .collect()
}

fn reduction_witness(geam: &Geam) -> Witness {
    let n = geam.frame_count();
    choi_witness(&build_map(geam, n, n, identity_rotations(geam, n)).unwrap()).unwrap()
}

fn example_one(geam: &Geam) -> CMatrix {
    let d = geam.dim();
    let s = geam.certificate().s;
    let p_plus = max_entangled_matrix(d);
    (CMatrix::identity(d * d, d * d) - p_plus.scale(d as f64)).scale(s)
}

fn ensemble(d: usize, seed: u64) -> Vec<DensityMatrix> {
    let mut rng = GaussianRng::new(seed);
    (0..200).map(|i| random_state_with(d, 1 + i % d, &mut rng).unwrap()).collect()
}

fn design_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, geam, kappa) in [
        ("qubit MUB", common::qubit_mub(), 1.0 / 9.0),
        ("qubit SIC", common::qubit_sic(), 1.0 / 6.0),
    ] {
        let cert = geam.certificate();
        worst = worst.max(cert.residual);
        ensure(cert.is_conical && cert.residual <= 1e-9, || format!("{name}: residual {:e}", cert.residual))?;
        ensure(
            (cert.kappa_plus - kappa).abs() <= 1e-12 && (cert.kappa_minus - kappa).abs() <= 1e-12,
            || format!("{name}: kappa ({}, {})", cert.kappa_plus, cert.kappa_minus),
        )?;
    }
    Ok(format!("max residual {worst:.1e}, kappas (1/9, 1/9) and (1/6, 1/6)"))
}

fn full_index_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, geam) in common::references() {
        let s = geam.certificate().s;
        let d = geam.dim() as f64;
        for rho in ensemble(geam.dim(), 101) {
            let c = ioc(&probabilities(&geam, &rho).unwrap());
            let gap = (c - s * (rho.purity() - 1.0 / d) - geam.mu(geam.frame_count())).abs();
            worst = worst.max(gap);
            ensure(gap <= 1e-10, || format!("{name}: gap {gap:e}"))?;
        }
    }
    Ok(format!("max gap {worst:.1e} over 3 x 200 states"))
}

fn partial_index_bound() -> Outcome {
    let mut slack = f64::INFINITY;
    let mut saturation: f64 = 0.0;
    for (name, geam) in common::references() {
        for rho in ensemble(geam.dim(), 102) {
            let table = probabilities(&geam, &rho).unwrap();
            for l in 1..=geam.frame_count() {
                let c = partial_ioc(&table, l).unwrap();
                let bound = ioc_bounds(&geam, l, rho.purity()).unwrap().bound_state;
                slack = slack.min(bound - c);
                ensure(c <= bound + 1e-10, || format!("{name} L={l}: {c} > {bound}"))?;
            }
        }
        let top = max_ioc(&geam).unwrap();
        for seed in 0..50 {
            let rho = random_state(geam.dim(), 1, 7000 + seed).unwrap();
            let gap = (ioc(&probabilities(&geam, &rho).unwrap()) - top).abs();
            saturation = saturation.max(gap);
            ensure(gap <= 1e-10, || format!("{name}: pure state misses the maximum by {gap:e}"))?;
        }
    }
    Ok(format!("min slack {slack:.1e}, pure-state saturation gap {saturation:.1e}"))
}

fn example_one_reproduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for geam in [common::qubit_mub(), common::qutrit()] {
        let w = reduction_witness(&geam);
        let gap = max_abs_diff(w.matrix(), &example_one(&geam));
        worst = worst.max(gap);
        ensure(gap <= 1e-12, || format!("d={}: gap {gap:e}", geam.dim()))?;
    }
    Ok(format!("W = S(I - dP+) for d = 2, 3, max gap {worst:.1e}"))
}

fn mehta_bound() -> Outcome {
    let mut rng = GaussianRng::new(105);
    let mut worst_excess = f64::NEG_INFINITY;
    for geam in [common::qubit_mub(), common::qubit_sic(), common::qutrit()] {
        let d = geam.dim();
        let limit = 1.0 / (d as f64 - 1.0);
        for (l, k) in block_pairs(geam.frame_count()) {
            let spec = build_map(&geam, l, k, permutation_rotations(&geam, k, &mut rng)).unwrap();
            for _ in 0..500 {
                let psi = rng.unit_vector(d);
                let ratio = mehta_ratio(&spec, &(&psi * psi.adjoint())).unwrap();
                worst_excess = worst_excess.max(ratio - limit);
                ensure(ratio <= limit + 1e-9, || format!("d={d} L={l} K={k}: ratio {ratio}"))?;
            }
        }
    }
    Ok(format!("max ratio - 1/(d-1) = {worst_excess:.1e}"))
}

fn block_positivity() -> Outcome {
    let mut rng = GaussianRng::new(106);
    let mut lowest = f64::INFINITY;
    let mut count = 0;
    for geam in [common::qubit_mub(), common::qubit_sic(), common::qutrit()] {
        for (l, k) in block_pairs(geam.frame_count()) {
            let w = choi_witness(&build_map(&geam, l, k, permutation_rotations(&geam, k, &mut rng)).unwrap()).unwrap();
            let min = min_product_expectation(w.matrix(), w.dims(), DEFAULT_RESTARTS, 1).unwrap().value;
            lowest = lowest.min(min);
            count += 1;
            ensure(min >= -1e-7, || format!("d={} L={l} K={k}: minimum {min:e}", geam.dim()))?;
        }
    }
    let w = reduction_witness(&common::qubit_mub());
    let min = min_product_expectation(w.matrix(), w.dims(), DEFAULT_RESTARTS, 1).unwrap().value;
    ensure(min.abs() <= 1e-7, || format!("qubit reduction witness minimum {min:e}"))?;
    Ok(format!("{count} witnesses, lowest product value {lowest:.1e}, reduction minimum {min:.1e}"))
}

fn threshold(w: &Witness, d: usize) -> f64 {
    let value = |p: f64| {
        let rho = canonical_state(CanonicalKind::Isotropic { p }, d).unwrap();
        detect(w, &rho, DETECTION_TOL).unwrap().value
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn detection_threshold() -> Outcome {
    let mut found = Vec::new();
    for geam in [common::qubit_mub(), common::qutrit()] {
        let d = geam.dim();
        let p = threshold(&reduction_witness(&geam), d);
        let expected = 1.0 / (d as f64 + 1.0);
        ensure((p - expected).abs() <= 1e-9, || format!("d={d}: p* = {p}, expected {expected}"))?;
        found.push(format!("d={d}: {p:.12}"));
    }
    Ok(format!("p* {}", found.join(", ")))
}

fn criteria_soundness() -> Outcome {
    let mut rng = GaussianRng::new(108);
    let mut evaluated = 0;
    for (ga, gb) in [
        (common::qubit_mub(), common::qubit_mub()),
        (common::qutrit(), common::qutrit()),
    ] {
        let states: Vec<_> = (0..200)
            .map(|_| {
                let terms = 1 + (rng.next_u64() % 5) as usize;
                mix_separable(&random_separable_mixture(ga.dim(), gb.dim(), terms, &mut rng).unwrap()).unwrap()
            })
            .collect();
        for (i, reports) in evaluate_batch(&ga, &gb, &states, CRITERION_TOL).into_iter().enumerate() {
            for r in reports.map_err(|e| e.to_string())? {
                let r = r.map_err(|e| e.to_string())?;
                evaluated += 1;
                ensure(!r.violated, || format!("state {i}: {:?} {} > {}", r.criterion, r.lhs, r.bound))?;
            }
        }
    }
    Ok(format!("{evaluated} evaluations, no violations"))
}

fn criteria_power() -> Outcome {
    let g = common::qubit_mub();
    let rho = canonical_state(CanonicalKind::MaxEntangled, 2).unwrap();
    let corr = correlation_matrix(&g, &g, &rho).unwrap();
    let tr = trace_criterion(&corr, &g, &g, CRITERION_TOL).unwrap();
    let tn = trace_norm_criterion(&corr, &g, &g, CRITERION_TOL).unwrap();
    let en = enhanced_criterion(&g, &g, &rho, CRITERION_TOL).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    ensure(close(tr.lhs, 2.0 / 9.0) && close(tr.bound, 2.0 / 9.0) && !tr.violated, || format!("trace {tr:?}"))?;
    ensure(close(tn.lhs, 1.0 / 3.0) && close(tn.bound, 2.0 / 9.0) && tn.violated, || format!("trace norm {tn:?}"))?;
    ensure(close(en.lhs, 1.0 / 6.0) && close(en.bound, 1.0 / 18.0) && en.violated, || format!("enhanced {en:?}"))?;
    Ok("trace 2/9 = 2/9, trace norm 1/3 > 2/9, enhanced 1/6 > 1/18".into())
}

fn two_routes() -> Outcome {
    let mut rng = GaussianRng::new(110);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for geam in [common::qubit_mub(), common::qubit_sic(), common::qutrit()] {
        for _ in 0..30 {
            let n = geam.frame_count();
            let k = 1 + (rng.next_u64() % n as u64) as usize;
            let l = 1 + (rng.next_u64() % k as u64) as usize;
            let rotations = (0..k)
                .map(|a| {
                    let size = geam.frame(a).len();
                    let spec = if rng.next_u64().is_multiple_of(2) {
                        RotationSpec::Permutation { perm: random_permutation(size, &mut rng) }
                    } else {
                        RotationSpec::Exponential { generator: random_generator(size, 1.0, &mut rng) }
                    };
                    make_rotation(size, spec).unwrap()
                })
                .collect();
            let spec = build_map(&geam, l, k, rotations).unwrap();
            let w = choi_witness(&spec).map_err(|e| e.to_string())?;
            let gap = max_abs_diff(w.matrix(), &witness_closed_form(&spec));
            worst = worst.max(gap);
            count += 1;
            ensure(gap <= 1e-10, || format!("L={l} K={k}: gap {gap:e}"))?;
        }
    }
    Ok(format!("{count} configurations, max gap {worst:.1e}"))
}

/// build -> validate -> witness -> detect, returning every file produced.
fn pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let steps: Vec<Vec<String>> = vec![
        "geam build -d 2 --sizes 2,2,2 --gamma uniform --s 1/9 -o g.json",
        "geam validate g.json -o g2.json",
        "state canonical --kind max-entangled -d 2 -o plus.json",
        "state canonical --kind isotropic -d 2 -p 1/3 -o edge.json",
        "state canonical --kind isotropic -d 2 -p 0.3333334 -o above.json",
        "state canonical --kind isotropic -d 2 -p 0.3333333 -o below.json",
        "witness --geam g2.json -l 3 -k 3 --seed 17 --verify --detect plus.json -o w.json",
        "detect --witness w.json --states edge.json -o d_edge.json",
        "detect --witness w.json --states above.json -o d_above.json",
        "detect --witness w.json --states below.json -o d_below.json",
    ]
    .into_iter()
    .map(|s| s.split(' ').map(String::from).collect())
    .collect();
    for args in &steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = common::cli::run(dir, &args);
        ensure(out.status.success(), || {
            format!("geamtool {args:?}: {}", String::from_utf8_lossy(&out.stderr))
        })?;
    }
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    Ok(names
        .into_iter()
        .map(|n| {
            let bytes = fs::read(dir.join(&n)).unwrap();
            (n, bytes)
        })
        .collect())
}

fn cli_round_trip() -> Outcome {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let a = pipeline(first.path())?;
    let b = pipeline(second.path())?;
    ensure(a == b, || "outputs differ between runs".into())?;
    let dir = first.path();
    ensure(fs::read(dir.join("g.json")).unwrap() == fs::read(dir.join("g2.json")).unwrap(), || {
        "validate changed the GEAM document".into()
    })?;

    let doc: geam_core::io::WitnessDoc =
        serde_json::from_str(&fs::read_to_string(dir.join("w.json")).unwrap()).map_err(|e| e.to_string())?;
    let w = doc.into_witness().map_err(|e| e.to_string())?;
    let gap = max_abs_diff(w.matrix(), &example_one(&common::qubit_mub()));
    ensure(gap <= 1e-12, || format!("witness differs from S(I - dP+) by {gap:e}"))?;

    let record = |file: &str| -> (f64, String) {
        let v = common::cli::json(dir, file);
        let r = if v.is_array() { v[0].clone() } else { v["detections"][0].clone() };
        (r["value"].as_f64().unwrap(), r["verdict"].as_str().unwrap().to_owned())
    };
    let (plus, verdict) = record("w.json");
    ensure((plus + 1.0 / 9.0).abs() <= 1e-12 && verdict == "ENTANGLED", || format!("P+: {plus} {verdict}"))?;
    let (edge, _) = record("d_edge.json");
    ensure(edge.abs() <= 1e-9, || format!("value at p = 1/3 is {edge:e}"))?;
    let (_, above) = record("d_above.json");
    let (_, below) = record("d_below.json");
    ensure(above == "ENTANGLED" && below == "INCONCLUSIVE", || format!("verdicts {above} / {below} around 1/3"))?;

    let v = common::cli::json(dir, "w.json")["verification"].clone();
    let min = v["min_product_expectation"].as_f64().unwrap();
    ensure(min.abs() <= 1e-7, || format!("see-saw minimum {min:e}"))?;
    Ok(format!("{} files byte-identical across two runs; Tr(W P+) = -1/9, sign change at 1/3", a.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("conical design identity", design_identity),
        ("full index of coincidence equality", full_index_equality),
        ("partial index bound and pure-state saturation", partial_index_bound),
        ("reduction witness closed form", example_one_reproduction),
        ("positivity ratio bound", mehta_bound),
        ("block positivity", block_positivity),
        ("isotropic detection threshold", detection_threshold),
        ("criteria soundness on separable mixtures", criteria_soundness),
        ("criteria power on the maximally entangled state", criteria_power),
        ("Choi and closed-form witnesses agree", two_routes),
        ("CLI pipeline is reproducible", cli_round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                println!("[FAIL] criterion {}: {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
