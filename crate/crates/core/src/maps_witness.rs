//! Positive maps built from conical GEAMs and their Choi witnesses.
//!
//! Each frame gives a map
//! `Phi_alpha[X] = sum_{k,l} O_{kl} P_{alpha,k} Tr(X P_{alpha,l})`
//! with `O` orthogonal and doubly stochastic in the sense that all row and
//! column sums equal one. The positive map is
//! `Phi = A Phi_0 + sum_{L < alpha <= K} Phi_alpha - sum_{alpha <= L} Phi_alpha`
//! with `Phi_0[X] = I Tr(X)/d` and `A = d (2 C~_L - C~_K)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coincidence::max_partial_ioc;
use crate::error::{Error, Result};
use crate::geam::Geam;
use crate::linalg::{
    basis_ket, c, ensure_square, hs_product, kron, lowest_eigenpair, max_abs, max_abs_diff, outer,
    trace, CMatrix, CVector, Hermitian, C64,
};
use crate::states::{DensityMatrix, GaussianRng};

const ROTATION_TOL: f64 = 1e-10;
const GENERATOR_TOL: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-10;
const WITNESS_ROUTE_TOL: f64 = 1e-10;

/// Default number of see-saw restarts.
pub const DEFAULT_RESTARTS: usize = 32;
/// Default detection threshold.
pub const DETECTION_TOL: f64 = 1e-10;
const STAGNATION: f64 = 1e-10;
const MAX_SWEEPS: usize = 1000;

/// How a rotation was generated; kept as witness provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RotationSpec {
    Identity { size: usize },
    /// Row `i` of the matrix is the unit vector `e_{perm[i]}`.
    Permutation { perm: Vec<usize> },
    /// `exp(Q G Q)` with `Q = I - J/M` and `G` antisymmetric.
    Exponential { generator: Vec<Vec<f64>> },
}

/// Orthogonal matrix with unit row and column sums.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix {
    matrix: DMatrix<f64>,
    spec: RotationSpec,
}

impl RotationMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn spec(&self) -> &RotationSpec {
        &self.spec
    }

    pub fn identity(size: usize) -> Self {
        RotationMatrix {
            matrix: DMatrix::identity(size, size),
            spec: RotationSpec::Identity { size },
        }
    }

    /// Largest deviation from orthogonality and from unit row/column sums.
    pub fn residuals(&self) -> (f64, f64) {
        let m = self.size();
        let gram = self.matrix.transpose() * &self.matrix;
        let orth = (&gram - DMatrix::<f64>::identity(m, m)).amax();
        let rows = self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs());
        let cols = self.matrix.column_iter().map(|col| (col.sum() - 1.0).abs());
        let sums = rows.chain(cols).fold(0.0, f64::max);
        (orth, sums)
    }
}

pub fn make_rotation(size: usize, spec: RotationSpec) -> Result<RotationMatrix> {
    if size == 0 {
        return Err(Error::InvalidRotation("size must be at least 1".into()));
    }
    let matrix = match &spec {
        RotationSpec::Identity { size: s } => {
            if *s != size {
                return Err(Error::InvalidRotation(format!("identity of size {s}, need {size}")));
            }
            DMatrix::identity(size, size)
        }
        RotationSpec::Permutation { perm } => {
            if perm.len() != size {
                return Err(Error::InvalidRotation(format!(
                    "permutation of length {}, need {size}",
                    perm.len()
                )));
            }
            let mut seen = vec![false; size];
            for &p in perm {
                if p >= size || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidRotation(format!("{perm:?} is not a bijection")));
                }
            }
            DMatrix::from_fn(size, size, |i, j| if perm[i] == j { 1.0 } else { 0.0 })
        }
        RotationSpec::Exponential { generator } => {
            if generator.len() != size || generator.iter().any(|row| row.len() != size) {
                return Err(Error::InvalidRotation(format!("generator must be {size}x{size}")));
            }
            let g = DMatrix::from_fn(size, size, |i, j| generator[i][j]);
            let asym = (&g + g.transpose()).amax();
            if !asym.is_finite() || asym > GENERATOR_TOL {
                return Err(Error::InvalidRotation(format!(
                    "generator is not antisymmetric (max |G + G^T| = {asym:e})"
                )));
            }
            let q = DMatrix::<f64>::identity(size, size)
                - DMatrix::from_element(size, size, 1.0 / size as f64);
            let projected = &q * g * &q;
            let projected = (&projected - projected.transpose()).scale(0.5);
            projected.exp()
        }
    };
    let rotation = RotationMatrix { matrix, spec };
    let (orth, sums) = rotation.residuals();
    if orth > ROTATION_TOL || sums > ROTATION_TOL {
        return Err(Error::InvalidRotation(format!(
            "orthogonality residual {orth:e}, row/column sum residual {sums:e}"
        )));
    }
    Ok(rotation)
}

/// Gaussian antisymmetric generator, as nested rows.
pub fn random_generator(size: usize, scale: f64, rng: &mut GaussianRng) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in i + 1..size {
            let x = rng.normal_pair().0 * scale;
            g[i][j] = x;
            g[j][i] = -x;
        }
    }
    g
}

/// Uniformly random permutation (Fisher-Yates).
pub fn random_permutation(size: usize, rng: &mut GaussianRng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..size).collect();
    for i in (1..size).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

fn check_operand(geam: &Geam, x: &CMatrix) -> Result<()> {
    let n = ensure_square(x)?;
    if n != geam.dim() {
        return Err(Error::DimensionMismatch {
            context: "map argument",
            expected: geam.dim(),
            found: n,
        });
    }
    Ok(())
}

/// `Phi_alpha[X] = sum_{k,l} O_{kl} P_{alpha,k} Tr(X P_{alpha,l})`.
pub fn apply_phi_alpha(
    geam: &Geam,
    alpha: usize,
    rotation: &RotationMatrix,
    x: &CMatrix,
) -> Result<CMatrix> {
    check_operand(geam, x)?;
    let frame = geam.frames().get(alpha).ok_or(Error::OutOfRange {
        what: "frame index",
        value: alpha as f64,
        min: 0.0,
        max: geam.frame_count() as f64 - 1.0,
    })?;
    if rotation.size() != frame.len() {
        return Err(Error::DimensionMismatch {
            context: "rotation size vs frame size",
            expected: frame.len(),
            found: rotation.size(),
        });
    }
    let overlaps: Vec<C64> = frame.operators().iter().map(|p| hs_product(x, p.matrix())).collect();
    let d = geam.dim();
    let mut out = CMatrix::zeros(d, d);
    for (k, pk) in frame.operators().iter().enumerate() {
        let weight: C64 = overlaps
            .iter()
            .enumerate()
            .map(|(l, t)| t * rotation.matrix[(k, l)])
            .sum();
        out += pk.matrix() * weight;
    }
    Ok(out)
}

/// The map `Phi` with its parameters. Immutable once built.
#[derive(Clone, Debug)]
pub struct PositiveMapSpec {
    geam: Geam,
    negative: usize,
    total: usize,
    rotations: Vec<RotationMatrix>,
    a: f64,
}

impl PositiveMapSpec {
    pub fn geam(&self) -> &Geam {
        &self.geam
    }

    /// `L`, the number of subtracted frame maps.
    pub fn negative_blocks(&self) -> usize {
        self.negative
    }

    /// `K`, the number of frame maps used.
    pub fn total_blocks(&self) -> usize {
        self.total
    }

    pub fn rotations(&self) -> &[RotationMatrix] {
        &self.rotations
    }

    /// Coefficient of `Phi_0`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `Tr Phi[X] / Tr X = A + d mu_K - 2 d mu_L`.
    pub fn trace_factor(&self) -> f64 {
        let d = self.geam.dim() as f64;
        self.a + d * self.geam.mu(self.total) - 2.0 * d * self.geam.mu(self.negative)
    }
}

pub fn build_map(
    geam: &Geam,
    negative: usize,
    total: usize,
    rotations: Vec<RotationMatrix>,
) -> Result<PositiveMapSpec> {
    let s = geam.require_conical("the positive map construction")?;
    let n = geam.frame_count();
    if negative < 1 || negative > total || total > n {
        return Err(Error::OutOfRange {
            what: "block counts (need 1 <= L <= K <= N); L",
            value: negative as f64,
            min: 1.0,
            max: total.min(n) as f64,
        });
    }
    if rotations.len() != total {
        return Err(Error::InvalidRotation(format!(
            "{} rotations supplied for K = {total} frames",
            rotations.len()
        )));
    }
    for (alpha, r) in rotations.iter().enumerate() {
        if r.size() != geam.frame(alpha).len() {
            return Err(Error::DimensionMismatch {
                context: "rotation size vs frame size",
                expected: geam.frame(alpha).len(),
                found: r.size(),
            });
        }
    }
    let d = geam.dim() as f64;
    let a = d * (2.0 * max_partial_ioc(geam, negative)? - max_partial_ioc(geam, total)?);
    let alternative = (d - 1.0) * s - d * (geam.mu(total) - 2.0 * geam.mu(negative));
    if (a - alternative).abs() > 1e-12 {
        return Err(Error::Inconsistent(format!(
            "A = {a} from indices of coincidence but {alternative} from S and mu"
        )));
    }
    Ok(PositiveMapSpec {
        geam: geam.clone(),
        negative,
        total,
        rotations,
        a,
    })
}

pub fn apply_map(spec: &PositiveMapSpec, x: &CMatrix) -> Result<CMatrix> {
    check_operand(&spec.geam, x)?;
    let d = spec.geam.dim();
    let mut out = CMatrix::identity(d, d) * (trace(x) * (spec.a / d as f64));
    for (alpha, rotation) in spec.rotations.iter().enumerate() {
        let term = apply_phi_alpha(&spec.geam, alpha, rotation, x)?;
        if alpha < spec.negative {
            out -= term;
        } else {
            out += term;
        }
    }
    Ok(out)
}

/// `Tr(Phi[P]^2) / (Tr Phi[P])^2` for a rank-1 projector `P`.
pub fn mehta_ratio(spec: &PositiveMapSpec, projector: &CMatrix) -> Result<f64> {
    check_operand(&spec.geam, projector)?;
    let deviation = max_abs_diff(projector, &projector.adjoint())
        .max(max_abs_diff(&(projector * projector), projector))
        .max((trace(projector) - c(1.0, 0.0)).norm());
    if deviation > PROJECTOR_TOL {
        return Err(Error::NotRankOneProjector { deviation });
    }
    let image = apply_map(spec, projector)?;
    let denominator = trace(&image).re;
    if denominator.abs() <= 1e-12 {
        return Err(Error::DegenerateDenominator { value: denominator });
    }
    Ok(hs_product(&image, &image).re / (denominator * denominator))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessProvenance {
    pub geam_hash: String,
    #[serde(rename = "L")]
    pub negative_blocks: usize,
    #[serde(rename = "K")]
    pub total_blocks: usize,
    #[serde(rename = "A")]
    pub a: f64,
    pub rotations: Vec<RotationSpec>,
}

/// Hermitian operator on `C^dA (x) C^dB` intended as an entanglement witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    dims: (usize, usize),
    matrix: Hermitian,
    provenance: Option<WitnessProvenance>,
}

impl Witness {
    pub fn new(
        dims: (usize, usize),
        matrix: Hermitian,
        provenance: Option<WitnessProvenance>,
    ) -> Result<Self> {
        if dims.0 * dims.1 != matrix.dim() {
            return Err(Error::DimensionMismatch {
                context: "witness",
                expected: dims.0 * dims.1,
                found: matrix.dim(),
            });
        }
        Ok(Witness {
            dims,
            matrix,
            provenance,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.matrix
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn provenance(&self) -> Option<&WitnessProvenance> {
        self.provenance.as_ref()
    }
}

/// `(2 C~_L - C~_K) I (x) I + sum_{alpha > L} J_alpha - sum_{alpha <= L} J_alpha`
/// with `J_alpha = sum_{k,l} O_{kl} conj(P_l) (x) P_k`.
pub fn witness_closed_form(spec: &PositiveMapSpec) -> CMatrix {
    let d = spec.geam.dim();
    let mut w = CMatrix::identity(d * d, d * d).scale(spec.a / d as f64);
    for (alpha, rotation) in spec.rotations.iter().enumerate() {
        let ops = spec.geam.frame(alpha).operators();
        let mut j = CMatrix::zeros(d * d, d * d);
        for (k, pk) in ops.iter().enumerate() {
            for (l, pl) in ops.iter().enumerate() {
                let o = rotation.matrix[(k, l)];
                if o != 0.0 {
                    j += kron(&pl.matrix().conjugate(), pk.matrix()).scale(o);
                }
            }
        }
        if alpha < spec.negative {
            w -= j;
        } else {
            w += j;
        }
    }
    w
}

/// `W = sum_{m,n} |m><n| (x) Phi[|m><n|]`, cross-checked against
/// [`witness_closed_form`].
pub fn choi_witness(spec: &PositiveMapSpec) -> Result<Witness> {
    let d = spec.geam.dim();
    let mut w = CMatrix::zeros(d * d, d * d);
    for m in 0..d {
        for n in 0..d {
            let unit = outer(&basis_ket(d, m), &basis_ket(d, n));
            w += kron(&unit, &apply_map(spec, &unit)?);
        }
    }
    let gap = max_abs_diff(&w, &witness_closed_form(spec));
    if gap > WITNESS_ROUTE_TOL {
        return Err(Error::Inconsistent(format!(
            "Choi and closed-form witnesses differ by {gap:e}"
        )));
    }
    let provenance = WitnessProvenance {
        geam_hash: crate::io::geam_fingerprint(&spec.geam),
        negative_blocks: spec.negative,
        total_blocks: spec.total,
        a: spec.a,
        rotations: spec.rotations.iter().map(|r| r.spec.clone()).collect(),
    };
    Witness::new((d, d), Hermitian::with_tolerance(w, 1e-10)?, Some(provenance))
}

#[derive(Clone, Debug)]
pub struct ProductMinimum {
    pub value: f64,
    pub a: CVector,
    pub b: CVector,
}

/// Contracts one tensor factor of `W` with a vector:
/// `(<v| (x) I) W (|v> (x) I)` when `side` is A, and symmetrically for B.
fn contract(w: &CMatrix, dims: (usize, usize), v: &CVector, keep_b: bool) -> Hermitian {
    let (da, db) = dims;
    let out = if keep_b {
        CMatrix::from_fn(db, db, |j, l| {
            let mut acc = C64::default();
            for i in 0..da {
                for k in 0..da {
                    acc += v[i].conj() * v[k] * w[(i * db + j, k * db + l)];
                }
            }
            acc
        })
    } else {
        CMatrix::from_fn(da, da, |i, k| {
            let mut acc = C64::default();
            for j in 0..db {
                for l in 0..db {
                    acc += v[j].conj() * v[l] * w[(i * db + j, k * db + l)];
                }
            }
            acc
        })
    };
    Hermitian::symmetrize(out)
}

fn see_saw(w: &CMatrix, dims: (usize, usize), rng: &mut GaussianRng) -> Result<ProductMinimum> {
    let mut a = rng.unit_vector(dims.0);
    let mut b = rng.unit_vector(dims.1);
    let mut best = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let (_, new_b) = lowest_eigenpair(&contract(w, dims, &a, true))?;
        b = new_b;
        let (value, new_a) = lowest_eigenpair(&contract(w, dims, &b, false))?;
        a = new_a;
        let improvement = best - value;
        best = best.min(value);
        if improvement < STAGNATION {
            break;
        }
    }
    Ok(ProductMinimum { value: best, a, b })
}

/// Minimum of `<a (x) b| W |a (x) b>` over unit product vectors by
/// alternating eigenvector updates, best of `restarts` random starts.
///
/// The result is an upper bound on the true minimum. Restart `i` draws its
/// start from `GaussianRng::derive(seed, i)`, so the answer does not depend
/// on how restarts are scheduled.
pub fn min_product_expectation(
    w: &CMatrix,
    dims: (usize, usize),
    restarts: usize,
    seed: u64,
) -> Result<ProductMinimum> {
    let n = ensure_square(w)?;
    if dims.0 * dims.1 != n {
        return Err(Error::DimensionMismatch {
            context: "witness vs product dimensions",
            expected: dims.0 * dims.1,
            found: n,
        });
    }
    let restarts = restarts.max(1);
    let results = (0..restarts)
        .into_par_iter()
        .map(|i| see_saw(w, dims, &mut GaussianRng::derive(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(results
        .into_iter()
        .reduce(|best, next| if next.value < best.value { next } else { best })
        .expect("at least one restart"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Entangled,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub value: f64,
    pub verdict: Verdict,
}

/// `Tr(W rho)`; a witness can only ever certify entanglement.
pub fn detect(witness: &Witness, rho: &DensityMatrix, tol: f64) -> Result<Detection> {
    if rho.dim() != witness.matrix.dim() {
        return Err(Error::DimensionMismatch {
            context: "witness vs state",
            expected: witness.matrix.dim(),
            found: rho.dim(),
        });
    }
    let value = witness.matrix.inner(rho.hermitian());
    let verdict = if value < -tol {
        Verdict::Entangled
    } else {
        Verdict::Inconclusive
    };
    Ok(Detection { value, verdict })
}

/// Largest deviation of `W` from Hermiticity, for imported matrices.
pub fn hermiticity_gap(w: &CMatrix) -> f64 {
    max_abs(&(w - w.adjoint()))
}
