//! Density matrices and test-state generators.
//!
//! Random states use the Ginibre construction `G G^dagger / Tr(G G^dagger)`.
//! Gaussians come from Box-Muller over SplitMix64 so that a seed reproduces
//! the same matrices in any implementation:
//!
//! * `u = (next_u64() >> 11) * 2^-53`, two draws `u1, u2` per pair,
//! * `z0 = sqrt(-2 ln(1 - u1)) cos(2 pi u2)`, `z1 = ... sin(2 pi u2)`,
//! * a complex entry is `z0 + i z1`; matrices are filled row-major.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, kron, max_abs_diff, min_eigenvalue, outer, partial_trace, CMatrix, CVector, Hermitian,
    Subsystem,
};

pub const STATE_TOL: f64 = 1e-10;

/// Seeded source of uniform and Gaussian variates.
#[derive(Clone, Debug)]
pub struct GaussianRng {
    inner: SplitMix64,
}

impl GaussianRng {
    pub fn new(seed: u64) -> Self {
        GaussianRng {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Independent stream for sub-task `index` of a seeded job.
    pub fn derive(seed: u64, index: u64) -> Self {
        let mut parent = SplitMix64::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        GaussianRng::new(parent.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * (1.0 - u1).ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        (radius * angle.cos(), radius * angle.sin())
    }

    pub fn complex_normal(&mut self) -> num_complex::Complex<f64> {
        let (re, im) = self.normal_pair();
        c(re, im)
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            for col in 0..cols {
                m[(r, col)] = self.complex_normal();
            }
        }
        m
    }

    /// Haar-random unit vector.
    pub fn unit_vector(&mut self, d: usize) -> CVector {
        let v = self.ginibre(d, 1).column(0).into_owned();
        let norm = v.norm();
        v.unscale(norm)
    }

    /// Probability vector drawn uniformly from the simplex.
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let draws: Vec<f64> = (0..n).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let total: f64 = draws.iter().sum();
        draws.into_iter().map(|x| x / total).collect()
    }
}

/// A unit-trace positive semidefinite operator on one system or on a
/// bipartite system with local dimensions `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: Hermitian,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: Hermitian) -> Result<Self> {
        Self::with_tolerance(dims, matrix, STATE_TOL)
    }

    pub fn with_tolerance(dims: Vec<usize>, matrix: Hermitian, tol: f64) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 || dims.contains(&0) {
            return Err(Error::Schema(format!("unsupported state dims {dims:?}")));
        }
        let total: usize = dims.iter().product();
        if total != matrix.dim() {
            return Err(Error::DimensionMismatch {
                context: "density matrix",
                expected: total,
                found: matrix.dim(),
            });
        }
        let trace = matrix.trace();
        let min = min_eigenvalue(&matrix)?;
        if (trace - 1.0).abs() > tol || min < -tol {
            return Err(Error::InvalidDensity {
                min_eigenvalue: min,
                trace,
            });
        }
        Ok(DensityMatrix { dims, matrix })
    }

    pub fn single(matrix: Hermitian) -> Result<Self> {
        let d = matrix.dim();
        Self::new(vec![d], matrix)
    }

    pub fn bipartite(da: usize, db: usize, matrix: Hermitian) -> Result<Self> {
        Self::new(vec![da, db], matrix)
    }

    pub fn pure(v: &CVector) -> Result<Self> {
        Self::single(Hermitian::new(outer(v, v).unscale(v.norm_squared()))?)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `(dA, dB)` if bipartite.
    pub fn bipartite_dims(&self) -> Option<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Some((a, b)),
            _ => None,
        }
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.matrix
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.inner(&self.matrix)
    }

    /// Reduced state on `keep`.
    pub fn marginal(&self, keep: Subsystem) -> Result<DensityMatrix> {
        let dims = self
            .bipartite_dims()
            .ok_or(Error::Unsupported("marginal of a single-system state"))?;
        let reduced = partial_trace(self.matrix(), dims, keep)?;
        DensityMatrix::single(Hermitian::new(reduced)?)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let m = Hermitian::symmetrize(kron(self.matrix(), other.matrix()));
        DensityMatrix::bipartite(self.dim(), other.dim(), m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CanonicalKind {
    MaxEntangled,
    Isotropic { p: f64 },
    /// `I/d^2` when `bipartite`, otherwise `I/d`.
    MaxMixed { bipartite: bool },
}

/// `P+ = (1/d) sum_{m,n} |mm><nn|` as a matrix.
pub fn max_entangled_matrix(d: usize) -> CMatrix {
    let mut v = CVector::zeros(d * d);
    for m in 0..d {
        v[m * d + m] = c(1.0, 0.0);
    }
    outer(&v, &v).unscale(d as f64)
}

pub fn canonical_state(kind: CanonicalKind, d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension { found: d, min: 2 });
    }
    let n = d * d;
    match kind {
        CanonicalKind::MaxEntangled => {
            DensityMatrix::bipartite(d, d, Hermitian::new(max_entangled_matrix(d))?)
        }
        CanonicalKind::Isotropic { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange {
                    what: "isotropic weight p",
                    value: p,
                    min: 0.0,
                    max: 1.0,
                });
            }
            let m = max_entangled_matrix(d).scale(p)
                + CMatrix::identity(n, n).scale((1.0 - p) / n as f64);
            DensityMatrix::bipartite(d, d, Hermitian::new(m)?)
        }
        CanonicalKind::MaxMixed { bipartite: true } => DensityMatrix::bipartite(
            d,
            d,
            Hermitian::new(CMatrix::identity(n, n).unscale(n as f64))?,
        ),
        CanonicalKind::MaxMixed { bipartite: false } => {
            DensityMatrix::single(Hermitian::new(CMatrix::identity(d, d).unscale(d as f64))?)
        }
    }
}

/// Ginibre-induced random state of the given rank.
pub fn random_state(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_state_with(d, rank, &mut GaussianRng::new(seed))
}

pub fn random_state_with(d: usize, rank: usize, rng: &mut GaussianRng) -> Result<DensityMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::OutOfRange {
            what: "rank",
            value: rank as f64,
            min: 1.0,
            max: d as f64,
        });
    }
    let g = rng.ginibre(d, rank);
    let gg = &g * g.adjoint();
    let norm = crate::linalg::trace(&gg).re;
    DensityMatrix::single(Hermitian::symmetrize(gg.unscale(norm)))
}

/// `sum_j q_j rho^A_j (x) rho^B_j`.
#[derive(Clone, Debug)]
pub struct SeparableMixture {
    weights: Vec<f64>,
    factors: Vec<(DensityMatrix, DensityMatrix)>,
}

impl SeparableMixture {
    pub fn new(weights: Vec<f64>, factors: Vec<(DensityMatrix, DensityMatrix)>) -> Result<Self> {
        if weights.is_empty() || weights.len() != factors.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} product terms",
                weights.len(),
                factors.len()
            )));
        }
        if weights.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(Error::InvalidWeights("negative mixture weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("mixture weights sum to {total}")));
        }
        let (da, db) = (factors[0].0.dim(), factors[0].1.dim());
        if factors.iter().any(|(a, b)| a.dim() != da || b.dim() != db) {
            return Err(Error::Schema("mixture factors have inconsistent dimensions".into()));
        }
        Ok(SeparableMixture { weights, factors })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[(DensityMatrix, DensityMatrix)] {
        &self.factors
    }

    pub fn local_dims(&self) -> (usize, usize) {
        (self.factors[0].0.dim(), self.factors[0].1.dim())
    }

    /// Weighted average of one side's factors.
    pub fn marginal(&self, side: Subsystem) -> CMatrix {
        let d = match side {
            Subsystem::A => self.local_dims().0,
            Subsystem::B => self.local_dims().1,
        };
        self.weights
            .iter()
            .zip(&self.factors)
            .fold(CMatrix::zeros(d, d), |acc, (q, (a, b))| {
                let m = match side {
                    Subsystem::A => a.matrix(),
                    Subsystem::B => b.matrix(),
                };
                acc + m.scale(*q)
            })
    }
}

pub fn mix_separable(mixture: &SeparableMixture) -> Result<DensityMatrix> {
    let (da, db) = mixture.local_dims();
    let sum = mixture
        .weights
        .iter()
        .zip(&mixture.factors)
        .fold(CMatrix::zeros(da * db, da * db), |acc, (q, (a, b))| {
            acc + kron(a.matrix(), b.matrix()).scale(*q)
        });
    let rho = DensityMatrix::bipartite(da, db, Hermitian::symmetrize(sum))?;
    for side in [Subsystem::A, Subsystem::B] {
        let drift = max_abs_diff(&partial_trace(rho.matrix(), (da, db), side)?, &mixture.marginal(side));
        if drift > 1e-11 {
            return Err(Error::Inconsistent(format!("mixture marginal drift {drift:e}")));
        }
    }
    Ok(rho)
}

/// Random separable mixture with `terms` product terms of random-rank local
/// states.
pub fn random_separable_mixture(
    da: usize,
    db: usize,
    terms: usize,
    rng: &mut GaussianRng,
) -> Result<SeparableMixture> {
    let weights = rng.simplex(terms);
    let factors = (0..terms)
        .map(|_| {
            let ra = 1 + (rng.next_u64() % da as u64) as usize;
            let rb = 1 + (rng.next_u64() % db as u64) as usize;
            Ok((random_state_with(da, ra, rng)?, random_state_with(db, rb, rng)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SeparableMixture::new(weights, factors)
}
