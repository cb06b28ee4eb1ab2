//! Generalized equiangular measurements.
//!
//! A GEAM is a POVM made of `N` frames `{P_{alpha,k}}` with
//! `sum_k P_{alpha,k} = gamma_alpha I`, constant traces `a_alpha`, constant
//! purity ratio `b_alpha`, constant intra-frame overlap `c_alpha` and
//! cross-frame overlap `f = 1/d`. Frames are built from a traceless operator
//! basis as `P = (a/d) I + tau H`, where the `H` operators sum to zero within
//! each frame.
//!
//! When every frame shares `a^2 (b - c) = S`, the measurement is a conical
//! 2-design: `sum P (x) P = kappa_+ I (x) I + kappa_- F` with
//! `kappa_+ = mu_N - S/d` and `kappa_- = S`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{flip, hs_product, kron, max_abs, min_eigenvalue, CMatrix, Hermitian};
use crate::operator_basis::BasisPartition;

/// Default absolute tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const WEIGHT_TOL: f64 = 1e-12;
const PURITY_MARGIN: f64 = 1e-12;

/// Sign of `tau_alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sign {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Scalar parameters of one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    pub size: usize,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FrameParams {
    /// `a^2 (b - c)`; equal across frames for a conical 2-design.
    pub fn design_constant(&self) -> f64 {
        self.a * self.a * (self.b - self.c)
    }
}

#[derive(Clone, Debug)]
pub struct Frame {
    params: FrameParams,
    ops: Vec<Hermitian>,
    sign: Option<Sign>,
    /// `(tau, H operators)` when the frame was built from a basis partition.
    h_ops: Option<(f64, Vec<Hermitian>)>,
}

impl Frame {
    pub fn params(&self) -> &FrameParams {
        &self.params
    }

    pub fn operators(&self) -> &[Hermitian] {
        &self.ops
    }

    pub fn sign(&self) -> Option<Sign> {
        self.sign
    }

    pub fn tau(&self) -> Option<f64> {
        self.h_ops.as_ref().map(|(tau, _)| *tau)
    }

    pub fn h_operators(&self) -> Option<&[Hermitian]> {
        self.h_ops.as_ref().map(|(_, h)| h.as_slice())
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub is_conical: bool,
    #[serde(rename = "S")]
    pub s: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    /// Max-abs deviation of `sum P (x) P` from `kappa_+ I + kappa_- F`, with
    /// the kappas predicted from `S` and `mu_N`.
    pub residual: f64,
}

/// A validated generalized equiangular measurement. Immutable once built.
#[derive(Clone, Debug)]
pub struct Geam {
    dim: usize,
    frames: Vec<Frame>,
    f: Option<f64>,
    certificate: DesignCertificate,
}

impl Geam {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, alpha: usize) -> &Frame {
        &self.frames[alpha]
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame_sizes(&self) -> Vec<usize> {
        self.frames.iter().map(Frame::len).collect()
    }

    pub fn total_outcomes(&self) -> usize {
        self.frames.iter().map(Frame::len).sum()
    }

    /// Measured cross-frame overlap ratio; `None` for a single frame.
    pub fn f(&self) -> Option<f64> {
        self.f
    }

    pub fn certificate(&self) -> &DesignCertificate {
        &self.certificate
    }

    pub fn is_conical(&self) -> bool {
        self.certificate.is_conical
    }

    /// The design constant `S`, or an error naming `what` needs it.
    pub fn require_conical(&self, what: &'static str) -> Result<f64> {
        if self.certificate.is_conical {
            Ok(self.certificate.s)
        } else {
            Err(Error::NotConical(what))
        }
    }

    /// `mu_L = (1/d) sum_{alpha < L} a_alpha gamma_alpha`.
    pub fn mu(&self, prefix: usize) -> f64 {
        self.frames[..prefix]
            .iter()
            .map(|f| f.params.a * f.params.gamma)
            .sum::<f64>()
            / self.dim as f64
    }

    /// All operators, frame by frame.
    pub fn operators(&self) -> impl Iterator<Item = &Hermitian> {
        self.frames.iter().flat_map(|f| f.ops.iter())
    }

    pub fn has_h_operators(&self) -> bool {
        self.frames.iter().all(|f| f.h_ops.is_some())
    }

    /// Replaces the frame parameters (already checked against the operators)
    /// and recomputes the certificate.
    pub(crate) fn with_params(mut self, params: Vec<FrameParams>, tol: f64) -> Self {
        for (frame, p) in self.frames.iter_mut().zip(params) {
            frame.params = p;
        }
        self.certificate = check_conical_design(&self, tol);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Dimension,
    FrameCount,
    FrameSize,
    Resolution,
    WeightSum,
    WeightPositive,
    Trace,
    TraceFromWeight,
    Purity,
    IntraOverlap,
    IntraOverlapFormula,
    CrossOverlap,
    PurityBounds,
    Positivity,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Dimension => "operator dimensions agree",
            Relation::FrameCount => "sum M = d^2 + N - 1",
            Relation::FrameSize => "M >= 2",
            Relation::Resolution => "sum_k P = gamma I",
            Relation::WeightSum => "sum gamma = 1",
            Relation::WeightPositive => "gamma > 0",
            Relation::Trace => "Tr P = a",
            Relation::TraceFromWeight => "a = d gamma / M",
            Relation::Purity => "Tr P^2 = b a^2",
            Relation::IntraOverlap => "Tr(P_k P_l) = c a^2",
            Relation::IntraOverlapFormula => "c = (M - d b)/(d (M - 1))",
            Relation::CrossOverlap => "Tr(P_ak P_bl) = a_a a_b / d",
            Relation::PurityBounds => "1/d < b <= min(d, M)/d",
            Relation::Positivity => "P >= 0",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub relation: Relation,
    /// Frame/element indices the violation refers to, e.g. `[alpha, k]`.
    pub indices: Vec<usize>,
    pub measured: f64,
    pub expected: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {:?}: measured {}, expected {}",
            self.relation, self.indices, self.measured, self.expected
        )
    }
}

/// Checks that `gamma` is a strictly positive probability vector of length `n`.
pub fn validate_weights(gamma: &[f64], n: usize) -> Result<()> {
    if gamma.len() != n {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} frames",
            gamma.len(),
            n
        )));
    }
    if let Some(g) = gamma.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {g} is not positive")));
    }
    let total: f64 = gamma.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Upper end of the admissible design-constant range for one frame:
/// `min{d gamma^2 / M, (d-1)/(M-1) * d gamma^2 / M}`.
pub fn frame_cap(d: usize, size: usize, gamma: f64) -> f64 {
    let d = d as f64;
    let m = size as f64;
    let base = d * gamma * gamma / m;
    base.min((d - 1.0) / (m - 1.0) * base)
}

/// The traceless operators `H_{alpha,k}` of one frame.
///
/// With `G = sum_k G_{alpha,k}` and `r = sqrt(M)`:
/// `H_k = G - r (1 + r) G_{alpha,k}` for `k < M` and `H_M = (1 + r) G`.
pub fn build_h_operators(partition: &BasisPartition, alpha: usize) -> Vec<Hermitian> {
    let d = partition.dim();
    let m = partition.group_sizes()[alpha];
    let r = (m as f64).sqrt();
    let g_sum = partition
        .group_elements(alpha)
        .fold(Hermitian::zeros(d), |acc, g| acc.add(g));
    let mut h: Vec<Hermitian> = partition
        .group_elements(alpha)
        .map(|g| g_sum.sub(&g.scale(r * (1.0 + r))))
        .collect();
    h.push(g_sum.scale(1.0 + r));
    h
}

struct FrameDraft {
    params: FrameParams,
    tau: f64,
    h: Vec<Hermitian>,
    ops: Vec<Hermitian>,
}

fn draft_frames(
    partition: &BasisPartition,
    gamma: &[f64],
    constants: &[f64],
    signs: &[Sign],
) -> Result<Vec<FrameDraft>> {
    let n = partition.frame_count();
    validate_weights(gamma, n)?;
    if signs.len() != n {
        return Err(Error::InvalidWeights(format!(
            "{} signs for {} frames",
            signs.len(),
            n
        )));
    }
    if constants.len() != n {
        return Err(Error::InvalidWeights(format!(
            "{} design constants for {} frames",
            constants.len(),
            n
        )));
    }
    let d = partition.dim();
    let df = d as f64;
    let caps: Vec<f64> = partition
        .group_sizes()
        .iter()
        .zip(gamma)
        .map(|(&m, &g)| frame_cap(d, m, g))
        .collect();
    for (&s, &cap) in constants.iter().zip(&caps) {
        // Relative slack so that a value typed as exactly the cap is admitted.
        if !(s.is_finite() && s > 0.0 && s <= cap * (1.0 + 1e-12)) {
            return Err(Error::DesignConstantOutOfRange { s, caps });
        }
    }
    let identity = Hermitian::identity(d);
    (0..n)
        .map(|alpha| {
            let m = partition.group_sizes()[alpha];
            let mf = m as f64;
            let s = constants[alpha];
            let a = df * gamma[alpha] / mf;
            let c = 1.0 / df - s / (mf * a * a);
            let b = c + s / (a * a);
            let r = mf.sqrt();
            let tau = signs[alpha].value() * (s / (mf * (r + 1.0) * (r + 1.0))).sqrt();
            let h = build_h_operators(partition, alpha);
            let base = identity.scale(a / df);
            let ops = h.iter().map(|hk| base.add(&hk.scale(tau))).collect();
            Ok(FrameDraft {
                params: FrameParams {
                    size: m,
                    gamma: gamma[alpha],
                    a,
                    b,
                    c,
                },
                tau,
                h,
                ops,
            })
        })
        .collect()
}

fn check_positivity(drafts: &[FrameDraft], tol: f64) -> Result<()> {
    for (alpha, frame) in drafts.iter().enumerate() {
        for (k, p) in frame.ops.iter().enumerate() {
            let min = min_eigenvalue(p)?;
            if min < -tol {
                return Err(Error::NotPositive {
                    frame: alpha,
                    element: k,
                    min_eigenvalue: min,
                });
            }
        }
    }
    Ok(())
}

/// Builds a conical GEAM with design constant `s` from a basis partition.
pub fn build_geam(
    partition: &BasisPartition,
    gamma: &[f64],
    s: f64,
    signs: &[Sign],
) -> Result<Geam> {
    let constants = vec![s; partition.frame_count()];
    build_geam_per_frame(partition, gamma, &constants, signs)
}

/// Like [`build_geam`] but with a separate `a^2 (b - c)` per frame. Unequal
/// constants give a valid GEAM that is not a conical 2-design.
pub fn build_geam_per_frame(
    partition: &BasisPartition,
    gamma: &[f64],
    constants: &[f64],
    signs: &[Sign],
) -> Result<Geam> {
    let drafts = draft_frames(partition, gamma, constants, signs)?;
    check_positivity(&drafts, DEFAULT_TOL)?;
    let ops: Vec<Vec<Hermitian>> = drafts.iter().map(|f| f.ops.clone()).collect();
    let mut geam = validate_geam(ops, DEFAULT_TOL)?;
    for ((frame, draft), sign) in geam.frames.iter_mut().zip(drafts).zip(signs) {
        let measured = &frame.params;
        let drift = (measured.b - draft.params.b)
            .abs()
            .max((measured.c - draft.params.c).abs());
        if drift > 1e-8 {
            return Err(Error::Inconsistent(format!(
                "constructed b, c differ from measured ones by {drift:e}"
            )));
        }
        frame.params = draft.params;
        frame.sign = Some(*sign);
        frame.h_ops = Some((draft.tau, draft.h));
    }
    geam.certificate = check_conical_design(&geam, DEFAULT_TOL);
    Ok(geam)
}

/// Infers all GEAM parameters from the operators and checks every defining
/// relation within `tol`.
pub fn validate_geam(ops: Vec<Vec<Hermitian>>, tol: f64) -> Result<Geam> {
    if ops.is_empty() || ops.iter().any(Vec::is_empty) {
        return Err(Error::Schema("GEAM needs at least one nonempty frame".into()));
    }
    let d = ops[0][0].dim();
    let df = d as f64;
    let mut violations = Vec::new();
    for (alpha, frame) in ops.iter().enumerate() {
        for (k, p) in frame.iter().enumerate() {
            if p.dim() != d {
                violations.push(Violation {
                    relation: Relation::Dimension,
                    indices: vec![alpha, k],
                    measured: p.dim() as f64,
                    expected: df,
                });
            }
        }
    }
    if !violations.is_empty() {
        return Err(Error::Violations(violations));
    }

    let n = ops.len();
    let total: usize = ops.iter().map(Vec::len).sum();
    if total != d * d + n - 1 {
        violations.push(Violation {
            relation: Relation::FrameCount,
            indices: vec![],
            measured: total as f64,
            expected: (d * d + n - 1) as f64,
        });
    }

    let identity = CMatrix::identity(d, d);
    let mut params = Vec::with_capacity(n);
    for (alpha, frame) in ops.iter().enumerate() {
        let m = frame.len();
        let mf = m as f64;
        if m < 2 {
            violations.push(Violation {
                relation: Relation::FrameSize,
                indices: vec![alpha],
                measured: mf,
                expected: 2.0,
            });
        }
        let sum = frame
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, p| acc + p.matrix());
        let gamma = crate::linalg::trace(&sum).re / df;
        let residual = max_abs(&(sum - identity.scale(gamma)));
        if residual > tol {
            violations.push(Violation {
                relation: Relation::Resolution,
                indices: vec![alpha],
                measured: residual,
                expected: 0.0,
            });
        }
        if gamma <= 0.0 {
            violations.push(Violation {
                relation: Relation::WeightPositive,
                indices: vec![alpha],
                measured: gamma,
                expected: 0.0,
            });
        }

        let traces: Vec<f64> = frame.iter().map(Hermitian::trace).collect();
        let a = traces.iter().sum::<f64>() / mf;
        for (k, t) in traces.iter().enumerate() {
            if (t - a).abs() > tol {
                violations.push(Violation {
                    relation: Relation::Trace,
                    indices: vec![alpha, k],
                    measured: *t,
                    expected: a,
                });
            }
        }
        if (a - df * gamma / mf).abs() > tol {
            violations.push(Violation {
                relation: Relation::TraceFromWeight,
                indices: vec![alpha],
                measured: a,
                expected: df * gamma / mf,
            });
        }

        let a2 = a * a;
        let purities: Vec<f64> = frame.iter().map(|p| p.inner(p)).collect();
        let b = purities.iter().sum::<f64>() / (mf * a2);
        for (k, q) in purities.iter().enumerate() {
            if (q - b * a2).abs() > tol {
                violations.push(Violation {
                    relation: Relation::Purity,
                    indices: vec![alpha, k],
                    measured: *q,
                    expected: b * a2,
                });
            }
        }

        let mut overlaps = Vec::new();
        for k in 0..m {
            for l in k + 1..m {
                overlaps.push((k, l, frame[k].inner(&frame[l])));
            }
        }
        let c = if overlaps.is_empty() {
            (mf - df * b) / (df * (mf - 1.0))
        } else {
            overlaps.iter().map(|o| o.2).sum::<f64>() / (overlaps.len() as f64 * a2)
        };
        for &(k, l, o) in &overlaps {
            if (o - c * a2).abs() > tol {
                violations.push(Violation {
                    relation: Relation::IntraOverlap,
                    indices: vec![alpha, k, l],
                    measured: o,
                    expected: c * a2,
                });
            }
        }
        if m >= 2 {
            let predicted = (mf - df * b) / (df * (mf - 1.0));
            // c, b are ratios to a^2; scale the tolerance accordingly.
            if (c - predicted).abs() * a2 > tol {
                violations.push(Violation {
                    relation: Relation::IntraOverlapFormula,
                    indices: vec![alpha],
                    measured: c,
                    expected: predicted,
                });
            }
        }

        let upper = (d.min(m) as f64) / df;
        if b - 1.0 / df <= PURITY_MARGIN || (b - upper) * a2 > tol {
            violations.push(Violation {
                relation: Relation::PurityBounds,
                indices: vec![alpha],
                measured: b,
                expected: upper,
            });
        }

        for (k, p) in frame.iter().enumerate() {
            let min = min_eigenvalue(p)?;
            if min < -tol {
                violations.push(Violation {
                    relation: Relation::Positivity,
                    indices: vec![alpha, k],
                    measured: min,
                    expected: 0.0,
                });
            }
        }

        params.push(FrameParams {
            size: m,
            gamma,
            a,
            b,
            c,
        });
    }

    let gamma_total: f64 = params.iter().map(|p| p.gamma).sum();
    if (gamma_total - 1.0).abs() > tol {
        violations.push(Violation {
            relation: Relation::WeightSum,
            indices: vec![],
            measured: gamma_total,
            expected: 1.0,
        });
    }

    let mut ratios = Vec::new();
    for alpha in 0..n {
        for beta in alpha + 1..n {
            let expected = params[alpha].a * params[beta].a / df;
            for (k, p) in ops[alpha].iter().enumerate() {
                for (l, q) in ops[beta].iter().enumerate() {
                    let o = p.inner(q);
                    ratios.push(o / (params[alpha].a * params[beta].a));
                    if (o - expected).abs() > tol {
                        violations.push(Violation {
                            relation: Relation::CrossOverlap,
                            indices: vec![alpha, k, beta, l],
                            measured: o,
                            expected,
                        });
                    }
                }
            }
        }
    }

    if !violations.is_empty() {
        return Err(Error::Violations(violations));
    }

    let f = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    let frames = ops
        .into_iter()
        .zip(params)
        .map(|(ops, params)| Frame {
            params,
            ops,
            sign: None,
            h_ops: None,
        })
        .collect();
    let mut geam = Geam {
        dim: d,
        frames,
        f,
        certificate: DesignCertificate {
            is_conical: false,
            s: 0.0,
            kappa_plus: 0.0,
            kappa_minus: 0.0,
            residual: f64::INFINITY,
        },
    };
    geam.certificate = check_conical_design(&geam, tol);
    Ok(geam)
}

/// Tests the conical 2-design identity.
///
/// Requires the per-frame constants `a^2 (b - c)` to agree, the explicit
/// `sum P (x) P` to match `kappa_+ I + kappa_- F` with the predicted kappas,
/// and the least-squares kappas fitted to `sum P (x) P` to agree with them.
pub fn check_conical_design(geam: &Geam, tol: f64) -> DesignCertificate {
    let d = geam.dim;
    let df = d as f64;
    let constants: Vec<f64> = geam
        .frames
        .iter()
        .map(|f| f.params.design_constant())
        .collect();
    let s = constants.iter().sum::<f64>() / constants.len() as f64;
    let constant_spread = constants
        .iter()
        .map(|x| (x - s).abs())
        .fold(0.0, f64::max);

    let n2 = d * d;
    let mut tensor_sum = CMatrix::zeros(n2, n2);
    for p in geam.operators() {
        tensor_sum += kron(p.matrix(), p.matrix());
    }
    let swap = flip(d).expect("GEAM dimension is at least 2");

    let mu = geam.mu(geam.frame_count());
    let kappa_plus_pred = mu - s / df;
    let kappa_minus_pred = s;
    let predicted = CMatrix::identity(n2, n2).scale(kappa_plus_pred) + swap.scale(kappa_minus_pred);
    let residual = max_abs(&(&tensor_sum - predicted));

    // Projection onto span{I, F}: Tr X = k+ d^2 + k- d, Tr XF = k+ d + k- d^2.
    let t = crate::linalg::trace(&tensor_sum).re;
    let tf = hs_product(&tensor_sum, &swap).re;
    let det = df * df * (df * df - 1.0);
    let kappa_plus = (df * df * t - df * tf) / det;
    let kappa_minus = (df * df * tf - df * t) / det;

    let is_conical = constant_spread <= tol
        && residual <= tol
        && (kappa_plus - kappa_plus_pred).abs() <= tol
        && (kappa_minus - kappa_minus_pred).abs() <= tol
        && kappa_plus >= kappa_minus - tol
        && kappa_minus > 0.0;

    DesignCertificate {
        is_conical,
        s,
        kappa_plus,
        kappa_minus,
        residual,
    }
}

/// Largest design constant up to the admissible cap for which every
/// `P_{alpha,k}` is positive semidefinite, by bisection.
pub fn max_feasible_s(partition: &BasisPartition, gamma: &[f64], signs: &[Sign]) -> Result<f64> {
    validate_weights(gamma, partition.frame_count())?;
    let d = partition.dim();
    let cap = partition
        .group_sizes()
        .iter()
        .zip(gamma)
        .map(|(&m, &g)| frame_cap(d, m, g))
        .fold(f64::INFINITY, f64::min);
    let n = partition.frame_count();
    let feasible = |s: f64| -> Result<bool> {
        let drafts = draft_frames(partition, gamma, &vec![s; n], signs)?;
        match check_positivity(&drafts, DEFAULT_TOL) {
            Ok(()) => Ok(true),
            Err(Error::NotPositive { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if feasible(cap)? {
        return Ok(cap);
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        if lo > 0.0 && hi - lo <= 1e-7 * lo {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        Ok(lo)
    } else {
        Err(Error::Infeasible(format!(
            "no positive S below the cap {cap} keeps every operator positive"
        )))
    }
}
