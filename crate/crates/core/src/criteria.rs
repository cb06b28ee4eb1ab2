//! Separability criteria from the GEAM correlation matrix
//! `P_{(alpha,k),(beta,l)} = Tr[rho (P^A_{alpha,k} (x) P^B_{beta,l})]`.
//!
//! For separable `rho`:
//! * trace: `Tr P <= (C~^A + C~^B)/2` (square layouts only),
//! * trace norm: `||P||_tr <= sqrt(C~^A C~^B)`,
//! * enhanced: `||R||_tr <= sqrt(C~^A - C^A(rho_A)) sqrt(C~^B - C^B(rho_B))`
//!   with `R` the correlation matrix of `rho - rho_A (x) rho_B`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coincidence::{ioc, max_ioc, probabilities};
use crate::error::{Error, Result};
use crate::geam::Geam;
use crate::linalg::{kron, trace_norm_real, Subsystem};
use crate::states::DensityMatrix;

/// Default absolute tolerance when comparing a criterion with its bound.
pub const CRITERION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    sizes_a: Vec<usize>,
    sizes_b: Vec<usize>,
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn frame_sizes_a(&self) -> &[usize] {
        &self.sizes_a
    }

    pub fn frame_sizes_b(&self) -> &[usize] {
        &self.sizes_b
    }

    pub fn is_square_layout(&self) -> bool {
        self.sizes_a == self.sizes_b
    }
}

fn local_dims(geam_a: &Geam, geam_b: &Geam, rho: &DensityMatrix) -> Result<(usize, usize)> {
    let dims = (geam_a.dim(), geam_b.dim());
    if let Some(state_dims) = rho.bipartite_dims() {
        if state_dims != dims {
            return Err(Error::DimensionMismatch {
                context: "state local dimension A",
                expected: dims.0,
                found: state_dims.0,
            });
        }
    } else if rho.dim() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch {
            context: "bipartite state",
            expected: dims.0 * dims.1,
            found: rho.dim(),
        });
    }
    Ok(dims)
}

pub fn correlation_matrix(
    geam_a: &Geam,
    geam_b: &Geam,
    rho: &DensityMatrix,
) -> Result<CorrelationMatrix> {
    local_dims(geam_a, geam_b, rho)?;
    let ops_a: Vec<_> = geam_a.operators().collect();
    let ops_b: Vec<_> = geam_b.operators().collect();
    let mut entries = DMatrix::zeros(ops_a.len(), ops_b.len());
    for (i, pa) in ops_a.iter().enumerate() {
        for (j, pb) in ops_b.iter().enumerate() {
            let product = kron(pa.matrix(), pb.matrix());
            entries[(i, j)] = rho.hermitian().expectation(&product).re;
        }
    }
    Ok(CorrelationMatrix {
        sizes_a: geam_a.frame_sizes(),
        sizes_b: geam_b.frame_sizes(),
        entries,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CriterionId {
    Trace,
    TraceNorm,
    Enhanced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub lhs: f64,
    pub bound: f64,
    pub violated: bool,
    pub tolerance: f64,
}

impl CriterionReport {
    fn new(criterion: CriterionId, lhs: f64, bound: f64, tolerance: f64) -> Self {
        CriterionReport {
            criterion,
            lhs,
            bound,
            violated: lhs > bound + tolerance,
            tolerance,
        }
    }
}

pub fn trace_criterion(
    corr: &CorrelationMatrix,
    geam_a: &Geam,
    geam_b: &Geam,
    tol: f64,
) -> Result<CriterionReport> {
    if !corr.is_square_layout() {
        return Err(Error::LayoutMismatch {
            a: corr.sizes_a.clone(),
            b: corr.sizes_b.clone(),
        });
    }
    let bound = 0.5 * (max_ioc(geam_a)? + max_ioc(geam_b)?);
    Ok(CriterionReport::new(CriterionId::Trace, corr.entries.trace(), bound, tol))
}

pub fn trace_norm_criterion(
    corr: &CorrelationMatrix,
    geam_a: &Geam,
    geam_b: &Geam,
    tol: f64,
) -> Result<CriterionReport> {
    let bound = (max_ioc(geam_a)? * max_ioc(geam_b)?).sqrt();
    Ok(CriterionReport::new(
        CriterionId::TraceNorm,
        trace_norm_real(&corr.entries)?,
        bound,
        tol,
    ))
}

/// The correlation matrix of `rho - rho_A (x) rho_B`.
pub fn centered_correlation(
    geam_a: &Geam,
    geam_b: &Geam,
    rho: &DensityMatrix,
) -> Result<DMatrix<f64>> {
    let corr = correlation_matrix(geam_a, geam_b, rho)?;
    let pa = probabilities(geam_a, &rho.marginal(Subsystem::A)?)?.to_vec();
    let pb = probabilities(geam_b, &rho.marginal(Subsystem::B)?)?.to_vec();
    Ok(DMatrix::from_fn(pa.len(), pb.len(), |i, j| {
        corr.entries[(i, j)] - pa[i] * pb[j]
    }))
}

pub fn enhanced_criterion(
    geam_a: &Geam,
    geam_b: &Geam,
    rho: &DensityMatrix,
    tol: f64,
) -> Result<CriterionReport> {
    let max_a = max_ioc(geam_a)?;
    let max_b = max_ioc(geam_b)?;
    let centered = centered_correlation(geam_a, geam_b, rho)?;
    let marginal_a = ioc(&probabilities(geam_a, &rho.marginal(Subsystem::A)?)?);
    let marginal_b = ioc(&probabilities(geam_b, &rho.marginal(Subsystem::B)?)?);
    let mut radicands = [max_a - marginal_a, max_b - marginal_b];
    for r in &mut radicands {
        if *r < -1e-10 {
            return Err(Error::NegativeRadicand { value: *r });
        }
        *r = r.max(0.0);
    }
    let bound = radicands[0].sqrt() * radicands[1].sqrt();
    Ok(CriterionReport::new(
        CriterionId::Enhanced,
        trace_norm_real(&centered)?,
        bound,
        tol,
    ))
}

/// All three criteria on one state. A criterion whose precondition fails
/// (typically the square layout of the trace criterion) yields an `Err`
/// entry without affecting the others.
pub fn evaluate_all(
    geam_a: &Geam,
    geam_b: &Geam,
    rho: &DensityMatrix,
    tol: f64,
) -> Result<Vec<Result<CriterionReport>>> {
    let corr = correlation_matrix(geam_a, geam_b, rho)?;
    Ok(vec![
        trace_criterion(&corr, geam_a, geam_b, tol),
        trace_norm_criterion(&corr, geam_a, geam_b, tol),
        enhanced_criterion(geam_a, geam_b, rho, tol),
    ])
}

/// [`evaluate_all`] over a batch of states, in parallel; output order
/// follows input order.
pub fn evaluate_batch(
    geam_a: &Geam,
    geam_b: &Geam,
    states: &[DensityMatrix],
    tol: f64,
) -> Vec<Result<Vec<Result<CriterionReport>>>> {
    states
        .par_iter()
        .map(|rho| evaluate_all(geam_a, geam_b, rho, tol))
        .collect()
}
