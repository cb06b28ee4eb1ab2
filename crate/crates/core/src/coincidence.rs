//! Outcome probabilities and (partial) indices of coincidence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geam::Geam;
use crate::linalg::{max_abs_diff, CMatrix, Hermitian};
use crate::states::DensityMatrix;

const PROBABILITY_TOL: f64 = 1e-10;

/// `p_{alpha,k} = Tr(P_{alpha,k} rho)`, grouped by frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    frames: Vec<Vec<f64>>,
}

impl ProbabilityTable {
    pub fn from_frames(frames: Vec<Vec<f64>>) -> Result<Self> {
        if frames.is_empty() || frames.iter().any(Vec::is_empty) {
            return Err(Error::Schema("empty probability table".into()));
        }
        if frames.iter().flatten().any(|p| !p.is_finite() || *p < -1e-12) {
            return Err(Error::Schema("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = frames.iter().flatten().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::Schema(format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityTable { frames })
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Flattened in frame order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.frames.iter().flatten().copied().collect()
    }
}

pub fn probabilities(geam: &Geam, rho: &DensityMatrix) -> Result<ProbabilityTable> {
    if rho.dim() != geam.dim() {
        return Err(Error::DimensionMismatch {
            context: "state vs measurement",
            expected: geam.dim(),
            found: rho.dim(),
        });
    }
    let frames: Vec<Vec<f64>> = geam
        .frames()
        .iter()
        .map(|f| f.operators().iter().map(|p| p.inner(rho.hermitian())).collect())
        .collect();
    for (frame, probs) in geam.frames().iter().zip(&frames) {
        let sum: f64 = probs.iter().sum();
        if (sum - frame.params().gamma).abs() > PROBABILITY_TOL {
            return Err(Error::Inconsistent(format!(
                "frame probabilities sum to {sum}, expected {}",
                frame.params().gamma
            )));
        }
    }
    ProbabilityTable::from_frames(frames)
}

/// `C_L`: sum of squared probabilities over the first `prefix` frames.
pub fn partial_ioc(table: &ProbabilityTable, prefix: usize) -> Result<f64> {
    let n = table.frame_count();
    if prefix == 0 || prefix > n {
        return Err(Error::OutOfRange {
            what: "frame prefix L",
            value: prefix as f64,
            min: 1.0,
            max: n as f64,
        });
    }
    Ok(table.frames[..prefix].iter().flatten().map(|p| p * p).sum())
}

/// Full index of coincidence `C = C_N`.
pub fn ioc(table: &ProbabilityTable) -> f64 {
    table.frames.iter().flatten().map(|p| p * p).sum()
}

/// Upper bounds on `C_L` for a conical GEAM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IocBound {
    pub prefix: usize,
    pub mu: f64,
    /// `S (purity - 1/d) + mu_L`
    pub bound_state: f64,
    /// `(d-1)/d S + mu_L`, the value at purity one.
    pub bound_pure: f64,
}

/// [`IocBound`] evaluated together with the measured `C_L` of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceBound {
    pub value: f64,
    #[serde(flatten)]
    pub bound: IocBound,
}

/// `C~_L = (d-1)/d S + mu_L`.
pub fn max_partial_ioc(geam: &Geam, prefix: usize) -> Result<f64> {
    let s = geam.require_conical("the maximal index of coincidence")?;
    check_prefix(geam, prefix)?;
    let d = geam.dim() as f64;
    Ok((d - 1.0) / d * s + geam.mu(prefix))
}

/// `C~ = C~_N`.
pub fn max_ioc(geam: &Geam) -> Result<f64> {
    max_partial_ioc(geam, geam.frame_count())
}

fn check_prefix(geam: &Geam, prefix: usize) -> Result<()> {
    if prefix == 0 || prefix > geam.frame_count() {
        return Err(Error::OutOfRange {
            what: "frame prefix L",
            value: prefix as f64,
            min: 1.0,
            max: geam.frame_count() as f64,
        });
    }
    Ok(())
}

/// Bounds on the partial index of coincidence at a caller-supplied purity.
pub fn ioc_bounds(geam: &Geam, prefix: usize, purity: f64) -> Result<IocBound> {
    let s = geam.require_conical("the partial index-of-coincidence bound")?;
    check_prefix(geam, prefix)?;
    let d = geam.dim() as f64;
    if !(purity >= 1.0 / d - 1e-12 && purity <= 1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            what: "purity",
            value: purity,
            min: 1.0 / d,
            max: 1.0,
        });
    }
    let mu = geam.mu(prefix);
    Ok(IocBound {
        prefix,
        mu,
        bound_state: s * (purity - 1.0 / d) + mu,
        bound_pure: (d - 1.0) / d * s + mu,
    })
}

pub fn coincidence_bound(geam: &Geam, rho: &DensityMatrix, prefix: usize) -> Result<CoincidenceBound> {
    let table = probabilities(geam, rho)?;
    Ok(CoincidenceBound {
        value: partial_ioc(&table, prefix)?,
        bound: ioc_bounds(geam, prefix, rho.purity().min(1.0))?,
    })
}

/// Coefficients `r_{alpha,k}` with `rho = I/d + sum r_{alpha,k} H_{alpha,k}`.
///
/// The expansion is not unique because the `H` operators of a frame sum to
/// zero; the returned coefficients satisfy `sum_k r_{alpha,k} = 0` (the
/// minimal-norm solution). Within a frame the Gram matrix of the `H`
/// operators is `(sqrt(M)+1)^2 (M I - J)`, whose pseudoinverse maps
/// `Tr(rho H_k)` to `Tr(rho H_k) / ((sqrt(M)+1)^2 M)`.
pub fn decompose_state(geam: &Geam, rho: &DensityMatrix) -> Result<Vec<Vec<f64>>> {
    if !geam.has_h_operators() {
        return Err(Error::Unsupported(
            "state decomposition needs a GEAM built from a basis partition",
        ));
    }
    if rho.dim() != geam.dim() {
        return Err(Error::DimensionMismatch {
            context: "state vs measurement",
            expected: geam.dim(),
            found: rho.dim(),
        });
    }
    let coefficients: Vec<Vec<f64>> = geam
        .frames()
        .iter()
        .map(|frame| {
            let h = frame.h_operators().expect("checked above");
            let m = h.len() as f64;
            let scale = (m.sqrt() + 1.0).powi(2) * m;
            h.iter().map(|hk| hk.inner(rho.hermitian()) / scale).collect()
        })
        .collect();

    let rebuilt = reconstruct_state(geam, &coefficients)?;
    let drift = max_abs_diff(rebuilt.matrix(), rho.matrix());
    if drift > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "H-operator expansion reproduces the state only to {drift:e}"
        )));
    }
    Ok(coefficients)
}

/// `I/d + sum r_{alpha,k} H_{alpha,k}`.
pub fn reconstruct_state(geam: &Geam, coefficients: &[Vec<f64>]) -> Result<Hermitian> {
    let d = geam.dim();
    let mut m = CMatrix::identity(d, d).unscale(d as f64);
    for (frame, r) in geam.frames().iter().zip(coefficients) {
        let h = frame.h_operators().ok_or(Error::Unsupported(
            "state reconstruction needs a GEAM built from a basis partition",
        ))?;
        for (hk, rk) in h.iter().zip(r) {
            m += hk.matrix().scale(*rk);
        }
    }
    Ok(Hermitian::symmetrize(m))
}
