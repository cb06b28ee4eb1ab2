//! JSON documents for GEAMs, states and witnesses.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested
//! arrays. Reals are written with shortest round-trip formatting, so a
//! document parsed and re-serialized reproduces the same bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geam::{validate_geam, DesignCertificate, FrameParams, Geam, DEFAULT_TOL};
use crate::linalg::{c, CMatrix, Hermitian};
use crate::maps_witness::{Witness, WitnessProvenance};
use crate::states::DensityMatrix;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|col| [m[(r, col)].re, m[(r, col)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(CMatrix::from_fn(n, cols, |r, col| {
        let [re, im] = rows[r][col];
        c(re, im)
    }))
}

fn hermitian_from_json(rows: &MatrixJson) -> Result<Hermitian> {
    Hermitian::new(matrix_from_json(rows)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDoc {
    pub gamma: f64,
    pub ops: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub f: Option<f64>,
    #[serde(rename = "S")]
    pub s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeamDoc {
    pub dim: usize,
    pub frames: Vec<FrameDoc>,
    pub params: ParamsDoc,
    pub certificate: DesignCertificate,
}

impl GeamDoc {
    pub fn from_geam(geam: &Geam) -> Self {
        let params = |f: fn(&FrameParams) -> f64| geam.frames().iter().map(|fr| f(fr.params())).collect();
        let cert = geam.certificate().clone();
        GeamDoc {
            dim: geam.dim(),
            frames: geam
                .frames()
                .iter()
                .map(|f| FrameDoc {
                    gamma: f.params().gamma,
                    ops: f.operators().iter().map(|p| matrix_to_json(p.matrix())).collect(),
                })
                .collect(),
            params: ParamsDoc {
                a: params(|p| p.a),
                b: params(|p| p.b),
                c: params(|p| p.c),
                f: geam.f(),
                s: cert.is_conical.then_some(cert.s),
            },
            certificate: cert,
        }
    }

    /// Re-validates the operators and checks the stored parameters against
    /// the measured ones. The stored values are kept, so that serializing the
    /// result reproduces the document.
    pub fn into_geam(self, tol: f64) -> Result<Geam> {
        let ops = self
            .frames
            .iter()
            .map(|f| f.ops.iter().map(hermitian_from_json).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let measured = validate_geam(ops, tol)?;
        if measured.dim() != self.dim {
            return Err(Error::Inconsistent(format!(
                "document dim {} but operators are {}x{}",
                self.dim,
                measured.dim(),
                measured.dim()
            )));
        }
        let n = measured.frame_count();
        let p = &self.params;
        if [p.a.len(), p.b.len(), p.c.len()].iter().any(|&len| len != n) {
            return Err(Error::Schema(format!("params must list one value per frame ({n})")));
        }
        let stored: Vec<FrameParams> = (0..n)
            .map(|alpha| FrameParams {
                size: measured.frame(alpha).len(),
                gamma: self.frames[alpha].gamma,
                a: p.a[alpha],
                b: p.b[alpha],
                c: p.c[alpha],
            })
            .collect();
        for (alpha, (s, m)) in stored.iter().zip(measured.frames()).enumerate() {
            let m = m.params();
            let a2 = m.a * m.a;
            let gaps = [
                (s.gamma - m.gamma).abs(),
                (s.a - m.a).abs(),
                (s.b - m.b).abs() * a2,
                (s.c - m.c).abs() * a2,
            ];
            if gaps.iter().any(|g| *g > tol) {
                return Err(Error::Inconsistent(format!(
                    "stored parameters of frame {alpha} disagree with the operators"
                )));
            }
        }
        Ok(measured.with_params(stored, tol))
    }
}

pub fn geam_to_json(geam: &Geam) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GeamDoc::from_geam(geam))?)
}

pub fn geam_from_json(text: &str, tol: f64) -> Result<Geam> {
    let doc: GeamDoc = serde_json::from_str(text)?;
    doc.into_geam(tol)
}

pub fn geam_from_json_default(text: &str) -> Result<Geam> {
    geam_from_json(text, DEFAULT_TOL)
}

/// SHA-256 of the compact GEAM document, hex encoded.
pub fn geam_fingerprint(geam: &Geam) -> String {
    let compact = serde_json::to_string(&GeamDoc::from_geam(geam)).expect("GEAM serializes");
    hex::encode(Sha256::digest(compact.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub dims: Vec<usize>,
    pub matrix: MatrixJson,
}

impl StateDoc {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        StateDoc {
            dims: rho.dims().to_vec(),
            matrix: matrix_to_json(rho.matrix()),
        }
    }

    pub fn into_state(self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.dims, hermitian_from_json(&self.matrix)?)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StatesInput {
    One(StateDoc),
    Many(Vec<StateDoc>),
}

/// A single state object or an array of them.
pub fn states_from_json(text: &str) -> Result<Vec<DensityMatrix>> {
    let docs = match serde_json::from_str::<StatesInput>(text)? {
        StatesInput::One(doc) => vec![doc],
        StatesInput::Many(docs) => docs,
    };
    docs.into_iter().map(StateDoc::into_state).collect()
}

pub fn state_to_json(rho: &DensityMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateDoc::from_state(rho))?)
}

pub fn states_to_json(states: &[DensityMatrix]) -> Result<String> {
    let docs: Vec<StateDoc> = states.iter().map(StateDoc::from_state).collect();
    Ok(serde_json::to_string_pretty(&docs)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub dims: [usize; 2],
    pub matrix: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<WitnessProvenance>,
}

impl WitnessDoc {
    pub fn from_witness(w: &Witness) -> Self {
        let (da, db) = w.dims();
        WitnessDoc {
            dims: [da, db],
            matrix: matrix_to_json(w.matrix()),
            provenance: w.provenance().cloned(),
        }
    }

    pub fn into_witness(self) -> Result<Witness> {
        Witness::new(
            (self.dims[0], self.dims[1]),
            hermitian_from_json(&self.matrix)?,
            self.provenance,
        )
    }
}
