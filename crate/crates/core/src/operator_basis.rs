//! Traceless Hermitian orthonormal operator bases and their partition into frames.

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, Hermitian};

const TRACE_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-11;

/// `d^2 - 1` traceless Hermitian operators, orthonormal under `Tr(A B)`.
///
/// Together with `I/sqrt(d)` they span the real space of Hermitian `d x d`
/// matrices.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<Hermitian>,
}

impl OperatorBasis {
    /// Accepts a user-supplied basis after checking count, tracelessness and
    /// orthonormality.
    pub fn new(dim: usize, elements: Vec<Hermitian>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { found: dim, min: 2 });
        }
        if elements.len() != dim * dim - 1 {
            return Err(Error::InvalidBasis(format!(
                "expected {} elements, found {}",
                dim * dim - 1,
                elements.len()
            )));
        }
        for (i, g) in elements.iter().enumerate() {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "basis element",
                    expected: dim,
                    found: g.dim(),
                });
            }
            let tr = g.trace();
            if tr.abs() > TRACE_TOL {
                return Err(Error::InvalidBasis(format!("element {i} has trace {tr:e}")));
            }
        }
        for i in 0..elements.len() {
            for j in i..elements.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = elements[i].inner(&elements[j]);
                if (got - want).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "Tr(G_{i} G_{j}) = {got}, expected {want}"
                    )));
                }
            }
        }
        Ok(OperatorBasis { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Same elements in a different order; `order` must be a permutation.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.elements.len()];
        if order.len() != seen.len() {
            return Err(Error::InvalidBasis("reordering has wrong length".into()));
        }
        for &i in order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidBasis("reordering is not a permutation".into()));
            }
        }
        Ok(OperatorBasis {
            dim: self.dim,
            elements: order.iter().map(|&i| self.elements[i].clone()).collect(),
        })
    }
}

/// Normalized generalized Gell-Mann matrices.
///
/// Ordering: the symmetric elements `(|j><k| + |k><j|)/sqrt(2)` for `j < k`,
/// then the antisymmetric `-i(|j><k| - |k><j|)/sqrt(2)`, then the diagonal
/// ones. For `d = 2` this is `(sigma_x, sigma_y, sigma_z)/sqrt(2)`.
pub fn gell_mann_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::InvalidDimension { found: d, min: 2 });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
        .collect();
    let mut elements = Vec::with_capacity(d * d - 1);
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = c(s, 0.0);
        m[(k, j)] = c(s, 0.0);
        elements.push(Hermitian::symmetrize(m));
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = c(0.0, -s);
        m[(k, j)] = c(0.0, s);
        elements.push(Hermitian::symmetrize(m));
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * norm, 0.0);
        elements.push(Hermitian::symmetrize(m));
    }
    OperatorBasis::new(d, elements)
}

/// A basis split into `N` groups; group `alpha` holds `M_alpha - 1` elements.
#[derive(Clone, Debug)]
pub struct BasisPartition {
    basis: OperatorBasis,
    group_sizes: Vec<usize>,
    groups: Vec<Vec<usize>>,
}

impl BasisPartition {
    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    /// Frame sizes `M_alpha`.
    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn frame_count(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn group_elements(&self, frame: usize) -> impl Iterator<Item = &Hermitian> {
        self.groups[frame].iter().map(|&i| &self.basis.elements[i])
    }
}

/// Contiguous assignment of basis elements to frames in declaration order.
pub fn partition_basis(basis: OperatorBasis, group_sizes: &[usize]) -> Result<BasisPartition> {
    if group_sizes.is_empty() {
        return Err(Error::PartitionSize {
            expected: basis.len(),
            found: 0,
        });
    }
    if let Some((frame, &size)) = group_sizes.iter().enumerate().find(|(_, &m)| m < 2) {
        return Err(Error::FrameTooSmall { frame, size });
    }
    let total: usize = group_sizes.iter().map(|m| m - 1).sum();
    if total != basis.len() {
        return Err(Error::PartitionSize {
            expected: basis.len(),
            found: total,
        });
    }
    let mut next = 0;
    let groups = group_sizes
        .iter()
        .map(|m| {
            let group: Vec<usize> = (next..next + m - 1).collect();
            next += m - 1;
            group
        })
        .collect();
    Ok(BasisPartition {
        basis,
        group_sizes: group_sizes.to_vec(),
        groups,
    })
}
