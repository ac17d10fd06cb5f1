//! Hermitian operator bases (Pauli matrices for qubits, generalized
//! Gell-Mann matrices above) and coefficient expansions of multipartite
//! operators over them.
//!
//! Every basis starts with the identity and satisfies the trace
//! orthogonality `Tr(s^j s^k) = d * delta_jk`, so all non-identity elements
//! are traceless and partial traces act trivially on coefficient tensors.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::kernels::{self, c};
use crate::space::SpaceRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Pauli,
    GellMann,
}

/// A Hermitian operator basis for one subsystem dimension.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    kind: BasisKind,
    elements: Vec<Array2<C64>>,
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, j: usize) -> &Array2<C64> {
        &self.elements[j]
    }

    pub fn elements(&self) -> &[Array2<C64>] {
        &self.elements
    }

    /// The j-th element as an operator on a labeled subsystem.
    pub fn operator(&self, j: usize, label: impl Into<String>) -> Result<Operator> {
        Operator::new(
            SpaceRegistry::single(label, self.dim)?,
            self.elements[j].clone(),
        )
    }

    /// Display name of the j-th element.
    pub fn label(&self, j: usize) -> String {
        if self.dim == 2 {
            ["I", "X", "Y", "Z"][j].to_string()
        } else if j == 0 {
            "I".to_string()
        } else {
            format!("s{j}")
        }
    }
}

/// Hermitian basis for dimension `d >= 2`: the identity first, then the
/// symmetric off-diagonal pairs, the antisymmetric pairs, and the diagonal
/// elements, each group in lexicographic index order. Elements are rescaled
/// so that `Tr(s^j s^k) = d * delta_jk`; for `d = 2` this is exactly
/// `I, X, Y, Z`.
pub fn hermitian_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(Error::BasisDimension(d));
    }
    Ok(basis_for_dim(d))
}

pub(crate) fn basis_for_dim(d: usize) -> OperatorBasis {
    let kind = if d == 2 {
        BasisKind::Pauli
    } else {
        BasisKind::GellMann
    };
    let mut elements = Vec::with_capacity(d * d);
    elements.push(kernels::identity(d));
    if d == 1 {
        return OperatorBasis {
            dim: 1,
            kind: BasisKind::GellMann,
            elements,
        };
    }
    let scale = (d as f64 / 2.0).sqrt();
    for j in 0..d {
        for k in j + 1..d {
            let mut m = Array2::zeros((d, d));
            m[(j, k)] = c(scale, 0.0);
            m[(k, j)] = c(scale, 0.0);
            elements.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = Array2::zeros((d, d));
            m[(j, k)] = c(0.0, -scale);
            m[(k, j)] = c(0.0, scale);
            elements.push(m);
        }
    }
    for l in 1..d {
        let norm = scale * (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut m = Array2::zeros((d, d));
        for j in 0..l {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * norm, 0.0);
        elements.push(m);
    }
    OperatorBasis { dim: d, kind, elements }
}

/// Real coefficients of a Hermitian operator over tensor products of
/// per-subsystem Hermitian basis elements:
/// `Op = normalization * sum c[j...k] s^j (x) ... (x) s^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTensor {
    basis: BasisKind,
    /// The constant in front of the sum; `1 / total_dim` by construction.
    normalization: f64,
    /// Subsystem dimensions, in registry order.
    dims: Vec<usize>,
    /// Row-major over the per-subsystem shapes `d_i^2`.
    coefficients: Vec<f64>,
}

impl CoefficientTensor {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d * d).collect()
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficient at one basis multi-index.
    pub fn value(&self, indices: &[usize]) -> f64 {
        let shape = self.shape();
        assert_eq!(indices.len(), shape.len());
        self.coefficients[crate::space::flat_index(indices, &shape)]
    }
}

/// Expands a Hermitian operator over the per-subsystem Hermitian bases.
/// The imaginary parts of all coefficients must vanish within `cfg.tol`.
pub fn pauli_expand(op: &Operator, cfg: &Config) -> Result<CoefficientTensor> {
    let dims = op.registry().dims();
    let bases: Vec<OperatorBasis> = dims.iter().map(|&d| basis_for_dim(d)).collect();
    let shape: Vec<usize> = dims.iter().map(|&d| d * d).collect();
    let count: usize = shape.iter().product();
    let mut coefficients = Vec::with_capacity(count);
    let mut idx = vec![0usize; dims.len()];
    let mut worst_imag: f64 = 0.0;
    for flat in 0..count {
        crate::space::unflatten(flat, &shape, &mut idx);
        let elem = tensor_element(&bases, &idx);
        // Tr(op * elem)
        let mut tr = c(0.0, 0.0);
        for i in 0..op.dim() {
            for j in 0..op.dim() {
                tr += op.matrix()[(i, j)] * elem[(j, i)];
            }
        }
        worst_imag = worst_imag.max(tr.im.abs());
        coefficients.push(tr.re);
    }
    if worst_imag > cfg.tol {
        return Err(Error::NotHermitian(worst_imag));
    }
    let kind = if dims.iter().all(|&d| d <= 2) {
        BasisKind::Pauli
    } else {
        BasisKind::GellMann
    };
    Ok(CoefficientTensor {
        basis: kind,
        normalization: 1.0 / op.dim() as f64,
        dims,
        coefficients,
    })
}

/// Rebuilds the operator from its coefficient tensor. Inverse of
/// [`pauli_expand`] on Hermitian operators.
pub fn pauli_assemble(coeffs: &CoefficientTensor, registry: &SpaceRegistry) -> Result<Operator> {
    if coeffs.dims != registry.dims() {
        return Err(Error::ShapeMismatch);
    }
    let shape = coeffs.shape();
    let count: usize = shape.iter().product();
    if coeffs.coefficients.len() != count {
        return Err(Error::ShapeMismatch);
    }
    let bases: Vec<OperatorBasis> = coeffs.dims.iter().map(|&d| basis_for_dim(d)).collect();
    let d = registry.total_dim();
    let mut matrix: Array2<C64> = Array2::zeros((d, d));
    let mut idx = vec![0usize; coeffs.dims.len()];
    for (flat, &value) in coeffs.coefficients.iter().enumerate() {
        if value == 0.0 {
            continue;
        }
        crate::space::unflatten(flat, &shape, &mut idx);
        let elem = tensor_element(&bases, &idx);
        matrix = matrix + elem.mapv(|z| z * value);
    }
    Operator::new(registry.clone(), matrix.mapv(|z| z * coeffs.normalization))
}

fn tensor_element(bases: &[OperatorBasis], idx: &[usize]) -> Array2<C64> {
    let mut out = bases[0].element(idx[0]).clone();
    for (basis, &j) in bases.iter().zip(idx).skip(1) {
        out = kernels::kron(&out, basis.element(j));
    }
    out
}
