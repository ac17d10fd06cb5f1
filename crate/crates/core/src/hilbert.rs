//! Multipartite complex linear algebra on labeled tensor spaces: kets,
//! operators, projective decompositions of the identity, partial traces and
//! transposes, Schmidt decomposition, purification, support, and entropy.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::kernels::{self, c, eigh, svd};
use crate::space::SpaceRegistry;

/// A dense complex vector tagged with the registry it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    registry: SpaceRegistry,
    amplitudes: Array1<C64>,
}

impl Ket {
    pub fn new(registry: SpaceRegistry, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != registry.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: registry.total_dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Ket {
            registry,
            amplitudes,
        })
    }

    pub fn from_slice(registry: SpaceRegistry, amplitudes: &[C64]) -> Result<Self> {
        Ket::new(registry, Array1::from(amplitudes.to_vec()))
    }

    /// Computational basis state `|i_1 i_2 ...>` with one index per subsystem.
    pub fn basis_state(registry: SpaceRegistry, indices: &[usize]) -> Result<Self> {
        if indices.len() != registry.len() {
            return Err(Error::DimensionMismatch {
                expected: registry.len(),
                got: indices.len(),
            });
        }
        let dims = registry.dims();
        for (&i, &d) in indices.iter().zip(&dims) {
            if i >= d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: i,
                });
            }
        }
        let flat = crate::space::flat_index(indices, &dims);
        let mut amplitudes = Array1::zeros(registry.total_dim());
        amplitudes[flat] = c(1.0, 0.0);
        Ok(Ket {
            registry,
            amplitudes,
        })
    }

    pub fn registry(&self) -> &SpaceRegistry {
        &self.registry
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_normalized(&self, cfg: &Config) -> bool {
        (self.norm() - 1.0).abs() <= cfg.tol
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::BadProbability(0.0));
        }
        Ok(Ket {
            registry: self.registry.clone(),
            amplitudes: self.amplitudes.mapv(|z| z / n),
        })
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: C64) -> Ket {
        Ket {
            registry: self.registry.clone(),
            amplitudes: self.amplitudes.mapv(|z| z * factor),
        }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        Ok(Ket {
            registry: self.registry.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    pub fn distance(&self, other: &Ket) -> f64 {
        kernels::vec_dist(&self.amplitudes, &other.amplitudes)
    }

    /// Kronecker product; registries must not share labels.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let registry = self.registry.join(&other.registry)?;
        Ok(Ket {
            registry,
            amplitudes: kernels::kron_vec(&self.amplitudes, &other.amplitudes),
        })
    }

    /// The rank-1 positive operator `|self><self|`.
    pub fn dyad(&self) -> Operator {
        let d = self.dim();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        Operator::unchecked(self.registry.clone(), mat)
    }

    /// The outer product `|self><other|`.
    pub fn outer(&self, other: &Ket) -> Result<Operator> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        let d = self.dim();
        let mut mat = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = self.amplitudes[i] * other.amplitudes[j].conj();
            }
        }
        Ok(Operator::unchecked(self.registry.clone(), mat))
    }

    /// Contracts a bra living on a subset of this ket's subsystems:
    /// `(<bra| (x) I) |self>`, returning a ket on the remaining subsystems.
    pub fn contract(&self, bra: &Ket) -> Result<Ket> {
        let labels: Vec<&str> = bra.registry.labels().collect();
        check_subregistry(&bra.registry, &self.registry)?;
        let split = self.registry.split(&labels)?;
        let rest_labels = self.registry.complement(&labels);
        let rest_refs: Vec<&str> = rest_labels.iter().map(|s| s.as_str()).collect();
        let out_registry = self.registry.subregistry(&rest_refs)?;
        let mut out = Array1::zeros(split.rest_dim());
        for r in 0..split.rest_dim() {
            let mut acc = c(0.0, 0.0);
            for s in 0..split.keep_dim() {
                acc += bra.amplitudes[s].conj() * self.amplitudes[split.merge(s, r)];
            }
            out[r] = acc;
        }
        Ket::new(out_registry, out)
    }

    /// Expectation value `<self|op|self>`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if self.registry != op.registry {
            return Err(Error::RegistryMismatch);
        }
        let applied = op.matrix.dot(&self.amplitudes);
        Ok(self
            .amplitudes
            .iter()
            .zip(applied.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Same ket with subsystems listed in a new order.
    pub fn permuted(&self, order: &[&str]) -> Result<Ket> {
        let (registry, map) = permutation_map(&self.registry, order)?;
        let mut out = Array1::zeros(self.dim());
        for (old, &new) in map.iter().enumerate() {
            out[new] = self.amplitudes[old];
        }
        Ket::new(registry, out)
    }
}

/// A dense complex square matrix tagged with its registry. Hermiticity,
/// positivity, and projector defects are computed lazily and cached.
#[derive(Debug)]
pub struct Operator {
    registry: SpaceRegistry,
    matrix: Array2<C64>,
    cache: OpCache,
}

#[derive(Debug, Default)]
struct OpCache {
    hermitian_defect: OnceLock<f64>,
    min_eigenvalue: OnceLock<f64>,
    projector_defect: OnceLock<f64>,
}

impl Clone for Operator {
    fn clone(&self) -> Self {
        let cache = OpCache::default();
        if let Some(&v) = self.cache.hermitian_defect.get() {
            let _ = cache.hermitian_defect.set(v);
        }
        if let Some(&v) = self.cache.min_eigenvalue.get() {
            let _ = cache.min_eigenvalue.set(v);
        }
        if let Some(&v) = self.cache.projector_defect.get() {
            let _ = cache.projector_defect.set(v);
        }
        Operator {
            registry: self.registry.clone(),
            matrix: self.matrix.clone(),
            cache,
        }
    }
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.registry == other.registry && self.matrix == other.matrix
    }
}

impl Operator {
    pub fn new(registry: SpaceRegistry, matrix: Array2<C64>) -> Result<Self> {
        let d = registry.total_dim();
        if matrix.dim() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        Ok(Operator::unchecked(registry, matrix))
    }

    fn unchecked(registry: SpaceRegistry, matrix: Array2<C64>) -> Self {
        Operator {
            registry,
            matrix,
            cache: OpCache::default(),
        }
    }

    pub fn identity(registry: SpaceRegistry) -> Self {
        let d = registry.total_dim();
        Operator::unchecked(registry, kernels::identity(d))
    }

    pub fn zeros(registry: SpaceRegistry) -> Self {
        let d = registry.total_dim();
        Operator::unchecked(registry, Array2::zeros((d, d)))
    }

    pub fn registry(&self) -> &SpaceRegistry {
        &self.registry
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        kernels::trace(&self.matrix)
    }

    pub fn adjoint(&self) -> Operator {
        Operator::unchecked(self.registry.clone(), kernels::dagger(&self.matrix))
    }

    pub fn scaled(&self, factor: C64) -> Operator {
        Operator::unchecked(self.registry.clone(), self.matrix.mapv(|z| z * factor))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        Ok(Operator::unchecked(
            self.registry.clone(),
            &self.matrix + &other.matrix,
        ))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        Ok(Operator::unchecked(
            self.registry.clone(),
            &self.matrix - &other.matrix,
        ))
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.registry != other.registry {
            return Err(Error::RegistryMismatch);
        }
        Ok(Operator::unchecked(
            self.registry.clone(),
            self.matrix.dot(&other.matrix),
        ))
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.registry != ket.registry {
            return Err(Error::RegistryMismatch);
        }
        Ket::new(self.registry.clone(), self.matrix.dot(&ket.amplitudes))
    }

    pub fn frob_norm(&self) -> f64 {
        kernels::frob_norm(&self.matrix)
    }

    pub fn distance(&self, other: &Operator) -> f64 {
        kernels::frob_dist(&self.matrix, &other.matrix)
    }

    pub fn hermitian_defect(&self) -> f64 {
        *self.cache.hermitian_defect.get_or_init(|| {
            kernels::frob_dist(&self.matrix, &kernels::dagger(&self.matrix))
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self
            .cache
            .min_eigenvalue
            .get_or_init(|| eigh(&self.matrix).0.last().copied().unwrap_or(0.0))
    }

    pub fn projector_defect(&self) -> f64 {
        *self.cache.projector_defect.get_or_init(|| {
            let sq = self.matrix.dot(&self.matrix);
            kernels::frob_dist(&sq, &self.matrix)
        })
    }

    pub fn is_hermitian(&self, cfg: &Config) -> bool {
        self.hermitian_defect() <= cfg.tol
    }

    pub fn is_positive(&self, cfg: &Config) -> bool {
        self.is_hermitian(cfg) && self.min_eigenvalue() >= -cfg.tol
    }

    pub fn is_projector(&self, cfg: &Config) -> bool {
        self.is_hermitian(cfg) && self.projector_defect() <= cfg.tol
    }

    /// Kronecker product; registries must not share labels.
    pub fn tensor(&self, other: &Operator) -> Result<Operator> {
        let registry = self.registry.join(&other.registry)?;
        Ok(Operator::unchecked(
            registry,
            kernels::kron(&self.matrix, &other.matrix),
        ))
    }

    /// Traces out every subsystem not listed in `keep`. Keeping nothing
    /// yields the full trace as an operator on the scalar registry.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Operator> {
        let split = self.registry.split(keep)?;
        let out_registry = self.registry.subregistry(keep)?;
        let kd = split.keep_dim();
        let rd = split.rest_dim();
        let mut out = Array2::zeros((kd, kd));
        for i in 0..kd {
            for j in 0..kd {
                let mut acc = c(0.0, 0.0);
                for r in 0..rd {
                    acc += self.matrix[(split.merge(i, r), split.merge(j, r))];
                }
                out[(i, j)] = acc;
            }
        }
        Operator::new(out_registry, out)
    }

    /// Transposes one subsystem in the stored computational basis.
    pub fn partial_transpose(&self, label: &str) -> Result<Operator> {
        let pos = self
            .registry
            .position(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let dims = self.registry.dims();
        let d_p: usize = dims[pos];
        let stride: usize = dims[pos + 1..].iter().product();
        let total = self.dim();
        let coord = |flat: usize| (flat / stride) % d_p;
        let mut out = Array2::zeros((total, total));
        for i in 0..total {
            let ip = coord(i);
            for j in 0..total {
                let jp = coord(j);
                // swap the row/column coordinate of the transposed subsystem
                let ni = (i + jp * stride) - ip * stride;
                let nj = (j + ip * stride) - jp * stride;
                out[(ni, nj)] = self.matrix[(i, j)];
            }
        }
        Ok(Operator::unchecked(self.registry.clone(), out))
    }

    /// Embeds an operator on a sub-registry into `target` by tensoring with
    /// the identity on the remaining subsystems.
    pub fn embed(&self, target: &SpaceRegistry) -> Result<Operator> {
        check_subregistry(&self.registry, target)?;
        let labels: Vec<&str> = self.registry.labels().collect();
        let split = target.split(&labels)?;
        let kd = split.keep_dim();
        let rd = split.rest_dim();
        let mut out = Array2::zeros((target.total_dim(), target.total_dim()));
        for i in 0..kd {
            for j in 0..kd {
                let v = self.matrix[(i, j)];
                if v == c(0.0, 0.0) {
                    continue;
                }
                for r in 0..rd {
                    out[(split.merge(i, r), split.merge(j, r))] = v;
                }
            }
        }
        Operator::new(target.clone(), out)
    }

    /// Same operator with subsystems listed in a new order.
    pub fn permuted(&self, order: &[&str]) -> Result<Operator> {
        let (registry, map) = permutation_map(&self.registry, order)?;
        let d = self.dim();
        let mut out = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                out[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Operator::new(registry, out)
    }
}

/// Hilbert-Schmidt inner product `Tr(A^dag B)` on the operator space.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    if a.registry != b.registry {
        return Err(Error::RegistryMismatch);
    }
    Ok(a.matrix
        .iter()
        .zip(b.matrix.iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Verifies that `small` is a sub-registry of `target`: every label exists
/// with the same dimension and the relative order matches the registry order.
fn check_subregistry(small: &SpaceRegistry, target: &SpaceRegistry) -> Result<()> {
    let mut last = None;
    for (label, dim) in small.subsystems() {
        let pos = target
            .position(label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
        if target.dims()[pos] != *dim {
            return Err(Error::DimensionMismatch {
                expected: *dim,
                got: target.dims()[pos],
            });
        }
        if let Some(prev) = last {
            if pos <= prev {
                return Err(Error::LabelOrder);
            }
        }
        last = Some(pos);
    }
    Ok(())
}

fn permutation_map(
    registry: &SpaceRegistry,
    order: &[&str],
) -> Result<(SpaceRegistry, Vec<usize>)> {
    if order.len() != registry.len() {
        return Err(Error::DimensionMismatch {
            expected: registry.len(),
            got: order.len(),
        });
    }
    let mut positions = Vec::with_capacity(order.len());
    for l in order {
        positions.push(
            registry
                .position(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?,
        );
    }
    {
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != registry.len() {
            return Err(Error::LabelCollision(order.join(",")));
        }
    }
    let new_registry = SpaceRegistry::new(
        positions
            .iter()
            .map(|&p| registry.subsystems()[p].clone())
            .collect(),
    )?;
    let old_dims = registry.dims();
    let new_dims = new_registry.dims();
    let n = old_dims.len();
    let total = registry.total_dim();
    let mut map = vec![0usize; total];
    let mut old_idx = vec![0usize; n];
    let mut new_idx = vec![0usize; n];
    for (flat, slot) in map.iter_mut().enumerate() {
        crate::space::unflatten(flat, &old_dims, &mut old_idx);
        for (k, &p) in positions.iter().enumerate() {
            new_idx[k] = old_idx[p];
        }
        *slot = crate::space::flat_index(&new_idx, &new_dims);
    }
    Ok((new_registry, map))
}

/// A projective decomposition of the identity on one or more subsystems:
/// mutually orthogonal projectors summing to the identity. Serves as a
/// quantum sample space.
#[derive(Debug, Clone)]
pub struct Decomposition {
    registry: SpaceRegistry,
    projectors: Vec<Operator>,
    basis: Option<Vec<Ket>>,
}

impl Decomposition {
    /// Validates and wraps a list of projectors.
    pub fn new(registry: SpaceRegistry, projectors: Vec<Operator>, cfg: &Config) -> Result<Self> {
        let d = registry.total_dim();
        let mut sum = Array2::zeros((d, d));
        for p in &projectors {
            if p.registry != registry {
                return Err(Error::RegistryMismatch);
            }
            if !p.is_hermitian(cfg) {
                return Err(Error::NotHermitian(p.hermitian_defect()));
            }
            sum = sum + &p.matrix;
        }
        let defect = kernels::frob_dist(&sum, &kernels::identity(d));
        if defect > cfg.tol {
            return Err(Error::NotDecomposition(defect));
        }
        let mut worst: f64 = 0.0;
        for (i, p) in projectors.iter().enumerate() {
            for (j, q) in projectors.iter().enumerate() {
                let prod = p.matrix.dot(&q.matrix);
                let target = if i == j {
                    p.matrix.clone()
                } else {
                    Array2::zeros((d, d))
                };
                worst = worst.max(kernels::frob_dist(&prod, &target));
            }
        }
        if worst > cfg.tol {
            return Err(Error::NotDecomposition(worst));
        }
        Ok(Decomposition {
            registry,
            projectors,
            basis: None,
        })
    }

    /// Rank-1 decomposition built from a complete orthonormal basis.
    pub fn from_basis(registry: SpaceRegistry, kets: Vec<Ket>, cfg: &Config) -> Result<Self> {
        let d = registry.total_dim();
        if kets.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: kets.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for (i, a) in kets.iter().enumerate() {
            if a.registry != registry {
                return Err(Error::RegistryMismatch);
            }
            for (j, b) in kets.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b)?.norm() - target).abs());
            }
        }
        if worst > cfg.tol {
            return Err(Error::NotOrthonormal(worst));
        }
        let projectors = kets.iter().map(|k| k.dyad()).collect();
        Ok(Decomposition {
            registry,
            projectors,
            basis: Some(kets),
        })
    }

    /// The computational basis of a single subsystem.
    pub fn computational(label: impl Into<String>, dim: usize) -> Result<Self> {
        let registry = SpaceRegistry::single(label, dim)?;
        let kets: Vec<Ket> = (0..dim)
            .map(|i| Ket::basis_state(registry.clone(), &[i]).unwrap())
            .collect();
        Decomposition::from_basis(registry, kets, &Config::default())
    }

    /// The discrete Fourier basis of a single subsystem, mutually unbiased
    /// with the computational one.
    pub fn fourier(label: impl Into<String>, dim: usize) -> Result<Self> {
        let registry = SpaceRegistry::single(label, dim)?;
        let f = kernels::fourier_unitary(dim);
        let kets: Vec<Ket> = (0..dim)
            .map(|k| Ket::new(registry.clone(), f.column(k).to_owned()).unwrap())
            .collect();
        Decomposition::from_basis(registry, kets, &Config::default())
    }

    /// Rank-1 decomposition from the columns of a unitary matrix.
    pub fn from_unitary_columns(
        registry: SpaceRegistry,
        u: &Array2<C64>,
        cfg: &Config,
    ) -> Result<Self> {
        let kets: Vec<Ket> = (0..u.ncols())
            .map(|k| Ket::new(registry.clone(), u.column(k).to_owned()))
            .collect::<Result<_>>()?;
        Decomposition::from_basis(registry, kets, cfg)
    }

    pub fn registry(&self) -> &SpaceRegistry {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> &Operator {
        &self.projectors[i]
    }

    pub fn is_rank_one(&self, cfg: &Config) -> bool {
        self.len() == self.registry.total_dim()
            && self
                .projectors
                .iter()
                .all(|p| (p.trace().re - 1.0).abs() <= cfg.tol)
    }

    /// Basis kets for a rank-1 decomposition. Uses the stored basis when the
    /// decomposition was built from one; otherwise extracts the top
    /// eigenvector of each projector (deterministic phase convention).
    pub fn basis_kets(&self, cfg: &Config) -> Result<Vec<Ket>> {
        if let Some(kets) = &self.basis {
            return Ok(kets.clone());
        }
        if !self.is_rank_one(cfg) {
            return Err(Error::NotRankOne);
        }
        self.projectors
            .iter()
            .map(|p| {
                let (_, vecs) = eigh(&p.matrix);
                Ket::new(self.registry.clone(), vecs.column(0).to_owned())
            })
            .collect()
    }

    /// The decomposition with every projector complex-conjugated entrywise
    /// (the transpose, for Hermitian projectors).
    pub fn conjugated(&self) -> Decomposition {
        Decomposition {
            registry: self.registry.clone(),
            projectors: self
                .projectors
                .iter()
                .map(|p| {
                    Operator::unchecked(p.registry.clone(), p.matrix.mapv(|z| z.conj()))
                })
                .collect(),
            basis: self.basis.as_ref().map(|kets| {
                kets.iter()
                    .map(|k| Ket {
                        registry: k.registry.clone(),
                        amplitudes: k.amplitudes.mapv(|z| z.conj()),
                    })
                    .collect()
            }),
        }
    }
}

/// Schmidt decomposition of a bipartitioned ket.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Nonnegative coefficients, sorted descending; squares sum to 1 for a
    /// normalized input.
    pub coefficients: Vec<f64>,
    /// Orthonormal kets on the left part of the bipartition.
    pub left_basis: Vec<Ket>,
    /// Orthonormal kets on the right part.
    pub right_basis: Vec<Ket>,
    /// Number of coefficients above the rank threshold.
    pub rank: usize,
    original_registry: SpaceRegistry,
}

impl SchmidtForm {
    /// Rebuilds the ket on its original registry order.
    pub fn reassemble(&self) -> Result<Ket> {
        let left_reg = self.left_basis[0].registry.clone();
        let right_reg = self.right_basis[0].registry.clone();
        let joined = left_reg.join(&right_reg)?;
        let mut amplitudes = Array1::zeros(joined.total_dim());
        for ((coeff, l), r) in self
            .coefficients
            .iter()
            .zip(&self.left_basis)
            .zip(&self.right_basis)
        {
            let term = kernels::kron_vec(&l.amplitudes, &r.amplitudes);
            amplitudes = amplitudes + term.mapv(|z| z * *coeff);
        }
        let ket = Ket::new(joined, amplitudes)?;
        let order: Vec<&str> = self.original_registry.labels().collect();
        ket.permuted(&order)
    }
}

/// Schmidt decomposition across the bipartition (`left` | rest).
pub fn schmidt_decompose(ket: &Ket, left: &[&str], cfg: &Config) -> Result<SchmidtForm> {
    let positions = ket.registry.positions(left)?;
    if positions.is_empty() || positions.len() == ket.registry.len() {
        return Err(Error::EmptyBipartition);
    }
    let split = ket.registry.split(left)?;
    let left_reg = ket.registry.subregistry(left)?;
    let rest_labels = ket.registry.complement(left);
    let rest_refs: Vec<&str> = rest_labels.iter().map(|s| s.as_str()).collect();
    let right_reg = ket.registry.subregistry(&rest_refs)?;

    let (ld, rd) = (split.keep_dim(), split.rest_dim());
    let mut m = Array2::zeros((ld, rd));
    for i in 0..ld {
        for j in 0..rd {
            m[(i, j)] = ket.amplitudes[split.merge(i, j)];
        }
    }
    let f = svd(&m);
    let threshold = cfg.rank_threshold(f.s.first().copied().unwrap_or(0.0));
    let rank = f.s.iter().filter(|&&s| s > threshold).count();
    let left_basis: Vec<Ket> = (0..f.s.len())
        .map(|j| Ket::new(left_reg.clone(), f.u.column(j).to_owned()))
        .collect::<Result<_>>()?;
    let right_basis: Vec<Ket> = (0..f.s.len())
        .map(|j| Ket::new(right_reg.clone(), f.v.column(j).mapv(|z| z.conj())))
        .collect::<Result<_>>()?;
    Ok(SchmidtForm {
        coefficients: f.s,
        left_basis,
        right_basis,
        rank,
        original_registry: ket.registry.clone(),
    })
}

/// The smallest projector `P` with `P A P = A`, together with the rank of
/// `A`. Requires a positive semidefinite input.
pub fn support_and_rank(op: &Operator, cfg: &Config) -> Result<(Operator, usize)> {
    if !op.is_hermitian(cfg) {
        return Err(Error::NotHermitian(op.hermitian_defect()));
    }
    if op.min_eigenvalue() < -cfg.tol {
        return Err(Error::NotPositive(op.min_eigenvalue()));
    }
    let (vals, vecs) = eigh(&op.matrix);
    let threshold = cfg.rank_threshold(vals.first().copied().unwrap_or(0.0).max(0.0));
    let rank = vals.iter().filter(|&&v| v > threshold).count();
    let d = op.dim();
    let mut p = Array2::zeros((d, d));
    for k in 0..rank {
        for i in 0..d {
            for j in 0..d {
                p[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj();
            }
        }
    }
    Ok((Operator::unchecked(op.registry.clone(), p), rank))
}

/// Checks that an operator is a density operator within tolerance.
pub fn check_density(op: &Operator, cfg: &Config) -> Result<()> {
    if !op.is_hermitian(cfg) {
        return Err(Error::NotHermitian(op.hermitian_defect()));
    }
    if op.min_eigenvalue() < -cfg.tol {
        return Err(Error::NotPositive(op.min_eigenvalue()));
    }
    let tr = op.trace();
    let defect = (tr - c(1.0, 0.0)).norm();
    if defect > cfg.tol {
        return Err(Error::NotDensity(defect));
    }
    Ok(())
}

/// Purifies a density operator with a fresh environment subsystem.
///
/// The construction is deterministic: eigenvalues sorted descending, the
/// environment running through its computational basis in that order, so that
/// tracing the environment back out reproduces the input.
pub fn purify(density: &Operator, env_label: &str, env_dim: usize, cfg: &Config) -> Result<Ket> {
    check_density(density, cfg)?;
    let (vals, vecs) = eigh(&density.matrix);
    let threshold = cfg.rank_threshold(vals.first().copied().unwrap_or(0.0).max(0.0));
    let rank = vals.iter().filter(|&&v| v > threshold).count();
    if env_dim < rank {
        return Err(Error::EnvironmentTooSmall {
            needed: rank,
            got: env_dim,
        });
    }
    let env = SpaceRegistry::single(env_label, env_dim)?;
    let registry = density.registry.join(&env)?;
    let d = density.dim();
    let mut amplitudes = Array1::zeros(d * env_dim);
    for (k, &val) in vals.iter().take(env_dim).enumerate() {
        if val <= cfg.clamp {
            continue;
        }
        let w = val.max(0.0).sqrt();
        for i in 0..d {
            amplitudes[i * env_dim + k] = vecs[(i, k)] * w;
        }
    }
    Ket::new(registry, amplitudes)
}

/// Von Neumann entropy of a density operator, in units set by
/// `cfg.log_base` (base 2 by default, i.e. bits). Eigenvalues below
/// `cfg.clamp` contribute zero.
pub fn von_neumann_entropy(op: &Operator, cfg: &Config) -> Result<f64> {
    check_density(op, cfg)?;
    let (vals, _) = eigh(&op.matrix);
    let mut s = 0.0;
    for &v in &vals {
        if v > cfg.clamp {
            s -= v * cfg.log(v);
        }
    }
    Ok(s.max(0.0))
}

/// True when two rank-1 decompositions of the same subsystem are mutually
/// unbiased: every pairwise overlap has modulus `1/sqrt(d)`.
pub fn is_mutually_unbiased(a: &Decomposition, b: &Decomposition, cfg: &Config) -> Result<bool> {
    if a.registry != b.registry {
        return Err(Error::RegistryMismatch);
    }
    if !a.is_rank_one(cfg) || !b.is_rank_one(cfg) {
        return Err(Error::NotRankOne);
    }
    let d = a.registry.total_dim() as f64;
    let expected = 1.0 / d.sqrt();
    for p in &a.projectors {
        for q in &b.projectors {
            let overlap_sq = hs_inner(p, q)?.re.max(0.0);
            if (overlap_sq.sqrt() - expected).abs() > cfg.tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::space::SpaceRegistry;

    fn cfg() -> Config {
        Config::default()
    }

    fn qubit(label: &str) -> SpaceRegistry {
        SpaceRegistry::single(label, 2).unwrap()
    }

    pub(crate) fn bell(a: &str, b: &str) -> Ket {
        let reg = SpaceRegistry::new(vec![(a, 2), (b, 2)]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Ket::from_slice(reg, &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    fn sigma_x(label: &str) -> Operator {
        Operator::new(
            qubit(label),
            ndarray::array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap()
    }

    fn sigma_z(label: &str) -> Operator {
        Operator::new(
            qubit(label),
            ndarray::array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        )
        .unwrap()
    }

    #[test]
    fn tensor_of_basis_kets() {
        let zero = Ket::basis_state(qubit("a"), &[0]).unwrap();
        let one = Ket::basis_state(qubit("b"), &[1]).unwrap();
        let combined = zero.tensor(&one).unwrap();
        assert_eq!(combined.dim(), 4);
        assert_eq!(combined.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(combined.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn tensor_identity_operators() {
        let ia = Operator::identity(qubit("a"));
        let ib = Operator::identity(SpaceRegistry::single("b", 3).unwrap());
        let both = ia.tensor(&ib).unwrap();
        assert_eq!(both.dim(), 6);
        assert!(both.distance(&Operator::identity(both.registry().clone())) < 1e-15);
    }

    #[test]
    fn tensor_sigma_x_sigma_z() {
        // Kronecker product worked out by hand
        let product = sigma_x("a").tensor(&sigma_z("b")).unwrap();
        let mut expected = Array2::zeros((4, 4));
        expected[(0, 2)] = c(1.0, 0.0);
        expected[(1, 3)] = c(-1.0, 0.0);
        expected[(2, 0)] = c(1.0, 0.0);
        expected[(3, 1)] = c(-1.0, 0.0);
        assert!(kernels::frob_dist(product.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn tensor_label_collision_rejected() {
        let ia = Operator::identity(qubit("a"));
        assert!(matches!(ia.tensor(&ia), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let rho = bell("a", "b").dyad();
        let ra = rho.partial_trace(&["a"]).unwrap();
        let half = Operator::identity(qubit("a")).scaled(c(0.5, 0.0));
        assert!(ra.distance(&half) < 1e-12);
    }

    #[test]
    fn partial_trace_to_scalar_equals_full_trace() {
        // independent oracle: direct diagonal summation
        let reg = SpaceRegistry::new(vec![("a", 2), ("b", 3)]).unwrap();
        let m = Array2::from_shape_fn((6, 6), |(i, j)| c((i * 7 + j) as f64, (i as f64) - 2.0));
        let m = {
            let dag = kernels::dagger(&m);
            Operator::new(reg, (&m + &dag).mapv(|z| z * 0.5)).unwrap()
        };
        let direct: C64 = (0..6).map(|i| m.matrix()[(i, i)]).sum();
        let staged = m
            .partial_trace(&["a"]) // keep a
            .unwrap()
            .partial_trace(&[]) // then keep nothing
            .unwrap();
        assert_eq!(staged.dim(), 1);
        assert!((staged.matrix()[(0, 0)] - direct).norm() < 1e-12);
        assert!((m.trace() - direct).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_unknown_label() {
        let rho = bell("a", "b").dyad();
        assert!(matches!(
            rho.partial_trace(&["x"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn partial_transpose_diagonal_fixed_point() {
        let reg = SpaceRegistry::new(vec![("a", 2), ("b", 2)]).unwrap();
        let diag = Operator::new(
            reg,
            Array2::from_diag(&Array1::from(vec![
                c(1.0, 0.0),
                c(2.0, 0.0),
                c(3.0, 0.0),
                c(4.0, 0.0),
            ])),
        )
        .unwrap();
        let pt = diag.partial_transpose("a").unwrap();
        assert!(pt.distance(&diag) < 1e-15);
    }

    #[test]
    fn partial_transpose_bell_negative_eigenvalue() {
        let pt = bell("a", "b").dyad().partial_transpose("a").unwrap();
        let (vals, _) = eigh(pt.matrix());
        // brute-force eigendecomposition: one eigenvalue -1/2, three +1/2
        assert!((vals[3] + 0.5).abs() < 1e-12);
        for &v in &vals[..3] {
            assert!((v - 0.5).abs() < 1e-12);
        }
        // involutive
        let back = pt.partial_transpose("a").unwrap();
        assert!(back.distance(&bell("a", "b").dyad()) < 1e-15);
    }

    #[test]
    fn dyad_examples() {
        let zero = Ket::basis_state(qubit("a"), &[0]).unwrap();
        let d0 = zero.dyad();
        assert_eq!(d0.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(d0.matrix()[(1, 1)], c(0.0, 0.0));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Ket::from_slice(qubit("a"), &[c(s, 0.0), c(s, 0.0)]).unwrap();
        let dp = plus.dyad();
        for entry in dp.matrix() {
            assert!((entry - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert!((dp.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schmidt_bell_and_product() {
        let form = schmidt_decompose(&bell("a", "b"), &["a"], &cfg()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((form.coefficients[0] - s).abs() < 1e-12);
        assert!((form.coefficients[1] - s).abs() < 1e-12);
        assert_eq!(form.rank, 2);
        assert!(form.reassemble().unwrap().distance(&bell("a", "b")) < 1e-12);

        let alpha = Ket::from_slice(qubit("a"), &[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let gamma = Ket::from_slice(qubit("b"), &[c(0.8, 0.0), c(0.6, 0.0)]).unwrap();
        let product = alpha.tensor(&gamma).unwrap();
        let form = schmidt_decompose(&product, &["a"], &cfg()).unwrap();
        assert!((form.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(form.coefficients[1].abs() < 1e-12);
        assert_eq!(form.rank, 1);
    }

    #[test]
    fn schmidt_rejects_trivial_bipartitions() {
        let psi = bell("a", "b");
        assert!(matches!(
            schmidt_decompose(&psi, &[], &cfg()),
            Err(Error::EmptyBipartition)
        ));
        assert!(matches!(
            schmidt_decompose(&psi, &["a", "b"], &cfg()),
            Err(Error::EmptyBipartition)
        ));
    }

    #[test]
    fn support_of_identity_and_dyad() {
        let reg = SpaceRegistry::single("a", 3).unwrap();
        let third = Operator::identity(reg.clone()).scaled(c(1.0 / 3.0, 0.0));
        let (p, rank) = support_and_rank(&third, &cfg()).unwrap();
        assert_eq!(rank, 3);
        assert!(p.distance(&Operator::identity(reg)) < 1e-12);

        let d = bell("a", "b").dyad();
        let (p, rank) = support_and_rank(&d, &cfg()).unwrap();
        assert_eq!(rank, 1);
        assert!(p.distance(&d) < 1e-12);
    }

    #[test]
    fn support_rejects_non_positive() {
        let sz = sigma_z("a");
        assert!(matches!(
            support_and_rank(&sz, &cfg()),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn purify_maximally_mixed_and_pure() {
        let half = Operator::identity(qubit("a")).scaled(c(0.5, 0.0));
        let psi = purify(&half, "e", 2, &cfg()).unwrap();
        assert!(psi.is_normalized(&cfg()));
        let back = psi.dyad().partial_trace(&["a"]).unwrap();
        assert!(back.distance(&half) < 1e-12);
        let form = schmidt_decompose(&psi, &["a"], &cfg()).unwrap();
        assert_eq!(form.rank, 2);

        let pure = Ket::from_slice(qubit("a"), &[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let psi = purify(&pure.dyad(), "e", 1, &cfg()).unwrap();
        let expected = pure
            .tensor(&Ket::basis_state(SpaceRegistry::single("e", 1).unwrap(), &[0]).unwrap())
            .unwrap();
        // global phase fixed by the eigensolver convention
        let overlap = psi.inner(&expected).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purify_roundtrip_rank3() {
        let reg = SpaceRegistry::single("a", 4).unwrap();
        // fixed rank-3 density
        let v = kernels::fourier_unitary(4);
        let mut m = Array2::zeros((4, 4));
        let weights = [0.5, 0.3, 0.2, 0.0];
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += v[(i, k)] * v[(j, k)].conj() * weights[k];
                }
            }
        }
        let rho = Operator::new(reg, m).unwrap();
        assert!(matches!(
            purify(&rho, "e", 2, &cfg()),
            Err(Error::EnvironmentTooSmall { needed: 3, got: 2 })
        ));
        let psi = purify(&rho, "e", 3, &cfg()).unwrap();
        let back = psi.dyad().partial_trace(&["a"]).unwrap();
        assert!(back.distance(&rho) < 1e-9);
    }

    #[test]
    fn entropy_examples() {
        let pure = Ket::basis_state(qubit("a"), &[0]).unwrap().dyad();
        assert!(von_neumann_entropy(&pure, &cfg()).unwrap().abs() < 1e-12);

        let reg = SpaceRegistry::single("a", 4).unwrap();
        let mixed = Operator::identity(reg).scaled(c(0.25, 0.0));
        assert!((von_neumann_entropy(&mixed, &cfg()).unwrap() - 2.0).abs() < 1e-12);

        let diag = Operator::new(
            qubit("a"),
            Array2::from_diag(&Array1::from(vec![c(0.25, 0.0), c(0.75, 0.0)])),
        )
        .unwrap();
        // scalar oracle: -(1/4) log2 (1/4) - (3/4) log2 (3/4)
        assert!((von_neumann_entropy(&diag, &cfg()).unwrap() - 0.8112781244591328).abs() < 1e-12);

        let not_density = sigma_x("a");
        assert!(von_neumann_entropy(&not_density, &cfg()).is_err());
    }

    #[test]
    fn entropy_additivity() {
        let rho = Operator::new(
            qubit("a"),
            Array2::from_diag(&Array1::from(vec![c(0.25, 0.0), c(0.75, 0.0)])),
        )
        .unwrap();
        let sigma = Operator::new(
            qubit("b"),
            Array2::from_diag(&Array1::from(vec![c(0.1, 0.0), c(0.9, 0.0)])),
        )
        .unwrap();
        let joint = rho.tensor(&sigma).unwrap();
        let lhs = von_neumann_entropy(&joint, &cfg()).unwrap();
        let rhs = von_neumann_entropy(&rho, &cfg()).unwrap()
            + von_neumann_entropy(&sigma, &cfg()).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn mutually_unbiased_examples() {
        let z = Decomposition::computational("a", 2).unwrap();
        let x = Decomposition::fourier("a", 2).unwrap();
        assert!(is_mutually_unbiased(&z, &x, &cfg()).unwrap());
        assert!(!is_mutually_unbiased(&z, &z, &cfg()).unwrap());

        // basis tilted by 30 degrees on the Bloch sphere: overlap cos(15 deg)
        let t = 15f64.to_radians();
        let reg = qubit("a");
        let b0 = Ket::from_slice(reg.clone(), &[c(t.cos(), 0.0), c(t.sin(), 0.0)]).unwrap();
        let b1 = Ket::from_slice(reg.clone(), &[c(-t.sin(), 0.0), c(t.cos(), 0.0)]).unwrap();
        let tilted = Decomposition::from_basis(reg, vec![b0, b1], &cfg()).unwrap();
        assert!(!is_mutually_unbiased(&z, &tilted, &cfg()).unwrap());

        let z_b = Decomposition::computational("b", 2).unwrap();
        assert!(is_mutually_unbiased(&z, &z_b, &cfg()).is_err());
    }

    #[test]
    fn decomposition_validation() {
        let reg = qubit("a");
        let p0 = Ket::basis_state(reg.clone(), &[0]).unwrap().dyad();
        // missing the complement: does not sum to identity
        assert!(matches!(
            Decomposition::new(reg.clone(), vec![p0.clone()], &cfg()),
            Err(Error::NotDecomposition(_))
        ));
        let p1 = Ket::basis_state(reg.clone(), &[1]).unwrap().dyad();
        let dec = Decomposition::new(reg, vec![p0, p1], &cfg()).unwrap();
        assert!(dec.is_rank_one(&cfg()));
    }

    #[test]
    fn embed_acts_on_named_subsystem() {
        let reg = SpaceRegistry::new(vec![("a", 2), ("b", 2)]).unwrap();
        let embedded = sigma_z("b").embed(&reg).unwrap();
        let expected = Operator::identity(qubit("a"))
            .tensor(&sigma_z("b"))
            .unwrap();
        assert!(embedded.distance(&expected) < 1e-15);
    }

    #[test]
    fn permute_roundtrip() {
        let psi = bell("a", "b")
            .tensor(&Ket::basis_state(SpaceRegistry::single("c", 3).unwrap(), &[2]).unwrap())
            .unwrap();
        let p = psi.permuted(&["c", "a", "b"]).unwrap();
        assert_eq!(p.registry().labels().collect::<Vec<_>>(), vec!["c", "a", "b"]);
        let back = p.permuted(&["a", "b", "c"]).unwrap();
        assert!(back.distance(&psi) < 1e-15);
    }

    #[test]
    fn contract_extracts_components() {
        let psi = bell("a", "b");
        let zero_a = Ket::basis_state(qubit("a"), &[0]).unwrap();
        let reduced = psi.contract(&zero_a).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((reduced.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!(reduced.amplitudes()[1].norm() < 1e-15);
    }

    #[test]
    fn hs_inner_is_trace_inner_product() {
        let x = sigma_x("a");
        let z = sigma_z("a");
        assert!((hs_inner(&x, &x).unwrap().re - 2.0).abs() < 1e-15);
        assert!(hs_inner(&x, &z).unwrap().norm() < 1e-15);
    }
}
