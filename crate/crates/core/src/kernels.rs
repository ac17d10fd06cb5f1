//! Dense complex matrix kernels: Hermitian eigendecomposition and singular
//! value decomposition via Jacobi rotations, plus small shared helpers.
//!
//! Everything here targets desk-scale matrices (total dimension up to a few
//! thousand). Jacobi methods are used because they are simple, numerically
//! robust, and deterministic: the same input bytes always produce the same
//! output bytes, which the rest of the crate relies on for golden tests and
//! reproducible reports.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

const MAX_SWEEPS: usize = 64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::zeros((m.ncols(), m.nrows()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
    out
}

pub fn frob_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_dist(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn vec_dist(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, c(1.0, 0.0))
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Kronecker product of two matrices.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == c(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Plane rotation diagonalizing the Hermitian 2x2 block
/// `[[app, apq], [conj(apq), aqq]]`. Returns `(cos, sin, omega)` with real
/// `cos`, `sin` and `omega` the unit phase of `apq`; the unitary is
///
/// ```text
///   J = [[ cos,              sin            ],
///        [-sin * conj(omega), cos * conj(omega)]]
/// ```
///
/// so that `J^dag A J` has a zero off-diagonal. Caller guarantees `apq != 0`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64) {
    let g = apq.norm();
    let omega = apq / g;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau == 0.0 {
        1.0
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let cos = 1.0 / (1.0 + t * t).sqrt();
    (cos, t * cos, omega)
}

/// Applies the rotation to columns `p, q` of `m` (the update `M <- M J`).
fn rotate_columns(m: &mut Array2<C64>, p: usize, q: usize, cos: f64, sin: f64, omega: C64) {
    let sob = omega.conj() * sin;
    for i in 0..m.nrows() {
        let mip = m[(i, p)];
        let miq = m[(i, q)];
        m[(i, p)] = mip * cos - miq * sob;
        m[(i, q)] = mip * sin + miq * (omega.conj() * cos);
    }
}

/// Applies the rotation to rows `p, q` of `m` (the update `M <- J^dag M`).
fn rotate_rows(m: &mut Array2<C64>, p: usize, q: usize, cos: f64, sin: f64, omega: C64) {
    let so = omega * sin;
    for j in 0..m.ncols() {
        let mpj = m[(p, j)];
        let mqj = m[(q, j)];
        m[(p, j)] = mpj * cos - mqj * so;
        m[(q, j)] = mpj * sin + mqj * (omega * cos);
    }
}

fn off_diagonal_norm(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[(p, q)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Rotates each column's global phase so its largest-magnitude entry is real
/// and positive; `partner` columns receive the same phase so products like
/// `U S V^dag` are preserved.
fn fix_column_phases(m: &mut Array2<C64>, mut partner: Option<&mut Array2<C64>>) {
    for j in 0..m.ncols() {
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for i in 0..m.nrows() {
            let nrm = m[(i, j)].norm();
            if nrm > best_norm + 1e-15 {
                best_norm = nrm;
                best = i;
            }
        }
        if best_norm == 0.0 {
            continue;
        }
        let phase = m[(best, j)] / best_norm;
        let correction = phase.conj();
        for i in 0..m.nrows() {
            m[(i, j)] *= correction;
        }
        if let Some(v) = partner.as_deref_mut() {
            for i in 0..v.nrows() {
                v[(i, j)] *= correction;
            }
        }
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi sweeps.
///
/// Returns eigenvalues in descending order together with the matching
/// eigenvectors as columns of a unitary matrix. The input is symmetrized
/// first, so tiny Hermiticity defects from upstream arithmetic are harmless.
pub fn eigh(matrix: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eigh requires a square matrix");
    let mut a: Array2<C64> = (matrix + &dagger(matrix)).mapv(|z| z * 0.5);
    let mut v = identity(n);
    let scale = frob_norm(&a).max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let (cos, sin, omega) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                rotate_columns(&mut a, p, q, cos, sin, omega);
                rotate_rows(&mut a, p, q, cos, sin, omega);
                rotate_columns(&mut v, p, q, cos, sin, omega);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = a.diag().iter().map(|z| z.re).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());

    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &idx) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, idx)];
        }
    }
    fix_column_phases(&mut vectors, None);
    (sorted_vals, vectors)
}

/// Thin singular value decomposition `A = U diag(S) V^dag`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m x k` matrix with orthonormal columns, `k = min(m, n)`.
    pub u: Array2<C64>,
    /// Singular values in descending order.
    pub s: Vec<f64>,
    /// `n x k` matrix with orthonormal columns (right singular vectors).
    pub v: Array2<C64>,
}

/// One-sided Jacobi SVD.
///
/// Columns of the working copy are rotated until pairwise orthogonal; the
/// singular values are then the column norms. Columns belonging to zero
/// singular values are completed deterministically so `U` always has a full
/// set of `min(m, n)` orthonormal columns.
pub fn svd(matrix: &Array2<C64>) -> Svd {
    let (m, n) = matrix.dim();
    if m < n {
        let t = svd(&dagger(matrix));
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }

    let mut b = matrix.clone();
    let mut v = identity(n);
    let scale = frob_norm(&b).max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = c(0.0, 0.0);
                for i in 0..m {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    alpha += bip.norm_sqr();
                    beta += biq.norm_sqr();
                    gamma += bip.conj() * biq;
                }
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() + 1e-300 * scale {
                    continue;
                }
                let (cos, sin, omega) = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut b, p, q, cos, sin, omega);
                rotate_columns(&mut v, p, q, cos, sin, omega);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| b.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    norms = order.iter().map(|&i| norms[i]).collect();

    let mut u = Array2::zeros((m, n));
    let mut v_sorted = Array2::zeros((n, n));
    let floor = norms.first().copied().unwrap_or(0.0) * f64::EPSILON * (m.max(n) as f64);
    for (col, &idx) in order.iter().enumerate() {
        for row in 0..n {
            v_sorted[(row, col)] = v[(row, idx)];
        }
        if norms[col] > floor && norms[col] > 0.0 {
            for row in 0..m {
                u[(row, col)] = b[(row, idx)] / norms[col];
            }
        }
    }
    complete_zero_columns(&mut u, &norms, floor);
    fix_column_phases(&mut u, Some(&mut v_sorted));

    Svd {
        u,
        s: norms,
        v: v_sorted,
    }
}

/// Fills columns whose singular value is (numerically) zero with an
/// orthonormal completion drawn from the standard basis.
fn complete_zero_columns(u: &mut Array2<C64>, norms: &[f64], floor: f64) {
    let (m, n) = u.dim();
    let mut candidate = 0usize;
    for col in 0..n {
        if norms[col] > floor && norms[col] > 0.0 {
            continue;
        }
        loop {
            assert!(candidate < m, "ran out of completion candidates");
            let mut vec: Array1<C64> = Array1::zeros(m);
            vec[candidate] = c(1.0, 0.0);
            candidate += 1;
            // two Gram-Schmidt passes against the already-fixed columns
            for _ in 0..2 {
                for other in 0..n {
                    if other == col {
                        continue;
                    }
                    if norms[other] <= floor && other > col {
                        continue; // not yet filled
                    }
                    let overlap: C64 = (0..m).map(|i| u[(i, other)].conj() * vec[i]).sum();
                    for i in 0..m {
                        let uio = u[(i, other)];
                        vec[i] -= overlap * uio;
                    }
                }
            }
            let nrm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.5 {
                for i in 0..m {
                    u[(i, col)] = vec[i] / nrm;
                }
                break;
            }
        }
    }
}

/// Modified Gram-Schmidt orthonormalization of the columns (two passes).
/// Columns must be linearly independent.
pub(crate) fn orthonormal_columns(mut m: Array2<C64>) -> Array2<C64> {
    let (rows, cols) = m.dim();
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let overlap: C64 = (0..rows).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
                for i in 0..rows {
                    let mik = m[(i, k)];
                    m[(i, j)] -= overlap * mik;
                }
            }
        }
        let nrm = m.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(nrm > 1e-12, "columns are not linearly independent");
        for i in 0..rows {
            m[(i, j)] /= nrm;
        }
    }
    m
}

/// The discrete Fourier unitary `F[j,k] = exp(2 pi i j k / d) / sqrt(d)`,
/// whose columns form a basis mutually unbiased with the standard one.
pub fn fourier_unitary(d: usize) -> Array2<C64> {
    let mut f = Array2::zeros((d, d));
    let norm = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        for k in 0..d {
            let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
            f[(j, k)] = c(phase.cos(), phase.sin()) * norm;
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
        Array2::from_shape_fn((rows, cols), |_| {
            c(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        })
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
        let m = random_matrix(n, n, rng);
        (&m + &dagger(&m)).mapv(|z| z * 0.5)
    }

    #[test]
    fn eigh_diagonal_is_fixed_point() {
        let m = Array2::from_diag(&Array1::from(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let (vals, vecs) = eigh(&m);
        assert_eq!(vals, vec![3.0, 2.0, -1.0]);
        // columns are permuted standard basis vectors
        for jcol in 0..3 {
            let nonzero = (0..3).filter(|&i| vecs[(i, jcol)].norm() > 1e-12).count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn eigh_pauli_y() {
        let sy = ndarray::array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        let (vals, vecs) = eigh(&sy);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] + 1.0).abs() < 1e-12);
        let recon = vecs.dot(&Array2::from_diag(&Array1::from(
            vals.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
        )))
        .dot(&dagger(&vecs));
        assert!(frob_dist(&recon, &sy) < 1e-12);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 5, 8, 17] {
            let h = random_hermitian(n, &mut rng);
            let (vals, vecs) = eigh(&h);
            let diag = Array2::from_diag(&Array1::from(
                vals.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
            ));
            let recon = vecs.dot(&diag).dot(&dagger(&vecs));
            assert!(frob_dist(&recon, &h) < 1e-11 * (1.0 + frob_norm(&h)));
            assert!(frob_dist(&dagger(&vecs).dot(&vecs), &identity(n)) < 1e-12);
            for w in vals.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_reconstructs_random_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(m, n) in &[(1usize, 1usize), (4, 4), (6, 3), (3, 6), (8, 5), (2, 9)] {
            let a = random_matrix(m, n, &mut rng);
            let f = svd(&a);
            let k = m.min(n);
            assert_eq!(f.s.len(), k);
            let diag = Array2::from_diag(&Array1::from(
                f.s.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
            ));
            let recon = f.u.dot(&diag).dot(&dagger(&f.v));
            assert!(frob_dist(&recon, &a) < 1e-11 * (1.0 + frob_norm(&a)));
            assert!(frob_dist(&dagger(&f.u).dot(&f.u), &identity(k)) < 1e-12);
            assert!(frob_dist(&dagger(&f.v).dot(&f.v), &identity(k)) < 1e-12);
            for w in f.s.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_rank_deficient() {
        // rank-1 3x3 matrix
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_matrix(3, 1, &mut rng);
        let v = random_matrix(3, 1, &mut rng);
        let a = u.dot(&dagger(&v));
        let f = svd(&a);
        assert!(f.s[0] > 1e-3);
        assert!(f.s[1] < 1e-12 && f.s[2] < 1e-12);
        // U still orthonormal after completion
        assert!(frob_dist(&dagger(&f.u).dot(&f.u), &identity(3)) < 1e-12);
    }

    #[test]
    fn svd_zero_matrix() {
        let a = Array2::zeros((3, 2));
        let f = svd(&a);
        assert_eq!(f.s, vec![0.0, 0.0]);
        assert!(frob_dist(&dagger(&f.u).dot(&f.u), &identity(2)) < 1e-12);
    }

    #[test]
    fn fourier_is_unitary_and_unbiased() {
        for d in 2..=5 {
            let f = fourier_unitary(d);
            assert!(frob_dist(&dagger(&f).dot(&f), &identity(d)) < 1e-12);
            for j in 0..d {
                for k in 0..d {
                    assert!((f[(j, k)].norm() - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gram_schmidt_orthonormalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(6, 4, &mut rng);
        let q = orthonormal_columns(m);
        assert!(frob_dist(&dagger(&q).dot(&q), &identity(4)) < 1e-12);
    }
}
