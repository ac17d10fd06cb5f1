//! Seeded random generators for states, operators, bases, and channels.
//!
//! Used by the property suites and the `verify` command; all outputs are
//! deterministic functions of the supplied RNG state.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{ChannelBundle, LinearMap};
use crate::config::Config;
use crate::error::Result;
use crate::hilbert::{Decomposition, Ket, Operator};
use crate::kernels::{self, c};
use crate::space::SpaceRegistry;

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_fn((rows, cols), |_| random_complex(rng))
}

/// Haar-random normalized ket.
pub fn random_ket<R: Rng>(registry: SpaceRegistry, rng: &mut R) -> Ket {
    let d = registry.total_dim();
    let mut amplitudes: Array1<C64> = Array1::from_shape_fn(d, |_| random_complex(rng));
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amplitudes.mapv_inplace(|z| z / norm);
    Ket::new(registry, amplitudes).expect("dimensions agree by construction")
}

/// Haar-distributed unitary (Gram-Schmidt of a Gaussian matrix).
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> Array2<C64> {
    kernels::orthonormal_columns(random_matrix(dim, dim, rng))
}

/// Haar-distributed isometry as `cols` orthonormal columns in `rows`
/// dimensions. Requires `cols <= rows`.
pub fn random_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<C64> {
    assert!(cols <= rows, "an isometry cannot shrink the space");
    kernels::orthonormal_columns(random_matrix(rows, cols, rng))
}

/// Random density operator of the given rank, with Gaussian eigenvectors and
/// a flat random spectrum.
pub fn random_density<R: Rng>(registry: SpaceRegistry, rank: usize, rng: &mut R) -> Operator {
    let d = registry.total_dim();
    let rank = rank.clamp(1, d);
    let vectors = random_isometry(d, rank, rng);
    let mut weights: Vec<f64> = (0..rank).map(|_| -(rng.random::<f64>().max(1e-12)).ln()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = Array2::zeros((d, d));
    for (k, w) in weights.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += vectors[(i, k)] * vectors[(j, k)].conj() * *w;
            }
        }
    }
    Operator::new(registry, m).expect("square by construction")
}

/// Random orthonormal-basis decomposition of a subsystem.
pub fn random_basis<R: Rng>(
    registry: SpaceRegistry,
    rng: &mut R,
    cfg: &Config,
) -> Result<Decomposition> {
    let u = random_unitary(registry.total_dim(), rng);
    Decomposition::from_unitary_columns(registry, &u, cfg)
}

/// Random coarse decomposition with the given block sizes (projector ranks).
pub fn random_block_decomposition<R: Rng>(
    registry: SpaceRegistry,
    blocks: &[usize],
    rng: &mut R,
    cfg: &Config,
) -> Result<Decomposition> {
    let d = registry.total_dim();
    assert_eq!(blocks.iter().sum::<usize>(), d, "blocks must partition the space");
    let u = random_unitary(d, rng);
    let mut projectors = Vec::with_capacity(blocks.len());
    let mut start = 0;
    for &size in blocks {
        let mut p = Array2::zeros((d, d));
        for k in start..start + size {
            for i in 0..d {
                for j in 0..d {
                    p[(i, j)] += u[(i, k)] * u[(j, k)].conj();
                }
            }
        }
        projectors.push(Operator::new(registry.clone(), p)?);
        start += size;
    }
    Decomposition::new(registry, projectors, cfg)
}

/// Random channel with the given entrance, exit, and environment dimensions,
/// generated from a Haar-random isometry on labels (a, b, f).
pub fn random_channel<R: Rng>(
    d_a: usize,
    d_b: usize,
    d_f: usize,
    rng: &mut R,
    cfg: &Config,
) -> Result<ChannelBundle> {
    assert!(d_a <= d_b * d_f, "no isometry fits these dimensions");
    let domain = SpaceRegistry::single("a", d_a)?;
    let codomain = SpaceRegistry::new(vec![("b", d_b), ("f", d_f)])?;
    let v = LinearMap::new(domain, codomain, random_isometry(d_b * d_f, d_a, rng))?;
    ChannelBundle::from_isometry(v, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_seed_deterministic() {
        let reg = SpaceRegistry::new(vec![("a", 2), ("b", 3)]).unwrap();
        let a = random_ket(reg.clone(), &mut ChaCha8Rng::seed_from_u64(42));
        let b = random_ket(reg, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(5, &mut rng);
        let gram = kernels::dagger(&u).dot(&u);
        assert!(kernels::frob_dist(&gram, &kernels::identity(5)) < 1e-12);
    }

    #[test]
    fn random_density_is_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reg = SpaceRegistry::single("a", 4).unwrap();
        let rho = random_density(reg, 3, &mut rng);
        let cfg = Config::default();
        assert!(rho.is_positive(&cfg));
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let (_, rank) = crate::hilbert::support_and_rank(&rho, &cfg).unwrap();
        assert_eq!(rank, 3);
    }

    #[test]
    fn random_channel_satisfies_marginal_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = Config::default();
        let bundle = random_channel(3, 2, 4, &mut rng, &cfg).unwrap();
        let ra = bundle.dynamical().partial_trace(&["a"]).unwrap();
        let uniform = Operator::identity(ra.registry().clone()).scaled(c(1.0 / 3.0, 0.0));
        assert!(ra.distance(&uniform) < 1e-12);
        assert_eq!(bundle.kraus_rank(), 4.min(bundle.dynamical().dim()));
    }

    #[test]
    fn block_decomposition_has_requested_ranks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = Config::default();
        let reg = SpaceRegistry::single("a", 4).unwrap();
        let dec = random_block_decomposition(reg, &[1, 3], &mut rng, &cfg).unwrap();
        assert_eq!(dec.len(), 2);
        assert!((dec.projector(0).trace().re - 1.0).abs() < 1e-10);
        assert!((dec.projector(1).trace().re - 3.0).abs() < 1e-10);
    }
}
