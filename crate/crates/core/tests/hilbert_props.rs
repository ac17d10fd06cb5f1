//! Property tests for the multipartite linear-algebra layer.

use chanket::hilbert::{schmidt_decompose, von_neumann_entropy};
use chanket::kernels::c;
use chanket::random::{random_density, random_ket, random_matrix};
use chanket::{Config, Operator, SpaceRegistry};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> Config {
    Config::default()
}

fn registry_abc(da: usize, db: usize, dc: usize) -> SpaceRegistry {
    SpaceRegistry::new(vec![("a", da), ("b", db), ("c", dc)]).unwrap()
}

fn random_hermitian(reg: SpaceRegistry, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = reg.total_dim();
    let m = random_matrix(d, d, &mut rng);
    let herm = (&m + &chanket::kernels::dagger(&m)).mapv(|z| z * 0.5);
    Operator::new(reg, herm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_composes(seed in any::<u64>(), da in 1usize..3, db in 1usize..3, dc in 1usize..4) {
        let op = random_hermitian(registry_abc(da, db, dc), seed);
        let staged = op.partial_trace(&["a", "b"]).unwrap().partial_trace(&["a"]).unwrap();
        let direct = op.partial_trace(&["a"]).unwrap();
        prop_assert!(staged.distance(&direct) < 1e-9);
        // full trace is preserved along the way
        prop_assert!((staged.trace() - op.trace()).norm() < 1e-9);
    }

    #[test]
    fn partial_transpose_is_involutive(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let reg = SpaceRegistry::new(vec![("a", da), ("b", db)]).unwrap();
        let op = random_hermitian(reg, seed);
        let twice = op.partial_transpose("a").unwrap().partial_transpose("a").unwrap();
        prop_assert!(twice.distance(&op) < 1e-12);
        // Hermiticity and trace preserved by one application
        let once = op.partial_transpose("a").unwrap();
        prop_assert!(once.hermitian_defect() < 1e-12);
        prop_assert!((once.trace() - op.trace()).norm() < 1e-12);
    }

    #[test]
    fn schmidt_reassembles(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, dc in 1usize..3, left_b in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_ket(registry_abc(da, db, dc), &mut rng);
        let left: Vec<&str> = if left_b { vec!["a", "b"] } else { vec!["a"] };
        let form = schmidt_decompose(&psi, &left, &cfg()).unwrap();
        prop_assert!(form.reassemble().unwrap().distance(&psi) < 1e-9);
        let total: f64 = form.coefficients.iter().map(|s| s * s).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entropy_is_additive(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(SpaceRegistry::single("a", da).unwrap(), da, &mut rng);
        let sigma = random_density(SpaceRegistry::single("b", db).unwrap(), db, &mut rng);
        let joint = rho.tensor(&sigma).unwrap();
        let lhs = von_neumann_entropy(&joint, &cfg()).unwrap();
        let rhs = von_neumann_entropy(&rho, &cfg()).unwrap()
            + von_neumann_entropy(&sigma, &cfg()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn purification_roundtrips(seed in any::<u64>(), d in 2usize..5, rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = rank.min(d);
        let rho = random_density(SpaceRegistry::single("a", d).unwrap(), rank, &mut rng);
        let psi = chanket::hilbert::purify(&rho, "env", rank, &cfg()).unwrap();
        let back = psi.dyad().partial_trace(&["a"]).unwrap();
        prop_assert!(back.distance(&rho) < 1e-9);
    }

    #[test]
    fn support_projects_onto_itself(seed in any::<u64>(), d in 2usize..5, rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rank = rank.min(d);
        let rho = random_density(SpaceRegistry::single("a", d).unwrap(), rank, &mut rng);
        let (p, r) = chanket::hilbert::support_and_rank(&rho, &cfg()).unwrap();
        prop_assert_eq!(r, rank);
        let compressed = p.compose(&rho).unwrap().compose(&p).unwrap();
        prop_assert!(compressed.distance(&rho) < 1e-9);
        prop_assert!(p.projector_defect() < 1e-9);
    }
}

#[test]
fn embedding_respects_registry_order() {
    let reg = SpaceRegistry::new(vec![("a", 2), ("b", 2), ("c", 2)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let on_ac = random_density(
        SpaceRegistry::new(vec![("a", 2), ("c", 2)]).unwrap(),
        2,
        &mut rng,
    );
    let embedded = on_ac.embed(&reg).unwrap();
    assert!((embedded.trace().re - 2.0).abs() < 1e-12);
    // reducing back recovers the original operator
    let back = embedded.partial_trace(&["a", "c"]).unwrap();
    assert!(back.distance(&on_ac.scaled(c(2.0, 0.0))) < 1e-12);

    // a misordered sub-registry is rejected
    let on_ca = SpaceRegistry::new(vec![("c", 2), ("a", 2)]).unwrap();
    let bad = Operator::identity(on_ca);
    assert!(bad.embed(&reg).is_err());
}

#[test]
fn maximally_entangled_marginal_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let bundle = chanket::random::random_channel(3, 2, 4, &mut rng, &cfg()).unwrap();
        let marginal = bundle.ket().dyad().partial_trace(&["a"]).unwrap();
        let uniform = Operator::identity(SpaceRegistry::single("a", 3).unwrap())
            .scaled(c(1.0 / 3.0, 0.0));
        assert!(marginal.distance(&uniform) < 1e-9);
    }
}

#[test]
fn contract_agrees_with_inner_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let reg = SpaceRegistry::new(vec![("a", 2), ("b", 3)]).unwrap();
    let psi = random_ket(reg.clone(), &mut rng);
    let probe = random_ket(reg, &mut rng);
    // contracting against a full-registry bra leaves a scalar ket
    let scalar = psi.contract(&probe).unwrap();
    assert_eq!(scalar.dim(), 1);
    let direct = probe.inner(&psi).unwrap();
    assert!((scalar.amplitudes()[0] - direct).norm() < 1e-12);
}

#[test]
fn basis_kets_recovered_from_projectors() {
    let dec = chanket::Decomposition::fourier("a", 3).unwrap();
    let projs = dec.projectors().to_vec();
    let rebuilt = chanket::Decomposition::new(
        SpaceRegistry::single("a", 3).unwrap(),
        projs,
        &cfg(),
    )
    .unwrap();
    let kets = rebuilt.basis_kets(&cfg()).unwrap();
    for (k, p) in kets.iter().zip(rebuilt.projectors()) {
        assert!(k.dyad().distance(p) < 1e-12);
    }
}
