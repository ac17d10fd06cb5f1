//! Seeded property suites behind the `verify` command and the acceptance
//! tests. Each check runs a batch of randomized instances, counting verdict
//! failures and tracking the worst residual among the instances that are
//! supposed to satisfy the property exactly.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{
    apply_channel, mixed_env_channel, standard_channel, LinearMap, Route, StandardChannel,
};
use crate::config::Config;
use crate::error::Result;
use crate::hilbert::{support_and_rank, von_neumann_entropy, Decomposition, Ket, Operator};
use crate::infoloc::{
    all_info_absent, all_info_present, all_info_present_via_pair, cq_structure,
    four_kets_residual, hidden_product_factorize, info_absent, info_present,
    uncorrelated_residual, Verdict,
};
use crate::kernels::{self, c};
use crate::opbasis::pauli_expand;
use crate::random::{random_density, random_ket, random_unitary};
use crate::space::SpaceRegistry;

/// Outcome of one batch of randomized instances.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    /// Worst residual over the instances expected to satisfy the property.
    pub worst: f64,
    pub threshold: f64,
}

impl SuiteCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Batch {
    name: &'static str,
    instances: usize,
    failures: usize,
    worst: f64,
    threshold: f64,
}

impl Batch {
    fn new(name: &'static str, threshold: f64) -> Self {
        Batch {
            name,
            instances: 0,
            failures: 0,
            worst: 0.0,
            threshold,
        }
    }

    /// Records a residual that must stay below the threshold.
    fn expect_small(&mut self, residual: f64) {
        self.instances += 1;
        self.worst = self.worst.max(residual);
        if !(residual <= self.threshold) {
            self.failures += 1;
        }
    }

    /// Records a residual that must stay clearly above the threshold
    /// (a negative instance).
    fn expect_large(&mut self, residual: f64) {
        self.instances += 1;
        if !(residual > 10.0 * self.threshold) {
            self.failures += 1;
        }
    }

    fn expect(&mut self, ok: bool) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self) -> SuiteCheck {
        SuiteCheck {
            name: self.name.to_string(),
            instances: self.instances,
            failures: self.failures,
            worst: self.worst,
            threshold: self.threshold,
        }
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn single(label: &str, dim: usize) -> SpaceRegistry {
    SpaceRegistry::single(label, dim).expect("valid registry")
}

fn random_probs<R: Rng>(count: usize, rng: &mut R) -> Vec<f64> {
    let mut weights: Vec<f64> = (0..count)
        .map(|_| -(rng.random::<f64>().max(1e-12)).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

/// `sum_j sqrt(p_j) |a^j> (x) |u_j>` with random orthonormal `u_j`: the
/// computational-basis information about `a` is in `b` by construction.
fn schmidt_correlated<R: Rng>(d_a: usize, d_b: usize, rng: &mut R) -> Ket {
    assert!(d_b >= d_a);
    let a_reg = single("a", d_a);
    let b_reg = single("b", d_b);
    let u = crate::random::random_isometry(d_b, d_a, rng);
    let probs = random_probs(d_a, rng);
    let mut psi: Option<Ket> = None;
    for (j, p) in probs.iter().enumerate() {
        let aj = Ket::basis_state(a_reg.clone(), &[j]).unwrap();
        let bj = Ket::new(b_reg.clone(), u.column(j).to_owned()).unwrap();
        let term = aj.tensor(&bj).unwrap().scaled(c(p.sqrt(), 0.0));
        psi = Some(match psi {
            None => term,
            Some(acc) => acc.add(&term).unwrap(),
        });
    }
    psi.unwrap()
}

/// Fully entangled pair on (`a_label`, `x_label`) with a random basis on the
/// second side.
fn maximally_entangled<R: Rng>(a_label: &str, x_label: &str, dim: usize, rng: &mut R) -> Ket {
    let a_reg = single(a_label, dim);
    let x_reg = single(x_label, dim);
    let u = random_unitary(dim, rng);
    let w = 1.0 / (dim as f64).sqrt();
    let mut psi: Option<Ket> = None;
    for j in 0..dim {
        let aj = Ket::basis_state(a_reg.clone(), &[j]).unwrap();
        let xj = Ket::new(x_reg.clone(), u.column(j).to_owned()).unwrap();
        let term = aj.tensor(&xj).unwrap().scaled(c(w, 0.0));
        psi = Some(match psi {
            None => term,
            Some(acc) => acc.add(&term).unwrap(),
        });
    }
    psi.unwrap()
}

/// Distance from block-diagonal form in the computational basis of the
/// first subsystem (pinching residual).
fn block_residual(rho: &Operator, basis: &Decomposition) -> Result<f64> {
    let reg = rho.registry().clone();
    let mut pinched = Operator::zeros(reg.clone());
    for p in basis.projectors() {
        let e = p.embed(&reg)?;
        pinched = pinched.add(&e.compose(rho)?.compose(&e)?)?;
    }
    Ok(pinched.distance(rho))
}

/// Pure tripartite state on (a | b | c) with no correlation between `a` and
/// `c`: an explicit product pair hidden behind a random isometric embedding
/// of the middle factors into `b`. Returns the state and whether the first
/// factor was fully entangled.
fn hidden_product_state<R: Rng>(
    d_a: usize,
    d_c: usize,
    d_b: usize,
    fully_entangled: bool,
    rng: &mut R,
) -> Ket {
    assert!(d_b >= d_a * d_c);
    let chi = if fully_entangled {
        maximally_entangled("a", "x", d_a, rng)
    } else {
        // random entangled pair, generically not maximally entangled
        random_ket(SpaceRegistry::new(vec![("a", d_a), ("x", d_a)]).unwrap(), rng)
    };
    let omega = random_ket(SpaceRegistry::new(vec![("y", d_c), ("c", d_c)]).unwrap(), rng);
    let product = chi.tensor(&omega).unwrap();
    let embed = LinearMap::new(
        SpaceRegistry::new(vec![("x", d_a), ("y", d_c)]).unwrap(),
        single("b", d_b),
        crate::random::random_isometry(d_b, d_a * d_c, rng),
    )
    .unwrap();
    embed.apply_to_subsystems(&product).unwrap()
}

/// The randomized executions of the all-or-nothing theorems.
pub fn theorem_suite(seed: u64, instances: usize, cfg: &Config) -> Result<Vec<SuiteCheck>> {
    let mut checks = Vec::new();
    let tol = cfg.tol;

    // absence of particular information: operational route against the
    // support-compression route, on states built to carry only block-level
    // correlations
    {
        let mut rng = rng_for(seed, 1);
        let mut batch = Batch::new("absence_support_criterion", tol);
        for i in 0..instances {
            let a_reg = single("a", 4);
            let c_reg = single("c", 2);
            let blocks = Decomposition::new(
                a_reg.clone(),
                vec![
                    Ket::basis_state(a_reg.clone(), &[0])
                        .unwrap()
                        .dyad()
                        .add(&Ket::basis_state(a_reg.clone(), &[1]).unwrap().dyad())
                        .unwrap(),
                    Ket::basis_state(a_reg.clone(), &[2])
                        .unwrap()
                        .dyad()
                        .add(&Ket::basis_state(a_reg.clone(), &[3]).unwrap().dyad())
                        .unwrap(),
                ],
                cfg,
            )?;
            if i % 2 == 0 {
                // within-block correlation only: the second block repeats
                // the first one's conditional kets up to a overall factor,
                // so block-level information never reaches c
                let gamma0 = [crate::random::random_complex(&mut rng), crate::random::random_complex(&mut rng)];
                let gamma1 = [crate::random::random_complex(&mut rng), crate::random::random_complex(&mut rng)];
                let mu = crate::random::random_complex(&mut rng);
                let mut amps = ndarray::Array1::zeros(8);
                for k in 0..2 {
                    amps[k] = gamma0[k];
                    amps[2 + k] = gamma1[k];
                    amps[4 + k] = mu * gamma0[k];
                    amps[6 + k] = mu * gamma1[k];
                }
                let psi = Ket::new(a_reg.join(&c_reg).unwrap(), amps)
                    .unwrap()
                    .normalized()
                    .unwrap();
                let verdict = info_absent(
                    &crate::infoloc::PreProbability::Pure(psi),
                    &blocks,
                    &["c"],
                    cfg,
                )?;
                batch.expect(verdict.is_absent());
                batch.expect_small(verdict.residual);
            } else {
                // straddling the blocks with correlation: not absent
                let psi = random_ket(a_reg.join(&c_reg).unwrap(), &mut rng);
                let verdict = info_absent(
                    &crate::infoloc::PreProbability::Pure(psi),
                    &blocks,
                    &["c"],
                    cfg,
                )?;
                batch.expect_large(verdict.residual);
            }
        }
        checks.push(batch.finish());
    }

    // complete absence of all information is exactly factorization
    {
        let mut rng = rng_for(seed, 2);
        let mut batch = Batch::new("uncorrelated_iff_product", tol);
        for i in 0..instances {
            if i % 2 == 0 {
                let rho_a = random_density(single("a", 2), 2, &mut rng);
                let rho_c = random_density(single("c", 3), 2, &mut rng);
                let product = rho_a.tensor(&rho_c)?;
                let verdict = all_info_absent(
                    &crate::infoloc::PreProbability::Density(product),
                    &["a"],
                    &["c"],
                    cfg,
                )?;
                batch.expect(verdict.is_absent());
                batch.expect_small(verdict.residual);
            } else {
                let joint = random_density(
                    SpaceRegistry::new(vec![("a", 2), ("c", 3)]).unwrap(),
                    2,
                    &mut rng,
                );
                let verdict = all_info_absent(
                    &crate::infoloc::PreProbability::Density(joint),
                    &["a"],
                    &["c"],
                    cfg,
                )?;
                batch.expect_large(verdict.residual);
            }
        }
        checks.push(batch.finish());
    }

    // presence via orthogonal conditional operators agrees with the
    // commutator criterion on pure states
    {
        let mut rng = rng_for(seed, 3);
        let mut batch = Batch::new("presence_commutator_equivalence", tol);
        for i in 0..instances {
            let d_a = 2 + (i % 2);
            let psi = if i % 2 == 0 {
                schmidt_correlated(d_a, 3, &mut rng)
            } else {
                random_ket(
                    SpaceRegistry::new(vec![("a", d_a), ("b", 3)]).unwrap(),
                    &mut rng,
                )
            };
            let basis = Decomposition::computational("a", d_a)?;
            let verdict = info_present(
                &crate::infoloc::PreProbability::Pure(psi.clone()),
                &basis,
                &["b"],
                cfg,
            )?;
            let rho_a = psi.dyad().partial_trace(&["a"])?;
            let mut commutator: f64 = 0.0;
            for p in basis.projectors() {
                let comm = p.compose(&rho_a)?.sub(&rho_a.compose(p)?)?;
                commutator = commutator.max(comm.frob_norm());
            }
            let by_commutator = commutator <= tol;
            batch.expect(verdict.is_present() == by_commutator);
            if i % 2 == 0 {
                batch.expect(verdict.is_present());
                batch.expect_small(verdict.residual.max(commutator));
            }
        }
        checks.push(batch.finish());
    }

    // all information sits in the partner exactly for a maximally mixed
    // marginal
    {
        let mut rng = rng_for(seed, 4);
        let mut batch = Batch::new("maximal_entanglement_all_info", tol);
        for i in 0..instances {
            let d = 2 + (i % 3);
            if i % 2 == 0 {
                let psi = maximally_entangled("a", "b", d, &mut rng);
                let verdict = all_info_present(
                    &crate::infoloc::PreProbability::Pure(psi),
                    &["a"],
                    &["b"],
                    cfg,
                )?;
                batch.expect(verdict.is_present());
                batch.expect_small(verdict.residual);
            } else {
                let psi = random_ket(SpaceRegistry::new(vec![("a", d), ("b", d)]).unwrap(), &mut rng);
                let verdict = all_info_present(
                    &crate::infoloc::PreProbability::Pure(psi),
                    &["a"],
                    &["b"],
                    cfg,
                )?;
                batch.expect_large(verdict.residual);
            }
        }
        checks.push(batch.finish());
    }

    // two strongly incompatible decompositions both present force the
    // maximally mixed marginal (and, pure, the full conclusion)
    {
        let mut rng = rng_for(seed, 5);
        let mut batch = Batch::new("strong_incompatibility_pair", tol);
        for i in 0..instances {
            let d = 2 + (i % 2);
            let z = Decomposition::computational("a", d)?;
            let x = Decomposition::fourier("a", d)?;
            if i % 2 == 0 {
                let psi = maximally_entangled("a", "b", d, &mut rng);
                let verdict = all_info_present_via_pair(
                    &crate::infoloc::PreProbability::Pure(psi),
                    &z,
                    &x,
                    &["b"],
                    cfg,
                )?;
                batch.expect(verdict.is_present());
                batch.expect_small(verdict.residual);
            } else {
                // classically correlated state: basis information present,
                // unbiased-basis information not
                let b_reg = single("b", d);
                let u = random_unitary(d, &mut rng);
                let mut rho = Operator::zeros(single("a", d).join(&b_reg).unwrap());
                for j in 0..d {
                    let aj = Ket::basis_state(single("a", d), &[j]).unwrap();
                    let bj = Ket::new(b_reg.clone(), u.column(j).to_owned()).unwrap();
                    let term = aj.dyad().tensor(&bj.dyad()).unwrap();
                    rho = rho.add(&term.scaled(c(1.0 / d as f64, 0.0))).unwrap();
                }
                let verdict = all_info_present_via_pair(
                    &crate::infoloc::PreProbability::Density(rho),
                    &z,
                    &x,
                    &["b"],
                    cfg,
                )?;
                batch.expect(verdict.verdict == Verdict::Neither);
            }
        }
        checks.push(batch.finish());
    }

    // hidden product: absence of a-c correlation factorizes the state
    {
        let mut rng = rng_for(seed, 6);
        let mut batch = Batch::new("hidden_product_factorization", tol);
        for i in 0..instances {
            let d_b = 4 + (i % 2); // embed a 4-dimensional product space into 4 or 5
            let psi = hidden_product_state(2, 2, d_b, false, &mut rng);
            let f = hidden_product_factorize(&psi, &["a"], &["c"], cfg)?;
            batch.expect_small(f.reconstruction_residual);
            batch.expect_small(f.orthonormality_residual);
            // the a-marginal of the recovered factor matches the input
            let chi_a = f.chi.dyad().partial_trace(&["a"])?;
            let psi_a = psi.dyad().partial_trace(&["a"])?;
            batch.expect_small(chi_a.distance(&psi_a));
        }
        checks.push(batch.finish());
    }

    // basis information in b holds exactly when the (a, c) marginal is
    // block diagonal in that basis
    {
        let mut rng = rng_for(seed, 7);
        let mut batch = Batch::new("block_diagonal_iff_present", tol);
        for i in 0..instances {
            let basis = Decomposition::computational("a", 2)?;
            if i % 2 == 0 {
                // correlated construction with orthonormal middle factors
                let u = random_unitary(3, &mut rng);
                let probs = random_probs(2, &mut rng);
                let mut psi: Option<Ket> = None;
                for j in 0..2 {
                    let aj = Ket::basis_state(single("a", 2), &[j]).unwrap();
                    let bj = Ket::new(single("b", 3), u.column(j).to_owned()).unwrap();
                    let cj = random_ket(single("c", 2), &mut rng);
                    let term = aj
                        .tensor(&bj)
                        .unwrap()
                        .tensor(&cj)
                        .unwrap()
                        .scaled(c(probs[j].sqrt(), 0.0));
                    psi = Some(match psi {
                        None => term,
                        Some(acc) => acc.add(&term).unwrap(),
                    });
                }
                let psi = psi.unwrap();
                let verdict = info_present(
                    &crate::infoloc::PreProbability::Pure(psi.clone()),
                    &basis,
                    &["b"],
                    cfg,
                )?;
                batch.expect(verdict.is_present());
                let rho_ac = psi.dyad().partial_trace(&["a", "c"])?;
                batch.expect_small(block_residual(&rho_ac, &basis)?);
            } else {
                let psi = random_ket(
                    SpaceRegistry::new(vec![("a", 2), ("b", 3), ("c", 2)]).unwrap(),
                    &mut rng,
                );
                let verdict = info_present(
                    &crate::infoloc::PreProbability::Pure(psi.clone()),
                    &basis,
                    &["b"],
                    cfg,
                )?;
                batch.expect(verdict.verdict == Verdict::Neither);
                let rho_ac = psi.dyad().partial_trace(&["a", "c"])?;
                batch.expect_large(block_residual(&rho_ac, &basis)?);
            }
        }
        checks.push(batch.finish());
    }

    // once basis information about a is in b, a mutually unbiased basis
    // carries none of it into c, and its outcomes are uniform
    {
        let mut rng = rng_for(seed, 8);
        let mut batch = Batch::new("unbiased_information_excluded", tol);
        for i in 0..instances {
            let d_a = 2 + (i % 2);
            let a_reg = single("a", d_a);
            let u = random_unitary(d_a, &mut rng);
            let basis = Decomposition::from_unitary_columns(a_reg.clone(), &u, cfg)?;
            let fourier = kernels::fourier_unitary(d_a);
            let unbiased =
                Decomposition::from_unitary_columns(a_reg.clone(), &u.dot(&fourier), cfg)?;

            // mixture of two states sharing the same correlated middle basis
            let shared = crate::random::random_isometry(d_a + 1, d_a, &mut rng);
            let mut rho = Operator::zeros(
                SpaceRegistry::new(vec![("a", d_a), ("b", d_a + 1), ("c", 2)]).unwrap(),
            );
            for _ in 0..2 {
                let probs = random_probs(d_a, &mut rng);
                let mut psi: Option<Ket> = None;
                for j in 0..d_a {
                    let aj = Ket::new(a_reg.clone(), u.column(j).to_owned()).unwrap();
                    let bj = Ket::new(single("b", d_a + 1), shared.column(j).to_owned()).unwrap();
                    let cj = random_ket(single("c", 2), &mut rng);
                    let term = aj
                        .tensor(&bj)
                        .unwrap()
                        .tensor(&cj)
                        .unwrap()
                        .scaled(c(probs[j].sqrt(), 0.0));
                    psi = Some(match psi {
                        None => term,
                        Some(acc) => acc.add(&term).unwrap(),
                    });
                }
                rho = rho.add(&psi.unwrap().dyad().scaled(c(0.5, 0.0))).unwrap();
            }
            let pp = crate::infoloc::PreProbability::Density(rho.clone());
            let premise = info_present(&pp, &basis, &["b"], cfg)?;
            batch.expect(premise.is_present());
            let verdict = info_absent(&pp, &unbiased, &["c"], cfg)?;
            batch.expect(verdict.is_absent());
            batch.expect_small(verdict.residual);
            // uniform outcome probabilities for the unbiased basis
            for p in unbiased.projectors() {
                let embedded = p.embed(rho.registry())?;
                let prob = crate::hilbert::hs_inner(&embedded, &rho)?.re;
                batch.expect_small((prob - 1.0 / d_a as f64).abs());
            }
        }
        checks.push(batch.finish());
    }

    // no splitting: all information in b leaves a and c uncorrelated
    {
        let mut rng = rng_for(seed, 9);
        let mut batch = Batch::new("no_splitting_marginal", tol);
        for i in 0..instances {
            let d = 2 + (i % 2);
            let pair = maximally_entangled("a", "b1", d, &mut rng);
            let rest = random_ket(
                SpaceRegistry::new(vec![("b2", 2), ("c", 2)]).unwrap(),
                &mut rng,
            );
            let psi = pair.tensor(&rest).unwrap();
            let pp = crate::infoloc::PreProbability::Pure(psi.clone());
            let premise = all_info_present(&pp, &["a"], &["b1", "b2"], cfg)?;
            batch.expect(premise.is_present());
            batch.expect_small(uncorrelated_residual(&psi.dyad(), &["a"], &["c"])?);
        }
        checks.push(batch.finish());
    }

    // recovery: all information in (b, c) and none in c means all of it is
    // already in b
    {
        let mut rng = rng_for(seed, 10);
        let mut batch = Batch::new("recovery_from_complement", tol);
        for i in 0..instances {
            let d_b = 4 + (i % 2);
            let psi = hidden_product_state(2, 2, d_b, true, &mut rng);
            let pp = crate::infoloc::PreProbability::Pure(psi);
            let all_in = all_info_present(&pp, &["a"], &["b", "c"], cfg)?;
            let none_in_c = all_info_absent(&pp, &["a"], &["c"], cfg)?;
            let in_b = all_info_present(&pp, &["a"], &["b"], cfg)?;
            batch.expect(all_in.is_present());
            batch.expect(none_in_c.is_absent());
            batch.expect(in_b.is_present());
            batch.expect_small(in_b.residual);
        }
        checks.push(batch.finish());
    }

    // entropy chain on four parts with a uncorrelated from c and d
    {
        let mut rng = rng_for(seed, 11);
        let mut batch = Batch::new("entropy_chain", tol);
        for _ in 0..instances {
            let chi = maximally_entangled("a", "b1", 2, &mut rng);
            let rest = random_ket(
                SpaceRegistry::new(vec![("b2", 2), ("c", 2), ("d", 2)]).unwrap(),
                &mut rng,
            );
            let psi = chi.tensor(&rest).unwrap();
            let dyad = psi.dyad();
            let s = |labels: &[&str]| -> Result<f64> {
                von_neumann_entropy(&dyad.partial_trace(labels)?, cfg)
            };
            let (sa, sb) = (s(&["a"])?, s(&["b1", "b2"])?);
            let (sc, sd) = (s(&["c"])?, s(&["d"])?);
            let (sac, sbd) = (s(&["a", "c"])?, s(&["b1", "b2", "d"])?);
            batch.expect_small((sa + sc - sac).abs());
            batch.expect_small((sac - sbd).abs());
            batch.expect(sbd <= sb + sd + tol);
            batch.expect(sa + sd <= sb + sc + tol);
            batch.expect(sa <= sb + tol);
        }
        checks.push(batch.finish());
    }

    // presence is symmetric: the witness decomposition correlates back
    {
        let mut rng = rng_for(seed, 12);
        let mut batch = Batch::new("presence_symmetry", tol);
        for _ in 0..instances {
            let psi = schmidt_correlated(2, 3, &mut rng);
            let basis = Decomposition::computational("a", 2)?;
            let pp = crate::infoloc::PreProbability::Pure(psi);
            let verdict = info_present(&pp, &basis, &["b"], cfg)?;
            batch.expect(verdict.is_present());
            if let Some(crate::infoloc::Witness::Correlating { projectors, .. }) =
                verdict.witness
            {
                let back = Decomposition::new(single("b", 3), projectors, cfg)?;
                let reverse = info_present(&pp, &back, &["a"], cfg)?;
                batch.expect(reverse.is_present());
                batch.expect_small(reverse.residual);
            } else {
                batch.expect(false);
            }
        }
        checks.push(batch.finish());
    }

    // monotonicity: presence extends to larger targets, absence restricts
    // to smaller ones
    {
        let mut rng = rng_for(seed, 13);
        let mut batch = Batch::new("monotonicity", tol);
        for i in 0..instances {
            if i % 2 == 0 {
                let u = random_unitary(2, &mut rng);
                let probs = random_probs(2, &mut rng);
                let mut psi: Option<Ket> = None;
                for j in 0..2 {
                    let aj = Ket::basis_state(single("a", 2), &[j]).unwrap();
                    let bj = Ket::new(single("b", 2), u.column(j).to_owned()).unwrap();
                    let cj = random_ket(single("c", 2), &mut rng);
                    let term = aj
                        .tensor(&bj)
                        .unwrap()
                        .tensor(&cj)
                        .unwrap()
                        .scaled(c(probs[j].sqrt(), 0.0));
                    psi = Some(match psi {
                        None => term,
                        Some(acc) => acc.add(&term).unwrap(),
                    });
                }
                let pp = crate::infoloc::PreProbability::Pure(psi.unwrap());
                let basis = Decomposition::computational("a", 2)?;
                let small = info_present(&pp, &basis, &["b"], cfg)?;
                let large = info_present(&pp, &basis, &["b", "c"], cfg)?;
                batch.expect(small.is_present());
                batch.expect(large.is_present());
            } else {
                let head = random_ket(single("a", 2), &mut rng);
                let tail = random_ket(
                    SpaceRegistry::new(vec![("b", 2), ("c", 2)]).unwrap(),
                    &mut rng,
                );
                let psi = head.tensor(&tail).unwrap();
                let pp = crate::infoloc::PreProbability::Pure(psi);
                let basis = crate::random::random_basis(single("a", 2), &mut rng, cfg)?;
                let joint = info_absent(&pp, &basis, &["b", "c"], cfg)?;
                batch.expect(joint.is_absent());
                batch.expect(info_absent(&pp, &basis, &["b"], cfg)?.is_absent());
                batch.expect(info_absent(&pp, &basis, &["c"], cfg)?.is_absent());
            }
        }
        checks.push(batch.finish());
    }

    Ok(checks)
}

/// The exact bipartite four-ket trace identity on random quadruples.
pub fn four_kets_suite(seed: u64, instances: usize, _cfg: &Config) -> Result<SuiteCheck> {
    let mut rng = rng_for(seed, 101);
    let mut batch = Batch::new("four_kets_identity", 1e-12);
    for i in 0..instances {
        let d_a = 2 + (i % 3);
        let d_b = 2 + (i % 4);
        let reg = SpaceRegistry::new(vec![("a", d_a), ("b", d_b)]).unwrap();
        let e = random_ket(reg.clone(), &mut rng);
        let f = random_ket(reg.clone(), &mut rng);
        let g = random_ket(reg.clone(), &mut rng);
        let h = random_ket(reg.clone(), &mut rng);
        batch.expect_small(four_kets_residual(&e, &f, &g, &h)?);
        batch.expect_small(four_kets_residual(&e, &e, &g, &g)?);
    }
    Ok(batch.finish())
}

/// Entrance and reference stay uncorrelated through a unitary on a
/// mixed-state environment.
pub fn mixed_env_suite(seed: u64, instances: usize, cfg: &Config) -> Result<SuiteCheck> {
    let mut rng = rng_for(seed, 102);
    let mut batch = Batch::new("mixed_environment_invariance", cfg.tol);
    for i in 0..instances {
        let d_d = 2 + (i % 2);
        let domain = SpaceRegistry::new(vec![("v", 2), ("e", 2)]).unwrap();
        let codomain = SpaceRegistry::new(vec![("b", 2), ("c", 2)]).unwrap();
        let t = LinearMap::new(domain, codomain, random_unitary(4, &mut rng))?;
        let chi = random_ket(SpaceRegistry::new(vec![("e", 2), ("d", d_d)]).unwrap(), &mut rng);
        let psi = mixed_env_channel(&t, &chi, "a", cfg)?;
        batch.expect_small(uncorrelated_residual(&psi.dyad(), &["a"], &["d"])?);
        // the entrance marginal stays maximally mixed
        let rho_a = psi.dyad().partial_trace(&["a"])?;
        let uniform = Operator::identity(single("a", 2)).scaled(c(0.5, 0.0));
        batch.expect_small(rho_a.distance(&uniform));
    }
    Ok(batch.finish())
}

/// The three superoperator routes agree on random channels and inputs.
pub fn route_agreement_suite(seed: u64, instances: usize, cfg: &Config) -> Result<SuiteCheck> {
    let mut rng = rng_for(seed, 103);
    let mut batch = Batch::new("route_agreement", cfg.tol);
    for i in 0..instances {
        let d_a = 2 + (i % 2);
        let d_b = 2 + ((i / 2) % 2);
        let d_f = 1 + (i % 4);
        if d_a > d_b * d_f {
            continue;
        }
        let bundle = crate::random::random_channel(d_a, d_b, d_f, &mut rng, cfg)?;
        let input = random_density(single("a", d_a), d_a, &mut rng);
        let via_iso = apply_channel(&bundle, &input, Route::Isometry)?;
        let via_kraus = apply_channel(&bundle, &input, Route::Kraus)?;
        let via_q = apply_channel(&bundle, &input, Route::Transition)?;
        batch.expect_small(via_iso.distance(&via_kraus));
        batch.expect_small(via_iso.distance(&via_q));
        // trace preserved, positivity preserved
        batch.expect_small((via_kraus.trace().re - 1.0).abs());
        batch.expect(via_kraus.min_eigenvalue() >= -cfg.tol);
    }
    Ok(batch.finish())
}

/// Marginal law, Kraus completeness and orthogonality, and the rank match
/// on random isometry-generated channels.
pub fn isometry_law_suite(seed: u64, instances: usize, cfg: &Config) -> Result<SuiteCheck> {
    let mut rng = rng_for(seed, 104);
    let mut batch = Batch::new("isometry_law", cfg.tol);
    for i in 0..instances {
        let d_a = 2 + (i % 3);
        let d_b = 2 + ((i / 3) % 3);
        let d_f = 1 + (i % 4);
        if d_a > d_b * d_f {
            continue;
        }
        let bundle = crate::random::random_channel(d_a, d_b, d_f, &mut rng, cfg)?;
        let r = bundle.dynamical();
        let ra = r.partial_trace(&["a"])?;
        let uniform = Operator::identity(single("a", d_a)).scaled(c(1.0 / d_a as f64, 0.0));
        batch.expect_small(ra.distance(&uniform));

        let mut completeness: Array2<C64> = Array2::zeros((d_a, d_a));
        for k in bundle.kraus() {
            completeness = completeness + kernels::dagger(k.matrix()).dot(k.matrix());
        }
        batch.expect_small(kernels::frob_dist(&completeness, &kernels::identity(d_a)));

        let mut cross: f64 = 0.0;
        for (l, kl) in bundle.kraus().iter().enumerate() {
            for km in bundle.kraus().iter().skip(l + 1) {
                cross = cross
                    .max(kernels::trace(&kernels::dagger(kl.matrix()).dot(km.matrix())).norm());
            }
        }
        batch.expect_small(cross);

        let (_, rank) = support_and_rank(r, cfg)?;
        batch.expect(bundle.kraus_rank() == rank);

        // the sum of unnormalized Kraus-ket dyads reproduces the dynamical
        // operator
        let basis = Decomposition::computational("a", d_a)?;
        let mut direct = Operator::zeros(r.registry().clone());
        for k in bundle.kraus() {
            let kraus_ket = crate::channel::ket_from_map(k, &basis, cfg)?
                .scaled(c(1.0 / (d_a as f64).sqrt(), 0.0));
            direct = direct.add(&kraus_ket.dyad())?;
        }
        batch.expect_small(direct.distance(r));
    }
    Ok(batch.finish())
}

/// Random block-form dynamical operators are detected and reassembled;
/// genuinely quantum ones are rejected.
pub fn cq_detection_suite(seed: u64, instances: usize, cfg: &Config) -> Result<SuiteCheck> {
    let mut rng = rng_for(seed, 105);
    let mut batch = Batch::new("cq_detection", cfg.tol);
    for i in 0..instances {
        let d_a = 2 + (i % 2);
        let d_b = 2 + ((i / 2) % 2);
        let a_reg = single("a", d_a);
        let u = random_unitary(d_a, &mut rng);
        let mut r = Operator::zeros(SpaceRegistry::new(vec![("a", d_a), ("b", d_b)]).unwrap());
        for j in 0..d_a {
            let aj = Ket::new(a_reg.clone(), u.column(j).to_owned()).unwrap();
            let out = random_density(single("b", d_b), 1 + (j % d_b), &mut rng);
            r = r
                .add(&aj.dyad().tensor(&out)?.scaled(c(1.0 / d_a as f64, 0.0)))
                .unwrap();
        }
        let report = cq_structure(&r, cfg)?;
        batch.expect(report.is_cq);
        if let Some(residual) = report.reassembly_residual {
            batch.expect_small(residual);
        }
    }
    // fixed rejections and acceptances
    let bell_r = standard_channel(StandardChannel::BitFlip, 0.0, cfg)?;
    batch.expect(!cq_structure(bell_r.dynamical(), cfg)?.is_cq);
    let depol_half = standard_channel(StandardChannel::Depolarizing, 0.5, cfg)?;
    batch.expect(cq_structure(depol_half.dynamical(), cfg)?.is_cq);
    Ok(batch.finish())
}

/// No channel shows the two-positive-one-negative correlation pattern that
/// entangled states produce, while the all-positive pattern is reached at
/// zero error probability.
pub fn correlation_signature_suite(
    seed: u64,
    instances: usize,
    cfg: &Config,
) -> Result<SuiteCheck> {
    let mut rng = rng_for(seed, 106);
    let mut batch = Batch::new("correlation_signature", cfg.tol);

    let pattern_distance = |bundle: &crate::channel::ChannelBundle| -> Result<f64> {
        let t = pauli_expand(bundle.transition(), cfg)?;
        let c11 = t.value(&[1, 1]);
        let c22 = t.value(&[2, 2]);
        let c33 = t.value(&[3, 3]);
        Ok((c11 - 1.0)
            .abs()
            .max((c22 + 1.0).abs())
            .max((c33 - 1.0).abs()))
    };

    // the all-positive perfect pattern is achievable
    for kind in [
        StandardChannel::BitFlip,
        StandardChannel::AmplitudeDamping,
        StandardChannel::Depolarizing,
    ] {
        let perfect = standard_channel(kind, 0.0, cfg)?;
        let t = pauli_expand(perfect.transition(), cfg)?;
        for k in 1..4 {
            batch.expect_small((t.value(&[k, k]) - 1.0).abs());
        }
        // sweep the parameter range: the flipped pattern never appears
        let max_p = match kind {
            StandardChannel::Depolarizing => 2.0 / 3.0,
            _ => 1.0,
        };
        for step in 0..=10 {
            let p = max_p * step as f64 / 10.0;
            let bundle = standard_channel(kind, p, cfg)?;
            batch.expect_large(pattern_distance(&bundle)?);
        }
    }
    for _ in 0..instances {
        let bundle = crate::random::random_channel(2, 2, 4, &mut rng, cfg)?;
        batch.expect_large(pattern_distance(&bundle)?);
    }
    Ok(batch.finish())
}

/// Every suite, concatenated; used by `verify all` and the acceptance gate.
pub fn all_suites(seed: u64, instances: usize, cfg: &Config) -> Result<Vec<SuiteCheck>> {
    let mut checks = theorem_suite(seed, instances, cfg)?;
    checks.push(four_kets_suite(seed, instances, cfg)?);
    checks.push(mixed_env_suite(seed, instances, cfg)?);
    checks.push(route_agreement_suite(seed, instances, cfg)?);
    checks.push(isometry_law_suite(seed, instances, cfg)?);
    checks.push(cq_detection_suite(seed, instances, cfg)?);
    checks.push(correlation_signature_suite(seed, instances, cfg)?);
    Ok(checks)
}
