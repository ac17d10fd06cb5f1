//! Statistical correlations and the location of information.
//!
//! A pre-probability (pure state, density operator, or channel) generates
//! joint probability distributions over pairs of decompositions. On top of
//! that sit the all-or-nothing deciders: whether the information carried by
//! one decomposition of a subsystem is perfectly present in another
//! subsystem, completely absent from it, or neither; whether *all*
//! information about a subsystem sits in a target; the hidden-product
//! factorization that absence forces on a pure tripartite state; detection
//! of classical-quantum structure in a dynamical operator; and an exact
//! bipartite trace identity used as a cross-check.
//!
//! For channels the entrance/exit correlations are generated by the
//! transition operator in place of a density operator; questions about the
//! environment address the channel ket directly as a pure state.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::channel::ChannelBundle;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::hilbert::{check_density, support_and_rank, Decomposition, Ket, Operator};
use crate::kernels::{self, c, eigh, svd};
use crate::space::SpaceRegistry;

/// A ket, density operator, or channel in its role as a generator of
/// probabilities.
#[derive(Debug, Clone)]
pub enum PreProbability {
    Pure(Ket),
    Density(Operator),
    Channel(ChannelBundle),
}

impl PreProbability {
    pub fn registry(&self) -> &SpaceRegistry {
        match self {
            PreProbability::Pure(k) => k.registry(),
            PreProbability::Density(r) => r.registry(),
            PreProbability::Channel(b) => b.ket().registry(),
        }
    }

    pub fn validate(&self, cfg: &Config) -> Result<()> {
        match self {
            PreProbability::Pure(k) => {
                if !k.is_normalized(cfg) {
                    return Err(Error::NotDensity((k.norm() - 1.0).abs()));
                }
                Ok(())
            }
            PreProbability::Density(r) => check_density(r, cfg),
            PreProbability::Channel(_) => Ok(()),
        }
    }

    /// The operator that stands in for the density operator on the union of
    /// the decomposition subsystems and the target subsystems. For channels
    /// this is the transition operator when the target is the exit, and the
    /// channel-ket dyad when the target includes environment subsystems.
    fn reduced_state(&self, a: &Decomposition, target: &[&str]) -> Result<Operator> {
        let mut keep: Vec<&str> = a.registry().labels().collect();
        for t in target {
            if keep.contains(t) {
                return Err(Error::LabelCollision(t.to_string()));
            }
            keep.push(t);
        }
        match self {
            PreProbability::Pure(k) => k.dyad().partial_trace(&keep),
            PreProbability::Density(r) => r.partial_trace(&keep),
            PreProbability::Channel(bundle) => {
                let a_labels: Vec<&str> = a.registry().labels().collect();
                if a_labels != [bundle.entrance_label()] {
                    return Err(Error::ChannelSubsystems);
                }
                if target == [bundle.exit_label()] {
                    Ok(bundle.transition().clone())
                } else if target.contains(&bundle.exit_label()) {
                    Err(Error::ChannelSubsystems)
                } else {
                    // environment subsystems: address the channel ket itself
                    bundle.ket().dyad().partial_trace(&keep)
                }
            }
        }
    }
}

/// Joint distribution of two decompositions on disjoint subsystems.
#[derive(Debug, Clone, Serialize)]
pub struct ProbTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub probabilities: Vec<Vec<f64>>,
    pub row_marginal: Vec<f64>,
    pub col_marginal: Vec<f64>,
}

impl ProbTable {
    pub fn prob(&self, j: usize, k: usize) -> f64 {
        self.probabilities[j][k]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().flatten().sum()
    }
}

/// Pr(A^j, B^k) over a pre-probability. For channels, A must sit on the
/// entrance and B on the exit; the transition operator generates the
/// distribution.
pub fn joint_distribution(
    pp: &PreProbability,
    a: &Decomposition,
    b: &Decomposition,
    cfg: &Config,
) -> Result<ProbTable> {
    pp.validate(cfg)?;
    let b_labels: Vec<&str> = b.registry().labels().collect();
    if let PreProbability::Channel(bundle) = pp {
        if b_labels != [bundle.exit_label()] {
            return Err(Error::ChannelSubsystems);
        }
    }
    let state = pp.reduced_state(a, &b_labels)?;
    let reg = state.registry().clone();

    let mut probabilities = vec![vec![0.0; b.len()]; a.len()];
    for (j, aj) in a.projectors().iter().enumerate() {
        let a_embedded = aj.embed(&reg)?;
        for (k, bk) in b.projectors().iter().enumerate() {
            let b_embedded = bk.embed(&reg)?;
            let joint = a_embedded.compose(&b_embedded)?;
            let p = crate::hilbert::hs_inner(&joint, &state)?.re;
            if p < -cfg.tol {
                return Err(Error::BadProbability(p));
            }
            probabilities[j][k] = p.max(0.0);
        }
    }
    let total: f64 = probabilities.iter().flatten().sum();
    if (total - 1.0).abs() > cfg.tol {
        return Err(Error::BadProbability(total));
    }
    let row_marginal: Vec<f64> = probabilities.iter().map(|r| r.iter().sum()).collect();
    let col_marginal: Vec<f64> = (0..b.len())
        .map(|k| probabilities.iter().map(|r| r[k]).sum())
        .collect();
    Ok(ProbTable {
        row_labels: a.registry().labels().map(str::to_string).collect(),
        col_labels: b.registry().labels().map(str::to_string).collect(),
        probabilities,
        row_marginal,
        col_marginal,
    })
}

/// Shannon mutual information of a joint table, in units set by
/// `cfg.log_base`.
pub fn mutual_information(table: &ProbTable, cfg: &Config) -> f64 {
    let mut info = 0.0;
    for (j, row) in table.probabilities.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            if p > 0.0 {
                let denom = table.row_marginal[j] * table.col_marginal[k];
                if denom > 0.0 {
                    info += p * cfg.log(p / denom);
                }
            }
        }
    }
    info.max(0.0)
}

/// Outcome of an information-location decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Present,
    Absent,
    Neither,
}

/// Evidence accompanying a verdict.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A decomposition of the target correlating perfectly with the input
    /// one, plus the conditional operators it was built from.
    Correlating {
        projectors: Vec<Operator>,
        lambdas: Vec<Operator>,
    },
    /// The uniform constants that each input projector compresses to on the
    /// support of the reduced state.
    Uniform { constants: Vec<f64> },
}

/// Verdict, the residual that drove it, and the witness backing it.
#[derive(Debug, Clone, Serialize)]
pub struct InfoVerdict {
    pub verdict: Verdict,
    pub residual: f64,
    pub witness: Option<Witness>,
}

impl InfoVerdict {
    fn neither(residual: f64) -> Self {
        InfoVerdict {
            verdict: Verdict::Neither,
            residual,
            witness: None,
        }
    }

    pub fn is_present(&self) -> bool {
        self.verdict == Verdict::Present
    }

    pub fn is_absent(&self) -> bool {
        self.verdict == Verdict::Absent
    }
}

fn conditional_operators(
    state: &Operator,
    a: &Decomposition,
    target: &[&str],
) -> Result<Vec<Operator>> {
    let reg = state.registry().clone();
    a.projectors()
        .iter()
        .map(|p| {
            let embedded = p.embed(&reg)?;
            embedded.compose(state)?.partial_trace(target)
        })
        .collect()
}

/// Decides whether the information carried by decomposition `a` is
/// perfectly present in the target subsystems: the conditional operators on
/// the target must be pairwise orthogonal. On success the witness holds the
/// correlating target decomposition built from their supports.
pub fn info_present(
    pp: &PreProbability,
    a: &Decomposition,
    target: &[&str],
    cfg: &Config,
) -> Result<InfoVerdict> {
    pp.validate(cfg)?;
    let state = pp.reduced_state(a, target)?;
    let lambdas = conditional_operators(&state, a, target)?;

    let mut residual: f64 = 0.0;
    for (l, left) in lambdas.iter().enumerate() {
        for right in lambdas.iter().skip(l + 1) {
            residual = residual.max(left.compose(right)?.frob_norm());
        }
    }
    if residual > cfg.tol {
        return Ok(InfoVerdict::neither(residual));
    }

    // witness: supports of the conditional operators, complement folded into
    // the first block
    let target_reg = lambdas[0].registry().clone();
    let mut projectors = Vec::with_capacity(lambdas.len());
    for lam in &lambdas {
        let (support, _) = support_and_rank(lam, cfg)?;
        projectors.push(support);
    }
    let mut sum = Operator::zeros(target_reg.clone());
    for p in &projectors {
        sum = sum.add(p)?;
    }
    let complement = Operator::identity(target_reg).sub(&sum)?;
    projectors[0] = projectors[0].add(&complement)?;
    let witness_dec = Decomposition::new(lambdas[0].registry().clone(), projectors, cfg)?;

    // the witness must reproduce the perfect correlation pattern
    let mut witness_residual: f64 = 0.0;
    for (l, lam) in lambdas.iter().enumerate() {
        let p_l = lam.trace().re;
        for (m, b) in witness_dec.projectors().iter().enumerate() {
            let joint = crate::hilbert::hs_inner(b, lam)?.re;
            let expected = if l == m { p_l } else { 0.0 };
            witness_residual = witness_residual.max((joint - expected).abs());
        }
    }
    if witness_residual > cfg.tol {
        return Ok(InfoVerdict::neither(witness_residual));
    }
    Ok(InfoVerdict {
        verdict: Verdict::Present,
        residual: residual.max(witness_residual),
        witness: Some(Witness::Correlating {
            projectors: witness_dec.projectors().to_vec(),
            lambdas,
        }),
    })
}

/// Decides whether the information carried by decomposition `a` is
/// completely absent from the target subsystems: every conditional state on
/// the target (for outcomes of nonzero probability) must equal the reduced
/// state. For a pure pre-probability spanning exactly the involved
/// subsystems, the support-compression criterion is cross-checked as well.
pub fn info_absent(
    pp: &PreProbability,
    a: &Decomposition,
    target: &[&str],
    cfg: &Config,
) -> Result<InfoVerdict> {
    pp.validate(cfg)?;
    let state = pp.reduced_state(a, target)?;
    let lambdas = conditional_operators(&state, a, target)?;
    let marginal = state.partial_trace(target)?;

    let mut residual: f64 = 0.0;
    let mut constants = Vec::with_capacity(lambdas.len());
    for lam in &lambdas {
        let p = lam.trace().re;
        constants.push(p);
        if p > cfg.tol {
            let conditional = lam.scaled(c(1.0 / p, 0.0));
            residual = residual.max(conditional.distance(&marginal));
        }
    }

    // cross-check on the support of the reduced input state, valid when the
    // pre-probability is pure on exactly these subsystems
    if let PreProbability::Pure(psi) = pp {
        let involved = a.registry().len() + target.len();
        if psi.registry().len() == involved {
            let a_labels: Vec<&str> = a.registry().labels().collect();
            let psi_a = psi.dyad().partial_trace(&a_labels)?;
            let (support, rank) = support_and_rank(&psi_a, cfg)?;
            for proj in a.projectors() {
                let compressed = support.compose(proj)?.compose(&support)?;
                let constant = crate::hilbert::hs_inner(&support, &compressed)?.re / rank as f64;
                let expected = support.scaled(c(constant, 0.0));
                residual = residual.max(compressed.distance(&expected));
            }
        }
    }

    if residual > cfg.tol {
        return Ok(InfoVerdict::neither(residual));
    }
    Ok(InfoVerdict {
        verdict: Verdict::Absent,
        residual,
        witness: Some(Witness::Uniform { constants }),
    })
}

/// Decides whether *all* information about the `a` subsystems is in the
/// target, for a pure state or channel: the `a` marginal must be maximally
/// mixed and `a` must be uncorrelated with everything outside the target.
/// Density operators need the two-decomposition route instead.
pub fn all_info_present(
    pp: &PreProbability,
    a_labels: &[&str],
    target: &[&str],
    cfg: &Config,
) -> Result<InfoVerdict> {
    pp.validate(cfg)?;
    let psi = match pp {
        PreProbability::Pure(k) => k.clone(),
        PreProbability::Channel(b) => b.ket().clone(),
        PreProbability::Density(_) => return Err(Error::NeedsDecompositions),
    };
    let rho_a = psi.dyad().partial_trace(a_labels)?;
    let d_a = rho_a.dim();
    let uniform = Operator::identity(rho_a.registry().clone()).scaled(c(1.0 / d_a as f64, 0.0));
    let mut residual = rho_a.distance(&uniform);

    let mut outside: Vec<&str> = Vec::new();
    for label in psi.registry().labels() {
        if !a_labels.contains(&label) && !target.contains(&label) {
            outside.push(label);
        }
    }
    if !outside.is_empty() {
        residual = residual.max(uncorrelated_residual(&psi.dyad(), a_labels, &outside)?);
    }
    if residual > cfg.tol {
        return Ok(InfoVerdict::neither(residual));
    }
    Ok(InfoVerdict {
        verdict: Verdict::Present,
        residual,
        witness: None,
    })
}

/// Two-decomposition route: two strongly incompatible decompositions both
/// present in the target force a maximally mixed marginal; for a pure state
/// that settles the full question, and for a density operator it is the
/// strongest conclusion available here.
pub fn all_info_present_via_pair(
    pp: &PreProbability,
    first: &Decomposition,
    second: &Decomposition,
    target: &[&str],
    cfg: &Config,
) -> Result<InfoVerdict> {
    if !strongly_incompatible(first, second, cfg)? {
        return Err(Error::NotStronglyIncompatible);
    }
    let v1 = info_present(pp, first, target, cfg)?;
    let v2 = info_present(pp, second, target, cfg)?;

    let a_labels: Vec<&str> = first.registry().labels().collect();
    let rho_a = match pp {
        PreProbability::Pure(k) => k.dyad().partial_trace(&a_labels)?,
        PreProbability::Density(r) => r.partial_trace(&a_labels)?,
        PreProbability::Channel(b) => b.ket().dyad().partial_trace(&a_labels)?,
    };
    let uniform = Operator::identity(rho_a.registry().clone())
        .scaled(c(1.0 / rho_a.dim() as f64, 0.0));
    let marginal_residual = rho_a.distance(&uniform);

    let residual = v1.residual.max(v2.residual).max(marginal_residual);
    if v1.is_present() && v2.is_present() && marginal_residual <= cfg.tol {
        Ok(InfoVerdict {
            verdict: Verdict::Present,
            residual,
            witness: None,
        })
    } else {
        Ok(InfoVerdict::neither(residual))
    }
}

pub(crate) fn uncorrelated_residual(
    rho: &Operator,
    a_labels: &[&str],
    c_labels: &[&str],
) -> Result<f64> {
    let mut keep: Vec<&str> = a_labels.to_vec();
    keep.extend_from_slice(c_labels);
    let joint = rho.partial_trace(&keep)?;
    let rho_a = joint.partial_trace(a_labels)?;
    let rho_c = joint.partial_trace(c_labels)?;
    let product = rho_a.tensor(&rho_c)?;
    let order: Vec<&str> = joint.registry().labels().collect();
    Ok(product.permuted(&order)?.distance(&joint))
}

/// Decides whether the `a` subsystems are completely uncorrelated with the
/// `c` subsystems: the joint reduced state must factor into its marginals.
pub fn all_info_absent(
    pp: &PreProbability,
    a_labels: &[&str],
    c_labels: &[&str],
    cfg: &Config,
) -> Result<InfoVerdict> {
    pp.validate(cfg)?;
    let rho = match pp {
        PreProbability::Pure(k) => k.dyad(),
        PreProbability::Density(r) => r.clone(),
        PreProbability::Channel(b) => b.ket().dyad(),
    };
    let residual = uncorrelated_residual(&rho, a_labels, c_labels)?;
    if residual > cfg.tol {
        return Ok(InfoVerdict::neither(residual));
    }
    Ok(InfoVerdict {
        verdict: Verdict::Absent,
        residual,
        witness: None,
    })
}

/// True when no projector other than 0 and the identity commutes with every
/// projector of both decompositions, decided through the dimension of the
/// joint commutant (the null space of the stacked commutator map).
pub fn strongly_incompatible(
    a: &Decomposition,
    b: &Decomposition,
    cfg: &Config,
) -> Result<bool> {
    if a.registry() != b.registry() {
        return Err(Error::RegistryMismatch);
    }
    let d = a.registry().total_dim();
    let rows = (a.len() + b.len()) * d * d;
    let mut stacked = Array2::zeros((rows, d * d));
    let mut row_block = 0;
    for p in a.projectors().iter().chain(b.projectors()) {
        // row-major vec: X P - P X  ->  (I (x) P^T - P (x) I) vec(X)
        let m = p.matrix();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    // (I (x) P^T)[ (i,j), (i,k) ] = P[j,k] transposed -> P[k,j]... direct:
                    // (X P)[i,j] = sum_k X[i,k] P[k,j]
                    stacked[(row_block + i * d + j, i * d + k)] += m[(k, j)];
                    // (P X)[i,j] = sum_k P[i,k] X[k,j]
                    stacked[(row_block + i * d + j, k * d + j)] -= m[(i, k)];
                }
            }
        }
        row_block += d * d;
    }
    let f = svd(&stacked);
    let threshold = cfg.rank_threshold(f.s.first().copied().unwrap_or(0.0));
    let rank = f.s.iter().filter(|&&s| s > threshold).count();
    let nullity = d * d - rank;
    Ok(nullity == 1)
}

/// The hidden-product factorization of a pure tripartite state whose `a`
/// and `c` groups are uncorrelated.
#[derive(Debug, Clone, Serialize)]
pub struct Factorization {
    /// Isometric embedding of the synthetic (d, e) product space into the
    /// middle subsystems.
    pub embedding: crate::channel::LinearMap,
    /// Entangled factor on (a-subsystems, d).
    pub chi: Ket,
    /// Entangled factor on (c-subsystems, e).
    pub psi: Ket,
    /// How far the embedded product falls from the input ket.
    pub reconstruction_residual: f64,
    /// Orthonormality defect of the extracted middle-space kets.
    pub orthonormality_residual: f64,
}

fn fresh_label(base: &str, registry: &SpaceRegistry) -> String {
    let mut candidate = base.to_string();
    while registry.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Factorizes a pure state on (a | b | c) whose `a` and `c` groups are
/// uncorrelated into `|chi> (x) |psi>` under an isometric embedding of a
/// synthetic product space into the `b` subsystems. Errors with the
/// correlation residual when the precondition fails.
pub fn hidden_product_factorize(
    input: &Ket,
    a_labels: &[&str],
    c_labels: &[&str],
    cfg: &Config,
) -> Result<Factorization> {
    if !input.is_normalized(cfg) {
        return Err(Error::NotDensity((input.norm() - 1.0).abs()));
    }
    let all: Vec<&str> = input.registry().labels().collect();
    let b_labels: Vec<&str> = all
        .iter()
        .copied()
        .filter(|l| !a_labels.contains(l) && !c_labels.contains(l))
        .collect();
    if a_labels.is_empty() || c_labels.is_empty() || b_labels.is_empty() {
        return Err(Error::EmptyBipartition);
    }
    let dyad = input.dyad();
    let correlation = uncorrelated_residual(&dyad, a_labels, c_labels)?;
    if correlation > cfg.tol {
        return Err(Error::NotUncorrelated(correlation));
    }

    let rho_a = dyad.partial_trace(a_labels)?;
    let rho_c = dyad.partial_trace(c_labels)?;
    let (pa, va) = eigh(rho_a.matrix());
    let (pc, vc) = eigh(rho_c.matrix());
    let keep_a = pa
        .iter()
        .filter(|&&p| p > cfg.rank_threshold(pa[0].max(0.0)))
        .count();
    let keep_c = pc
        .iter()
        .filter(|&&p| p > cfg.rank_threshold(pc[0].max(0.0)))
        .count();

    let a_reg = rho_a.registry().clone();
    let c_reg = rho_c.registry().clone();
    let a_kets: Vec<Ket> = (0..keep_a)
        .map(|j| Ket::new(a_reg.clone(), va.column(j).to_owned()))
        .collect::<Result<_>>()?;
    let c_kets: Vec<Ket> = (0..keep_c)
        .map(|k| Ket::new(c_reg.clone(), vc.column(k).to_owned()))
        .collect::<Result<_>>()?;

    // middle-space kets |b^{jk}> = <a^j c^k|psi> / sqrt(p_j q_k)
    let mut ac_labels: Vec<&str> = a_labels.to_vec();
    ac_labels.extend_from_slice(c_labels);
    let union_reg = input.registry().subregistry(&ac_labels)?;
    let union_order: Vec<&str> = union_reg.labels().collect();
    let mut middle: Vec<Ket> = Vec::with_capacity(keep_a * keep_c);
    for (j, aj) in a_kets.iter().enumerate() {
        for (k, ck) in c_kets.iter().enumerate() {
            let bra = aj.tensor(ck)?.permuted(&union_order)?;
            let beta = input.contract(&bra)?;
            let weight = (pa[j] * pc[k]).sqrt();
            middle.push(beta.scaled(c(1.0 / weight, 0.0)));
        }
    }
    let mut orthonormality_residual: f64 = 0.0;
    for (x, bx) in middle.iter().enumerate() {
        for (y, by) in middle.iter().enumerate() {
            let overlap = bx.inner(by)?;
            let expected = if x == y { c(1.0, 0.0) } else { c(0.0, 0.0) };
            orthonormality_residual = orthonormality_residual.max((overlap - expected).norm());
        }
    }

    let d_label = fresh_label("d", input.registry());
    let e_label = fresh_label("e", input.registry());
    let synth = SpaceRegistry::new(vec![(d_label.clone(), keep_a), (e_label.clone(), keep_c)])?;
    let b_reg = input.registry().subregistry(&b_labels)?;
    let mut embedding_matrix = Array2::zeros((b_reg.total_dim(), keep_a * keep_c));
    for (col, ket) in middle.iter().enumerate() {
        for (row, &amp) in ket.amplitudes().iter().enumerate() {
            embedding_matrix[(row, col)] = amp;
        }
    }
    let embedding = crate::channel::LinearMap::new(synth, b_reg, embedding_matrix)?;

    // chi on (a..., d), psi on (c..., e)
    let d_reg = SpaceRegistry::single(d_label, keep_a)?;
    let e_reg = SpaceRegistry::single(e_label, keep_c)?;
    let chi_reg = a_reg.join(&d_reg)?;
    let mut chi_amps = Array1::zeros(chi_reg.total_dim());
    for (j, aj) in a_kets.iter().enumerate() {
        let w = pa[j].max(0.0).sqrt();
        for (i, &amp) in aj.amplitudes().iter().enumerate() {
            chi_amps[i * keep_a + j] += amp * w;
        }
    }
    let chi = Ket::new(chi_reg, chi_amps)?;
    let psi_reg = c_reg.join(&e_reg)?;
    let mut psi_amps = Array1::zeros(psi_reg.total_dim());
    for (k, ck) in c_kets.iter().enumerate() {
        let w = pc[k].max(0.0).sqrt();
        for (i, &amp) in ck.amplitudes().iter().enumerate() {
            psi_amps[i * keep_c + k] += amp * w;
        }
    }
    let psi = Ket::new(psi_reg, psi_amps)?;

    // rebuild and compare in the original subsystem order
    let mut reconstruction: Option<Ket> = None;
    for (j, aj) in a_kets.iter().enumerate() {
        for (k, ck) in c_kets.iter().enumerate() {
            let weight = (pa[j] * pc[k]).sqrt();
            let term = aj
                .tensor(&middle[j * keep_c + k])?
                .tensor(ck)?
                .scaled(c(weight, 0.0));
            reconstruction = Some(match reconstruction {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
    }
    let rebuilt = reconstruction
        .expect("at least one Schmidt term")
        .permuted(&all)?;
    let reconstruction_residual = rebuilt.distance(input);

    Ok(Factorization {
        embedding,
        chi,
        psi,
        reconstruction_residual,
        orthonormality_residual,
    })
}

/// Result of probing a dynamical operator for classical-quantum structure.
#[derive(Debug, Clone, Serialize)]
pub struct CQReport {
    pub is_cq: bool,
    /// Worst pairwise commutator norm of the entrance-side coefficient
    /// family.
    pub commutation_residual: f64,
    /// Distance between the block re-assembly and the input, when the
    /// commutation test passed.
    pub reassembly_residual: Option<f64>,
    /// Entrance basis diagonalizing the structure.
    pub basis: Option<Vec<Ket>>,
    /// Per-basis-state output density operators.
    pub outputs: Option<Vec<Operator>>,
}

/// Decides whether a dynamical operator has classical-quantum form: some
/// entrance basis in which it is block diagonal with one output state per
/// basis vector. The entrance-side coefficients of an operator-basis
/// expansion commute exactly when such a basis exists; a common eigenbasis
/// then reassembles the operator.
pub fn cq_structure(r: &Operator, cfg: &Config) -> Result<CQReport> {
    if r.registry().len() != 2 {
        return Err(Error::ChannelKetShape);
    }
    check_density(r, cfg)?;
    let labels: Vec<&str> = r.registry().labels().collect();
    let (a_label, b_label) = (labels[0], labels[1]);
    let d_a = r.registry().dim_of(a_label)?;
    let d_b = r.registry().dim_of(b_label)?;
    let marginal = r.partial_trace(&[a_label])?;
    let uniform = Operator::identity(marginal.registry().clone()).scaled(c(1.0 / d_a as f64, 0.0));
    let marginal_residual = marginal.distance(&uniform);
    if marginal_residual > cfg.tol {
        return Err(Error::MalformedDynamical(marginal_residual));
    }

    // entrance-side coefficient family A_x = Tr_b[(I (x) s^x) R]
    let basis_b = crate::opbasis::basis_for_dim(d_b);
    let mut family = Vec::with_capacity(basis_b.len());
    for x in 0..basis_b.len() {
        let sigma = basis_b.operator(x, b_label)?;
        let embedded = sigma.embed(r.registry())?;
        family.push(embedded.compose(r)?.partial_trace(&[a_label])?);
    }
    let mut commutation_residual: f64 = 0.0;
    for (x, ax) in family.iter().enumerate() {
        for ay in family.iter().skip(x + 1) {
            let comm = ax.compose(ay)?.sub(&ay.compose(ax)?)?;
            commutation_residual = commutation_residual.max(comm.frob_norm());
        }
    }
    if commutation_residual > cfg.tol {
        return Ok(CQReport {
            is_cq: false,
            commutation_residual,
            reassembly_residual: None,
            basis: None,
            outputs: None,
        });
    }

    let matrices: Vec<&Array2<C64>> = family.iter().map(|op| op.matrix()).collect();
    let u = common_eigenbasis(&matrices);
    let a_reg = SpaceRegistry::single(a_label, d_a)?;
    let b_reg = SpaceRegistry::single(b_label, d_b)?;
    let basis: Vec<Ket> = (0..d_a)
        .map(|j| Ket::new(a_reg.clone(), u.column(j).to_owned()))
        .collect::<Result<_>>()?;

    // per-state outputs and reassembly
    let mut outputs = Vec::with_capacity(d_a);
    for ket in &basis {
        let mut block = Array2::zeros((d_b, d_b));
        for rb in 0..d_b {
            for cb in 0..d_b {
                let mut acc = c(0.0, 0.0);
                for ra in 0..d_a {
                    for ca in 0..d_a {
                        acc += ket.amplitudes()[ra].conj()
                            * r.matrix()[(ra * d_b + rb, ca * d_b + cb)]
                            * ket.amplitudes()[ca];
                    }
                }
                block[(rb, cb)] = acc * d_a as f64;
            }
        }
        outputs.push(Operator::new(b_reg.clone(), block)?);
    }
    let mut reassembled = Operator::zeros(r.registry().clone());
    for (ket, out) in basis.iter().zip(&outputs) {
        let term = ket.dyad().tensor(out)?.scaled(c(1.0 / d_a as f64, 0.0));
        reassembled = reassembled.add(&term.permuted(&labels)?)?;
    }
    let reassembly_residual = reassembled.distance(r);
    Ok(CQReport {
        is_cq: reassembly_residual <= cfg.tol,
        commutation_residual,
        reassembly_residual: Some(reassembly_residual),
        basis: Some(basis),
        outputs: Some(outputs),
    })
}

/// Common eigenbasis of a commuting Hermitian family, by recursive block
/// refinement: each operator splits every block along its eigenvalue
/// clusters.
fn common_eigenbasis(family: &[&Array2<C64>]) -> Array2<C64> {
    let d = family.first().map(|m| m.nrows()).unwrap_or(0);
    let mut blocks: Vec<Array2<C64>> = vec![kernels::identity(d)];
    for op in family {
        let mut refined = Vec::new();
        for block in &blocks {
            let m = block.ncols();
            if m == 1 {
                refined.push(block.clone());
                continue;
            }
            let compressed = kernels::dagger(block).dot(*op).dot(block);
            let (vals, vecs) = eigh(&compressed);
            let rotated = block.dot(&vecs);
            let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let cluster_tol = 1e-8 * (1.0 + scale);
            let mut start = 0;
            for i in 1..=m {
                if i == m || (vals[i - 1] - vals[i]) > cluster_tol {
                    let mut sub = Array2::zeros((d, i - start));
                    for (colsub, col) in (start..i).enumerate() {
                        for row in 0..d {
                            sub[(row, colsub)] = rotated[(row, col)];
                        }
                    }
                    refined.push(sub);
                    start = i;
                }
            }
        }
        blocks = refined;
    }
    let mut u = Array2::zeros((d, d));
    let mut col = 0;
    for block in blocks {
        for bcol in 0..block.ncols() {
            for row in 0..d {
                u[(row, col)] = block[(row, bcol)];
            }
            col += 1;
        }
    }
    u
}

/// The absolute difference between the two sides of the bipartite
/// four-ket trace identity
/// `Tr_a(D^{ef}_a D^{gh}_a) = Tr_b(D^{eh}_b D^{gf}_b)`,
/// where `D^{xy} = |x><y|` and the split is (first subsystem | rest).
/// Mathematically zero for any four kets on a common registry.
pub fn four_kets_residual(e: &Ket, f: &Ket, g: &Ket, h: &Ket) -> Result<f64> {
    let reg = e.registry();
    for other in [f, g, h] {
        if other.registry() != reg {
            return Err(Error::RegistryMismatch);
        }
    }
    if reg.len() < 2 {
        return Err(Error::EmptyBipartition);
    }
    let first: Vec<&str> = reg.labels().take(1).collect();
    let rest: Vec<String> = reg.complement(&first);
    let rest_refs: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();

    let ef_a = e.outer(f)?.partial_trace(&first)?;
    let gh_a = g.outer(h)?.partial_trace(&first)?;
    let lhs = ef_a.compose(&gh_a)?.trace();

    let eh_b = e.outer(h)?.partial_trace(&rest_refs)?;
    let gf_b = g.outer(f)?.partial_trace(&rest_refs)?;
    let rhs = eh_b.compose(&gf_b)?.trace();

    Ok((lhs - rhs).norm())
}
