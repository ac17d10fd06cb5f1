//! Quantum error-correcting-code auditing.
//!
//! A code is a subspace of an n-carrier space, held as an orthonormal list
//! of codewords. The audit machinery computes the code's security (the
//! largest number of carriers from which the encoded information is
//! completely absent) by two independent routes, checks the Knill-Laflamme
//! recovery condition for explicit error sets, relates the two through the
//! base size of error products, and evaluates the quantum Singleton bound.

use itertools::Itertools;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::LinearMap;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::hilbert::{Decomposition, Ket, Operator};
use crate::json::ComplexMatrix;
use crate::kernels::{self, c};
use crate::opbasis::basis_for_dim;
use crate::space::SpaceRegistry;

/// A code subspace: orthonormal codewords spanning `K` dimensions inside
/// the tensor product of `n` carriers (labeled "1" ... "n").
#[derive(Debug, Clone)]
pub struct CodeSpec {
    carriers: SpaceRegistry,
    codewords: Vec<Ket>,
}

impl CodeSpec {
    pub fn new(carrier_dims: &[usize], codewords: Vec<Ket>, cfg: &Config) -> Result<Self> {
        let carriers = carrier_registry(carrier_dims)?;
        if codewords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let mut worst: f64 = 0.0;
        for (j, a) in codewords.iter().enumerate() {
            if *a.registry() != carriers {
                return Err(Error::RegistryMismatch);
            }
            for (k, b) in codewords.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b)?.norm() - target).abs());
            }
        }
        if worst > cfg.tol {
            return Err(Error::NotOrthonormal(worst));
        }
        Ok(CodeSpec {
            carriers,
            codewords,
        })
    }

    pub fn n(&self) -> usize {
        self.carriers.len()
    }

    /// Code dimension `K`.
    pub fn k(&self) -> usize {
        self.codewords.len()
    }

    pub fn carrier_dims(&self) -> Vec<usize> {
        self.carriers.dims()
    }

    pub fn carriers(&self) -> &SpaceRegistry {
        &self.carriers
    }

    pub fn codewords(&self) -> &[Ket] {
        &self.codewords
    }

    /// The projector onto the code subspace.
    pub fn projector(&self) -> Operator {
        let mut b = Operator::zeros(self.carriers.clone());
        for word in &self.codewords {
            b = b.add(&word.dyad()).expect("same registry");
        }
        b
    }
}

fn carrier_registry(dims: &[usize]) -> Result<SpaceRegistry> {
    SpaceRegistry::new(
        dims.iter()
            .enumerate()
            .map(|(i, &d)| ((i + 1).to_string(), d))
            .collect(),
    )
}

impl Serialize for CodeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            carrier_dims: Vec<usize>,
            codewords: &'a [Ket],
        }
        Repr {
            n: self.n(),
            carrier_dims: self.carrier_dims(),
            codewords: &self.codewords,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            carrier_dims: Vec<usize>,
            codewords: Vec<Ket>,
        }
        let repr = Repr::deserialize(d)?;
        if repr.n != repr.carrier_dims.len() {
            return Err(serde::de::Error::custom("n does not match carrier_dims"));
        }
        CodeSpec::new(&repr.carrier_dims, repr.codewords, &Config::default())
            .map_err(serde::de::Error::custom)
    }
}

/// The channel ket of the encoding: a maximally entangled pairing of an
/// entrance of dimension `K` with the codewords.
pub fn code_channel_ket(code: &CodeSpec) -> Result<Ket> {
    let k = code.k();
    let entrance = SpaceRegistry::single("a", k)?;
    let mut psi: Option<Ket> = None;
    let w = 1.0 / (k as f64).sqrt();
    for (j, word) in code.codewords.iter().enumerate() {
        let aj = Ket::basis_state(entrance.clone(), &[j])?;
        let term = aj.tensor(word)?.scaled(c(w, 0.0));
        psi = Some(match psi {
            None => term,
            Some(acc) => acc.add(&term)?,
        });
    }
    psi.ok_or(Error::DimensionMismatch {
        expected: 1,
        got: 0,
    })
}

/// One subset's audit record.
#[derive(Debug, Clone, Serialize)]
pub struct SubsetCheck {
    /// 1-based carrier indices.
    pub subset: Vec<usize>,
    /// Distance of the (entrance, subset) state from the product of its
    /// marginals.
    pub factorization_residual: f64,
    /// Worst violation of the compression condition over a complete
    /// operator basis of the subset.
    pub operator_residual: f64,
    pub passes: bool,
}

/// The witness that caps the security: a concrete operator the eavesdropper
/// could measure.
#[derive(Debug, Clone, Serialize)]
pub struct SecurityWitness {
    pub subset: Vec<usize>,
    /// Basis operator on the subset carriers with the largest violation.
    pub operator: Operator,
    /// The codeword bracket matrix `<b^j|F|b^k>`.
    pub bracket: ComplexMatrix,
    pub violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    /// Largest subset size from which the encoded information is completely
    /// absent (within what was checked).
    pub s: usize,
    pub max_checked: usize,
    /// True when no failing subset was found up to `max_checked`, so `s` is
    /// only a lower bound.
    pub capped: bool,
    pub subsets: Vec<SubsetCheck>,
    pub witness: Option<SecurityWitness>,
}

struct SubsetOutcome {
    check: SubsetCheck,
    worst_operator: Option<(Operator, Array2<C64>, f64)>,
}

fn audit_subset(
    code: &CodeSpec,
    psi: &Ket,
    subset: &[usize],
    cfg: &Config,
) -> Result<SubsetOutcome> {
    let labels: Vec<String> = subset.iter().map(|m| m.to_string()).collect();
    let label_refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();

    // route 1: the (entrance, subset) marginal factorizes
    let factorization_residual =
        crate::infoloc::uncorrelated_residual(&psi.dyad(), &["a"], &label_refs)?;

    // route 2: every operator based on the subset compresses to a constant
    // on the code subspace; a Hermitian product basis spans them all
    let sub_reg = code.carriers.subregistry(&label_refs)?;
    let dims = sub_reg.dims();
    let bases: Vec<_> = dims.iter().map(|&d| basis_for_dim(d)).collect();
    let shape: Vec<usize> = dims.iter().map(|&d| d * d).collect();
    let count: usize = shape.iter().product();
    let k = code.k();

    let mut operator_residual: f64 = 0.0;
    let mut worst_operator: Option<(Operator, Array2<C64>, f64)> = None;
    let mut idx = vec![0usize; dims.len()];
    for flat in 0..count {
        crate::space::unflatten(flat, &shape, &mut idx);
        let mut elem = bases[0].element(idx[0]).clone();
        for (basis, &j) in bases.iter().zip(&idx).skip(1) {
            elem = kernels::kron(&elem, basis.element(j));
        }
        let f_small = Operator::new(sub_reg.clone(), elem)?;
        let f_full = f_small.embed(&code.carriers)?;
        let images: Vec<Ket> = code
            .codewords
            .iter()
            .map(|w| f_full.apply(w))
            .collect::<Result<_>>()?;
        let mut bracket = Array2::zeros((k, k));
        for (row, wj) in code.codewords.iter().enumerate() {
            for (col, image) in images.iter().enumerate() {
                bracket[(row, col)] = wj.inner(image)?;
            }
        }
        let mean = kernels::trace(&bracket) / k as f64;
        let mut violation: f64 = 0.0;
        for row in 0..k {
            for col in 0..k {
                let expected = if row == col { mean } else { c(0.0, 0.0) };
                violation = violation.max((bracket[(row, col)] - expected).norm());
            }
        }
        if violation > operator_residual {
            operator_residual = violation;
            worst_operator = Some((f_small.clone(), bracket, violation));
        }
    }

    let passes_factorization = factorization_residual <= cfg.tol;
    let passes_operator = operator_residual <= cfg.tol;
    if passes_factorization != passes_operator {
        return Err(Error::RouteDisagreement {
            subset: subset.to_vec(),
            factorization: factorization_residual,
            operator: operator_residual,
        });
    }
    Ok(SubsetOutcome {
        check: SubsetCheck {
            subset: subset.to_vec(),
            factorization_residual,
            operator_residual,
            passes: passes_factorization,
        },
        worst_operator: if passes_operator { None } else { worst_operator },
    })
}

/// Computes the code security by sweeping carrier subsets of size 1 up to
/// `max_check`, cross-checking the state-factorization route against the
/// operator-compression route on every subset. A failing subset at size `k`
/// caps the security at `k - 1`; the sweep still finishes that size so the
/// report is complete.
pub fn security(code: &CodeSpec, max_check: usize, cfg: &Config) -> Result<SecurityReport> {
    if max_check > code.n() {
        return Err(Error::OutOfRange {
            name: "max_check",
            value: max_check as f64,
            min: 0.0,
            max: code.n() as f64,
        });
    }
    let psi = code_channel_ket(code)?;
    let mut subsets = Vec::new();
    let mut witness = None;
    let mut s = 0;
    let mut capped = true;

    for size in 1..=max_check {
        let size_subsets: Vec<Vec<usize>> = (1..=code.n()).combinations(size).collect();
        let outcomes: Vec<Result<SubsetOutcome>> = size_subsets
            .par_iter()
            .map(|subset| audit_subset(code, &psi, subset, cfg))
            .collect();
        let mut any_failed = false;
        for outcome in outcomes {
            let outcome = outcome?;
            if !outcome.check.passes && witness.is_none() {
                let (operator, bracket, violation) =
                    outcome.worst_operator.expect("failing subset has a witness");
                witness = Some(SecurityWitness {
                    subset: outcome.check.subset.clone(),
                    operator,
                    bracket: ComplexMatrix::from_array(&bracket),
                    violation,
                });
            }
            any_failed |= !outcome.check.passes;
            subsets.push(outcome.check);
        }
        if any_failed {
            s = size - 1;
            capped = false;
            break;
        }
        s = size;
    }
    Ok(SecurityReport {
        s,
        max_checked: max_check,
        capped,
        subsets,
        witness,
    })
}

/// Knill-Laflamme recovery check for an explicit error list.
#[derive(Debug, Clone, Serialize)]
pub struct KLReport {
    pub passes: bool,
    /// Worst deviation of any codeword bracket from `b_lm * delta_jk`.
    pub residual: f64,
    /// The Hermitian matrix `b_lm`.
    pub b_matrix: ComplexMatrix,
}

/// Checks `<b^j|K_l^dag K_m|b^k> = b_lm delta_jk` for every pair of error
/// maps on the carrier space.
pub fn knill_laflamme(code: &CodeSpec, errors: &[LinearMap], cfg: &Config) -> Result<KLReport> {
    for e in errors {
        if *e.domain() != code.carriers || *e.codomain() != code.carriers {
            return Err(Error::ShapeMismatch);
        }
    }
    let k = code.k();
    let count = errors.len();
    let images: Vec<Vec<Ket>> = errors
        .iter()
        .map(|e| {
            code.codewords
                .iter()
                .map(|w| {
                    Ket::new(code.carriers.clone(), e.matrix().dot(w.amplitudes()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut b_matrix = Array2::zeros((count, count));
    let mut residual: f64 = 0.0;
    for l in 0..count {
        for m in 0..count {
            let mut bracket = Array2::zeros((k, k));
            for j in 0..k {
                for kk in 0..k {
                    bracket[(j, kk)] = images[l][j].inner(&images[m][kk])?;
                }
            }
            let mean = kernels::trace(&bracket) / k as f64;
            b_matrix[(l, m)] = mean;
            for j in 0..k {
                for kk in 0..k {
                    let expected = if j == kk { mean } else { c(0.0, 0.0) };
                    residual = residual.max((bracket[(j, kk)] - expected).norm());
                }
            }
        }
    }
    Ok(KLReport {
        passes: residual <= cfg.tol,
        residual,
        b_matrix: ComplexMatrix::from_array(&b_matrix),
    })
}

/// All products of per-carrier basis elements whose base (set of carriers
/// acted on non-trivially) has at most `max_base` members. Includes the
/// identity. These span every operator with base size up to `max_base`.
pub fn error_family_with_base(
    registry: &SpaceRegistry,
    max_base: usize,
    cfg: &Config,
) -> Result<Vec<LinearMap>> {
    let _ = cfg;
    let n = registry.len();
    let dims = registry.dims();
    let mut out = vec![LinearMap::identity(registry.clone())];
    for size in 1..=max_base.min(n) {
        for subset in (0..n).combinations(size) {
            // choices: non-identity basis elements on each member
            let choice_counts: Vec<usize> = subset.iter().map(|&m| dims[m] * dims[m] - 1).collect();
            let total: usize = choice_counts.iter().product();
            let mut pick = vec![0usize; size];
            for flat in 0..total {
                crate::space::unflatten(flat, &choice_counts, &mut pick);
                let mut op: Option<Operator> = None;
                for (slot, &m) in subset.iter().enumerate() {
                    let basis = basis_for_dim(dims[m]);
                    let elem = basis.operator(pick[slot] + 1, registry.subsystems()[m].0.clone())?;
                    op = Some(match op {
                        None => elem,
                        Some(acc) => acc.tensor(&elem)?,
                    });
                }
                let embedded = op.expect("nonempty subset").embed(registry)?;
                out.push(LinearMap::new(
                    registry.clone(),
                    registry.clone(),
                    embedded.matrix().clone(),
                )?);
            }
        }
    }
    Ok(out)
}

/// True when the code both has security at least `2t` and satisfies the
/// recovery condition for every error with base size at most `t`.
pub fn s_equals_2t_check(code: &CodeSpec, t: usize, cfg: &Config) -> Result<bool> {
    if t == 0 {
        return Ok(true);
    }
    let needed = 2 * t;
    if needed > code.n() {
        return Ok(false);
    }
    let report = security(code, needed, cfg)?;
    if report.s < needed {
        return Ok(false);
    }
    let errors = error_family_with_base(&code.carriers, t, cfg)?;
    Ok(knill_laflamme(code, &errors, cfg)?.passes)
}

/// The minimal set of carriers an operator acts on non-trivially: carrier
/// `m` is outside the base exactly when replacing its factor by the
/// normalized identity leaves the operator unchanged.
pub fn operator_base(f: &Operator, cfg: &Config) -> Result<Vec<usize>> {
    let registry = f.registry().clone();
    let mut base = Vec::new();
    for (m, (label, dim)) in registry.subsystems().iter().enumerate() {
        let others = registry.complement(&[label.as_str()]);
        let other_refs: Vec<&str> = others.iter().map(|s| s.as_str()).collect();
        let reduced = f.partial_trace(&other_refs)?;
        let rebuilt = reduced.scaled(c(1.0 / *dim as f64, 0.0)).embed(&registry)?;
        if rebuilt.distance(f) > cfg.tol {
            base.push(m + 1);
        }
    }
    Ok(base)
}

/// The quantum Singleton bound `n >= 4t + log K / log D`, evaluated in
/// exact integer arithmetic as `D^(n - 4t) >= K`.
pub fn singleton_check(n: usize, t: usize, k: usize, d: usize) -> bool {
    if n < 4 * t {
        return k <= 0; // never, K >= 1; kept for clarity
    }
    let exponent = (n - 4 * t) as u32;
    match (d as u128).checked_pow(exponent) {
        Some(capacity) => capacity >= k as u128,
        None => true, // overflow only happens far above any possible K
    }
}

/// True when the bound holds with equality: `D^(n - 4t) = K`.
pub fn singleton_saturated(n: usize, t: usize, k: usize, d: usize) -> bool {
    n >= 4 * t && (d as u128).checked_pow((n - 4 * t) as u32) == Some(k as u128)
}

/// The built-in example codes.
pub fn builtin_code(name: &str, cfg: &Config) -> Result<CodeSpec> {
    match name {
        "repetition3" => {
            let carriers = carrier_registry(&[2, 2, 2])?;
            let zero = Ket::basis_state(carriers.clone(), &[0, 0, 0])?;
            let one = Ket::basis_state(carriers, &[1, 1, 1])?;
            CodeSpec::new(&[2, 2, 2], vec![zero, one], cfg)
        }
        "five_qubit" => five_qubit_code(cfg),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// The [[5,1,3]] code from its cyclic stabilizer generators: codewords are
/// the projected and orthonormalized all-zeros and all-ones states, with
/// the first nonzero amplitude made real positive.
fn five_qubit_code(cfg: &Config) -> Result<CodeSpec> {
    let carriers = carrier_registry(&[2, 2, 2, 2, 2])?;
    let x = ndarray::array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
    let z = ndarray::array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
    let i2 = kernels::identity(2);
    let pattern = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"];
    let mut projector = kernels::identity(32);
    for gen in pattern {
        let mut g = Array2::from_elem((1, 1), c(1.0, 0.0));
        for ch in gen.chars() {
            let factor = match ch {
                'X' => &x,
                'Z' => &z,
                _ => &i2,
            };
            g = kernels::kron(&g, factor);
        }
        let half = (kernels::identity(32) + &g).mapv(|v| v * 0.5);
        projector = projector.dot(&half);
    }
    let project = |indices: &[usize]| -> Result<Ket> {
        let seed = Ket::basis_state(carriers.clone(), indices)?;
        let raw = projector.dot(seed.amplitudes());
        let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut amps = raw.mapv(|v| v / norm);
        let lead = amps
            .iter()
            .find(|v| v.norm() > 1e-12)
            .copied()
            .unwrap_or(c(1.0, 0.0));
        let phase = (lead / lead.norm()).conj();
        amps.mapv_inplace(|v| v * phase);
        Ket::new(carriers.clone(), amps)
    };
    let zero = project(&[0, 0, 0, 0, 0])?;
    let one = project(&[1, 1, 1, 1, 1])?;
    CodeSpec::new(&[2, 2, 2, 2, 2], vec![zero, one], cfg)
}

/// Product basis of eigenstates of the symmetric flip operator on a pair of
/// carriers, used to ask whether flip-type information about carriers can
/// reach the entrance.
pub fn pair_flip_basis(code: &CodeSpec, first: usize, second: usize) -> Result<Decomposition> {
    let labels = [first.to_string(), second.to_string()];
    let label_refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    let sub = code.carriers.subregistry(&label_refs)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let single = |reg: SpaceRegistry, sign: f64| {
        Ket::from_slice(reg, &[c(s, 0.0), c(sign * s, 0.0)]).expect("qubit")
    };
    let mut kets = Vec::with_capacity(4);
    for &s1 in &[1.0, -1.0] {
        for &s2 in &[1.0, -1.0] {
            let first_reg = code.carriers.subregistry(&[label_refs[0]])?;
            let second_reg = code.carriers.subregistry(&[label_refs[1]])?;
            kets.push(single(first_reg, s1).tensor(&single(second_reg, s2))?);
        }
    }
    Decomposition::from_basis(sub, kets, &Config::default())
}
