//! Channel representations and the conversions among them.
//!
//! A noisy channel is held as a coherent bundle of five equivalent objects:
//! the isometry `V` from the entrance into exit-plus-environment, the channel
//! ket (the normalized pure state dual to `V`), the dynamical operator `R`
//! (the reduced channel-ket dyad, a density operator whose entrance marginal
//! is maximally mixed), the transition operator `Q` (the partial transpose of
//! `R` on the entrance, which generates entrance/exit correlations), and a
//! canonical Kraus set.
//!
//! The ket-map duality everywhere uses the computational basis of the
//! entrance; a different basis choice changes the ket by a local unitary but
//! none of the derived operators.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::hilbert::{Decomposition, Ket, Operator};
use crate::kernels::{self, c};
use crate::space::SpaceRegistry;

/// A linear map between two labeled spaces, stored as a
/// `(codomain dim) x (domain dim)` matrix in the computational bases.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    domain: SpaceRegistry,
    codomain: SpaceRegistry,
    matrix: Array2<C64>,
}

impl LinearMap {
    pub fn new(domain: SpaceRegistry, codomain: SpaceRegistry, matrix: Array2<C64>) -> Result<Self> {
        if matrix.dim() != (codomain.total_dim(), domain.total_dim()) {
            return Err(Error::DimensionMismatch {
                expected: codomain.total_dim() * domain.total_dim(),
                got: matrix.nrows() * matrix.ncols(),
            });
        }
        Ok(LinearMap {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(registry: SpaceRegistry) -> Self {
        let d = registry.total_dim();
        LinearMap {
            domain: registry.clone(),
            codomain: registry,
            matrix: kernels::identity(d),
        }
    }

    pub fn domain(&self) -> &SpaceRegistry {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceRegistry {
        &self.codomain
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn isometry_defect(&self) -> f64 {
        let gram = kernels::dagger(&self.matrix).dot(&self.matrix);
        kernels::frob_dist(&gram, &kernels::identity(self.domain.total_dim()))
    }

    pub fn is_isometry(&self, cfg: &Config) -> bool {
        self.isometry_defect() <= cfg.tol
    }

    pub fn is_unitary(&self, cfg: &Config) -> bool {
        self.domain.total_dim() == self.codomain.total_dim() && self.is_isometry(cfg)
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if *ket.registry() != self.domain {
            return Err(Error::RegistryMismatch);
        }
        Ket::new(self.codomain.clone(), self.matrix.dot(ket.amplitudes()))
    }

    /// Applies the map to a consecutive block of a larger ket's subsystems;
    /// the block must match the domain labels in order and is replaced by
    /// the codomain subsystems.
    pub fn apply_to_subsystems(&self, ket: &Ket) -> Result<Ket> {
        let reg = ket.registry();
        let first = self
            .domain
            .subsystems()
            .first()
            .ok_or(Error::RegistryMismatch)?;
        let start = reg
            .position(&first.0)
            .ok_or_else(|| Error::UnknownLabel(first.0.clone()))?;
        for (offset, (label, dim)) in self.domain.subsystems().iter().enumerate() {
            match reg.subsystems().get(start + offset) {
                Some((l, d)) if l == label && d == dim => {}
                _ => return Err(Error::RegistryMismatch),
            }
        }
        let pre = SpaceRegistry::new(reg.subsystems()[..start].to_vec())?;
        let post =
            SpaceRegistry::new(reg.subsystems()[start + self.domain.len()..].to_vec())?;
        let out_registry = pre.join(&self.codomain)?.join(&post)?;

        let (pre_d, post_d) = (pre.total_dim(), post.total_dim());
        let (block_in, block_out) = (self.domain.total_dim(), self.codomain.total_dim());
        let mut out = Array1::zeros(pre_d * block_out * post_d);
        let amps = ket.amplitudes();
        for p in 0..pre_d {
            for nb in 0..block_out {
                for q in 0..post_d {
                    let mut acc = c(0.0, 0.0);
                    for ob in 0..block_in {
                        acc += self.matrix[(nb, ob)] * amps[(p * block_in + ob) * post_d + q];
                    }
                    out[(p * block_out + nb) * post_d + q] = acc;
                }
            }
        }
        Ket::new(out_registry, out)
    }
}

/// The ket dual to a linear map with respect to a rank-1 decomposition of
/// its domain: `|psi> = sum_j |a^j> (x) M|a^j>`, unnormalized.
pub fn ket_from_map(map: &LinearMap, basis: &Decomposition, cfg: &Config) -> Result<Ket> {
    if basis.registry() != map.domain() {
        return Err(Error::RegistryMismatch);
    }
    let kets = basis.basis_kets(cfg)?;
    let registry = map.domain().join(map.codomain())?;
    let mut amplitudes = Array1::zeros(registry.total_dim());
    for a in &kets {
        let image = map.apply(a)?;
        let term = kernels::kron_vec(a.amplitudes(), image.amplitudes());
        amplitudes = amplitudes + term;
    }
    Ket::new(registry, amplitudes)
}

/// The map dual to a ket: `M|a^j> = <a^j|psi>`, extended by linearity.
/// The basis subsystems become the domain; everything else the codomain.
pub fn map_from_ket(psi: &Ket, basis: &Decomposition, cfg: &Config) -> Result<LinearMap> {
    let kets = basis.basis_kets(cfg)?;
    let domain = basis.registry().clone();
    let rest = psi
        .registry()
        .complement(&domain.labels().collect::<Vec<_>>());
    let rest_refs: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
    let codomain = psi.registry().subregistry(&rest_refs)?;
    let mut matrix = Array2::zeros((codomain.total_dim(), domain.total_dim()));
    for a in &kets {
        let column = psi.contract(a)?;
        for r in 0..codomain.total_dim() {
            for d in 0..domain.total_dim() {
                matrix[(r, d)] += column.amplitudes()[r] * a.amplitudes()[d].conj();
            }
        }
    }
    LinearMap::new(domain, codomain, matrix)
}

/// The channel ket of an isometry `V` from the entrance into
/// exit-plus-environment: the normalized dual ket in the computational
/// entrance basis. Its entrance marginal is maximally mixed.
pub fn channel_ket(v: &LinearMap, cfg: &Config) -> Result<Ket> {
    if !v.is_isometry(cfg) {
        return Err(Error::NotIsometry(v.isometry_defect()));
    }
    let d_a = v.domain().total_dim();
    let basis = computational_decomposition(v.domain())?;
    let raw = ket_from_map(v, &basis, cfg)?;
    Ok(raw.scaled(c(1.0 / (d_a as f64).sqrt(), 0.0)))
}

fn computational_decomposition(registry: &SpaceRegistry) -> Result<Decomposition> {
    let kets: Vec<Ket> = (0..registry.total_dim())
        .map(|flat| {
            let dims = registry.dims();
            let mut idx = vec![0usize; dims.len()];
            crate::space::unflatten(flat, &dims, &mut idx);
            Ket::basis_state(registry.clone(), &idx)
        })
        .collect::<Result<_>>()?;
    Decomposition::from_basis(registry.clone(), kets, &Config::default())
}

/// The dynamical operator: the channel-ket dyad reduced to entrance and
/// exit (the first two subsystems). A density operator.
pub fn dynamical_operator(psi: &Ket, cfg: &Config) -> Result<Operator> {
    if psi.registry().len() < 2 {
        return Err(Error::ChannelKetShape);
    }
    if !psi.is_normalized(cfg) {
        return Err(Error::NotDensity((psi.norm() - 1.0).abs()));
    }
    let labels: Vec<&str> = psi.registry().labels().take(2).collect();
    psi.dyad().partial_trace(&labels)
}

/// The transition operator: the partial transpose of a dynamical operator
/// on its entrance subsystem. Hermitian and unit trace, typically with
/// negative eigenvalues.
pub fn transition_operator(r: &Operator, cfg: &Config) -> Result<Operator> {
    let entrance = r
        .registry()
        .labels()
        .next()
        .ok_or(Error::ChannelKetShape)?
        .to_string();
    crate::hilbert::check_density(r, cfg)?;
    let d_a = r.registry().dim_of(&entrance)?;
    let marginal = r.partial_trace(&[entrance.as_str()])?;
    let uniform =
        Operator::identity(marginal.registry().clone()).scaled(c(1.0 / d_a as f64, 0.0));
    let residual = marginal.distance(&uniform);
    if residual > cfg.tol {
        return Err(Error::MalformedDynamical(residual));
    }
    r.partial_transpose(&entrance)
}

/// Canonical Kraus set of a channel ket, together with the Kraus rank.
///
/// The environment expansion is made a Schmidt expansion, so distinct Kraus
/// operators are trace orthogonal. Ordering is by descending Schmidt
/// coefficient with ties broken lexicographically on the real part of the
/// first nonzero entry; each operator's global phase makes that entry real
/// positive.
pub fn kraus_decompose(psi: &Ket, cfg: &Config) -> Result<(Vec<LinearMap>, usize)> {
    let reg = psi.registry();
    if reg.len() < 3 {
        return Err(Error::ChannelKetShape);
    }
    let labels: Vec<&str> = reg.labels().collect();
    let entrance = labels[0];
    let d_a = reg.dim_of(entrance)?;
    let form = crate::hilbert::schmidt_decompose(psi, &labels[..2], cfg)?;
    let basis = computational_decomposition(&reg.subregistry(&[entrance])?)?;

    let mut kraus: Vec<(f64, LinearMap)> = Vec::new();
    for (weight, pair_ket) in form.coefficients.iter().zip(&form.left_basis) {
        if *weight <= cfg.rank_threshold(form.coefficients[0]) {
            break;
        }
        let kraus_ket = pair_ket.scaled(c(*weight, 0.0));
        let map = map_from_ket(&kraus_ket, &basis, cfg)?;
        let scaled = LinearMap {
            domain: map.domain,
            codomain: map.codomain,
            matrix: map.matrix.mapv(|z| z * (d_a as f64).sqrt()),
        };
        kraus.push((*weight, fix_map_phase(scaled)));
    }
    let rank = kraus.len();
    kraus.sort_by(|(wa, ka), (wb, kb)| {
        let tie = (wa - wb).abs() <= 1e-12 * wa.max(*wb);
        if !tie {
            wb.partial_cmp(wa).unwrap()
        } else {
            let ra = first_nonzero(&ka.matrix).map(|z| z.re).unwrap_or(0.0);
            let rb = first_nonzero(&kb.matrix).map(|z| z.re).unwrap_or(0.0);
            rb.partial_cmp(&ra).unwrap()
        }
    });
    Ok((kraus.into_iter().map(|(_, k)| k).collect(), rank))
}

fn first_nonzero(m: &Array2<C64>) -> Option<C64> {
    let floor = 1e-12 * m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    m.iter().find(|z| z.norm() > floor).copied()
}

fn fix_map_phase(map: LinearMap) -> LinearMap {
    let correction = match first_nonzero(&map.matrix) {
        Some(z) if z.norm() > 0.0 => (z / z.norm()).conj(),
        _ => c(1.0, 0.0),
    };
    LinearMap {
        domain: map.domain,
        codomain: map.codomain,
        matrix: map.matrix.mapv(|z| z * correction),
    }
}

/// How to evaluate the channel superoperator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Conjugate by the isometry, then trace out the environment.
    Isometry,
    /// Sum over Kraus conjugations.
    Kraus,
    /// Contract against the transition operator.
    Transition,
}

/// One channel, every representation.
#[derive(Debug, Clone)]
pub struct ChannelBundle {
    isometry: LinearMap,
    ket: Ket,
    dynamical: Operator,
    transition: Operator,
    kraus: Vec<LinearMap>,
    kraus_rank: usize,
}

impl ChannelBundle {
    /// Builds every representation from an isometry whose domain is a single
    /// subsystem and whose codomain is (exit, environment).
    pub fn from_isometry(v: LinearMap, cfg: &Config) -> Result<Self> {
        if v.domain().len() != 1 || v.codomain().len() != 2 {
            return Err(Error::ChannelKetShape);
        }
        if !v.is_isometry(cfg) {
            return Err(Error::NotIsometry(v.isometry_defect()));
        }
        let ket = channel_ket(&v, cfg)?;
        let dynamical = dynamical_operator(&ket, cfg)?;
        let transition = transition_operator(&dynamical, cfg)?;
        let (kraus, kraus_rank) = kraus_decompose(&ket, cfg)?;
        Ok(ChannelBundle {
            isometry: v,
            ket,
            dynamical,
            transition,
            kraus,
            kraus_rank,
        })
    }

    /// Stinespring construction from a Kraus set: stacks the operators into
    /// an isometry with one environment level per operator.
    pub fn from_kraus(operators: &[Array2<C64>], cfg: &Config) -> Result<Self> {
        let first = operators.first().ok_or(Error::ChannelKetShape)?;
        let (d_b, d_a) = first.dim();
        if operators.iter().any(|k| k.dim() != (d_b, d_a)) {
            return Err(Error::ShapeMismatch);
        }
        let d_f = operators.len();
        let domain = SpaceRegistry::single("a", d_a)?;
        let codomain = SpaceRegistry::new(vec![("b", d_b), ("f", d_f)])?;
        let mut matrix = Array2::zeros((d_b * d_f, d_a));
        for (l, k) in operators.iter().enumerate() {
            for r in 0..d_b {
                for j in 0..d_a {
                    matrix[(r * d_f + l, j)] = k[(r, j)];
                }
            }
        }
        let v = LinearMap::new(domain, codomain, matrix)?;
        if !v.is_isometry(cfg) {
            return Err(Error::NotIsometry(v.isometry_defect()));
        }
        ChannelBundle::from_isometry(v, cfg)
    }

    pub fn isometry(&self) -> &LinearMap {
        &self.isometry
    }

    pub fn ket(&self) -> &Ket {
        &self.ket
    }

    pub fn dynamical(&self) -> &Operator {
        &self.dynamical
    }

    pub fn transition(&self) -> &Operator {
        &self.transition
    }

    pub fn kraus(&self) -> &[LinearMap] {
        &self.kraus
    }

    pub fn kraus_rank(&self) -> usize {
        self.kraus_rank
    }

    pub fn entrance_label(&self) -> &str {
        self.isometry.domain().subsystems()[0].0.as_str()
    }

    pub fn exit_label(&self) -> &str {
        self.isometry.codomain().subsystems()[0].0.as_str()
    }

    pub fn env_label(&self) -> &str {
        self.isometry.codomain().subsystems()[1].0.as_str()
    }

    pub fn entrance_dim(&self) -> usize {
        self.isometry.domain().total_dim()
    }
}

/// Applies the channel superoperator to an operator on the entrance, by any
/// of the three routes. All routes agree within numerical tolerance.
pub fn apply_channel(bundle: &ChannelBundle, input: &Operator, route: Route) -> Result<Operator> {
    if *input.registry() != *bundle.isometry.domain() {
        return Err(Error::RegistryMismatch);
    }
    match route {
        Route::Isometry => {
            let v = bundle.isometry.matrix();
            let big = v.dot(input.matrix()).dot(&kernels::dagger(v));
            let out = Operator::new(bundle.isometry.codomain().clone(), big)?;
            out.partial_trace(&[bundle.exit_label()])
        }
        Route::Kraus => {
            let exit_reg = bundle
                .isometry
                .codomain()
                .subregistry(&[bundle.exit_label()])?;
            let d_b = exit_reg.total_dim();
            let mut acc = Array2::zeros((d_b, d_b));
            for k in &bundle.kraus {
                acc = acc + k.matrix().dot(input.matrix()).dot(&kernels::dagger(k.matrix()));
            }
            Operator::new(exit_reg, acc)
        }
        Route::Transition => {
            let q = &bundle.transition;
            let embedded = input.embed(q.registry())?;
            let product = embedded.compose(q)?;
            let reduced = product.partial_trace(&[bundle.exit_label()])?;
            Ok(reduced.scaled(c(bundle.entrance_dim() as f64, 0.0)))
        }
    }
}

/// The built-in one-qubit channel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardChannel {
    BitFlip,
    AmplitudeDamping,
    Depolarizing,
}

impl std::str::FromStr for StandardChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit_flip" => Ok(StandardChannel::BitFlip),
            "amplitude_damping" => Ok(StandardChannel::AmplitudeDamping),
            "depolarizing" => Ok(StandardChannel::Depolarizing),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

impl std::fmt::Display for StandardChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            StandardChannel::BitFlip => "bit_flip",
            StandardChannel::AmplitudeDamping => "amplitude_damping",
            StandardChannel::Depolarizing => "depolarizing",
        };
        write!(f, "{name}")
    }
}

/// Builds a built-in one-qubit channel with error probability `p`.
///
/// Bit flip and amplitude damping take `p` in `[0, 1]` with a two-level
/// environment; depolarizing takes `p` in `[0, 2/3]` and needs a four-level
/// environment.
pub fn standard_channel(kind: StandardChannel, p: f64, cfg: &Config) -> Result<ChannelBundle> {
    let max = match kind {
        StandardChannel::Depolarizing => 2.0 / 3.0,
        _ => 1.0,
    };
    if !(0.0..=max).contains(&p) || !p.is_finite() {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            min: 0.0,
            max,
        });
    }
    let kraus: Vec<Array2<C64>> = match kind {
        StandardChannel::BitFlip => vec![
            kernels::identity(2).mapv(|z| z * (1.0 - p).sqrt()),
            ndarray::array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
                .mapv(|z| z * p.sqrt()),
        ],
        StandardChannel::AmplitudeDamping => vec![
            ndarray::array![
                [c(1.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c((1.0 - p).sqrt(), 0.0)]
            ],
            ndarray::array![
                [c(0.0, 0.0), c(p.sqrt(), 0.0)],
                [c(0.0, 0.0), c(0.0, 0.0)]
            ],
        ],
        StandardChannel::Depolarizing => vec![
            kernels::identity(2).mapv(|z| z * ((2.0 - 3.0 * p) / 2.0).sqrt()),
            ndarray::array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
                .mapv(|z| z * (p / 2.0).sqrt()),
            ndarray::array![
                [c(0.0, 0.0), c(0.0, 0.0)],
                [c(p.sqrt(), 0.0), c(0.0, 0.0)]
            ],
            ndarray::array![
                [c(0.0, 0.0), c(p.sqrt(), 0.0)],
                [c(0.0, 0.0), c(0.0, 0.0)]
            ],
        ],
    };
    ChannelBundle::from_kraus(&kraus, cfg)
}

/// Channel ket of a channel whose environment starts in a mixed state.
///
/// A unitary `T` on (auxiliary `v`, environment `e`) mapping to (exit `b`,
/// post-environment `c`) is fed one half of a fully entangled pair on
/// (`a_label`, `v`) and a purification `chi` of the environment on (`e`,
/// reference `d`). The output is a pure state on the four parts
/// (`a_label`, b, c, d) in which the entrance and the reference stay
/// uncorrelated; that invariance fails for non-unitary `T` in general, so
/// unitarity is enforced.
pub fn mixed_env_channel(
    t: &LinearMap,
    chi: &Ket,
    a_label: &str,
    cfg: &Config,
) -> Result<Ket> {
    if t.domain().len() != 2 || t.codomain().len() != 2 {
        return Err(Error::ChannelKetShape);
    }
    if !t.is_unitary(cfg) {
        return Err(Error::NotUnitary(if t.domain().total_dim() == t.codomain().total_dim() {
            t.isometry_defect()
        } else {
            f64::INFINITY
        }));
    }
    if chi.registry().len() != 2 {
        return Err(Error::ChannelKetShape);
    }
    let (v_label, v_dim) = {
        let s = &t.domain().subsystems()[0];
        (s.0.clone(), s.1)
    };
    let (e_label, e_dim) = {
        let s = &t.domain().subsystems()[1];
        (s.0.clone(), s.1)
    };
    let chi_first = &chi.registry().subsystems()[0];
    if chi_first.0 != e_label || chi_first.1 != e_dim {
        return Err(Error::RegistryMismatch);
    }
    if !chi.is_normalized(cfg) {
        return Err(Error::NotDensity((chi.norm() - 1.0).abs()));
    }

    // fully entangled pair on (a, v)
    let pair_reg = SpaceRegistry::new(vec![(a_label.to_string(), v_dim), (v_label, v_dim)])?;
    let mut amplitudes = Array1::zeros(v_dim * v_dim);
    let w = 1.0 / (v_dim as f64).sqrt();
    for j in 0..v_dim {
        amplitudes[j * v_dim + j] = c(w, 0.0);
    }
    let phi = Ket::new(pair_reg, amplitudes)?;

    let product = phi.tensor(chi)?;
    t.apply_to_subsystems(&product)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn qubit(label: &str) -> SpaceRegistry {
        SpaceRegistry::single(label, 2).unwrap()
    }

    fn perfect_channel() -> ChannelBundle {
        ChannelBundle::from_kraus(&[kernels::identity(2)], &cfg()).unwrap()
    }

    #[test]
    fn ket_from_identity_map_is_unnormalized_bell() {
        let m = LinearMap::new(qubit("a"), qubit("b"), kernels::identity(2)).unwrap();
        let basis = Decomposition::computational("a", 2).unwrap();
        let psi = ket_from_map(&m, &basis, &cfg()).unwrap();
        assert!((psi.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((psi.amplitudes()[3] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(psi.amplitudes()[1].norm() + psi.amplitudes()[2].norm() < 1e-15);
    }

    #[test]
    fn ket_from_sigma_x_stacks_columns() {
        // column-stacking oracle: |psi> = sum_j |j> (x) (sigma_x |j>)
        let sx = ndarray::array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let m = LinearMap::new(qubit("a"), qubit("b"), sx).unwrap();
        let basis = Decomposition::computational("a", 2).unwrap();
        let psi = ket_from_map(&m, &basis, &cfg()).unwrap();
        assert!((psi.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((psi.amplitudes()[2] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn map_ket_duality_roundtrip() {
        let m0 = ndarray::array![
            [c(0.3, 0.1), c(-0.2, 0.4)],
            [c(0.0, -0.7), c(0.5, 0.2)],
            [c(0.1, 0.0), c(0.6, -0.3)]
        ];
        let map = LinearMap::new(qubit("a"), SpaceRegistry::single("b", 3).unwrap(), m0.clone())
            .unwrap();
        let basis = Decomposition::computational("a", 2).unwrap();
        let psi = ket_from_map(&map, &basis, &cfg()).unwrap();
        let back = map_from_ket(&psi, &basis, &cfg()).unwrap();
        assert!(kernels::frob_dist(back.matrix(), &m0) < 1e-12);
    }

    #[test]
    fn bell_ket_maps_to_identity_over_norm() {
        let psi = crate::hilbert::tests::bell("a", "b");
        let basis = Decomposition::computational("a", 2).unwrap();
        let m = map_from_ket(&psi, &basis, &cfg()).unwrap();
        let expected = kernels::identity(2).mapv(|z| z * std::f64::consts::FRAC_1_SQRT_2);
        assert!(kernels::frob_dist(m.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn channel_ket_requires_isometry() {
        let not_iso = LinearMap::new(
            qubit("a"),
            SpaceRegistry::new(vec![("b", 2), ("f", 1)]).unwrap(),
            kernels::identity(2).mapv(|z| z * 2.0),
        )
        .unwrap();
        assert!(matches!(
            channel_ket(&not_iso, &cfg()),
            Err(Error::NotIsometry(_))
        ));
    }

    #[test]
    fn bit_flip_ket_amplitudes() {
        let p = 0.3f64;
        let bundle = standard_channel(StandardChannel::BitFlip, p, &cfg()).unwrap();
        let psi = bundle.ket();
        // sqrt(2)|Psi> = sqrt(1-p)(|00>+|11>)|0> + sqrt(p)(|01>+|10>)|1>
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let idx = |a: usize, b: usize, f: usize| (a * 2 + b) * 2 + f;
        let amp = psi.amplitudes();
        assert!((amp[idx(0, 0, 0)] - c(s * (1.0 - p).sqrt(), 0.0)).norm() < 1e-12);
        assert!((amp[idx(1, 1, 0)] - c(s * (1.0 - p).sqrt(), 0.0)).norm() < 1e-12);
        assert!((amp[idx(0, 1, 1)] - c(s * p.sqrt(), 0.0)).norm() < 1e-12);
        assert!((amp[idx(1, 0, 1)] - c(s * p.sqrt(), 0.0)).norm() < 1e-12);
        assert!((amp[idx(0, 1, 0)]).norm() < 1e-12);
    }

    #[test]
    fn amplitude_damping_ket_amplitudes() {
        let p = 0.36f64;
        let bundle = standard_channel(StandardChannel::AmplitudeDamping, p, &cfg()).unwrap();
        let amp = bundle.ket().amplitudes();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let idx = |a: usize, b: usize, f: usize| (a * 2 + b) * 2 + f;
        assert!((amp[idx(0, 0, 0)] - c(s, 0.0)).norm() < 1e-12);
        assert!((amp[idx(1, 1, 0)] - c(s * 0.8, 0.0)).norm() < 1e-12);
        assert!((amp[idx(1, 0, 1)] - c(s * 0.6, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn perfect_channel_dynamical_is_bell_dyad() {
        let bundle = perfect_channel();
        let r = bundle.dynamical();
        let bell = crate::hilbert::tests::bell("a", "b").dyad();
        assert!(r.distance(&bell) < 1e-12);
        // entrance marginal maximally mixed
        let ra = r.partial_trace(&["a"]).unwrap();
        assert!(ra.distance(&Operator::identity(qubit("a")).scaled(c(0.5, 0.0))) < 1e-12);
    }

    #[test]
    fn depolarizing_at_half_is_maximally_mixed() {
        let bundle = standard_channel(StandardChannel::Depolarizing, 0.5, &cfg()).unwrap();
        let quarter = Operator::identity(bundle.dynamical().registry().clone())
            .scaled(c(0.25, 0.0));
        assert!(bundle.dynamical().distance(&quarter) < 1e-12);
        assert!(bundle.transition().distance(&quarter) < 1e-12);
    }

    fn transition_coefficients(bundle: &ChannelBundle) -> crate::opbasis::CoefficientTensor {
        crate::opbasis::pauli_expand(bundle.transition(), &cfg()).unwrap()
    }

    #[test]
    fn bit_flip_transition_pauli_table() {
        let p = 0.3;
        let bundle = standard_channel(StandardChannel::BitFlip, p, &cfg()).unwrap();
        let t = transition_coefficients(&bundle);
        let mut expected = vec![0.0; 16];
        expected[0] = 1.0; // II
        expected[5] = 1.0; // XX
        expected[10] = 1.0 - 2.0 * p; // YY
        expected[15] = 1.0 - 2.0 * p; // ZZ
        for (i, (&got, &want)) in t.coefficients().iter().zip(&expected).enumerate() {
            assert!((got - want).abs() < 1e-12, "coefficient {i}");
        }
        // dynamical operator flips the YY sign only
        let r = crate::opbasis::pauli_expand(bundle.dynamical(), &cfg()).unwrap();
        assert!((r.value(&[2, 2]) + (1.0 - 2.0 * p)).abs() < 1e-12);
        assert!((r.value(&[1, 1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping_transition_pauli_table() {
        let p = 0.3;
        let bundle = standard_channel(StandardChannel::AmplitudeDamping, p, &cfg()).unwrap();
        let t = transition_coefficients(&bundle);
        assert!((t.value(&[0, 0]) - 1.0).abs() < 1e-12);
        assert!((t.value(&[0, 3]) - p).abs() < 1e-12);
        assert!((t.value(&[1, 1]) - (1.0 - p).sqrt()).abs() < 1e-12);
        assert!((t.value(&[2, 2]) - (1.0 - p).sqrt()).abs() < 1e-12);
        assert!((t.value(&[3, 3]) - (1.0 - p)).abs() < 1e-12);
        assert!(t.value(&[3, 0]).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_transition_pauli_table() {
        let p = 0.3;
        let bundle = standard_channel(StandardChannel::Depolarizing, p, &cfg()).unwrap();
        let t = transition_coefficients(&bundle);
        assert!((t.value(&[0, 0]) - 1.0).abs() < 1e-12);
        for k in 1..4 {
            assert!((t.value(&[k, k]) - (1.0 - 2.0 * p)).abs() < 1e-12);
            assert!(t.value(&[0, k]).abs() < 1e-12);
            assert!(t.value(&[k, 0]).abs() < 1e-12);
        }
    }

    #[test]
    fn kraus_amplitude_damping_canonical() {
        let p = 0.36;
        let bundle = standard_channel(StandardChannel::AmplitudeDamping, p, &cfg()).unwrap();
        assert_eq!(bundle.kraus_rank(), 2);
        let k0 = bundle.kraus()[0].matrix();
        let k1 = bundle.kraus()[1].matrix();
        assert!((k0[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
        assert!((k0[(1, 1)] - c(0.8, 0.0)).norm() < 1e-10);
        assert!(k0[(0, 1)].norm() < 1e-10);
        assert!((k1[(0, 1)] - c(0.6, 0.0)).norm() < 1e-10);
        assert!(k1[(0, 0)].norm() + k1[(1, 0)].norm() + k1[(1, 1)].norm() < 1e-10);
    }

    #[test]
    fn kraus_ranks() {
        assert_eq!(perfect_channel().kraus_rank(), 1);
        let depol = standard_channel(StandardChannel::Depolarizing, 0.1, &cfg()).unwrap();
        assert_eq!(depol.kraus_rank(), 4);
        // completeness
        let mut acc = Array2::zeros((2, 2));
        for k in depol.kraus() {
            acc = acc + kernels::dagger(k.matrix()).dot(k.matrix());
        }
        assert!(kernels::frob_dist(&acc, &kernels::identity(2)) < 1e-12);
        // trace orthogonality of distinct Kraus operators
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let cross = kernels::trace(
                    &kernels::dagger(depol.kraus()[i].matrix()).dot(depol.kraus()[j].matrix()),
                );
                assert!(cross.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn apply_channel_examples() {
        let p = 0.3;
        let bundle = standard_channel(StandardChannel::BitFlip, p, &cfg()).unwrap();
        let zero = Ket::basis_state(qubit("a"), &[0]).unwrap().dyad();
        for route in [Route::Isometry, Route::Kraus, Route::Transition] {
            let out = apply_channel(&bundle, &zero, route).unwrap();
            assert!((out.matrix()[(0, 0)].re - (1.0 - p)).abs() < 1e-12);
            assert!((out.matrix()[(1, 1)].re - p).abs() < 1e-12);
            assert!(out.matrix()[(0, 1)].norm() < 1e-12);
        }

        // depolarizing contracts toward the maximally mixed state
        let p = 0.25;
        let bundle = standard_channel(StandardChannel::Depolarizing, p, &cfg()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Ket::from_slice(qubit("a"), &[c(s, 0.0), c(0.0, s)]).unwrap().dyad();
        let out = apply_channel(&bundle, &plus, Route::Kraus).unwrap();
        let expected = plus
            .scaled(c(1.0 - 2.0 * p, 0.0))
            .add(&Operator::identity(qubit("a")).scaled(c(p, 0.0)))
            .unwrap();
        // same labels on entrance and exit here, so compare raw matrices
        assert!(kernels::frob_dist(out.matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn route_agreement_on_maximally_mixed_input() {
        let bundle = standard_channel(StandardChannel::AmplitudeDamping, 0.4, &cfg()).unwrap();
        let input = Operator::identity(qubit("a")).scaled(c(0.5, 0.0));
        let via_iso = apply_channel(&bundle, &input, Route::Isometry).unwrap();
        let via_kraus = apply_channel(&bundle, &input, Route::Kraus).unwrap();
        let via_q = apply_channel(&bundle, &input, Route::Transition).unwrap();
        assert!(via_iso.distance(&via_kraus) < 1e-12);
        assert!(via_iso.distance(&via_q) < 1e-12);
        // equals the exit marginal of the transition operator
        let qb = bundle.transition().partial_trace(&["b"]).unwrap();
        assert!(via_iso.distance(&qb) < 1e-12);
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(matches!(
            standard_channel(StandardChannel::Depolarizing, 0.7, &cfg()),
            Err(Error::OutOfRange { .. })
        ));
        assert!(standard_channel(StandardChannel::Depolarizing, 2.0 / 3.0, &cfg()).is_ok());
        assert!(standard_channel(StandardChannel::BitFlip, -0.1, &cfg()).is_err());
        assert!(standard_channel(StandardChannel::AmplitudeDamping, 1.0, &cfg()).is_ok());
    }

    #[test]
    fn amplitude_damping_at_one_sends_everything_to_ground() {
        let bundle = standard_channel(StandardChannel::AmplitudeDamping, 1.0, &cfg()).unwrap();
        let one = Ket::basis_state(qubit("a"), &[1]).unwrap().dyad();
        let out = apply_channel(&bundle, &one, Route::Kraus).unwrap();
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(out.matrix()[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn from_kraus_rejects_non_trace_preserving() {
        let bad = vec![kernels::identity(2).mapv(|z| z * 0.5)];
        assert!(matches!(
            ChannelBundle::from_kraus(&bad, &cfg()),
            Err(Error::NotIsometry(_))
        ));
    }

    #[test]
    fn mixed_env_identity_unitary_gives_product() {
        let domain = SpaceRegistry::new(vec![("v", 2), ("e", 2)]).unwrap();
        let codomain = SpaceRegistry::new(vec![("b", 2), ("c", 2)]).unwrap();
        let t = LinearMap::new(domain, codomain, kernels::identity(4)).unwrap();
        let chi_reg = SpaceRegistry::new(vec![("e", 2), ("d", 2)]).unwrap();
        let chi = Ket::basis_state(chi_reg, &[0, 0]).unwrap();
        let psi = mixed_env_channel(&t, &chi, "a", &cfg()).unwrap();
        assert_eq!(
            psi.registry().labels().collect::<Vec<_>>(),
            vec!["a", "b", "c", "d"]
        );
        // entrance-exit pair stays fully entangled, (c, d) stays |00>
        let pair = psi.dyad().partial_trace(&["a", "b"]).unwrap();
        let bell = crate::hilbert::tests::bell("a", "b").dyad();
        assert!(pair.distance(&bell) < 1e-12);
    }

    #[test]
    fn mixed_env_rejects_non_unitary() {
        // isometry into a strictly larger space is not allowed
        let domain = SpaceRegistry::new(vec![("v", 2), ("e", 1)]).unwrap();
        let codomain = SpaceRegistry::new(vec![("b", 2), ("c", 2)]).unwrap();
        let mut m = Array2::zeros((4, 2));
        m[(0, 0)] = c(1.0, 0.0);
        m[(3, 1)] = c(1.0, 0.0);
        let t = LinearMap::new(domain, codomain, m).unwrap();
        let chi_reg = SpaceRegistry::new(vec![("e", 1), ("d", 2)]).unwrap();
        let chi = Ket::basis_state(chi_reg, &[0, 0]).unwrap();
        assert!(matches!(
            mixed_env_channel(&t, &chi, "a", &cfg()),
            Err(Error::NotUnitary(_))
        ));
    }
}
