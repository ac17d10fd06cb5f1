//! JSON wire formats.
//!
//! Kets and operators serialize as a `kind` tag, a registry header of labels
//! and dimensions, and a row-major `data` array of `[re, im]` pairs. Channel
//! specifications are a tagged union over the standard families, an explicit
//! isometry, or a Kraus set (converted internally through a Stinespring
//! stacking).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{ChannelBundle, LinearMap, StandardChannel};
use crate::config::Config;
use crate::error::Result;
use crate::hilbert::{Ket, Operator};
use crate::space::SpaceRegistry;

fn pairs_of(values: impl Iterator<Item = C64>) -> Vec<[f64; 2]> {
    values.map(|z| [z.re, z.im]).collect()
}

fn complexes_of(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

#[derive(Serialize)]
struct VectorRepr<'a> {
    kind: &'static str,
    registry: &'a SpaceRegistry,
    data: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct VectorReprOwned {
    kind: String,
    registry: SpaceRegistry,
    data: Vec<[f64; 2]>,
}

impl Serialize for Ket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorRepr {
            kind: "ket",
            registry: self.registry(),
            data: pairs_of(self.amplitudes().iter().copied()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = VectorReprOwned::deserialize(d)?;
        if repr.kind != "ket" {
            return Err(D::Error::custom(format!(
                "expected kind \"ket\", got {:?}",
                repr.kind
            )));
        }
        Ket::new(repr.registry, Array1::from(complexes_of(&repr.data))).map_err(D::Error::custom)
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorRepr {
            kind: "operator",
            registry: self.registry(),
            data: pairs_of(self.matrix().iter().copied()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = VectorReprOwned::deserialize(d)?;
        if repr.kind != "operator" {
            return Err(D::Error::custom(format!(
                "expected kind \"operator\", got {:?}",
                repr.kind
            )));
        }
        let d_total = repr.registry.total_dim();
        if repr.data.len() != d_total * d_total {
            return Err(D::Error::custom("operator data length mismatch"));
        }
        let matrix = Array2::from_shape_vec((d_total, d_total), complexes_of(&repr.data))
            .map_err(D::Error::custom)?;
        Operator::new(repr.registry, matrix).map_err(D::Error::custom)
    }
}

#[derive(Serialize)]
struct MapRepr<'a> {
    domain: &'a SpaceRegistry,
    codomain: &'a SpaceRegistry,
    data: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct MapReprOwned {
    domain: SpaceRegistry,
    codomain: SpaceRegistry,
    data: Vec<[f64; 2]>,
}

impl Serialize for LinearMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapRepr {
            domain: self.domain(),
            codomain: self.codomain(),
            data: pairs_of(self.matrix().iter().copied()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MapReprOwned::deserialize(d)?;
        let (rows, cols) = (repr.codomain.total_dim(), repr.domain.total_dim());
        if repr.data.len() != rows * cols {
            return Err(D::Error::custom("map data length mismatch"));
        }
        let matrix = Array2::from_shape_vec((rows, cols), complexes_of(&repr.data))
            .map_err(D::Error::custom)?;
        LinearMap::new(repr.domain, repr.codomain, matrix).map_err(D::Error::custom)
    }
}

/// A bare complex matrix without registry metadata (Kraus inputs, bracket
/// matrices in reports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl ComplexMatrix {
    pub fn from_array(m: &Array2<C64>) -> Self {
        ComplexMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            data: pairs_of(m.iter().copied()),
        }
    }

    pub fn to_array(&self) -> Result<Array2<C64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(crate::error::Error::ShapeMismatch);
        }
        Array2::from_shape_vec((self.rows, self.cols), complexes_of(&self.data))
            .map_err(|_| crate::error::Error::ShapeMismatch)
    }
}

/// On-disk description of a channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Standard { name: StandardChannel, p: f64 },
    Isometry { map: LinearMap },
    Kraus { operators: Vec<ComplexMatrix> },
}

impl ChannelSpec {
    pub fn build(&self, cfg: &Config) -> Result<ChannelBundle> {
        match self {
            ChannelSpec::Standard { name, p } => crate::channel::standard_channel(*name, *p, cfg),
            ChannelSpec::Isometry { map } => ChannelBundle::from_isometry(map.clone(), cfg),
            ChannelSpec::Kraus { operators } => {
                let mats: Vec<Array2<C64>> = operators
                    .iter()
                    .map(|m| m.to_array())
                    .collect::<Result<_>>()?;
                ChannelBundle::from_kraus(&mats, cfg)
            }
        }
    }
}
