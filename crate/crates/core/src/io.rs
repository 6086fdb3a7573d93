//! JSON file formats for polytopes, maps, points and trees.
//!
//! Rationals are strings `"p/q"` or `"p"`. Trees use the serde impl of
//! [`BBTree`]; everything else goes through the file structs below.

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::instances::{CrossOracle, PackingOracle};
use crate::lp::{LinearConstraint, LpError, OracleDescriptor, Polytope, Provenance, SeparationOracle};
use crate::rational::{self, Rational};
use crate::transforms::{self, AffineMap, MapError, MapKind, MapStep};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown oracle family {0:?}")]
    UnknownOracle(String),
    #[error("oracle parameter {0:?} missing")]
    MissingParam(String),
    #[error("polytope oracle has no file representation")]
    OracleNotSerializable,
    #[error("map data disagree with its spec")]
    MapMismatch,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    #[serde(rename = "box", default)]
    pub boxed: bool,
    pub rows: Vec<LinearConstraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl PolytopeFile {
    pub fn from_polytope(p: &Polytope) -> Result<Self, IoError> {
        let oracle = match p.oracle() {
            None => None,
            Some(o) => Some(o.descriptor().ok_or(IoError::OracleNotSerializable)?),
        };
        Ok(PolytopeFile {
            dim: p.dim(),
            boxed: p.is_boxed(),
            rows: p.rows().to_vec(),
            oracle,
            provenance: p.provenance().cloned(),
        })
    }

    pub fn into_polytope(self) -> Result<Polytope, IoError> {
        let mut p = Polytope::new(self.dim, self.rows, self.boxed)?;
        if let Some(d) = self.oracle {
            p = p.with_oracle(oracle_from_descriptor(&d)?)?;
        }
        if let Some(prov) = self.provenance {
            p = p.with_provenance(prov);
        }
        Ok(p)
    }
}

/// Rebuilds a built-in oracle from its descriptor.
pub fn oracle_from_descriptor(d: &OracleDescriptor) -> Result<Arc<dyn SeparationOracle>, IoError> {
    let param = |k: &str| -> Result<usize, IoError> {
        d.params
            .get(k)
            .map(|&v| v as usize)
            .ok_or_else(|| IoError::MissingParam(k.into()))
    };
    match d.family.as_str() {
        "cross" => Ok(Arc::new(CrossOracle { n: param("n")? })),
        "packing" => Ok(Arc::new(PackingOracle {
            n: param("n")?,
            k: param("k")?,
        })),
        other => Err(IoError::UnknownOracle(other.into())),
    }
}

pub fn polytope_to_json(p: &Polytope) -> Result<String, IoError> {
    Ok(serde_json::to_string_pretty(&PolytopeFile::from_polytope(p)?)?)
}

pub fn polytope_from_json(s: &str) -> Result<Polytope, IoError> {
    serde_json::from_str::<PolytopeFile>(s)?.into_polytope()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    #[serde(rename = "C", with = "bigint_matrix")]
    pub c: Vec<Vec<BigInt>>,
    #[serde(with = "rational::serde_bigint::vec")]
    pub d: Vec<BigInt>,
    /// Input dimension; needed when `C` has no rows.
    pub n: usize,
    pub kind: MapKind,
    /// Canonical steps, innermost first; absent for general maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<Vec<MapStep>>,
}

mod bigint_matrix {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|v| v.trim().parse::<BigInt>().map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

impl MapFile {
    pub fn from_map(f: &AffineMap) -> Self {
        MapFile {
            c: f.matrix().to_vec(),
            d: f.offset().to_vec(),
            n: f.input_dim(),
            kind: f.kind(),
            spec: f.steps().map(<[MapStep]>::to_vec),
        }
    }

    /// Rebuilds the map; when steps are present the stored `C` and `d`
    /// must match them.
    pub fn into_map(self) -> Result<AffineMap, IoError> {
        match self.spec {
            Some(steps) => {
                let f = transforms::from_steps(self.n, &steps)?;
                if f.matrix() != self.c.as_slice() || f.offset() != self.d.as_slice() {
                    return Err(IoError::MapMismatch);
                }
                Ok(f)
            }
            None => Ok(AffineMap::general(self.c, self.d, self.n)?),
        }
    }
}

pub fn map_to_json(f: &AffineMap) -> Result<String, IoError> {
    Ok(serde_json::to_string_pretty(&MapFile::from_map(f))?)
}

pub fn map_from_json(s: &str) -> Result<AffineMap, IoError> {
    serde_json::from_str::<MapFile>(s)?.into_map()
}

/// A point as a JSON array of rational strings.
pub fn point_from_json(s: &str) -> Result<Vec<Rational>, IoError> {
    #[derive(Deserialize)]
    struct P(#[serde(with = "rational::serde_str::vec")] Vec<Rational>);
    Ok(serde_json::from_str::<P>(s)?.0)
}

pub fn point_to_json(x: &[Rational]) -> String {
    let v: Vec<String> = x.iter().map(rational::format).collect();
    serde_json::to_string(&v).expect("strings always serialize")
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}
