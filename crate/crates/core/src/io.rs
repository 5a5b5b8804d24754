//! JSON input and output for polytopes and zonotopes. Rationals travel as
//! `"p/q"` strings; plain integers are accepted on input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{HPolytope, VPolytope};
use crate::rational::{serde_q, VecQ};
use crate::zonotope::Zonotope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    H,
    V,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub n: usize,
    pub kind: Kind,
    #[serde(rename = "A", default, with = "serde_q::mat", skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<VecQ>,
    #[serde(default, with = "serde_q::vec", skip_serializing_if = "Vec::is_empty")]
    pub b: VecQ,
    #[serde(rename = "V", default, with = "serde_q::mat", skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<VecQ>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse { location: format!("line {} column {}", e.line(), e.column()), message: e.to_string() }
}

fn field_err(field: &str, message: &str) -> Error {
    Error::Parse { location: field.into(), message: message.into() }
}

impl PolytopeFile {
    pub fn into_polytope(self) -> Result<HPolytope> {
        match self.kind {
            Kind::H => {
                if self.a.is_empty() {
                    return Err(field_err("A", "required for kind H"));
                }
                if self.a.len() != self.b.len() {
                    return Err(field_err("b", "length must match the rows of A"));
                }
                HPolytope::new(self.n, self.a, self.b)
            }
            Kind::V => {
                if self.v.is_empty() {
                    return Err(field_err("V", "required for kind V"));
                }
                VPolytope::new(self.n, self.v)?.to_h()
            }
        }
    }

    pub fn from_h(p: &HPolytope) -> Self {
        Self { n: p.dim(), kind: Kind::H, a: p.normals().to_vec(), b: p.offsets().to_vec(), v: Vec::new() }
    }

    pub fn from_v(p: &VPolytope) -> Self {
        Self { n: p.dim(), kind: Kind::V, a: Vec::new(), b: Vec::new(), v: p.vertices().to_vec() }
    }
}

/// Parse a polytope document; V input is converted to facets.
pub fn parse_polytope(json: &str) -> Result<HPolytope> {
    serde_json::from_str::<PolytopeFile>(json).map_err(parse_err)?.into_polytope()
}

pub fn parse_zonotope(json: &str) -> Result<Zonotope> {
    let z: Zonotope = serde_json::from_str(json).map_err(parse_err)?;
    Zonotope::new(z.n, z.generators)
}

pub fn zonotope_json(z: &Zonotope) -> String {
    serde_json::to_string(z).expect("serializable")
}
