//! Model catalog: torus metrics, contact models, lcs structures, mapping tori.
//!
//! Model description files are JSON objects tagged by `"model"`:
//!
//! ```json
//! {"model": "torus_metric", "g11": [[0,0,1,0]], "g12": [], "g22": [[0,0,1,0],[0,1,0.1,0]]}
//! {"model": "unit_cotangent_torus", "metric": {"g11": ..., "g12": ..., "g22": ...}}
//! {"model": "ellipsoid_s3", "a": 1.0, "b": 1.618}
//! {"model": "explicit", "lambda": [[[k1,k2,k3,cos,sin], ...], [...], [...]]}
//! {"model": "mapping_torus", "fiber": {<contact model>}, "phi": {"kind": "torus_lift", "linear": [[1,0],[0,1]], "shift": [0.25, 0]}}
//! ```
//!
//! Unknown keys are rejected.

pub mod contact;
pub mod cylinder;
pub mod lcs;
pub mod mapping_torus;
pub mod metric;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub use contact::{ContactModel, ReebFlow};
pub use cylinder::CylinderField;
pub use lcs::{LcsCheck, LcsStructure, ReebConditionReport};
pub use mapping_torus::{MappingTorusModel, StrictMap, XAlphaFlow};
pub use metric::{GeodesicFlow, IsometryModel, TorusMetric};

use crate::error::{Error, Result};

/// First 16 hex digits of the SHA-256 of `s`.
pub fn short_hash(s: &str) -> String {
    Sha256::digest(s.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Any model that can be read from a description file.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Metric(TorusMetric),
    Contact(ContactModel),
    MappingTorus(MappingTorusModel),
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MappingTorusDescription {
    fiber: Value,
    phi: StrictMap,
}

/// Validation settings applied when a model is loaded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelChecks {
    pub grid: usize,
    pub max_degree: i32,
}

impl Default for ModelChecks {
    fn default() -> Self {
        Self { grid: 64, max_degree: crate::fourier::DEFAULT_MAX_DEGREE }
    }
}

impl ModelChecks {
    /// Grid used for 3-dimensional charts; the full per-dimension resolution
    /// would mean 64³ Reeb solves, so it is capped.
    pub fn grid3(&self) -> usize {
        self.grid.min(24)
    }
}

impl Model {
    /// Parses a description and runs the validity checks.
    pub fn from_json(text: &str, checks: ModelChecks) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let m = Self::from_value(value, checks)?;
        m.validate(checks)?;
        Ok(m)
    }

    fn from_value(mut value: Value, checks: ModelChecks) -> Result<Self> {
        let tag = value
            .get("model")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("missing \"model\" tag".into()))?
            .to_string();
        match tag.as_str() {
            "torus_metric" => {
                if let Some(o) = value.as_object_mut() {
                    o.remove("model");
                }
                Ok(Self::Metric(serde_json::from_value(value)?))
            }
            "unit_cotangent_torus" | "ellipsoid_s3" | "explicit" => {
                Ok(Self::Contact(serde_json::from_value(value)?))
            }
            "mapping_torus" => {
                if let Some(o) = value.as_object_mut() {
                    o.remove("model");
                }
                let d: MappingTorusDescription = serde_json::from_value(value)?;
                let fiber = match Self::from_value(d.fiber, checks)? {
                    Self::Contact(c) => c,
                    _ => return Err(Error::Parse("mapping torus fiber must be a contact model".into())),
                };
                fiber.validate(checks.grid3(), checks.max_degree)?;
                Ok(Self::MappingTorus(MappingTorusModel::new(fiber, d.phi, checks.grid3().min(16))?))
            }
            other => Err(Error::Parse(format!("unknown model kind {other:?}"))),
        }
    }

    pub fn validate(&self, checks: ModelChecks) -> Result<()> {
        match self {
            Self::Metric(g) => g.validate(checks.grid, checks.max_degree),
            Self::Contact(c) => c.validate(checks.grid3(), checks.max_degree),
            Self::MappingTorus(m) => m.fiber.validate(checks.grid3(), checks.max_degree),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Self::Metric(g) => {
                let mut v = serde_json::to_value(g).unwrap_or(Value::Null);
                if let Some(o) = v.as_object_mut() {
                    o.insert("model".into(), Value::String("torus_metric".into()));
                }
                v
            }
            Self::Contact(c) => serde_json::to_value(c).unwrap_or(Value::Null),
            Self::MappingTorus(m) => serde_json::json!({
                "model": "mapping_torus",
                "fiber": serde_json::to_value(&m.fiber).unwrap_or(Value::Null),
                "phi": serde_json::to_value(&m.phi).unwrap_or(Value::Null),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checks() -> ModelChecks {
        ModelChecks { grid: 8, max_degree: 8 }
    }

    #[test]
    fn parses_catalog_descriptions() {
        let m = Model::from_json(
            r#"{"model":"torus_metric","g11":[[0,0,1,0],[0,1,0.1,0]],"g12":[],"g22":[[0,0,1,0],[0,1,0.1,0]]}"#,
            checks(),
        )
        .unwrap();
        assert_eq!(m, Model::Metric(TorusMetric::conformal_cos_y(0.1)));
        let e = Model::from_json(r#"{"model":"ellipsoid_s3","a":1.0,"b":2.0}"#, checks()).unwrap();
        assert_eq!(e, Model::Contact(ContactModel::ellipsoid(1.0, 2.0)));
        let mt = Model::from_json(
            r#"{"model":"mapping_torus",
                "fiber":{"model":"unit_cotangent_torus","metric":{"g11":[[0,0,1,0]],"g22":[[0,0,1,0]]}},
                "phi":{"kind":"torus_lift","linear":[[1,0],[0,1]],"shift":[0.25,0.0]}}"#,
            checks(),
        )
        .unwrap();
        assert!(matches!(mt, Model::MappingTorus(_)));
        let back = Model::from_value(mt.to_value(), checks()).unwrap();
        assert_eq!(back, mt);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_models() {
        assert!(matches!(
            Model::from_json(r#"{"model":"ellipsoid_s3","a":1.0,"b":2.0,"c":3}"#, checks()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            Model::from_json(r#"{"model":"torus_metric","g11":[[0,0,1,0]],"g22":[[0,0,1,0]],"extra":1}"#, checks()),
            Err(Error::Parse(_))
        ));
        assert!(Model::from_json(r#"{"model":"ellipsoid_s3","a":-1.0,"b":2.0}"#, checks()).is_err());
        assert!(Model::from_json(r#"{"model":"nope"}"#, checks()).is_err());
    }
}
