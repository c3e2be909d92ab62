//! Experiment documents: strict JSON, version 1.
//!
//! ```json
//! {
//!   "version": 1,
//!   "network": {
//!     "gammas": [1.0, 1.0, {"alpha": 2.0, "g": 0.5}],
//!     "bs_a": "balanced",
//!     "bs_b": {"T": [0.7071067811865476, 0.0], "R": [0.0, 0.7071067811865476]},
//!     "object1": {"T": 1.0, "phi": 4.71238898038469},
//!     "object2": "absent",
//!     "delays": {"phi1": 0.0, "phi2": 0.0, "phi3": 0.0}
//!   },
//!   "sweep": {"param": "T2", "from": 0.0, "to": 1.0, "points": 5},
//!   "solve": {"dual": false}
//! }
//! ```
//!
//! Complex numbers are `[re, im]`; angles are radians.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use veil_core::elements::{BeamSplitterSpec, CrystalSpec, ObjectSpec};
use veil_core::network::{Delays, NetworkConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum DocumentError {
    /// Malformed JSON or schema violation, with serde's line/column context.
    Schema(String),
    /// Well-formed document describing unphysical optics.
    Physics(veil_core::Error),
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::Schema(msg) => write!(f, "schema error: {msg}"),
            DocumentError::Physics(err) => write!(f, "physics error: {err}"),
        }
    }
}

impl From<veil_core::Error> for DocumentError {
    fn from(err: veil_core::Error) -> Self {
        DocumentError::Physics(err)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDocument {
    pub version: u32,
    pub network: NetworkDoc,
    #[serde(default)]
    pub sweep: Option<SweepDoc>,
    #[serde(default)]
    pub solve: Option<SolveDoc>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub gammas: [GammaDoc; 3],
    #[serde(default)]
    pub bs_a: SplitterDoc,
    #[serde(default)]
    pub bs_b: SplitterDoc,
    #[serde(default)]
    pub object1: ObjectDoc,
    #[serde(default)]
    pub object2: ObjectDoc,
    #[serde(default)]
    pub delays: DelaysDoc,
}

/// A real pair amplitude, or the pump amplitude and efficiency it derives
/// from. Complex values are rejected.
#[derive(Debug, Clone)]
pub enum GammaDoc {
    Value(f64),
    Pump(PumpDoc),
}

impl<'de> Deserialize<'de> for GammaDoc {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct GammaVisitor;

        impl<'de> Visitor<'de> for GammaVisitor {
            type Value = GammaDoc;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a real pair amplitude or {\"alpha\": a, \"g\": g}")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<GammaDoc, E> {
                Ok(GammaDoc::Value(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<GammaDoc, E> {
                Ok(GammaDoc::Value(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<GammaDoc, E> {
                Ok(GammaDoc::Value(v as f64))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<GammaDoc, A::Error> {
                PumpDoc::deserialize(de::value::MapAccessDeserializer::new(map)).map(GammaDoc::Pump)
            }
        }

        deserializer.deserialize_any(GammaVisitor)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpDoc {
    pub alpha: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SplitterDoc {
    Named(String),
    Explicit(ExplicitSplitter),
}

impl Default for SplitterDoc {
    fn default() -> Self {
        SplitterDoc::Named("balanced".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSplitter {
    #[serde(rename = "T")]
    pub t: [f64; 2],
    #[serde(rename = "R")]
    pub r: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ObjectDoc {
    Named(String),
    Explicit(ExplicitObject),
}

impl Default for ObjectDoc {
    fn default() -> Self {
        ObjectDoc::Named("absent".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitObject {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaysDoc {
    #[serde(default)]
    pub phi1: f64,
    #[serde(default)]
    pub phi2: f64,
    #[serde(default)]
    pub phi3: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDoc {
    #[serde(default)]
    pub dual: bool,
}

pub fn parse(text: &str) -> Result<ExperimentDocument, DocumentError> {
    let doc: ExperimentDocument =
        serde_json::from_str(text).map_err(|e| DocumentError::Schema(e.to_string()))?;
    if doc.version != SCHEMA_VERSION {
        return Err(DocumentError::Schema(format!(
            "field `version`: expected {SCHEMA_VERSION}, found {}",
            doc.version
        )));
    }
    Ok(doc)
}

fn complex([re, im]: [f64; 2]) -> Complex64 {
    Complex64::new(re, im)
}

fn splitter(
    field: &str,
    label: &str,
    doc: &SplitterDoc,
) -> Result<BeamSplitterSpec, DocumentError> {
    match doc {
        SplitterDoc::Named(name) if name == "balanced" => Ok(BeamSplitterSpec::balanced().with_label(label)),
        SplitterDoc::Named(other) => Err(DocumentError::Schema(format!(
            "field `network.{field}`: expected \"balanced\" or {{\"T\": [re, im], \"R\": [re, im]}}, found \"{other}\""
        ))),
        SplitterDoc::Explicit(e) => Ok(BeamSplitterSpec::labelled(label, complex(e.t), complex(e.r))?),
    }
}

fn object(field: &str, doc: &ObjectDoc) -> Result<ObjectSpec, DocumentError> {
    match doc {
        ObjectDoc::Named(name) if name == "absent" => Ok(ObjectSpec::absent()),
        ObjectDoc::Named(other) => Err(DocumentError::Schema(format!(
            "field `network.{field}`: expected \"absent\" or {{\"T\": t, \"phi\": phi}}, found \"{other}\""
        ))),
        ObjectDoc::Explicit(e) => Ok(ObjectSpec::new(e.t, e.phi)?),
    }
}

impl NetworkDoc {
    pub fn resolve(&self) -> Result<NetworkConfig, DocumentError> {
        let mut gammas = [0.0; 3];
        for (g, doc) in gammas.iter_mut().zip(&self.gammas) {
            *g = match doc {
                GammaDoc::Value(v) => CrystalSpec::new(*v)?.gamma(),
                GammaDoc::Pump(p) => CrystalSpec::from_pump(p.alpha, p.g)?.gamma(),
            };
        }
        Ok(NetworkConfig {
            gammas,
            bs_a: splitter("bs_a", "a", &self.bs_a)?,
            bs_b: splitter("bs_b", "b", &self.bs_b)?,
            object1: object("object1", &self.object1)?,
            object2: object("object2", &self.object2)?,
            delays: Delays {
                phi1: self.delays.phi1,
                phi2: self.delays.phi2,
                phi3: self.delays.phi3,
            },
        })
    }
}

/// Echo of a resolved configuration in document form.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub gammas: [f64; 3],
    pub normalization: f64,
    pub bs_a: ResolvedSplitter,
    pub bs_b: ResolvedSplitter,
    pub object1: ResolvedObject,
    pub object2: ResolvedObject,
    pub delays: ResolvedDelays,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSplitter {
    #[serde(rename = "T")]
    pub t: [f64; 2],
    #[serde(rename = "R")]
    pub r: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedObject {
    #[serde(rename = "T")]
    pub t: f64,
    pub phi: f64,
    #[serde(rename = "R")]
    pub r: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedDelays {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl From<&NetworkConfig> for ResolvedConfig {
    fn from(c: &NetworkConfig) -> Self {
        let bs = |b: &BeamSplitterSpec| ResolvedSplitter {
            t: [b.t.re, b.t.im],
            r: [b.r.re, b.r.im],
        };
        let obj = |o: &ObjectSpec| ResolvedObject {
            t: o.transmissivity(),
            phi: o.phase(),
            r: [o.reflection().re, o.reflection().im],
        };
        Self {
            gammas: c.gammas,
            normalization: c.normalization(),
            bs_a: bs(&c.bs_a),
            bs_b: bs(&c.bs_b),
            object1: obj(&c.object1),
            object2: obj(&c.object2),
            delays: ResolvedDelays {
                phi1: c.delays.phi1,
                phi2: c.delays.phi2,
                phi3: c.delays.phi3,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = parse(r#"{"version": 1, "network": {"gammas": [1, 1, 1]}}"#).unwrap();
        assert_eq!(doc.network.resolve().unwrap(), NetworkConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let err =
            parse(r#"{"version": 1, "network": {"gammas": [1, 1, 1], "gamma4": 2}}"#).unwrap_err();
        assert!(
            matches!(err, DocumentError::Schema(ref m) if m.contains("gamma4") && m.contains("line"))
        );
    }

    #[test]
    fn wrong_version_rejected() {
        assert!(matches!(
            parse(r#"{"version": 2, "network": {"gammas": [1, 1, 1]}}"#),
            Err(DocumentError::Schema(_))
        ));
    }

    #[test]
    fn complex_gamma_rejected_by_schema() {
        assert!(matches!(
            parse(r#"{"version": 1, "network": {"gammas": [[1, 0], 1, 1]}}"#),
            Err(DocumentError::Schema(_))
        ));
    }

    #[test]
    fn pump_form_and_explicit_elements() {
        let doc = parse(
            r#"{"version": 1, "network": {
                "gammas": [{"alpha": 2.0, "g": 0.5}, 1, 0],
                "bs_a": {"T": [1, 0], "R": [0, 0]},
                "object1": {"T": 0.5, "phi": 1.0}
            }}"#,
        )
        .unwrap();
        let cfg = doc.network.resolve().unwrap();
        assert_eq!(cfg.gammas, [1.0, 1.0, 0.0]);
        assert_eq!(cfg.bs_a.t, Complex64::new(1.0, 0.0));
        assert_eq!(cfg.object1.transmissivity(), 0.5);
    }

    #[test]
    fn nonunitary_splitter_is_physics_error() {
        let doc = parse(r#"{"version": 1, "network": {"gammas": [1, 1, 1], "bs_a": {"T": [0.8, 0], "R": [0.6, 0]}}}"#)
            .unwrap();
        assert!(matches!(
            doc.network.resolve(),
            Err(DocumentError::Physics(veil_core::Error::NonUnitary { .. }))
        ));
    }

    #[test]
    fn unknown_splitter_name_is_schema_error() {
        let doc =
            parse(r#"{"version": 1, "network": {"gammas": [1, 1, 1], "bs_b": "polarizing"}}"#)
                .unwrap();
        assert!(matches!(
            doc.network.resolve(),
            Err(DocumentError::Schema(_))
        ));
    }
}
