//! JSON document schemas: triangulation witnesses and run reports.
//!
//! Point codes follow the grammar `T<k>` / `B<k>` with `0 <= k < n`. Tets
//! are stored canonically (top layer first, ascending index; tet list
//! sorted), so saving a loaded document reproduces it byte for byte.

use prismtri::shape::{Kind, Layer, PointId, ShapeSpec};
use prismtri::{Tet, Triangulation3D};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Serialize, Deserialize, Debug)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ShapeDoc {
    pub kind: String,
    pub n: u32,
}

#[derive(Clone, Serialize, Deserialize, Debug)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MetaDoc {
    pub size: usize,
    pub generator: String,
    pub timestamp: String,
}

/// A triangulation witness on disk.
#[derive(Clone, Serialize, Deserialize, Debug)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TriangulationDocument {
    pub schema_version: u32,
    pub shape: ShapeDoc,
    pub tets: Vec<[String; 4]>,
    pub meta: MetaDoc,
}

fn point_code(p: &PointId) -> String {
    format!("{p}")
}

pub fn parse_point(code: &str, n: u32) -> Result<PointId, String> {
    let (layer, digits) = match code.split_at_checked(1) {
        Some(("T", d)) => (Layer::Top, d),
        Some(("B", d)) => (Layer::Bottom, d),
        _ => return Err(format!("bad point code {code:?}")),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad point code {code:?}"));
    }
    let index: u32 = digits
        .parse()
        .map_err(|_| format!("bad point index in {code:?}"))?;
    if index >= n {
        return Err(format!("point {code} out of range for n = {n}"));
    }
    Ok(PointId { layer, index })
}

pub fn shape_of(doc: &ShapeDoc) -> Result<ShapeSpec, String> {
    let kind = match doc.kind.as_str() {
        "prism" => Kind::Prism,
        "antiprism" => Kind::Antiprism,
        other => return Err(format!("unknown shape kind {other:?}")),
    };
    ShapeSpec::new(kind, doc.n).map_err(|e| e.to_string())
}

impl TriangulationDocument {
    pub fn from_triangulation(tri: &Triangulation3D, generator: &str) -> Self {
        let tets = tri
            .tets
            .iter()
            .map(|t| {
                let p = t.points();
                [
                    point_code(&p[0]),
                    point_code(&p[1]),
                    point_code(&p[2]),
                    point_code(&p[3]),
                ]
            })
            .collect();
        TriangulationDocument {
            schema_version: SCHEMA_VERSION,
            shape: ShapeDoc {
                kind: tri.shape.kind().to_string(),
                n: tri.shape.n(),
            },
            tets,
            meta: MetaDoc {
                size: tri.size(),
                generator: generator.to_string(),
                timestamp: chrono::Utc::now()
                    .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            },
        }
    }

    /// Parses and canonicalizes the tet list; schema-level mismatches are
    /// format errors (exit 1 territory), not validity failures.
    pub fn to_triangulation(&self) -> Result<Triangulation3D, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schemaVersion {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let shape = shape_of(&self.shape)?;
        if self.meta.size != self.tets.len() {
            return Err(format!(
                "meta.size {} does not match {} tets",
                self.meta.size,
                self.tets.len()
            ));
        }
        let mut tets = Vec::with_capacity(self.tets.len());
        for codes in &self.tets {
            let mut pts = [PointId::top(0); 4];
            for (i, c) in codes.iter().enumerate() {
                pts[i] = parse_point(c, shape.n())?;
            }
            let tet = Tet::new(pts).map_err(|e| e.to_string())?;
            tets.push(tet);
        }
        Ok(Triangulation3D::new(shape, tets))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| format!("malformed document: {e}"))
    }

    /// Canonical re-serialization used by every writer.
    pub fn canonicalized(mut self) -> Self {
        self.tets.sort();
        self
    }
}

/// Run report written by the reporting subcommands.
#[derive(Clone, Serialize, Deserialize, Debug)]
#[serde(rename_all = "camelCase")]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Inputs,
    pub results: serde_json::Value,
    pub passed: bool,
    pub elapsed_ms: u64,
}

#[derive(Clone, Default, Serialize, Deserialize, Debug)]
#[serde(rename_all = "camelCase")]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assume_bound: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive_identity: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<u32>,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_codes() {
        assert_eq!(parse_point("T0", 4).unwrap(), PointId::top(0));
        assert_eq!(parse_point("B3", 4).unwrap(), PointId::bottom(3));
        assert!(parse_point("T4", 4).is_err());
        assert!(parse_point("X1", 4).is_err());
        assert!(parse_point("T", 4).is_err());
        assert!(parse_point("T1x", 4).is_err());
    }

    #[test]
    fn document_round_trip() {
        let shape = ShapeSpec::prism(3).unwrap();
        let tri = Triangulation3D::new(
            shape,
            vec![
                Tet::new([
                    PointId::top(0),
                    PointId::top(1),
                    PointId::top(2),
                    PointId::bottom(2),
                ])
                .unwrap(),
                Tet::new([
                    PointId::top(0),
                    PointId::top(1),
                    PointId::bottom(1),
                    PointId::bottom(2),
                ])
                .unwrap(),
                Tet::new([
                    PointId::top(0),
                    PointId::bottom(0),
                    PointId::bottom(1),
                    PointId::bottom(2),
                ])
                .unwrap(),
            ],
        );
        let doc = TriangulationDocument::from_triangulation(&tri, "test").canonicalized();
        let json = doc.to_json();
        let loaded = TriangulationDocument::from_json(&json).unwrap();
        assert_eq!(loaded.to_json(), json, "byte-identical round trip");
        let back = loaded.to_triangulation().unwrap();
        assert_eq!(back, tri);
    }
}
