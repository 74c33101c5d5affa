//! The JSON instance format.
//!
//! ```json
//! {
//!   "vertices": ["u", "v", "w"],
//!   "edges": [["u", "v"], ["v", "w"]],
//!   "half_edges": [["w"]],
//!   "signatures": {"u": [1, 1], "v": "atmost:1", "w": [1, "3/2", "1/2"]}
//! }
//! ```
//!
//! Edge ids follow the document: `edges` in order, then `half_edges`.
//! Signature entries are integers or `"p/q"` strings; `"atmost:b"` and
//! `"atleast:b"` expand to the vertex's degree.

use crate::graph::{Edge, Graph, GraphError};
use crate::holant::{HolantInstance, Signature, Violation};
use crate::rational::{self, Rational};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{0}")]
    Validation(Violation),
}

fn field(path: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Field {
        path: path.into(),
        message: message.into(),
    }
}

fn strings(v: &Value, path: &str) -> Result<Vec<String>, LoadError> {
    let arr = v.as_array().ok_or_else(|| field(path, "expected a list"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| field(format!("{path}[{i}]"), "expected a vertex name"))
        })
        .collect()
}

fn signature(v: &Value, degree: usize, path: &str) -> Result<Signature, LoadError> {
    match v {
        Value::String(s) => {
            let (kind, b) = s
                .split_once(':')
                .ok_or_else(|| field(path, format!("unknown signature rule {s:?}")))?;
            let b: usize = b
                .trim()
                .parse()
                .map_err(|_| field(path, format!("bad bound in {s:?}")))?;
            match kind.trim() {
                "atmost" => Ok(Signature::at_most(degree, b)),
                "atleast" => Ok(Signature::at_least(degree, b)),
                other => Err(field(path, format!("unknown signature rule {other:?}"))),
            }
        }
        Value::Array(xs) => xs
            .iter()
            .enumerate()
            .map(|(i, x)| rational::serde_str::from_json(x).map_err(|m| field(format!("{path}[{i}]"), m)))
            .collect::<Result<Vec<Rational>, _>>()
            .map(Signature::new),
        _ => Err(field(
            path,
            "expected a list of rationals or \"atmost:b\" / \"atleast:b\"",
        )),
    }
}

/// Parses a document without checking the signature conditions.
pub fn parse_unchecked(text: &str) -> Result<HolantInstance, LoadError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = doc.as_object().ok_or_else(|| field("$", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "vertices" | "edges" | "half_edges" | "signatures") {
            return Err(field(key.as_str(), "unknown key"));
        }
    }
    let vertices = strings(
        obj.get("vertices").ok_or_else(|| field("vertices", "missing"))?,
        "vertices",
    )?;
    let mut edges = Vec::new();
    let edge_list = obj.get("edges").ok_or_else(|| field("edges", "missing"))?;
    for (i, e) in edge_list
        .as_array()
        .ok_or_else(|| field("edges", "expected a list"))?
        .iter()
        .enumerate()
    {
        let path = format!("edges[{i}]");
        let pair = strings(e, &path)?;
        if pair.len() != 2 {
            return Err(field(path, "expected [u, v]"));
        }
        edges.push((pair[0].clone(), pair[1].clone()));
    }
    let mut halves = Vec::new();
    if let Some(h) = obj.get("half_edges") {
        for (i, e) in h
            .as_array()
            .ok_or_else(|| field("half_edges", "expected a list"))?
            .iter()
            .enumerate()
        {
            let path = format!("half_edges[{i}]");
            match e {
                Value::String(s) => halves.push(s.clone()),
                _ => {
                    let one = strings(e, &path)?;
                    if one.len() != 1 {
                        return Err(field(path, "expected [u]"));
                    }
                    halves.push(one[0].clone());
                }
            }
        }
    }
    let graph = Graph::build(&vertices, &edges, &halves).map_err(|e| {
        let path = match e {
            GraphError::UnknownVertex(_) | GraphError::DuplicateEdge(..) | GraphError::SelfLoop(_) => "edges",
            GraphError::DuplicateHalfEdge(_) => "half_edges",
            _ => "vertices",
        };
        field(path, e.to_string())
    })?;
    let sigs = obj
        .get("signatures")
        .and_then(Value::as_object)
        .ok_or_else(|| field("signatures", "expected an object keyed by vertex"))?;
    for key in sigs.keys() {
        if graph.vertex_id(key).is_none() {
            return Err(field(format!("signatures.{key}"), "unknown vertex"));
        }
    }
    let mut out = Vec::with_capacity(vertices.len());
    for v in graph.vertices() {
        let name = graph.vertex_name(v);
        let path = format!("signatures.{name}");
        let s = sigs.get(name).ok_or_else(|| field(&path, "missing"))?;
        out.push(signature(s, graph.degree(v), &path)?);
    }
    HolantInstance::new(graph, out).map_err(|e| field("signatures", e.to_string()))
}

/// Parses and validates a document.
pub fn parse_instance(text: &str) -> Result<HolantInstance, LoadError> {
    let phi = parse_unchecked(text)?;
    phi.validate().map_err(LoadError::Validation)?;
    Ok(phi)
}

fn rational_value(r: &Rational) -> Value {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.numer()) {
            return json!(i);
        }
    }
    Value::String(rational::to_string(r))
}

/// The canonical document: explicit signature lists, integers as numbers and
/// every other rational as `"p/q"`.
pub fn to_document(instance: &HolantInstance) -> Value {
    let g = instance.graph();
    let mut edges = Vec::new();
    let mut halves = Vec::new();
    for (_, e) in g.edges() {
        match e {
            Edge::Normal(u, v) => edges.push(json!([g.vertex_name(u), g.vertex_name(v)])),
            Edge::Half(v) => halves.push(json!([g.vertex_name(v)])),
        }
    }
    let signatures: BTreeMap<String, Value> = g
        .vertices()
        .map(|v| {
            let vals = instance.signature(v).values().iter().map(rational_value).collect();
            (g.vertex_name(v).to_string(), Value::Array(vals))
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("vertices".into(), json!(g.vertex_names()));
    doc.insert("edges".into(), Value::Array(edges));
    if !halves.is_empty() {
        doc.insert("half_edges".into(), Value::Array(halves));
    }
    doc.insert("signatures".into(), serde_json::to_value(signatures).expect("json"));
    Value::Object(doc)
}

pub fn dump_instance(instance: &HolantInstance) -> String {
    serde_json::to_string_pretty(&to_document(instance)).expect("json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holant::SignatureRule;
    use crate::rational::int;

    #[test]
    fn minimal_document() {
        let phi =
            parse_instance(r#"{"vertices":["u","v"],"edges":[["u","v"]],"signatures":{"u":[1,1],"v":[1,1]}}"#).unwrap();
        assert_eq!(phi.graph().edge_count(), 1);
    }

    #[test]
    fn rule_expands_to_degree() {
        let phi = parse_instance(
            r#"{"vertices":["c","a","b","d"],"edges":[["c","a"],["c","b"],["c","d"]],
                "signatures":{"c":"atmost:1","a":"atmost:1","b":"atmost:1","d":"atmost:1"}}"#,
        )
        .unwrap();
        let c = phi.graph().vertex_id("c").unwrap();
        assert_eq!(phi.signature(c).values(), &[int(1), int(1), int(0), int(0)]);
    }

    #[test]
    fn support_gap_is_a_validation_error() {
        let err = parse_instance(r#"{"vertices":["v"],"edges":[],"half_edges":[["v"]],"signatures":{"v":[1,0,1]}}"#)
            .unwrap_err();
        assert!(matches!(err, LoadError::Validation(Violation { .. })));
        let err = parse_instance(
            r#"{"vertices":["u","v"],"edges":[["u","v"]],"half_edges":[["u"],["v"]],"signatures":{"u":[1,0,1],"v":[1,1,1]}}"#,
        )
        .unwrap_err();
        match err {
            LoadError::Validation(v) => assert_eq!(v.rule, SignatureRule::SupportGap { index: 1 }),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn diagnostics_are_located() {
        let err = parse_instance("{\"vertices\": [\"u\",\n 3]}").unwrap_err();
        assert!(
            matches!(err, LoadError::Field { ref path, .. } if path == "vertices[1]"),
            "{err}"
        );
        let err = parse_instance("{\"vertices\": [\n}").unwrap_err();
        assert!(matches!(err, LoadError::Syntax { line: 2, .. }), "{err}");
        let err = parse_instance(r#"{"vertices":["u"],"edges":[],"signatures":{"u":[1,"x"]}}"#).unwrap_err();
        assert!(
            matches!(err, LoadError::Field { ref path, .. } if path == "signatures.u[1]"),
            "{err}"
        );
    }

    #[test]
    fn round_trip() {
        for (_, phi) in crate::fixtures::counting_set() {
            let text = dump_instance(&phi);
            let back = parse_instance(&text).unwrap();
            assert_eq!(dump_instance(&back), text);
        }
    }
}
