//! JSON documents for instances, solutions and assignments.
//!
//! Rationals are written as JSON integers when they fit in an `i64` and as
//! `"num/den"` strings otherwise. Readers also accept decimal strings such
//! as `"0.25"`; JSON numbers with a fraction part are refused so nothing
//! passes through floating point.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::formulations::Assignment;
use crate::instance::{Instance, NodeId, NodeSense, Solution, Variant};
use crate::rational::{self, Rational};

pub const FORMAT_VERSION: u64 = 1;

/// An instance together with the free-form provenance block it was stored
/// with.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceDocument {
    pub instance: Instance,
    pub provenance: Option<Value>,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), message: message.into() }
}

pub fn rational_value(r: &Rational) -> Value {
    match r.is_integer().then(|| r.numer().to_i64()).flatten() {
        Some(v) => Value::from(v),
        None => Value::from(rational::to_text(r)),
    }
}

pub fn rational_from(value: &Value, location: &str) -> Result<Rational> {
    match value {
        Value::Number(n) => {
            if let Some(v) = n.as_i64() {
                Ok(rational::int(v))
            } else if let Some(v) = n.as_u64() {
                Ok(rational::from_u64(v))
            } else {
                Err(parse_err(location, format!("{n} is not an integer; write fractions as \"num/den\" strings")))
            }
        }
        Value::String(s) => rational::parse(s).ok_or_else(|| parse_err(location, format!("`{s}` is not a rational"))),
        other => Err(parse_err(location, format!("expected a number or string, found {other}"))),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, location: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(location, format!("missing field `{key}`")))
}

fn object<'a>(value: &'a Value, location: &str) -> Result<&'a Map<String, Value>> {
    value.as_object().ok_or_else(|| parse_err(location, "expected an object"))
}

fn array<'a>(value: &'a Value, location: &str) -> Result<&'a Vec<Value>> {
    value.as_array().ok_or_else(|| parse_err(location, "expected an array"))
}

fn node_id(value: &Value, location: &str) -> Result<NodeId> {
    value
        .as_u64()
        .and_then(|v| NodeId::try_from(v).ok())
        .ok_or_else(|| parse_err(location, format!("{value} is not a node id")))
}

fn parse_text(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

pub fn instance_to_value(inst: &Instance, provenance: Option<&Value>) -> Value {
    let nodes: Vec<Value> = inst.nodes().map(|v| json!({ "id": v, "b": inst.capacity(v) })).collect();
    let arcs: Vec<Value> = inst
        .arcs()
        .iter()
        .map(|a| json!({ "i": a.i, "j": a.j, "p": rational_value(&a.p), "q": rational_value(&a.q) }))
        .collect();
    let senses: Map<String, Value> =
        inst.variant().equality_nodes().map(|v| (v.to_string(), Value::from("EQ"))).collect();
    let mut doc = json!({
        "version": FORMAT_VERSION,
        "nodes": nodes,
        "arcs": arcs,
        "variant": { "node_sense": senses, "link_lower": inst.variant().link_lower },
    });
    if let Some(p) = provenance {
        doc["provenance"] = p.clone();
    }
    doc
}

/// Pretty-printed document with a trailing newline.
pub fn instance_to_string(inst: &Instance, provenance: Option<&Value>) -> String {
    let mut text = serde_json::to_string_pretty(&instance_to_value(inst, provenance)).expect("serializable");
    text.push('\n');
    text
}

pub fn instance_from_value(doc: &Value) -> Result<InstanceDocument> {
    let root = object(doc, "$")?;
    if let Some(version) = root.get("version") {
        if version.as_u64() != Some(FORMAT_VERSION) {
            return Err(parse_err("$.version", format!("unsupported version {version}")));
        }
    }
    let nodes = array(field(root, "nodes", "$")?, "$.nodes")?;
    let mut b = vec![None; nodes.len()];
    for (idx, node) in nodes.iter().enumerate() {
        let loc = format!("$.nodes[{idx}]");
        let obj = object(node, &loc)?;
        let id = node_id(field(obj, "id", &loc)?, &format!("{loc}.id"))?;
        if id == 0 || id as usize > nodes.len() {
            return Err(parse_err(format!("{loc}.id"), format!("ids must be 1..={}", nodes.len())));
        }
        if b[id as usize - 1].is_some() {
            return Err(parse_err(format!("{loc}.id"), format!("node {id} listed twice")));
        }
        let cap = rational_from(field(obj, "b", &loc)?, &format!("{loc}.b"))?;
        let value = cap
            .is_integer()
            .then(|| cap.numer().to_i64())
            .flatten()
            .filter(|v| *v >= 0)
            .ok_or_else(|| Error::NonIntegerCapacity { node: id, value: rational::to_text(&cap) })?;
        b[id as usize - 1] = Some(value);
    }
    let b: Vec<i64> = b.into_iter().map(|v| v.expect("ids are a permutation")).collect();

    let arc_list = array(field(root, "arcs", "$")?, "$.arcs")?;
    let mut arcs = Vec::with_capacity(arc_list.len());
    let mut p = Vec::with_capacity(arc_list.len());
    let mut q = Vec::with_capacity(arc_list.len());
    for (idx, arc) in arc_list.iter().enumerate() {
        let loc = format!("$.arcs[{idx}]");
        let obj = object(arc, &loc)?;
        let i = node_id(field(obj, "i", &loc)?, &format!("{loc}.i"))?;
        let j = node_id(field(obj, "j", &loc)?, &format!("{loc}.j"))?;
        arcs.push((i, j));
        p.push(rational_from(field(obj, "p", &loc)?, &format!("{loc}.p"))?);
        q.push(rational_from(field(obj, "q", &loc)?, &format!("{loc}.q"))?);
    }

    let variant = match root.get("variant") {
        None | Some(Value::Null) => Variant::default(),
        Some(v) => {
            let obj = object(v, "$.variant")?;
            let link_lower = match obj.get("link_lower") {
                None => false,
                Some(flag) => flag.as_bool().ok_or_else(|| parse_err("$.variant.link_lower", "expected a boolean"))?,
            };
            let mut senses = Vec::new();
            match obj.get("node_sense") {
                None | Some(Value::Null) => {}
                Some(Value::String(s)) if s == "default" => {}
                Some(map) => {
                    for (key, sense) in object(map, "$.variant.node_sense")? {
                        let loc = format!("$.variant.node_sense.{key}");
                        let node: NodeId = key.parse().map_err(|_| parse_err(&loc, "key is not a node id"))?;
                        let sense = match sense.as_str() {
                            Some("EQ") => NodeSense::Eq,
                            Some("LE") => NodeSense::Le,
                            _ => return Err(parse_err(&loc, format!("sense {sense} is neither \"LE\" nor \"EQ\""))),
                        };
                        senses.push((node, sense));
                    }
                }
            }
            Variant::new(senses, link_lower)
        }
    };
    let instance = Instance::new(b, arcs, p, q, variant)?;
    Ok(InstanceDocument { instance, provenance: root.get("provenance").cloned() })
}

pub fn instance_from_str(text: &str) -> Result<InstanceDocument> {
    instance_from_value(&parse_text(text)?)
}

pub fn read_document(path: &Path) -> Result<InstanceDocument> {
    instance_from_str(&std::fs::read_to_string(path)?)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    Ok(read_document(path)?.instance)
}

pub fn write_document(doc: &InstanceDocument, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_string(&doc.instance, doc.provenance.as_ref()))?;
    Ok(())
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_string(inst, None))?;
    Ok(())
}

pub fn solution_to_value(inst: &Instance, sol: &Solution) -> Value {
    let arcs: Vec<Value> = inst
        .arcs()
        .iter()
        .zip(sol.x.iter().zip(&sol.y))
        .map(|(a, (x, y))| json!({ "i": a.i, "j": a.j, "x": x, "y": u8::from(*y) }))
        .collect();
    json!({ "objective": rational_value(&sol.objective), "arcs": arcs })
}

pub fn solution_to_string(inst: &Instance, sol: &Solution) -> String {
    let mut text = serde_json::to_string_pretty(&solution_to_value(inst, sol)).expect("serializable");
    text.push('\n');
    text
}

/// Reads a solution written for `inst`; arcs may appear in any order and
/// unlisted arcs carry no flow. The objective is recomputed and must match
/// the stored one when present.
pub fn solution_from_str(inst: &Instance, text: &str) -> Result<Solution> {
    let doc = parse_text(text)?;
    let root = object(&doc, "$")?;
    let mut x = vec![0u64; inst.num_arcs()];
    let mut y = vec![false; inst.num_arcs()];
    for (idx, arc) in array(field(root, "arcs", "$")?, "$.arcs")?.iter().enumerate() {
        let loc = format!("$.arcs[{idx}]");
        let obj = object(arc, &loc)?;
        let i = node_id(field(obj, "i", &loc)?, &format!("{loc}.i"))?;
        let j = node_id(field(obj, "j", &loc)?, &format!("{loc}.j"))?;
        let e = inst.find_arc(i, j).ok_or_else(|| parse_err(&loc, format!("no arc {{{i},{j}}}")))?;
        x[e] = field(obj, "x", &loc)?
            .as_u64()
            .ok_or_else(|| parse_err(format!("{loc}.x"), "expected a nonnegative integer"))?;
        y[e] = match field(obj, "y", &loc)?.as_u64() {
            Some(0) => false,
            Some(1) => true,
            _ => return Err(parse_err(format!("{loc}.y"), "expected 0 or 1")),
        };
    }
    let sol = Solution::new(inst, x, y);
    if let Some(stored) = root.get("objective") {
        let stored = rational_from(stored, "$.objective")?;
        if stored != sol.objective {
            return Err(parse_err(
                "$.objective",
                format!(
                    "stored {} but the flows cost {}",
                    rational::to_text(&stored),
                    rational::to_text(&sol.objective)
                ),
            ));
        }
    }
    Ok(sol)
}

/// `{"claims_integrality": bool, "objective": "n/d"?, "values": {name: "n/d"}}`.
/// Zero entries are omitted.
pub fn assignment_to_value(pt: &Assignment, objective: Option<&Rational>) -> Value {
    let values: Map<String, Value> = pt
        .values
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, v)| (k.clone(), Value::from(rational::to_text(v))))
        .collect();
    let mut doc = json!({ "claims_integrality": pt.claims_integrality, "values": values });
    if let Some(obj) = objective {
        doc["objective"] = Value::from(rational::to_text(obj));
    }
    doc
}

pub fn assignment_to_string(pt: &Assignment, objective: Option<&Rational>) -> String {
    let mut text = serde_json::to_string_pretty(&assignment_to_value(pt, objective)).expect("serializable");
    text.push('\n');
    text
}

pub fn assignment_from_str(text: &str) -> Result<(Assignment, Option<Rational>)> {
    let doc = parse_text(text)?;
    let root = object(&doc, "$")?;
    let claims = match root.get("claims_integrality") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| parse_err("$.claims_integrality", "expected a boolean"))?,
    };
    let mut values = BTreeMap::new();
    for (name, v) in object(field(root, "values", "$")?, "$.values")? {
        values.insert(name.clone(), rational_from(v, &format!("$.values.{name}"))?);
    }
    let objective = root.get("objective").map(|v| rational_from(v, "$.objective")).transpose()?;
    Ok((Assignment { values, claims_integrality: claims }, objective))
}
