//! JSON formats for instances and shapes, and a float-exact JSON printer.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{
    CenterSet, ExistentialInstance, Flat, Instance, LocationalInstance, Point, Shape,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
enum InstanceFile {
    Existential {
        d: usize,
        points: Vec<PointEntry>,
    },
    Locational {
        d: usize,
        locations: Vec<Vec<f64>>,
        nodes: Vec<NodeEntry>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointEntry {
    coords: Vec<f64>,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    probs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ShapeFile {
    Centers {
        points: Vec<Vec<f64>>,
    },
    Flat {
        j: usize,
        base: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    match file {
        InstanceFile::Existential { d, points } => {
            let (pts, probs) = points.into_iter().map(|e| (Point(e.coords), e.p)).unzip();
            Ok(ExistentialInstance::new(d, pts, probs)?.into())
        }
        InstanceFile::Locational {
            d,
            locations,
            nodes,
        } => Ok(LocationalInstance::new(
            d,
            locations.into_iter().map(Point).collect(),
            nodes.into_iter().map(|n| n.probs).collect(),
        )?
        .into()),
    }
}

pub fn instance_to_value(instance: &Instance) -> Value {
    let file = match instance {
        Instance::Existential(e) => InstanceFile::Existential {
            d: e.d(),
            points: e
                .points()
                .iter()
                .zip(e.probs())
                .map(|(pt, &p)| PointEntry {
                    coords: pt.0.clone(),
                    p,
                })
                .collect(),
        },
        Instance::Locational(l) => InstanceFile::Locational {
            d: l.d(),
            locations: l.locations().iter().map(|p| p.0.clone()).collect(),
            nodes: l
                .probs()
                .iter()
                .map(|r| NodeEntry { probs: r.clone() })
                .collect(),
        },
    };
    serde_json::to_value(file).expect("instance serializes")
}

pub fn parse_shape(text: &str) -> Result<Shape> {
    let file: ShapeFile = serde_json::from_str(text)?;
    match file {
        ShapeFile::Centers { points } => Ok(Shape::Centers(CenterSet::new(
            points.into_iter().map(Point).collect(),
        )?)),
        ShapeFile::Flat { j, base, basis } => {
            if basis.len() != j {
                return Err(Error::InvalidArgument(format!(
                    "flat has j={j} but {} basis vectors",
                    basis.len()
                )));
            }
            Ok(Shape::Flat(Flat::new(Point(base), basis)?))
        }
    }
}

pub fn shape_to_value(shape: &Shape) -> Value {
    let file = match shape {
        Shape::Centers(c) => ShapeFile::Centers {
            points: c
                .canonical()
                .centers()
                .iter()
                .map(|p| p.0.clone())
                .collect(),
        },
        Shape::Flat(f) => ShapeFile::Flat {
            j: f.j(),
            base: f.base().0.clone(),
            basis: f.basis().to_vec(),
        },
    };
    serde_json::to_value(file).expect("shape serializes")
}

/// A float with 17 significant digits, which round-trips every f64. Negative
/// zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Pretty JSON in which every non-integer number carries 17 significant digits.
pub fn to_json17(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) if items.iter().all(|x| x.is_number()) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(x, depth, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(x, depth + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, depth + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(depth, out);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}
