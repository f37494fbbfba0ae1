//! JSON game format.
//!
//! ```text
//! {"kind":"discounted"|"energy"|"mpd", "lambda":[num,den]?, "threshold":[num,den]?,
//!  "nodes":[{"id":str,"owner":"max"|"min"}],
//!  "edges":[{"from":str,"to":str,"weight":[num,den] | {"base":[num,den],"rho":[num,den]}}]}
//! ```
//!
//! Serialization is canonical: keys in the order above, nodes and edges in
//! input order, rationals in lowest terms, no whitespace.

use std::collections::HashMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::game::{Edge, GameKind, GameSpec, Node, Owner};
use crate::weight::{LexWeight, Rational, WeightValue};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

fn schema<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Schema { path: path.into(), message: message.into() })
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::Array(vec![bigint_to_json(r.numer()), bigint_to_json(r.denom())])
}

fn bigint_to_json(i: &BigInt) -> Value {
    Value::Number(Number::from_str(&i.to_string()).expect("integers are valid JSON numbers"))
}

pub fn weight_to_json(w: &WeightValue) -> Value {
    match w {
        WeightValue::Rational(r) => rational_to_json(r),
        WeightValue::Lex(l) => {
            let mut m = Map::new();
            m.insert("base".into(), rational_to_json(&l.base));
            m.insert("rho".into(), rational_to_json(&l.rho));
            Value::Object(m)
        }
    }
}

fn integer_at(v: &Value, path: &str) -> Result<BigInt, ParseError> {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            BigInt::from_str(&text)
                .or_else(|_| schema(path, format!("non-integer rational component {text}")))
        }
        _ => schema(path, "rational component must be an integer"),
    }
}

pub fn rational_from_json(v: &Value, path: &str) -> Result<Rational, ParseError> {
    let Some(parts) = v.as_array() else {
        return schema(path, "rational must be a [num, den] array");
    };
    if parts.len() != 2 {
        return schema(path, "rational must have exactly two components");
    }
    let num = integer_at(&parts[0], &format!("{path}[0]"))?;
    let den = integer_at(&parts[1], &format!("{path}[1]"))?;
    if den.is_zero() {
        return schema(format!("{path}[1]"), "zero denominator");
    }
    Ok(Rational::new(num, den))
}

fn weight_from_json(v: &Value, path: &str) -> Result<WeightValue, ParseError> {
    match v {
        Value::Object(m) => {
            for key in m.keys() {
                if key != "base" && key != "rho" {
                    return schema(format!("{path}.{key}"), "unknown key in lexicographic weight");
                }
            }
            let base = m.get("base").map_or_else(
                || schema(format!("{path}.base"), "missing field"),
                |b| rational_from_json(b, &format!("{path}.base")),
            )?;
            let rho = m.get("rho").map_or_else(
                || schema(format!("{path}.rho"), "missing field"),
                |r| rational_from_json(r, &format!("{path}.rho")),
            )?;
            Ok(WeightValue::Lex(LexWeight::new(base, rho)))
        }
        _ => rational_from_json(v, path).map(WeightValue::Rational),
    }
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, ParseError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => schema(format!("{path}.{key}"), "expected a string"),
        None => schema(format!("{path}.{key}"), "missing field"),
    }
}

pub fn parse_game(text: &[u8]) -> Result<GameSpec, ParseError> {
    let root: Value = serde_json::from_slice(text)?;
    game_from_value(&root)
}

pub fn game_from_value(root: &Value) -> Result<GameSpec, ParseError> {
    let Some(obj) = root.as_object() else {
        return schema("$", "top level must be an object");
    };
    for key in obj.keys() {
        if !["kind", "lambda", "threshold", "nodes", "edges"].contains(&key.as_str()) {
            return schema(format!("$.{key}"), "unknown key");
        }
    }
    let kind = match str_field(obj, "kind", "$")? {
        "discounted" => {
            let Some(l) = obj.get("lambda") else {
                return schema("$.lambda", "discounted games need a discount factor");
            };
            GameKind::Discounted { lambda: rational_from_json(l, "$.lambda")? }
        }
        "energy" => GameKind::Energy,
        "mpd" => {
            let Some(t) = obj.get("threshold") else {
                return schema("$.threshold", "mean-payoff decision games need a threshold");
            };
            GameKind::MeanPayoffDecision { threshold: rational_from_json(t, "$.threshold")? }
        }
        other => return schema("$.kind", format!("unknown game kind {other:?}")),
    };
    if !matches!(kind, GameKind::Discounted { .. }) && obj.contains_key("lambda") {
        return schema("$.lambda", "only discounted games take a discount factor");
    }
    if !matches!(kind, GameKind::MeanPayoffDecision { .. }) && obj.contains_key("threshold") {
        return schema("$.threshold", "only mpd games take a threshold");
    }

    let Some(raw_nodes) = obj.get("nodes").and_then(Value::as_array) else {
        return schema("$.nodes", "expected an array of nodes");
    };
    let mut nodes = Vec::with_capacity(raw_nodes.len());
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, raw) in raw_nodes.iter().enumerate() {
        let path = format!("$.nodes[{i}]");
        let Some(n) = raw.as_object() else {
            return schema(path, "node must be an object");
        };
        let id = str_field(n, "id", &path)?.to_string();
        let owner = match str_field(n, "owner", &path)? {
            "max" => Owner::Max,
            "min" => Owner::Min,
            other => return schema(format!("{path}.owner"), format!("unknown owner {other:?}")),
        };
        if index.insert(id.clone(), i).is_some() {
            return schema(format!("{path}.id"), format!("duplicate node id {id:?}"));
        }
        nodes.push(Node { id, owner });
    }

    let Some(raw_edges) = obj.get("edges").and_then(Value::as_array) else {
        return schema("$.edges", "expected an array of edges");
    };
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (i, raw) in raw_edges.iter().enumerate() {
        let path = format!("$.edges[{i}]");
        let Some(e) = raw.as_object() else {
            return schema(path, "edge must be an object");
        };
        let endpoint = |key: &str| -> Result<usize, ParseError> {
            let id = str_field(e, key, &path)?;
            index
                .get(id)
                .copied()
                .map_or_else(|| schema(format!("{path}.{key}"), format!("unknown node {id:?}")), Ok)
        };
        let from = endpoint("from")?;
        let to = endpoint("to")?;
        let Some(w) = e.get("weight") else {
            return schema(format!("{path}.weight"), "missing field");
        };
        let weight = weight_from_json(w, &format!("{path}.weight"))?;
        edges.push(Edge { from, to, weight });
    }
    Ok(GameSpec { kind, nodes, edges })
}

pub fn game_to_value(spec: &GameSpec) -> Value {
    let mut root = Map::new();
    root.insert("kind".into(), Value::String(spec.kind.tag().into()));
    match &spec.kind {
        GameKind::Discounted { lambda } => {
            root.insert("lambda".into(), rational_to_json(lambda));
        }
        GameKind::MeanPayoffDecision { threshold } => {
            root.insert("threshold".into(), rational_to_json(threshold));
        }
        GameKind::Energy => {}
    }
    let nodes = spec
        .nodes
        .iter()
        .map(|n| {
            let mut m = Map::new();
            m.insert("id".into(), Value::String(n.id.clone()));
            m.insert("owner".into(), Value::String(n.owner.tag().into()));
            Value::Object(m)
        })
        .collect();
    root.insert("nodes".into(), Value::Array(nodes));
    let edges = spec
        .edges
        .iter()
        .map(|e| {
            let mut m = Map::new();
            m.insert("from".into(), Value::String(spec.nodes[e.from].id.clone()));
            m.insert("to".into(), Value::String(spec.nodes[e.to].id.clone()));
            m.insert("weight".into(), weight_to_json(&e.weight));
            Value::Object(m)
        })
        .collect();
    root.insert("edges".into(), Value::Array(edges));
    Value::Object(root)
}

/// Canonical byte serialization.
pub fn serialize_game(spec: &GameSpec) -> Vec<u8> {
    serde_json::to_vec(&game_to_value(spec)).expect("values serialize")
}

/// `{"values": {node-id: [num,den]}}` in node order.
pub fn values_to_json(spec: &GameSpec, values: &[Rational]) -> Value {
    let mut m = Map::new();
    for (node, v) in spec.nodes.iter().zip(values) {
        m.insert(node.id.clone(), rational_to_json(v));
    }
    let mut root = Map::new();
    root.insert("values".into(), Value::Object(m));
    Value::Object(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::*;
    use crate::weight::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn one_node_round_trip() {
        let g = discounted((1, 2), vec![node("a", Owner::Max)], vec![edge(0, 0, 1)]);
        let bytes = serialize_game(&g);
        assert_eq!(
            std::str::from_utf8(&bytes).unwrap(),
            r#"{"kind":"discounted","lambda":[1,2],"nodes":[{"id":"a","owner":"max"}],"edges":[{"from":"a","to":"a","weight":[1,1]}]}"#
        );
        assert_eq!(parse_game(&bytes).unwrap(), g);
    }

    #[test]
    fn unknown_owner_names_the_field() {
        let text = br#"{"kind":"energy","nodes":[{"id":"a","owner":"middle"}],"edges":[]}"#;
        match parse_game(text) {
            Err(ParseError::Schema { path, message }) => {
                assert_eq!(path, "$.nodes[0].owner");
                assert!(message.contains("middle"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn weights_are_reduced() {
        let text = br#"{"kind":"energy","nodes":[{"id":"a","owner":"max"}],
            "edges":[{"from":"a","to":"a","weight":[3,2]},{"from":"a","to":"a","weight":[6,-4]}]}"#;
        let g = parse_game(text).unwrap();
        assert_eq!(g.edges[0].weight, WeightValue::Rational(rat(3, 2)));
        assert_eq!(g.edges[1].weight, WeightValue::Rational(rat(-3, 2)));
    }

    #[test]
    fn schema_errors_carry_locations() {
        let cases: &[(&[u8], &str)] = &[
            (br#"{"kind":"energy","nodes":[{"id":"a","owner":"max"},{"id":"a","owner":"min"}],"edges":[]}"#, "$.nodes[1].id"),
            (br#"{"kind":"energy","nodes":[{"id":"a","owner":"max"}],"edges":[{"from":"a","to":"a","weight":[1.5,2]}]}"#, "$.edges[0].weight[0]"),
            (br#"{"kind":"energy","nodes":[{"id":"a","owner":"max"}],"edges":[{"from":"a","to":"z","weight":[1,2]}]}"#, "$.edges[0].to"),
            (br#"{"kind":"discounted","nodes":[],"edges":[]}"#, "$.lambda"),
            (br#"{"kind":"energy","nodes":[],"edges":[],"extra":1}"#, "$.extra"),
            (br#"{"kind":"energy","nodes":[{"id":"a","owner":"max"}],"edges":[{"from":"a","to":"a","weight":[1,0]}]}"#, "$.edges[0].weight[1]"),
        ];
        for (text, want) in cases {
            match parse_game(text) {
                Err(ParseError::Schema { path, .. }) => assert_eq!(&path, want),
                other => panic!("{want}: unexpected {other:?}"),
            }
        }
        assert!(matches!(parse_game(b"{nope"), Err(ParseError::Json(_))));
    }

    #[test]
    fn lex_weights_and_big_integers() {
        let big = "123456789012345678901234567890";
        let text = format!(
            r#"{{"kind":"energy","nodes":[{{"id":"a","owner":"min"}}],"edges":[{{"from":"a","to":"a","weight":{{"base":[{big},1],"rho":[1,1]}}}}]}}"#
        );
        let g = parse_game(text.as_bytes()).unwrap();
        let WeightValue::Lex(l) = &g.edges[0].weight else { panic!() };
        assert_eq!(l.base.numer().to_string(), big);
        assert_eq!(l.rho, int(1));
        assert_eq!(serialize_game(&g), text.as_bytes());
    }

    fn arb_game() -> impl Strategy<Value = GameSpec> {
        (1usize..5).prop_flat_map(|n| {
            let owners = proptest::collection::vec(any::<bool>(), n);
            let edges = proptest::collection::vec((0..n, 0..n, -20i64..20, 1i64..7, any::<bool>()), 0..8);
            let kind = (0u8..3, 1i64..9);
            (owners, edges, kind).prop_map(|(owners, edges, (k, d))| {
                let nodes = owners
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| node(&format!("n{i}"), if m { Owner::Max } else { Owner::Min }))
                    .collect();
                let lex = k == 1;
                let edges = edges
                    .into_iter()
                    .map(|(f, t, num, den, _)| Edge {
                        from: f,
                        to: t,
                        weight: if lex {
                            WeightValue::Lex(LexWeight::new(rat(num, den), int(1)))
                        } else {
                            WeightValue::Rational(rat(num, den))
                        },
                    })
                    .collect();
                let kind = match k {
                    0 => GameKind::Discounted { lambda: rat(1, d + 1) },
                    1 => GameKind::Energy,
                    _ => GameKind::MeanPayoffDecision { threshold: rat(-d, 3) },
                };
                GameSpec::new(kind, nodes, edges)
            })
        })
    }

    proptest! {
        #[test]
        fn serialization_round_trips(g in arb_game()) {
            let bytes = serialize_game(&g);
            let back = parse_game(&bytes).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(serialize_game(&back), bytes);
        }
    }
}
