//! JSON and Graphviz renderings of the analysis artifacts.
//!
//! Output is a pure function of its inputs: maps are ordered and no clock
//! or environment data is included.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::alts::{AbsMultInfo, AbstractLts};
use crate::concrete::{Lts, MultInfo, TransLabel};
use crate::domain::{AbstractState, Upper};
use crate::dtmc::Dtmc;
use crate::imc::Imc;
use crate::multiset::Multiset;
use crate::termination::ReachBounds;

/// 17 significant digits.
pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

/// An exact probability: decimal rendering plus the rational itself.
pub fn exact_json(p: &BigRational) -> Value {
    json!({ "decimal": decimal(p.to_f64().unwrap_or(f64::NAN)), "exact": p.to_string() })
}

/// A computed value with no exact form.
pub fn float_json(x: f64) -> Value {
    json!({ "decimal": decimal(x) })
}

fn label_json(label: &TransLabel) -> Value {
    match label {
        TransLabel::Single(l) => json!([l.as_str()]),
        TransLabel::Pair(a, b) => json!([a.as_str(), b.as_str()]),
    }
}

fn upper_json(u: Upper) -> Value {
    match u {
        Upper::Finite(n) => json!(n),
        Upper::Infinity => json!("inf"),
    }
}

fn marking_json(m: &Multiset) -> Value {
    Value::Object(m.iter().map(|(k, n)| (k.to_string(), json!(n))).collect())
}

fn abstract_marking_json(s: &AbstractState) -> Value {
    Value::Object(
        s.iter()
            .map(|(k, i)| (k.to_string(), json!([i.lo(), upper_json(i.hi())])))
            .collect(),
    )
}

fn states_json<T>(states: &[T], marking: impl Fn(&T) -> Value) -> Value {
    states
        .iter()
        .enumerate()
        .map(|(id, s)| json!({ "id": id, "marking": marking(s) }))
        .collect()
}

fn delta_json(d: &MultInfo) -> Value {
    match d {
        MultInfo::Single(n) => json!([n]),
        MultInfo::Pair(n, m) => json!([n, m]),
    }
}

fn abs_delta_json(d: &AbsMultInfo) -> Value {
    let one = |i: &crate::domain::Interval| json!([i.lo(), upper_json(i.hi())]);
    match d {
        AbsMultInfo::Single(i) => json!([one(i)]),
        AbsMultInfo::Pair(i, j) => json!([one(i), one(j)]),
    }
}

fn labels_json(labels: Option<&std::collections::BTreeSet<TransLabel>>) -> Value {
    labels.map_or_else(|| json!([]), |ls| ls.iter().map(label_json).collect())
}

/// Concrete analysis: LTS edges, the DTMC matrix, and termination values.
pub fn concrete_json(
    model: &str,
    config: &Value,
    lts: &Lts,
    dtmc: &Dtmc<BigRational>,
    termination: &[f64],
) -> Value {
    let transitions: Vec<Value> = lts
        .edges
        .iter()
        .map(|e| {
            json!({
                "source": e.source,
                "target": e.target,
                "label": label_json(&e.transition.theta),
                "delta": delta_json(&e.transition.delta),
                "rate_param": e.transition.rate_param.to_string(),
                "rate": e.rate.to_string(),
            })
        })
        .collect();
    let matrix: Vec<Value> = dtmc
        .rows
        .iter()
        .enumerate()
        .flat_map(|(s, row)| {
            row.iter().map(move |(t, p)| {
                json!({ "source": s, "target": t, "p": exact_json(p), "labels": labels_json(dtmc.labels.get(&(s, *t))) })
            })
        })
        .collect();
    json!({
        "model": model,
        "mode": "concrete",
        "config": config,
        "states": states_json(&lts.states, marking_json),
        "initial": lts.initial,
        "transitions": transitions,
        "matrix": matrix,
        "termination": {
            "per_state": termination.iter().map(|&x| float_json(x)).collect::<Vec<_>>(),
            "initial": float_json(termination[lts.initial]),
        },
    })
}

/// Abstract analysis: abstract transitions, the IMC, and termination bounds.
pub fn abstract_json(
    model: &str,
    config: &Value,
    alts: &AbstractLts,
    imc: &Imc<BigRational>,
    bounds: &ReachBounds<f64>,
) -> Value {
    let transitions: Vec<Value> = alts
        .edges
        .iter()
        .map(|e| {
            let t = &e.transition;
            json!({
                "source": e.source,
                "target": e.target,
                "label": label_json(&t.theta),
                "delta": abs_delta_json(&t.delta),
                "rate_param": t.rate_param.to_string(),
                "splits": t.split_tags.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let matrix: Vec<Value> = imc
        .rows
        .iter()
        .enumerate()
        .flat_map(|(s, row)| {
            row.iter().map(move |e| {
                json!({
                    "source": s,
                    "target": e.target,
                    "lo": exact_json(&e.lo),
                    "hi": exact_json(&e.hi),
                    "labels": labels_json(imc.labels.get(&(s, e.target))),
                })
            })
        })
        .collect();
    let pair = |(lo, hi): (f64, f64)| json!([float_json(lo), float_json(hi)]);
    let replacements: Vec<Value> = alts
        .replacements
        .iter()
        .map(|(s, by)| json!({ "replaced": abstract_marking_json(s), "by": by }))
        .collect();
    json!({
        "model": model,
        "mode": "abstract",
        "config": config,
        "states": states_json(&alts.states, abstract_marking_json),
        "initial": alts.initial,
        "widening_replacements": replacements,
        "transitions": transitions,
        "matrix": matrix,
        "fallback_used": imc.fallback_used,
        "termination": {
            "per_state": (0..imc.len()).map(|s| pair(bounds.at(s))).collect::<Vec<_>>(),
            "initial": pair(bounds.at(imc.initial)),
            "converged": bounds.converged,
        },
    })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot<T: std::fmt::Display>(
    name: &str,
    states: &[T],
    initial: usize,
    node_extra: impl Fn(usize) -> String,
    edges: impl Iterator<Item = (usize, usize, String)>,
) -> String {
    let mut out = format!("digraph {name} {{\n  node [shape=box];\n");
    for (i, s) in states.iter().enumerate() {
        let style = if i == initial { ", penwidth=2" } else { "" };
        let _ = writeln!(
            out,
            "  s{i} [label=\"{i}: {}{}\"{style}];",
            escape(&s.to_string()),
            node_extra(i)
        );
    }
    for (s, t, label) in edges {
        let _ = writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", escape(&label));
    }
    out.push_str("}\n");
    out
}

fn label_set(labels: Option<&std::collections::BTreeSet<TransLabel>>) -> String {
    let parts: Vec<String> = labels
        .into_iter()
        .flatten()
        .map(|l| l.to_string())
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// Edges labelled `Θ | Δ | r`.
pub fn lts_dot(lts: &Lts) -> String {
    let edges = lts.edges.iter().map(|e| {
        let t = &e.transition;
        (
            e.source,
            e.target,
            format!("{} | {} | {}", t.theta, t.delta, t.rate_param),
        )
    });
    dot("lts", &lts.states, lts.initial, |_| String::new(), edges)
}

/// Edges labelled `L | p`.
pub fn dtmc_dot(dtmc: &Dtmc<BigRational>) -> String {
    let edges = dtmc.rows.iter().enumerate().flat_map(|(s, row)| {
        row.iter().map(move |(t, p)| {
            (
                s,
                *t,
                format!("{} | {p}", label_set(dtmc.labels.get(&(s, *t)))),
            )
        })
    });
    dot("dtmc", &dtmc.states, dtmc.initial, |_| String::new(), edges)
}

/// Edges labelled `Θ | Δ̂ | r`.
pub fn alts_dot(alts: &AbstractLts) -> String {
    let edges = alts.edges.iter().map(|e| {
        let t = &e.transition;
        (
            e.source,
            e.target,
            format!("{} | {} | {}", t.theta, t.delta, t.rate_param),
        )
    });
    dot("alts", &alts.states, alts.initial, |_| String::new(), edges)
}

/// Edges labelled `L | [lo,hi]`; with `bounds`, nodes also show the
/// termination interval.
pub fn imc_dot(imc: &Imc<BigRational>, bounds: Option<&ReachBounds<f64>>) -> String {
    let edges = imc.rows.iter().enumerate().flat_map(|(s, row)| {
        row.iter().map(move |e| {
            (
                s,
                e.target,
                format!(
                    "{} | [{},{}]",
                    label_set(imc.labels.get(&(s, e.target))),
                    e.lo,
                    e.hi
                ),
            )
        })
    });
    let extra = |s: usize| {
        bounds.map_or_else(String::new, |b| {
            format!("\\nreach [{:.6}, {:.6}]", b.lo[s], b.hi[s])
        })
    };
    dot("imc", &imc.states, imc.initial, extra, edges)
}

/// Reads back the `states` and `matrix` of an abstract report.
pub fn imc_from_json(doc: &Value) -> Option<Imc<BigRational>> {
    use crate::domain::Interval;
    use crate::model::{Label, Name};
    use std::collections::{BTreeMap, BTreeSet};

    let rational = |v: &Value| v.get("exact")?.as_str()?.parse::<BigRational>().ok();
    let label = |v: &Value| -> Option<TransLabel> {
        let parts: Vec<&str> = v
            .as_array()?
            .iter()
            .map(Value::as_str)
            .collect::<Option<_>>()?;
        match parts[..] {
            [a] => Some(TransLabel::Single(Label::new(a))),
            [a, b] => Some(TransLabel::Pair(Label::new(a), Label::new(b))),
            _ => None,
        }
    };
    let mut states = Vec::new();
    for s in doc.get("states")?.as_array()? {
        let mut state = AbstractState::new();
        let marking: &Map<String, Value> = s.get("marking")?.as_object()?;
        for (k, v) in marking {
            let lo = v.get(0)?.as_u64()?;
            let hi = match v.get(1)? {
                Value::String(s) if s == "inf" => Upper::Infinity,
                other => Upper::Finite(other.as_u64()?),
            };
            state.set(Name::new(k).ok()?, Interval::new(lo, hi).ok()?);
        }
        states.push(state);
    }
    let mut rows: Vec<Vec<crate::imc::ImcEntry<BigRational>>> = vec![Vec::new(); states.len()];
    let mut labels: BTreeMap<(usize, usize), BTreeSet<TransLabel>> = BTreeMap::new();
    for e in doc.get("matrix")?.as_array()? {
        let s = usize::try_from(e.get("source")?.as_u64()?).ok()?;
        let t = usize::try_from(e.get("target")?.as_u64()?).ok()?;
        rows.get_mut(s)?.push(crate::imc::ImcEntry {
            target: t,
            lo: rational(e.get("lo")?)?,
            hi: rational(e.get("hi")?)?,
        });
        let ls: BTreeSet<TransLabel> = e
            .get("labels")?
            .as_array()?
            .iter()
            .map(label)
            .collect::<Option<_>>()?;
        if !ls.is_empty() {
            labels.insert((s, t), ls);
        }
    }
    let initial = usize::try_from(doc.get("initial")?.as_u64()?).ok()?;
    Some(Imc {
        states,
        rows,
        labels,
        initial,
        fallback_used: doc.get("fallback_used")?.as_bool()?,
    })
}
