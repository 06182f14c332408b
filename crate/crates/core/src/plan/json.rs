//! Plan files: a JSON document with a `kind` discriminator.
//!
//! Schemas (variables and relations by name; `cache_size` maps omit zeroes):
//!
//! ```text
//! gj:   {"kind":"gj","order":["A","B",...]}
//! pt:   {"kind":"pt","tree":{"var":"B","children":[...]}}
//! ptc:  {"kind":"ptc","tree":...,"caches":["B",...]}
//! ptcr: {"kind":"ptcr","tree":...,"cache_size":{"E":1,...}}
//! rpt:  {"kind":"rpt","base":{"inputs":[...],"tree":...,"cache_size":{...}},
//!        "replacements":[{"anchor":"F","sub":{"base":...,"replacements":[...]}}]}
//! td:   {"kind":"td","bags":[["A","B"],...],"root":0,"edges":[[parent,child],...],
//!        "covering":{"R1":0,...},"inner":[<plan>,...]}
//! ```
//!
//! Children, bags, and map keys are kept in canonical (name-sorted) order, so
//! printing a parsed plan reproduces it byte for byte.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::query::{Query, VarId, VarSet};

use super::{GjPlan, Plan, PtPlan, PtcPlan, PtcrPlan, RptPlan, TdPlan, Tree, TreeDec};

#[derive(Debug, Error)]
pub enum PlanJsonError {
    #[error("plan JSON: {0}")]
    Malformed(String),
    #[error("plan references unknown variable `{0}`")]
    UnknownVar(String),
    #[error("plan references unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown plan kind `{0}`")]
    UnknownKind(String),
    #[error("tree is not well formed: {0}")]
    BadTree(String),
}

pub fn plan_to_json(q: &Query, plan: &Plan) -> Value {
    match plan {
        Plan::Gj(gj) => json!({
            "kind": "gj",
            "order": gj.order.iter().map(|v| q.var_name(*v)).collect::<Vec<_>>(),
        }),
        Plan::Pt(pt) => json!({
            "kind": "pt",
            "tree": tree_to_json(q, &pt.tree, pt.tree.root()),
        }),
        Plan::Ptc(ptc) => {
            let mut caches: Vec<&str> =
                ptc.caches.iter().map(|v| q.var_name(v)).collect();
            caches.sort_unstable();
            json!({
                "kind": "ptc",
                "tree": tree_to_json(q, &ptc.tree, ptc.tree.root()),
                "caches": caches,
            })
        }
        Plan::Ptcr(ptcr) => json!({
            "kind": "ptcr",
            "tree": tree_to_json(q, &ptcr.tree, ptcr.tree.root()),
            "cache_size": cache_map(q, &ptcr.tree, |v| ptcr.cache(v)),
        }),
        Plan::Rpt(rpt) => {
            let mut o = rpt_to_json(q, rpt);
            o.as_object_mut()
                .unwrap()
                .insert("kind".into(), Value::String("rpt".into()));
            o
        }
        Plan::Td(td) => {
            let bags: Vec<Value> = td
                .td
                .bags
                .iter()
                .map(|b| {
                    let mut names: Vec<&str> = b.iter().map(|v| q.var_name(v)).collect();
                    names.sort_unstable();
                    json!(names)
                })
                .collect();
            let mut edges: Vec<Value> = (0..td.td.bags.len())
                .filter_map(|v| td.td.parent[v].map(|p| json!([p, v])))
                .collect();
            edges.sort_by_key(|e| e.to_string());
            let mut covering = Map::new();
            for (i, atom) in q.atoms().iter().enumerate() {
                covering.insert(atom.name.clone(), json!(td.td.covering[i]));
            }
            let inner: Vec<Value> = {
                let bags_q = super::td_subqueries(q, &td.td);
                bags_q
                    .iter()
                    .map(|b| plan_to_json(&b.query, &td.inner[b.node]))
                    .collect()
            };
            json!({
                "kind": "td",
                "bags": bags,
                "root": td.td.root,
                "edges": edges,
                "covering": covering,
                "inner": inner,
            })
        }
    }
}

fn rpt_to_json(q: &Query, rpt: &RptPlan) -> Value {
    let replacements: Vec<Value> = rpt
        .replacements
        .iter()
        .map(|(a, sub)| {
            json!({
                "anchor": q.var_name(*a),
                "sub": rpt_to_json(q, sub),
            })
        })
        .collect();
    json!({
        "base": {
            "inputs": rpt.inputs.iter().map(|v| q.var_name(*v)).collect::<Vec<_>>(),
            "tree": tree_to_json(q, &rpt.tree, rpt.tree.root()),
            "cache_size": cache_map(q, &rpt.tree, |v| rpt.cache(v)),
        },
        "replacements": replacements,
    })
}

fn cache_map(q: &Query, tree: &Tree, cache: impl Fn(VarId) -> u32) -> Value {
    let mut m = Map::new();
    let mut entries: Vec<(String, u32)> = tree
        .nodes()
        .iter()
        .filter_map(|v| {
            let k = cache(v);
            (k > 0).then(|| (q.var_name(v).to_string(), k))
        })
        .collect();
    entries.sort();
    for (k, v) in entries {
        m.insert(k, json!(v));
    }
    Value::Object(m)
}

fn tree_to_json(q: &Query, tree: &Tree, v: VarId) -> Value {
    let children: Vec<Value> =
        tree.children(v).iter().map(|&c| tree_to_json(q, tree, c)).collect();
    json!({ "var": q.var_name(v), "children": children })
}

pub fn plan_from_json(q: &Query, value: &Value) -> Result<Plan, PlanJsonError> {
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| PlanJsonError::Malformed("missing `kind`".into()))?;
    match kind {
        "gj" => {
            let order = str_array(value.get("order"), "order")?
                .iter()
                .map(|n| resolve_var(q, n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Plan::Gj(GjPlan { order }))
        }
        "pt" => Ok(Plan::Pt(PtPlan { tree: tree_from_json(q, req(value, "tree")?)? })),
        "ptc" => {
            let tree = tree_from_json(q, req(value, "tree")?)?;
            let mut caches = VarSet::EMPTY;
            for name in str_array(value.get("caches"), "caches")? {
                caches.insert(resolve_var(q, &name)?);
            }
            Ok(Plan::Ptc(PtcPlan { tree, caches }))
        }
        "ptcr" => {
            let tree = tree_from_json(q, req(value, "tree")?)?;
            let cache_size = cache_from_json(q, value.get("cache_size"))?;
            Ok(Plan::Ptcr(PtcrPlan { tree, cache_size }))
        }
        "rpt" => Ok(Plan::Rpt(rpt_from_json(q, value)?)),
        "td" => td_from_json(q, value),
        other => Err(PlanJsonError::UnknownKind(other.to_string())),
    }
}

fn rpt_from_json(q: &Query, value: &Value) -> Result<RptPlan, PlanJsonError> {
    let base = req(value, "base")?;
    let inputs = str_array(base.get("inputs"), "inputs")?
        .iter()
        .map(|n| resolve_var(q, n))
        .collect::<Result<Vec<_>, _>>()?;
    let tree = tree_from_json(q, req(base, "tree")?)?;
    let cache_size = cache_from_json(q, base.get("cache_size"))?;
    let mut replacements = Vec::new();
    if let Some(reps) = value.get("replacements") {
        let reps = reps
            .as_array()
            .ok_or_else(|| PlanJsonError::Malformed("`replacements` must be an array".into()))?;
        for r in reps {
            let anchor = resolve_var(
                q,
                r.get("anchor")
                    .and_then(Value::as_str)
                    .ok_or_else(|| PlanJsonError::Malformed("replacement without `anchor`".into()))?,
            )?;
            let sub = rpt_from_json(q, req(r, "sub")?)?;
            replacements.push((anchor, sub));
        }
    }
    Ok(RptPlan { inputs, tree, cache_size, replacements })
}

fn td_from_json(q: &Query, value: &Value) -> Result<Plan, PlanJsonError> {
    let bags_v = value
        .get("bags")
        .and_then(Value::as_array)
        .ok_or_else(|| PlanJsonError::Malformed("missing `bags`".into()))?;
    let mut bags = Vec::new();
    for b in bags_v {
        let names = b
            .as_array()
            .ok_or_else(|| PlanJsonError::Malformed("bag must be an array".into()))?;
        let mut set = VarSet::EMPTY;
        for n in names {
            let n = n
                .as_str()
                .ok_or_else(|| PlanJsonError::Malformed("bag entries are names".into()))?;
            set.insert(resolve_var(q, n)?);
        }
        bags.push(set);
    }
    let root = value
        .get("root")
        .and_then(Value::as_u64)
        .ok_or_else(|| PlanJsonError::Malformed("missing `root`".into()))? as usize;
    let mut parent = vec![None; bags.len()];
    if let Some(edges) = value.get("edges").and_then(Value::as_array) {
        for e in edges {
            let pair = e
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| PlanJsonError::Malformed("edge must be [parent, child]".into()))?;
            let p = pair[0].as_u64().ok_or_else(|| PlanJsonError::Malformed("bad edge".into()))?
                as usize;
            let c = pair[1].as_u64().ok_or_else(|| PlanJsonError::Malformed("bad edge".into()))?
                as usize;
            if c >= bags.len() || p >= bags.len() {
                return Err(PlanJsonError::Malformed("edge index out of range".into()));
            }
            parent[c] = Some(p);
        }
    }
    let covering_v = value
        .get("covering")
        .and_then(Value::as_object)
        .ok_or_else(|| PlanJsonError::Malformed("missing `covering`".into()))?;
    let mut covering = Vec::with_capacity(q.atoms().len());
    for atom in q.atoms() {
        let bag = covering_v
            .get(&atom.name)
            .and_then(Value::as_u64)
            .ok_or_else(|| PlanJsonError::UnknownRelation(atom.name.clone()))?
            as usize;
        covering.push(bag);
    }
    for name in covering_v.keys() {
        if q.atom_by_name(name).is_none() {
            return Err(PlanJsonError::UnknownRelation(name.clone()));
        }
    }
    let td = TreeDec { bags, parent, root, covering };
    let inner_v = value
        .get("inner")
        .and_then(Value::as_array)
        .ok_or_else(|| PlanJsonError::Malformed("missing `inner`".into()))?;
    if inner_v.len() != td.bags.len() {
        return Err(PlanJsonError::Malformed("one inner plan per bag required".into()));
    }
    let sub_queries = super::td_subqueries(q, &td);
    let mut inner = Vec::with_capacity(inner_v.len());
    for bag in &sub_queries {
        inner.push(plan_from_json(&bag.query, &inner_v[bag.node])?);
    }
    Ok(Plan::Td(TdPlan { td, inner }))
}

fn cache_from_json(q: &Query, value: Option<&Value>) -> Result<Vec<u32>, PlanJsonError> {
    let mut cache_size = vec![0u32; q.num_vars()];
    let Some(value) = value else {
        return Ok(cache_size);
    };
    let map = value
        .as_object()
        .ok_or_else(|| PlanJsonError::Malformed("`cache_size` must be an object".into()))?;
    for (name, v) in map {
        let var = resolve_var(q, name)?;
        let k = v
            .as_u64()
            .ok_or_else(|| PlanJsonError::Malformed(format!("bad cache size for `{name}`")))?;
        cache_size[var.index()] = k as u32;
    }
    Ok(cache_size)
}

fn tree_from_json(q: &Query, value: &Value) -> Result<Tree, PlanJsonError> {
    let mut nodes = VarSet::EMPTY;
    let mut parents: Vec<(VarId, VarId)> = Vec::new();
    collect_tree(q, value, None, &mut nodes, &mut parents)?;
    let map: std::collections::HashMap<VarId, VarId> = parents.into_iter().collect();
    Tree::from_edges(q, nodes, |v| map.get(&v).copied())
        .map_err(|e| PlanJsonError::BadTree(format!("{e:?}")))
}

fn collect_tree(
    q: &Query,
    value: &Value,
    parent: Option<VarId>,
    nodes: &mut VarSet,
    parents: &mut Vec<(VarId, VarId)>,
) -> Result<(), PlanJsonError> {
    let name = value
        .get("var")
        .and_then(Value::as_str)
        .ok_or_else(|| PlanJsonError::Malformed("tree node without `var`".into()))?;
    let v = resolve_var(q, name)?;
    if nodes.contains(v) {
        return Err(PlanJsonError::BadTree(format!("variable `{name}` appears twice")));
    }
    nodes.insert(v);
    if let Some(p) = parent {
        parents.push((v, p));
    }
    if let Some(children) = value.get("children").and_then(Value::as_array) {
        for c in children {
            collect_tree(q, c, Some(v), nodes, parents)?;
        }
    }
    Ok(())
}

fn resolve_var(q: &Query, name: &str) -> Result<VarId, PlanJsonError> {
    q.var_by_name(name).ok_or_else(|| PlanJsonError::UnknownVar(name.to_string()))
}

fn req<'v>(value: &'v Value, key: &str) -> Result<&'v Value, PlanJsonError> {
    value.get(key).ok_or_else(|| PlanJsonError::Malformed(format!("missing `{key}`")))
}

fn str_array(value: Option<&Value>, key: &str) -> Result<Vec<String>, PlanJsonError> {
    let arr = value
        .and_then(Value::as_array)
        .ok_or_else(|| PlanJsonError::Malformed(format!("missing array `{key}`")))?;
    arr.iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| PlanJsonError::Malformed(format!("`{key}` holds names")))
        })
        .collect()
}
