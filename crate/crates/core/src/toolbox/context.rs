//! Scene summary: the hierarchy, per-class object counts with id ranges,
//! and a totals line.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::scene_graph::{NodeId, SceneGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextRow {
    pub node_type: &'static str,
    pub name: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassSummary {
    pub class: String,
    pub count: usize,
    pub ids: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub objects: usize,
    pub rooms: usize,
    pub floors: usize,
    pub buildings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SceneContext {
    pub rows: Vec<ContextRow>,
    pub classes: Vec<ClassSummary>,
    pub totals: Totals,
    pub totals_line: String,
    pub text: String,
}

/// Splits `Prefix-12` into (`Prefix`, 12).
fn split_index(id: &str) -> Option<(&str, u64)> {
    let (prefix, k) = id.rsplit_once('-')?;
    if k.is_empty() || (k.len() > 1 && k.starts_with('0')) {
        return None;
    }
    Some((prefix, k.parse().ok()?))
}

/// Ids in natural order: `Cabinet-2` before `Cabinet-10`.
fn natural_sort(ids: &mut [NodeId]) {
    ids.sort_by(|a, b| match (split_index(a.as_str()), split_index(b.as_str())) {
        (Some((pa, ka)), Some((pb, kb))) => pa.cmp(pb).then(ka.cmp(&kb)),
        _ => a.cmp(b),
    });
}

/// `A`, `A, B`, or `A … Z` when three or more ids share a prefix and
/// number contiguously.
pub fn format_id_range(ids: &[NodeId]) -> String {
    let mut sorted = ids.to_vec();
    natural_sort(&mut sorted);
    if sorted.len() >= 3 {
        let parts: Option<Vec<(&str, u64)>> = sorted.iter().map(|id| split_index(id.as_str())).collect();
        if let Some(parts) = parts {
            let same_prefix = parts.iter().all(|(p, _)| *p == parts[0].0);
            let contiguous = parts.windows(2).all(|w| w[1].1 == w[0].1 + 1);
            if same_prefix && contiguous {
                return format!("{} … {}", sorted[0], sorted[sorted.len() - 1]);
            }
        }
    }
    sorted.iter().map(|id| id.as_str()).collect::<Vec<_>>().join(", ")
}

/// Inverse of [`format_id_range`] for the forms it produces.
pub fn expand_id_range(text: &str) -> Vec<String> {
    if let Some((first, last)) = text.split_once(" … ") {
        if let (Some((p, a)), Some((q, b))) = (split_index(first.trim()), split_index(last.trim())) {
            if p == q && a <= b {
                return (a..=b).map(|k| format!("{p}-{k}")).collect();
            }
        }
    }
    text.split(", ").map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn plural(n: usize, noun: &str) -> String {
    if n == 1 {
        format!("{n} {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

pub fn scene_context(scene: &SceneGraph) -> SceneContext {
    let mut rows = vec![ContextRow {
        node_type: "BuildingNode",
        name: scene.building().id.to_string(),
        class: scene.building().class_label.clone(),
    }];
    for f in scene.floors() {
        rows.push(ContextRow {
            node_type: "FloorNode",
            name: f.id.to_string(),
            class: f.level_index.to_string(),
        });
    }
    for r in scene.rooms() {
        rows.push(ContextRow {
            node_type: "RoomNode",
            name: r.id.to_string(),
            class: r.name.clone(),
        });
    }

    let mut by_class: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for o in scene.objects() {
        by_class.entry(o.class_label.as_str()).or_default().push(o.id.clone());
    }
    let mut classes = Vec::with_capacity(by_class.len());
    for (class, mut ids) in by_class {
        rows.push(ContextRow {
            node_type: "ObjectNode",
            name: format_id_range(&ids),
            class: format!("{class} ({})", ids.len()),
        });
        natural_sort(&mut ids);
        classes.push(ClassSummary {
            class: class.to_string(),
            count: ids.len(),
            ids,
        });
    }

    let totals = Totals {
        objects: scene.objects().count(),
        rooms: scene.rooms().count(),
        floors: scene.floors().count(),
        buildings: 1,
    };
    let totals_line = format!(
        "Total: {}, {}, {}, {}",
        plural(totals.objects, "ObjectNode"),
        plural(totals.rooms, "RoomNode"),
        plural(totals.floors, "FloorNode"),
        plural(totals.buildings, "BuildingNode"),
    );

    let mut text = String::from("Node Type | Name / Identifier | Class (Count)\n");
    for r in &rows {
        text.push_str(&format!("{} | {} | {}\n", r.node_type, r.name, r.class));
    }
    text.push_str(&totals_line);
    text.push('\n');

    SceneContext {
        rows,
        classes,
        totals,
        totals_line,
        text,
    }
}
