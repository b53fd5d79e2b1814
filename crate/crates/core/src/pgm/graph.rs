//! Star-shaped explanation graph and its DOT / JSON renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{NodeKind, PgmConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub name: String,
    pub kind: NodeKind,
    /// Mean |phi| over runs.
    pub weight: f64,
    /// Mean p-value over runs.
    pub p_value: f64,
    pub selected: bool,
    pub members: Vec<String>,
    pub run_weights: Vec<f64>,
    pub run_p_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationGraph {
    pub target: String,
    pub nodes: Vec<GraphNode>,
    pub config: PgmConfig,
    /// Rows the realizations were drawn from.
    pub rows: usize,
    pub cohort: Option<(String, String)>,
    pub warnings: Vec<String>,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' | '\\' => {
                out.push('\\');
                out.push(ch);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

impl ExplanationGraph {
    pub fn node(&self, name: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// Nodes by descending weight, ties by name.
    pub fn ranked(&self) -> Vec<&GraphNode> {
        let mut v: Vec<&GraphNode> = self.nodes.iter().collect();
        v.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.name.cmp(&b.name)));
        v
    }

    pub fn selected(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| n.selected).map(|n| n.name.as_str()).collect()
    }

    /// Every node gets an edge to the target; unselected edges are dashed.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph explanation {\n  rankdir=LR;\n");
        let _ = writeln!(s, "  {} [shape=doublecircle, label={}];", quote(&self.target), quote(&self.target));
        for n in &self.nodes {
            let shape = match n.kind {
                NodeKind::Feature => "ellipse",
                NodeKind::Group => "box",
            };
            let _ = writeln!(s, "  {} [shape={shape}, label={}];", quote(&n.name), quote(&n.name));
        }
        for n in &self.nodes {
            let _ = writeln!(
                s,
                "  {} -> {} [weight=\"{:.4}\", penwidth=\"{:.3}\", p_value=\"{:.6}\", selected={}, style={}];",
                quote(&n.name),
                quote(&self.target),
                n.weight,
                1.0 + 4.0 * n.weight,
                n.p_value,
                n.selected,
                if n.selected { "solid" } else { "dashed" },
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graphs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(name: &str, weight: f64, selected: bool) -> GraphNode {
        GraphNode {
            name: name.into(),
            kind: NodeKind::Group,
            weight,
            p_value: if selected { 0.001 } else { 0.6 },
            selected,
            members: vec![],
            run_weights: vec![weight],
            run_p_values: vec![0.5],
        }
    }

    fn graph() -> ExplanationGraph {
        ExplanationGraph {
            target: "decision".into(),
            nodes: vec![node("A", 0.1, false), node("B", 0.0, false), node("C", 0.4, true), node("D", 0.1, true)],
            config: PgmConfig::default(),
            rows: 10,
            cohort: None,
            warnings: vec![],
        }
    }

    #[test]
    fn dot_has_star_topology() {
        let dot = graph().to_dot();
        assert_eq!(dot.matches(" -> ").count(), 4);
        assert!(dot.contains("\"C\" -> \"decision\" [weight=\"0.4000\""));
        assert!(dot.contains("selected=false, style=dashed"));
    }

    #[test]
    fn ranking_breaks_ties_by_name() {
        let g = graph();
        let names: Vec<&str> = g.ranked().iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["C", "A", "D", "B"]);
        assert_eq!(g.selected(), ["C", "D"]);
    }

    #[test]
    fn names_are_escaped() {
        assert_eq!(quote("a \"b\"\\"), "\"a \\\"b\\\"\\\\\"");
    }

    #[test]
    fn json_round_trip() {
        let g = graph();
        assert_eq!(ExplanationGraph::from_json(&g.to_json()).unwrap(), g);
    }
}
