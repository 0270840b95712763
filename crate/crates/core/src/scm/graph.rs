use std::collections::BTreeSet;
use std::fmt::Write;

use super::model::{Model, VarId};

/// Causal graph: `X -> Y` iff varying `X` can change `F_Y` with everything else held fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<VarId>,
    exogenous: BTreeSet<VarId>,
    edges: BTreeSet<(VarId, VarId)>,
}

impl DependencyGraph {
    pub fn nodes(&self) -> &[VarId] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: VarId, to: VarId) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Exogenous variables read by some equation.
    pub fn roots(&self) -> Vec<VarId> {
        self.nodes
            .iter()
            .copied()
            .filter(|n| self.exogenous.contains(n) && self.edges.iter().any(|(from, _)| from == n))
            .collect()
    }

    /// Edges as `(from, to)` name pairs.
    pub fn named_edges(&self, m: &Model) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|(a, b)| (m.variable(*a).name.clone(), m.variable(*b).name.clone()))
            .collect()
    }

    pub fn to_dot(&self, m: &Model) -> String {
        let mut out = format!("digraph \"{}\" {{\n", m.name());
        for n in &self.nodes {
            let v = m.variable(*n);
            let shape = if m.is_endogenous(*n) { "ellipse" } else { "box" };
            let _ = writeln!(out, "  \"{}\" [shape={shape}];", v.name);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", m.variable(*a).name, m.variable(*b).name);
        }
        out.push_str("}\n");
        out
    }
}

pub fn dependency_graph(m: &Model) -> DependencyGraph {
    let nodes: Vec<VarId> = m.ids().collect();
    let edges = nodes
        .iter()
        .flat_map(|&child| m.parents(child).into_iter().map(move |p| (p, child)))
        .collect();
    DependencyGraph {
        nodes,
        exogenous: m.exogenous().collect(),
        edges,
    }
}
