//! Channel-labeled directed graphs of post-jump states and DOT output.

use std::fmt;
use std::fmt::Write as _;

use num_rational::BigRational;

use crate::io::format_float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Renewal,
    Closed,
    Recurring,
    Open,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Renewal => "renewal",
            Classification::Closed => "closed",
            Classification::Recurring => "recurring",
            Classification::Open => "open",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternNode {
    pub label: usize,
    /// Display name, e.g. `|110⟩` for basis projectors.
    pub name: String,
    /// Visit count or population; drives the drawn node size.
    pub visits: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternEdge {
    pub from: usize,
    pub symbol: usize,
    pub to: usize,
    pub probability: f64,
    /// Present for graphs built in exact arithmetic.
    pub exact: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternGraph {
    pub alphabet: Vec<String>,
    pub nodes: Vec<PatternNode>,
    pub edges: Vec<PatternEdge>,
    pub classification: Option<Classification>,
}

impl PatternGraph {
    pub fn empty(alphabet: Vec<String>) -> Self {
        Self { alphabet, nodes: Vec::new(), edges: Vec::new(), classification: None }
    }

    pub fn node(&self, label: usize) -> Option<&PatternNode> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn out_edges(&self, label: usize) -> impl Iterator<Item = &PatternEdge> {
        self.edges.iter().filter(move |e| e.from == label)
    }

    /// Target of the `symbol` edge out of `label`.
    pub fn successor(&self, label: usize, symbol: usize) -> Option<usize> {
        self.out_edges(label).find(|e| e.symbol == symbol).map(|e| e.to)
    }

    /// Every edge target is a node.
    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(|e| self.node(e.to).is_some())
    }

    /// Renders a DOT digraph with nodes and edges sorted by label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph pattern {\n");
        if self.nodes.is_empty() {
            out.push_str("}\n");
            return out;
        }
        out.push_str("  rankdir=LR;\n");
        let mut nodes: Vec<&PatternNode> = self.nodes.iter().collect();
        nodes.sort_by_key(|n| n.label);
        let max_visits = nodes.iter().map(|n| n.visits).fold(0.0, f64::max);
        for n in nodes {
            let width = if max_visits > 0.0 { 0.3 + 1.2 * n.visits / max_visits } else { 0.5 };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\", visits={}, width={:.3}];",
                n.label,
                n.name.replace('"', "'"),
                format_float(n.visits),
                width
            );
        }
        let mut edges: Vec<&PatternEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| (e.from, e.symbol, e.to));
        for e in edges {
            let exact = e.exact.as_ref().map(|r| format!(", exact=\"{r}\"")).unwrap_or_default();
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\", probability={}{}];",
                e.from,
                e.to,
                self.alphabet[e.symbol],
                format_float(e.probability),
                exact
            );
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_header_only() {
        assert_eq!(PatternGraph::empty(vec!["E".into()]).to_dot(), "digraph pattern {\n}\n");
    }

    #[test]
    fn dot_is_sorted_and_labeled() {
        let g = PatternGraph {
            alphabet: vec!["E".into(), "I".into()],
            nodes: vec![
                PatternNode { label: 2, name: "|1⟩".into(), visits: 1.0 },
                PatternNode { label: 1, name: "|0⟩".into(), visits: 1.0 },
            ],
            edges: vec![
                PatternEdge { from: 2, symbol: 0, to: 1, probability: 1.0, exact: None },
                PatternEdge { from: 1, symbol: 1, to: 2, probability: 1.0, exact: None },
            ],
            classification: Some(Classification::Renewal),
        };
        let dot = g.to_dot();
        let lines: Vec<&str> = dot.lines().collect();
        assert_eq!(lines[2], "  n1 [label=\"|0⟩\", visits=1, width=1.500];");
        assert_eq!(lines[4], "  n1 -> n2 [label=\"I\", probability=1];");
        assert_eq!(lines[5], "  n2 -> n1 [label=\"E\", probability=1];");
        assert!(g.is_closed());
        assert_eq!(g.successor(1, 1), Some(2));
    }
}
