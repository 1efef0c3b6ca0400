use std::fmt;

use serde::{Serialize, Serializer};

use super::TaintSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    /// The smart contract; every action maps here.
    Sc,
    /// A single literal address.
    Addr(u64),
    /// Every address that is not a literal.
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Explicit(usize),
    Transient(usize),
    Implicit(u64),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Sc => f.write_str("sc"),
            Vertex::Addr(a) => write!(f, "{a}"),
            Vertex::Star => f.write_str("*"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Explicit(i) => write!(f, "explicit@{i}"),
            Label::Transient(i) => write!(f, "transient@{i}"),
            Label::Implicit(a) => write!(f, "implicit@{a}"),
        }
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
    pub labels: Vec<Label>,
}

/// Participation topology graph: a star rooted at `sc` with one vertex per
/// literal address and a catch-all `*` vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PtGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

pub fn build_ptg(summary: &TaintSummary) -> PtGraph {
    let mut vertices = vec![Vertex::Sc];
    vertices.extend(summary.lits.iter().map(|&a| Vertex::Addr(a)));
    vertices.push(Vertex::Star);
    let shared: Vec<Label> = summary
        .args
        .iter()
        .map(|&i| Label::Explicit(i))
        .chain(summary.roles.iter().map(|&r| Label::Transient(r)))
        .collect();
    let edges = vertices[1..]
        .iter()
        .map(|&to| {
            let mut labels = shared.clone();
            if let Vertex::Addr(a) = to {
                labels.push(Label::Implicit(a));
            }
            Edge {
                from: Vertex::Sc,
                to,
                labels,
            }
        })
        .collect();
    PtGraph { vertices, edges }
}

impl PtGraph {
    /// Vertex of the user at `address`.
    pub fn tau(&self, address: u64) -> Vertex {
        if self.vertices.contains(&Vertex::Addr(address)) {
            Vertex::Addr(address)
        } else {
            Vertex::Star
        }
    }

    /// Vertex of every action.
    pub fn rho(&self) -> Vertex {
        Vertex::Sc
    }

    pub fn edge(&self, from: Vertex, to: Vertex) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    /// Whether the edge from the action vertex to `address`'s vertex
    /// carries `label`.
    pub fn covers(&self, address: u64, label: Label) -> bool {
        self.edge(self.rho(), self.tau(address))
            .is_some_and(|e| e.labels.contains(&label))
    }

    /// Whether that edge carries any implicit label.
    pub fn covers_implicit(&self, address: u64) -> bool {
        self.edge(self.rho(), self.tau(address))
            .is_some_and(|e| e.labels.iter().any(|l| matches!(l, Label::Implicit(_))))
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ptg {\n");
        for v in &self.vertices {
            out.push_str(&format!("  \"{v}\";\n"));
        }
        for e in &self.edges {
            let labels: Vec<String> = e.labels.iter().map(Label::to_string).collect();
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                e.from,
                e.to,
                labels.join("\\n")
            ));
        }
        out.push_str("}\n");
        out
    }
}
