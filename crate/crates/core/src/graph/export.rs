//! GraphML and DOT writers with deterministic ordering.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::TransitionGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    GraphMl,
    Dot,
}

impl GraphFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            GraphFormat::GraphMl => "graphml",
            GraphFormat::Dot => "dot",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graphml" => Ok(GraphFormat::GraphMl),
            "dot" => Ok(GraphFormat::Dot),
            _ => Err(Error::arg(format!("unknown graph format {s:?}"))),
        }
    }
}

pub fn to_dot(g: &TransitionGraph) -> String {
    let mut s = String::from("digraph G {\n");
    for i in 0..g.node_count() {
        writeln!(s, "  {i};").unwrap();
    }
    for (i, j, w) in g.arcs() {
        writeln!(s, "  {i} -> {j} [weight={w}];").unwrap();
    }
    s.push_str("}\n");
    s
}

pub fn to_graphml(g: &TransitionGraph) -> String {
    let mut s = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \x20 <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n\
         \x20 <graph id=\"G\" edgedefault=\"directed\">\n",
    );
    for i in 0..g.node_count() {
        writeln!(s, "    <node id=\"n{i}\"/>").unwrap();
    }
    for (k, (i, j, w)) in g.arcs().enumerate() {
        writeln!(
            s,
            "    <edge id=\"e{k}\" source=\"n{i}\" target=\"n{j}\"><data key=\"weight\">{w}</data></edge>"
        )
        .unwrap();
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

pub fn export_graph(g: &TransitionGraph, path: &Path, format: GraphFormat) -> Result<()> {
    let text = match format {
        GraphFormat::GraphMl => to_graphml(g),
        GraphFormat::Dot => to_dot(g),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
