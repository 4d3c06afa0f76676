//! Line-oriented text format for signed graphs.
//!
//! ```text
//! mws-graph v1
//! V <num_vertices>
//! + <u> <v> <weight>
//! - <u> <v> <weight>
//! ```
//!
//! Lines starting with `#` are comments. Edge lines in file order define the
//! per-polarity edge ids, counted separately for `+` and `-`. Weights are
//! 64-bit floats; the writer emits the shortest decimal that round-trips, so
//! write -> read -> write is byte-identical.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::graph::{Polarity, SignedGraph};

pub const GRAPH_HEADER: &str = "mws-graph v1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads a graph from the text format.
pub fn read_graph(source: impl Read) -> Result<SignedGraph> {
    let reader = BufReader::new(source);
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        lines.push((idx + 1, line));
    }
    let mut iter = lines
        .into_iter()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (lineno, header) = iter.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header.trim() != GRAPH_HEADER {
        return Err(parse_err(lineno, format!("expected header '{GRAPH_HEADER}'")));
    }

    let (lineno, vline) = iter.next().ok_or_else(|| parse_err(lineno, "missing 'V <n>' line"))?;
    let mut parts = vline.split_whitespace();
    if parts.next() != Some("V") {
        return Err(parse_err(lineno, "expected 'V <num_vertices>'"));
    }
    let num_vertices: usize = parts
        .next()
        .ok_or_else(|| parse_err(lineno, "missing vertex count"))?
        .parse()
        .map_err(|_| parse_err(lineno, "vertex count is not an integer"))?;
    if parts.next().is_some() {
        return Err(parse_err(lineno, "trailing tokens after vertex count"));
    }

    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    for (lineno, line) in iter {
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let polarity = match tag {
            "+" => Polarity::Attractive,
            "-" => Polarity::Repulsive,
            other => return Err(parse_err(lineno, format!("unknown line tag '{other}'"))),
        };
        let u: usize = parts
            .next()
            .ok_or_else(|| parse_err(lineno, "missing endpoint u"))?
            .parse()
            .map_err(|_| parse_err(lineno, "endpoint u is not an integer"))?;
        let v: usize = parts
            .next()
            .ok_or_else(|| parse_err(lineno, "missing endpoint v"))?
            .parse()
            .map_err(|_| parse_err(lineno, "endpoint v is not an integer"))?;
        let weight: f64 = parts
            .next()
            .ok_or_else(|| parse_err(lineno, "missing weight"))?
            .parse()
            .map_err(|_| parse_err(lineno, "weight is not a number"))?;
        if parts.next().is_some() {
            return Err(parse_err(lineno, "trailing tokens after weight"));
        }
        edges.push((u, v, weight, polarity));
        edge_lines.push(lineno);
    }

    // Re-validate edge by edge so errors carry the offending line number.
    SignedGraph::new(num_vertices, edges.iter().copied()).map_err(|e| match e {
        Error::Input(msg) => {
            let line = edges
                .iter()
                .enumerate()
                .find_map(|(i, &(u, v, w, p))| {
                    SignedGraph::new(
                        num_vertices,
                        edges[..i].iter().copied().chain(std::iter::once((u, v, w, p))),
                    )
                    .is_err()
                    .then_some(edge_lines[i])
                })
                .unwrap_or(1);
            parse_err(line, msg)
        }
        other => other,
    })
}

/// Writes a graph in the text format, edges in construction order.
pub fn write_graph(graph: &SignedGraph, mut sink: impl Write) -> Result<()> {
    writeln!(sink, "{GRAPH_HEADER}")?;
    writeln!(sink, "V {}", graph.num_vertices())?;
    for e in graph.edges() {
        writeln!(sink, "{} {} {} {}", e.polarity.symbol(), e.u, e.v, e.weight)?;
    }
    Ok(())
}

pub fn graph_to_string(graph: &SignedGraph) -> String {
    let mut buf = Vec::new();
    write_graph(graph, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("graph text is valid utf-8")
}

pub fn graph_from_str(text: &str) -> Result<SignedGraph> {
    read_graph(text.as_bytes())
}
