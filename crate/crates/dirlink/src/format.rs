//! Line-oriented text formats for instances and solutions.
//!
//! Instance files:
//!
//! ```text
//! # comment
//! p dddp <n> <k> <c>
//! a <tail> <head>      (1-based, repeats allowed)
//! s <i> <v>            (once per pair i in 1..=k)
//! t <i> <v>
//! ```

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{DiGraph, Instance, Linkage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        msg: msg.into(),
    }
}

fn num(tok: Option<&str>, line: usize, what: &str) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut g = DiGraph::new(0);
    let mut sources: Vec<Option<usize>> = Vec::new();
    let mut sinks: Vec<Option<usize>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let tag = toks.next().unwrap();
        match tag {
            "p" => {
                if header.is_some() {
                    return Err(err(line, "duplicate header"));
                }
                if toks.next() != Some("dddp") {
                    return Err(err(line, "expected `p dddp <n> <k> <c>`"));
                }
                let n = num(toks.next(), line, "vertex count")?;
                let k = num(toks.next(), line, "pair count")?;
                let c = num(toks.next(), line, "congestion")?;
                if c == 0 {
                    return Err(err(line, "congestion must be positive"));
                }
                header = Some((n, k, c));
                g = DiGraph::new(n);
                sources = vec![None; k];
                sinks = vec![None; k];
            }
            "a" | "s" | "t" => {
                let (n, k, _) = header.ok_or_else(|| err(line, "line before header"))?;
                let x = num(toks.next(), line, "first field")?;
                let y = num(toks.next(), line, "second field")?;
                let vertex = |v: usize| {
                    if v == 0 || v > n {
                        Err(err(line, format!("vertex {v} out of range 1..={n}")))
                    } else {
                        Ok(v - 1)
                    }
                };
                if tag == "a" {
                    let (u, v) = (vertex(x)?, vertex(y)?);
                    if u == v {
                        return Err(err(line, format!("self-loop at vertex {x}")));
                    }
                    g.add_arc(u, v).expect("checked arc");
                } else {
                    if x == 0 || x > k {
                        return Err(err(line, format!("pair index {x} out of range 1..={k}")));
                    }
                    let slot = if tag == "s" {
                        &mut sources[x - 1]
                    } else {
                        &mut sinks[x - 1]
                    };
                    if slot.is_some() {
                        return Err(err(line, format!("duplicate `{tag}` line for pair {x}")));
                    }
                    *slot = Some(vertex(y)?);
                }
            }
            other => return Err(err(line, format!("unknown line type `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(err(line, "trailing fields"));
        }
    }
    let (_, _, c) = header.ok_or_else(|| err(0, "missing `p dddp` header"))?;
    let mut pairs = Vec::with_capacity(sources.len());
    for (i, (s, t)) in sources.iter().zip(&sinks).enumerate() {
        match (s, t) {
            (Some(s), Some(t)) => pairs.push((*s, *t)),
            _ => return Err(err(0, format!("pair {} lacks a source or sink", i + 1))),
        }
    }
    Ok(Instance::new(g, pairs, c))
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "p dddp {} {} {}", inst.g.n(), inst.k(), inst.c).unwrap();
    for &(u, v) in inst.g.arcs() {
        writeln!(out, "a {} {}", u + 1, v + 1).unwrap();
    }
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        writeln!(out, "s {} {}", i + 1, s + 1).unwrap();
        writeln!(out, "t {} {}", i + 1, t + 1).unwrap();
    }
    out
}

/// Outcome of a solve run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Yes,
    No,
    Infeasible,
    Inconclusive,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Yes => "yes",
            Status::No => "no",
            Status::Infeasible => "infeasible",
            Status::Inconclusive => "inconclusive",
            Status::Timeout => "timeout",
        }
    }
}

/// A solution document: status, 1-based paths and run statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionDoc {
    pub status: Status,
    pub method: String,
    pub paths: Vec<Vec<usize>>,
    pub nodes_expanded: u64,
    pub elapsed_ms: u128,
}

impl SolutionDoc {
    pub fn new(status: Status, method: &str, linkage: Option<&Linkage>, nodes: u64, elapsed: Duration) -> Self {
        let paths = linkage
            .map(|l| {
                l.paths
                    .iter()
                    .map(|p| p.vertices.iter().map(|v| v + 1).collect())
                    .collect()
            })
            .unwrap_or_default();
        SolutionDoc {
            status,
            method: method.to_string(),
            paths,
            nodes_expanded: nodes,
            elapsed_ms: elapsed.as_millis(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "status {}", self.status.as_str()).unwrap();
        writeln!(out, "method {}", self.method).unwrap();
        for (i, p) in self.paths.iter().enumerate() {
            let vs: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            writeln!(out, "path {}: {}", i + 1, vs.join(" ")).unwrap();
        }
        writeln!(out, "stats nodes_expanded {}", self.nodes_expanded).unwrap();
        writeln!(out, "stats elapsed_ms {}", self.elapsed_ms).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "p dddp 3 1 1\na 1 2\na 2 3\ns 1 1\nt 1 3\n";

    #[test]
    fn parses_sample() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.g.n(), 3);
        assert_eq!(inst.g.arcs(), &[(0, 1), (1, 2)]);
        assert_eq!(inst.pairs, vec![(0, 2)]);
        assert_eq!(inst.c, 1);
        assert_eq!(serialize_instance(&inst), SAMPLE);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = "p dddp 3 1 1\na 1 2\na 2 3\na 2 2\ns 1 1\nt 1 3\n";
        let e = parse_instance(bad).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.msg.contains("self-loop"));
        let e = parse_instance("p dddp 2 1 1\na 1 3\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_instance("p dddp 2 1 1\ns 1 1\ns 1 2\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn empty_graph_serializes_to_three_lines() {
        let inst = Instance::new(DiGraph::new(2), vec![(0, 1)], 1);
        assert_eq!(serialize_instance(&inst), "p dddp 2 1 1\ns 1 1\nt 1 2\n");
    }

    #[test]
    fn comments_are_ignored() {
        let text = "# header follows\np dddp 2 1 2 # trailing\n\na 1 2\ns 1 1\nt 1 2\n";
        assert_eq!(parse_instance(text).unwrap().c, 2);
    }
}
