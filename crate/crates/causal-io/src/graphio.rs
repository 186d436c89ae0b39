//! Graph file formats: `->`/`--` edge lists (discovery outputs may leave
//! edges unoriented) and 0/1 adjacency CSV.

use crate::{IoError, Result};
use causal_core::graph::Dag;

/// A graph with possibly unoriented edges, as emitted by discovery methods.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialGraph {
    pub labels: Vec<String>,
    pub directed: Vec<(usize, usize)>,
    pub undirected: Vec<(usize, usize)>,
}

impl PartialGraph {
    pub fn undirected_count(&self) -> usize {
        self.undirected.len()
    }
}

/// A fully directed DAG or a partial graph.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphOutput {
    Dag(Dag),
    Partial(PartialGraph),
}

/// Parses edge-list lines: `A -> B` for directed, `A -- B` for undirected.
/// Blank lines and `#` comments are skipped. Labels must come from the known
/// list; directed edges must not form a cycle.
pub fn parse_graph_output(text: &str, labels: &[String]) -> Result<GraphOutput> {
    let index = |name: &str, line: usize| -> Result<usize> {
        labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| IoError::Parse {
                line,
                col: 1,
                message: format!("unknown label {name}"),
            })
    };
    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (arrow, dir) = if line.contains("->") {
            ("->", true)
        } else if line.contains("--") {
            ("--", false)
        } else {
            return Err(IoError::Parse {
                line: ln + 1,
                col: 1,
                message: "expected 'A -> B' or 'A -- B'".into(),
            });
        };
        let mut parts = line.splitn(2, arrow);
        let a = parts.next().unwrap().trim();
        let b = parts.next().unwrap_or("").trim();
        let (ai, bi) = (index(a, ln + 1)?, index(b, ln + 1)?);
        if dir {
            directed.push((ai, bi));
        } else {
            undirected.push(if ai < bi { (ai, bi) } else { (bi, ai) });
        }
    }
    // directed part must be acyclic (and free of duplicates)
    let check = Dag::new(labels.to_vec(), &directed).map_err(|e| IoError::Semantic(e.to_string()))?;
    if undirected.is_empty() {
        Ok(GraphOutput::Dag(check))
    } else {
        Ok(GraphOutput::Partial(PartialGraph {
            labels: labels.to_vec(),
            directed,
            undirected,
        }))
    }
}

/// One `parent_label -> child_label` line per edge.
pub fn serialize_edge_list(g: &Dag) -> String {
    let mut out = String::new();
    for (p, c) in g.edges() {
        out.push_str(&format!("{} -> {}\n", g.label(p), g.label(c)));
    }
    out
}

/// Header row of labels, then one 0/1 row per node; entry (i, j) = 1 means
/// an edge from node i to node j.
pub fn serialize_adjacency_csv(g: &Dag) -> String {
    let d = g.node_count();
    let mut out = g.labels().join(",");
    out.push('\n');
    for i in 0..d {
        let row: Vec<&str> = (0..d)
            .map(|j| if g.has_edge(i, j) { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_adjacency_csv(text: &str) -> Result<Dag> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| IoError::Parse {
        line: 1,
        col: 1,
        message: "empty adjacency file".into(),
    })?;
    let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let d = labels.len();
    let mut edges = Vec::new();
    for (i, line) in lines.enumerate() {
        if i >= d {
            return Err(IoError::Semantic(format!(
                "adjacency matrix has more than {d} rows"
            )));
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != d {
            return Err(IoError::Parse {
                line: i + 2,
                col: 1,
                message: format!("expected {d} entries, found {}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            match *cell {
                "0" => {}
                "1" => edges.push((i, j)),
                other => {
                    return Err(IoError::Parse {
                        line: i + 2,
                        col: 1,
                        message: format!("expected 0 or 1, found {other:?}"),
                    })
                }
            }
        }
    }
    Dag::new(labels, &edges).map_err(|e| IoError::Semantic(e.to_string()))
}
