//! Whitespace-separated edge lists (SNAP style) into influence graphs with
//! weighted-cascade probabilities `1 / outdeg(src)`.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::env::{Edge, InfluenceGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeListOptions {
    /// Add the reverse of every edge.
    pub undirected: bool,
}

/// Parsed edge list before probabilities are attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub nodes: usize,
    /// Distinct `(src, dst)` pairs in ascending order, self-loops removed.
    pub pairs: Vec<(usize, usize)>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

pub fn parse_edge_list<R: Read>(reader: R, name: &str, opts: EdgeListOptions) -> Result<EdgeList> {
    let mut set = BTreeSet::new();
    let (mut loops, mut dups) = (0, 0);
    let mut max_id: Option<usize> = None;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Ingest(format!("{name}: {e}")))?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with('%') {
            continue;
        }
        let mut fields = body.split_whitespace();
        let mut id = || -> Result<usize> {
            let tok = fields.next().ok_or_else(|| Error::IngestLine {
                path: name.to_string(),
                line: line_no,
                msg: "expected two node ids".into(),
            })?;
            tok.parse().map_err(|_| Error::IngestLine {
                path: name.to_string(),
                line: line_no,
                msg: format!("'{tok}' is not a node id"),
            })
        };
        let (s, d) = (id()?, id()?);
        max_id = Some(max_id.unwrap_or(0).max(s).max(d));
        if s == d {
            loops += 1;
            continue;
        }
        let mut add = |a, b| {
            if !set.insert((a, b)) {
                dups += 1;
            }
        };
        add(s, d);
        if opts.undirected {
            add(d, s);
        }
    }
    let nodes = max_id.map_or(0, |m| m + 1);
    if set.is_empty() {
        return Err(Error::Ingest(format!("{name}: no edges")));
    }
    Ok(EdgeList {
        nodes,
        pairs: set.into_iter().collect(),
        self_loops_dropped: loops,
        duplicates_dropped: dups,
    })
}

/// Graph with `p(u, v) = 1 / outdeg(u)` on every edge.
pub fn weighted_cascade_graph(nodes: usize, pairs: &[(usize, usize)]) -> Result<InfluenceGraph> {
    let mut out = vec![0usize; nodes];
    for &(s, _) in pairs {
        out[s] += 1;
    }
    let edges = pairs
        .iter()
        .map(|&(src, dst)| Edge {
            src,
            dst,
            p: 1.0 / out[src] as f64,
        })
        .collect();
    InfluenceGraph::new(nodes, edges)
}

pub fn load_edge_graph(path: &Path, opts: EdgeListOptions) -> Result<InfluenceGraph> {
    let file = std::fs::File::open(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    let list = parse_edge_list(file, &path.display().to_string(), opts)?;
    weighted_cascade_graph(list.nodes, &list.pairs)
}
