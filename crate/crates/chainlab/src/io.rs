//! Graph files, state-graph exports and per-arc load dumps.
//!
//! A graph file holds one bipartite graph per line, either as biadjacency
//! rows (`110;011;101`) or in graph6 / sparse6 form as written by external
//! enumeration tools. Blank lines, `#` comments and `>>graph6<<` /
//! `>>sparse6<<` headers are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chainlab_core::congestion::CongestionResult;
use chainlab_core::{BipartiteGraph, EdgeSet, Error as CoreError, StateGraph};

use crate::error::{CliError, Result};

fn parse_error(position: usize, reason: impl Into<String>) -> CoreError {
    CoreError::Parse {
        position,
        reason: reason.into(),
    }
}

/// Undirected graph on `n` vertices as an edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

struct Bits<'a> {
    bytes: &'a [u8],
    pos: usize,
    bit: u32,
}

impl<'a> Bits<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Bits {
            bytes,
            pos: 0,
            bit: 0,
        }
    }

    /// Next bit of the 6-bit groups, most significant first.
    fn next(&mut self) -> Option<bool> {
        let &b = self.bytes.get(self.pos)?;
        let v = b - 63;
        let out = v >> (5 - self.bit) & 1 == 1;
        self.bit += 1;
        if self.bit == 6 {
            self.bit = 0;
            self.pos += 1;
        }
        Some(out)
    }

    fn take(&mut self, k: u32) -> Option<usize> {
        let mut x = 0;
        for _ in 0..k {
            x = x << 1 | usize::from(self.next()?);
        }
        Some(x)
    }
}

fn decode_size(bytes: &[u8]) -> std::result::Result<(usize, usize), CoreError> {
    let value = |s: &[u8]| {
        s.iter()
            .fold(0usize, |acc, &b| acc << 6 | usize::from(b - 63))
    };
    match bytes {
        [126, 126, rest @ ..] if rest.len() >= 6 => Ok((value(&rest[..6]), 8)),
        [126, rest @ ..] if rest.len() >= 3 => Ok((value(&rest[..3]), 4)),
        [b, ..] if *b != 126 => Ok((usize::from(b - 63), 1)),
        _ => Err(parse_error(0, "truncated size field")),
    }
}

fn check_printable(text: &str) -> std::result::Result<&[u8], CoreError> {
    let bytes = text.as_bytes();
    if let Some(i) = bytes.iter().position(|b| !(63..=126).contains(b)) {
        return Err(parse_error(
            i,
            format!("byte {} outside the graph6 range", bytes[i]),
        ));
    }
    Ok(bytes)
}

pub fn decode_graph6(text: &str) -> std::result::Result<SimpleGraph, CoreError> {
    let bytes = check_printable(text)?;
    let (n, skip) = decode_size(bytes)?;
    let body = &bytes[skip..];
    let needed = (n * n.saturating_sub(1) / 2).div_ceil(6);
    if body.len() != needed {
        return Err(parse_error(
            skip,
            format!("expected {needed} data bytes, found {}", body.len()),
        ));
    }
    let mut bits = Bits::new(body);
    let mut edges = Vec::new();
    for j in 1..n {
        for i in 0..j {
            if bits.next().expect("length checked") {
                edges.push((i, j));
            }
        }
    }
    Ok(SimpleGraph { n, edges })
}

pub fn decode_sparse6(text: &str) -> std::result::Result<SimpleGraph, CoreError> {
    let body = text
        .strip_prefix(':')
        .ok_or_else(|| parse_error(0, "sparse6 must start with ':'"))?;
    let bytes = check_printable(body).map_err(|e| match e {
        CoreError::Parse { position, reason } => parse_error(position + 1, reason),
        e => e,
    })?;
    let (n, skip) = decode_size(bytes)?;
    let k = if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    };
    let mut bits = Bits::new(&bytes[skip..]);
    let mut edges = Vec::new();
    let mut v = 0usize;
    while let Some(b) = bits.next() {
        let Some(x) = bits.take(k) else { break };
        if b {
            v += 1;
        }
        if x >= n || v >= n {
            break;
        }
        if x > v {
            v = x;
        } else {
            edges.push((x, v));
        }
    }
    Ok(SimpleGraph { n, edges })
}

/// Two-colours a connected bipartite graph; the class of vertex 0 becomes
/// the rows, and both sides keep their vertex order.
pub fn to_bipartite(g: &SimpleGraph) -> std::result::Result<BipartiteGraph, CoreError> {
    let mut adj = vec![Vec::new(); g.n];
    for &(a, b) in &g.edges {
        if a == b {
            return Err(parse_error(0, "graph has a loop"));
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut colour = vec![None; g.n];
    let mut stack = Vec::new();
    for s in 0..g.n {
        if colour[s].is_some() {
            continue;
        }
        colour[s] = Some(false);
        stack.push(s);
        while let Some(u) = stack.pop() {
            let cu = colour[u].expect("coloured before push");
            for &v in &adj[u] {
                match colour[v] {
                    None => {
                        colour[v] = Some(!cu);
                        stack.push(v);
                    }
                    Some(cv) if cv == cu => return Err(parse_error(0, "graph is not bipartite")),
                    Some(_) => {}
                }
            }
        }
    }
    let rows: Vec<usize> = (0..g.n).filter(|&v| colour[v] == Some(false)).collect();
    let cols: Vec<usize> = (0..g.n).filter(|&v| colour[v] == Some(true)).collect();
    if cols.len() > chainlab_core::edge_set::MAX_COLUMNS {
        return Err(parse_error(0, "more than 64 columns"));
    }
    let mut adjacency = EdgeSet::empty(rows.len(), cols.len());
    for &(a, b) in &g.edges {
        let (r, c) = if colour[a] == Some(false) {
            (a, b)
        } else {
            (b, a)
        };
        let r = rows.binary_search(&r).expect("row vertex");
        let c = cols.binary_search(&c).expect("column vertex");
        adjacency.insert(r, c);
    }
    BipartiteGraph::new(adjacency)
}

/// Parses one graph-file line in any of the supported encodings.
pub fn parse_graph_line(line: &str) -> std::result::Result<BipartiteGraph, CoreError> {
    let line = line.trim();
    if line.bytes().all(|b| matches!(b, b'0' | b'1' | b';')) {
        line.parse()
    } else if line.starts_with(':') {
        to_bipartite(&decode_sparse6(line)?)
    } else {
        to_bipartite(&decode_graph6(line)?)
    }
}

/// Reads every graph of a graph file, failing on the first bad line.
pub fn read_graph_file(path: &Path) -> Result<Vec<BipartiteGraph>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let t = line.trim();
        let t = t
            .strip_prefix(">>graph6<<")
            .or_else(|| t.strip_prefix(">>sparse6<<"))
            .unwrap_or(t);
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let g = parse_graph_line(t).map_err(|source| CliError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(g);
    }
    Ok(out)
}

fn io_err(p: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(p, e)
}

/// Writes `prefix.edges` with lines `src dst kappa prob`, loops included,
/// and `prefix.states` with lines `index encoding`.
pub fn export_graph(g: &StateGraph<EdgeSet>, prefix: &Path) -> Result<()> {
    let edges_path = prefix.with_extension("edges");
    let states_path = prefix.with_extension("states");
    let create = |p: &Path| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|e| CliError::io(p, e))
    };
    let mut edges = create(&edges_path)?;
    for u in 0..g.n_states() {
        let mut wrote_loop = false;
        for a in g.arcs(u) {
            let v = a.target as usize;
            if !wrote_loop && v > u {
                writeln!(edges, "{u} {u} {} {}", g.stay(u), g.diag(u))
                    .map_err(io_err(&edges_path))?;
                wrote_loop = true;
            }
            writeln!(edges, "{u} {v} {} {}", a.kappa, a.prob).map_err(io_err(&edges_path))?;
        }
        if !wrote_loop {
            writeln!(edges, "{u} {u} {} {}", g.stay(u), g.diag(u)).map_err(io_err(&edges_path))?;
        }
    }
    edges.flush().map_err(io_err(&edges_path))?;
    let mut states = create(&states_path)?;
    for (i, s) in g.states().iter().enumerate() {
        writeln!(states, "{i} {s}").map_err(io_err(&states_path))?;
    }
    states.flush().map_err(io_err(&states_path))
}

/// Per-arc load dump: `src,dst,load,pi_u_Puv,ratio`.
pub fn write_loads(g: &StateGraph<EdgeSet>, c: &CongestionResult, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["src", "dst", "load", "pi_u_Puv", "ratio"])?;
    let pi = g.pi().probs();
    for u in 0..g.n_states() {
        let base = g.arc_offset(u);
        for (k, a) in g.arcs(u).iter().enumerate() {
            let load = c.loads[base + k];
            let cap = pi[u] * a.prob;
            w.write_record([
                u.to_string(),
                a.target.to_string(),
                crate::format::fmt_g(load, 12),
                crate::format::fmt_g(cap, 12),
                crate::format::fmt_g(load / cap, 12),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
