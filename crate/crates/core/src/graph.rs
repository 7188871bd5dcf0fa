//! Graph snapshots, block assignments and stream I/O.
//!
//! Two on-disk forms are accepted by [`load_stream`]:
//!
//! - JSON lines (`.jsonl`), one `{"t":..,"n":..,"edges":[[i,j],..]}` per line;
//! - a JSON manifest `{"n":..,"snapshots":["a.tsv",..]}` listing edge-list
//!   files with one `src<TAB>dst` pair per line. Paths are resolved relative
//!   to the manifest and snapshot `t` follows manifest order starting at 1.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BscError, Result};

/// One directed binary graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSnapshot {
    t: usize,
    n_nodes: usize,
    edges: Vec<(u32, u32)>,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    t: usize,
    n: usize,
    edges: Vec<[u32; 2]>,
}

impl GraphSnapshot {
    /// Builds a snapshot, sorting the edges. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn new(t: usize, n_nodes: usize, mut edges: Vec<(u32, u32)>) -> Result<Self> {
        if n_nodes > u32::MAX as usize {
            return Err(BscError::invalid("node count exceeds u32 range"));
        }
        for &(i, j) in &edges {
            if i as usize >= n_nodes || j as usize >= n_nodes {
                return Err(BscError::invalid(format!(
                    "edge ({i}, {j}) has an endpoint >= n = {n_nodes}"
                )));
            }
            if i == j {
                return Err(BscError::invalid(format!("self-loop on node {i}")));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(BscError::invalid(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut out_adj = vec![Vec::new(); n_nodes];
        let mut in_adj = vec![Vec::new(); n_nodes];
        for &(i, j) in &edges {
            out_adj[i as usize].push(j);
            in_adj[j as usize].push(i);
        }
        Ok(Self {
            t,
            n_nodes,
            edges,
            out_adj,
            in_adj,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn out_neighbors(&self, i: usize) -> &[u32] {
        &self.out_adj[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[u32] {
        &self.in_adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out_adj
            .get(i)
            .is_some_and(|row| row.binary_search(&(j as u32)).is_ok())
    }

    /// Row-major dense adjacency matrix.
    pub fn dense_adjacency(&self) -> Vec<bool> {
        let mut dense = vec![false; self.n_nodes * self.n_nodes];
        for &(i, j) in &self.edges {
            dense[i as usize * self.n_nodes + j as usize] = true;
        }
        dense
    }

    /// Same graph relabelled with a different time index.
    pub fn with_t(&self, t: usize) -> Self {
        Self { t, ..self.clone() }
    }

    /// Canonical JSON line (no trailing newline).
    pub fn to_json_line(&self) -> String {
        let record = SnapshotRecord {
            t: self.t,
            n: self.n_nodes,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string(&record).expect("snapshot serialization cannot fail")
    }
}

/// Node-to-block labels for a fixed number of blocks `k`.
///
/// Blocks may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockAssignment {
    labels: Vec<u32>,
    k: usize,
}

impl BlockAssignment {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(BscError::invalid("block count k must be >= 1"));
        }
        if let Some(&bad) = labels.iter().find(|&&z| z as usize >= k) {
            return Err(BscError::invalid(format!("block label {bad} >= k = {k}")));
        }
        Ok(Self { labels, k })
    }

    /// Everything in block 0.
    pub fn single_block(n_nodes: usize) -> Self {
        Self {
            labels: vec![0; n_nodes],
            k: 1,
        }
    }

    /// Node `i` goes to block `i mod k`.
    pub fn round_robin(n_nodes: usize, k: usize) -> Self {
        Self {
            labels: (0..n_nodes).map(|i| (i % k) as u32).collect(),
            k,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.labels[node] as usize
    }

    pub fn block_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.k];
        for &z in &self.labels {
            sizes[z as usize] += 1;
        }
        sizes
    }

    /// Applies a permutation of block labels: block `b` becomes `perm[b]`.
    pub fn relabel(&self, perm: &[u32]) -> Result<Self> {
        let mut seen = vec![false; self.k];
        if perm.len() != self.k {
            return Err(BscError::invalid("permutation length differs from k"));
        }
        for &p in perm {
            if p as usize >= self.k || std::mem::replace(&mut seen[p as usize], true) {
                return Err(BscError::invalid("not a permutation of block labels"));
            }
        }
        Ok(Self {
            labels: self.labels.iter().map(|&z| perm[z as usize]).collect(),
            k: self.k,
        })
    }
}

/// Directed `k x k` superedge indicator matrix, diagonal included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperedgeMatrix {
    k: usize,
    cells: Vec<bool>,
}

impl SuperedgeMatrix {
    pub fn empty(k: usize) -> Self {
        Self {
            k,
            cells: vec![false; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, from: usize, to: usize) -> bool {
        self.cells[from * self.k + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: bool) {
        self.cells[from * self.k + to] = value;
    }

    pub fn count_ones(&self) -> u64 {
        self.cells.iter().filter(|&&c| c).count() as u64
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.cells
            .chunks(self.k)
            .map(|r| r.iter().map(|&c| c as u8).collect())
            .collect()
    }
}

/// Observed and possible edge counts for one ordered block pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCounts {
    /// Edges present from block `l` to block `m`.
    pub present: u64,
    /// Ordered node pairs available from block `l` to block `m`.
    pub slots: u64,
}

/// Slot count between blocks of the given sizes (no self-loops on the diagonal).
pub(crate) fn pair_slots(size_from: u64, size_to: u64, diagonal: bool) -> u64 {
    if diagonal {
        size_from * size_from.saturating_sub(1)
    } else {
        size_from * size_to
    }
}

/// Row-major `k x k` edge/slot counts of `g` under `z`.
pub fn block_edge_counts(g: &GraphSnapshot, z: &BlockAssignment) -> Result<Vec<PairCounts>> {
    if z.len() != g.n_nodes() {
        return Err(BscError::invalid(format!(
            "assignment covers {} nodes, graph has {}",
            z.len(),
            g.n_nodes()
        )));
    }
    let k = z.k();
    let sizes = z.block_sizes();
    let mut counts = vec![PairCounts::default(); k * k];
    for l in 0..k {
        for m in 0..k {
            counts[l * k + m].slots = pair_slots(sizes[l], sizes[m], l == m);
        }
    }
    for &(i, j) in g.edges() {
        let l = z.block_of(i as usize);
        let m = z.block_of(j as usize);
        counts[l * k + m].present += 1;
    }
    Ok(counts)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BscError + '_ {
    move |source| BscError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> BscError {
    BscError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

#[derive(Deserialize)]
struct Manifest {
    n: usize,
    snapshots: Vec<PathBuf>,
}

/// Loads a stream from a `.jsonl` file or an edge-list manifest (any other
/// extension is read as a manifest).
///
/// Snapshots come back sorted by `t`; all must share one node count.
pub fn load_stream(path: impl AsRef<Path>) -> Result<Vec<GraphSnapshot>> {
    let path = path.as_ref();
    let mut snapshots = match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => load_jsonl(path)?,
        _ => load_manifest(path)?,
    };
    snapshots.sort_by_key(GraphSnapshot::t);
    if let Some(w) = snapshots.windows(2).find(|w| w[0].t() == w[1].t()) {
        return Err(parse_err(
            path,
            0,
            format!("duplicate time index t={}", w[0].t()),
        ));
    }
    if let Some(first) = snapshots.first() {
        let n = first.n_nodes();
        if let Some(bad) = snapshots.iter().find(|s| s.n_nodes() != n) {
            return Err(parse_err(
                path,
                0,
                format!(
                    "snapshot t={} has n={}, expected n={n}",
                    bad.t(),
                    bad.n_nodes()
                ),
            ));
        }
    }
    Ok(snapshots)
}

fn load_jsonl(path: &Path) -> Result<Vec<GraphSnapshot>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SnapshotRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(path, lineno, e.to_string()))?;
        let edges = record.edges.into_iter().map(|[i, j]| (i, j)).collect();
        let snap = GraphSnapshot::new(record.t, record.n, edges)
            .map_err(|e| parse_err(path, lineno, e.to_string()))?;
        out.push(snap);
    }
    Ok(out)
}

fn load_manifest(path: &Path) -> Result<Vec<GraphSnapshot>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| {
        let line = e.line();
        parse_err(path, line, e.to_string())
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    manifest
        .snapshots
        .iter()
        .enumerate()
        .map(|(idx, rel)| load_edge_list(&base.join(rel), idx + 1, manifest.n))
        .collect()
}

fn load_edge_list(path: &Path, t: usize, n: usize) -> Result<GraphSnapshot> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let mut endpoint = || -> Result<u32> {
            let field = fields
                .next()
                .ok_or_else(|| parse_err(path, lineno, "expected `src<TAB>dst`"))?;
            field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad node id {field:?}")))
        };
        let (i, j) = (endpoint()?, endpoint()?);
        if fields.next().is_some() {
            return Err(parse_err(path, lineno, "expected exactly two fields"));
        }
        if i as usize >= n || j as usize >= n {
            return Err(parse_err(path, lineno, format!("endpoint >= n = {n}")));
        }
        if i == j {
            return Err(parse_err(path, lineno, format!("self-loop on node {i}")));
        }
        edges.push((i, j));
    }
    GraphSnapshot::new(t, n, edges).map_err(|e| parse_err(path, 0, e.to_string()))
}

/// Writes snapshots as canonical JSON lines.
pub fn write_stream(path: impl AsRef<Path>, snapshots: &[GraphSnapshot]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    for s in snapshots {
        writeln!(w, "{}", s.to_json_line()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
