//! Immutable directed road graph in compressed adjacency form.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense node index in `[0, |V|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>, weight: f64) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            weight,
        }
    }
}

/// Directed weighted graph with planar node coordinates.
///
/// Edges are stored sorted by `(from, to)` (stable, so parallel edges keep
/// their input order) and double as the out-adjacency. The in-adjacency holds
/// edge ids grouped by destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    coords: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_edge_ids: Vec<usize>,
}

impl Graph {
    /// Builds a graph from `(id, x, y)` node records and directed edges.
    pub fn build(nodes: &[(NodeId, f64, f64)], edges: Vec<Edge>) -> Result<Graph> {
        let n = nodes.len();
        let mut coords = vec![[f64::NAN; 2]; n];
        let mut seen = vec![false; n];
        for &(id, x, y) in nodes {
            let i = id.index();
            if i >= n {
                return Err(Error::NonDenseIds {
                    node_count: n,
                    detail: format!("id {i} out of range"),
                });
            }
            if seen[i] {
                return Err(Error::NonDenseIds {
                    node_count: n,
                    detail: format!("id {i} repeated"),
                });
            }
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFiniteCoord { node: i });
            }
            seen[i] = true;
            coords[i] = [x, y];
        }
        Graph::from_coords(coords, edges)
    }

    /// Builds a graph whose node `i` sits at `coords[i]`.
    pub fn from_coords(coords: Vec<[f64; 2]>, mut edges: Vec<Edge>) -> Result<Graph> {
        let n = coords.len();
        if let Some(node) = coords
            .iter()
            .position(|c| !c[0].is_finite() || !c[1].is_finite())
        {
            return Err(Error::NonFiniteCoord { node });
        }
        for (index, e) in edges.iter().enumerate() {
            for node in [e.from.index(), e.to.index()] {
                if node >= n {
                    return Err(Error::DanglingEndpoint {
                        index,
                        node,
                        node_count: n,
                    });
                }
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidWeight {
                    index,
                    weight: e.weight,
                });
            }
            if e.from == e.to {
                return Err(Error::SelfLoop {
                    index,
                    node: e.from.index(),
                });
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for e in &edges {
            out_offsets[e.from.index() + 1] += 1;
            in_offsets[e.to.index() + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_edge_ids = vec![0usize; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            let slot = &mut cursor[e.to.index()];
            in_edge_ids[*slot] = id;
            *slot += 1;
        }
        Ok(Graph {
            coords,
            edges,
            out_offsets,
            in_offsets,
            in_edge_ids,
        })
    }

    /// Builds a graph from undirected links, each ingested as two opposing edges.
    pub fn from_undirected(coords: Vec<[f64; 2]>, links: &[Edge]) -> Result<Graph> {
        let edges = links
            .iter()
            .flat_map(|e| [*e, Edge::new(e.to, e.from, e.weight)])
            .collect();
        Graph::from_coords(coords, edges)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    /// All edges, sorted by `(from, to)`. An edge's position is its edge id.
    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    #[inline]
    pub fn coord(&self, v: NodeId) -> [f64; 2] {
        self.coords[v.index()]
    }

    #[inline]
    pub fn out_edges(&self, v: NodeId) -> &[Edge] {
        let i = v.index();
        &self.edges[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    /// Ids of edges entering `v`, ordered by source node.
    #[inline]
    pub fn in_edge_ids(&self, v: NodeId) -> &[usize] {
        let i = v.index();
        &self.in_edge_ids[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edge_ids(v).iter().map(|&id| &self.edges[id])
    }

    /// CSR view of the in-adjacency: `(offsets, edge ids)`.
    pub fn in_csr(&self) -> (&[usize], &[usize]) {
        (&self.in_offsets, &self.in_edge_ids)
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_edges(v).len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_edge_ids(v).len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Smallest weight among parallel edges `u -> v`, if any.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.out_edges(u)
            .iter()
            .filter(|e| e.to == v)
            .map(|e| e.weight)
            .min_by(f64::total_cmp)
    }

    /// Euclidean length of the coordinate bounding-box diagonal.
    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }

    fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in &self.coords {
            for a in 0..2 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        (lo, hi)
    }

    /// Same topology with new edge weights, given in edge-id order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Graph> {
        if weights.len() != self.edge_count() {
            return Err(Error::Shape {
                op: "with_weights",
                detail: format!("{} weights for {} edges", weights.len(), self.edge_count()),
            });
        }
        let mut g = self.clone();
        for (index, (e, &w)) in g.edges.iter_mut().zip(weights).enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidWeight { index, weight: w });
            }
            e.weight = w;
        }
        Ok(g)
    }

    /// Graph with every edge direction flipped.
    pub fn reversed(&self) -> Graph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.to, e.from, e.weight))
            .collect();
        Graph::from_coords(self.coords.clone(), edges).expect("reversal preserves validity")
    }

    /// Min-max scales coordinates per axis into `[0, 1]`; a degenerate axis maps to 0.
    pub fn normalize_coords(&self) -> Graph {
        let mut g = self.clone();
        g.coords = normalized_coords(&self.coords);
        g
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_edge_list(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_edge_list(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.node_count(), self.edge_count())?;
        for (i, c) in self.coords.iter().enumerate() {
            writeln!(w, "{} {} {}", i, fmt_sig9(c[0]), fmt_sig9(c[1]))?;
        }
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.from, e.to, fmt_sig9(e.weight))?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        parse_edge_list(&text, path)
    }
}

pub(crate) fn normalized_coords(coords: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for c in coords {
        for a in 0..2 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    coords
        .iter()
        .map(|c| {
            let mut out = [0.0; 2];
            for a in 0..2 {
                let span = hi[a] - lo[a];
                out[a] = if span > 0.0 { (c[a] - lo[a]) / span } else { 0.0 };
            }
            out
        })
        .collect()
}

/// Parses the edge-list text format; `origin` only labels error messages.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Graph> {
    let perr = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| perr(1, "missing header line".into()))?;
    let head = fields::<2>(header).ok_or_else(|| perr(hline, "expected \"<nodes> <edges>\"".into()))?;
    let n: usize = head[0]
        .parse()
        .map_err(|_| perr(hline, format!("bad node count {:?}", head[0])))?;
    let m: usize = head[1]
        .parse()
        .map_err(|_| perr(hline, format!("bad edge count {:?}", head[1])))?;

    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, format!("expected {n} node lines")))?;
        let f = fields::<3>(l).ok_or_else(|| perr(ln, "expected \"<id> <x> <y>\"".into()))?;
        let id: usize = f[0].parse().map_err(|_| perr(ln, format!("bad node id {:?}", f[0])))?;
        let x = parse_f64(f[1]).ok_or_else(|| perr(ln, format!("bad coordinate {:?}", f[1])))?;
        let y = parse_f64(f[2]).ok_or_else(|| perr(ln, format!("bad coordinate {:?}", f[2])))?;
        if id >= n {
            return Err(perr(ln, format!("node id {id} out of range")));
        }
        nodes.push((NodeId::from(id), x, y));
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(0, format!("expected {m} edge lines")))?;
        let f = fields::<3>(l).ok_or_else(|| perr(ln, "expected \"<from> <to> <weight>\"".into()))?;
        let from: usize = f[0].parse().map_err(|_| perr(ln, format!("bad node id {:?}", f[0])))?;
        let to: usize = f[1].parse().map_err(|_| perr(ln, format!("bad node id {:?}", f[1])))?;
        let w = parse_f64(f[2]).ok_or_else(|| perr(ln, format!("bad weight {:?}", f[2])))?;
        if from >= n || to >= n {
            return Err(perr(ln, format!("endpoint out of range in {from} -> {to}")));
        }
        if !(w > 0.0) {
            return Err(perr(ln, format!("weight must be positive, got {w}")));
        }
        if from == to {
            return Err(perr(ln, format!("self-loop on node {from}")));
        }
        edges.push(Edge::new(from, to, w));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content after edge list".into()));
    }
    Graph::build(&nodes, edges)
}

fn fields<const N: usize>(line: &str) -> Option<[&str; N]> {
    let mut it = line.split_whitespace();
    let mut out = [""; N];
    for slot in &mut out {
        *slot = it.next()?;
    }
    it.next().is_none().then_some(out)
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros trimmed.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
