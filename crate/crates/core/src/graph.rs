//! Immutable undirected graphs in compressed neighbour-list form and the
//! generators for the four substrates: periodic square lattice,
//! Erdős–Rényi, Newman–Watts and Barabási–Albert.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// Periodic `side × side` square lattice. Node `(r, c)` has index `r * side + c`.
    Lattice2D {
        side: usize,
    },
    ER,
    NW,
    BA,
    /// Built directly from an edge list.
    Custom,
}

/// Undirected simple graph. Neighbours of node `i` are
/// `neighbor_list[neighbor_offsets[i]..neighbor_offsets[i + 1]]`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    neighbor_offsets: Vec<usize>,
    neighbor_list: Vec<u32>,
    kind: TopologyKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub mean_degree: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub component_count: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Rejects self-loops,
    /// duplicates (in either orientation) and out-of-range endpoints.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)], kind: TopologyKind) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::GraphParams("graph needs at least one node".into()));
        }
        if node_count > u32::MAX as usize {
            return Err(Error::GraphParams(format!("{node_count} nodes exceeds the u32 index space")));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::GraphInvariant(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::GraphInvariant(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v as u32);
            adjacency[v].push(u as u32);
        }
        for (node, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::GraphInvariant(format!("duplicate edge at node {node}")));
            }
        }
        Ok(Self::from_sorted_adjacency(adjacency, kind))
    }

    fn from_sorted_adjacency(adjacency: Vec<Vec<u32>>, kind: TopologyKind) -> Self {
        let mut neighbor_offsets = Vec::with_capacity(adjacency.len() + 1);
        let mut neighbor_list = Vec::with_capacity(adjacency.iter().map(Vec::len).sum());
        neighbor_offsets.push(0);
        for list in &adjacency {
            neighbor_list.extend_from_slice(list);
            neighbor_offsets.push(neighbor_list.len());
        }
        Graph { node_count: adjacency.len(), neighbor_offsets, neighbor_list, kind }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.neighbor_list.len() / 2
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    /// Side length when the graph is a periodic lattice.
    pub fn lattice_side(&self) -> Option<usize> {
        match self.kind {
            TopologyKind::Lattice2D { side } => Some(side),
            _ => None,
        }
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbor_list[self.neighbor_offsets[node]..self.neighbor_offsets[node + 1]]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.neighbor_offsets[node + 1] - self.neighbor_offsets[node]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn neighbor_offsets(&self) -> &[usize] {
        &self.neighbor_offsets
    }

    pub fn neighbor_list(&self) -> &[u32] {
        &self.neighbor_list
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Iterates over each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count).flat_map(move |u| {
            self.neighbors(u).iter().map(|&v| v as usize).filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    /// Walks the whole adjacency structure and checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::GraphInvariant(msg));
        if self.node_count == 0 {
            return bad("empty graph".into());
        }
        if self.neighbor_offsets.len() != self.node_count + 1 {
            return bad("offset array has wrong length".into());
        }
        if self.neighbor_offsets[0] != 0 || self.neighbor_offsets[self.node_count] != self.neighbor_list.len() {
            return bad("offset array does not span the neighbour list".into());
        }
        if self.neighbor_offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets are not nondecreasing".into());
        }
        for u in 0..self.node_count {
            let list = self.neighbors(u);
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return bad(format!("neighbours of {u} unsorted or duplicated"));
                }
            }
            for &v in list {
                let v = v as usize;
                if v >= self.node_count {
                    return bad(format!("neighbour {v} of {u} out of range"));
                }
                if v == u {
                    return bad(format!("self-loop at {u}"));
                }
                if !self.has_edge(v, u) {
                    return bad(format!("edge ({u}, {v}) has no reverse"));
                }
            }
        }
        if let TopologyKind::Lattice2D { side } = self.kind {
            if self.node_count != side * side {
                return bad(format!("lattice of side {side} has {} nodes", self.node_count));
            }
            if (0..self.node_count).any(|i| self.degree(i) != 4) {
                return bad("lattice node with degree other than 4".into());
            }
        }
        Ok(())
    }

    /// Component label per node; labels are assigned in order of each
    /// component's smallest node index.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.node_count];
        let mut queue = VecDeque::new();
        let mut count = 0;
        for start in 0..self.node_count {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let degrees = (0..g.node_count()).map(|i| g.degree(i));
    let min_degree = degrees.clone().min().unwrap_or(0);
    let max_degree = degrees.max().unwrap_or(0);
    DegreeStats {
        mean_degree: 2.0 * g.edge_count() as f64 / g.node_count() as f64,
        min_degree,
        max_degree,
        component_count: g.component_labels().1,
    }
}

/// Subgraph induced by the largest connected component, re-indexed in
/// ascending original order. Equal sizes resolve to the component holding
/// the smallest original index.
pub fn giant_component(g: &Graph) -> Graph {
    let (label, count) = g.component_labels();
    if count == 1 {
        return g.clone();
    }
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l] += 1;
    }
    // first maximum = lowest label = smallest original index
    let mut best = 0;
    for (l, &s) in sizes.iter().enumerate() {
        if s > sizes[best] {
            best = l;
        }
    }
    let mut new_index = vec![u32::MAX; g.node_count()];
    let mut next = 0u32;
    for (i, &l) in label.iter().enumerate() {
        if l == best {
            new_index[i] = next;
            next += 1;
        }
    }
    let adjacency = (0..g.node_count())
        .filter(|&i| label[i] == best)
        .map(|i| g.neighbors(i).iter().map(|&v| new_index[v as usize]).collect())
        .collect();
    let kind = match g.kind() {
        TopologyKind::Lattice2D { .. } => TopologyKind::Custom,
        k => k,
    };
    Graph::from_sorted_adjacency(adjacency, kind)
}

/// `side × side` torus; node `(r, c)` touches `(r ± 1 mod L, c)` and `(r, c ± 1 mod L)`.
pub fn make_lattice(side: usize) -> Result<Graph> {
    if side < 3 {
        return Err(Error::GraphParams(format!(
            "lattice side must be at least 3, got {side} (periodic wrap would duplicate edges)"
        )));
    }
    let n = side
        .checked_mul(side)
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::GraphParams(format!("lattice side {side} too large")))?;
    let adjacency = (0..n)
        .map(|i| {
            let (r, c) = (i / side, i % side);
            let mut list = vec![
                (((r + side - 1) % side) * side + c) as u32,
                (((r + 1) % side) * side + c) as u32,
                (r * side + (c + side - 1) % side) as u32,
                (r * side + (c + 1) % side) as u32,
            ];
            list.sort_unstable();
            list
        })
        .collect();
    Ok(Graph::from_sorted_adjacency(adjacency, TopologyKind::Lattice2D { side }))
}

/// G(N, p) with `p = k_avg / (N − 1)`, reduced to its giant component.
/// One uniform draw per node pair `(i, j)`, `i < j`, in lexicographic order.
pub fn make_er<R: Rng + ?Sized>(n: usize, k_avg: f64, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::GraphParams(format!("ER graph needs N >= 2, got {n}")));
    }
    if !(k_avg > 0.0 && k_avg < (n - 1) as f64) {
        return Err(Error::GraphParams(format!("ER mean degree must lie in (0, N-1), got {k_avg}")));
    }
    let p = k_avg / (n - 1) as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let full = Graph::from_edges(n, &edges, TopologyKind::ER)?;
    Ok(giant_component(&full))
}

/// Ring where every node links to `ring_degree / 2` neighbours per side,
/// plus one shortcut between a uniformly random non-adjacent pair for each
/// ring edge with probability `shortcut_prob`. Shortcuts are only added.
pub fn make_nw<R: Rng + ?Sized>(n: usize, ring_degree: usize, shortcut_prob: f64, rng: &mut R) -> Result<Graph> {
    if ring_degree < 2 || !ring_degree.is_multiple_of(2) {
        return Err(Error::GraphParams(format!("NW ring degree must be even and >= 2, got {ring_degree}")));
    }
    if n <= ring_degree {
        return Err(Error::GraphParams(format!("NW needs N > ring degree, got N={n}, ring={ring_degree}")));
    }
    if !(0.0..=1.0).contains(&shortcut_prob) {
        return Err(Error::GraphParams(format!("NW shortcut probability must lie in [0, 1], got {shortcut_prob}")));
    }
    let half = ring_degree / 2;
    let key = |u: usize, v: usize| if u < v { (u, v) } else { (v, u) };
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::with_capacity(n * half);
    for i in 0..n {
        for d in 1..=half {
            let e = key(i, (i + d) % n);
            present.insert(e);
            edges.push(e);
        }
    }
    let max_edges = n * (n - 1) / 2;
    let ring_edges = edges.len();
    for _ in 0..ring_edges {
        if rng.random::<f64>() >= shortcut_prob || present.len() == max_edges {
            continue;
        }
        loop {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v {
                continue;
            }
            let e = key(u, v);
            if present.insert(e) {
                edges.push(e);
                break;
            }
        }
    }
    Graph::from_edges(n, &edges, TopologyKind::NW)
}

/// Preferential attachment from a complete seed graph on `m + 1` nodes.
/// Each new node draws `m` distinct targets with probability proportional
/// to degree, rejecting repeats.
pub fn make_ba<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if m < 1 {
        return Err(Error::GraphParams("BA needs m >= 1".into()));
    }
    if n <= m + 1 {
        return Err(Error::GraphParams(format!("BA needs N > m + 1, got N={n}, m={m}")));
    }
    let mut edges = Vec::with_capacity((m + 1) * m / 2 + (n - m - 1) * m);
    // every edge endpoint once; uniform picks are degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..=m {
        for v in (u + 1)..=m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for new in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    Graph::from_edges(n, &edges, TopologyKind::BA)
}

/// Topology description as used on the command line and in config files,
/// e.g. `lattice:L=50`, `er:N=3000,k=4`, `nw:N=3000,ring=4,ps=0.05`, `ba:N=3000,m=2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologySpec {
    Lattice { side: usize },
    Er { n: usize, k_avg: f64 },
    Nw { n: usize, ring_degree: usize, shortcut_prob: f64 },
    Ba { n: usize, m: usize },
}

impl TopologySpec {
    pub const NW_DEFAULT_RING: usize = 4;
    pub const NW_DEFAULT_SHORTCUT_PROB: f64 = 0.05;

    pub fn is_lattice(&self) -> bool {
        matches!(self, TopologySpec::Lattice { .. })
    }

    /// Random topologies need an independent sample per graph realization.
    pub fn is_random(&self) -> bool {
        !self.is_lattice()
    }

    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        match *self {
            TopologySpec::Lattice { side } => make_lattice(side),
            TopologySpec::Er { n, k_avg } => make_er(n, k_avg, rng),
            TopologySpec::Nw { n, ring_degree, shortcut_prob } => make_nw(n, ring_degree, shortcut_prob, rng),
            TopologySpec::Ba { n, m } => make_ba(n, m, rng),
        }
    }

    /// Short file-name friendly label.
    pub fn label(&self) -> String {
        self.to_string().replace([':', ','], "_").replace('=', "")
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySpec::Lattice { side } => write!(f, "lattice:L={side}"),
            TopologySpec::Er { n, k_avg } => write!(f, "er:N={n},k={k_avg}"),
            TopologySpec::Nw { n, ring_degree, shortcut_prob } => {
                write!(f, "nw:N={n},ring={ring_degree},ps={shortcut_prob}")
            }
            TopologySpec::Ba { n, m } => write!(f, "ba:N={n},m={m}"),
        }
    }
}

impl FromStr for TopologySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |msg: String| Error::Config(format!("topology `{s}`: {msg}"));
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: Vec<(&str, &str)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{item}`")))?;
            params.push((k.trim(), v.trim()));
        }
        let allowed: &[&str] = match name.trim() {
            "lattice" => &["L"],
            "er" => &["N", "k"],
            "nw" => &["N", "ring", "ps"],
            "ba" => &["N", "m"],
            other => return Err(err(format!("unknown topology `{other}` (expected lattice, er, nw or ba)"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(err(format!("unknown parameter `{k}`")));
        }
        let get = |key: &str| params.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let int = |key: &str| -> Result<Option<usize>> {
            get(key)
                .map(|v| v.parse::<usize>().map_err(|_| err(format!("{key}={v} is not a nonnegative integer"))))
                .transpose()
        };
        let real = |key: &str| -> Result<Option<f64>> {
            get(key).map(|v| v.parse::<f64>().map_err(|_| err(format!("{key}={v} is not a number")))).transpose()
        };
        let need = |key: &str, v: Option<usize>| v.ok_or_else(|| err(format!("missing {key}")));
        Ok(match name.trim() {
            "lattice" => TopologySpec::Lattice { side: need("L", int("L")?)? },
            "er" => {
                TopologySpec::Er { n: need("N", int("N")?)?, k_avg: real("k")?.ok_or_else(|| err("missing k".into()))? }
            }
            "nw" => TopologySpec::Nw {
                n: need("N", int("N")?)?,
                ring_degree: int("ring")?.unwrap_or(Self::NW_DEFAULT_RING),
                shortcut_prob: real("ps")?.unwrap_or(Self::NW_DEFAULT_SHORTCUT_PROB),
            },
            "ba" => TopologySpec::Ba { n: need("N", int("N")?)?, m: need("m", int("m")?)? },
            _ => unreachable!(),
        })
    }
}

impl serde::Serialize for TopologySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for TopologySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
