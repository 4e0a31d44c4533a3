//! Finite metric spaces and graph-discretized length spaces.
//!
//! Two concrete representations share the [`MetricSpace`] trait: a dense
//! distance table ([`FiniteMetricSpace`]) for small spaces and exact solvers,
//! and a weighted graph whose shortest-path metric is evaluated lazily
//! ([`DiscretizedLengthSpace`]) for meshes and cover graphs with up to
//! millions of vertices.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the metric axioms.
pub const METRIC_TOL: f64 = 1e-9;
/// Tolerance for closed-ball membership and ε-separation.
pub const BALL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMode {
    Open,
    Closed,
}

impl BallMode {
    #[inline]
    pub fn contains(self, d: f64, r: f64) -> bool {
        match self {
            BallMode::Open => d < r,
            BallMode::Closed => d <= r + BALL_TOL,
        }
    }
}

/// `true` when two points at distance `d` count as ε-discrete.
#[inline]
pub fn separated(d: f64, eps: f64) -> bool {
    d >= eps - BALL_TOL
}

/// Open-ball coverage used by covering numbers; exact complement of [`separated`].
#[inline]
pub fn covered(d: f64, eps: f64) -> bool {
    !separated(d, eps)
}

pub trait MetricSpace: Sync {
    fn id(&self) -> &str;
    fn len(&self) -> usize;
    fn point_id(&self, i: usize) -> &str;
    fn basepoint(&self) -> Option<usize>;
    fn has_measure(&self) -> bool;
    /// Point mass; counting measure when the space carries none.
    fn weight(&self, i: usize) -> f64;
    fn distances_from(&self, i: usize) -> Vec<f64>;
    /// Points of the ball around `center` with their distances, in no particular order.
    fn neighborhood(&self, center: usize, r: f64, mode: BallMode) -> Vec<(usize, f64)>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn index_of(&self, id: &str) -> Option<usize> {
        (0..self.len()).find(|&i| self.point_id(i) == id)
    }

    fn ball_measure(&self, center: usize, r: f64) -> f64 {
        self.neighborhood(center, r, BallMode::Open)
            .iter()
            .map(|&(i, _)| self.weight(i))
            .sum()
    }

    /// Point indices sorted by id, the canonical tie-break order.
    fn lex_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.point_id(a).cmp(self.point_id(b)));
        order
    }
}

/// Dense finite metric space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    id: String,
    points: Vec<String>,
    dist: Vec<f64>,
    basepoint: Option<usize>,
    measure: Option<Vec<f64>>,
    boundary: Option<Vec<usize>>,
}

impl FiniteMetricSpace {
    /// Builds a space from a square table. Shape, finiteness and sign are
    /// checked here; the metric axioms are checked by [`validate_metric`].
    pub fn from_rows(id: impl Into<String>, points: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptySubset);
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input(format!("distance table is not {n}x{n}")));
        }
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            for &d in row {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Input(format!("distance {d} is not a finite nonnegative number")));
                }
                dist.push(d);
            }
        }
        check_unique(&points)?;
        Ok(Self { id: id.into(), points, dist, basepoint: None, measure: None, boundary: None })
    }

    /// Builds a space from a distance function on indices.
    pub fn from_fn(id: impl Into<String>, points: Vec<String>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let n = points.len();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i, j) }).collect()).collect();
        Self::from_rows(id, points, &rows)
    }

    /// Euclidean distances between coordinate tuples; ids are `p0, p1, ...` zero-padded.
    pub fn euclidean(id: impl Into<String>, coords: &[Vec<f64>]) -> Result<Self> {
        let points = padded_ids("p", coords.len());
        Self::from_fn(id, points, |i, j| euclid(&coords[i], &coords[j]))
    }

    pub fn with_basepoint(mut self, id: &str) -> Result<Self> {
        let i = self.index_of(id).ok_or_else(|| Error::UnknownPoint(id.to_string()))?;
        self.basepoint = Some(i);
        Ok(self)
    }

    pub fn with_basepoint_index(mut self, i: usize) -> Self {
        assert!(i < self.len());
        self.basepoint = Some(i);
        self
    }

    pub fn with_measure(mut self, weights: Vec<f64>) -> Result<Self> {
        check_measure(&weights, self.len())?;
        self.measure = Some(weights);
        Ok(self)
    }

    pub fn with_boundary(mut self, boundary: Vec<usize>) -> Result<Self> {
        let mut b = boundary;
        b.sort_unstable();
        b.dedup();
        if b.iter().any(|&i| i >= self.len()) {
            return Err(Error::Input("boundary index out of range".into()));
        }
        self.boundary = Some(b);
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.points.len() + j]
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn measure(&self) -> Option<&[f64]> {
        self.measure.as_deref()
    }

    pub fn boundary(&self) -> Option<&[usize]> {
        self.boundary.as_deref()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.points.len()).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// All distances multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.dist.iter_mut().for_each(|d| *d *= lambda);
        out
    }
}

impl MetricSpace for FiniteMetricSpace {
    fn id(&self) -> &str {
        &self.id
    }
    fn len(&self) -> usize {
        self.points.len()
    }
    fn point_id(&self, i: usize) -> &str {
        &self.points[i]
    }
    fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }
    fn has_measure(&self) -> bool {
        self.measure.is_some()
    }
    fn weight(&self, i: usize) -> f64 {
        self.measure.as_ref().map_or(1.0, |m| m[i])
    }
    fn distances_from(&self, i: usize) -> Vec<f64> {
        let n = self.len();
        self.dist[i * n..(i + 1) * n].to_vec()
    }
    fn neighborhood(&self, center: usize, r: f64, mode: BallMode) -> Vec<(usize, f64)> {
        let n = self.len();
        self.dist[center * n..(center + 1) * n]
            .iter()
            .enumerate()
            .filter(|&(_, &d)| mode.contains(d, r))
            .map(|(j, &d)| (j, d))
            .collect()
    }
    fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p == id)
    }
}

/// Immutable weighted undirected graph in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Parallel edges collapse to the shortest one.
    pub fn new(ids: Vec<String>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = ids.len();
        let index = check_unique(&ids)?;
        let mut lists: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u},{v}) references a missing vertex")));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at `{}`", ids[u])));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Input(format!("edge ({},{}) has non-positive length {w}", ids[u], ids[v])));
            }
            lists[u].push((v as u32, w));
            lists[v].push((u as u32, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for mut list in lists {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            list.dedup_by_key(|e| e.0);
            for (t, w) in list {
                targets.push(t);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(Self { ids, index, offsets, targets, weights })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbors of `v` sorted by index, with edge lengths.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[v], self.offsets[v + 1]);
        self.targets[a..b].iter().zip(&self.weights[a..b]).map(|(&t, &w)| (t as usize, w))
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let (a, b) = (self.offsets[u], self.offsets[u + 1]);
        self.targets[a..b].binary_search(&(v as u32)).ok().map(|k| self.weights[a + k])
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).flat_map(move |u| self.neighbors(u).filter(move |&(v, _)| u < v).map(move |(v, w)| (u, v, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn max_edge(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Single-source shortest paths; unreachable vertices get `f64::INFINITY`.
    pub fn dijkstra(&self, sources: &[usize]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapItem(0.0, s));
        }
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (v, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
        dist
    }

    /// Shortest-path tree parents alongside distances.
    pub fn dijkstra_tree(&self, source: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        parent[source] = source;
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (v, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = u;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
        (dist, parent)
    }

    /// Dijkstra restricted to the ball of radius `r`; cost proportional to the ball.
    pub fn ball(&self, center: usize, r: f64, mode: BallMode) -> Vec<(usize, f64)> {
        let mut best: HashMap<usize, f64> = HashMap::new();
        let mut out = Vec::new();
        let mut heap = BinaryHeap::new();
        if !mode.contains(0.0, r) {
            return out;
        }
        best.insert(center, 0.0);
        heap.push(HeapItem(0.0, center));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if best.get(&u).is_some_and(|&b| d > b) {
                continue;
            }
            out.push((u, d));
            for (v, w) in self.neighbors(u) {
                let nd = d + w;
                if !mode.contains(nd, r) {
                    continue;
                }
                match best.get(&v) {
                    Some(&b) if b <= nd => {}
                    _ => {
                        best.insert(v, nd);
                        heap.push(HeapItem(nd, v));
                    }
                }
            }
        }
        out
    }

    /// Component labels in vertex order.
    pub fn components(&self, mask: Option<&[bool]>) -> Vec<Vec<usize>> {
        let n = self.len();
        let keep = |v: usize| mask.is_none_or(|m| m[v]);
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] || !keep(s) {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let u = comp[k];
                k += 1;
                for (v, _) in self.neighbors(u) {
                    if !seen[v] && keep(v) {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Subgraph induced on `vertices` (in the given order) and the local index of each.
    pub fn induced(&self, vertices: &[usize]) -> Result<(WeightedGraph, Vec<usize>)> {
        let mut local = vec![usize::MAX; self.len()];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let ids = vertices.iter().map(|&v| self.ids[v].clone()).collect();
        let mut edges = Vec::new();
        for (k, &u) in vertices.iter().enumerate() {
            for (v, w) in self.neighbors(u) {
                let lv = local[v];
                if lv != usize::MAX && k < lv {
                    edges.push((k, lv, w));
                }
            }
        }
        Ok((WeightedGraph::new(ids, &edges)?, local))
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct HeapItem(pub f64, pub usize);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    // min-heap on distance, then index
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// A connected weighted graph together with its shortest-path metric.
#[derive(Clone, Debug)]
pub struct DiscretizedLengthSpace {
    id: String,
    graph: WeightedGraph,
    resolution: f64,
    basepoint: Option<usize>,
    measure: Option<Vec<f64>>,
    boundary: Option<Vec<usize>>,
}

impl DiscretizedLengthSpace {
    /// Checks connectivity and that every edge is a shortest path between its
    /// endpoints.
    pub fn from_graph(id: impl Into<String>, graph: WeightedGraph) -> Result<Self> {
        let space = Self::from_graph_unchecked(id, graph)?;
        space.check_geodesic_edges()?;
        Ok(space)
    }

    /// Connectivity is still enforced; the geodesic-edge scan is skipped.
    pub(crate) fn from_graph_unchecked(id: impl Into<String>, graph: WeightedGraph) -> Result<Self> {
        if graph.is_empty() {
            return Err(Error::EmptySubset);
        }
        let comps = graph.components(None);
        if comps.len() > 1 {
            let a = graph.ids()[comps[0][0]].clone();
            let b = graph.ids()[comps[1][0]].clone();
            return Err(Error::Disconnected(a, b));
        }
        let resolution = graph.max_edge();
        Ok(Self { id: id.into(), graph, resolution, basepoint: None, measure: None, boundary: None })
    }

    pub fn from_edges(id: impl Into<String>, ids: Vec<String>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_graph(id, WeightedGraph::new(ids, edges)?)
    }

    fn check_geodesic_edges(&self) -> Result<()> {
        let g = &self.graph;
        for u in 0..g.len() {
            let far = g.neighbors(u).map(|(_, w)| w).fold(0.0, f64::max);
            let ball: HashMap<usize, f64> = g.ball(u, far, BallMode::Closed).into_iter().collect();
            for (v, w) in g.neighbors(u) {
                let d = ball[&v];
                if d < w - METRIC_TOL {
                    return Err(Error::Input(format!(
                        "edge ({},{}) of length {w} is longer than the shortest path {d}",
                        g.ids()[u],
                        g.ids()[v]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn with_basepoint_index(mut self, i: usize) -> Self {
        assert!(i < self.graph.len());
        self.basepoint = Some(i);
        self
    }

    pub fn with_basepoint(self, id: &str) -> Result<Self> {
        let i = self.graph.index_of(id).ok_or_else(|| Error::UnknownPoint(id.to_string()))?;
        Ok(self.with_basepoint_index(i))
    }

    pub fn with_measure(mut self, weights: Vec<f64>) -> Result<Self> {
        check_measure(&weights, self.graph.len())?;
        self.measure = Some(weights);
        Ok(self)
    }

    pub fn with_boundary(mut self, mut boundary: Vec<usize>) -> Result<Self> {
        boundary.sort_unstable();
        boundary.dedup();
        if boundary.iter().any(|&i| i >= self.graph.len()) {
            return Err(Error::Input("boundary index out of range".into()));
        }
        self.boundary = Some(boundary);
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Maximum edge length `h`.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn measure(&self) -> Option<&[f64]> {
        self.measure.as_deref()
    }

    pub fn boundary(&self) -> Option<&[usize]> {
        self.boundary.as_deref()
    }

    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.graph.dijkstra(&[u])[v]
    }

    /// Vertex sequence of one shortest path from `u` to `v`.
    pub fn shortest_path(&self, u: usize, v: usize) -> Vec<usize> {
        let (_, parent) = self.graph.dijkstra_tree(u);
        let mut path = vec![v];
        let mut x = v;
        while x != u {
            x = parent[x];
            path.push(x);
        }
        path.reverse();
        path
    }

    /// Materializes the all-pairs table.
    pub fn to_finite(&self) -> Result<FiniteMetricSpace> {
        let n = self.graph.len();
        if n > 6000 {
            return Err(Error::OverCap { what: "dense distance table", n, cap: 6000 });
        }
        let rows: Vec<Vec<f64>> = {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(|u| self.graph.dijkstra(&[u])).collect()
        };
        let mut out = FiniteMetricSpace::from_rows(self.id.clone(), self.graph.ids().to_vec(), &rows)?;
        out.basepoint = self.basepoint;
        out.measure = self.measure.clone();
        out.boundary = self.boundary.clone();
        Ok(out)
    }

    /// All edge lengths multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let edges: Vec<_> = self.graph.edges().map(|(u, v, w)| (u, v, w * lambda)).collect();
        let graph = WeightedGraph::new(self.graph.ids().to_vec(), &edges)?;
        let mut out = Self::from_graph_unchecked(self.id.clone(), graph)?;
        out.basepoint = self.basepoint;
        out.measure = self.measure.clone();
        out.boundary = self.boundary.clone();
        Ok(out)
    }
}

impl MetricSpace for DiscretizedLengthSpace {
    fn id(&self) -> &str {
        &self.id
    }
    fn len(&self) -> usize {
        self.graph.len()
    }
    fn point_id(&self, i: usize) -> &str {
        &self.graph.ids()[i]
    }
    fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }
    fn has_measure(&self) -> bool {
        self.measure.is_some()
    }
    fn weight(&self, i: usize) -> f64 {
        self.measure.as_ref().map_or(1.0, |m| m[i])
    }
    fn distances_from(&self, i: usize) -> Vec<f64> {
        self.graph.dijkstra(&[i])
    }
    fn neighborhood(&self, center: usize, r: f64, mode: BallMode) -> Vec<(usize, f64)> {
        self.graph.ball(center, r, mode)
    }
    fn index_of(&self, id: &str) -> Option<usize> {
        self.graph.index_of(id)
    }
}

/// A subset of a space carrying the restricted (ambient) metric.
pub struct Subspace<'a, S: MetricSpace + ?Sized> {
    parent: &'a S,
    id: String,
    members: Vec<usize>,
    local: HashMap<usize, usize>,
}

impl<'a, S: MetricSpace + ?Sized> Subspace<'a, S> {
    pub fn new(parent: &'a S, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptySubset);
        }
        let local = members.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        Ok(Self { id: format!("{}|sub", parent.id()), parent, members, local })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn parent_index(&self, local: usize) -> usize {
        self.members[local]
    }

    pub fn local_index(&self, parent: usize) -> Option<usize> {
        self.local.get(&parent).copied()
    }

    /// Dense copy of the restricted metric.
    pub fn to_finite(&self) -> Result<FiniteMetricSpace> {
        use rayon::prelude::*;
        let rows: Vec<Vec<f64>> = self
            .members
            .par_iter()
            .map(|&m| {
                let d = self.parent.distances_from(m);
                self.members.iter().map(|&k| d[k]).collect()
            })
            .collect();
        let ids = self.members.iter().map(|&m| self.parent.point_id(m).to_string()).collect();
        let mut out = FiniteMetricSpace::from_rows(self.id.clone(), ids, &rows)?;
        out.basepoint = self.basepoint();
        if self.parent.has_measure() {
            out.measure = Some(self.members.iter().map(|&m| self.parent.weight(m)).collect());
        }
        Ok(out)
    }
}

impl<S: MetricSpace + ?Sized> MetricSpace for Subspace<'_, S> {
    fn id(&self) -> &str {
        &self.id
    }
    fn len(&self) -> usize {
        self.members.len()
    }
    fn point_id(&self, i: usize) -> &str {
        self.parent.point_id(self.members[i])
    }
    fn basepoint(&self) -> Option<usize> {
        self.parent.basepoint().and_then(|b| self.local_index(b))
    }
    fn has_measure(&self) -> bool {
        self.parent.has_measure()
    }
    fn weight(&self, i: usize) -> f64 {
        self.parent.weight(self.members[i])
    }
    fn distances_from(&self, i: usize) -> Vec<f64> {
        let d = self.parent.distances_from(self.members[i]);
        self.members.iter().map(|&m| d[m]).collect()
    }
    fn neighborhood(&self, center: usize, r: f64, mode: BallMode) -> Vec<(usize, f64)> {
        self.parent
            .neighborhood(self.members[center], r, mode)
            .into_iter()
            .filter_map(|(p, d)| self.local_index(p).map(|l| (l, d)))
            .collect()
    }
    fn index_of(&self, id: &str) -> Option<usize> {
        self.parent.index_of(id).and_then(|p| self.local_index(p))
    }
}

/// Outcome of [`validate_metric`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MetricVerdict {
    Pass,
    NonzeroDiagonal { x: String, value: f64 },
    Asymmetric { x: String, y: String, gap: f64 },
    /// `d(x,z) - d(x,y) - d(y,z)` is the reported excess.
    Triangle { x: String, y: String, z: String, excess: f64 },
    NonpositiveMeasure { x: String, value: f64 },
}

impl MetricVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, MetricVerdict::Pass)
    }
}

/// Checks the metric axioms; on a triangle failure reports the worst triple.
pub fn validate_metric(space: &FiniteMetricSpace) -> MetricVerdict {
    let n = space.len();
    let name = |i: usize| space.points[i].clone();
    for i in 0..n {
        let d = space.dist(i, i);
        if d.abs() > METRIC_TOL {
            return MetricVerdict::NonzeroDiagonal { x: name(i), value: d };
        }
        for j in i + 1..n {
            let gap = (space.dist(i, j) - space.dist(j, i)).abs();
            if gap > METRIC_TOL {
                return MetricVerdict::Asymmetric { x: name(i), y: name(j), gap };
            }
        }
    }
    if let Some(m) = &space.measure {
        if let Some((i, &w)) = m.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
            return MetricVerdict::NonpositiveMeasure { x: name(i), value: w };
        }
    }
    let mut worst = (0.0, 0, 0, 0);
    for x in 0..n {
        for y in 0..n {
            let dxy = space.dist(x, y);
            for z in 0..n {
                let excess = space.dist(x, z) - dxy - space.dist(y, z);
                if excess > worst.0 {
                    worst = (excess, x, y, z);
                }
            }
        }
    }
    if worst.0 > METRIC_TOL {
        let (excess, x, y, z) = worst;
        return MetricVerdict::Triangle { x: name(x), y: name(y), z: name(z), excess };
    }
    MetricVerdict::Pass
}

/// Shortest-path metric of a connected weighted graph.
pub fn length_metric(id: &str, vertices: Vec<String>, edges: &[(usize, usize, f64)]) -> Result<DiscretizedLengthSpace> {
    DiscretizedLengthSpace::from_edges(id, vertices, edges)
}

/// Restricted metric on a subset given by ids.
pub fn restrict(space: &FiniteMetricSpace, subset: &[&str]) -> Result<FiniteMetricSpace> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut idx = Vec::with_capacity(subset.len());
    for s in subset {
        idx.push(space.index_of(s).ok_or_else(|| Error::UnknownPoint(s.to_string()))?);
    }
    idx.sort_unstable();
    idx.dedup();
    let points = idx.iter().map(|&i| space.points[i].clone()).collect();
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| space.dist(i, j)).collect()).collect();
    let mut out = FiniteMetricSpace::from_rows(space.id.clone(), points, &rows)?;
    out.basepoint = space.basepoint.and_then(|b| idx.iter().position(|&i| i == b));
    out.measure = space.measure.as_ref().map(|m| idx.iter().map(|&i| m[i]).collect());
    out.boundary = space
        .boundary
        .as_ref()
        .map(|b| idx.iter().enumerate().filter(|(_, i)| b.contains(i)).map(|(k, _)| k).collect());
    Ok(out)
}

/// Point indices of the ball, sorted.
pub fn ball<S: MetricSpace + ?Sized>(space: &S, center: usize, r: f64, mode: BallMode) -> Vec<usize> {
    let mut v: Vec<usize> = space.neighborhood(center, r, mode).into_iter().map(|(i, _)| i).collect();
    v.sort_unstable();
    v
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `prefix` followed by a zero-padded index, so lexicographic and numeric order agree.
pub fn padded_ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn check_unique(ids: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::Input(format!("duplicate point id `{id}`")));
        }
    }
    Ok(index)
}

fn check_measure(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::Input(format!("measure has {} weights for {n} points", weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::Input(format!("measure weight {w} is not positive")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize, w: f64) -> DiscretizedLengthSpace {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, w)).collect();
        DiscretizedLengthSpace::from_edges("path", padded_ids("v", n), &edges).unwrap()
    }

    fn grid(n: usize) -> DiscretizedLengthSpace {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = i * n + j;
                if i + 1 < n {
                    edges.push((v, v + n, 1.0));
                }
                if j + 1 < n {
                    edges.push((v, v + 1, 1.0));
                }
            }
        }
        DiscretizedLengthSpace::from_edges("grid", padded_ids("v", n * n), &edges).unwrap()
    }

    #[test]
    fn equilateral_passes() {
        let s = FiniteMetricSpace::from_fn("eq", padded_ids("p", 3), |_, _| 1.0).unwrap();
        assert_eq!(validate_metric(&s), MetricVerdict::Pass);
    }

    #[test]
    fn violated_triangle_reports_triple() {
        let rows = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let s = FiniteMetricSpace::from_rows("bad", vec!["a".into(), "b".into(), "c".into()], &rows).unwrap();
        match validate_metric(&s) {
            MetricVerdict::Triangle { x, y, z, excess } => {
                assert_eq!((x.as_str(), y.as_str(), z.as_str()), ("a", "b", "c"));
                assert!((excess - 3.0).abs() < 1e-12);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn malformed_table_is_input_error() {
        let rows = vec![vec![0.0, 1.0], vec![1.0]];
        let err = FiniteMetricSpace::from_rows("x", vec!["a".into(), "b".into()], &rows).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn euclidean_grid_passes() {
        let coords: Vec<Vec<f64>> =
            (0..10).flat_map(|i| (0..10).map(move |j| vec![i as f64 / 9.0, j as f64 / 9.0])).collect();
        let s = FiniteMetricSpace::euclidean("grid", &coords).unwrap();
        assert!(validate_metric(&s).is_pass());
    }

    #[test]
    fn path_and_cycle_distances() {
        let p = path(3, 1.0);
        assert_eq!(p.dist(0, 2), 2.0);
        let c = DiscretizedLengthSpace::from_edges(
            "c4",
            padded_ids("v", 4),
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        )
        .unwrap();
        assert_eq!(c.dist(0, 2), 2.0);
    }

    #[test]
    fn grid_corner_distance_matches_bfs() {
        let g = grid(8);
        // BFS hop count on a unit grid
        let mut hops = vec![usize::MAX; 64];
        hops[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for (v, _) in g.graph().neighbors(u) {
                if hops[v] == usize::MAX {
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        assert_eq!(hops[63], 14);
        assert_eq!(g.dist(0, 63), 14.0);
    }

    #[test]
    fn disconnected_graph_names_vertices() {
        let err = DiscretizedLengthSpace::from_edges("d", padded_ids("v", 3), &[(0, 1, 1.0)]).unwrap_err();
        match err {
            Error::Disconnected(a, b) => assert_eq!((a.as_str(), b.as_str()), ("v0", "v2")),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn shortcut_edge_rejected() {
        let err = DiscretizedLengthSpace::from_edges("s", padded_ids("v", 3), &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)])
            .unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn restrict_behaviour() {
        let c = DiscretizedLengthSpace::from_edges(
            "c4",
            padded_ids("v", 4),
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        )
        .unwrap()
        .with_basepoint_index(0)
        .to_finite()
        .unwrap();
        let all: Vec<&str> = c.points().iter().map(String::as_str).collect();
        assert_eq!(restrict(&c, &all).unwrap(), c);
        let pair = restrict(&c, &["v0", "v2"]).unwrap();
        assert_eq!(pair.len(), 2);
        assert_eq!(pair.dist(0, 1), 2.0);
        assert_eq!(pair.basepoint(), Some(0));
        assert_eq!(restrict(&c, &["v1", "v3"]).unwrap().basepoint(), None);
        assert!(matches!(restrict(&c, &[]), Err(Error::EmptySubset)));
    }

    #[test]
    fn circle_arc_restriction_keeps_ambient_distances() {
        let n = 40;
        let w = 2.0 * std::f64::consts::PI / n as f64;
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, w)).collect();
        let circle = DiscretizedLengthSpace::from_edges("circle", padded_ids("v", n), &edges).unwrap().to_finite().unwrap();
        let arc: Vec<&str> = circle.points()[..=n / 2].iter().map(String::as_str).collect();
        let r = restrict(&circle, &arc).unwrap();
        for i in 0..r.len() {
            for j in 0..r.len() {
                assert_eq!(r.dist(i, j), circle.dist(i, j));
            }
        }
        // the endpoints of a closed half-circle arc: the arc itself is a shortest path
        assert!((r.dist(0, n / 2) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn ball_modes() {
        let p = path(3, 1.0);
        assert!(ball(&p, 1, 0.0, BallMode::Open).is_empty());
        assert_eq!(ball(&p, 1, 0.0, BallMode::Closed), vec![1]);
        assert_eq!(ball(&p, 1, 1.5, BallMode::Open), vec![0, 1, 2]);
        assert_eq!(ball(&p, 1, 1.0, BallMode::Open), vec![1]);
        assert_eq!(ball(&p, 1, 1.0, BallMode::Closed), vec![0, 1, 2]);
    }

    #[test]
    fn euclidean_ball_matches_scan() {
        let coords: Vec<Vec<f64>> =
            (0..11).flat_map(|i| (0..11).map(move |j| vec![i as f64 / 10.0, j as f64 / 10.0])).collect();
        let s = FiniteMetricSpace::euclidean("g", &coords).unwrap();
        let got = ball(&s, 0, 0.5, BallMode::Open);
        let want: Vec<usize> = (0..coords.len()).filter(|&i| euclid(&coords[0], &coords[i]) < 0.5).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn graph_ball_matches_full_dijkstra() {
        let g = grid(9);
        let full = g.distances_from(40);
        for r in [0.5, 1.0, 2.5, 4.0] {
            for mode in [BallMode::Open, BallMode::Closed] {
                let got = ball(&g, 40, r, mode);
                let want: Vec<usize> = (0..81).filter(|&v| mode.contains(full[v], r)).collect();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn length_metric_of_grid_is_a_metric() {
        assert!(validate_metric(&grid(6).to_finite().unwrap()).is_pass());
    }

    #[test]
    fn subspace_neighborhood_uses_ambient_metric() {
        let c = path(5, 1.0);
        let sub = Subspace::new(&c, vec![0, 4, 2]).unwrap();
        assert_eq!(sub.members(), &[0, 2, 4]);
        let mut nb = sub.neighborhood(0, 2.5, BallMode::Open);
        nb.sort_by_key(|e| e.0);
        assert_eq!(nb, vec![(0, 0.0), (1, 2.0)]);
    }
}
