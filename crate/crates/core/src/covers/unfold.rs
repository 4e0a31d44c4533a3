//! Universal covers of triangulated balls, unfolded face by face.
//!
//! A lifted vertex stores one slot per edge of its base vertex. Slots are
//! filled by walking across triangles; whenever two lifts are forced to be the
//! same point by a triangle they are merged (union-find), and their slots are
//! merged recursively. Vertices are processed in order of distance from the
//! root lift until everything within the processing radius is closed.

use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use crate::covers::complex::Mesh;
use crate::error::{Error, Result};
use crate::io::SpaceFile;
use crate::metric::{DiscretizedLengthSpace, HeapItem, MetricSpace, WeightedGraph};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoverOptions {
    /// Lifted vertices farther than this from the root lift are dropped.
    pub r_trunc: f64,
    /// Extra radius processed beyond `r_trunc`, so identifications that close
    /// just outside the kept region are still found.
    pub margin: f64,
    /// Give up once this many lifted vertices exist.
    pub max_vertices: usize,
}

impl CoverOptions {
    pub fn new(r_trunc: f64) -> Self {
        Self { r_trunc, margin: 1.0, max_vertices: DEFAULT_MAX_VERTICES }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }
}

/// Keeps the unfolding state and the kept graph within a few gigabytes.
pub const DEFAULT_MAX_VERTICES: usize = 12_000_000;

/// A truncated cover: lifted vertices within `r_trunc` of the root lift.
#[derive(Clone, Debug)]
pub struct CoverGraph {
    pub space: DiscretizedLengthSpace,
    /// Base vertex (index into the mesh the cover was built from) of each lift.
    pub projection: Vec<usize>,
    pub base_ids: Vec<String>,
    pub root: usize,
    /// Distance of each lift from the root inside the kept graph.
    pub root_distance: Vec<f64>,
    pub r_trunc: f64,
    /// Some lift lies beyond `r_trunc`; the kept graph is a proper piece.
    pub truncated: bool,
}

impl CoverGraph {
    pub fn len(&self) -> usize {
        self.projection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projection.is_empty()
    }

    /// Lifts of a base vertex, nearest to the root first.
    pub fn lifts_of(&self, base: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.len()).filter(|&v| self.projection[v] == base).collect();
        out.sort_by(|&a, &b| self.root_distance[a].total_cmp(&self.root_distance[b]).then(a.cmp(&b)));
        out
    }

    /// Base vertex id to the ids of its lifts.
    pub fn fibers(&self) -> BTreeMap<String, Vec<String>> {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let ids = self.space.graph().ids();
        for v in 0..self.len() {
            map.entry(self.base_ids[self.projection[v]].clone()).or_default().push(ids[v].clone());
        }
        map
    }

    pub fn to_space_file(&self) -> SpaceFile {
        let mut file = SpaceFile::from_graph(&self.space);
        file.fibers = Some(self.fibers());
        file
    }
}

/// Base complex in flat arrays: neighbors, edge lengths, reverse slots and,
/// per vertex, its triangles as slot pairs.
struct Base {
    off: Vec<usize>,
    nbr: Vec<u32>,
    wt: Vec<f64>,
    rev: Vec<u32>,
    foff: Vec<usize>,
    /// (slot of b1 at b, slot of b2 at b, slot of b2 at b1, slot of b1 at b2)
    fslots: Vec<[u32; 4]>,
}

impl Base {
    fn new(mesh: &Mesh) -> Self {
        let g = mesh.space.graph();
        let n = g.len();
        let mut off = vec![0];
        let mut nbr = Vec::new();
        let mut wt = Vec::new();
        for v in 0..n {
            for (u, w) in g.neighbors(v) {
                nbr.push(u as u32);
                wt.push(w);
            }
            off.push(nbr.len());
        }
        let slot = |v: usize, u: usize| -> u32 { nbr[off[v]..off[v + 1]].binary_search(&(u as u32)).expect("face edge in graph") as u32 };
        let mut rev = vec![0u32; nbr.len()];
        for v in 0..n {
            for s in off[v]..off[v + 1] {
                rev[s] = slot(nbr[s] as usize, v);
            }
        }
        let mut per: Vec<Vec<[u32; 4]>> = vec![Vec::new(); n];
        for f in &mesh.faces {
            for r in 0..3 {
                let (b, b1, b2) = (f[r], f[(r + 1) % 3], f[(r + 2) % 3]);
                per[b].push([slot(b, b1), slot(b, b2), slot(b1, b2), slot(b2, b1)]);
                per[b].push([slot(b, b2), slot(b, b1), slot(b2, b1), slot(b1, b2)]);
            }
        }
        let mut foff = vec![0];
        let mut fslots = Vec::new();
        for list in per {
            fslots.extend(list);
            foff.push(fslots.len());
        }
        Self { off, nbr, wt, rev, foff, fslots }
    }

    fn degree(&self, b: usize) -> usize {
        self.off[b + 1] - self.off[b]
    }
}

struct Unfolder<'a> {
    base: &'a Base,
    cap: usize,
    vbase: Vec<u32>,
    voff: Vec<usize>,
    slots: Vec<u32>,
    parent: Vec<u32>,
    processed: Vec<bool>,
    dist: Vec<f64>,
    pending: Vec<(u32, u32)>,
    /// Merged vertices whose distance estimate dropped.
    improved: Vec<u32>,
}

impl<'a> Unfolder<'a> {
    fn new(base: &'a Base, cap: usize) -> Self {
        Self {
            base,
            cap,
            vbase: Vec::new(),
            voff: Vec::new(),
            slots: Vec::new(),
            parent: Vec::new(),
            processed: Vec::new(),
            dist: Vec::new(),
            pending: Vec::new(),
            improved: Vec::new(),
        }
    }

    fn create(&mut self, b: usize, dist: f64) -> Result<u32> {
        let id = self.vbase.len();
        let cap = self.cap.min(NONE as usize - 1);
        if id >= cap {
            return Err(Error::OverCap { what: "lifted vertices", n: id, cap });
        }
        self.vbase.push(b as u32);
        self.voff.push(self.slots.len());
        self.slots.extend(std::iter::repeat_n(NONE, self.base.degree(b)));
        self.parent.push(id as u32);
        self.processed.push(false);
        self.dist.push(dist);
        Ok(id as u32)
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn slot(&mut self, v: u32, i: usize) -> Option<u32> {
        let s = self.slots[self.voff[v as usize] + i];
        (s != NONE).then(|| self.find(s))
    }

    fn assign(&mut self, u: u32, i: usize, w: u32) {
        let idx = self.voff[u as usize] + i;
        let s = self.slots[idx];
        if s == NONE {
            self.slots[idx] = w;
        } else {
            let x = self.find(s);
            if x != w {
                self.pending.push((x, w));
            }
        }
    }

    /// Makes `w` the neighbor of `u` across slot `i`, and `u` the neighbor of
    /// `w` across the reverse slot, merging any lifts this forces together.
    fn link(&mut self, u: u32, i: usize, w: u32) {
        let (u, w) = (self.find(u), self.find(w));
        let b = self.vbase[u as usize] as usize;
        let k = self.base.rev[self.base.off[b] + i] as usize;
        self.assign(u, i, w);
        let u = self.find(u);
        let w = self.find(w);
        self.assign(w, k, u);
        while let Some((a, c)) = self.pending.pop() {
            self.merge(a, c);
        }
    }

    fn merge(&mut self, a: u32, c: u32) {
        let (a, c) = (self.find(a), self.find(c));
        if a == c {
            return;
        }
        let (keep, drop) = (a.min(c), a.max(c));
        debug_assert_eq!(self.vbase[keep as usize], self.vbase[drop as usize]);
        self.parent[drop as usize] = keep;
        let (k, d) = (keep as usize, drop as usize);
        self.processed[k] |= self.processed[d];
        if self.dist[d] < self.dist[k] {
            self.dist[k] = self.dist[d];
            self.improved.push(keep);
        }
        let deg = self.base.degree(self.vbase[k] as usize);
        for i in 0..deg {
            let sd = self.slots[self.voff[d] + i];
            if sd == NONE {
                continue;
            }
            let sk = self.slots[self.voff[k] + i];
            if sk == NONE {
                self.slots[self.voff[k] + i] = sd;
            } else {
                self.pending.push((sk, sd));
            }
        }
    }

    /// Fills every slot of `v` and closes every triangle at `v`.
    fn process(&mut self, v: u32) -> Result<()> {
        let mut v = self.find(v);
        let b = self.vbase[v as usize] as usize;
        let (f0, f1) = (self.base.foff[b], self.base.foff[b + 1]);
        for i in 0..self.base.degree(b) {
            v = self.find(v);
            if self.slot(v, i).is_some() {
                continue;
            }
            let mut found = None;
            for f in f0..f1 {
                let [si, sj, _, k2] = self.base.fslots[f];
                if si as usize != i {
                    continue;
                }
                if let Some(u2) = self.slot(v, sj as usize) {
                    if let Some(w) = self.slot(u2, k2 as usize) {
                        found = Some(w);
                        break;
                    }
                }
            }
            let w = match found {
                Some(w) => w,
                None => {
                    let b1 = self.base.nbr[self.base.off[b] + i] as usize;
                    let d = self.dist[v as usize] + self.base.wt[self.base.off[b] + i];
                    self.create(b1, d)?
                }
            };
            self.link(v, i, w);
        }
        for f in f0..f1 {
            let [si, sj, k1, _] = self.base.fslots[f];
            v = self.find(v);
            let u1 = self.slot(v, si as usize).expect("slot filled");
            let u2 = self.slot(v, sj as usize).expect("slot filled");
            self.link(u1, k1 as usize, u2);
        }
        let v = self.find(v);
        self.processed[v as usize] = true;
        Ok(())
    }

    fn roots(&mut self) -> Vec<u32> {
        (0..self.vbase.len() as u32).map(|v| self.find(v)).collect()
    }

    /// Shortest-path distances over the current lifted graph.
    fn true_distances(&mut self, root: u32) -> Vec<f64> {
        let rep = self.roots();
        let n = rep.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        let root = rep[root as usize] as usize;
        dist[root] = 0.0;
        heap.push(HeapItem(0.0, root));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            let b = self.vbase[u] as usize;
            for i in 0..self.base.degree(b) {
                let s = self.slots[self.voff[u] + i];
                if s == NONE {
                    continue;
                }
                let w = rep[s as usize] as usize;
                let nd = d + self.base.wt[self.base.off[b] + i];
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        dist
    }
}

/// Universal cover of the whole complex `mesh`, rooted at a lift of `center`
/// and truncated at `opts.r_trunc`.
pub fn universal_cover(mesh: &Mesh, center: usize, opts: &CoverOptions) -> Result<CoverGraph> {
    if !(opts.r_trunc > 0.0 && opts.margin >= 0.0) {
        return Err(Error::Parameter(format!("need r_trunc > 0 and margin >= 0, got {} and {}", opts.r_trunc, opts.margin)));
    }
    if center >= mesh.space.len() {
        return Err(Error::UnknownPoint(format!("#{center}")));
    }
    let base = Base::new(mesh);
    let mut un = Unfolder::new(&base, opts.max_vertices);
    let r_proc = opts.r_trunc + opts.margin;
    let root = un.create(center, 0.0)?;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem(0.0, root as usize));
    loop {
        while let Some(HeapItem(d, v)) = heap.pop() {
            let v = un.find(v as u32);
            if d > un.dist[v as usize] || un.dist[v as usize] > r_proc {
                continue;
            }
            if !un.processed[v as usize] {
                un.process(v)?;
            }
            let v = un.find(v);
            let b = un.vbase[v as usize] as usize;
            for i in 0..base.degree(b) {
                let Some(w) = un.slot(v, i) else { continue };
                let nd = un.dist[v as usize] + base.wt[base.off[b] + i];
                if nd < un.dist[w as usize] || (nd == un.dist[w as usize] && !un.processed[w as usize]) {
                    un.dist[w as usize] = nd;
                    heap.push(HeapItem(nd, w as usize));
                }
            }
            for x in std::mem::take(&mut un.improved) {
                let x = un.find(x);
                heap.push(HeapItem(un.dist[x as usize], x as usize));
            }
        }
        // estimates can only shrink after merges; redo with exact distances
        let truth = un.true_distances(root);
        let rep = un.roots();
        let mut again = false;
        for v in 0..rep.len() {
            if rep[v] as usize == v && truth[v].is_finite() {
                un.dist[v] = truth[v];
                if !un.processed[v] && truth[v] <= r_proc {
                    heap.push(HeapItem(truth[v], v));
                    again = true;
                }
            }
        }
        if !again {
            break;
        }
    }
    finish(mesh, &mut un, root, opts.r_trunc)
}

fn finish(mesh: &Mesh, un: &mut Unfolder, root: u32, r_trunc: f64) -> Result<CoverGraph> {
    let truth = un.true_distances(root);
    let rep = un.roots();
    let root = rep[root as usize] as usize;
    let live: Vec<usize> = (0..rep.len()).filter(|&v| rep[v] as usize == v && truth[v].is_finite()).collect();
    let truncated = live.iter().any(|&v| truth[v] > r_trunc + 1e-12);
    let mut kept: Vec<usize> = live.into_iter().filter(|&v| truth[v] <= r_trunc + 1e-12).collect();
    kept.sort_by(|&a, &b| truth[a].total_cmp(&truth[b]).then(a.cmp(&b)));
    let mut local = vec![usize::MAX; rep.len()];
    for (k, &v) in kept.iter().enumerate() {
        local[v] = k;
    }
    let base_ids = mesh.space.graph().ids().to_vec();
    let mut ordinal = vec![0usize; base_ids.len()];
    let mut ids = Vec::with_capacity(kept.len());
    let mut projection = Vec::with_capacity(kept.len());
    for &v in &kept {
        let b = un.vbase[v] as usize;
        ids.push(format!("{}@{}", base_ids[b], ordinal[b]));
        ordinal[b] += 1;
        projection.push(b);
    }
    let mut edges = Vec::new();
    for (k, &v) in kept.iter().enumerate() {
        let b = un.vbase[v] as usize;
        for i in 0..un.base.degree(b) {
            let s = un.slots[un.voff[v] + i];
            if s == NONE {
                continue;
            }
            let w = local[rep[s as usize] as usize];
            if w != usize::MAX && k < w {
                edges.push((k, w, un.base.wt[un.base.off[b] + i]));
            }
        }
    }
    let graph = WeightedGraph::new(ids, &edges)?;
    let root_distance = graph.dijkstra(&[local[root]]);
    let space = DiscretizedLengthSpace::from_graph_unchecked(format!("{}|cover", mesh.space.id()), graph)?.with_basepoint_index(local[root]);
    Ok(CoverGraph { space, projection, base_ids, root: local[root], root_distance, r_trunc, truncated })
}

/// Universal cover of the open ball B_r(center), as the triangles whose
/// vertices all lie in the ball. Projections index into `mesh`.
pub fn universal_cover_ball(mesh: &Mesh, center: usize, r: f64, opts: &CoverOptions) -> Result<CoverGraph> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("ball radius must be positive, got {r}")));
    }
    let ball = mesh.ball(center, r)?;
    let local_center = ball.space.graph().index_of(&mesh.space.graph().ids()[center]).expect("center kept");
    let mut cover = universal_cover(&ball, local_center, opts)?;
    lift_projection(mesh, &ball, &mut cover);
    Ok(cover)
}

fn lift_projection(mesh: &Mesh, sub: &Mesh, cover: &mut CoverGraph) {
    let g = mesh.space.graph();
    let map: Vec<usize> = sub.space.graph().ids().iter().map(|id| g.index_of(id).expect("subcomplex id")).collect();
    for p in &mut cover.projection {
        *p = map[*p];
    }
    cover.base_ids = g.ids().to_vec();
}

/// The cover of B_{r1}(center) induced by the universal cover of
/// B_{r2}(center): lifts of the smaller ball, component of the root lift,
/// with its own length metric.
pub fn normal_cover(mesh: &Mesh, center: usize, r1: f64, r2: f64, opts: &CoverOptions) -> Result<CoverGraph> {
    if !(r1 > 0.0 && r1 <= r2) {
        return Err(Error::Parameter(format!("need 0 < r1 <= r2, got r1 = {r1}, r2 = {r2}")));
    }
    let big = universal_cover_ball(mesh, center, r2, opts)?;
    let base_dist = mesh.distances_from(center);
    let g = big.space.graph();
    let mask: Vec<bool> = big.projection.iter().map(|&b| base_dist[b] < r1).collect();
    let comp = g.components(Some(&mask)).into_iter().find(|c| c.binary_search(&big.root).is_ok()).expect("root lies in the small ball");
    // the component touches the truncation radius only if it was cut
    let truncated = big.truncated && comp.iter().any(|&v| big.root_distance[v] > opts.r_trunc - mesh.resolution() - 1e-12);
    let (sub, local) = g.induced(&comp)?;
    let root = local[big.root];
    let root_distance = sub.dijkstra(&[root]);
    let projection = comp.iter().map(|&v| big.projection[v]).collect();
    let space = DiscretizedLengthSpace::from_graph_unchecked(format!("{}|normal({r1},{r2})", mesh.space.id()), sub)?.with_basepoint_index(root);
    Ok(CoverGraph { space, projection, base_ids: big.base_ids, root, root_distance, r_trunc: opts.r_trunc, truncated })
}
