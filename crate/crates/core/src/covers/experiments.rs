//! The polygon and glued-sphere cover experiments.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::covers::complex::Mesh;
use crate::covers::meshes::{glued_sphere, polygon_rp2, GluedSphereOptions};
use crate::covers::unfold::{normal_cover, universal_cover, universal_cover_ball, CoverGraph, CoverOptions, DEFAULT_MAX_VERTICES};
use crate::invariants::{covering_number, ExactCaps, Mode};
use crate::error::{Error, Result};
use crate::metric::{HeapItem, MetricSpace, Subspace};

/// Ball radius halfway between the side distance 1 and the corner distance.
pub fn sw_radius(k: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (PI / (2 * k) as f64).cos())
}

/// Smallest distance between two of `sources` in the cover graph: one
/// multi-source search, then the best edge joining two different regions.
pub fn min_pairwise_distance(cover: &CoverGraph, sources: &[usize]) -> f64 {
    if sources.len() < 2 {
        return f64::INFINITY;
    }
    let g = cover.space.graph();
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut label = vec![usize::MAX; g.len()];
    let mut heap = BinaryHeap::new();
    for (l, &s) in sources.iter().enumerate() {
        dist[s] = 0.0;
        label[s] = l;
        heap.push(HeapItem(0.0, s));
    }
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for (v, w) in g.neighbors(u) {
            if d + w < dist[v] {
                dist[v] = d + w;
                label[v] = label[u];
                heap.push(HeapItem(d + w, v));
            }
        }
    }
    g.edges().filter(|&(u, v, _)| label[u] != label[v]).map(|(u, v, w)| dist[u] + w + dist[v]).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct SwOptions {
    pub mesh_h: f64,
    /// Truncation radius of the cover; lifts are counted in B_min(4, r_trunc).
    pub r_trunc: f64,
    pub margin: f64,
    pub max_vertices: usize,
    /// Covering numbers of the pointed ball at these scales.
    pub covering_eps: Vec<f64>,
}

impl SwOptions {
    /// Truncation at 4 + 2h, as needed to see all of B_4.
    pub fn new(mesh_h: f64) -> Self {
        Self { mesh_h, r_trunc: 4.0 + 2.0 * mesh_h, margin: 4.0 * mesh_h, max_vertices: DEFAULT_MAX_VERTICES, covering_eps: vec![1.0] }
    }

    fn cover_options(&self) -> CoverOptions {
        CoverOptions { r_trunc: self.r_trunc, margin: self.margin, max_vertices: self.max_vertices }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SwRow {
    pub k: usize,
    pub r_k: f64,
    pub mesh_h: f64,
    pub base_vertices: usize,
    pub cover_vertices: usize,
    pub truncated: bool,
    /// Radius of the pointed ball the lifts are counted in.
    pub radius: f64,
    pub lifts: usize,
    /// Distance from the root to the nearest other lift of the center. Deck
    /// transformations are isometries, so this is the smallest pairwise
    /// distance between lifts in the full cover.
    pub nearest_lift: f64,
    /// Smallest pairwise distance between the counted lifts inside the
    /// truncated graph, which can only overestimate the full-cover value.
    pub graph_min_pairwise: f64,
    pub covering: Vec<(f64, usize)>,
    pub count_ok: bool,
    pub separation_ok: bool,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SwReport {
    pub options: SwOptions,
    pub rows: Vec<SwRow>,
    /// Lift counts never decrease with k.
    pub monotone: bool,
    pub pass: bool,
}

/// Base mesh, center and truncated universal cover of the ball of radius r_k.
pub fn sw_cover(k: usize, mesh_h: f64, opts: &CoverOptions) -> Result<(Mesh, usize, CoverGraph)> {
    let mesh = polygon_rp2(k, mesh_h)?;
    let o = mesh.marked("o")?;
    let cover = universal_cover_ball(&mesh, o, sw_radius(k), opts)?;
    Ok((mesh, o, cover))
}

/// Lifts of the center within `radius` of the root lift.
pub fn lifts_within(cover: &CoverGraph, base: usize, radius: f64) -> Vec<usize> {
    cover.lifts_of(base).into_iter().filter(|&v| cover.root_distance[v] <= radius + 1e-9).collect()
}

/// One row of the polygon experiment.
pub fn sw_row(k: usize, opts: &SwOptions) -> Result<SwRow> {
    let start = Instant::now();
    let h = opts.mesh_h;
    let (mesh, o, cover) = sw_cover(k, h, &opts.cover_options())?;
    let radius = opts.r_trunc.min(4.0);
    let lifts = lifts_within(&cover, o, radius);
    let nearest_lift = lifts.iter().skip(1).map(|&v| cover.root_distance[v]).fold(f64::INFINITY, f64::min);
    let graph_min_pairwise = min_pairwise_distance(&cover, &lifts);
    let ball = pointed_ball(&cover, radius)?;
    let covering = opts
        .covering_eps
        .iter()
        .map(|&eps| Ok((eps, covering_number(&ball, eps, Mode::Greedy, ExactCaps::default())?.count)))
        .collect::<Result<_>>()?;
    Ok(SwRow {
        k,
        r_k: sw_radius(k),
        mesh_h: h,
        base_vertices: mesh.space.len(),
        cover_vertices: cover.len(),
        truncated: cover.truncated,
        radius,
        lifts: lifts.len(),
        nearest_lift,
        graph_min_pairwise,
        covering,
        count_ok: lifts.len() >= k,
        separation_ok: nearest_lift >= 2.0 - 10.0 * h,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// For each k, the lifts of the polygon center near the root of the
/// universal cover of B_{r_k}(o_k), their separation, and covering numbers
/// of the pointed ball. Rows run one after another since each cover can
/// take a large share of memory.
pub fn experiment_sw_packing(ks: &[usize], opts: &SwOptions) -> Result<SwReport> {
    if ks.is_empty() {
        return Err(Error::Parameter("empty k range".into()));
    }
    let rows: Vec<SwRow> = ks.iter().map(|&k| sw_row(k, opts)).collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[0].k > w[1].k || w[0].lifts <= w[1].lifts);
    let pass = monotone && rows.iter().all(|r| r.count_ok && r.separation_ok);
    Ok(SwReport { options: opts.clone(), rows, monotone, pass })
}

/// Pointed piece B_R(root) of a cover, as a subspace of its graph metric.
pub fn pointed_ball(cover: &CoverGraph, radius: f64) -> Result<Subspace<'_, crate::metric::DiscretizedLengthSpace>> {
    let members = (0..cover.len()).filter(|&v| cover.root_distance[v] <= radius + 1e-12).collect();
    Subspace::new(&cover.space, members)
}

/// Normal cover of B_{1/2}(o_k) inside the universal cover of B_{r_k}(o_k).
pub fn sw_normal_cover(k: usize, mesh_h: f64, opts: &CoverOptions) -> Result<(Mesh, usize, CoverGraph)> {
    let mesh = polygon_rp2(k, mesh_h)?;
    let o = mesh.marked("o")?;
    let cover = normal_cover(&mesh, o, 0.5, sw_radius(k), opts)?;
    Ok((mesh, o, cover))
}

#[derive(Clone, Debug, Serialize)]
pub struct PetersenRow {
    pub detour: f64,
    pub mesh_h: f64,
    pub cover_vertices: usize,
    pub truncated: bool,
    pub max_distance: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// Lifts of o within distance 2π of the root lift.
    pub lifts: usize,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PetersenReport {
    pub mesh_h: f64,
    pub r_trunc: f64,
    pub eps: f64,
    pub rows: Vec<PetersenRow>,
    /// Lift counts grow strictly as the detour scale shrinks.
    pub increasing: bool,
}

/// The glued sphere with caps of radius `detour` removed around both cone
/// points: the ball B_{π/2}(o) stopped short of the cone points.
pub fn petersen_region(mesh_h: f64, detour: f64) -> Result<Mesh> {
    let mut refine = vec![detour];
    let mut d = detour;
    // geometric rings off the cap, so the detour circle is resolved
    while d * 2.0 < PI / 4.0 && refine.len() < 8 {
        d *= 2.0;
        refine.push(d);
    }
    glued_sphere(&GluedSphereOptions { mesh_h, refine, cap: Some(detour) })
}

/// Universal cover of the sphere region for each detour scale, truncated at
/// `r_trunc`. Reports the farthest lifted vertex against π + eps + 10h and
/// the number of lifts of o within 2π.
pub fn experiment_petersen(mesh_h: f64, eps: f64, r_trunc: f64, detours: &[f64]) -> Result<PetersenReport> {
    if r_trunc < 2.0 * PI {
        return Err(Error::Parameter(format!("r_trunc must be at least 2π, got {r_trunc}")));
    }
    let opts = CoverOptions::new(r_trunc).with_margin(0.5);
    let rows: Vec<PetersenRow> = detours
        .par_iter()
        .map(|&detour| {
            let start = Instant::now();
            let mesh = petersen_region(mesh_h, detour)?;
            let o = mesh.marked("o")?;
            let cover = universal_cover(&mesh, o, &opts)?;
            let max_distance = cover.root_distance.iter().copied().fold(0.0, f64::max);
            let bound = PI + eps + 10.0 * mesh_h;
            Ok(PetersenRow {
                detour,
                mesh_h,
                cover_vertices: cover.len(),
                truncated: cover.truncated,
                max_distance,
                bound,
                within_bound: max_distance <= bound,
                lifts: lifts_within(&cover, o, 2.0 * PI).len(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    let mut by_scale: Vec<&PetersenRow> = rows.iter().collect();
    by_scale.sort_by(|a, b| b.detour.total_cmp(&a.detour));
    let increasing = by_scale.windows(2).all(|w| w[0].lifts < w[1].lifts);
    Ok(PetersenReport { mesh_h, r_trunc, eps, rows, increasing })
}
