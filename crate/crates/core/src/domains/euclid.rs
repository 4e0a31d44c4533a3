//! Euclidean domains given by membership tests, sampled on lattices.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DomainInGraph;
use crate::error::{Error, Result};
use crate::metric::{euclid, padded_ids, DiscretizedLengthSpace, WeightedGraph};

/// A closed subset of `R^2` or `R^3` given by a membership test.
#[derive(Clone)]
pub struct Region {
    dim: usize,
    test: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl Region {
    pub fn new(dim: usize, test: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Self { dim, test: Arc::new(test) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        (self.test)(p)
    }
}

impl std::fmt::Debug for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Region(dim={})", self.dim)
    }
}

/// The closed unit square.
pub fn square_region() -> Region {
    Region::new(2, |p| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]))
}

/// Region between the ray `y = -2`, the y-axis and the graph of `sin(1/x)`,
/// cut off at `x = 1`.
pub fn sine_curve_region() -> Region {
    Region::new(2, |p| p[0] > 0.0 && p[0] <= 1.0 && p[1] >= -2.0 && p[1] <= (1.0 / p[0]).sin())
}

/// Uniform membership lattice, the form in which sampled domains are read
/// from CSV (`x,y[,z],inside`). Off-lattice queries snap to the nearest sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
    inside: Vec<bool>,
}

impl SampleGrid {
    /// Samples `region` on the lattice spanning `[lo, hi]` with about `step`
    /// spacing; the spacing is adjusted so both ends are lattice points.
    pub fn from_region(region: &Region, lo: &[f64], hi: &[f64], step: f64) -> Result<Self> {
        let dim = region.dim();
        if lo.len() != dim || hi.len() != dim || !(2..=3).contains(&dim) {
            return Err(Error::Parameter("sample grids are 2- or 3-dimensional boxes".into()));
        }
        let n = ((hi[0] - lo[0]) / step).round() as usize;
        let step = (hi[0] - lo[0]) / n as f64;
        let counts: Vec<usize> = (0..dim).map(|a| ((hi[a] - lo[a]) / step).round() as usize + 1).collect();
        let hi = (0..dim)
            .map(|a| {
                let end = lo[a] + (counts[a] - 1) as f64 * step;
                if (end - hi[a]).abs() < 1e-9 * step { hi[a] } else { end }
            })
            .collect();
        let mut grid = Self { lo: lo.to_vec(), hi, step, counts, inside: Vec::new() };
        grid.inside = (0..grid.total()).into_par_iter().map(|k| region.contains(&grid.coords(k))).collect();
        Ok(grid)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<(Vec<f64>, bool)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let Ok(values) = parsed else {
                if rows.is_empty() {
                    continue; // header
                }
                return Err(Error::Input(format!("line {}: expected numbers", ln + 1)));
            };
            if !(3..=4).contains(&values.len()) {
                return Err(Error::Input(format!("line {}: expected x,y[,z],inside", ln + 1)));
            }
            let (flag, coords) = values.split_last().expect("non-empty");
            rows.push((coords.to_vec(), *flag != 0.0));
        }
        if rows.is_empty() {
            return Err(Error::Input("empty sample grid".into()));
        }
        let dim = rows[0].0.len();
        if rows.iter().any(|r| r.0.len() != dim) {
            return Err(Error::Input("mixed dimensions in sample grid".into()));
        }
        let mut axes: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for (c, _) in &rows {
            for a in 0..dim {
                axes[a].push(c[a]);
            }
        }
        for ax in &mut axes {
            ax.sort_by(f64::total_cmp);
            ax.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        }
        let step = axes.iter().filter(|a| a.len() > 1).map(|a| a[1] - a[0]).fold(f64::INFINITY, f64::min);
        if !step.is_finite() {
            return Err(Error::Input("sample grid needs at least two values per axis".into()));
        }
        for ax in &axes {
            if ax.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step) {
                return Err(Error::Input("sample grid is not a uniform lattice".into()));
            }
        }
        let counts: Vec<usize> = axes.iter().map(Vec::len).collect();
        let lo = axes.iter().map(|a| a[0]).collect();
        let hi = axes.iter().map(|a| a[a.len() - 1]).collect();
        let mut grid = Self { lo, hi, step, counts, inside: Vec::new() };
        if rows.len() != grid.total() {
            return Err(Error::Input(format!("expected {} lattice rows, found {}", grid.total(), rows.len())));
        }
        grid.inside = vec![false; grid.total()];
        for (c, flag) in rows {
            let k = grid.snap(&c).ok_or_else(|| Error::Internal("lattice row off grid".into()))?;
            grid.inside[k] = flag;
        }
        Ok(grid)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.dim() == 2 { "x,y,inside\n" } else { "x,y,z,inside\n" });
        for k in 0..self.total() {
            for c in self.coords(k) {
                let _ = write!(out, "{c},");
            }
            out.push_str(if self.inside[k] { "1\n" } else { "0\n" });
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn total(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.hi.clone()
    }

    fn multi(&self, mut k: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            m[a] = k % self.counts[a];
            k /= self.counts[a];
        }
        m
    }

    pub fn coords(&self, k: usize) -> Vec<f64> {
        self.multi(k)
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                let c = self.counts[a];
                if c == 1 {
                    self.lo[a]
                } else {
                    self.lo[a] + (self.hi[a] - self.lo[a]) * i as f64 / (c - 1) as f64
                }
            })
            .collect()
    }

    fn snap(&self, p: &[f64]) -> Option<usize> {
        let mut k = 0;
        for a in 0..self.dim() {
            let i = ((p[a] - self.lo[a]) / self.step).round();
            if i < 0.0 || i >= self.counts[a] as f64 {
                return None;
            }
            k = k * self.counts[a] + i as usize;
        }
        Some(k)
    }

    /// Membership of the nearest lattice sample; outside the box is outside.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.snap(p).is_some_and(|k| self.inside[k])
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn region(&self) -> Region {
        let me = self.clone();
        Region::new(self.dim(), move |p| me.contains(p))
    }

    /// Inside samples joined to their inside lattice neighbors (8 in 2D, 26 in 3D).
    pub fn to_cloud(&self) -> Result<SampleCloud> {
        SampleCloud::from_pieces(&self.region(), &[(self.lo.clone(), self.hi(), self.step)])
    }
}

/// Sample points of a domain with a neighbor graph, boundary flags, and the
/// local sample spacing at each point.
#[derive(Clone, Debug)]
pub struct SampleCloud {
    pub points: Vec<Vec<f64>>,
    pub spacing: Vec<f64>,
    pub boundary: Vec<bool>,
    pub edges: Vec<(usize, usize, f64)>,
}

fn neighbor_offsets(dim: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|v| (-1..=1).map(move |d| [v.clone(), vec![d]].concat())).collect();
    }
    out.retain(|v| v.iter().any(|&d| d != 0));
    out
}

fn segment_inside(region: &Region, a: &[f64], b: &[f64]) -> bool {
    (1..8).all(|k| {
        let s = k as f64 / 8.0;
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
        region.contains(&p)
    })
}

impl SampleCloud {
    /// Lattice pieces `(lo, hi, step)` sampled inside `region`. Each piece is
    /// joined internally by lattice neighbors; pieces are stitched by edges of
    /// length at most 1.5 times the coarser spacing whose segments stay inside.
    /// A point is boundary when one of its axis neighbors at its own spacing
    /// lies outside the region.
    pub fn from_pieces(region: &Region, pieces: &[(Vec<f64>, Vec<f64>, f64)]) -> Result<Self> {
        let dim = region.dim();
        let offsets = neighbor_offsets(dim);
        let mut cloud = SampleCloud { points: Vec::new(), spacing: Vec::new(), boundary: Vec::new(), edges: Vec::new() };
        let mut piece_of = Vec::new();
        for (pi, (lo, hi, step)) in pieces.iter().enumerate() {
            let counts: Vec<usize> = (0..dim).map(|a| ((hi[a] - lo[a]) / step).round() as usize + 1).collect();
            let coord = |a: usize, i: usize| {
                if counts[a] == 1 {
                    lo[a]
                } else {
                    lo[a] + (hi[a] - lo[a]) * i as f64 / (counts[a] - 1) as f64
                }
            };
            let total: usize = counts.iter().product();
            let mut local = vec![usize::MAX; total];
            let flat = |m: &[usize]| m.iter().zip(&counts).fold(0, |k, (&i, &c)| k * c + i);
            for k in 0..total {
                let mut m = vec![0; dim];
                let mut r = k;
                for a in (0..dim).rev() {
                    m[a] = r % counts[a];
                    r /= counts[a];
                }
                let p: Vec<f64> = (0..dim).map(|a| coord(a, m[a])).collect();
                if !region.contains(&p) {
                    continue;
                }
                let mut on_boundary = false;
                for a in 0..dim {
                    for sgn in [-1.0, 1.0] {
                        let mut q = p.clone();
                        q[a] += sgn * step;
                        on_boundary |= !region.contains(&q);
                    }
                }
                local[k] = cloud.points.len();
                cloud.points.push(p);
                cloud.spacing.push(*step);
                cloud.boundary.push(on_boundary);
                piece_of.push(pi);
                for off in &offsets {
                    // only look backwards so each edge is added once
                    let mut nm = Vec::with_capacity(dim);
                    for a in 0..dim {
                        let v = m[a] as i64 + off[a];
                        if v < 0 || v >= counts[a] as i64 {
                            break;
                        }
                        nm.push(v as usize);
                    }
                    if nm.len() < dim {
                        continue;
                    }
                    let nk = flat(&nm);
                    if nk < k && local[nk] != usize::MAX {
                        let (u, v) = (local[nk], local[k]);
                        let w = euclid(&cloud.points[u], &cloud.points[v]);
                        cloud.edges.push((u, v, w));
                    }
                }
            }
        }
        if pieces.len() > 1 {
            cloud.stitch(region, &piece_of);
        }
        if cloud.points.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(cloud)
    }

    fn stitch(&mut self, region: &Region, piece_of: &[usize]) {
        let reach = 1.5 * self.spacing.iter().copied().fold(0.0, f64::max);
        let key = |p: &[f64]| p.iter().map(|x| (x / reach).floor() as i64).collect::<Vec<_>>();
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in self.points.iter().enumerate() {
            cells.entry(key(p)).or_default().push(i);
        }
        let dim = self.points[0].len();
        let mut offsets = neighbor_offsets(dim);
        offsets.push(vec![0; dim]);
        let mut extra = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            let base = key(p);
            for off in &offsets {
                let cell: Vec<i64> = base.iter().zip(off).map(|(a, b)| a + b).collect();
                for &j in cells.get(&cell).map_or(&[][..], Vec::as_slice) {
                    if j <= i || piece_of[j] == piece_of[i] {
                        continue;
                    }
                    let d = euclid(p, &self.points[j]);
                    let limit = 1.5 * self.spacing[i].max(self.spacing[j]);
                    if d > 1e-12 && d <= limit && segment_inside(region, p, &self.points[j]) {
                        extra.push((i, j, d));
                    }
                }
            }
        }
        self.edges.extend(extra);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Euclidean distance to the nearest boundary sample.
    pub fn boundary_distance(&self) -> Vec<f64> {
        let bpts: Vec<&Vec<f64>> = self.points.iter().zip(&self.boundary).filter(|(_, &b)| b).map(|(p, _)| p).collect();
        self.points
            .par_iter()
            .map(|p| bpts.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// The neighbor graph as a length space, with boundary tags.
    pub fn to_space(&self, id: &str) -> Result<DiscretizedLengthSpace> {
        let graph = WeightedGraph::new(padded_ids("s", self.len()), &self.edges)?;
        let boundary = (0..self.len()).filter(|&i| self.boundary[i]).collect();
        DiscretizedLengthSpace::from_graph_unchecked(id, graph)?.with_boundary(boundary)
    }

    pub fn to_domain(&self, id: &str) -> Result<DomainInGraph> {
        DomainInGraph::from_space(&self.to_space(id)?)
    }
}

/// Two unit squares joined by a straight corridor of the given width and
/// length, sampled coarsely in the squares and finely in the corridor.
pub fn corridor_cloud(width: f64, length: f64, coarse: f64, fine: f64) -> Result<(Region, SampleCloud)> {
    let (w, l) = (width, length);
    let region = Region::new(2, move |p| {
        let (x, y) = (p[0], p[1]);
        let in_a = (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y);
        let in_b = (1.0 + l..=2.0 + l).contains(&x) && (0.0..=1.0).contains(&y);
        let in_c = (1.0..=1.0 + l).contains(&x) && (y - 0.5).abs() <= w / 2.0 + 1e-15;
        in_a || in_b || in_c
    });
    let rows = (w / fine).round().max(2.0);
    let fine = w / rows;
    let pieces = vec![
        (vec![0.0, 0.0], vec![1.0, 1.0], coarse),
        (vec![1.0 + l, 0.0], vec![2.0 + l, 1.0], coarse),
        (vec![1.0 + fine, 0.5 - w / 2.0], vec![1.0 + l - fine, 0.5 + w / 2.0], fine),
    ];
    let cloud = SampleCloud::from_pieces(&region, &pieces)?;
    Ok((region, cloud))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub theta: f64,
    pub height: f64,
    pub directions: usize,
    pub direction_spacing: f64,
    pub shells: usize,
    pub tested: usize,
    pub failures: usize,
    /// Coordinates of the first failing sample, in lattice order.
    pub witness: Option<Vec<f64>>,
    pub pass: bool,
    /// `1/sin θ`: on pass the domain is `(t/sin θ, H)`-undistorted.
    pub tau: f64,
    pub t0: f64,
}

const CONE_SHELLS: usize = 8;

fn directions(dim: usize) -> (Vec<Vec<f64>>, f64) {
    if dim == 2 {
        let n = 64;
        let dirs = (0..n).map(|i| TAU * i as f64 / n as f64).map(|a| vec![a.cos(), a.sin()]).collect();
        (dirs, TAU / n as f64)
    } else {
        let n = 256;
        let golden = PI * (3.0 - 5f64.sqrt());
        let dirs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                vec![r * a.cos(), r * a.sin(), z]
            })
            .collect();
        // covering radius of the direction set, estimated as the largest nearest-neighbor angle
        let spacing = dirs
            .iter()
            .enumerate()
            .map(|(i, u)| {
                dirs.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, v)| dot(u, v).clamp(-1.0, 1.0).acos())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        (dirs, spacing)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Lattice of sample offsets filling the cone of half-angle `theta` and
/// height `height` around the unit axis `v`.
fn cone_offsets(v: &[f64], theta: f64, height: f64, step: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in 1..=CONE_SHELLS {
        let rho = height * k as f64 / CONE_SHELLS as f64;
        if v.len() == 2 {
            let base = v[1].atan2(v[0]);
            let m = ((2.0 * theta * rho / step).ceil() as usize).max(2);
            for j in 0..=m {
                let a = base - theta + 2.0 * theta * j as f64 / m as f64;
                out.push(vec![rho * a.cos(), rho * a.sin()]);
            }
        } else {
            let helper = if v[0].abs() < 0.9 { vec![1.0, 0.0, 0.0] } else { vec![0.0, 1.0, 0.0] };
            let e1 = normalized(cross(v, &helper));
            let e2 = cross(v, &e1);
            let mp = ((theta * rho / step).ceil() as usize).max(1);
            for i in 0..=mp {
                let alpha = theta * i as f64 / mp as f64;
                let ring = ((TAU * rho * alpha.sin() / step).ceil() as usize).max(1);
                for j in 0..ring {
                    let phi = TAU * j as f64 / ring as f64;
                    let (s, c) = (alpha.sin(), alpha.cos());
                    out.push(
                        (0..3).map(|a| rho * (c * v[a] + s * (phi.cos() * e1[a] + phi.sin() * e2[a]))).collect(),
                    );
                }
            }
        }
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Searches, at every inside sample, the direction grid for a `(θ, H)`-cone
/// whose sample lattice lies inside the domain.
pub fn cone_condition_check(grid: &SampleGrid, theta: f64, height: f64) -> Result<ConeReport> {
    if !(theta > 0.0 && theta <= PI / 2.0) || !(height > 0.0) {
        return Err(Error::Parameter(format!("need 0 < theta ≤ π/2 and H > 0, got {theta}, {height}")));
    }
    let (dirs, spacing) = directions(grid.dim());
    if spacing > theta {
        return Err(Error::Resolution(format!("direction spacing {spacing:.4} exceeds theta {theta:.4}")));
    }
    let cones: Vec<Vec<Vec<f64>>> = dirs.iter().map(|v| cone_offsets(v, theta, height, grid.step())).collect();
    let samples: Vec<usize> = (0..grid.total()).filter(|&k| grid.inside[k]).collect();
    let ok: Vec<bool> = samples
        .par_iter()
        .map(|&k| {
            let x = grid.coords(k);
            cones.iter().any(|cone| {
                cone.iter().all(|off| {
                    let p: Vec<f64> = x.iter().zip(off).map(|(a, b)| a + b).collect();
                    grid.contains(&p)
                })
            })
        })
        .collect();
    let failures = ok.iter().filter(|&&b| !b).count();
    let witness = ok.iter().position(|&b| !b).map(|i| grid.coords(samples[i]));
    Ok(ConeReport {
        theta,
        height,
        directions: dirs.len(),
        direction_spacing: spacing,
        shells: CONE_SHELLS,
        tested: samples.len(),
        failures,
        witness,
        pass: failures == 0,
        tau: 1.0 / theta.sin(),
        t0: height,
    })
}

/// Length factor and boundary-distance constant of the flatness property.
const JONES_C: f64 = 450.0;
/// Interior depth divisor of the implied covering statement.
const JONES_DEPTH: f64 = 1801.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JonesPairFailure {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    /// Length of the shortest admissible lattice path, infinite if none exists.
    pub best_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JonesScale {
    pub r: f64,
    pub neighborhood: f64,
    pub interior_depth: f64,
    pub max_gap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JonesReport {
    pub r0: f64,
    pub max_pair_distance: f64,
    pub tested_pairs: usize,
    pub failures: Vec<JonesPairFailure>,
    pub pass: bool,
    /// `W ⊂ closed 450r-neighborhood of W°_{r/1801}` per tested scale.
    pub scales: Vec<JonesScale>,
}

/// Samples pairs at distance at most `r0/7` and looks for a lattice path of
/// length at most `450 d(x,y)` along which every point `z` keeps
/// `d(z, ∂W) + spacing(z) ≥ d(z,x) d(z,y) / (450 d(x,y))`.
pub fn jones_flatness_check(cloud: &SampleCloud, r0: f64, pairs: usize, seed: u64) -> Result<JonesReport> {
    let max_d = r0 / 7.0;
    let coarse = cloud.max_spacing();
    if max_d <= 2.0 * coarse {
        return Err(Error::Resolution(format!("pair scale {max_d} is not resolved by spacing {coarse}")));
    }
    let space = cloud.to_space("jones")?;
    let graph = space.graph();
    let bdist = cloud.boundary_distance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cloud.len();
    let mut chosen = Vec::with_capacity(pairs);
    let mut tries = 0;
    while chosen.len() < pairs && tries < 1000 * pairs.max(1) {
        tries += 1;
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let d = euclid(&cloud.points[i], &cloud.points[j]);
        if i != j && d <= max_d && d > 0.0 {
            chosen.push((i, j, d));
        }
    }
    let failures: Vec<JonesPairFailure> = chosen
        .par_iter()
        .filter_map(|&(i, j, d)| {
            let (x, y) = (&cloud.points[i], &cloud.points[j]);
            let admissible: Vec<bool> = (0..n)
                .map(|z| {
                    let p = &cloud.points[z];
                    bdist[z] + cloud.spacing[z] >= euclid(p, x) * euclid(p, y) / (JONES_C * d)
                })
                .collect();
            let len = restricted_distance(graph, i, j, &admissible, JONES_C * d);
            (len > JONES_C * d).then(|| JonesPairFailure { x: x.clone(), y: y.clone(), distance: d, best_length: len })
        })
        .collect();
    let domain = DomainInGraph::from_space(&space)?;
    let gdist = domain.boundary_distance();
    let mut scales = Vec::new();
    let mut r = max_d;
    while r > 2.0 * coarse && scales.len() < 6 {
        let depth = r / JONES_DEPTH;
        let interior: Vec<usize> = (0..n).filter(|&v| gdist[v] > depth).collect();
        let gap = if interior.is_empty() {
            f64::INFINITY
        } else {
            graph.dijkstra(&interior).into_iter().fold(0.0, f64::max)
        };
        let neighborhood = JONES_C * r;
        scales.push(JonesScale { r, neighborhood, interior_depth: depth, max_gap: gap, pass: gap <= neighborhood });
        r /= 2.0;
    }
    Ok(JonesReport {
        r0,
        max_pair_distance: max_d,
        tested_pairs: chosen.len(),
        pass: failures.is_empty(),
        failures,
        scales,
    })
}

/// Dijkstra through admissible vertices only, abandoned beyond `limit`.
fn restricted_distance(graph: &WeightedGraph, s: usize, t: usize, ok: &[bool], limit: f64) -> f64 {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut best: HashMap<usize, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(s, 0.0);
    heap.push(Reverse((OrdF(0.0), s)));
    while let Some(Reverse((OrdF(d), u))) = heap.pop() {
        if u == t {
            return d;
        }
        if d > limit || best.get(&u).is_some_and(|&b| d > b) {
            continue;
        }
        for (v, w) in graph.neighbors(u) {
            if !ok[v] {
                continue;
            }
            let nd = d + w;
            if best.get(&v).is_none_or(|&b| nd < b) {
                best.insert(v, nd);
                heap.push(Reverse((OrdF(nd), v)));
            }
        }
    }
    f64::INFINITY
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct OrdF(f64);
impl Eq for OrdF {}
impl Ord for OrdF {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_plane() -> Region {
        Region::new(2, |p| p[1] >= 0.0)
    }

    #[test]
    fn half_plane_passes_cone_check() {
        let g = SampleGrid::from_region(&half_plane(), &[0.0, 0.0], &[1.0, 1.0], 0.05).unwrap();
        // the sampling box adds right-angled corners, so only cones up to π/4 are tested
        let big = SampleGrid::from_region(&half_plane(), &[-1.0, 0.0], &[1.0, 2.0], 0.05).unwrap();
        for theta in [0.2, PI / 8.0, PI / 4.0] {
            assert!(cone_condition_check(&big, theta, 0.3).unwrap().pass, "theta {theta}");
        }
        assert!(g.contains(&[0.5, 0.0]));
        assert!(!g.contains(&[0.5, -0.03]));
    }

    #[test]
    fn unit_square_cone() {
        let g = SampleGrid::from_region(&square_region(), &[0.0, 0.0], &[1.0, 1.0], 0.02).unwrap();
        let r = cone_condition_check(&g, PI / 4.0, 0.2).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.tau - 2f64.sqrt()).abs() < 1e-12);
        // a wider cone does not fit in a right-angled corner
        assert!(!cone_condition_check(&g, PI / 3.0, 0.2).unwrap().pass);
    }

    #[test]
    fn coarse_direction_grid_is_rejected() {
        let g = SampleGrid::from_region(&square_region(), &[0.0, 0.0], &[1.0, 1.0], 0.1).unwrap();
        assert!(matches!(cone_condition_check(&g, 0.05, 0.2), Err(Error::Resolution(_))));
    }

    #[test]
    fn sine_curve_fails_cone_check() {
        let g = SampleGrid::from_region(&sine_curve_region(), &[0.0, -2.0], &[1.0, 1.0], 0.01).unwrap();
        let r = cone_condition_check(&g, PI / 4.0, 0.2).unwrap();
        assert!(!r.pass);
        assert!(r.witness.unwrap()[0] < 0.5);
    }

    #[test]
    fn three_dimensional_cube_cone() {
        let cube = Region::new(3, |p| p.iter().all(|x| (0.0..=1.0).contains(x)));
        let g = SampleGrid::from_region(&cube, &[0.0; 3], &[1.0; 3], 0.1).unwrap();
        let r = cone_condition_check(&g, 0.5, 0.2).unwrap();
        assert_eq!(r.directions, 256);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn csv_round_trip() {
        let g = SampleGrid::from_region(&sine_curve_region(), &[0.0, -2.0], &[1.0, 1.0], 0.1).unwrap();
        let back = SampleGrid::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back.inside, g.inside);
        assert_eq!(back.counts, g.counts);
        assert!((back.step - g.step).abs() < 1e-12);
    }

    #[test]
    fn jones_disk_and_square_pass() {
        let disk = Region::new(2, |p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) <= 0.25);
        for region in [disk, square_region()] {
            let g = SampleGrid::from_region(&region, &[0.0, 0.0], &[1.0, 1.0], 0.02).unwrap();
            let r = jones_flatness_check(&g.to_cloud().unwrap(), 2.0, 60, 1).unwrap();
            assert!(r.pass, "{:?}", r.failures.first());
            assert!(r.scales.iter().all(|s| s.pass));
        }
    }

    #[test]
    fn jones_corridor_fails_at_large_scales() {
        let (_, cloud) = corridor_cloud(1e-3, 0.05, 0.02, 1.25e-4).unwrap();
        let r = jones_flatness_check(&cloud, 16.0, 120, 3).unwrap();
        assert!(!r.pass);
        assert!(r.failures.iter().all(|f| f.distance > 1e-3));
        // small pairs stay inside one square and pass
        let small = jones_flatness_check(&cloud, 0.5, 60, 3).unwrap();
        assert!(small.pass);
    }

    #[test]
    fn coarse_lattice_is_rejected_for_jones() {
        let g = SampleGrid::from_region(&square_region(), &[0.0, 0.0], &[1.0, 1.0], 0.1).unwrap();
        assert!(matches!(jones_flatness_check(&g.to_cloud().unwrap(), 1.0, 10, 0), Err(Error::Resolution(_))));
    }
}
