//! Domains inside discretized spaces: interiors, boundary undistortedness,
//! and the chain-type metrics induced on subsets.

mod euclid;

pub use euclid::{
    cone_condition_check, corridor_cloud, jones_flatness_check, sine_curve_region, square_region, ConeReport,
    JonesPairFailure, JonesReport, JonesScale, Region, SampleCloud, SampleGrid,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{separated, BallMode, DiscretizedLengthSpace, FiniteMetricSpace, MetricSpace, WeightedGraph};

/// A connected vertex set of an ambient graph with designated boundary
/// vertices, carrying the length metric of its induced subgraph.
#[derive(Clone, Debug)]
pub struct DomainInGraph {
    space: DiscretizedLengthSpace,
    ambient_index: Vec<usize>,
    boundary: Vec<usize>,
}

impl DomainInGraph {
    pub fn new(ambient: &DiscretizedLengthSpace, vertices: &[usize], boundary: &[usize]) -> Result<Self> {
        let mut vertices = vertices.to_vec();
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(Error::EmptySubset);
        }
        let (graph, local) = ambient.graph().induced(&vertices)?;
        let mut b = Vec::with_capacity(boundary.len());
        for &v in boundary {
            match local.get(v) {
                Some(&l) if l != usize::MAX => b.push(l),
                _ => {
                    let name = ambient.graph().ids().get(v).cloned().unwrap_or_else(|| v.to_string());
                    return Err(Error::Input(format!("boundary vertex `{name}` is not in the domain")));
                }
            }
        }
        b.sort_unstable();
        b.dedup();
        let space = DiscretizedLengthSpace::from_graph_unchecked(format!("{}|domain", ambient.id()), graph)?
            .with_boundary(b.clone())?;
        Ok(Self { space, ambient_index: vertices, boundary: b })
    }

    /// The whole space as a domain, boundary taken from its tags.
    pub fn from_space(space: &DiscretizedLengthSpace) -> Result<Self> {
        let boundary = space.boundary().ok_or_else(|| Error::Input(format!("space `{}` has no boundary tags", space.id())))?;
        Self::new(space, &(0..space.len()).collect::<Vec<_>>(), boundary)
    }

    /// Open `r`-neighborhood of `core`; boundary = vertices with a neighbor
    /// outside, plus any ambient boundary tags inside.
    pub fn neighborhood(ambient: &DiscretizedLengthSpace, core: &[usize], r: f64) -> Result<Self> {
        let d = ambient.graph().dijkstra(core);
        let inside: Vec<bool> = d.iter().map(|&x| x < r).collect();
        let vertices: Vec<usize> = (0..ambient.len()).filter(|&v| inside[v]).collect();
        let tagged = ambient.boundary().unwrap_or(&[]);
        let boundary: Vec<usize> = vertices
            .iter()
            .copied()
            .filter(|&v| tagged.contains(&v) || ambient.graph().neighbors(v).any(|(u, _)| !inside[u]))
            .collect();
        Self::new(ambient, &vertices, &boundary)
    }

    /// The domain with its induced length metric `d_W`.
    pub fn space(&self) -> &DiscretizedLengthSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn ambient_index(&self, local: usize) -> usize {
        self.ambient_index[local]
    }

    pub fn resolution(&self) -> f64 {
        self.space.resolution()
    }

    /// `d_W(x, ∂W)` for every domain vertex.
    pub fn boundary_distance(&self) -> Vec<f64> {
        self.space.graph().dijkstra(&self.boundary)
    }
}

/// Local indices of vertices at intrinsic distance greater than `t` from the boundary.
pub fn r_interior(domain: &DomainInGraph, t: f64) -> Vec<usize> {
    interior_from(&domain.boundary_distance(), t)
}

fn interior_from(bdist: &[f64], t: f64) -> Vec<usize> {
    (0..bdist.len()).filter(|&v| bdist[v] > t).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UndistortedRow {
    pub t: f64,
    pub s: f64,
    pub interior_size: usize,
    /// Largest `d_W(x, W_t°)` over the domain; infinite when the interior is empty.
    pub max_gap: f64,
    pub pass: bool,
    pub worst_vertex: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UndistortednessCertificate {
    pub resolution: f64,
    /// Absolute slack added to `s(t)`, a multiple of the resolution.
    pub tolerance: f64,
    pub tolerance_in_h: f64,
    pub rows: Vec<UndistortedRow>,
    pub pass: bool,
    /// Smallest `τ` with `max_gap(t) ≤ τ t + tolerance` on the whole grid.
    pub lipschitz_tau: Option<f64>,
}

/// Checks that every domain vertex lies within `s(t) + tol·h` of the
/// `t`-interior, for each `t` in the grid.
pub fn undistortedness_certificate(
    domain: &DomainInGraph,
    t_grid: &[f64],
    s: impl Fn(f64) -> f64,
    tol_in_h: f64,
) -> Result<UndistortednessCertificate> {
    let h = domain.resolution();
    for &t in t_grid {
        if !(t > 2.0 * h) {
            return Err(Error::Resolution(format!("t = {t} must exceed 2h = {}", 2.0 * h)));
        }
    }
    let tolerance = tol_in_h * h;
    let bdist = domain.boundary_distance();
    let graph = domain.space().graph();
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut tau: Option<f64> = Some(0.0);
    for &t in t_grid {
        let st = s(t);
        let interior = interior_from(&bdist, t);
        if interior.is_empty() {
            rows.push(UndistortedRow {
                t,
                s: st,
                interior_size: 0,
                max_gap: f64::INFINITY,
                pass: false,
                worst_vertex: graph.ids().first().cloned(),
            });
            tau = None;
            continue;
        }
        let d = graph.dijkstra(&interior);
        let (worst, gap) = d
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (v, &x)| if x > acc.1 { (v, x) } else { acc });
        let pass = gap <= st + tolerance;
        tau = tau.map(|a: f64| a.max((gap - tolerance).max(0.0) / t));
        rows.push(UndistortedRow {
            t,
            s: st,
            interior_size: interior.len(),
            max_gap: gap,
            pass,
            worst_vertex: (!pass).then(|| graph.ids()[worst].clone()),
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(UndistortednessCertificate { resolution: h, tolerance, tolerance_in_h: tol_in_h, rows, pass, lipschitz_tau: tau })
}

/// Chain metric on `subset`: shortest paths whose steps have ambient length at most `δ`.
pub fn delta_intrinsic_metric(ambient: &FiniteMetricSpace, subset: &[usize], delta: f64) -> Result<FiniteMetricSpace> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
    }
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let ids: Vec<String> = subset.iter().map(|&i| ambient.point_id(i).to_string()).collect();
    let mut edges = Vec::new();
    for (a, &i) in subset.iter().enumerate() {
        for (b, &j) in subset.iter().enumerate().skip(a + 1) {
            let d = ambient.dist(i, j);
            if d > 0.0 && !separated(d, delta + 2.0 * crate::metric::BALL_TOL) {
                edges.push((a, b, d));
            }
        }
    }
    let graph = WeightedGraph::new(ids, &edges)?;
    graph_metric(format!("{}|delta={delta}", ambient.id()), &graph, None)
}

/// Length metric of the open `r`-neighborhood of `subset`, restricted to `subset`.
pub fn r_extrinsic_metric(ambient: &DiscretizedLengthSpace, subset: &[usize], r: f64) -> Result<FiniteMetricSpace> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("r must be positive, got {r}")));
    }
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let d = ambient.graph().dijkstra(&subset);
    let nbhd: Vec<usize> = (0..ambient.len()).filter(|&v| BallMode::Open.contains(d[v], r)).collect();
    let (graph, local) = ambient.graph().induced(&nbhd)?;
    let keep: Vec<usize> = subset.iter().map(|&v| local[v]).collect();
    graph_metric(format!("{}|extrinsic={r}", ambient.id()), &graph, Some(&keep))
}

/// Shortest-path table of `graph` on `keep` (all vertices when `None`);
/// disconnection among kept vertices is reported with its components.
fn graph_metric(id: String, graph: &WeightedGraph, keep: Option<&[usize]>) -> Result<FiniteMetricSpace> {
    use rayon::prelude::*;
    let keep: Vec<usize> = keep.map_or_else(|| (0..graph.len()).collect(), <[usize]>::to_vec);
    let comps = graph.components(None);
    let mut label = vec![0; graph.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            label[v] = c;
        }
    }
    let first = label[keep[0]];
    if keep.iter().any(|&v| label[v] != first) {
        let mut grouped: Vec<Vec<String>> = Vec::new();
        let mut seen: Vec<Option<usize>> = vec![None; comps.len()];
        for &v in &keep {
            let slot = *seen[label[v]].get_or_insert_with(|| {
                grouped.push(Vec::new());
                grouped.len() - 1
            });
            grouped[slot].push(graph.ids()[v].clone());
        }
        return Err(Error::Components(grouped));
    }
    let rows: Vec<Vec<f64>> = keep
        .par_iter()
        .map(|&u| {
            let d = graph.dijkstra(&[u]);
            keep.iter().map(|&v| d[v]).collect()
        })
        .collect();
    let ids = keep.iter().map(|&v| graph.ids()[v].clone()).collect();
    FiniteMetricSpace::from_rows(id, ids, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{padded_ids, restrict};
    use crate::spaces::{circle_points, cycle_graph, grid_graph, path_graph};

    fn unit_grid_square(n: usize) -> DomainInGraph {
        let g = grid_graph(n, n, 1.0 / (n - 1) as f64).unwrap();
        let ring: Vec<usize> = (0..n * n).filter(|&v| v / n == 0 || v / n == n - 1 || v % n == 0 || v % n == n - 1).collect();
        DomainInGraph::new(&g, &(0..n * n).collect::<Vec<_>>(), &ring).unwrap()
    }

    #[test]
    fn interior_at_zero_is_non_boundary() {
        let d = unit_grid_square(11);
        let i = r_interior(&d, 0.0);
        assert_eq!(i.len(), 81);
        assert!(i.iter().all(|v| !d.boundary().contains(v)));
    }

    #[test]
    fn interior_matches_scan() {
        let n = 11;
        let d = unit_grid_square(n);
        let got = r_interior(&d, 0.35);
        // on the lattice, graph distance to the ring is the grid distance to the nearest side
        let want: Vec<usize> = (0..n * n)
            .filter(|&v| {
                let (i, j) = ((v / n) as f64 / 10.0, (v % n) as f64 / 10.0);
                i.min(j).min(1.0 - i).min(1.0 - j) > 0.35
            })
            .collect();
        assert_eq!(got, want);
        assert!(r_interior(&d, 0.6).is_empty());
    }

    #[test]
    fn empty_interior_fails_with_witness() {
        let d = unit_grid_square(11);
        let c = undistortedness_certificate(&d, &[0.3, 0.6], |t| 2.0 * t, 1.0).unwrap();
        assert!(c.rows[0].pass);
        assert!(!c.rows[1].pass);
        assert_eq!(c.rows[1].interior_size, 0);
        assert!(c.lipschitz_tau.is_none());
    }

    #[test]
    fn t_at_resolution_is_rejected() {
        let d = unit_grid_square(11);
        assert!(matches!(undistortedness_certificate(&d, &[0.2], |t| t, 1.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn neighborhood_domain_is_one_lipschitz() {
        let g = grid_graph(41, 41, 0.05).unwrap();
        let core = [20 * 41 + 10, 20 * 41 + 11, 20 * 41 + 12, 20 * 41 + 13, 20 * 41 + 14];
        let d = DomainInGraph::neighborhood(&g, &core, 0.6).unwrap();
        let c = undistortedness_certificate(&d, &[0.15, 0.3, 0.45], |t| t, 2.0).unwrap();
        assert!(c.pass, "{c:?}");
        assert!(c.lipschitz_tau.unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn certificate_monotone_in_s() {
        let d = unit_grid_square(21);
        let grid = [0.15, 0.25, 0.35];
        let a = undistortedness_certificate(&d, &grid, |t| 2.0 * t, 1.0).unwrap();
        let b = undistortedness_certificate(&d, &grid, |t| 3.0 * t, 1.0).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!(!x.pass || y.pass);
        }
    }

    #[test]
    fn delta_metric_basics() {
        let line = FiniteMetricSpace::from_fn("l", padded_ids("x", 3), |i, j| (i as f64 - j as f64).abs()).unwrap();
        let m = delta_intrinsic_metric(&line, &[0, 1, 2], 1.0).unwrap();
        assert_eq!(m.dist(0, 2), 2.0);
        let big = delta_intrinsic_metric(&line, &[0, 2], 5.0).unwrap();
        assert_eq!(big.rows(), restrict(&line, &["x0", "x2"]).unwrap().rows());
        assert!(matches!(delta_intrinsic_metric(&line, &[0, 2], 1.0), Err(Error::Components(c)) if c.len() == 2));
    }

    #[test]
    fn delta_metric_approaches_arc_length() {
        let n = 400;
        let s = FiniteMetricSpace::euclidean("circle", &circle_points(n, 1.0)).unwrap();
        let m = delta_intrinsic_metric(&s, &(0..n).collect::<Vec<_>>(), 0.02).unwrap();
        let arc = std::f64::consts::PI;
        let got = m.dist(0, n / 2);
        assert!(got <= arc && arc - got < 1e-3, "{got}");
        assert!(m.dist(0, n / 2) >= s.dist(0, n / 2));
    }

    #[test]
    fn extrinsic_on_four_cycle() {
        let c = cycle_graph(4, 1.0).unwrap();
        let m = r_extrinsic_metric(&c, &[0, 2], 1.5).unwrap();
        assert_eq!(m.dist(0, 1), 2.0);
        assert!(matches!(r_extrinsic_metric(&c, &[0, 2], 0.25), Err(Error::Components(_))));
        let p = path_graph(5, 1.0).unwrap();
        let full = r_extrinsic_metric(&p, &[0, 4], 10.0).unwrap();
        assert_eq!(full.dist(0, 1), 4.0);
    }
}
