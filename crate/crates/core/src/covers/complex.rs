//! Triangle complexes with boundary gluings, and their quotient meshes.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{BallMode, DiscretizedLengthSpace, MetricSpace, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Positions are planar; edge length is the Euclidean distance.
    Flat,
    /// Positions are unit vectors; edge length is the great-circle distance.
    Spherical,
}

/// Triangles laid out in charts, plus pairs of boundary polylines that are
/// identified point by point.
#[derive(Clone, Debug)]
pub struct PolygonComplex {
    pub id: String,
    pub geometry: Geometry,
    pub names: Vec<String>,
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub gluing: Vec<(Vec<usize>, Vec<usize>)>,
    pub marked: Vec<(String, usize)>,
}

impl PolygonComplex {
    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.positions[a], self.positions[b]);
        match self.geometry {
            Geometry::Flat => ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt(),
            Geometry::Spherical => {
                // atan2 form stays accurate for short arcs
                let c = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
                let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                s.atan2(p[0] * q[0] + p[1] * q[1] + p[2] * q[2])
            }
        }
    }

    fn face_edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for f in &self.faces {
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }

    /// Glued polylines match edge by edge in length, consist of boundary
    /// edges, and every edge of the quotient lies on at most two faces.
    pub fn check_gluing(&self) -> Result<()> {
        let count = self.face_edge_counts();
        if let Some((e, _)) = count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Input(format!("edge {}-{} lies on more than two faces", self.names[e.0], self.names[e.1])));
        }
        for (a, b) in &self.gluing {
            if a.len() != b.len() || a.len() < 2 {
                return Err(Error::Input("glued polylines differ in length".into()));
            }
            for w in 0..a.len() - 1 {
                for (u, v) in [(a[w], a[w + 1]), (b[w], b[w + 1])] {
                    if count.get(&(u.min(v), u.max(v))) != Some(&1) {
                        return Err(Error::Input(format!("glued edge {}-{} is not a boundary edge", self.names[u], self.names[v])));
                    }
                }
                let (la, lb) = (self.edge_length(a[w], a[w + 1]), self.edge_length(b[w], b[w + 1]));
                if (la - lb).abs() > 1e-9 {
                    return Err(Error::Input(format!("glued edges have lengths {la} and {lb}")));
                }
            }
        }
        let mesh_faces = self.quotient_faces(&self.classes().0)?;
        let mut qcount: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &mesh_faces {
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                *qcount.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if qcount.values().any(|&c| c > 2) {
            return Err(Error::Input("gluing produces an edge on more than two faces".into()));
        }
        Ok(())
    }

    /// Quotient class of each pre-glue vertex, and the representative (smallest
    /// member) of each class, classes numbered in order of representatives.
    fn classes(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.positions.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (a, b) in &self.gluing {
            for (&u, &v) in a.iter().zip(b) {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru.max(rv)] = ru.min(rv);
                }
            }
        }
        let mut class = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            if class[r] == usize::MAX {
                class[r] = reps.len();
                reps.push(r);
            }
            class[v] = class[r];
        }
        (class, reps)
    }

    fn quotient_faces(&self, class: &[usize]) -> Result<Vec<[usize; 3]>> {
        self.faces
            .iter()
            .map(|f| {
                let q = [class[f[0]], class[f[1]], class[f[2]]];
                if q[0] == q[1] || q[1] == q[2] || q[0] == q[2] {
                    Err(Error::Input(format!("face {}-{}-{} degenerates under gluing", self.names[f[0]], self.names[f[1]], self.names[f[2]])))
                } else {
                    Ok(q)
                }
            })
            .collect()
    }

    pub fn to_mesh(&self) -> Result<Mesh> {
        self.check_gluing()?;
        let (class, reps) = self.classes();
        let faces = self.quotient_faces(&class)?;
        let mut edges = Vec::with_capacity(self.faces.len() * 3 / 2);
        for f in &self.faces {
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                edges.push((class[a], class[b], self.edge_length(a, b)));
            }
        }
        let ids: Vec<String> = reps.iter().map(|&r| self.names[r].clone()).collect();
        let graph = WeightedGraph::new(ids, &edges)?;
        let space = DiscretizedLengthSpace::from_graph(self.id.clone(), graph)?;
        let marked = self.marked.iter().map(|(name, v)| (name.clone(), class[*v])).collect();
        let positions = reps.iter().map(|&r| self.positions[r]).collect();
        Ok(Mesh { space, faces, marked, positions, exact_from: None })
    }
}

/// A glued complex as a length space with its triangles and marked points.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub space: DiscretizedLengthSpace,
    pub faces: Vec<[usize; 3]>,
    pub marked: BTreeMap<String, usize>,
    /// Chart position of each vertex's representative.
    pub positions: Vec<[f64; 3]>,
    /// Exact distances from one vertex, when the geometry gives them in
    /// closed form. Balls about that vertex use them instead of graph
    /// distances, whose O(h) error can change the topology of a ball.
    pub exact_from: Option<(usize, Vec<f64>)>,
}

impl Mesh {
    pub fn marked(&self, name: &str) -> Result<usize> {
        self.marked.get(name).copied().ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    pub fn resolution(&self) -> f64 {
        self.space.resolution()
    }

    /// Subcomplex of the triangles whose vertices all lie in the open ball,
    /// reduced to the component of `center`.
    /// Distances from `center`: exact ones when known, graph ones otherwise.
    pub fn distances_from(&self, center: usize) -> Vec<f64> {
        match &self.exact_from {
            Some((c, d)) if *c == center => d.clone(),
            _ => self.space.distances_from(center),
        }
    }

    pub fn ball(&self, center: usize, r: f64) -> Result<Mesh> {
        let inside: Vec<bool> = self.distances_from(center).into_iter().map(|d| BallMode::Open.contains(d, r)).collect();
        let faces: Vec<[usize; 3]> = self.faces.iter().copied().filter(|f| f.iter().all(|&v| inside[v])).collect();
        self.subcomplex(center, &faces, &format!("{}|ball({r})", self.space.id()))
    }

    /// The complex spanned by `faces`, restricted to the component of `center`.
    pub fn subcomplex(&self, center: usize, faces: &[[usize; 3]], id: &str) -> Result<Mesh> {
        let n = self.space.len();
        let mut used = vec![false; n];
        for f in faces {
            for &v in f {
                used[v] = true;
            }
        }
        used[center] = true;
        let g = self.space.graph();
        let mut edges = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for f in faces {
            for e in 0..3 {
                let (a, b) = (f[e].min(f[(e + 1) % 3]), f[e].max(f[(e + 1) % 3]));
                if seen.insert((a, b)) {
                    edges.push((a, b, g.edge_weight(a, b).expect("face edge in graph")));
                }
            }
        }
        // keep the component of the center in the face-edge graph
        let full = WeightedGraph::new(g.ids().to_vec(), &edges)?;
        let comp = full.components(Some(&used)).into_iter().find(|c| c.binary_search(&center).is_ok()).unwrap_or(vec![center]);
        let (sub, local) = full.induced(&comp)?;
        let faces = faces
            .iter()
            .filter(|f| f.iter().all(|&v| local[v] != usize::MAX))
            .map(|f| [local[f[0]], local[f[1]], local[f[2]]])
            .collect();
        let space = DiscretizedLengthSpace::from_graph_unchecked(id, sub)?;
        let marked = self
            .marked
            .iter()
            .filter(|(_, &v)| local[v] != usize::MAX)
            .map(|(k, &v)| (k.clone(), local[v]))
            .collect();
        let positions = comp.iter().map(|&v| self.positions[v]).collect();
        let exact_from = self.exact_from.as_ref().and_then(|(c, d)| (local[*c] != usize::MAX).then(|| (local[*c], comp.iter().map(|&v| d[v]).collect())));
        Ok(Mesh { space, faces, marked, positions, exact_from })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A unit square cut into two triangles, opposite sides glued: a torus
    /// with a single vertex, which is too coarse and must be rejected.
    #[test]
    fn coarse_torus_degenerates() {
        let c = PolygonComplex {
            id: "t".into(),
            geometry: Geometry::Flat,
            names: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            positions: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            faces: vec![[0, 1, 2], [0, 2, 3]],
            gluing: vec![(vec![0, 1], vec![3, 2]), (vec![0, 3], vec![1, 2])],
            marked: vec![],
        };
        assert!(c.to_mesh().is_err());
    }

    #[test]
    fn mismatched_gluing_lengths_rejected() {
        let c = PolygonComplex {
            id: "x".into(),
            geometry: Geometry::Flat,
            names: (0..4).map(|i| format!("v{i}")).collect(),
            positions: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [5.0, 5.0, 0.0]],
            faces: vec![[0, 1, 2], [1, 3, 2]],
            gluing: vec![(vec![0, 1], vec![1, 3])],
            marked: vec![],
        };
        assert!(matches!(c.check_gluing(), Err(Error::Input(_))));
    }

    #[test]
    fn spherical_edge_length() {
        let c = PolygonComplex {
            id: "s".into(),
            geometry: Geometry::Spherical,
            names: vec!["n".into(), "e".into()],
            positions: vec![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            faces: vec![],
            gluing: vec![],
            marked: vec![],
        };
        assert!((c.edge_length(0, 1) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
