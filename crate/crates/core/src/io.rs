//! JSON space files.
//!
//! ```json
//! { "id": "c4", "points": ["a","b","c","d"],
//!   "metric": {"type": "graph", "edges": [["a","b",1.0], ["b","c",1.0]]},
//!   "basepoint": "a", "measure": {"a": 1.0}, "boundary": ["d"] }
//! ```
//!
//! A `"matrix"` metric carries `"data"`, rows in `points` order. Cover graphs
//! add a `"fibers"` map from base vertex to its lifted vertices.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DiscretizedLengthSpace, FiniteMetricSpace, MetricSpace, WeightedGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub id: String,
    pub points: Vec<String>,
    pub metric: MetricSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibers: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MetricSpec {
    Matrix { data: Vec<Vec<f64>> },
    Graph { edges: Vec<(String, String, f64)> },
}

/// A space read from disk in whichever representation the file used.
#[derive(Clone, Debug)]
pub enum LoadedSpace {
    Dense(FiniteMetricSpace),
    Graph(DiscretizedLengthSpace),
}

impl LoadedSpace {
    pub fn as_metric(&self) -> &dyn MetricSpace {
        match self {
            LoadedSpace::Dense(s) => s,
            LoadedSpace::Graph(g) => g,
        }
    }

    /// Dense view; graphs are expanded with all-pairs shortest paths.
    pub fn to_finite(&self) -> Result<FiniteMetricSpace> {
        match self {
            LoadedSpace::Dense(s) => Ok(s.clone()),
            LoadedSpace::Graph(g) => g.to_finite(),
        }
    }
}

impl SpaceFile {
    pub fn from_dense(space: &FiniteMetricSpace) -> Self {
        Self {
            id: space.id().to_string(),
            points: space.points().to_vec(),
            metric: MetricSpec::Matrix { data: space.rows() },
            basepoint: space.basepoint().map(|b| space.point_id(b).to_string()),
            measure: space.measure().map(|m| zip_ids(space.points(), m)),
            boundary: space.boundary().map(|b| b.iter().map(|&i| space.point_id(i).to_string()).collect()),
            fibers: None,
        }
    }

    pub fn from_graph(space: &DiscretizedLengthSpace) -> Self {
        let g = space.graph();
        let ids = g.ids();
        Self {
            id: space.id().to_string(),
            points: ids.to_vec(),
            metric: MetricSpec::Graph {
                edges: g.edges().map(|(u, v, w)| (ids[u].clone(), ids[v].clone(), w)).collect(),
            },
            basepoint: space.basepoint().map(|b| ids[b].clone()),
            measure: space.measure().map(|m| zip_ids(ids, m)),
            boundary: space.boundary().map(|b| b.iter().map(|&i| ids[i].clone()).collect()),
            fibers: None,
        }
    }

    pub fn into_space(self) -> Result<LoadedSpace> {
        let lookup = |points: &[String], id: &str| {
            points.iter().position(|p| p == id).ok_or_else(|| Error::UnknownPoint(id.to_string()))
        };
        let measure = match &self.measure {
            Some(m) => {
                let mut w = Vec::with_capacity(self.points.len());
                for p in &self.points {
                    w.push(*m.get(p).ok_or_else(|| Error::Input(format!("measure has no weight for `{p}`")))?);
                }
                Some(w)
            }
            None => None,
        };
        let boundary = match &self.boundary {
            Some(b) => Some(b.iter().map(|id| lookup(&self.points, id)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let basepoint = match &self.basepoint {
            Some(b) => Some(lookup(&self.points, b)?),
            None => None,
        };
        match self.metric {
            MetricSpec::Matrix { data } => {
                let mut s = FiniteMetricSpace::from_rows(self.id, self.points, &data)?;
                if let Some(b) = basepoint {
                    s = s.with_basepoint_index(b);
                }
                if let Some(w) = measure {
                    s = s.with_measure(w)?;
                }
                if let Some(b) = boundary {
                    s = s.with_boundary(b)?;
                }
                Ok(LoadedSpace::Dense(s))
            }
            MetricSpec::Graph { edges } => {
                let index: std::collections::HashMap<&str, usize> =
                    self.points.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
                let mut e = Vec::with_capacity(edges.len());
                for (u, v, w) in &edges {
                    let iu = *index.get(u.as_str()).ok_or_else(|| Error::UnknownPoint(u.clone()))?;
                    let iv = *index.get(v.as_str()).ok_or_else(|| Error::UnknownPoint(v.clone()))?;
                    e.push((iu, iv, *w));
                }
                let graph = WeightedGraph::new(self.points, &e)?;
                let mut s = DiscretizedLengthSpace::from_graph(self.id, graph)?;
                if let Some(b) = basepoint {
                    s = s.with_basepoint_index(b);
                }
                if let Some(w) = measure {
                    s = s.with_measure(w)?;
                }
                if let Some(b) = boundary {
                    s = s.with_boundary(b)?;
                }
                Ok(LoadedSpace::Graph(s))
            }
        }
    }
}

fn zip_ids(ids: &[String], w: &[f64]) -> BTreeMap<String, f64> {
    ids.iter().cloned().zip(w.iter().copied()).collect()
}

pub fn parse_space(text: &str) -> Result<LoadedSpace> {
    let file: SpaceFile = serde_json::from_str(text)?;
    file.into_space()
}

pub fn read_space(path: impl AsRef<Path>) -> Result<LoadedSpace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read space file {}: {e}", path.display())))?;
    parse_space(&text)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::padded_ids;

    #[test]
    fn parses_graph_file() {
        let text = r#"{"id":"p3","points":["a","b","c"],
            "metric":{"type":"graph","edges":[["a","b",1],["b","c",1.5]]},
            "basepoint":"b","measure":{"a":1,"b":2,"c":1},"boundary":["a","c"]}"#;
        let LoadedSpace::Graph(g) = parse_space(text).unwrap() else { panic!("expected graph") };
        assert_eq!(g.dist(0, 2), 2.5);
        assert_eq!(g.basepoint(), Some(1));
        assert_eq!(g.weight(1), 2.0);
        assert_eq!(g.boundary(), Some(&[0, 2][..]));
        assert_eq!(g.resolution(), 1.5);
    }

    #[test]
    fn parses_matrix_file() {
        let text = r#"{"id":"m","points":["x","y"],"metric":{"type":"matrix","data":[[0,2],[2,0]]}}"#;
        let LoadedSpace::Dense(s) = parse_space(text).unwrap() else { panic!("expected matrix") };
        assert_eq!(s.dist(0, 1), 2.0);
    }

    #[test]
    fn missing_measure_entry_is_an_error() {
        let text = r#"{"id":"m","points":["x","y"],"metric":{"type":"matrix","data":[[0,2],[2,0]]},"measure":{"x":1}}"#;
        assert!(matches!(parse_space(text), Err(Error::Input(_))));
    }

    #[test]
    fn dense_file_round_trip() {
        let s = FiniteMetricSpace::from_fn("r", padded_ids("p", 4), |i, j| (i as f64 - j as f64).abs())
            .unwrap()
            .with_basepoint_index(2)
            .with_measure(vec![1.0, 2.0, 3.0, 4.0])
            .unwrap();
        let text = serde_json::to_string(&SpaceFile::from_dense(&s)).unwrap();
        let LoadedSpace::Dense(back) = parse_space(&text).unwrap() else { panic!() };
        assert_eq!(back, s);
    }
}
