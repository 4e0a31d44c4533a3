//! Generators for standard test spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{padded_ids, DiscretizedLengthSpace, FiniteMetricSpace};

/// `n` points `0, 1/(n-1), ..., 1` on a line.
pub fn line(n: usize) -> Result<FiniteMetricSpace> {
    if n < 2 {
        return Err(Error::Parameter("line needs at least 2 points".into()));
    }
    let step = 1.0 / (n - 1) as f64;
    FiniteMetricSpace::from_fn(format!("line{n}"), padded_ids("x", n), |i, j| (i as f64 - j as f64).abs() * step)
}

/// Unit-weight path graph with counting measure.
pub fn path_graph(n: usize, edge: f64) -> Result<DiscretizedLengthSpace> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, edge)).collect();
    DiscretizedLengthSpace::from_edges(format!("path{n}"), padded_ids("v", n), &edges)?.with_measure(vec![1.0; n])
}

pub fn cycle_graph(n: usize, edge: f64) -> Result<DiscretizedLengthSpace> {
    if n < 3 {
        return Err(Error::Parameter("cycle needs at least 3 vertices".into()));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, edge)).collect();
    DiscretizedLengthSpace::from_edges(format!("cycle{n}"), padded_ids("v", n), &edges)?.with_measure(vec![1.0; n])
}

fn grid_ids(n: usize, m: usize) -> Vec<String> {
    let w = n.max(m).saturating_sub(1).to_string().len();
    (0..n).flat_map(|i| (0..m).map(move |j| format!("g{i:0w$}_{j:0w$}"))).collect()
}

/// `n × m` lattice with spacing `step`; vertex `(i, j)` has index `i*m + j`.
pub fn grid_graph(n: usize, m: usize, step: f64) -> Result<DiscretizedLengthSpace> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if i + 1 < n {
                edges.push((i * m + j, (i + 1) * m + j, step));
            }
            if j + 1 < m {
                edges.push((i * m + j, i * m + j + 1, step));
            }
        }
    }
    DiscretizedLengthSpace::from_edges(format!("grid{n}x{m}"), grid_ids(n, m), &edges)?.with_measure(vec![1.0; n * m])
}

/// `n × n` lattice on the flat torus of side `side`, counting measure.
pub fn torus_grid(n: usize, side: f64) -> Result<DiscretizedLengthSpace> {
    if n < 3 {
        return Err(Error::Parameter("torus grid needs n ≥ 3".into()));
    }
    let step = side / n as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            edges.push((i * n + j, ((i + 1) % n) * n + j, step));
            edges.push((i * n + j, i * n + (j + 1) % n, step));
        }
    }
    DiscretizedLengthSpace::from_edges(format!("torus{n}"), grid_ids(n, n), &edges)?.with_measure(vec![1.0; n * n])
}

/// `n` equally spaced points on a circle of the given radius, Euclidean metric.
pub fn circle_points(n: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            vec![radius * a.cos(), radius * a.sin()]
        })
        .collect()
}

/// Cycle graph through [`circle_points`] with chord lengths as weights.
pub fn circle_graph(n: usize, radius: f64) -> Result<DiscretizedLengthSpace> {
    let chord = 2.0 * radius * (std::f64::consts::PI / n as f64).sin();
    Ok(cycle_graph(n, chord)?.with_id(format!("circle{n}")))
}

/// Random finite metric space with `n` points.
///
/// Even seeds place points uniformly in the unit square; odd seeds take the
/// shortest-path metric of a complete graph with weights in `[0.2, 1]`.
pub fn random_space(seed: u64, n: usize) -> Result<FiniteMetricSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = format!("random{seed}");
    if seed % 2 == 0 {
        let coords: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        Ok(FiniteMetricSpace::euclidean(id, &coords)?)
    } else {
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.gen_range(0.2..=1.0);
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        FiniteMetricSpace::from_rows(id, padded_ids("p", n), &d)
    }
}

/// Ten small spaces used by the bundled sandwich experiment.
pub fn bundled() -> Result<Vec<FiniteMetricSpace>> {
    let mut out = vec![
        line(11)?,
        FiniteMetricSpace::from_fn("simplex4", padded_ids("p", 4), |_, _| 1.0)?,
        cycle_graph(4, 1.0)?.to_finite()?,
        path_graph(8, 1.0)?.to_finite()?,
        grid_graph(4, 4, 1.0)?.to_finite()?,
        circle_graph(12, 1.0)?.to_finite()?,
    ];
    for seed in 0..4 {
        out.push(random_space(seed, 12)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{validate_metric, MetricSpace};

    #[test]
    fn random_spaces_are_metrics() {
        for seed in 0..6 {
            let s = random_space(seed, 10).unwrap();
            assert!(validate_metric(&s).is_pass(), "seed {seed}");
        }
    }

    #[test]
    fn random_space_is_reproducible() {
        assert_eq!(random_space(7, 9).unwrap(), random_space(7, 9).unwrap());
    }

    #[test]
    fn torus_distances_wrap() {
        let t = torus_grid(10, 1.0).unwrap();
        assert!((t.dist(0, 9) - 0.1).abs() < 1e-12);
        assert!((t.dist(0, 55) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bundled_has_ten_valid_spaces() {
        let b = bundled().unwrap();
        assert_eq!(b.len(), 10);
        assert!(b.iter().all(|s| validate_metric(s).is_pass() && s.len() <= 16));
    }
}
