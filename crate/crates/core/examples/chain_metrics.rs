//! δ-chain and r-extrinsic metrics on subsets, and their monotonicity.

use ghlab::domains::{delta_intrinsic_metric, r_extrinsic_metric};
use ghlab::{spaces, FiniteMetricSpace, MetricSpace};

fn main() -> ghlab::Result<()> {
    let circle = FiniteMetricSpace::euclidean("circle", &spaces::circle_points(60, 1.0))?;
    let all: Vec<usize> = (0..circle.len()).collect();
    for delta in [2.0, 0.5, 0.2] {
        let m = delta_intrinsic_metric(&circle, &all, delta)?;
        println!("δ = {delta}: antipodal distance {:.4}", m.dist(0, 30));
    }

    let grid = spaces::grid_graph(21, 21, 0.1)?;
    let rim: Vec<usize> = (0..grid.len()).filter(|&v| {
        let (i, j) = (v / 21, v % 21);
        i == 0 || j == 0 || i == 20 || j == 20
    }).collect();
    for r in [0.35, 0.15, 0.05] {
        let m = r_extrinsic_metric(&grid, &rim, r)?;
        println!("r = {r}: distance between opposite rim midpoints {:.4}", m.dist(10, m.len() - 11));
    }
    Ok(())
}
