//! Dense and graph metric spaces: validation, shortest paths, balls.

use ghlab::metric::{validate_metric, BallMode};
use ghlab::{spaces, FiniteMetricSpace, MetricSpace};

fn main() -> ghlab::Result<()> {
    let grid = spaces::grid_graph(5, 5, 1.0)?;
    println!("5x5 grid: {} points, resolution {}", grid.len(), grid.resolution());
    println!("corner to corner: {}", grid.dist(0, grid.len() - 1));
    let path = grid.shortest_path(0, grid.len() - 1);
    println!("one shortest path: {:?}", path.iter().map(|&v| grid.point_id(v)).collect::<Vec<_>>());

    let ball = ghlab::metric::ball(&grid, 12, 2.0, BallMode::Closed);
    println!("closed ball of radius 2 about the center: {} points", ball.len());

    let dense = grid.to_finite()?;
    println!("as a dense table: {:?}", validate_metric(&dense));

    let broken = FiniteMetricSpace::from_rows("broken", vec!["a".into(), "b".into(), "c".into()], &[
        vec![0.0, 1.0, 5.0],
        vec![1.0, 0.0, 1.0],
        vec![5.0, 1.0, 0.0],
    ]);
    match broken {
        Ok(s) => println!("broken table: {:?}", validate_metric(&s)),
        Err(e) => println!("broken table rejected: {e}"),
    }
    Ok(())
}
