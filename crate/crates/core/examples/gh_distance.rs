//! Gromov–Hausdorff distance: exact for small spaces, certified lower
//! bounds, and a local-search upper bound.

use ghlab::gh::{gh_exact_small, gh_heuristic, gh_lower_bounds, EXACT_CAP};
use ghlab::{spaces, MetricSpace};

fn main() -> ghlab::Result<()> {
    let x = spaces::random_space(2, 6)?;
    let y = spaces::random_space(4, 5)?;
    let exact = gh_exact_small(&x, &y, EXACT_CAP)?;
    let lower = gh_lower_bounds(&x, &y)?;
    let upper = gh_heuristic(&x, &y, 16, 0)?;
    println!("dGH({}, {}) = {:.6}", x.id(), y.id(), exact.distance);
    println!("lower bound {:.6}, heuristic {:.6}", lower.value, upper.distance);
    println!("optimal correspondence: {:?}", exact.correspondence.pairs);

    let big = spaces::circle_graph(40, 1.0)?.to_finite()?;
    let small = spaces::circle_graph(8, 1.0)?.to_finite()?;
    let h = gh_heuristic(&big, &small, 8, 1)?;
    println!("40-gon vs 8-gon on the unit circle: between {:.4} and {:.4}", h.lower_bound, h.distance);
    Ok(())
}
