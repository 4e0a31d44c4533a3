//! Packing and covering numbers, exact and greedy, and the sandwich
//! Cov_ε ≤ Cap_ε ≤ Cov_{ε/2}.

use ghlab::invariants::{covering_number, packing_number, sandwich_check, ExactCaps, Mode};
use ghlab::spaces;

fn main() -> ghlab::Result<()> {
    let caps = ExactCaps::default();
    for space in spaces::bundled()? {
        let r = sandwich_check(&space, 0.5, caps)?;
        println!("{:<12} Cov {:>2}  Cap {:>2}  Cov/2 {:>2}  holds {}", r.space, r.cov, r.cap, r.cov_half, r.holds);
    }

    let circle = spaces::circle_graph(400, 1.0)?;
    for eps in [1.0, 0.5, 0.25] {
        let cap = packing_number(&circle, eps, Mode::Greedy, caps)?;
        let cov = covering_number(&circle, eps, Mode::Greedy, caps)?;
        println!("unit circle, ε = {eps}: greedy Cap {} and Cov {} (upper bounds, exact = {})", cap.count, cov.count, cov.exact);
    }
    Ok(())
}
