//! Lifts of the center in pointed balls of universal covers of punctured
//! polygon models of RP², at a coarse resolution.

use ghlab::covers::{experiment_sw_packing, SwOptions};

fn main() -> ghlab::Result<()> {
    let mut opts = SwOptions::new(0.05);
    opts.r_trunc = 2.1;
    opts.margin = 0.2;
    opts.covering_eps = vec![1.0, 0.5];
    let report = experiment_sw_packing(&[3, 4, 5, 6], &opts)?;
    println!("{:>2} {:>8} {:>9} {:>6} {:>9} {:>6} {:>6}", "k", "r_k", "vertices", "lifts", "nearest", "Cov1", "Cov½");
    for r in &report.rows {
        println!(
            "{:>2} {:>8.5} {:>9} {:>6} {:>9.5} {:>6} {:>6}",
            r.k, r.r_k, r.cover_vertices, r.lifts, r.nearest_lift, r.covering[0].1, r.covering[1].1
        );
    }
    println!("lift counts monotone in k: {}", report.monotone);
    Ok(())
}
