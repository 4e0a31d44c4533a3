//! Lifts of the seam point in the cover of a doubled hemisphere with small
//! caps about the cone points removed, as the caps shrink.

use std::f64::consts::PI;

use ghlab::covers::experiment_petersen;

fn main() -> ghlab::Result<()> {
    let report = experiment_petersen(0.1, 0.05, 2.0 * PI + 0.5, &[0.4, 0.2, 0.1])?;
    for r in &report.rows {
        println!(
            "cap {:.2}: {} cover vertices, {} lifts within 2π, farthest vertex {:.3} (bound {:.3})",
            r.detour, r.cover_vertices, r.lifts, r.max_distance, r.bound
        );
    }
    println!("lift counts increase as the caps shrink: {}", report.increasing);
    Ok(())
}
