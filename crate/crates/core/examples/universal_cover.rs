//! Unfolding a ball of a glued surface into its universal cover, and
//! reading off lifts of the center.

use ghlab::covers::{flat_torus, polygon_rp2, universal_cover_ball, CoverOptions};
use ghlab::MetricSpace;

fn main() -> ghlab::Result<()> {
    let torus = flat_torus(1.0, 1.0, 0.05)?;
    let p = torus.marked("p")?;
    let cover = universal_cover_ball(&torus, p, 0.7, &CoverOptions::new(1.3))?;
    let lifts = cover.lifts_of(p);
    println!("flat torus, ball of radius 0.7, cover truncated at 1.3: {} vertices", cover.len());
    for &v in &lifts {
        println!("  lift {} at distance {:.4}", cover.space.point_id(v), cover.root_distance[v]);
    }

    let rp2 = polygon_rp2(3, 0.05)?;
    let o = rp2.marked("o")?;
    let whole = universal_cover_ball(&rp2, o, 0.9, &CoverOptions::new(1.5))?;
    println!("RP² hexagon, simply connected ball of radius 0.9: {} lifts of o", whole.lifts_of(o).len());
    Ok(())
}
