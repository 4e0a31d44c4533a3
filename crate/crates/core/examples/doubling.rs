//! Local doubling constants, two-point propagation, the packing bound in a
//! small ball, and the global doubling profile on a flat torus grid.

use ghlab::doubling::{default_radii, global_doubling_profile, lemma21_packing_bound_check, local_doubling_check, two_point_propagation_check};
use ghlab::invariants::ExactCaps;
use ghlab::{spaces, MetricSpace};

fn main() -> ghlab::Result<()> {
    let torus = spaces::torus_grid(33, 1.0)?;
    let n = torus.len();
    let torus = torus.with_measure(vec![1.0; n])?;
    let rho = 0.4;
    let cert = local_doubling_check(&torus, rho, &default_radii(rho))?;
    println!("torus 33x33, ρ = {rho}: A0 = {:.3}", cert.a0);

    let prop = two_point_propagation_check(&torus, 0, 0.5, rho, cert.a0)?;
    println!("propagation from {}: {} points tested, worst ratio {:.3}, pass {}", prop.center, prop.tested, prop.max_ratio, prop.pass);

    for eps in [rho / 4.0, rho / 8.0] {
        let pb = lemma21_packing_bound_check(&torus, 0, rho, cert.a0, eps, ExactCaps::default().packing)?;
        println!("Cap_{eps} of the ρ/4-ball: {} ≤ {:.1}: {}", pb.packing, pb.bound, pb.pass);
    }

    let profile = global_doubling_profile(&torus, rho, cert.a0, &[0.4, 0.8], 37)?;
    for row in &profile.rows {
        println!("r = {}: covering count {}, A(r) = {:.3e}, observed {:.3}", row.radius, row.cover_count, row.a, row.observed);
    }
    Ok(())
}
