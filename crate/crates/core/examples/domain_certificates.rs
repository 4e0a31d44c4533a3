//! Cone condition and boundary undistortedness on sampled planar domains.

use std::f64::consts::FRAC_PI_4;

use ghlab::domains::{cone_condition_check, sine_curve_region, square_region, undistortedness_certificate, SampleGrid};

fn main() -> ghlab::Result<()> {
    let square = SampleGrid::from_region(&square_region(), &[0.0, 0.0], &[1.0, 1.0], 0.0125)?;
    let cone = cone_condition_check(&square, FRAC_PI_4, 0.2)?;
    println!("square: cone condition {} over {} samples, τ = {:.4}", cone.pass, cone.tested, cone.tau);

    let domain = square.to_cloud()?.to_domain("square")?;
    let cert = undistortedness_certificate(&domain, &[0.05, 0.1, 0.15], |t| cone.tau * t, 5.0)?;
    for row in &cert.rows {
        println!("t = {}: every point within {:.4} of the t-interior (allowed {:.4}): {}", row.t, row.max_gap, row.s + cert.tolerance, row.pass);
    }

    let sine = SampleGrid::from_region(&sine_curve_region(), &[0.0, -2.0], &[1.0, 1.0], 0.0125)?;
    let cone = cone_condition_check(&sine, FRAC_PI_4, 0.2)?;
    println!("sine-curve domain: cone condition {}, first failure at {:?}", cone.pass, cone.witness);
    Ok(())
}
