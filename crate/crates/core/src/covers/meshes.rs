//! Concrete glued surfaces: projective planes from polygons, a glued sphere
//! with two cone points, and a flat torus.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::covers::complex::{Geometry, Mesh, PolygonComplex};
use crate::error::{Error, Result};

/// Radial and tangential target steps, relative to the requested mesh size.
const RADIAL: f64 = 0.5;
const TANGENTIAL: f64 = 0.8;
const MAX_REFINE: usize = 12;

fn check_h(mesh_h: f64) -> Result<()> {
    if !(mesh_h.is_finite() && mesh_h > 0.0) {
        return Err(Error::Parameter(format!("mesh size must be positive, got {mesh_h}")));
    }
    Ok(())
}

/// Triangles between two point rows sorted by a parameter, walking both in
/// step. `cyclic` closes the strip with the first point of each row.
fn strip(inner: &[(f64, usize)], outer: &[(f64, usize)], period: Option<f64>, faces: &mut Vec<[usize; 3]>) {
    let (ni, no) = (inner.len(), outer.len());
    let (ei, eo) = if period.is_some() { (ni, no) } else { (ni - 1, no - 1) };
    let at = |row: &[(f64, usize)], k: usize| -> (f64, usize) {
        let n = row.len();
        let (t, v) = row[k % n];
        (t + period.unwrap_or(0.0) * (k / n) as f64, v)
    };
    let (mut a, mut b) = (0, 0);
    while a < ei || b < eo {
        let ti = if a < ei { at(inner, a + 1).0 } else { f64::INFINITY };
        let to = if b < eo { at(outer, b + 1).0 } else { f64::INFINITY };
        if to <= ti + 1e-12 {
            faces.push([at(inner, a).1, at(outer, b + 1).1, at(outer, b).1]);
            b += 1;
        } else {
            faces.push([at(inner, a).1, at(inner, a + 1).1, at(outer, b).1]);
            a += 1;
        }
    }
}

/// The projective plane obtained from the regular 2k-gon with inradius 1 by
/// identifying antipodal boundary points. The center is marked `o`.
pub fn polygon_rp2(k: usize, mesh_h: f64) -> Result<Mesh> {
    check_h(mesh_h)?;
    if k < 2 {
        return Err(Error::Parameter(format!("polygon needs k >= 2, got {k}")));
    }
    let mut scale = 1.0;
    for _ in 0..MAX_REFINE {
        let mesh = rp2_attempt(k, mesh_h * RADIAL * scale, mesh_h * TANGENTIAL * scale)?;
        if mesh.resolution() <= mesh_h + 1e-12 {
            return Ok(mesh);
        }
        scale *= 0.85;
    }
    Err(Error::Internal(format!("could not reach mesh size {mesh_h}")))
}

fn rp2_attempt(k: usize, radial: f64, tangential: f64) -> Result<Mesh> {
    let sides = 2 * k;
    let rc = 1.0 / (PI / sides as f64).cos();
    let corner = |j: usize| {
        let a = (2.0 * j as f64 - 1.0) * PI / sides as f64;
        [rc * a.cos(), rc * a.sin()]
    };
    let side_len = 2.0 * (PI / sides as f64).tan();
    let rings = ((rc / radial).ceil() as usize).max(2);
    let mut m_outer = 2usize;
    while side_len / m_outer as f64 > tangential {
        m_outer *= 2;
    }
    let boundary_point = |t: f64| {
        let i = (t.floor() as usize).min(sides - 1);
        let f = t - i as f64;
        let (a, b) = (corner(i), corner((i + 1) % sides));
        [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
    };
    let mut names = vec!["o".to_string()];
    let mut positions = vec![[0.0, 0.0, 0.0]];
    let mut faces = Vec::new();
    let mut prev: Vec<(f64, usize)> = vec![];
    let width = rings.to_string().len();
    for j in 1..=rings {
        let s = j as f64 / rings as f64;
        let mut m = m_outer;
        while m > 2 && s * side_len / (m / 2) as f64 <= tangential {
            m /= 2;
        }
        let count = sides * m;
        let mut row = Vec::with_capacity(count);
        for i in 0..count {
            let t = i as f64 / m as f64;
            let p = boundary_point(t);
            row.push((t, positions.len()));
            names.push(format!("r{j:0width$}_{i}"));
            positions.push([s * p[0], s * p[1], 0.0]);
        }
        if j == 1 {
            for i in 0..count {
                faces.push([0, row[i].1, row[(i + 1) % count].1]);
            }
        } else {
            strip(&prev, &row, Some(sides as f64), &mut faces);
        }
        prev = row;
    }
    // antipodal identification of the outer ring: side i with side i + k
    let m = prev.len() / sides;
    let mut gluing = Vec::new();
    for i in 0..k {
        let a: Vec<usize> = (0..=m).map(|q| prev[(i * m + q) % prev.len()].1).collect();
        let b: Vec<usize> = (0..=m).map(|q| prev[((i + k) * m + q) % prev.len()].1).collect();
        gluing.push((a, b));
    }
    PolygonComplex {
        id: format!("rp2-{k}"),
        geometry: Geometry::Flat,
        names,
        positions,
        faces,
        gluing,
        marked: vec![("o".into(), 0), ("corner".into(), prev[0].1), ("midpoint".into(), prev[m / 2].1)],
    }
    .to_mesh()
    .map(|mut mesh| {
        // the polygon is convex about its center, so d(o, x) is the chart norm
        let d = mesh.positions.iter().map(|p| p[0].hypot(p[1])).collect();
        mesh.exact_from = Some((mesh.marked["o"], d));
        mesh
    })
}

/// Half of a hemisphere glued along its two boundary arcs: a sphere with cone
/// points `p` and `p*` of angle π/2. In lune coordinates (colatitude from `p`,
/// longitude in [0, π/2]) the meridians at 0 and π/2 are identified.
#[derive(Clone, Debug)]
pub struct GluedSphereOptions {
    pub mesh_h: f64,
    /// Extra rings at these colatitudes and their mirrors.
    pub refine: Vec<f64>,
    /// Drop everything within this distance of the cone points.
    pub cap: Option<f64>,
}

pub fn glued_sphere(opts: &GluedSphereOptions) -> Result<Mesh> {
    check_h(opts.mesh_h)?;
    let cap = opts.cap.unwrap_or(0.0);
    if !(0.0..FRAC_PI_2).contains(&cap) {
        return Err(Error::Parameter(format!("cap radius must lie in [0, π/2), got {cap}")));
    }
    let mut scale = 1.0;
    for _ in 0..MAX_REFINE {
        let mesh = sphere_attempt(opts, opts.mesh_h * TANGENTIAL * scale, cap)?;
        if mesh.resolution() <= opts.mesh_h + 1e-12 {
            return Ok(mesh);
        }
        scale *= 0.85;
    }
    Err(Error::Internal(format!("could not reach mesh size {}", opts.mesh_h)))
}

fn sphere_attempt(opts: &GluedSphereOptions, step: f64, cap: f64) -> Result<Mesh> {
    let (lo, hi) = (cap, PI - cap);
    let mut thetas: Vec<f64> = Vec::new();
    let n = ((hi - lo) / step).ceil() as usize;
    for i in 0..=n {
        thetas.push(lo + (hi - lo) * i as f64 / n as f64);
    }
    thetas.push(FRAC_PI_2);
    for &d in &opts.refine {
        thetas.extend([d, PI - d]);
    }
    thetas.retain(|&t| t >= lo - 1e-12 && t <= hi + 1e-12);
    thetas.sort_by(f64::total_cmp);
    thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let point = |theta: f64, phi: f64| [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let mut names = Vec::new();
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    let mut marked = Vec::new();
    let mut rows: Vec<Vec<(f64, usize)>> = Vec::new();
    let width = thetas.len().to_string().len();
    for (j, &theta) in thetas.iter().enumerate() {
        let pole = theta.sin() < 1e-12;
        let count = if pole { 0 } else { ((FRAC_PI_2 * theta.sin() / step).ceil() as usize).max(3) };
        let mut row = Vec::new();
        if pole {
            let name = if theta < 1.0 { "p" } else { "p*" };
            row.push((0.0, positions.len()));
            marked.push((name.to_string(), positions.len()));
            names.push(name.to_string());
            positions.push(point(theta, 0.0));
        } else {
            for i in 0..=count {
                let phi = FRAC_PI_2 * i as f64 / count as f64;
                row.push((phi, positions.len()));
                names.push(format!("s{j:0width$}_{i}"));
                positions.push(point(theta, phi));
            }
            if (theta - FRAC_PI_2).abs() < 1e-12 {
                marked.push(("o".into(), row[0].1));
            }
        }
        if let Some(prev) = rows.last() {
            if prev.len() == 1 {
                for w in row.windows(2) {
                    faces.push([prev[0].1, w[0].1, w[1].1]);
                }
            } else if row.len() == 1 {
                for w in prev.windows(2) {
                    faces.push([row[0].1, w[1].1, w[0].1]);
                }
            } else {
                strip(prev, &row, None, &mut faces);
            }
        }
        rows.push(row);
    }
    let first: Vec<usize> = rows.iter().map(|r| r[0].1).collect();
    let last: Vec<usize> = rows.iter().map(|r| r[r.len() - 1].1).collect();
    let id = match opts.cap {
        Some(c) => format!("glued-sphere-minus-caps({c})"),
        None => "glued-sphere".to_string(),
    };
    PolygonComplex { id, geometry: Geometry::Spherical, names, positions, faces, gluing: vec![(first, last)], marked }.to_mesh()
}

/// Flat torus [0,a)×[0,b) on a square grid with cell centers, each cell cut
/// into four triangles. The origin is marked `p`.
pub fn flat_torus(a: f64, b: f64, mesh_h: f64) -> Result<Mesh> {
    check_h(mesh_h)?;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Parameter(format!("torus sides must be positive, got {a} × {b}")));
    }
    let (nx, ny) = (((a / mesh_h).ceil() as usize).max(3), ((b / mesh_h).ceil() as usize).max(3));
    let (dx, dy) = (a / nx as f64, b / ny as f64);
    let mut names = Vec::new();
    let mut positions = Vec::new();
    let grid = |i: usize, j: usize| i * (ny + 1) + j;
    for i in 0..=nx {
        for j in 0..=ny {
            names.push(format!("t{i}_{j}"));
            positions.push([i as f64 * dx, j as f64 * dy, 0.0]);
        }
    }
    let mut faces = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let c = positions.len();
            names.push(format!("c{i}_{j}"));
            positions.push([(i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy, 0.0]);
            let ring = [grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)];
            for q in 0..4 {
                faces.push([c, ring[q], ring[(q + 1) % 4]]);
            }
        }
    }
    let gluing = vec![
        ((0..=ny).map(|j| grid(0, j)).collect(), (0..=ny).map(|j| grid(nx, j)).collect()),
        ((0..=nx).map(|i| grid(i, 0)).collect(), (0..=nx).map(|i| grid(i, ny)).collect()),
    ];
    PolygonComplex {
        id: format!("torus({a}x{b})"),
        geometry: Geometry::Flat,
        names,
        positions,
        faces,
        gluing,
        marked: vec![("p".into(), grid(0, 0))],
    }
    .to_mesh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricSpace;

    #[test]
    fn rp2_square_distances() {
        let h = 0.1;
        let m = polygon_rp2(2, h).unwrap();
        assert!(m.resolution() <= h + 1e-12);
        let o = m.marked("o").unwrap();
        let d = m.space.distances_from(o);
        assert!((d[m.marked("corner").unwrap()] - 2f64.sqrt()).abs() <= 3.0 * h);
        assert!((d[m.marked("midpoint").unwrap()] - 1.0).abs() <= 1e-9);
        let chi = m.space.len() as i64 - m.space.graph().edge_count() as i64 + m.faces.len() as i64;
        assert_eq!(chi, 1);
    }

    #[test]
    fn rp2_hexagon_euler_characteristic() {
        let h = 0.2;
        let m = polygon_rp2(3, h).unwrap();
        let chi = m.space.len() as i64 - m.space.graph().edge_count() as i64 + m.faces.len() as i64;
        assert_eq!(chi, 1);
        let d = m.space.distances_from(m.marked("o").unwrap());
        let want = 1.0 / (PI / 6.0).cos();
        assert!((d[m.marked("corner").unwrap()] - want).abs() <= 3.0 * h);
    }

    #[test]
    fn glued_sphere_distances() {
        let h = 0.1;
        let m = glued_sphere(&GluedSphereOptions { mesh_h: h, refine: vec![], cap: None }).unwrap();
        let chi = m.space.len() as i64 - m.space.graph().edge_count() as i64 + m.faces.len() as i64;
        assert_eq!(chi, 2);
        let (o, p, q) = (m.marked("o").unwrap(), m.marked("p").unwrap(), m.marked("p*").unwrap());
        assert!((m.space.dist(o, p) - FRAC_PI_2).abs() <= 3.0 * h);
        assert!((m.space.dist(p, q) - PI).abs() <= 3.0 * h);
    }

    #[test]
    fn sphere_minus_caps_is_annulus() {
        let m = glued_sphere(&GluedSphereOptions { mesh_h: 0.1, refine: vec![0.2], cap: Some(0.2) }).unwrap();
        let chi = m.space.len() as i64 - m.space.graph().edge_count() as i64 + m.faces.len() as i64;
        assert_eq!(chi, 0);
        assert!(m.marked("p").is_err());
    }

    #[test]
    fn torus_is_a_torus() {
        let m = flat_torus(1.0, 1.0, 0.1).unwrap();
        let chi = m.space.len() as i64 - m.space.graph().edge_count() as i64 + m.faces.len() as i64;
        assert_eq!(chi, 0);
        let p = m.marked("p").unwrap();
        let far = m.space.distances_from(p).into_iter().fold(0.0, f64::max);
        // farthest point is the cell-center image of (1/2, 1/2)
        assert!((far - 2f64.sqrt() / 2.0).abs() < 0.05);
    }
}
