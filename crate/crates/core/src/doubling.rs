//! Local doubling constants and their propagation to larger scales.
//!
//! All balls are open. A space is `(ρ, A0)`-doubling on a radius grid when
//! `μ(B_r(x)) ≤ A0 · μ(B_{r/2}(x))` for every point `x` and grid radius `r ≤ ρ`.
//! From that local constant the checks below derive bounds at scales beyond
//! `ρ` by chaining half-balls along discrete shortest paths; on a graph with
//! longest edge `h` a chain whose steps are at most `ρ/2` covers a path of
//! length `R` in at most `⌈R / (ρ/2 − h)⌉` steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{exact_packing, net_cover};
use crate::metric::{covered, BallMode, DiscretizedLengthSpace, MetricSpace, Subspace};

const RATIO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingWitness {
    pub point: String,
    pub radius: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDoublingCertificate {
    pub rho: f64,
    pub radii: Vec<f64>,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub pass: bool,
    pub worst_witness: Option<DoublingWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub center: String,
    pub radius: f64,
    pub rho: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub resolution: f64,
    pub exponent: u32,
    pub tested: usize,
    /// Largest `μ(B_{ρ/2}(q)) / (A0^exponent · μ(B_{ρ/2}(x)))` over tested `q`.
    pub max_ratio: f64,
    pub worst_point: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingBoundReport {
    pub center: String,
    pub rho: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub epsilon: f64,
    pub exponent: u32,
    pub ball_size: usize,
    /// Packing number of the closed `ρ/4`-ball, or an upper bound when not exact.
    pub packing: usize,
    pub exact: bool,
    pub bound: f64,
    pub witness: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub radius: f64,
    /// Covering count of `B_r(x)` by `ρ/2`-balls, maximized over the sampled centers.
    pub cover_count: usize,
    pub exponent: u32,
    #[serde(rename = "A")]
    pub a: f64,
    /// Largest observed `μ(B_r(x)) / μ(B_{r/2}(x))`.
    pub observed: f64,
    pub worst_point: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalDoublingProfile {
    pub rho: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub resolution: f64,
    pub rows: Vec<ProfileRow>,
    pub pass: bool,
}

/// `ρ, ρ/2, ..., ρ/2^(levels-1)`.
pub fn dyadic_radii(rho: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|j| rho / f64::powi(2.0, j as i32)).collect()
}

/// Default radius grid: four dyadic levels below and including `ρ`.
pub fn default_radii(rho: f64) -> Vec<f64> {
    dyadic_radii(rho, 4)
}

fn require_measure<S: MetricSpace + ?Sized>(space: &S) -> Result<()> {
    if space.has_measure() {
        Ok(())
    } else {
        Err(Error::MissingMeasure(space.id().to_string()))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive, got {v}")))
    }
}

/// Point masses of the open ball of radius `rmax`, sorted by distance, as
/// cumulative sums: `μ(B_r(x))` is then one binary search away.
struct BallProfile {
    dist: Vec<f64>,
    cum: Vec<f64>,
}

impl BallProfile {
    fn new<S: MetricSpace + ?Sized>(space: &S, x: usize, rmax: f64) -> Self {
        let mut pts = space.neighborhood(x, rmax, BallMode::Open);
        pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut cum = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for &(i, _) in &pts {
            acc += space.weight(i);
            cum.push(acc);
        }
        Self { dist: pts.into_iter().map(|(_, d)| d).collect(), cum }
    }

    /// Open-ball measure for `r ≤ rmax`.
    fn measure(&self, r: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d < r);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }
}

/// Smallest `A0` for which the space is doubling on the radius grid.
pub fn local_doubling_check<S: MetricSpace + ?Sized>(space: &S, rho: f64, radii: &[f64]) -> Result<LocalDoublingCertificate> {
    require_measure(space)?;
    check_positive("rho", rho)?;
    if let Some(&bad) = radii.iter().find(|&&r| !(r > 0.0 && r <= rho)) {
        return Err(Error::Parameter(format!("radius {bad} outside (0, rho]")));
    }
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let per_point: Vec<(f64, usize, f64, bool)> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let prof = BallProfile::new(space, x, rmax);
            let mut best = (1.0, x, radii.first().copied().unwrap_or(rho), true);
            for &r in radii {
                let half = prof.measure(r / 2.0);
                if half <= 0.0 {
                    return (f64::INFINITY, x, r, false);
                }
                let ratio = prof.measure(r) / half;
                if ratio > best.0 {
                    best = (ratio, x, r, true);
                }
            }
            best
        })
        .collect();
    let worst = per_point.iter().copied().reduce(|a, b| if b.0 > a.0 { b } else { a });
    let (a0, pass, witness) = match worst {
        Some((ratio, x, r, ok)) => {
            (ratio, ok, Some(DoublingWitness { point: space.point_id(x).to_string(), radius: r, ratio }))
        }
        None => (1.0, true, None),
    };
    Ok(LocalDoublingCertificate { rho, radii: radii.to_vec(), a0, pass, worst_witness: witness })
}

/// Number of chain steps of length at most `ρ/2` needed to span distance `r`.
pub fn chain_exponent(r: f64, rho: f64, h: f64) -> u32 {
    if r <= 0.0 {
        0
    } else {
        (r / (rho / 2.0 - h) - 1e-12).ceil().max(0.0) as u32
    }
}

fn check_resolution(space: &DiscretizedLengthSpace, rho: f64) -> Result<()> {
    let h = space.resolution();
    if h > rho / 4.0 {
        return Err(Error::Resolution(format!("h = {h} exceeds rho/4 = {}", rho / 4.0)));
    }
    Ok(())
}

/// Checks `μ(B_{ρ/2}(q)) ≤ A0^N · μ(B_{ρ/2}(x))` for every `q` in the closed
/// ball `B_R(x)`, with `N = ⌈R / (ρ/2 − h)⌉`.
pub fn two_point_propagation_check(
    space: &DiscretizedLengthSpace,
    x: usize,
    radius: f64,
    rho: f64,
    a0: f64,
) -> Result<PropagationReport> {
    Ok(two_point_propagation_sweep(space, &[x], radius, rho, a0)?.remove(0))
}

/// [`two_point_propagation_check`] for several centers, computing each
/// `μ(B_{ρ/2}(q))` once.
pub fn two_point_propagation_sweep(
    space: &DiscretizedLengthSpace,
    centers: &[usize],
    radius: f64,
    rho: f64,
    a0: f64,
) -> Result<Vec<PropagationReport>> {
    require_measure(space)?;
    check_positive("rho", rho)?;
    check_resolution(space, rho)?;
    if radius < 0.0 {
        return Err(Error::Parameter(format!("radius must be nonnegative, got {radius}")));
    }
    if let Some(&bad) = centers.iter().find(|&&x| x >= space.len()) {
        return Err(Error::Parameter(format!("center index {bad} out of range")));
    }
    let h = space.resolution();
    let exponent = chain_exponent(radius, rho, h);
    let balls: Vec<Vec<(usize, f64)>> = centers.par_iter().map(|&x| space.neighborhood(x, radius, BallMode::Closed)).collect();
    let mut needed = vec![false; space.len()];
    for &x in centers {
        needed[x] = true;
    }
    for &(q, _) in balls.iter().flatten() {
        needed[q] = true;
    }
    let half: Vec<f64> =
        (0..space.len()).into_par_iter().map(|q| if needed[q] { space.ball_measure(q, rho / 2.0) } else { 0.0 }).collect();
    Ok(centers
        .iter()
        .zip(&balls)
        .map(|(&x, ball)| {
            let bound = a0.powi(exponent as i32) * half[x];
            let (max_ratio, worst) = ball
                .iter()
                .map(|&(q, _)| (half[q] / bound, q))
                .fold((0.0, x), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
            PropagationReport {
                center: space.point_id(x).to_string(),
                radius,
                rho,
                a0,
                resolution: h,
                exponent,
                tested: ball.len(),
                max_ratio,
                worst_point: space.point_id(worst).to_string(),
                pass: max_ratio <= 1.0 + RATIO_TOL,
            }
        })
        .collect())
}

/// `N` with `2^(N-1) ε ∈ (ρ/2, ρ]`.
pub fn packing_exponent(rho: f64, eps: f64) -> u32 {
    (1.0 + rho.log2() - eps.log2() + 1e-12).floor() as u32
}

/// Checks `Cap_ε(closed B_{ρ/4}(p)) ≤ A0^(N+1)`.
///
/// The ball is packed exactly when it has at most `exact_cap` points;
/// otherwise the greedy `ε/2` covering count stands in as an upper bound.
pub fn lemma21_packing_bound_check(
    space: &DiscretizedLengthSpace,
    p: usize,
    rho: f64,
    a0: f64,
    eps: f64,
    exact_cap: usize,
) -> Result<PackingBoundReport> {
    require_measure(space)?;
    check_positive("rho", rho)?;
    check_positive("epsilon", eps)?;
    let h = space.resolution();
    if eps < h {
        return Err(Error::Resolution(format!("epsilon {eps} is below the resolution {h}")));
    }
    if eps >= rho / 2.0 {
        return Err(Error::Parameter(format!("epsilon {eps} must be below rho/2 = {}", rho / 2.0)));
    }
    let members: Vec<usize> = space.neighborhood(p, rho / 4.0, BallMode::Closed).into_iter().map(|(i, _)| i).collect();
    let ball = Subspace::new(space, members)?;
    let (packing, exact, witness) = if ball.len() <= exact_cap {
        let dense = ball.to_finite()?;
        let idx = exact_packing(&dense, eps);
        (idx.len(), true, idx.iter().map(|&i| dense.point_id(i).to_string()).collect())
    } else {
        let centers = net_cover(&ball, eps / 2.0);
        (centers.len(), false, Vec::new())
    };
    let exponent = packing_exponent(rho, eps);
    let bound = a0.powi(exponent as i32 + 1);
    Ok(PackingBoundReport {
        center: space.point_id(p).to_string(),
        rho,
        a0,
        epsilon: eps,
        exponent,
        ball_size: ball.len(),
        packing,
        exact,
        bound,
        witness,
        pass: packing as f64 <= bound * (1.0 + RATIO_TOL),
    })
}

/// Counts a net cover of `B_r(x)` by open `s`-balls centred in the ball.
fn ball_cover_count(space: &DiscretizedLengthSpace, x: usize, r: f64, s: f64) -> usize {
    let mut ball = space.neighborhood(x, r, BallMode::Open);
    ball.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let inside: std::collections::HashSet<usize> = ball.iter().map(|&(i, _)| i).collect();
    let mut done = std::collections::HashSet::with_capacity(ball.len());
    let mut count = 0;
    for &(c, _) in &ball {
        if done.contains(&c) {
            continue;
        }
        count += 1;
        for (i, d) in space.neighborhood(c, s, BallMode::Open) {
            if covered(d, s) && inside.contains(&i) {
                done.insert(i);
            }
        }
    }
    count
}

/// Doubling function at larger scales: `A(r) = A0` for `r ≤ ρ`, otherwise
/// `C(r) · A0^N(r)` with `C(r)` an empirical covering count; the result is
/// made nondecreasing and compared with observed ratios at every point.
///
/// `stride` subsamples the centers used for `C(r)` and the check (1 = all).
pub fn global_doubling_profile(
    space: &DiscretizedLengthSpace,
    rho: f64,
    a0: f64,
    radii: &[f64],
    stride: usize,
) -> Result<GlobalDoublingProfile> {
    require_measure(space)?;
    check_positive("rho", rho)?;
    check_resolution(space, rho)?;
    let h = space.resolution();
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let centers: Vec<usize> = (0..space.len()).step_by(stride.max(1)).collect();
    let mut rows = Vec::with_capacity(sorted.len());
    let mut running: f64 = 1.0;
    for &r in &sorted {
        check_positive("radius", r)?;
        let per: Vec<(usize, f64, usize)> = centers
            .par_iter()
            .map(|&x| {
                let prof = BallProfile::new(space, x, r);
                let ratio = prof.measure(r) / prof.measure(r / 2.0);
                let count = if r <= rho { 1 } else { ball_cover_count(space, x, r, rho / 2.0) };
                (count, ratio, x)
            })
            .collect();
        let cover_count = per.iter().map(|p| p.0).max().unwrap_or(1);
        let (observed, worst) =
            per.iter().fold((0.0, centers[0]), |acc, p| if p.1 > acc.0 { (p.1, p.2) } else { acc });
        let (exponent, a) = if r <= rho {
            (0, a0)
        } else {
            let n = chain_exponent(r, rho, h);
            (n, cover_count as f64 * a0.powi(n as i32))
        };
        running = running.max(a);
        rows.push(ProfileRow {
            radius: r,
            cover_count,
            exponent,
            a: running,
            observed,
            worst_point: space.point_id(worst).to_string(),
            pass: observed <= running * (1.0 + RATIO_TOL),
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(GlobalDoublingProfile { rho, a0, resolution: h, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{padded_ids, FiniteMetricSpace};
    use crate::spaces::{path_graph, torus_grid};

    #[test]
    fn single_point_has_a0_one() {
        let s = FiniteMetricSpace::from_rows("pt", vec!["a".into()], &[vec![0.0]]).unwrap().with_measure(vec![2.0]).unwrap();
        let c = local_doubling_check(&s, 1.0, &default_radii(1.0)).unwrap();
        assert_eq!(c.a0, 1.0);
        assert!(c.pass);
    }

    #[test]
    fn unit_interval_grid_a0_at_most_three() {
        let n = 64;
        let s = FiniteMetricSpace::from_fn("u", padded_ids("x", n), |i, j| (i as f64 - j as f64).abs() / (n - 1) as f64)
            .unwrap()
            .with_measure(vec![1.0; n])
            .unwrap();
        let radii = [0.5, 0.25, 0.125];
        let c = local_doubling_check(&s, 0.5, &radii).unwrap();
        // independent scan with closed-form counts
        let mut oracle: f64 = 1.0;
        for x in 0..n {
            for r in radii {
                let count = |rad: f64| (0..n).filter(|&y| ((x as f64 - y as f64).abs() / (n - 1) as f64) < rad).count() as f64;
                oracle = oracle.max(count(r) / count(r / 2.0));
            }
        }
        assert!((c.a0 - oracle).abs() < 1e-12);
        assert!(c.a0 <= 3.0);
    }

    #[test]
    fn missing_measure_is_an_error() {
        let s = FiniteMetricSpace::from_fn("m", padded_ids("x", 3), |i, j| (i as f64 - j as f64).abs()).unwrap();
        assert!(matches!(local_doubling_check(&s, 1.0, &[1.0]), Err(Error::MissingMeasure(_))));
    }

    #[test]
    fn propagation_on_path_and_identity_case() {
        let p = path_graph(40, 1.0).unwrap();
        let a0 = local_doubling_check(&p, 4.0, &default_radii(4.0)).unwrap().a0;
        let r = two_point_propagation_check(&p, 0, 10.0, 4.0, a0).unwrap();
        assert!(r.pass, "{r:?}");
        let z = two_point_propagation_check(&p, 5, 0.0, 4.0, a0).unwrap();
        assert_eq!(z.exponent, 0);
        assert_eq!(z.tested, 1);
        assert!((z.max_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn propagation_rejects_coarse_resolution() {
        let p = path_graph(10, 1.0).unwrap();
        assert!(matches!(two_point_propagation_check(&p, 0, 3.0, 3.9, 2.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn packing_exponent_brackets() {
        for (rho, eps) in [(4.0, 1.0), (4.0, 0.5), (0.4, 0.1), (1.0, 0.3), (1.0, 0.26)] {
            let n = packing_exponent(rho, eps);
            let top = f64::powi(2.0, n as i32 - 1) * eps;
            assert!(top > rho / 2.0 - 1e-12 && top <= rho + 1e-12, "{rho} {eps} {n}");
        }
        assert_eq!(packing_exponent(4.0, 1.0), 3);
    }

    #[test]
    fn lemma_bound_on_path() {
        let p = path_graph(40, 1.0).unwrap();
        let a0 = local_doubling_check(&p, 4.0, &default_radii(4.0)).unwrap().a0;
        let r = lemma21_packing_bound_check(&p, 20, 4.0, a0, 1.0, 64).unwrap();
        assert_eq!(r.exponent, 3);
        assert_eq!(r.ball_size, 3);
        assert_eq!(r.packing, 3);
        assert!(r.pass);
        assert!(matches!(lemma21_packing_bound_check(&p, 20, 4.0, a0, 0.9, 64), Err(Error::Resolution(_))));
    }

    #[test]
    fn one_point_lemma_bound() {
        let g = DiscretizedLengthSpace::from_edges("pt", vec!["a".into()], &[]).unwrap().with_measure(vec![1.0]).unwrap();
        let r = lemma21_packing_bound_check(&g, 0, 1.0, 1.0, 0.3, 64).unwrap();
        assert_eq!(r.packing, 1);
        assert!(r.pass);
    }

    #[test]
    fn profile_is_monotone_and_holds() {
        let t = torus_grid(12, 1.0).unwrap();
        let rho = 0.4;
        let a0 = local_doubling_check(&t, rho, &default_radii(rho)).unwrap().a0;
        let prof = global_doubling_profile(&t, rho, a0, &[0.2, 0.4, 0.6, 1.0], 1).unwrap();
        assert!(prof.pass);
        assert!(prof.rows.windows(2).all(|w| w[0].a <= w[1].a));
        assert_eq!(prof.rows[0].a, a0);
    }

    #[test]
    fn scaling_leaves_verdicts_unchanged() {
        let p = path_graph(20, 1.0).unwrap();
        let q = p.scaled(3.0).unwrap();
        let a = local_doubling_check(&p, 4.0, &default_radii(4.0)).unwrap();
        let b = local_doubling_check(&q, 12.0, &default_radii(12.0)).unwrap();
        assert_eq!(a.a0, b.a0);
        let x = lemma21_packing_bound_check(&p, 10, 4.0, a.a0, 1.5, 64).unwrap();
        let y = lemma21_packing_bound_check(&q, 10, 12.0, b.a0, 4.5, 64).unwrap();
        assert_eq!((x.packing, x.exponent, x.pass), (y.packing, y.exponent, y.pass));
    }
}
