//! Gromov–Hausdorff distance between finite spaces via correspondences, and
//! uniform total boundedness of families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{covering_number, exact_packing, ExactCaps, Mode};
use crate::metric::{BallMode, MetricSpace, Subspace};

/// Default point-count cap of the exact solver.
pub const EXACT_CAP: usize = 7;

/// A relation between two point sets covering both, with its distortion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pairs: Vec<(String, String)>,
    pub distortion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhResult {
    pub x: String,
    pub y: String,
    /// Half the distortion of `correspondence`.
    pub distance: f64,
    pub exact: bool,
    pub correspondence: Correspondence,
    /// Certified lower bound, reported alongside heuristic results.
    pub lower_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingBound {
    pub value: f64,
    /// Number of points in the compared separated sets.
    pub points: usize,
    /// Best separation of that many points in X and in Y.
    pub scale_x: f64,
    pub scale_y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub diameter: f64,
    pub packing: Option<PackingBound>,
}

/// Dense distance table.
#[derive(Clone, Debug)]
struct Table {
    n: usize,
    d: Vec<f64>,
    ids: Vec<String>,
}

impl Table {
    fn new<S: MetricSpace + ?Sized>(s: &S) -> Result<Self> {
        let n = s.len();
        if n == 0 {
            return Err(Error::EmptySubset);
        }
        let mut d = Vec::with_capacity(n * n);
        for i in 0..n {
            d.extend(s.distances_from(i));
        }
        let ids = (0..n).map(|i| s.point_id(i).to_string()).collect();
        Ok(Self { n, d, ids })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Largest t such that some k points are pairwise at distance ≥ t.
    fn separation(&self, k: usize) -> f64 {
        if k <= 1 {
            return f64::INFINITY;
        }
        let mut values: Vec<f64> = self.d.iter().copied().filter(|&v| v > 0.0).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        // binary search for the last value whose packing reaches k
        let (mut lo, mut hi) = (0usize, values.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.packing_at(values[mid]) >= k {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            0.0
        } else {
            values[lo - 1]
        }
    }

    fn packing_at(&self, t: f64) -> usize {
        let fin = crate::metric::FiniteMetricSpace::from_fn("t", self.ids.clone(), |i, j| self.at(i, j)).expect("table is a metric");
        exact_packing(&fin, t).len()
    }
}

/// Correspondence as a union of a map X→Y and a map Y→X.
struct Problem<'a> {
    x: &'a Table,
    y: &'a Table,
}

impl Problem<'_> {
    fn vars(&self) -> usize {
        self.x.n + self.y.n
    }

    fn domain(&self, var: usize) -> usize {
        if var < self.x.n {
            self.y.n
        } else {
            self.x.n
        }
    }

    /// The (x, y) pair chosen when `var` takes `value`.
    fn pair(&self, var: usize, value: usize) -> (usize, usize) {
        if var < self.x.n {
            (var, value)
        } else {
            (value, var - self.x.n)
        }
    }

    fn cost(&self, p: (usize, usize), q: (usize, usize)) -> f64 {
        (self.x.at(p.0, q.0) - self.y.at(p.1, q.1)).abs()
    }

    fn distortion(&self, assign: &[usize]) -> f64 {
        let pairs: Vec<_> = assign.iter().enumerate().map(|(v, &a)| self.pair(v, a)).collect();
        let mut worst = 0.0f64;
        for (i, &p) in pairs.iter().enumerate() {
            for &q in &pairs[i + 1..] {
                worst = worst.max(self.cost(p, q));
            }
        }
        worst
    }

    fn correspondence(&self, assign: &[usize]) -> Correspondence {
        let mut pairs: Vec<(usize, usize)> = assign.iter().enumerate().map(|(v, &a)| self.pair(v, a)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence {
            pairs: pairs.iter().map(|&(i, j)| (self.x.ids[i].clone(), self.y.ids[j].clone())).collect(),
            distortion: self.distortion(assign),
        }
    }
}

/// Depth-first search with forward checking for assignments of distortion
/// strictly below the incumbent.
struct Search<'a> {
    pb: &'a Problem<'a>,
    best: f64,
    best_assign: Vec<usize>,
    assign: Vec<usize>,
    chosen: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn run(&mut self, domains: Vec<Vec<usize>>, current: f64) {
        // most constrained unassigned variable
        let Some(var) = (0..self.pb.vars()).filter(|&v| self.assign[v] == usize::MAX).min_by_key(|&v| domains[v].len()) else {
            if current < self.best {
                self.best = current;
                self.best_assign = self.assign.clone();
            }
            return;
        };
        let mut values: Vec<(f64, usize)> = domains[var]
            .iter()
            .map(|&a| {
                let p = self.pb.pair(var, a);
                let c = self.chosen.iter().map(|&q| self.pb.cost(p, q)).fold(current, f64::max);
                (c, a)
            })
            .collect();
        values.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (c, a) in values {
            if c >= self.best {
                break;
            }
            let p = self.pb.pair(var, a);
            let mut next = domains.clone();
            let mut dead = false;
            for (v, dom) in next.iter_mut().enumerate() {
                if self.assign[v] != usize::MAX || v == var {
                    continue;
                }
                dom.retain(|&b| self.pb.cost(p, self.pb.pair(v, b)) < self.best);
                if dom.is_empty() {
                    dead = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            self.assign[var] = a;
            self.chosen.push(p);
            self.run(next, c);
            self.chosen.pop();
            self.assign[var] = usize::MAX;
        }
    }
}

/// Exact distance by branch and bound over correspondences; both spaces must
/// have at most `cap` points.
pub fn gh_exact_small<S, T>(x: &S, y: &T, cap: usize) -> Result<GhResult>
where
    S: MetricSpace + ?Sized,
    T: MetricSpace + ?Sized,
{
    for (s, what) in [(x.len(), "gh_exact_small X"), (y.len(), "gh_exact_small Y")] {
        if s > cap {
            return Err(Error::OverCap { what, n: s, cap });
        }
    }
    let (tx, ty) = (Table::new(x)?, Table::new(y)?);
    let pb = Problem { x: &tx, y: &ty };
    let lower = lower_bound_tables(&tx, &ty);
    let (seed, seed_val) = local_search(&pb, 4, 0);
    let mut search = Search { pb: &pb, best: seed_val, best_assign: seed, assign: vec![usize::MAX; pb.vars()], chosen: Vec::new() };
    if search.best > lower.value {
        let domains = (0..pb.vars()).map(|v| (0..pb.domain(v)).collect()).collect();
        search.run(domains, 0.0);
    }
    let correspondence = pb.correspondence(&search.best_assign);
    Ok(GhResult {
        x: x.id().to_string(),
        y: y.id().to_string(),
        distance: correspondence.distortion / 2.0,
        exact: true,
        correspondence,
        lower_bound: lower.value,
    })
}

/// Certified lower bound: the diameter gap, and the gap in how well k
/// points can be spread in each space. A correspondence of distortion δ
/// carries k points at mutual distance ≥ t to k points at mutual distance
/// ≥ t − δ, so δ ≥ sep_k(X) − sep_k(Y). Spaces above the exact packing cap
/// get the diameter bound only.
pub fn gh_lower_bounds<S, T>(x: &S, y: &T) -> Result<LowerBound>
where
    S: MetricSpace + ?Sized,
    T: MetricSpace + ?Sized,
{
    Ok(lower_bound_tables(&Table::new(x)?, &Table::new(y)?))
}

fn lower_bound_tables(x: &Table, y: &Table) -> LowerBound {
    let diameter = (x.diameter() - y.diameter()).abs() / 2.0;
    let mut packing: Option<PackingBound> = None;
    let cap = ExactCaps::default().packing;
    if x.n <= cap && y.n <= cap {
        for k in 2..=x.n.max(y.n) {
            let (sx, sy) = (x.separation(k), y.separation(k));
            // a space with fewer than k points has separation 0 for k points
            let (sx, sy) = (if k > x.n { 0.0 } else { sx }, if k > y.n { 0.0 } else { sy });
            let value = (sx - sy).abs() / 2.0;
            if packing.as_ref().map_or(value > 0.0, |p| value > p.value) {
                packing = Some(PackingBound { value, points: k, scale_x: sx, scale_y: sy });
            }
        }
    }
    let value = packing.as_ref().map_or(diameter, |p| p.value.max(diameter));
    LowerBound { value, diameter, packing }
}

/// Upper bound by seeded local search. `budget` is the number of restarts.
pub fn gh_heuristic<S, T>(x: &S, y: &T, budget: usize, seed: u64) -> Result<GhResult>
where
    S: MetricSpace + ?Sized,
    T: MetricSpace + ?Sized,
{
    if budget == 0 {
        return Err(Error::Parameter("heuristic budget must be positive".into()));
    }
    let (tx, ty) = (Table::new(x)?, Table::new(y)?);
    let pb = Problem { x: &tx, y: &ty };
    let (assign, _) = local_search(&pb, budget, seed);
    let correspondence = pb.correspondence(&assign);
    let lower = lower_bound_tables(&tx, &ty);
    let distance = correspondence.distortion / 2.0;
    if distance < lower.value - crate::metric::METRIC_TOL {
        return Err(Error::Internal(format!("heuristic value {distance} is below the certified lower bound {}", lower.value)));
    }
    Ok(GhResult { x: x.id().to_string(), y: y.id().to_string(), distance, exact: false, correspondence, lower_bound: lower.value })
}

/// Greedy constructions from anchor pairs, each refined by local search.
/// `budget` bounds the number of anchors; extra budget beyond the anchor
/// count goes to random restarts.
fn local_search(pb: &Problem, budget: usize, seed: u64) -> (Vec<usize>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = anchor_pairs(pb);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..budget {
        let start = match anchors.get(r) {
            Some(&(x0, y0)) => greedy_seed(pb, x0, y0),
            None => (0..pb.vars()).map(|v| rng.gen_range(0..pb.domain(v))).collect(),
        };
        let (assign, value) = descend(pb, start, &mut rng);
        if best.as_ref().map_or(true, |b| value < b.1) {
            best = Some((assign, value));
        }
        if best.as_ref().is_some_and(|b| b.1 == 0.0) {
            break;
        }
    }
    best.expect("budget is positive")
}

/// Candidate first pairs, most similar eccentricities first.
fn anchor_pairs(pb: &Problem) -> Vec<(usize, usize)> {
    let ecc = |t: &Table| -> Vec<f64> { (0..t.n).map(|i| (0..t.n).map(|j| t.at(i, j)).fold(0.0, f64::max)).collect() };
    let (ex, ey) = (ecc(pb.x), ecc(pb.y));
    let x0 = (0..pb.x.n).max_by(|&a, &b| ex[a].total_cmp(&ex[b]).then(b.cmp(&a))).expect("nonempty");
    let mut ys: Vec<usize> = (0..pb.y.n).collect();
    ys.sort_by(|&a, &b| (ey[a] - ex[x0]).abs().total_cmp(&(ey[b] - ex[x0]).abs()).then(a.cmp(&b)));
    ys.into_iter().map(|y| (x0, y)).collect()
}

/// Match points one at a time, farthest from the anchor first, each to the
/// partner that adds the least distortion to the pairs chosen so far.
fn greedy_seed(pb: &Problem, x0: usize, y0: usize) -> Vec<usize> {
    let mut assign = vec![usize::MAX; pb.vars()];
    assign[x0] = y0;
    let mut chosen = vec![(x0, y0)];
    let far = |t: &Table, a: usize| -> Vec<usize> {
        let mut o: Vec<usize> = (0..t.n).collect();
        o.sort_by(|&i, &j| t.at(a, j).total_cmp(&t.at(a, i)).then(i.cmp(&j)));
        o
    };
    let order: Vec<usize> = far(pb.x, x0).into_iter().filter(|&i| i != x0).chain(far(pb.y, y0).into_iter().map(|j| pb.x.n + j)).collect();
    for v in order {
        let a = (0..pb.domain(v))
            .min_by(|&a, &b| {
                let c = |a| chosen.iter().map(|&q| pb.cost(pb.pair(v, a), q)).fold(0.0, f64::max);
                c(a).total_cmp(&c(b)).then(a.cmp(&b))
            })
            .expect("nonempty domain");
        assign[v] = a;
        chosen.push(pb.pair(v, a));
    }
    assign
}

/// One-variable moves that lower the distortion, or keep it and lower the
/// sum of squared pair costs.
fn descend(pb: &Problem, mut assign: Vec<usize>, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let score = |assign: &[usize]| -> (f64, f64) {
        let pairs: Vec<_> = assign.iter().enumerate().map(|(v, &a)| pb.pair(v, a)).collect();
        let (mut worst, mut sum) = (0.0f64, 0.0);
        for (i, &p) in pairs.iter().enumerate() {
            for &q in &pairs[i + 1..] {
                let c = pb.cost(p, q);
                worst = worst.max(c);
                sum += c * c;
            }
        }
        (worst, sum)
    };
    let mut value = score(&assign);
    let mut order: Vec<usize> = (0..pb.vars()).collect();
    loop {
        order.shuffle(rng);
        let mut improved = false;
        for &v in &order {
            let old = assign[v];
            for a in 0..pb.domain(v) {
                if a == old {
                    continue;
                }
                assign[v] = a;
                let s = score(&assign);
                if s.0 < value.0 || (s.0 == value.0 && s.1 < value.1 * (1.0 - 1e-12)) {
                    value = s;
                    improved = true;
                    break;
                }
                assign[v] = old;
            }
        }
        if !improved {
            return (assign, value.0);
        }
    }
}

/// Rule for calling a covering-number column divergent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRule {
    /// Fewest members over which the column must grow.
    pub min_members: usize,
    /// Required ratio of the last count to the first.
    pub growth: f64,
}

impl Default for DivergenceRule {
    fn default() -> Self {
        Self { min_members: 4, growth: 1.5 }
    }
}

/// One family member: a space with the value of the family parameter.
#[derive(Clone)]
pub struct FamilyMember<'a> {
    pub label: String,
    pub parameter: f64,
    pub space: &'a dyn MetricSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRow {
    pub label: String,
    pub parameter: f64,
    pub points: usize,
    pub counts: Vec<usize>,
    /// Whether each count is exact; otherwise it is a greedy upper bound.
    pub exact: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Verdict {
    /// Per-ε maxima over the family.
    Bounded { envelope: Vec<usize> },
    /// A column that grows monotonically along the parameter. A numerical
    /// witness only.
    Divergent { epsilon: f64, members: Vec<String>, counts: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecompactnessReport {
    pub family: String,
    pub eps: Vec<f64>,
    pub pointed_radius: Option<f64>,
    pub rule: DivergenceRule,
    /// Members sorted by parameter, then label.
    pub members: Vec<MemberRow>,
    pub verdict: Verdict,
}

impl PrecompactnessReport {
    pub fn is_bounded(&self) -> bool {
        matches!(self.verdict, Verdict::Bounded { .. })
    }
}

/// Covering numbers of each member (or of its ball of radius `pointed`
/// about the basepoint) on the ε grid, and a bounded or divergent verdict.
pub fn family_precompactness(
    family: &str,
    members: &[FamilyMember],
    eps: &[f64],
    pointed: Option<f64>,
    rule: DivergenceRule,
) -> Result<PrecompactnessReport> {
    if members.is_empty() {
        return Err(Error::Parameter("family is empty".into()));
    }
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Parameter("ε grid must be nonempty and positive".into()));
    }
    if let Some(r) = pointed {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Parameter(format!("pointed radius must be positive, got {r}")));
        }
        if let Some(m) = members.iter().find(|m| m.space.basepoint().is_none()) {
            return Err(Error::MissingBasepoint(m.space.id().to_string()));
        }
    }
    let caps = ExactCaps::default();
    let rows: Vec<MemberRow> = members
        .par_iter()
        .map(|m| -> Result<MemberRow> {
            let piece;
            let space: &dyn MetricSpace = match pointed {
                Some(r) => {
                    let b = m.space.basepoint().expect("checked above");
                    let inside = crate::metric::ball(m.space, b, r, BallMode::Closed);
                    piece = Subspace::new(m.space, inside)?;
                    &piece
                }
                None => m.space,
            };
            let mode = if space.len() <= caps.covering { Mode::Exact } else { Mode::Greedy };
            let results: Vec<_> = eps.par_iter().map(|&e| covering_number(space, e, mode, caps)).collect::<Result<_>>()?;
            Ok(MemberRow {
                label: m.label.clone(),
                parameter: m.parameter,
                points: space.len(),
                counts: results.iter().map(|c| c.count).collect(),
                exact: results.iter().map(|c| c.exact).collect(),
            })
        })
        .collect::<Result<_>>()?;
    precompactness_from_counts(family, rows, eps, pointed, rule)
}

/// Verdict from covering counts computed elsewhere, one row per member with
/// one count per ε.
pub fn precompactness_from_counts(
    family: &str,
    mut rows: Vec<MemberRow>,
    eps: &[f64],
    pointed: Option<f64>,
    rule: DivergenceRule,
) -> Result<PrecompactnessReport> {
    if rows.is_empty() {
        return Err(Error::Parameter("family is empty".into()));
    }
    if let Some(r) = rows.iter().find(|r| r.counts.len() != eps.len() || r.exact.len() != eps.len()) {
        return Err(Error::Input(format!("member `{}` has {} counts for {} scales", r.label, r.counts.len(), eps.len())));
    }
    rows.sort_by(|a, b| a.parameter.total_cmp(&b.parameter).then_with(|| a.label.cmp(&b.label)));
    let verdict = verdict(&rows, eps, rule);
    Ok(PrecompactnessReport { family: family.to_string(), eps: eps.to_vec(), pointed_radius: pointed, rule, members: rows, verdict })
}

fn verdict(rows: &[MemberRow], eps: &[f64], rule: DivergenceRule) -> Verdict {
    for (j, &e) in eps.iter().enumerate() {
        let col: Vec<usize> = rows.iter().map(|r| r.counts[j]).collect();
        let monotone = col.windows(2).all(|w| w[0] <= w[1]);
        let rises = col.windows(2).filter(|w| w[0] < w[1]).count();
        let grows = (*col.last().expect("nonempty") as f64) >= rule.growth * col[0] as f64;
        if rows.len() >= rule.min_members && monotone && rises + 1 >= rule.min_members && grows {
            return Verdict::Divergent { epsilon: e, members: rows.iter().map(|r| r.label.clone()).collect(), counts: col };
        }
    }
    let envelope = (0..eps.len()).map(|j| rows.iter().map(|r| r.counts[j]).max().expect("nonempty")).collect();
    Verdict::Bounded { envelope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetricSpace;

    fn line(n: usize, step: f64) -> FiniteMetricSpace {
        let coords: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * step]).collect();
        FiniteMetricSpace::euclidean(format!("line{n}"), &coords).unwrap()
    }

    fn random_space(n: usize, seed: u64) -> FiniteMetricSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        FiniteMetricSpace::euclidean(format!("r{seed}"), &coords).unwrap()
    }

    /// Minimum distortion over every relation covering both sets.
    fn brute_force(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
        let (n, m) = (x.len(), y.len());
        let mut best = f64::INFINITY;
        for mask in 1u64..(1 << (n * m)) {
            let pairs: Vec<(usize, usize)> = (0..n * m).filter(|b| mask >> b & 1 == 1).map(|b| (b / m, b % m)).collect();
            let covers = (0..n).all(|i| pairs.iter().any(|p| p.0 == i)) && (0..m).all(|j| pairs.iter().any(|p| p.1 == j));
            if !covers {
                continue;
            }
            let mut d = 0.0f64;
            for &(a, b) in &pairs {
                for &(c, e) in &pairs {
                    d = d.max((x.dist(a, c) - y.dist(b, e)).abs());
                }
            }
            best = best.min(d);
        }
        best / 2.0
    }

    #[test]
    fn matches_brute_force_on_tiny_spaces() {
        for s in 0..6u64 {
            let x = random_space(2 + (s % 2) as usize, s);
            let y = random_space(3, 100 + s);
            let exact = gh_exact_small(&x, &y, EXACT_CAP).unwrap();
            assert!((exact.distance - brute_force(&x, &y)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_spaces() {
        for (a, b) in [(1.0, 3.0), (2.5, 0.5), (1.0, 1.0)] {
            let x = line(2, a);
            let y = line(2, b);
            let r = gh_exact_small(&x, &y, EXACT_CAP).unwrap();
            assert!((r.distance - (a - b).abs() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_versus_space_is_half_diameter() {
        let p = line(1, 1.0);
        let y = random_space(6, 3);
        let r = gh_exact_small(&p, &y, EXACT_CAP).unwrap();
        assert!((r.distance - y.diameter() / 2.0).abs() < 1e-12);
        assert!(gh_lower_bounds(&p, &y).unwrap().value >= y.diameter() / 2.0 - 1e-12);
    }

    #[test]
    fn identity_is_zero_and_covers_both_sides() {
        let x = random_space(7, 9);
        let r = gh_exact_small(&x, &x, EXACT_CAP).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.correspondence.pairs.len(), 7);
    }

    #[test]
    fn over_cap_advises_heuristic() {
        let x = random_space(8, 1);
        let err = gh_exact_small(&x, &x, EXACT_CAP).unwrap_err();
        assert!(err.to_string().contains("heuristic"));
    }

    #[test]
    fn long_line_against_short_line() {
        let x = line(11, 0.1);
        let y = line(3, 0.5);
        let exact = gh_exact_small(&x, &y, 11).unwrap();
        let lb = gh_lower_bounds(&x, &y).unwrap();
        assert!(lb.value <= exact.distance + 1e-12);
        let heur = gh_heuristic(&x, &y, 8, 1).unwrap();
        assert!(heur.distance >= exact.distance - 1e-12);
    }

    #[test]
    fn jittered_copy_is_close() {
        let x = random_space(12, 5);
        let eta = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut rows = x.rows();
        // jitter then restore the metric by shortest paths
        for i in 0..12 {
            for j in i + 1..12 {
                let v = rows[i][j] + rng.gen_range(0.0..eta);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        for k in 0..12 {
            for i in 0..12 {
                for j in 0..12 {
                    rows[i][j] = rows[i][j].min(rows[i][k] + rows[k][j]);
                }
            }
        }
        let mut ids: Vec<String> = x.points().to_vec();
        ids.reverse();
        let rev: Vec<Vec<f64>> = (0..12).map(|i| (0..12).map(|j| rows[11 - i][11 - j]).collect()).collect();
        let y = FiniteMetricSpace::from_rows("jitter", ids, &rev).unwrap();
        let r = gh_heuristic(&x, &y, 6, 2).unwrap();
        assert!(r.distance <= eta / 2.0 + 1e-9, "{}", r.distance);
    }

    #[test]
    fn triangle_inequality_and_symmetry() {
        let spaces: Vec<_> = (0..6).map(|s| random_space(1 + (s as usize) % 5, s)).collect();
        let n = spaces.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[i][j] = gh_exact_small(&spaces[i], &spaces[j], EXACT_CAP).unwrap().distance;
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[i][j], d[j][i]);
                for k in 0..n {
                    assert!(d[i][k] <= d[i][j] + d[j][k] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_member_family_is_bounded() {
        let x = random_space(20, 4);
        let m = [FamilyMember { label: "a".into(), parameter: 0.0, space: &x }];
        let r = family_precompactness("one", &m, &[0.5, 0.25], None, DivergenceRule::default()).unwrap();
        let Verdict::Bounded { envelope } = &r.verdict else { panic!("expected bounded") };
        assert_eq!(envelope, &r.members[0].counts);
    }

    #[test]
    fn growing_family_diverges_and_rescales() {
        let lines: Vec<_> = (1..=5).map(|k| line(10 * k, 0.1)).collect();
        let members: Vec<FamilyMember> = lines.iter().enumerate().map(|(k, l)| FamilyMember { label: l.id().to_string(), parameter: k as f64, space: l }).collect();
        let r = family_precompactness("lines", &members, &[0.5], None, DivergenceRule::default()).unwrap();
        assert!(!r.is_bounded());
        let scaled: Vec<_> = lines.iter().map(|l| l.scaled(2.0)).collect();
        let mut members: Vec<FamilyMember> = scaled.iter().enumerate().map(|(k, l)| FamilyMember { label: l.id().to_string(), parameter: k as f64, space: l }).collect();
        members.reverse();
        let s = family_precompactness("lines", &members, &[1.0], None, DivergenceRule::default()).unwrap();
        assert!(!s.is_bounded());
        let counts = |r: &PrecompactnessReport| r.members.iter().map(|m| m.counts.clone()).collect::<Vec<_>>();
        assert_eq!(counts(&r), counts(&s));
    }

    #[test]
    fn pointed_mode_needs_basepoint() {
        let x = random_space(5, 1);
        let m = [FamilyMember { label: "a".into(), parameter: 0.0, space: &x }];
        assert!(matches!(family_precompactness("f", &m, &[0.5], Some(1.0), DivergenceRule::default()), Err(Error::MissingBasepoint(_))));
    }
}
