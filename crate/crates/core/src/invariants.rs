//! ε-packing and ε-covering numbers.
//!
//! Conventions: a set is ε-discrete when all pairwise distances are at least
//! `ε` (with tolerance [`BALL_TOL`](crate::metric::BALL_TOL)); covering uses
//! open ε-balls centred at points of the space, with the exact complement of
//! the same tolerance. With these conventions
//! `Cov_ε ≤ Cap_ε ≤ Cov_{ε/2}` holds on every finite metric space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{covered, separated, BallMode, MetricSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Greedy,
}

/// Point-count caps for the exact solvers.
#[derive(Clone, Copy, Debug)]
pub struct ExactCaps {
    pub packing: usize,
    pub covering: usize,
}

impl Default for ExactCaps {
    fn default() -> Self {
        Self { packing: 64, covering: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub epsilon: f64,
    pub count: usize,
    pub witness: Vec<String>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub epsilon: f64,
    pub count: usize,
    pub centers: Vec<String>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub space: String,
    pub epsilon: f64,
    pub cov: usize,
    pub cap: usize,
    pub cov_half: usize,
    pub holds: bool,
}

pub fn packing_number<S: MetricSpace + ?Sized>(space: &S, eps: f64, mode: Mode, caps: ExactCaps) -> Result<PackingResult> {
    check_eps(eps)?;
    let (idx, exact) = match mode {
        Mode::Greedy => (greedy_packing(space, eps), false),
        Mode::Exact => {
            if space.len() > caps.packing {
                return Err(Error::OverCap { what: "exact packing", n: space.len(), cap: caps.packing });
            }
            (exact_packing(space, eps), true)
        }
    };
    Ok(PackingResult { epsilon: eps, count: idx.len(), witness: names(space, &idx), exact })
}

pub fn covering_number<S: MetricSpace + ?Sized>(
    space: &S,
    eps: f64,
    mode: Mode,
    caps: ExactCaps,
) -> Result<CoveringResult> {
    check_eps(eps)?;
    let (idx, exact) = match mode {
        Mode::Greedy => (greedy_covering(space, eps), false),
        Mode::Exact => {
            if space.len() > caps.covering {
                return Err(Error::OverCap { what: "exact covering", n: space.len(), cap: caps.covering });
            }
            (exact_covering(space, eps), true)
        }
    };
    Ok(CoveringResult { epsilon: eps, count: idx.len(), centers: names(space, &idx), exact })
}

/// Exact `(Cov_ε, Cap_ε, Cov_{ε/2})` and whether the chain of inequalities holds.
pub fn sandwich_check<S: MetricSpace + ?Sized>(space: &S, eps: f64, caps: ExactCaps) -> Result<SandwichReport> {
    let cov = covering_number(space, eps, Mode::Exact, caps)?.count;
    let cap = packing_number(space, eps, Mode::Exact, caps)?.count;
    let cov_half = covering_number(space, eps / 2.0, Mode::Exact, caps)?.count;
    Ok(SandwichReport {
        space: space.id().to_string(),
        epsilon: eps,
        cov,
        cap,
        cov_half,
        holds: cov <= cap && cap <= cov_half,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("epsilon must be positive, got {eps}")))
    }
}

fn names<S: MetricSpace + ?Sized>(space: &S, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| space.point_id(i).to_string()).collect()
}

fn rank_of<S: MetricSpace + ?Sized>(space: &S) -> Vec<usize> {
    let mut rank = vec![0; space.len()];
    for (r, i) in space.lex_order().into_iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Farthest-point traversal from the base point (or the lexicographically
/// first point); stops when the farthest remaining point is within ε.
/// The result is ε-discrete and its open ε-balls cover the space.
pub fn greedy_packing<S: MetricSpace + ?Sized>(space: &S, eps: f64) -> Vec<usize> {
    let n = space.len();
    if n == 0 {
        return Vec::new();
    }
    let rank = rank_of(space);
    let start = space.basepoint().unwrap_or_else(|| space.lex_order()[0]);
    let mut chosen = vec![start];
    let mut mind = space.distances_from(start);
    loop {
        let mut best: Option<usize> = None;
        for i in 0..n {
            best = match best {
                None => Some(i),
                Some(b) if mind[i] > mind[b] || (mind[i] == mind[b] && rank[i] < rank[b]) => Some(i),
                keep => keep,
            };
        }
        let far = best.expect("non-empty");
        if !separated(mind[far], eps) {
            return chosen;
        }
        chosen.push(far);
        for (m, d) in mind.iter_mut().zip(space.distances_from(far)) {
            *m = m.min(d);
        }
    }
}

/// Above this size greedy covering switches from set-cover greedy to a single
/// net-building scan.
const SET_COVER_LIMIT: usize = 2500;

/// A valid open-ball cover by points of the space.
pub fn greedy_covering<S: MetricSpace + ?Sized>(space: &S, eps: f64) -> Vec<usize> {
    if space.len() <= SET_COVER_LIMIT {
        greedy_set_cover(space, eps)
    } else {
        net_cover(space, eps)
    }
}

/// Repeatedly takes the center covering the most uncovered points; ties by id.
fn greedy_set_cover<S: MetricSpace + ?Sized>(space: &S, eps: f64) -> Vec<usize> {
    let n = space.len();
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|c| space.neighborhood(c, eps, BallMode::Open).into_iter().filter(|&(_, d)| covered(d, eps)).map(|(i, _)| i).collect())
        .collect();
    let order = space.lex_order();
    let mut is_covered = vec![false; n];
    let mut left = n;
    let mut centers = Vec::new();
    while left > 0 {
        let mut best = (0usize, usize::MAX);
        for &c in &order {
            let gain = sets[c].iter().filter(|&&i| !is_covered[i]).count();
            if gain > best.0 {
                best = (gain, c);
            }
        }
        let c = best.1;
        centers.push(c);
        for &i in &sets[c] {
            if !is_covered[i] {
                is_covered[i] = true;
                left -= 1;
            }
        }
    }
    centers
}

/// Scans points by distance from the base point; every point not yet covered
/// becomes a center. Centers end up ε-discrete.
pub fn net_cover<S: MetricSpace + ?Sized>(space: &S, eps: f64) -> Vec<usize> {
    let n = space.len();
    let rank = rank_of(space);
    let start = space.basepoint().unwrap_or_else(|| space.lex_order()[0]);
    let from_start = space.distances_from(start);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| from_start[a].total_cmp(&from_start[b]).then(rank[a].cmp(&rank[b])));
    let mut is_covered = vec![false; n];
    let mut centers = Vec::new();
    for &c in &order {
        if is_covered[c] {
            continue;
        }
        centers.push(c);
        for (i, d) in space.neighborhood(c, eps, BallMode::Open) {
            if covered(d, eps) {
                is_covered[i] = true;
            }
        }
    }
    centers
}

fn dense_rows<S: MetricSpace + ?Sized>(space: &S) -> Vec<Vec<f64>> {
    (0..space.len()).map(|i| space.distances_from(i)).collect()
}

/// Maximum ε-discrete set, as a maximum clique of the "separated" graph.
pub fn exact_packing<S: MetricSpace + ?Sized>(space: &S, eps: f64) -> Vec<usize> {
    let n = space.len();
    let rows = dense_rows(space);
    let adj: Vec<BitSet> = (0..n)
        .map(|i| BitSet::from_iter(n, (0..n).filter(|&j| j != i && separated(rows[i][j], eps))))
        .collect();
    let seed = greedy_packing(space, eps);
    let mut clique = max_clique(&adj, seed);
    clique.sort_unstable();
    clique
}

/// Minimum set of open ε-balls covering the space, by branch and bound.
pub fn exact_covering<S: MetricSpace + ?Sized>(space: &S, eps: f64) -> Vec<usize> {
    let n = space.len();
    let rows = dense_rows(space);
    let sets: Vec<BitSet> = (0..n).map(|c| BitSet::from_iter(n, (0..n).filter(|&j| covered(rows[c][j], eps)))).collect();
    let mut best = greedy_set_cover(space, eps);
    let all = BitSet::full(n);
    let mut chosen = Vec::new();
    cover_search(&sets, &all, &mut chosen, &mut best);
    best.sort_unstable();
    best
}

fn cover_search(sets: &[BitSet], uncovered: &BitSet, chosen: &mut Vec<usize>, best: &mut Vec<usize>) {
    if uncovered.is_empty() {
        if chosen.len() < best.len() {
            *best = chosen.clone();
        }
        return;
    }
    if chosen.len() + 1 >= best.len() {
        return;
    }
    let left = uncovered.count();
    let max_gain = sets.iter().map(|s| s.intersection_count(uncovered)).max().unwrap_or(0);
    if max_gain == 0 || chosen.len() + left.div_ceil(max_gain) >= best.len() {
        return;
    }
    // branch on the uncovered point with the fewest candidate centers; covering is symmetric
    let pivot = uncovered
        .iter()
        .min_by_key(|&e| (sets[e].intersection_count(&BitSet::full(sets.len())), e))
        .expect("non-empty");
    let mut candidates: Vec<usize> = sets[pivot].iter().collect();
    candidates.sort_by_key(|&c| (std::cmp::Reverse(sets[c].intersection_count(uncovered)), c));
    for c in candidates {
        chosen.push(c);
        let rest = uncovered.difference(&sets[c]);
        cover_search(sets, &rest, chosen, best);
        chosen.pop();
    }
}

/// Maximum clique with greedy-colouring bounds. `seed` must be a clique.
pub fn max_clique(adj: &[BitSet], seed: Vec<usize>) -> Vec<usize> {
    let n = adj.len();
    let mut best = seed;
    let mut current = Vec::new();
    expand(adj, BitSet::full(n), &mut current, &mut best);
    best
}

fn expand(adj: &[BitSet], mut cand: BitSet, current: &mut Vec<usize>, best: &mut Vec<usize>) {
    let (order, colors) = color_sort(adj, &cand);
    for k in (0..order.len()).rev() {
        if current.len() + colors[k] <= best.len() {
            return;
        }
        let v = order[k];
        current.push(v);
        let next = cand.intersection(&adj[v]);
        if next.is_empty() {
            if current.len() > best.len() {
                *best = current.clone();
            }
        } else {
            expand(adj, next, current, best);
        }
        current.pop();
        cand.remove(v);
    }
}

/// Greedy sequential colouring; returns vertices ordered by colour with the
/// colour number (1-based) of each position.
fn color_sort(adj: &[BitSet], cand: &BitSet) -> (Vec<usize>, Vec<usize>) {
    let mut uncolored = cand.clone();
    let mut order = Vec::with_capacity(cand.count());
    let mut colors = Vec::with_capacity(cand.count());
    let mut color = 0;
    while !uncolored.is_empty() {
        color += 1;
        let mut q = uncolored.clone();
        while let Some(v) = q.first() {
            q.remove(v);
            q = q.difference(&adj[v]);
            uncolored.remove(v);
            order.push(v);
            colors.push(color);
        }
    }
    (order, colors)
}

/// Fixed-size bit set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn empty(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn from_iter(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in items {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect() }
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{padded_ids, DiscretizedLengthSpace, FiniteMetricSpace};

    fn line11() -> FiniteMetricSpace {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        FiniteMetricSpace::from_fn("line11", padded_ids("x", 11), |i, j| (xs[i] - xs[j]).abs()).unwrap()
    }

    /// Independent oracles: enumerate every subset.
    fn brute_packing(s: &FiniteMetricSpace, eps: f64) -> usize {
        let n = s.len();
        (0u32..1 << n)
            .filter(|&m| {
                (0..n).all(|i| (0..n).all(|j| i == j || m >> i & 1 == 0 || m >> j & 1 == 0 || s.dist(i, j) >= eps - 1e-12))
            })
            .map(u32::count_ones)
            .max()
            .unwrap() as usize
    }

    fn brute_covering(s: &FiniteMetricSpace, eps: f64) -> usize {
        let n = s.len();
        (1u32..1 << n)
            .filter(|&m| (0..n).all(|x| (0..n).any(|c| m >> c & 1 == 1 && s.dist(c, x) < eps - 1e-12)))
            .map(u32::count_ones)
            .min()
            .unwrap() as usize
    }

    #[test]
    fn equidistant_points_all_discrete() {
        let s = FiniteMetricSpace::from_fn("eq4", padded_ids("p", 4), |_, _| 1.0).unwrap();
        let p = packing_number(&s, 1.0, Mode::Exact, ExactCaps::default()).unwrap();
        assert_eq!(p.count, 4);
        assert!(p.exact);
    }

    #[test]
    fn line_packing_and_covering_match_brute_force() {
        let s = line11();
        assert_eq!(brute_packing(&s, 0.35), 3);
        assert_eq!(brute_covering(&s, 0.35), 2);
        assert_eq!(brute_covering(&s, 0.175), 4);
        assert_eq!(packing_number(&s, 0.35, Mode::Exact, ExactCaps::default()).unwrap().count, 3);
        let c = covering_number(&s, 0.35, Mode::Exact, ExactCaps::default()).unwrap();
        assert_eq!(c.count, 2);
        let r = sandwich_check(&s, 0.35, ExactCaps::default()).unwrap();
        assert_eq!((r.cov, r.cap, r.cov_half), (2, 3, 4));
        assert!(r.holds);
    }

    #[test]
    fn line_cover_centers_are_valid() {
        let s = line11();
        let c = covering_number(&s, 0.35, Mode::Exact, ExactCaps::default()).unwrap();
        let centers: Vec<usize> = c.centers.iter().map(|id| s.index_of(id).unwrap()).collect();
        assert!((0..11).all(|x| centers.iter().any(|&k| s.dist(k, x) < 0.35)));
    }

    #[test]
    fn single_point_covering_is_one() {
        let s = FiniteMetricSpace::from_rows("pt", vec!["a".into()], &[vec![0.0]]).unwrap();
        for eps in [1e-6, 1.0, 1e6] {
            assert_eq!(covering_number(&s, eps, Mode::Exact, ExactCaps::default()).unwrap().count, 1);
            assert_eq!(covering_number(&s, eps, Mode::Greedy, ExactCaps::default()).unwrap().count, 1);
        }
    }

    #[test]
    fn two_point_sandwich_uses_open_balls() {
        // a point at distance exactly ε is not inside the open ε-ball
        let s = FiniteMetricSpace::from_fn("two", padded_ids("p", 2), |_, _| 1.0).unwrap();
        let r = sandwich_check(&s, 1.0, ExactCaps::default()).unwrap();
        assert_eq!((r.cov, r.cap, r.cov_half), (2, 2, 2));
        assert!(r.holds);
        let r = sandwich_check(&s, 1.5, ExactCaps::default()).unwrap();
        assert_eq!((r.cov, r.cap, r.cov_half), (1, 1, 2));
    }

    #[test]
    fn four_cycle_sandwich_exhaustive() {
        let c4 = DiscretizedLengthSpace::from_edges(
            "c4",
            padded_ids("v", 4),
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        )
        .unwrap()
        .to_finite()
        .unwrap();
        let r = sandwich_check(&c4, 1.0, ExactCaps::default()).unwrap();
        assert_eq!(r.cov, brute_covering(&c4, 1.0));
        assert_eq!(r.cap, brute_packing(&c4, 1.0));
        assert_eq!(r.cov_half, brute_covering(&c4, 0.5));
        assert!(r.holds);
    }

    #[test]
    fn exact_over_cap_errors() {
        let s = FiniteMetricSpace::from_fn("big", padded_ids("p", 40), |i, j| (i as f64 - j as f64).abs()).unwrap();
        assert!(matches!(covering_number(&s, 1.0, Mode::Exact, ExactCaps::default()), Err(Error::OverCap { .. })));
        assert!(packing_number(&s, 1.0, Mode::Exact, ExactCaps::default()).is_ok());
        assert!(matches!(packing_number(&s, 0.0, Mode::Greedy, ExactCaps::default()), Err(Error::Parameter(_))));
    }

    #[test]
    fn greedy_packing_witness_is_discrete_and_covering() {
        let s = line11();
        let w = greedy_packing(&s, 0.35);
        for (a, &i) in w.iter().enumerate() {
            for &j in &w[a + 1..] {
                assert!(s.dist(i, j) >= 0.35 - 1e-12);
            }
        }
        assert!((0..11).all(|x| w.iter().any(|&c| s.dist(c, x) < 0.35)));
    }

    #[test]
    fn net_cover_is_valid() {
        let s = line11();
        let c = net_cover(&s, 0.25);
        assert!((0..11).all(|x| c.iter().any(|&k| s.dist(k, x) < 0.25)));
    }

    #[test]
    fn bitset_ops() {
        let a = BitSet::from_iter(130, [0, 5, 64, 129]);
        let b = BitSet::from_iter(130, [5, 129]);
        assert_eq!(a.count(), 4);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![5, 129]);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 64]);
        assert_eq!(a.first(), Some(0));
        assert!(BitSet::empty(70).is_empty());
    }
}
