use proptest::prelude::*;

use ghlab::domains::delta_intrinsic_metric;
use ghlab::gh::{family_precompactness, gh_exact_small, gh_heuristic, gh_lower_bounds, DivergenceRule, FamilyMember};
use ghlab::invariants::{sandwich_check, ExactCaps};
use ghlab::{spaces, FiniteMetricSpace, MetricSpace};

fn planar(points: &[(f64, f64)]) -> FiniteMetricSpace {
    let coords: Vec<Vec<f64>> = points.iter().map(|&(x, y)| vec![x, y]).collect();
    FiniteMetricSpace::euclidean("cloud", &coords).unwrap()
}

fn cloud(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..3.0f64, 0.0..3.0f64), 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich_holds(points in cloud(12), eps in 0.1..2.0f64) {
        let r = sandwich_check(&planar(&points), eps, ExactCaps::default()).unwrap();
        prop_assert!(r.cov <= r.cap && r.cap <= r.cov_half);
        prop_assert!(r.holds);
    }

    #[test]
    fn gh_is_symmetric(a in 0u64..1000, b in 0u64..1000, n in 1usize..5, m in 1usize..5) {
        let (x, y) = (spaces::random_space(a, n).unwrap(), spaces::random_space(b, m).unwrap());
        let xy = gh_exact_small(&x, &y, 7).unwrap().distance;
        let yx = gh_exact_small(&y, &x, 7).unwrap().distance;
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn lower_exact_heuristic_are_ordered(a in 0u64..1000, b in 0u64..1000, n in 1usize..6, m in 1usize..6) {
        let (x, y) = (spaces::random_space(a, n).unwrap(), spaces::random_space(b, m).unwrap());
        let lower = gh_lower_bounds(&x, &y).unwrap().value;
        let exact = gh_exact_small(&x, &y, 7).unwrap().distance;
        let heur = gh_heuristic(&x, &y, 8, a ^ b).unwrap().distance;
        prop_assert!(lower <= exact + 1e-9);
        prop_assert!(exact <= heur + 1e-9);
    }

    #[test]
    fn family_verdict_ignores_member_order(sizes in prop::collection::vec(2usize..20, 1..7), shift in 0usize..7) {
        let spaces: Vec<FiniteMetricSpace> = sizes.iter().map(|&n| spaces::line(n).unwrap()).collect();
        let members: Vec<FamilyMember> = spaces
            .iter()
            .enumerate()
            .map(|(i, s)| FamilyMember { label: format!("m{i}"), parameter: i as f64, space: s as &dyn MetricSpace })
            .collect();
        let mut rotated = members.clone();
        rotated.rotate_left(shift % members.len());
        let a = family_precompactness("f", &members, &[1.0, 0.5], None, DivergenceRule::default()).unwrap();
        let b = family_precompactness("f", &rotated, &[1.0, 0.5], None, DivergenceRule::default()).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.members, b.members);
    }

    #[test]
    fn delta_metric_decreases_with_delta(points in cloud(20), d1 in 0.05..3.0f64, d2 in 0.05..3.0f64) {
        let space = planar(&points);
        let subset: Vec<usize> = (0..space.len()).collect();
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let coarse = delta_intrinsic_metric(&space, &subset, hi);
        let Ok(fine) = delta_intrinsic_metric(&space, &subset, lo) else {
            return Ok(());
        };
        // connectivity at a small step implies connectivity at a larger one
        let coarse = coarse.unwrap();
        for i in 0..space.len() {
            for j in 0..space.len() {
                prop_assert!(coarse.dist(i, j) <= fine.dist(i, j) + 1e-9);
                prop_assert!(space.dist(i, j) <= coarse.dist(i, j) + 1e-9);
            }
        }
    }
}
