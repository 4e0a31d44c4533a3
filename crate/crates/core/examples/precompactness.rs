//! Family verdicts: normal covers stay uniformly totally bounded while
//! universal covers do not.

use ghlab::covers::{pointed_ball, sw_cover, sw_normal_cover, CoverOptions};
use ghlab::gh::{family_precompactness, DivergenceRule, FamilyMember, Verdict};
use ghlab::MetricSpace;

fn main() -> ghlab::Result<()> {
    let h = 0.05;
    let ks = [3, 4, 5, 6];
    let normal: Vec<_> = ks.iter().map(|&k| sw_normal_cover(k, h, &CoverOptions::new(1.0)).map(|c| c.2)).collect::<Result<_, _>>()?;
    let universal: Vec<_> = ks.iter().map(|&k| sw_cover(k, h, &CoverOptions::new(2.1).with_margin(0.2)).map(|c| c.2)).collect::<Result<_, _>>()?;
    let balls: Vec<_> = universal.iter().map(|c| pointed_ball(c, 2.1)).collect::<Result<_, _>>()?;

    let n = family_precompactness("normal", &members(&ks, normal.iter().map(|c| &c.space as _).collect()), &[1.0, 0.5], None, DivergenceRule::default())?;
    let u = family_precompactness("universal", &members(&ks, balls.iter().map(|b| b as _).collect()), &[1.0, 0.5], None, DivergenceRule::default())?;
    for report in [&n, &u] {
        let counts: Vec<_> = report.members.iter().map(|m| m.counts.clone()).collect();
        match &report.verdict {
            Verdict::Bounded { envelope } => println!("{}: bounded, envelope {envelope:?}, counts {counts:?}", report.family),
            Verdict::Divergent { epsilon, counts, .. } => println!("{}: divergent at ε = {epsilon}, counts {counts:?}", report.family),
        }
    }
    Ok(())
}

fn members<'a>(ks: &[usize], spaces: Vec<&'a dyn MetricSpace>) -> Vec<FamilyMember<'a>> {
    spaces.into_iter().zip(ks).map(|(space, &k)| FamilyMember { label: format!("k={k}"), parameter: k as f64, space }).collect()
}
