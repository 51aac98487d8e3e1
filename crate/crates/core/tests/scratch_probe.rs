// Temporary tuning probe; removed before release.
use coverset_core::aco::{iga_baca_run, AcoParams, IgaBacaSchedule};
use coverset_core::framework::{run, EvalContext, Termination};
use coverset_core::ga::AdaptiveGaParams;
use coverset_core::lion::{LionOptimizer, LionParams};
use coverset_core::{
    random_deployment_with_radius, CoverageBasis, CoverageModel, MonitoringGrid, Objective,
    RngStream,
};
use std::time::Instant;

fn ctx_for_seed(seed: u64) -> EvalContext {
    let g = MonitoringGrid::new(100.0, 100.0, 100, 100).unwrap();
    let root = RngStream::new(seed);
    let d = random_deployment_with_radius(100, &g, 10.0, root.substream(1).seed()).unwrap();
    EvalContext::new(
        CoverageModel::new(d, g, Objective::SquaredPerUse, CoverageBasis::ReachableArea).unwrap(),
    )
}

#[test]
#[ignore]
fn probe_lo_vs_igabaca() {
    let checkpoints = [50u32, 100, 150, 200, 250];
    let mut lo_cov: Vec<Vec<f64>> = vec![vec![]; 5];
    let mut lo_act: Vec<Vec<usize>> = vec![vec![]; 5];
    let mut ib_cov: Vec<Vec<f64>> = vec![vec![]; 5];
    let mut ib_act: Vec<Vec<usize>> = vec![vec![]; 5];

    for seed in 1..=10u64 {
        let t0 = Instant::now();
        let ctx = ctx_for_seed(seed);
        let root = RngStream::new(seed);
        let mut rng = root.substream(2);
        let mut lo = LionOptimizer::new(LionParams::default(), &ctx, &mut rng).unwrap();
        let term = Termination::new(250).unwrap();
        let (_best, trace) = run(&mut lo, &term, &ctx, &mut rng, false).unwrap();
        for (k, cp) in checkpoints.iter().enumerate() {
            let r = trace.at_generation(*cp).unwrap();
            lo_cov[k].push(r.best_f1 * 100.0);
            lo_act[k].push(r.best_active);
        }
        let lo_ms = t0.elapsed().as_millis();

        let t1 = Instant::now();
        let ctx2 = ctx_for_seed(seed);
        let root = RngStream::new(seed);
        let mut rng2 = root.substream(2);
        let schedule = IgaBacaSchedule::split_budget(250).unwrap();
        let (_best, trace2) = iga_baca_run(
            AdaptiveGaParams::default(),
            AcoParams::default(),
            schedule,
            40,
            None,
            &ctx2,
            &mut rng2,
            false,
        )
        .unwrap();
        for (k, cp) in checkpoints.iter().enumerate() {
            let r = trace2.at_generation(*cp).unwrap();
            ib_cov[k].push(r.best_f1 * 100.0);
            ib_act[k].push(r.best_active);
        }
        println!(
            "seed {seed}: lo {} ms, iga-baca {} ms",
            lo_ms,
            t1.elapsed().as_millis()
        );
    }

    let med = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.total_cmp(b));
        (v[4] + v[5]) / 2.0
    };
    let medu = |v: &mut Vec<usize>| {
        v.sort();
        (v[4] + v[5]) as f64 / 2.0
    };
    for (k, cp) in checkpoints.iter().enumerate() {
        println!(
            "gen {cp}: LO cov {:.2}% act {:.1} | IGA-BACA cov {:.2}% act {:.1}",
            med(&mut lo_cov[k]),
            medu(&mut lo_act[k]),
            med(&mut ib_cov[k]),
            medu(&mut ib_act[k]),
        );
    }
}
