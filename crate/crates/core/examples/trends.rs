// desk-scale Pmd / error trends across scenarios and heights
use prs_radar::channel::ScenarioKind;
use prs_radar::montecarlo::{aggregate, run_campaign, RunConfig};
use std::time::Instant;

fn main() {
    let drops: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let t0 = Instant::now();
    for kind in [ScenarioKind::UmiAv, ScenarioKind::UmaAv] {
        let mut cfg = RunConfig::default();
        cfg.scenario = kind;
        cfg.drops_per_config = drops;
        let records = run_campaign(&cfg).unwrap();
        let summary = aggregate(&records).unwrap();
        for g in &summary.groups {
            let err = g
                .position_error
                .map(|e| format!("p50 {:5.2} p90 {:5.2} p99 {:5.2} max {:6.2}", e.p50_m, e.p90_m, e.p99_m, e.max_m))
                .unwrap_or_else(|| "n/a".into());
            println!(
                "{:7} h={:3} Pmd={:6.3} ({} det / {} drops)  err[m]: {}",
                format!("{}", g.scenario),
                g.h_uav_m,
                g.miss_detection_prob.unwrap(),
                g.n_detected,
                g.n_drops,
                err
            );
        }
        // false alarms at the same seed, no target
        let mut cfg_fa = cfg.clone();
        cfg_fa.with_target = false;
        cfg_fa.uav_heights_m = vec![50.0];
        let fa_records = run_campaign(&cfg_fa).unwrap();
        let fa = fa_records.iter().filter(|r| r.detected).count();
        let par_max = fa_records.iter().map(|r| r.par_db).fold(f64::MIN, f64::max);
        println!("{kind:?} no-target: {fa}/{} false alarms, max PAR {par_max:.2} dB", fa_records.len());
    }
    println!("total {:.1?}", t0.elapsed());
}
