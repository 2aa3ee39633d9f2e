// stage-level timing at the reference configuration
use prs_radar::array::dft_codebook;
use prs_radar::chain::{ChainConfig, RadarChain};
use prs_radar::channel::{build_channel, ClutterConfig, Scenario, ScenarioKind, TargetState};
use prs_radar::montecarlo::{link_budget, RunConfig};
use prs_radar::prs::build_grid_set;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let cfg = RunConfig::default();
    let scenario = Scenario::new(ScenarioKind::UmiAv, 30e9);
    let t0 = Instant::now();
    let codebook = cfg.codebook.build(&cfg.array).unwrap();
    println!("codebook build: {:.2?} ({} beams)", t0.elapsed(), codebook.len());
    let t0 = Instant::now();
    let grids = build_grid_set(&cfg.prs).unwrap();
    println!("grid set build: {:.2?}", t0.elapsed());
    let budget = link_budget(&cfg);
    let chain = RadarChain {
        prs: &cfg.prs,
        geometry: &cfg.array,
        codebook: &codebook,
        grids: &grids,
        bs_position_m: [0.0, 0.0, 10.0],
        cfg: ChainConfig {
            noise_std: budget.noise_std,
            ..ChainConfig::default()
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let target = TargetState {
        position_m: [60.0, 30.0, 50.0],
        radial_velocity_mps: 5.0,
        rcs_dbsm: -12.81,
    };
    let channel = build_channel(&scenario, &target, [0.0, 0.0, 10.0], 3, &ClutterConfig::default(), &mut rng).unwrap();

    let t0 = Instant::now();
    let sweep = chain.beam_sweep(&channel, &mut rng).unwrap();
    println!("beam_sweep: {:.2?} (best {})", t0.elapsed(), sweep.best_index);

    let t0 = Instant::now();
    let obs = chain.dwell_observation(&channel, sweep.best_index, sweep.occasions_used, &mut rng).unwrap();
    println!("dwell_observation: {:.2?} ({} cols)", t0.elapsed(), obs.samples.ncols());

    let t0 = Instant::now();
    let result = chain.process_drop(&channel, &mut rng).unwrap();
    println!("full process_drop: {:.2?} detected={} par={:.1}", t0.elapsed(), result.detected, result.par_db);
}
