//! Scenario-level Monte Carlo evaluation: drop targets in the cell, run the
//! detection chain per drop, sweep thresholds, and aggregate miss-detection
//! / false-alarm probabilities and position-error statistics.
//!
//! Every drop draws from its own random stream keyed by (master seed,
//! presence, drop id), so campaigns are deterministic and schedule
//! invariant; drops fan out across a rayon pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{dft_codebook, ArrayGeometry, Codebook};
use crate::chain::{ChainConfig, RadarChain, SweepStatistic};
use crate::channel::{
    build_channel, build_clutter_only_channel, ClutterConfig, Scenario, ScenarioKind, TargetState,
};
use crate::error::{Result, SimError};
use crate::prs::{build_grid_set, PrsConfig};

/// Beam raster of the analog sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookConfig {
    pub n_az: usize,
    pub n_el: usize,
    pub az_span_deg: [f64; 2],
    pub el_span_deg: [f64; 2],
}

impl Default for CodebookConfig {
    fn default() -> Self {
        CodebookConfig {
            n_az: 32,
            n_el: 72,
            az_span_deg: [-60.0, 60.0],
            el_span_deg: [-10.0, 90.0],
        }
    }
}

impl CodebookConfig {
    pub fn build(&self, geometry: &ArrayGeometry) -> Result<Codebook> {
        dft_codebook(
            geometry,
            self.n_az,
            self.n_el,
            (self.az_span_deg[0].to_radians(), self.az_span_deg[1].to_radians()),
            (self.el_span_deg[0].to_radians(), self.el_span_deg[1].to_radians()),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_az == 0 || self.n_el == 0 {
            return Err(SimError::invalid_config("codebook", "n_az and n_el must be >= 1"));
        }
        if self.n_az > 1 && !(self.az_span_deg[1] > self.az_span_deg[0]) {
            return Err(SimError::invalid_config("codebook.az_span_deg", "empty span"));
        }
        if self.n_el > 1 && !(self.el_span_deg[1] > self.el_span_deg[0]) {
            return Err(SimError::invalid_config("codebook.el_span_deg", "empty span"));
        }
        Ok(())
    }
}

/// Full campaign configuration; every field has a deployment default so an
/// empty document resolves to the reference UMi-AV setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Deployment scenario kind.
    pub scenario: ScenarioKind,
    /// BS antenna height override, meters (scenario default when omitted).
    pub bs_height_m: Option<f64>,
    /// Inter-site distance override, meters (scenario default when omitted).
    pub isd_m: Option<f64>,
    pub prs: PrsConfig,
    pub array: ArrayGeometry,
    pub codebook: CodebookConfig,
    /// Target altitudes evaluated by the campaign.
    pub uav_heights_m: Vec<f64>,
    pub drops_per_config: usize,
    /// Simulate target-present drops (false: clutter and noise only).
    pub with_target: bool,
    /// PAR detection threshold, dB.
    pub eta_db: f64,
    /// Radiated power cap, dBm per 100 MHz.
    pub eirp_dbm: f64,
    pub noise_figure_db: f64,
    /// Clutter reference points per drop.
    pub n_rp: usize,
    pub clutter: ClutterConfig,
    pub master_seed: u64,
    /// Signed closing speed of the dropped target, m/s.
    pub target_radial_velocity_mps: f64,
    pub target_rcs_dbsm: f64,
    /// Minimum 2D drop distance from the BS, meters.
    pub min_drop_distance_m: f64,
    /// PRS occasions spent per beam during the sweep.
    pub sweep_occasions_per_beam: usize,
    /// Coherently average each occasion before range processing.
    pub occasion_coherent: bool,
    /// Range IDFT length multiplier (1 = active tone count).
    pub range_pad_factor: usize,
    pub sweep_statistic: SweepStatistic,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioKind::UmiAv,
            bs_height_m: None,
            isd_m: None,
            prs: PrsConfig::default(),
            array: ArrayGeometry::default(),
            codebook: CodebookConfig::default(),
            uav_heights_m: vec![25.0, 50.0, 100.0, 200.0],
            drops_per_config: 4000,
            with_target: true,
            eta_db: 3.4,
            eirp_dbm: 75.0,
            noise_figure_db: 10.0,
            n_rp: 3,
            clutter: ClutterConfig::default(),
            master_seed: 1,
            target_radial_velocity_mps: 5.0,
            target_rcs_dbsm: -12.81,
            min_drop_distance_m: 10.0,
            sweep_occasions_per_beam: 4,
            occasion_coherent: false,
            range_pad_factor: 1,
            sweep_statistic: SweepStatistic::SuppressedPower,
        }
    }
}

impl RunConfig {
    /// Scenario with Table defaults and any overrides applied.
    pub fn scenario(&self) -> Scenario {
        let mut s = Scenario::new(self.scenario, self.prs.carrier_hz);
        if let Some(h) = self.bs_height_m {
            s.bs_height_m = h;
        }
        if let Some(isd) = self.isd_m {
            s.isd_m = isd;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.prs.validate()?;
        self.array.validate()?;
        self.codebook.validate()?;
        self.clutter.validate()?;
        self.scenario().validate()?;
        if self.uav_heights_m.is_empty() {
            return Err(SimError::invalid_config("uav_heights_m", "must be non-empty"));
        }
        if self.uav_heights_m.iter().any(|&h| !(h > 0.0)) {
            return Err(SimError::invalid_config("uav_heights_m", "heights must be > 0"));
        }
        if self.drops_per_config == 0 {
            return Err(SimError::invalid_config("drops_per_config", "must be >= 1"));
        }
        if self.eirp_dbm > 75.0 {
            return Err(SimError::invalid_config(
                "eirp_dbm",
                "exceeds the 75 dBm per 100 MHz regulatory cap",
            ));
        }
        if self.noise_figure_db < 0.0 {
            return Err(SimError::invalid_config("noise_figure_db", "must be >= 0"));
        }
        if !(self.min_drop_distance_m > 0.0)
            || self.min_drop_distance_m >= self.scenario().cell_radius_m()
        {
            return Err(SimError::invalid_config(
                "min_drop_distance_m",
                "must be in (0, cell radius)",
            ));
        }
        if self.sweep_occasions_per_beam == 0 {
            return Err(SimError::invalid_config("sweep_occasions_per_beam", "must be >= 1"));
        }
        if self.range_pad_factor == 0 {
            return Err(SimError::invalid_config("range_pad_factor", "must be >= 1"));
        }
        Ok(())
    }

    /// Short content hash of the resolved configuration, embedded in every
    /// output file.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

/// Resolved link budget.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinkBudget {
    /// Conducted transmit power: EIRP cap minus the array factor, dBm.
    pub tx_power_dbm: f64,
    /// Thermal noise per active tone (total active bandwidth spread across
    /// the active tones) plus noise figure, dBm.
    pub noise_per_tone_dbm: f64,
    /// Noise standard deviation in the normalized per-tone observation
    /// model (channel gains carry no transmit or array scaling).
    pub noise_std: f64,
}

/// EIRP-capped transmit power and the per-tone noise level, scaled into the
/// normalized observation model where a unit-gain path yields |y| = beta.
pub fn link_budget(config: &RunConfig) -> LinkBudget {
    let n = config.array.n() as f64;
    let tx_power_dbm = config.eirp_dbm - 10.0 * n.log10();
    let tone_bw_hz = config.prs.comb_k as f64 * config.prs.scs_hz();
    let noise_per_tone_dbm = -174.0 + 10.0 * tone_bw_hz.log10() + config.noise_figure_db;
    // sigma_model^2 = noise_mW / (P_tx_mW / (12 n_rb)) / N^2
    let n_sc = config.prs.n_subcarriers() as f64;
    let noise_std =
        (10f64.powf((noise_per_tone_dbm - tx_power_dbm) / 10.0) * n_sc / (n * n)).sqrt();
    LinkBudget {
        tx_power_dbm,
        noise_per_tone_dbm,
        noise_std,
    }
}

/// One Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub drop_id: u64,
    pub scenario: ScenarioKind,
    pub h_uav_m: f64,
    pub target_present: bool,
    pub los: Option<bool>,
    pub true_x_m: Option<f64>,
    pub true_y_m: Option<f64>,
    pub true_z_m: Option<f64>,
    pub detected: bool,
    pub par_db: f64,
    pub est_x_m: Option<f64>,
    pub est_y_m: Option<f64>,
    pub est_z_m: Option<f64>,
    /// Euclidean error, present iff detected and target present.
    pub position_error_m: Option<f64>,
    /// Per-drop failure diagnostic; empty on success.
    pub error: Option<String>,
    /// Short hash of the resolved campaign configuration.
    pub config_hash: String,
}

/// Position-error statistics over detected, target-present drops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub count: usize,
    pub mean_m: f64,
    pub p50_m: f64,
    pub p90_m: f64,
    pub p99_m: f64,
    pub max_m: f64,
}

/// Aggregated metrics of one (scenario, height) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub scenario: ScenarioKind,
    pub h_uav_m: f64,
    pub n_drops: usize,
    pub n_target_present: usize,
    pub n_detected: usize,
    /// Fraction of target-present drops not detected; None without targets.
    pub miss_detection_prob: Option<f64>,
    /// Fraction of target-absent drops declared detected; None without them.
    pub false_alarm_rate: Option<f64>,
    /// None when no drop was both present and detected.
    pub position_error: Option<ErrorStats>,
}

/// One row of the receiver operating curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub eta_db: f64,
    pub p_fa: f64,
    pub p_d: f64,
}

/// Campaign metrics: per-configuration summaries plus an optional ROC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub groups: Vec<GroupSummary>,
    pub roc: Option<Vec<RocPoint>>,
}

/// Uniformly drop one target in the sector of the cell disc swept by the
/// codebook: range density proportional to radius between the minimum drop
/// distance and the cell radius, azimuth uniform over the span.
pub fn drop_target(
    scenario: &Scenario,
    h_uav_m: f64,
    az_span_rad: (f64, f64),
    min_distance_m: f64,
    radial_velocity_mps: f64,
    rcs_dbsm: f64,
    rng: &mut impl Rng,
) -> TargetState {
    let r_max = scenario.cell_radius_m();
    let u: f64 = rng.gen();
    let r = (u * (r_max * r_max - min_distance_m * min_distance_m)
        + min_distance_m * min_distance_m)
        .sqrt();
    let az = rng.gen_range(az_span_rad.0..az_span_rad.1);
    TargetState {
        position_m: [r * az.cos(), r * az.sin(), h_uav_m],
        radial_velocity_mps,
        rcs_dbsm,
    }
}

/// Independent per-drop random stream.
fn drop_rng(master_seed: u64, with_target: bool, drop_id: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ if with_target { 0 } else { 0x9e37_79b9_7f4a_7c15 };
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(drop_id);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Run the full campaign: `drops_per_config` drops per configured height,
/// fanned out across the rayon pool; records come back in drop-id order
/// regardless of scheduling.
pub fn run_campaign(config: &RunConfig) -> Result<Vec<DropRecord>> {
    config.validate()?;
    let scenario = config.scenario();
    let codebook = config.codebook.build(&config.array)?;
    let grids = build_grid_set(&config.prs)?;
    let budget = link_budget(config);
    let chain_cfg = ChainConfig {
        eta_db: config.eta_db,
        noise_std: budget.noise_std,
        sweep_occasions_per_beam: config.sweep_occasions_per_beam,
        occasion_coherent: config.occasion_coherent,
        range_pad_factor: config.range_pad_factor,
        sweep_statistic: config.sweep_statistic,
    };
    let chain = RadarChain {
        prs: &config.prs,
        geometry: &config.array,
        codebook: &codebook,
        grids: &grids,
        bs_position_m: [0.0, 0.0, scenario.bs_height_m],
        cfg: chain_cfg,
    };
    let az_span = (
        config.codebook.az_span_deg[0].to_radians(),
        config.codebook.az_span_deg[1].to_radians(),
    );
    let config_hash = config.hash();

    let total = config.uav_heights_m.len() * config.drops_per_config;
    let records: Vec<DropRecord> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let drop_id = idx as u64;
            let h_uav = config.uav_heights_m[idx / config.drops_per_config];
            let mut rng = drop_rng(config.master_seed, config.with_target, drop_id);
            run_single_drop(
                config,
                &scenario,
                &chain,
                az_span,
                drop_id,
                h_uav,
                &config_hash,
                &mut rng,
            )
        })
        .collect();
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn run_single_drop(
    config: &RunConfig,
    scenario: &Scenario,
    chain: &RadarChain<'_>,
    az_span: (f64, f64),
    drop_id: u64,
    h_uav: f64,
    config_hash: &str,
    rng: &mut impl Rng,
) -> DropRecord {
    let mut record = DropRecord {
        drop_id,
        scenario: scenario.kind,
        h_uav_m: h_uav,
        target_present: config.with_target,
        los: None,
        true_x_m: None,
        true_y_m: None,
        true_z_m: None,
        detected: false,
        par_db: 0.0,
        est_x_m: None,
        est_y_m: None,
        est_z_m: None,
        position_error_m: None,
        error: None,
        config_hash: config_hash.to_string(),
    };

    let channel = if config.with_target {
        let target = drop_target(
            scenario,
            h_uav,
            az_span,
            config.min_drop_distance_m,
            config.target_radial_velocity_mps,
            config.target_rcs_dbsm,
            rng,
        );
        record.true_x_m = Some(target.position_m[0]);
        record.true_y_m = Some(target.position_m[1]);
        record.true_z_m = Some(target.position_m[2]);
        match build_channel(
            scenario,
            &target,
            chain.bs_position_m,
            config.n_rp,
            &config.clutter,
            rng,
        ) {
            Ok(ch) => {
                record.los = Some(ch.los_flag);
                ch
            }
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        }
    } else {
        match build_clutter_only_channel(scenario, config.n_rp, &config.clutter, rng) {
            Ok(ch) => ch,
            Err(e) => {
                record.error = Some(e.to_string());
                return record;
            }
        }
    };

    match chain.process_drop(&channel, rng) {
        Ok(result) => {
            record.detected = result.detected;
            record.par_db = result.par_db;
            if let Some(p) = result.position_m {
                record.est_x_m = Some(p[0]);
                record.est_y_m = Some(p[1]);
                record.est_z_m = Some(p[2]);
            }
            if result.detected && config.with_target {
                let dx = record.est_x_m.unwrap() - record.true_x_m.unwrap();
                let dy = record.est_y_m.unwrap() - record.true_y_m.unwrap();
                let dz = record.est_z_m.unwrap() - record.true_z_m.unwrap();
                record.position_error_m = Some((dx * dx + dy * dy + dz * dz).sqrt());
            }
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Threshold sweep over records that carry raw PAR values.
pub fn roc_sweep(
    records_with: &[DropRecord],
    records_without: &[DropRecord],
    eta_grid_db: &[f64],
) -> Result<Vec<RocPoint>> {
    if records_with.is_empty() || records_without.is_empty() || eta_grid_db.is_empty() {
        return Err(SimError::invalid_argument(
            "ROC sweep needs non-empty record lists and a non-empty threshold grid",
        ));
    }
    let frac_above = |records: &[DropRecord], eta: f64| -> f64 {
        records.iter().filter(|r| r.par_db > eta).count() as f64 / records.len() as f64
    };
    Ok(eta_grid_db
        .iter()
        .map(|&eta| RocPoint {
            eta_db: eta,
            p_fa: frac_above(records_without, eta),
            p_d: frac_above(records_with, eta),
        })
        .collect())
}

/// Nearest-rank quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Aggregate records into per-(scenario, height) summaries. Position-error
/// statistics are conditioned on successful detection of a present target.
pub fn aggregate(records: &[DropRecord]) -> Result<MetricsSummary> {
    if records.is_empty() {
        return Err(SimError::invalid_argument("no records to aggregate"));
    }
    let mut keys: Vec<(ScenarioKind, u64)> = Vec::new();
    for r in records {
        let key = (r.scenario, r.h_uav_m.to_bits());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| {
        format!("{}", a.0)
            .cmp(&format!("{}", b.0))
            .then(f64::from_bits(a.1).partial_cmp(&f64::from_bits(b.1)).unwrap())
    });

    let mut groups = Vec::with_capacity(keys.len());
    for (kind, h_bits) in keys {
        let h = f64::from_bits(h_bits);
        let rows: Vec<&DropRecord> = records
            .iter()
            .filter(|r| r.scenario == kind && r.h_uav_m.to_bits() == h_bits)
            .collect();
        let n_drops = rows.len();
        let n_present = rows.iter().filter(|r| r.target_present).count();
        let n_absent = n_drops - n_present;
        let n_detected = rows.iter().filter(|r| r.detected).count();
        let n_detected_present = rows.iter().filter(|r| r.detected && r.target_present).count();
        let n_detected_absent = n_detected - n_detected_present;

        let mut errors: Vec<f64> = rows.iter().filter_map(|r| r.position_error_m).collect();
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let position_error = if errors.is_empty() {
            None
        } else {
            Some(ErrorStats {
                count: errors.len(),
                mean_m: errors.iter().sum::<f64>() / errors.len() as f64,
                p50_m: quantile(&errors, 0.50),
                p90_m: quantile(&errors, 0.90),
                p99_m: quantile(&errors, 0.99),
                max_m: *errors.last().unwrap(),
            })
        };

        groups.push(GroupSummary {
            scenario: kind,
            h_uav_m: h,
            n_drops,
            n_target_present: n_present,
            n_detected,
            miss_detection_prob: (n_present > 0)
                .then(|| 1.0 - n_detected_present as f64 / n_present as f64),
            false_alarm_rate: (n_absent > 0).then(|| n_detected_absent as f64 / n_absent as f64),
            position_error,
        });
    }
    Ok(MetricsSummary { groups, roc: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::SPEED_OF_LIGHT;

    fn tiny_config() -> RunConfig {
        RunConfig {
            prs: PrsConfig {
                n_rb: 11,
                n_prs: 8,
                ..PrsConfig::default()
            },
            array: ArrayGeometry {
                n_rows: 8,
                n_cols: 8,
                spacing_wavelengths: 0.5,
            },
            codebook: CodebookConfig {
                n_az: 9,
                n_el: 5,
                az_span_deg: [-60.0, 60.0],
                el_span_deg: [-10.0, 80.0],
            },
            uav_heights_m: vec![50.0],
            drops_per_config: 4,
            n_rp: 1,
            ..RunConfig::default()
        }
    }

    #[test]
    fn default_config_is_paper_setup() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.scenario, ScenarioKind::UmiAv);
        assert_eq!(cfg.prs.n_rb, 66);
        assert_eq!(cfg.prs.comb_k, 4);
        assert_eq!(cfg.prs.l_prs, 4);
        assert_eq!(cfg.prs.n_prs, 256);
        assert_eq!(cfg.prs.carrier_hz, 30.0e9);
        assert_eq!(cfg.array.n(), 1024);
        assert_eq!(cfg.uav_heights_m, vec![25.0, 50.0, 100.0, 200.0]);
        assert_eq!(cfg.drops_per_config, 4000);
        assert_abs_diff_eq!(cfg.eta_db, 3.4);
        assert_abs_diff_eq!(cfg.eirp_dbm, 75.0);
        assert_abs_diff_eq!(cfg.target_rcs_dbsm, -12.81);
        assert_eq!(cfg.n_rp, 3);
        cfg.validate().unwrap();
    }

    #[test]
    fn link_budget_values() {
        let cfg = RunConfig::default();
        let b = link_budget(&cfg);
        // 75 - 10 log10(1024) = 44.9 dBm
        assert_abs_diff_eq!(b.tx_power_dbm, 44.897, epsilon = 1e-3);
        // thermal floor over the 95.04 MHz active bandwidth: -94.2 dBm + NF
        let n_active = cfg.prs.n_active() as f64;
        let total_dbm = b.noise_per_tone_dbm + 10.0 * n_active.log10();
        assert_abs_diff_eq!(total_dbm - cfg.noise_figure_db, -94.22, epsilon = 0.01);
    }

    #[test]
    fn doubling_bandwidth_adds_3db_noise() {
        let cfg = RunConfig::default();
        let mut wide = cfg.clone();
        wide.prs.scs_khz = 240.0;
        wide.prs.t_prs_s = 1.25e-4; // still > l_prs * symbol duration
        let a = link_budget(&cfg);
        let b = link_budget(&wide);
        assert_abs_diff_eq!(
            b.noise_per_tone_dbm - a.noise_per_tone_dbm,
            10.0 * 2f64.log10(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn drop_target_bounds_and_mean_distance() {
        let scenario = Scenario::new(ScenarioKind::UmiAv, 30.0e9);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let span = (-1.0f64, 1.0f64);
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let t = drop_target(&scenario, 25.0, span, 10.0, 5.0, -12.81, &mut rng);
            let d2d = t.position_m[0].hypot(t.position_m[1]);
            assert!((10.0..=100.0).contains(&d2d), "d2d {d2d} out of bounds");
            let az = t.position_m[1].atan2(t.position_m[0]);
            assert!((span.0..span.1).contains(&az));
            assert_eq!(t.position_m[2], 25.0);
            acc += d2d;
        }
        // E[r] for density ~ r on [10, 100]: 2(R^3 - m^3)/(3(R^2 - m^2)) = 67.3
        assert_abs_diff_eq!(acc / n as f64, 67.3, epsilon = 1.0);
    }

    #[test]
    fn umi_slant_stays_below_ambiguous_range() {
        let cfg = RunConfig::default();
        let unambiguous =
            SPEED_OF_LIGHT / (2.0 * cfg.prs.comb_k as f64 * cfg.prs.scs_hz());
        let max_slant = (100.0f64.powi(2) + 190.0f64.powi(2)).sqrt();
        assert_abs_diff_eq!(max_slant, 214.7, epsilon = 0.1);
        assert!(max_slant < unambiguous);
        assert_abs_diff_eq!(unambiguous, 312.3, epsilon = 0.2);
    }

    #[test]
    fn campaign_is_deterministic() {
        let cfg = tiny_config();
        let a = run_campaign(&cfg).unwrap();
        let b = run_campaign(&cfg).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);
        for r in &a {
            assert!(r.error.is_none(), "drop failed: {:?}", r.error);
        }
    }

    #[test]
    fn campaign_record_count_and_ids() {
        let mut cfg = tiny_config();
        cfg.uav_heights_m = vec![25.0, 50.0];
        cfg.drops_per_config = 3;
        let records = run_campaign(&cfg).unwrap();
        assert_eq!(records.len(), 6);
        for (i, r) in records.iter().enumerate() {
            assert_eq!(r.drop_id, i as u64);
        }
        assert!(records[..3].iter().all(|r| r.h_uav_m == 25.0));
        assert!(records[3..].iter().all(|r| r.h_uav_m == 50.0));
    }

    #[test]
    fn no_target_campaign_flags_absence() {
        let mut cfg = tiny_config();
        cfg.with_target = false;
        let records = run_campaign(&cfg).unwrap();
        for r in &records {
            assert!(!r.target_present);
            assert!(r.true_x_m.is_none());
            assert!(r.position_error_m.is_none());
        }
    }

    fn synthetic_record(id: u64, detected: bool, err: Option<f64>, present: bool) -> DropRecord {
        DropRecord {
            drop_id: id,
            scenario: ScenarioKind::UmiAv,
            h_uav_m: 25.0,
            target_present: present,
            los: Some(true),
            true_x_m: Some(0.0),
            true_y_m: Some(0.0),
            true_z_m: Some(25.0),
            detected,
            par_db: if detected { 10.0 } else { 1.0 },
            est_x_m: None,
            est_y_m: None,
            est_z_m: None,
            position_error_m: err,
            error: None,
            config_hash: "test".into(),
        }
    }

    #[test]
    fn aggregate_miss_detection_and_conditioning() {
        let records = vec![
            synthetic_record(0, true, Some(0.0), true),
            synthetic_record(1, true, Some(2.0), true),
            synthetic_record(2, false, None, true),
            synthetic_record(3, false, None, true),
        ];
        let summary = aggregate(&records).unwrap();
        assert_eq!(summary.groups.len(), 1);
        let g = &summary.groups[0];
        assert_abs_diff_eq!(g.miss_detection_prob.unwrap(), 0.5, epsilon = 1e-12);
        let stats = g.position_error.unwrap();
        assert_eq!(stats.count, 2);
        assert_abs_diff_eq!(stats.mean_m, 1.0, epsilon = 1e-12);

        let all = vec![
            synthetic_record(0, true, Some(0.0), true),
            synthetic_record(1, true, Some(0.0), true),
        ];
        let s = aggregate(&all).unwrap();
        let g = &s.groups[0];
        assert_abs_diff_eq!(g.miss_detection_prob.unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.position_error.unwrap().p99_m, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn roc_limits_and_monotonicity() {
        let with: Vec<DropRecord> = (0..50)
            .map(|i| synthetic_record(i, i % 2 == 0, None, true))
            .collect();
        let without: Vec<DropRecord> = (0..50)
            .map(|i| synthetic_record(i, i % 5 == 0, None, false))
            .collect();
        let grid = vec![f64::NEG_INFINITY, 0.0, 5.0, 20.0, f64::INFINITY];
        let roc = roc_sweep(&with, &without, &grid).unwrap();
        assert_abs_diff_eq!(roc[0].p_fa, 1.0);
        assert_abs_diff_eq!(roc[0].p_d, 1.0);
        assert_abs_diff_eq!(roc.last().unwrap().p_fa, 0.0);
        assert_abs_diff_eq!(roc.last().unwrap().p_d, 0.0);
        for w in roc.windows(2) {
            assert!(w[1].p_fa <= w[0].p_fa);
            assert!(w[1].p_d <= w[0].p_d);
        }
        assert!(roc_sweep(&[], &without, &grid).is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.master_seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut cfg = RunConfig::default();
        cfg.eirp_dbm = 80.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.uav_heights_m.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.prs.comb_k = 5;
        assert!(cfg.validate().is_err());
    }
}
