//! Monostatic ISAC channel: target echo with aerial path loss, shadow
//! fading, RCS amplitude and Doppler, plus background clutter synthesized
//! from virtual reference points (RPs).
//!
//! Large-scale models follow the aerial (UMi-AV / UMa-AV) formulas for UE
//! heights above 22.5 m and fall back to the ground urban formulas below
//! that height (relevant for clutter reference points, which sit at or
//! below the BS). All path losses are one-way dB; the round trip doubles
//! them in dB.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::array::{beamformed_gain, steering_vector, ArrayGeometry, Direction};
use crate::error::{Result, SimError};
use crate::prs::{PrsConfig, ResourceGrid};
use crate::SPEED_OF_LIGHT;

/// Deployment scenario kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    #[serde(rename = "umi-av")]
    UmiAv,
    #[serde(rename = "uma-av")]
    UmaAv,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioKind::UmiAv => write!(f, "umi-av"),
            ScenarioKind::UmaAv => write!(f, "uma-av"),
        }
    }
}

/// Deployment scenario with its Table-defaulted geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// BS antenna height in meters (default 10 UMi-AV, 25 UMa-AV).
    pub bs_height_m: f64,
    /// Inter-site distance in meters (default 200 UMi-AV, 500 UMa-AV).
    pub isd_m: f64,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, carrier_hz: f64) -> Self {
        let (bs_height_m, isd_m) = match kind {
            ScenarioKind::UmiAv => (10.0, 200.0),
            ScenarioKind::UmaAv => (25.0, 500.0),
        };
        Scenario {
            kind,
            bs_height_m,
            isd_m,
            carrier_hz,
        }
    }

    /// Cell radius used for uniform drops: half the inter-site distance.
    pub fn cell_radius_m(&self) -> f64 {
        self.isd_m / 2.0
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bs_height_m > 0.0) {
            return Err(SimError::invalid_config("scenario.bs_height_m", "must be > 0"));
        }
        if !(self.isd_m > 0.0) {
            return Err(SimError::invalid_config("scenario.isd_m", "must be > 0"));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(SimError::invalid_config("scenario.carrier_hz", "must be > 0"));
        }
        Ok(())
    }
}

/// Sensing target (UAV) ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    /// Position in meters, BS-centered frame (z up).
    pub position_m: [f64; 3],
    /// Signed radial speed along the BS-target line, positive closing (m/s).
    pub radial_velocity_mps: f64,
    /// Mean radar cross-section in dB relative to 1 m^2.
    pub rcs_dbsm: f64,
}

/// One propagation path of the round-trip channel.
#[derive(Debug, Clone, Copy)]
pub struct PathComponent {
    /// Round-trip delay in seconds.
    pub delay_s: f64,
    /// Arrival direction (equal to departure: monostatic).
    pub direction: Direction,
    /// Complex amplitude at slow-time zero.
    pub gain: Complex64,
    /// Doppler shift in Hz (0 for clutter).
    pub doppler_hz: f64,
    pub is_clutter: bool,
}

impl PathComponent {
    /// Complex gain at absolute slow time `t_s` seconds.
    pub fn gain_at(&self, t_s: f64) -> Complex64 {
        if self.doppler_hz == 0.0 {
            self.gain
        } else {
            self.gain * Complex64::from_polar(1.0, 2.0 * PI * self.doppler_hz * t_s)
        }
    }
}

/// One drop's channel: clutter paths plus at most one target path.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub paths: Vec<PathComponent>,
    /// LoS condition of the BS-target link (false when no target).
    pub los_flag: bool,
    /// One-way BS-target path loss incl. shadow fading, dB; None when no target.
    pub one_way_pl_db: Option<f64>,
}

impl ChannelRealization {
    pub fn has_target(&self) -> bool {
        self.paths.iter().any(|p| !p.is_clutter)
    }
}

/// Clutter reference-point synthesis parameters; all exposed in the run
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterConfig {
    /// Minimum RP 2D distance from the BS, meters.
    pub rp_min_distance_m: f64,
    /// Sub-paths per reference point.
    pub subpaths_per_rp: usize,
    /// Median RMS delay spread in ns; None selects 100 (UMi-AV) / 300 (UMa-AV).
    pub delay_spread_median_ns: Option<f64>,
    /// Log-normal sigma of the delay spread, in log10 units.
    pub delay_spread_sigma_log10: f64,
    /// Laplacian angular spread around the RP direction, degrees.
    pub angle_spread_deg: f64,
}

impl Default for ClutterConfig {
    fn default() -> Self {
        ClutterConfig {
            rp_min_distance_m: 10.0,
            subpaths_per_rp: 8,
            delay_spread_median_ns: None,
            delay_spread_sigma_log10: 0.3,
            angle_spread_deg: 10.0,
        }
    }
}

impl ClutterConfig {
    fn delay_spread_median_s(&self, kind: ScenarioKind) -> f64 {
        let ns = self.delay_spread_median_ns.unwrap_or(match kind {
            ScenarioKind::UmiAv => 100.0,
            ScenarioKind::UmaAv => 300.0,
        });
        ns * 1e-9
    }

    pub fn validate(&self) -> Result<()> {
        if self.subpaths_per_rp == 0 {
            return Err(SimError::invalid_config("clutter.subpaths_per_rp", "must be >= 1"));
        }
        if !(self.rp_min_distance_m > 0.0) {
            return Err(SimError::invalid_config("clutter.rp_min_distance_m", "must be > 0"));
        }
        if !(self.angle_spread_deg >= 0.0) {
            return Err(SimError::invalid_config("clutter.angle_spread_deg", "must be >= 0"));
        }
        Ok(())
    }
}

/// Aerial LoS probability with height-dependent breakpoints; absorbing
/// branch for heights where the deployment guarantees LoS.
pub fn los_probability(scenario: &Scenario, h_ut_m: f64, d2d_m: f64) -> Result<f64> {
    if h_ut_m < 0.0 || d2d_m < 0.0 {
        return Err(SimError::invalid_argument(
            "los_probability needs non-negative height and distance",
        ));
    }
    let p = match scenario.kind {
        ScenarioKind::UmaAv => {
            if h_ut_m > 100.0 {
                1.0
            } else if h_ut_m > 22.5 {
                let lg = h_ut_m.log10();
                let d1 = (460.0 * lg - 700.0).max(18.0);
                let p1 = 4300.0 * lg - 3800.0;
                aerial_los(d2d_m, d1, p1)
            } else {
                ground_los_uma(d2d_m, h_ut_m)
            }
        }
        ScenarioKind::UmiAv => {
            if h_ut_m > 22.5 {
                let lg = h_ut_m.log10();
                let d1 = (294.05 * lg - 432.94).max(18.0);
                let p1 = 233.98 * lg - 0.95;
                aerial_los(d2d_m, d1, p1)
            } else {
                ground_los_umi(d2d_m)
            }
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

fn aerial_los(d2d: f64, d1: f64, p1: f64) -> f64 {
    if d2d <= d1 {
        1.0
    } else {
        d1 / d2d + (-d2d / p1).exp() * (1.0 - d1 / d2d)
    }
}

fn ground_los_umi(d2d: f64) -> f64 {
    if d2d <= 18.0 {
        1.0
    } else {
        18.0 / d2d + (-d2d / 36.0).exp() * (1.0 - 18.0 / d2d)
    }
}

fn ground_los_uma(d2d: f64, h_ut: f64) -> f64 {
    if d2d <= 18.0 {
        return 1.0;
    }
    let base = 18.0 / d2d + (-d2d / 63.0).exp() * (1.0 - 18.0 / d2d);
    let c = if h_ut <= 13.0 {
        0.0
    } else {
        ((h_ut - 13.0) / 10.0).powf(1.5)
    };
    base * (1.0 + c * 1.25 * (d2d / 100.0).powi(3) * (-d2d / 150.0).exp())
}

/// One-way path loss in dB. Heights above 22.5 m use the aerial urban
/// formulas; heights at or below 22.5 m use the ground urban formulas
/// (UE height clamped to at least 1.5 m there).
pub fn path_loss_db(scenario: &Scenario, los: bool, d3d_m: f64, h_ut_m: f64) -> Result<f64> {
    if !(d3d_m > 0.0) {
        return Err(SimError::invalid_argument("path_loss_db needs d3d > 0"));
    }
    let f_ghz = scenario.carrier_hz / 1e9;
    let lgd = d3d_m.log10();
    let pl = match scenario.kind {
        ScenarioKind::UmaAv => {
            if h_ut_m > 22.5 {
                let los_pl = 28.0 + 22.0 * lgd + 20.0 * f_ghz.log10();
                if los {
                    los_pl
                } else {
                    let lgh = h_ut_m.log10();
                    -17.5 + (46.0 - 7.0 * lgh) * lgd + 20.0 * (40.0 * PI * f_ghz / 3.0).log10()
                }
            } else {
                let h = h_ut_m.max(1.5);
                let los_pl = 28.0 + 22.0 * lgd + 20.0 * f_ghz.log10();
                if los {
                    los_pl
                } else {
                    let nlos = 13.54 + 39.08 * lgd + 20.0 * f_ghz.log10() - 0.6 * (h - 1.5);
                    nlos.max(los_pl)
                }
            }
        }
        ScenarioKind::UmiAv => {
            if h_ut_m > 22.5 {
                let lgh = h_ut_m.log10();
                let los_pl = 30.9 + (22.25 - 0.5 * lgh) * lgd + 20.0 * f_ghz.log10();
                if los {
                    los_pl
                } else {
                    let nlos = 32.4 + (43.2 - 7.6 * lgh) * lgd + 20.0 * f_ghz.log10();
                    nlos.max(los_pl)
                }
            } else {
                let h = h_ut_m.max(1.5);
                let los_pl = 32.4 + 21.0 * lgd + 20.0 * f_ghz.log10();
                if los {
                    los_pl
                } else {
                    let nlos = 22.4 + 35.3 * lgd + 21.3 * f_ghz.log10() - 0.3 * (h - 1.5);
                    nlos.max(los_pl)
                }
            }
        }
    };
    Ok(pl)
}

/// Shadow fading standard deviation in dB.
pub fn shadow_fading_std_db(scenario: &Scenario, los: bool, h_uav_m: f64) -> f64 {
    match (scenario.kind, los) {
        (ScenarioKind::UmiAv, true) => (5.0 * (-0.01 * h_uav_m).exp()).max(2.0),
        (ScenarioKind::UmaAv, true) => 4.64 * (-0.0066 * h_uav_m).exp(),
        (ScenarioKind::UmiAv, false) => 8.0,
        (ScenarioKind::UmaAv, false) => 6.0,
    }
}

/// Target echo magnitude: a_q = 10^(-PL_q/20) sqrt(4 pi sigma / lambda^2),
/// with PL_q the round-trip path loss (shadow fading already folded in by
/// the caller) and sigma the linear RCS.
pub fn target_amplitude(round_trip_pl_db: f64, rcs_dbsm: f64, wavelength_m: f64) -> f64 {
    debug_assert!(wavelength_m > 0.0);
    let sigma = 10f64.powf(rcs_dbsm / 10.0);
    10f64.powf(-round_trip_pl_db / 20.0) * (4.0 * PI * sigma / (wavelength_m * wavelength_m)).sqrt()
}

/// Slow-time complex gain of the target echo: a_q exp(j 2 pi f_D l dt).
pub fn st_slow_time_gain(
    a_q: f64,
    doppler_hz: f64,
    slow_time_index: usize,
    slow_time_step_s: f64,
) -> Complex64 {
    Complex64::from_polar(
        a_q,
        2.0 * PI * doppler_hz * slow_time_index as f64 * slow_time_step_s,
    )
}

fn sample_laplacian(rng: &mut impl Rng, scale: f64) -> f64 {
    // inverse-CDF sampling from a uniform on (-1/2, 1/2)
    let u: f64 = rng.gen::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Background clutter: `n_rp` reference points, each an NLoS cluster of
/// sub-paths with exponential power-delay profile and Laplacian angle
/// spread; amplitudes jointly scaled by 1/sqrt(n_rp).
pub fn generate_clutter(
    scenario: &Scenario,
    n_rp: usize,
    cfg: &ClutterConfig,
    rng: &mut impl Rng,
) -> Result<Vec<PathComponent>> {
    if n_rp == 0 {
        return Ok(Vec::new());
    }
    cfg.validate()?;
    let rp_scale = 1.0 / (n_rp as f64).sqrt();
    let angle_scale = cfg.angle_spread_deg.to_radians();
    let ds_median = cfg.delay_spread_median_s(scenario.kind);
    let ds_sigma = cfg.delay_spread_sigma_log10;
    let max_d = (scenario.cell_radius_m()).max(cfg.rp_min_distance_m + 1.0);

    let mut paths = Vec::with_capacity(n_rp * cfg.subpaths_per_rp);
    for _ in 0..n_rp {
        let d2d = rng.gen_range(cfg.rp_min_distance_m..max_d);
        let az = rng.gen_range(-PI..PI);
        let h = rng.gen_range(0.0..scenario.bs_height_m);
        let dz = h - scenario.bs_height_m;
        let d3d = d2d.hypot(dz);
        let el = dz.atan2(d2d);
        let one_way = path_loss_db(scenario, false, d3d, h)?;
        let rp_power = 10f64.powf(-2.0 * one_way / 10.0);
        let base_delay = 2.0 * d3d / SPEED_OF_LIGHT;

        let ds: f64 = ds_median * 10f64.powf(ds_sigma * Normal::new(0.0, 1.0).unwrap().sample(rng));
        let exp_dist = Exp::new(1.0 / ds).expect("positive delay spread");
        let mut offsets = Vec::with_capacity(cfg.subpaths_per_rp);
        let mut weights = Vec::with_capacity(cfg.subpaths_per_rp);
        for _ in 0..cfg.subpaths_per_rp {
            let dt: f64 = exp_dist.sample(rng);
            offsets.push(dt);
            weights.push((-dt / ds).exp());
        }
        let total: f64 = weights.iter().sum();
        for i in 0..cfg.subpaths_per_rp {
            let power = rp_power * weights[i] / total;
            let phase = rng.gen_range(0.0..2.0 * PI);
            let sub_az = az + sample_laplacian(rng, angle_scale);
            let sub_el = (el + sample_laplacian(rng, angle_scale)).clamp(-PI / 2.0, PI / 2.0);
            paths.push(PathComponent {
                delay_s: base_delay + offsets[i],
                direction: Direction::new(sub_az, sub_el),
                gain: Complex64::from_polar(power.sqrt() * rp_scale, phase),
                doppler_hz: 0.0,
                is_clutter: true,
            });
        }
    }
    Ok(paths)
}

/// Build the full channel for one drop: LoS draw, path loss with shadow
/// fading (doubled in dB for the round trip), geometric delay and angles,
/// RCS amplitude, Doppler from radial velocity, plus clutter.
pub fn build_channel(
    scenario: &Scenario,
    target: &TargetState,
    bs_position_m: [f64; 3],
    n_rp: usize,
    clutter_cfg: &ClutterConfig,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    let dx = target.position_m[0] - bs_position_m[0];
    let dy = target.position_m[1] - bs_position_m[1];
    let dz = target.position_m[2] - bs_position_m[2];
    let d2d = dx.hypot(dy);
    let d3d = (dx * dx + dy * dy + dz * dz).sqrt();
    if !(d3d > 0.0) {
        return Err(SimError::invalid_argument(
            "target position must differ from the BS position",
        ));
    }
    let h_ut = target.position_m[2];

    let p_los = los_probability(scenario, h_ut.max(0.0), d2d)?;
    let los = rng.gen::<f64>() < p_los;
    let pl = path_loss_db(scenario, los, d3d, h_ut)?;
    let sf_std = shadow_fading_std_db(scenario, los, h_ut);
    let sf = if sf_std > 0.0 {
        Normal::new(0.0, sf_std).unwrap().sample(rng)
    } else {
        0.0
    };
    let one_way = pl + sf;
    let round_trip = 2.0 * one_way;

    let wavelength = scenario.wavelength_m();
    let a_q = target_amplitude(round_trip, target.rcs_dbsm, wavelength);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let doppler_hz = 2.0 * target.radial_velocity_mps / wavelength;
    let direction = Direction::new(dy.atan2(dx), (dz / d3d).asin());

    let mut paths = vec![PathComponent {
        delay_s: 2.0 * d3d / SPEED_OF_LIGHT,
        direction,
        gain: Complex64::from_polar(a_q, phase),
        doppler_hz,
        is_clutter: false,
    }];
    paths.extend(generate_clutter(scenario, n_rp, clutter_cfg, rng)?);

    Ok(ChannelRealization {
        paths,
        los_flag: los,
        one_way_pl_db: Some(one_way),
    })
}

/// Channel with background clutter only (target-absent drops).
pub fn build_clutter_only_channel(
    scenario: &Scenario,
    n_rp: usize,
    clutter_cfg: &ClutterConfig,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    Ok(ChannelRealization {
        paths: generate_clutter(scenario, n_rp, clutter_cfg, rng)?,
        los_flag: false,
        one_way_pl_db: None,
    })
}

/// Single received symbol y at active tone `tone` and occasion-local PRS
/// symbol `l`:
///
/// y = sum_paths gain_l(path) (w^H a)(a^H f) e^(-j 2 pi tone K df tau) s + n
///
/// with n circular complex Gaussian of variance noise_std^2. The N x N
/// channel matrix is never materialized; this is the reference scalar
/// implementation used by the oracle tests and `evaluate` shortcuts in the
/// chain must agree with it.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_observation(
    realization: &ChannelRealization,
    prs: &PrsConfig,
    grid: &ResourceGrid,
    geometry: &ArrayGeometry,
    w: &[Complex64],
    f: &[Complex64],
    tone: usize,
    l: usize,
    noise_std: f64,
    rng: &mut impl Rng,
) -> Result<Complex64> {
    let n_active = grid.n_active();
    if tone >= n_active {
        return Err(SimError::invalid_argument(format!(
            "tone {tone} is not an active tone (0..{n_active})"
        )));
    }
    if l >= grid.n_symbols() {
        return Err(SimError::invalid_argument(format!(
            "symbol index {l} out of range (0..{})",
            grid.n_symbols()
        )));
    }
    let s = grid.active_value(l, tone);
    let t_s = l as f64 * prs.symbol_duration_s();
    let tone_spacing = prs.comb_k as f64 * prs.scs_hz();

    let mut y = Complex64::new(0.0, 0.0);
    for path in &realization.paths {
        let a = steering_vector(geometry, &path.direction);
        let bf = beamformed_gain(w, &a, &a, f)?;
        let delay_phase =
            Complex64::from_polar(1.0, -2.0 * PI * tone as f64 * tone_spacing * path.delay_s);
        y += path.gain_at(t_s) * bf * delay_phase * s;
    }
    Ok(y + sample_noise(noise_std, rng))
}

/// Circular complex Gaussian noise sample with E|n|^2 = std^2.
pub fn sample_noise(std: f64, rng: &mut impl Rng) -> Complex64 {
    if std == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let component = std / std::f64::consts::SQRT_2;
    let normal = Normal::new(0.0, component).unwrap();
    Complex64::new(normal.sample(rng), normal.sample(rng))
}
