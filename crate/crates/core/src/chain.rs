//! Receive-side radar processing: clutter suppression, beam-sweep angle
//! estimation, matched-filter channel estimation, IDFT range profile,
//! peak-to-average-ratio detection, and 3D position reconstruction.
//!
//! Stages are pure transforms; the per-drop pipeline is single threaded and
//! parallelism lives at the drop level in `montecarlo`.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::array::{steering_correlation, ArrayGeometry, Codebook, Direction};
use crate::channel::ChannelRealization;
use crate::error::{Result, SimError};
use crate::prs::{PrsConfig, ResourceGrid};
use crate::SPEED_OF_LIGHT;

/// Observations gathered while dwelling on one codebook beam.
#[derive(Debug, Clone)]
pub struct BeamObservation {
    pub beam_index: usize,
    /// y indexed (active tone, slow-time symbol).
    pub samples: Array2<Complex64>,
}

/// Range profile from the range-processing IDFT.
#[derive(Debug, Clone)]
pub struct RangeProfile {
    /// r_l(d) indexed (range bin, slow-time column).
    pub columns: Array2<Complex64>,
    /// Noncoherent slow-time average: mean_l |r_l(d)| per bin.
    pub averaged: Vec<f64>,
    /// Range bin width c / (2 N_R K df), meters.
    pub bin_width_m: f64,
}

/// Outcome of the PAR detection decision on a range profile.
#[derive(Debug, Clone, Copy)]
pub struct ParDecision {
    pub detected: bool,
    pub par_db: f64,
    pub peak_bin: usize,
    /// bin_width * peak_bin, present only when detected.
    pub range_m: Option<f64>,
}

/// Full per-drop detection outcome.
#[derive(Debug, Clone, Copy)]
pub struct DetectionResult {
    pub detected: bool,
    pub par_db: f64,
    pub peak_bin: usize,
    pub range_m: Option<f64>,
    /// Direction of the winning sweep beam.
    pub direction: Direction,
    pub position_m: Option<[f64; 3]>,
}

/// Result of the beam sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub best_index: usize,
    pub direction: Direction,
    /// Per-beam accumulated statistic, in codebook order.
    pub power_map: Vec<f64>,
    /// Global occasions consumed by the sweep.
    pub occasions_used: usize,
}

/// Statistic accumulated per beam during the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatistic {
    /// Sum of |h|^2 over tones and symbols after clutter suppression.
    SuppressedPower,
    /// Peak of the noncoherently averaged range profile.
    RangePeak,
}

/// Processing options of the receive chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    /// PAR detection threshold, dB.
    pub eta_db: f64,
    /// Per-tone noise standard deviation in observation units.
    pub noise_std: f64,
    /// PRS occasions spent on each beam during the sweep.
    pub sweep_occasions_per_beam: usize,
    /// Coherently average the symbols of each occasion before range
    /// processing (one profile column per occasion instead of per symbol).
    pub occasion_coherent: bool,
    /// Range IDFT length as a multiple of the active tone count.
    pub range_pad_factor: usize,
    pub sweep_statistic: SweepStatistic,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            eta_db: 3.4,
            noise_std: 0.0,
            sweep_occasions_per_beam: 4,
            occasion_coherent: false,
            range_pad_factor: 1,
            sweep_statistic: SweepStatistic::SuppressedPower,
        }
    }
}

/// Subtract the slow-time empirical mean from every tone row; output rows
/// are exactly zero mean. Static (constant-in-l) content vanishes.
pub fn clutter_suppress(samples: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let cols = samples.ncols();
    if cols < 2 {
        return Err(SimError::invalid_argument(
            "clutter suppression needs at least 2 slow-time symbols",
        ));
    }
    let mut out = samples.clone();
    let inv = 1.0 / cols as f64;
    for mut row in out.rows_mut() {
        let mean: Complex64 = row.iter().sum::<Complex64>() * inv;
        for v in row.iter_mut() {
            *v -= mean;
        }
    }
    Ok(out)
}

/// Matched filter with the known conjugate PRS symbols, unit-gain
/// normalized: h = s* y / beta^2, so h estimates the channel itself.
pub fn matched_filter(y: &Array2<Complex64>, s: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    if y.dim() != s.dim() {
        return Err(SimError::invalid_argument(format!(
            "matched filter shape mismatch: y {:?} vs s {:?}",
            y.dim(),
            s.dim()
        )));
    }
    let beta_sq = s[(0, 0)].norm_sqr();
    if !(beta_sq > 0.0) {
        return Err(SimError::invalid_argument("PRS symbols must be non-zero"));
    }
    let mut out = Array2::zeros(y.dim());
    for ((idx, yv), sv) in y.indexed_iter().zip(s.iter()) {
        out[idx] = sv.conj() * yv / beta_sq;
    }
    Ok(out)
}

/// Range-processing IDFT of length `n_r` down the active-tone axis
/// (zero-padded past the data), one profile per slow-time column, plus the
/// noncoherent average across columns.
pub fn range_profile(
    h_hat: &Array2<Complex64>,
    n_r: usize,
    tone_spacing_hz: f64,
) -> Result<RangeProfile> {
    let (n_tones, n_cols) = h_hat.dim();
    if n_r < n_tones {
        return Err(SimError::invalid_argument(format!(
            "IDFT length {n_r} shorter than the data ({n_tones} tones)"
        )));
    }
    if n_cols == 0 || n_tones == 0 {
        return Err(SimError::invalid_argument("empty channel estimate"));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n_r);
    let mut columns = Array2::zeros((n_r, n_cols));
    let mut averaged = vec![0.0; n_r];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_r];
    let scale = 1.0 / n_r as f64;
    for l in 0..n_cols {
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for k in 0..n_tones {
            buf[k] = h_hat[(k, l)];
        }
        fft.process(&mut buf);
        for d in 0..n_r {
            let v = buf[d] * scale;
            columns[(d, l)] = v;
            averaged[d] += v.norm();
        }
    }
    let inv_cols = 1.0 / n_cols as f64;
    averaged.iter_mut().for_each(|v| *v *= inv_cols);
    Ok(RangeProfile {
        columns,
        averaged,
        bin_width_m: SPEED_OF_LIGHT / (2.0 * n_r as f64 * tone_spacing_hz),
    })
}

/// PAR detection on the averaged profile: PAR = peak / mean over bins
/// (mean includes the peak), declared when PAR in dB exceeds eta.
/// An all-zero profile has PAR defined as 0 dB and is never detected.
pub fn par_detect(profile: &RangeProfile, eta_db: f64) -> Result<ParDecision> {
    if profile.averaged.is_empty() {
        return Err(SimError::invalid_argument("empty range profile"));
    }
    let mut peak_bin = 0;
    let mut peak = profile.averaged[0];
    for (d, &v) in profile.averaged.iter().enumerate() {
        if v > peak {
            peak = v;
            peak_bin = d;
        }
    }
    let mean: f64 = profile.averaged.iter().sum::<f64>() / profile.averaged.len() as f64;
    let degenerate = !(mean > 0.0) || !(peak > 0.0);
    let par_db = if degenerate {
        0.0
    } else {
        10.0 * (peak / mean).log10()
    };
    let detected = !degenerate && par_db > eta_db;
    Ok(ParDecision {
        detected,
        par_db,
        peak_bin,
        range_m: detected.then_some(peak_bin as f64 * profile.bin_width_m),
    })
}

/// p = p_BS + R (cos az cos el, sin az cos el, sin el).
pub fn position_estimate(range_m: f64, direction: &Direction, bs_position_m: [f64; 3]) -> [f64; 3] {
    debug_assert!(range_m >= 0.0);
    let u = direction.unit_vector();
    [
        bs_position_m[0] + range_m * u[0],
        bs_position_m[1] + range_m * u[1],
        bs_position_m[2] + range_m * u[2],
    ]
}

/// Per-channel tables reused across beams: the delay phasor of every path
/// on every active tone.
struct ChannelTables {
    /// (path, tone) -> exp(-j 2 pi tone K df tau)
    phasors: Array2<Complex64>,
    /// Indices of Doppler-bearing paths.
    dynamic: Vec<usize>,
    /// Indices of static paths.
    static_paths: Vec<usize>,
}

impl ChannelTables {
    fn new(channel: &ChannelRealization, n_active: usize, tone_spacing_hz: f64) -> Self {
        let n_paths = channel.paths.len();
        let mut phasors = Array2::zeros((n_paths, n_active));
        for (r, path) in channel.paths.iter().enumerate() {
            let step = -2.0 * PI * tone_spacing_hz * path.delay_s;
            // incremental rotation keeps this O(tones) without trig per tone
            let rot = Complex64::from_polar(1.0, step);
            let mut cur = Complex64::new(1.0, 0.0);
            for m in 0..n_active {
                phasors[(r, m)] = cur;
                cur *= rot;
            }
        }
        let mut dynamic = Vec::new();
        let mut static_paths = Vec::new();
        for (r, p) in channel.paths.iter().enumerate() {
            if p.doppler_hz == 0.0 {
                static_paths.push(r);
            } else {
                dynamic.push(r);
            }
        }
        ChannelTables {
            phasors,
            dynamic,
            static_paths,
        }
    }
}

/// The configured receive chain: codebook sweep plus detection dwell.
pub struct RadarChain<'a> {
    pub prs: &'a PrsConfig,
    pub geometry: &'a ArrayGeometry,
    pub codebook: &'a Codebook,
    /// One pre-built grid per occasion of the dwell.
    pub grids: &'a [ResourceGrid],
    pub bs_position_m: [f64; 3],
    pub cfg: ChainConfig,
}

impl<'a> RadarChain<'a> {
    fn grid(&self, global_occasion: usize) -> &ResourceGrid {
        &self.grids[global_occasion % self.grids.len()]
    }

    fn symbol_time_s(&self, global_occasion: usize, symbol: usize) -> f64 {
        global_occasion as f64 * self.prs.t_prs_s + symbol as f64 * self.prs.symbol_duration_s()
    }

    fn tone_spacing_hz(&self) -> f64 {
        self.prs.comb_k as f64 * self.prs.scs_hz()
    }

    /// PRS symbols on active tones for a run of occasions, (tone, column).
    fn prs_matrix(&self, first_occasion: usize, n_occasions: usize) -> Array2<Complex64> {
        let n_active = self.prs.n_active();
        let l_prs = self.prs.l_prs;
        let mut s = Array2::zeros((n_active, n_occasions * l_prs));
        for occ in 0..n_occasions {
            let grid = self.grid(first_occasion + occ);
            for l in 0..l_prs {
                let col = occ * l_prs + l;
                for m in 0..n_active {
                    s[(m, col)] = grid.active_value(l, m);
                }
            }
        }
        s
    }

    /// Simulate the received symbol matrix for `n_occasions` occasions with
    /// transmit and receive steered to `beam_dir` (monostatic, w = f).
    /// Equivalent to evaluating the scalar observation model per (tone,
    /// symbol); the per-path array response is the closed-form two-way
    /// steering correlation.
    fn simulate_dwell(
        &self,
        channel: &ChannelRealization,
        tables: &ChannelTables,
        beam_dir: &Direction,
        first_occasion: usize,
        n_occasions: usize,
        rng: &mut impl Rng,
    ) -> Array2<Complex64> {
        let n_active = self.prs.n_active();
        let l_prs = self.prs.l_prs;
        let n_cols = n_occasions * l_prs;

        // two-way response of every path through this beam: (w^H a)(a^H w)
        let responses: Vec<f64> = channel
            .paths
            .iter()
            .map(|p| steering_correlation(self.geometry, beam_dir, &p.direction).norm_sqr())
            .collect();

        // static paths collapse into one tone profile
        let mut static_sum = vec![Complex64::new(0.0, 0.0); n_active];
        for &r in &tables.static_paths {
            let coef = channel.paths[r].gain * responses[r];
            if coef.norm_sqr() == 0.0 {
                continue;
            }
            let row = tables.phasors.row(r);
            let row = row.as_slice().expect("phasor rows are contiguous");
            for (acc, ph) in static_sum.iter_mut().zip(row) {
                *acc += coef * ph;
            }
        }

        let noise = (self.cfg.noise_std > 0.0)
            .then(|| Normal::new(0.0, self.cfg.noise_std / std::f64::consts::SQRT_2).unwrap());
        let mut data: Vec<Complex64> = Vec::with_capacity(n_cols * n_active);
        for occ in 0..n_occasions {
            let g = first_occasion + occ;
            let grid = self.grid(g);
            for l in 0..l_prs {
                let t = self.symbol_time_s(g, l);
                let s_row = grid.active_row(l);
                let dyn_coefs: Vec<(usize, Complex64)> = tables
                    .dynamic
                    .iter()
                    .map(|&r| (r, channel.paths[r].gain_at(t) * responses[r]))
                    .collect();
                match (dyn_coefs.as_slice(), &noise) {
                    ([], None) => {
                        for m in 0..n_active {
                            data.push(static_sum[m] * s_row[m]);
                        }
                    }
                    ([(r, coef)], None) => {
                        let ph = tables.phasors.row(*r);
                        let ph = ph.as_slice().unwrap();
                        for m in 0..n_active {
                            data.push((static_sum[m] + coef * ph[m]) * s_row[m]);
                        }
                    }
                    ([(r, coef)], Some(nd)) => {
                        let ph = tables.phasors.row(*r);
                        let ph = ph.as_slice().unwrap();
                        for m in 0..n_active {
                            let v = (static_sum[m] + coef * ph[m]) * s_row[m];
                            data.push(v + Complex64::new(nd.sample(rng), nd.sample(rng)));
                        }
                    }
                    (coefs, _) => {
                        for m in 0..n_active {
                            let mut h = static_sum[m];
                            for &(r, coef) in coefs {
                                h += coef * tables.phasors[(r, m)];
                            }
                            let mut v = h * s_row[m];
                            if let Some(nd) = &noise {
                                v += Complex64::new(nd.sample(rng), nd.sample(rng));
                            }
                            data.push(v);
                        }
                    }
                }
            }
        }
        // assembled column-by-column; expose as (tone, column)
        Array2::from_shape_vec((n_cols, n_active), data)
            .expect("dimensions match the fill")
            .reversed_axes()
    }

    /// Matched-filtered, clutter-suppressed channel estimate of one beam
    /// dwell written into flat scratch (column-major); single allocation-free
    /// pass per beam, numerically identical to the staged pipeline
    /// simulate -> matched_filter -> clutter_suppress.
    #[allow(clippy::too_many_arguments)]
    fn fill_suppressed_estimate(
        &self,
        channel: &ChannelRealization,
        tables: &ChannelTables,
        beam_dir: &Direction,
        first_occasion: usize,
        n_occasions: usize,
        h_buf: &mut Vec<Complex64>,
        mean_buf: &mut Vec<Complex64>,
        rng: &mut impl Rng,
    ) {
        let n_active = self.prs.n_active();
        let l_prs = self.prs.l_prs;
        let n_cols = n_occasions * l_prs;
        let responses: Vec<f64> = channel
            .paths
            .iter()
            .map(|p| steering_correlation(self.geometry, beam_dir, &p.direction).norm_sqr())
            .collect();
        let mut static_sum = vec![Complex64::new(0.0, 0.0); n_active];
        for &r in &tables.static_paths {
            let coef = channel.paths[r].gain * responses[r];
            if coef.norm_sqr() == 0.0 {
                continue;
            }
            let row = tables.phasors.row(r);
            let row = row.as_slice().expect("phasor rows are contiguous");
            for (acc, ph) in static_sum.iter_mut().zip(row) {
                *acc += coef * ph;
            }
        }
        let noise = (self.cfg.noise_std > 0.0)
            .then(|| Normal::new(0.0, self.cfg.noise_std / std::f64::consts::SQRT_2).unwrap());
        let inv_beta_sq = 1.0 / self.grid(first_occasion).active_row(0)[0].norm_sqr();

        h_buf.clear();
        h_buf.reserve(n_cols * n_active);
        for occ in 0..n_occasions {
            let g = first_occasion + occ;
            let grid = self.grid(g);
            for l in 0..l_prs {
                let t = self.symbol_time_s(g, l);
                let s_row = grid.active_row(l);
                let dyn_coefs: Vec<(usize, Complex64)> = tables
                    .dynamic
                    .iter()
                    .map(|&r| (r, channel.paths[r].gain_at(t) * responses[r]))
                    .collect();
                match dyn_coefs.as_slice() {
                    [(r, coef)] => {
                        let ph = tables.phasors.row(*r);
                        let ph = ph.as_slice().unwrap();
                        for m in 0..n_active {
                            let mut y = (static_sum[m] + coef * ph[m]) * s_row[m];
                            if let Some(nd) = &noise {
                                y += Complex64::new(nd.sample(rng), nd.sample(rng));
                            }
                            h_buf.push(s_row[m].conj() * y * inv_beta_sq);
                        }
                    }
                    coefs => {
                        for m in 0..n_active {
                            let mut chan = static_sum[m];
                            for &(r, coef) in coefs {
                                chan += coef * tables.phasors[(r, m)];
                            }
                            let mut y = chan * s_row[m];
                            if let Some(nd) = &noise {
                                y += Complex64::new(nd.sample(rng), nd.sample(rng));
                            }
                            h_buf.push(s_row[m].conj() * y * inv_beta_sq);
                        }
                    }
                }
            }
        }

        // subtract the slow-time mean per tone
        mean_buf.clear();
        mean_buf.resize(n_active, Complex64::new(0.0, 0.0));
        for col in 0..n_cols {
            let chunk = &h_buf[col * n_active..(col + 1) * n_active];
            for (acc, v) in mean_buf.iter_mut().zip(chunk) {
                *acc += v;
            }
        }
        let inv_cols = 1.0 / n_cols as f64;
        mean_buf.iter_mut().for_each(|v| *v *= inv_cols);
        for col in 0..n_cols {
            let chunk = &mut h_buf[col * n_active..(col + 1) * n_active];
            for (v, mean) in chunk.iter_mut().zip(mean_buf.iter()) {
                *v -= mean;
            }
        }
    }

    /// Collapse each occasion's symbols into one coherently averaged column.
    fn collapse_occasions(&self, h: &Array2<Complex64>) -> Array2<Complex64> {
        let l_prs = self.prs.l_prs;
        let n_occ = h.ncols() / l_prs;
        let (n_tones, _) = h.dim();
        let inv = 1.0 / l_prs as f64;
        let mut out = Array2::zeros((n_tones, n_occ));
        for occ in 0..n_occ {
            for m in 0..n_tones {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..l_prs {
                    acc += h[(m, occ * l_prs + l)];
                }
                out[(m, occ)] = acc * inv;
            }
        }
        out
    }

    /// Suppressed channel estimate of one beam dwell, optionally collapsed.
    fn estimate_suppressed(
        &self,
        y: &Array2<Complex64>,
        s: &Array2<Complex64>,
        collapse: bool,
    ) -> Result<Array2<Complex64>> {
        let h = matched_filter(y, s)?;
        let suppressed = clutter_suppress(&h)?;
        Ok(if collapse {
            self.collapse_occasions(&suppressed)
        } else {
            suppressed
        })
    }

    /// Sweep every codebook beam, dwell `sweep_occasions_per_beam` occasions
    /// on each, clutter-suppress the matched-filtered observations, and pick
    /// the beam with the largest statistic. Ties break toward the lowest
    /// beam index.
    pub fn beam_sweep(
        &self,
        channel: &ChannelRealization,
        rng: &mut impl Rng,
    ) -> Result<SweepOutcome> {
        if self.codebook.is_empty() {
            return Err(SimError::invalid_argument("empty codebook"));
        }
        if self.cfg.sweep_occasions_per_beam == 0 {
            return Err(SimError::invalid_argument(
                "sweep needs at least one occasion per beam",
            ));
        }
        let n_active = self.prs.n_active();
        let l_prs = self.prs.l_prs;
        let tables = ChannelTables::new(channel, n_active, self.tone_spacing_hz());
        let occ_per_beam = self.cfg.sweep_occasions_per_beam;
        let collapse = self.cfg.occasion_coherent && occ_per_beam > 1;
        let n_r = self.cfg.range_pad_factor.max(1) * n_active;
        let fft = matches!(self.cfg.sweep_statistic, SweepStatistic::RangePeak)
            .then(|| FftPlanner::new().plan_fft_inverse(n_r));

        let mut h_buf: Vec<Complex64> = Vec::new();
        let mut mean_buf: Vec<Complex64> = Vec::new();
        let mut occ_buf = vec![Complex64::new(0.0, 0.0); n_active];
        let mut fft_buf = vec![Complex64::new(0.0, 0.0); n_r];
        let mut profile = vec![0.0f64; n_r];

        let mut power_map = Vec::with_capacity(self.codebook.len());
        let mut best_index = 0usize;
        let mut best_power = f64::NEG_INFINITY;
        for (b, beam) in self.codebook.beams.iter().enumerate() {
            let first = b * occ_per_beam;
            self.fill_suppressed_estimate(
                channel,
                &tables,
                &beam.direction,
                first,
                occ_per_beam,
                &mut h_buf,
                &mut mean_buf,
                rng,
            );
            let n_cols = occ_per_beam * l_prs;
            let stat = match self.cfg.sweep_statistic {
                SweepStatistic::SuppressedPower => {
                    if collapse {
                        let inv = 1.0 / l_prs as f64;
                        let mut acc = 0.0;
                        for occ in 0..occ_per_beam {
                            occ_buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                            for l in 0..l_prs {
                                let col = occ * l_prs + l;
                                let chunk = &h_buf[col * n_active..(col + 1) * n_active];
                                for (acc_v, v) in occ_buf.iter_mut().zip(chunk) {
                                    *acc_v += v;
                                }
                            }
                            acc += occ_buf.iter().map(|v| (v * inv).norm_sqr()).sum::<f64>();
                        }
                        acc
                    } else {
                        h_buf.iter().map(|v| v.norm_sqr()).sum()
                    }
                }
                SweepStatistic::RangePeak => {
                    let fft = fft.as_ref().unwrap();
                    profile.iter_mut().for_each(|v| *v = 0.0);
                    let scale = 1.0 / n_r as f64;
                    let profile_cols = if collapse { occ_per_beam } else { n_cols };
                    for pc in 0..profile_cols {
                        fft_buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                        if collapse {
                            let inv = 1.0 / l_prs as f64;
                            for l in 0..l_prs {
                                let col = pc * l_prs + l;
                                let chunk = &h_buf[col * n_active..(col + 1) * n_active];
                                for (acc_v, v) in fft_buf[..n_active].iter_mut().zip(chunk) {
                                    *acc_v += v * inv;
                                }
                            }
                        } else {
                            fft_buf[..n_active]
                                .copy_from_slice(&h_buf[pc * n_active..(pc + 1) * n_active]);
                        }
                        fft.process(&mut fft_buf);
                        for (p, v) in profile.iter_mut().zip(fft_buf.iter()) {
                            *p += (v * scale).norm();
                        }
                    }
                    profile.iter().cloned().fold(0.0, f64::max) / profile_cols as f64
                }
            };
            power_map.push(stat);
            if stat > best_power {
                best_power = stat;
                best_index = b;
            }
        }
        Ok(SweepOutcome {
            best_index,
            direction: self.codebook.beams[best_index].direction,
            power_map,
            occasions_used: self.codebook.len() * occ_per_beam,
        })
    }

    /// Gather the beam observations of a full detection dwell on one beam.
    pub fn dwell_observation(
        &self,
        channel: &ChannelRealization,
        beam_index: usize,
        first_occasion: usize,
        rng: &mut impl Rng,
    ) -> Result<BeamObservation> {
        if beam_index >= self.codebook.len() {
            return Err(SimError::invalid_argument("beam index out of range"));
        }
        let tables = ChannelTables::new(channel, self.prs.n_active(), self.tone_spacing_hz());
        let samples = self.simulate_dwell(
            channel,
            &tables,
            &self.codebook.beams[beam_index].direction,
            first_occasion,
            self.prs.n_prs,
            rng,
        );
        Ok(BeamObservation {
            beam_index,
            samples,
        })
    }

    /// Full pipeline for one drop: sweep, dwell `n_prs` occasions on the
    /// winning beam, matched-filter, suppress, range-process, decide, and
    /// reconstruct the position when detection is declared.
    pub fn process_drop(
        &self,
        channel: &ChannelRealization,
        rng: &mut impl Rng,
    ) -> Result<DetectionResult> {
        let sweep = self.beam_sweep(channel, rng)?;
        let first = sweep.occasions_used;
        let obs = self.dwell_observation(channel, sweep.best_index, first, rng)?;
        let s = self.prs_matrix(first, self.prs.n_prs);
        let suppressed = self.estimate_suppressed(&obs.samples, &s, self.cfg.occasion_coherent)?;
        let n_r = self.cfg.range_pad_factor.max(1) * self.prs.n_active();
        let profile = range_profile(&suppressed, n_r, self.tone_spacing_hz())?;
        let decision = par_detect(&profile, self.cfg.eta_db)?;
        let position_m = decision
            .range_m
            .map(|r| position_estimate(r, &sweep.direction, self.bs_position_m));
        Ok(DetectionResult {
            detected: decision.detected,
            par_db: decision.par_db,
            peak_bin: decision.peak_bin,
            range_m: decision.range_m,
            direction: sweep.direction,
            position_m,
        })
    }
}
