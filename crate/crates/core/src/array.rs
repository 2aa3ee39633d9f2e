//! Uniform planar array: steering vectors, analog beamforming codebook,
//! and the scalar two-way beamformed gain.
//!
//! Axis convention (used consistently by the position reconstruction):
//! the array lies in the y-z plane with boresight along +x; columns step
//! along y and sweep azimuth, rows step along z and sweep elevation.
//! A direction (theta, phi) has unit vector
//! (cos(theta) cos(phi), sin(theta) cos(phi), sin(phi)), so element (r, c)
//! of a steering vector carries phase
//! 2 pi d (c sin(theta) cos(phi) + r sin(phi)) with d in wavelengths.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, SimError};

/// Uniform planar array geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayGeometry {
    /// Element rows (vertical, along z).
    pub n_rows: usize,
    /// Element columns (horizontal, along y).
    pub n_cols: usize,
    /// Inter-element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        ArrayGeometry {
            n_rows: 32,
            n_cols: 32,
            spacing_wavelengths: 0.5,
        }
    }
}

impl ArrayGeometry {
    /// Total element count N.
    pub fn n(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(SimError::invalid_config("array", "n_rows and n_cols must be >= 1"));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(SimError::invalid_config(
                "array.spacing_wavelengths",
                "must be > 0",
            ));
        }
        Ok(())
    }
}

/// Propagation direction as azimuth/elevation in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

impl Direction {
    pub fn new(azimuth_rad: f64, elevation_rad: f64) -> Self {
        Direction {
            azimuth_rad,
            elevation_rad,
        }
    }

    pub fn from_degrees(az_deg: f64, el_deg: f64) -> Self {
        Direction::new(az_deg.to_radians(), el_deg.to_radians())
    }

    /// Unit pointing vector (x boresight, y azimuth axis, z up).
    pub fn unit_vector(&self) -> [f64; 3] {
        let (sa, ca) = self.azimuth_rad.sin_cos();
        let (se, ce) = self.elevation_rad.sin_cos();
        [ca * ce, sa * ce, se]
    }

    /// Direction cosine along the column (azimuth) axis.
    pub fn u(&self) -> f64 {
        self.azimuth_rad.sin() * self.elevation_rad.cos()
    }

    /// Direction cosine along the row (elevation) axis.
    pub fn v(&self) -> f64 {
        self.elevation_rad.sin()
    }
}

/// One analog beam: unit-norm weights annotated with the grid direction.
#[derive(Debug, Clone)]
pub struct Beam {
    pub direction: Direction,
    pub weights: Vec<Complex64>,
}

/// Ordered beam list used for sweeping; elevation-major, stable order.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub beams: Vec<Beam>,
    pub n_az: usize,
    pub n_el: usize,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    /// Angular step between adjacent azimuth grid points, radians.
    pub fn az_step_rad(&self) -> f64 {
        grid_step(&self.beams, self.n_az, |d| d.azimuth_rad)
    }

    /// Angular step between adjacent elevation grid points, radians.
    pub fn el_step_rad(&self) -> f64 {
        if self.n_el < 2 {
            return 0.0;
        }
        let a = self.beams[0].direction.elevation_rad;
        let b = self.beams[self.n_az].direction.elevation_rad;
        (b - a).abs()
    }
}

fn grid_step(beams: &[Beam], n_az: usize, f: impl Fn(&Direction) -> f64) -> f64 {
    if n_az < 2 {
        return 0.0;
    }
    (f(&beams[1].direction) - f(&beams[0].direction)).abs()
}

/// Steering vector of length N with unit Euclidean norm; element (r, c)
/// is exp(j 2 pi d (c u + r v)) / sqrt(N), row-major over (r, c).
pub fn steering_vector(geometry: &ArrayGeometry, dir: &Direction) -> Vec<Complex64> {
    let n = geometry.n();
    let scale = 1.0 / (n as f64).sqrt();
    let u = dir.u();
    let v = dir.v();
    let d = geometry.spacing_wavelengths;
    let mut out = Vec::with_capacity(n);
    for r in 0..geometry.n_rows {
        for c in 0..geometry.n_cols {
            let phase = 2.0 * PI * d * (c as f64 * u + r as f64 * v);
            out.push(Complex64::from_polar(scale, phase));
        }
    }
    out
}

/// sum_{k=0}^{n-1} exp(j 2 pi k x), closed form with the x-at-integer limit.
fn geometric_sum(n: usize, x: f64) -> Complex64 {
    let s = (PI * x).sin();
    if s.abs() < 1e-12 {
        // all terms are (numerically) 1
        return Complex64::new(n as f64, 0.0);
    }
    let magnitude = (PI * n as f64 * x).sin() / s;
    let phase = PI * (n as f64 - 1.0) * x;
    Complex64::from_polar(magnitude, phase)
}

/// Inner product w(dir_w)^H a(dir_a) of two steering vectors, evaluated in
/// closed form via the separable row/column geometric sums. Equals the
/// explicit dot product to machine precision and costs O(1).
pub fn steering_correlation(
    geometry: &ArrayGeometry,
    dir_w: &Direction,
    dir_a: &Direction,
) -> Complex64 {
    let d = geometry.spacing_wavelengths;
    let du = dir_a.u() - dir_w.u();
    let dv = dir_a.v() - dir_w.v();
    let cols = geometric_sum(geometry.n_cols, d * du);
    let rows = geometric_sum(geometry.n_rows, d * dv);
    cols * rows / geometry.n() as f64
}

/// Uniform angular grid codebook of steering-vector beams over the spans.
/// A degenerate axis (n = 1) points at the span center.
pub fn dft_codebook(
    geometry: &ArrayGeometry,
    n_az: usize,
    n_el: usize,
    az_span_rad: (f64, f64),
    el_span_rad: (f64, f64),
) -> Result<Codebook> {
    geometry.validate()?;
    if n_az == 0 || n_el == 0 {
        return Err(SimError::invalid_argument("codebook needs n_az, n_el >= 1"));
    }
    if n_az > 1 && !(az_span_rad.1 > az_span_rad.0) {
        return Err(SimError::invalid_argument(
            "empty azimuth span with more than one beam",
        ));
    }
    if n_el > 1 && !(el_span_rad.1 > el_span_rad.0) {
        return Err(SimError::invalid_argument(
            "empty elevation span with more than one beam",
        ));
    }
    let grid = |span: (f64, f64), n: usize, i: usize| -> f64 {
        if n == 1 {
            0.5 * (span.0 + span.1)
        } else {
            span.0 + (span.1 - span.0) * i as f64 / (n - 1) as f64
        }
    };
    let mut beams = Vec::with_capacity(n_az * n_el);
    for i_el in 0..n_el {
        let el = grid(el_span_rad, n_el, i_el);
        for i_az in 0..n_az {
            let az = grid(az_span_rad, n_az, i_az);
            let direction = Direction::new(az, el);
            beams.push(Beam {
                direction,
                weights: steering_vector(geometry, &direction),
            });
        }
    }
    Ok(Codebook { beams, n_az, n_el })
}

/// Scalar beamformed gain (w^H a_rx)(a_tx^H f): collapses the rank-one
/// per-path channel into the observation without materializing N x N.
pub fn beamformed_gain(
    w: &[Complex64],
    a_rx: &[Complex64],
    a_tx: &[Complex64],
    f: &[Complex64],
) -> Result<Complex64> {
    let n = w.len();
    if a_rx.len() != n || a_tx.len() != n || f.len() != n {
        return Err(SimError::invalid_argument(format!(
            "beamformed_gain length mismatch: w={}, a_rx={}, a_tx={}, f={}",
            n,
            a_rx.len(),
            a_tx.len(),
            f.len()
        )));
    }
    let rx: Complex64 = w.iter().zip(a_rx).map(|(wi, ai)| wi.conj() * ai).sum();
    let tx: Complex64 = a_tx.iter().zip(f).map(|(ai, fi)| ai.conj() * fi).sum();
    Ok(rx * tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn broadside_steering_is_uniform() {
        let geom = ArrayGeometry {
            n_rows: 4,
            n_cols: 4,
            spacing_wavelengths: 0.5,
        };
        let v = steering_vector(&geom, &Direction::new(0.0, 0.0));
        for e in &v {
            assert_abs_diff_eq!(e.re, 0.25, epsilon = 1e-15);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn endfire_2x2_phases() {
        // theta = 90 deg, phi = 0: column phase strides by pi, rows constant.
        let geom = ArrayGeometry {
            n_rows: 2,
            n_cols: 2,
            spacing_wavelengths: 0.5,
        };
        let v = steering_vector(&geom, &Direction::from_degrees(90.0, 0.0));
        let phases: Vec<f64> = v.iter().map(|e| e.arg()).collect();
        assert_abs_diff_eq!(phases[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phases[1].abs(), std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(phases[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phases[3].abs(), std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn steering_vectors_are_unit_norm() {
        let geom = ArrayGeometry::default();
        for (az, el) in [(0.3, 0.1), (-1.0, 0.7), (2.0, -0.4)] {
            let v = steering_vector(&geom, &Direction::new(az, el));
            let norm: f64 = v.iter().map(|e| e.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            // element magnitude 1/sqrt(N)
            assert_abs_diff_eq!(v[17].norm(), 1.0 / (geom.n() as f64).sqrt(), epsilon = 1e-13);
        }
    }

    #[test]
    fn steering_inner_products_on_dft_grid() {
        // Same direction -> 1; directions one DFT bin apart in u -> 0.
        let geom = ArrayGeometry {
            n_rows: 1,
            n_cols: 8,
            spacing_wavelengths: 0.5,
        };
        let d0 = Direction::new(0.0, 0.0);
        let a0 = steering_vector(&geom, &d0);
        assert_abs_diff_eq!(dot_h(&a0, &a0).re, 1.0, epsilon = 1e-12);
        // u1 - u0 = 1/(n d) = 0.25 -> orthogonal DFT direction
        let theta1 = (0.25f64).asin();
        let a1 = steering_vector(&geom, &Direction::new(theta1, 0.0));
        assert_abs_diff_eq!(dot_h(&a0, &a1).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_matches_explicit_dot_product() {
        let geom = ArrayGeometry {
            n_rows: 5,
            n_cols: 7,
            spacing_wavelengths: 0.5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let dw = Direction::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0));
            let da = Direction::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0));
            let explicit = dot_h(&steering_vector(&geom, &dw), &steering_vector(&geom, &da));
            let closed = steering_correlation(&geom, &dw, &da);
            assert_abs_diff_eq!(explicit.re, closed.re, epsilon = 1e-10);
            assert_abs_diff_eq!(explicit.im, closed.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn codebook_counts_norms_steps() {
        let geom = ArrayGeometry::default();
        let cb = dft_codebook(
            &geom,
            16,
            8,
            (-1.0, 1.0),
            (-0.2, 1.2),
        )
        .unwrap();
        assert_eq!(cb.len(), 128);
        for beam in &cb.beams {
            let norm: f64 = beam.weights.iter().map(|e| e.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(cb.az_step_rad(), 2.0 / 15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cb.el_step_rad(), 1.4 / 7.0, epsilon = 1e-12);
        // elevation-major ordering
        assert_eq!(cb.beams[0].direction.elevation_rad, cb.beams[15].direction.elevation_rad);
        assert!(cb.beams[16].direction.elevation_rad > cb.beams[0].direction.elevation_rad);
    }

    #[test]
    fn degenerate_codebook_is_broadside() {
        let geom = ArrayGeometry {
            n_rows: 2,
            n_cols: 2,
            spacing_wavelengths: 0.5,
        };
        let cb = dft_codebook(&geom, 1, 1, (-0.5, 0.5), (-0.5, 0.5)).unwrap();
        assert_eq!(cb.len(), 1);
        for e in &cb.beams[0].weights {
            assert_abs_diff_eq!(e.re, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn codebook_rejects_empty_span() {
        let geom = ArrayGeometry::default();
        assert!(dft_codebook(&geom, 4, 1, (0.5, 0.5), (-0.1, 0.1)).is_err());
    }

    #[test]
    fn beamformed_gain_aligned_and_orthogonal() {
        let geom = ArrayGeometry {
            n_rows: 4,
            n_cols: 4,
            spacing_wavelengths: 0.5,
        };
        let a = steering_vector(&geom, &Direction::new(0.4, 0.2));
        let g = beamformed_gain(&a, &a, &a, &a).unwrap();
        assert_abs_diff_eq!(g.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-12);

        // w orthogonal to a_rx -> zero gain
        let mut w = vec![Complex64::new(0.0, 0.0); 16];
        w[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        w[1] = Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ones: Vec<Complex64> = vec![Complex64::new(0.25, 0.0); 16];
        let g = beamformed_gain(&w, &ones, &ones, &ones).unwrap();
        assert_abs_diff_eq!(g.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn beamformed_gain_matches_matrix_oracle() {
        // (w^H a_rx)(a_tx^H f) == w^H (a_rx a_tx^H) f evaluated explicitly.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 16;
        let randv = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        for _ in 0..50 {
            let w = randv(&mut rng);
            let a_rx = randv(&mut rng);
            let a_tx = randv(&mut rng);
            let f = randv(&mut rng);
            let fast = beamformed_gain(&w, &a_rx, &a_tx, &f).unwrap();
            // explicit outer product
            let mut slow = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    slow += w[i].conj() * (a_rx[i] * a_tx[j].conj()) * f[j];
                }
            }
            assert_abs_diff_eq!(fast.re, slow.re, epsilon = 1e-10);
            assert_abs_diff_eq!(fast.im, slow.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn beamformed_gain_rejects_length_mismatch() {
        let a = vec![Complex64::new(1.0, 0.0); 4];
        let b = vec![Complex64::new(1.0, 0.0); 5];
        assert!(beamformed_gain(&a, &b, &a, &a).is_err());
    }

    #[test]
    fn nearest_codebook_beam_maximizes_response() {
        let geom = ArrayGeometry {
            n_rows: 8,
            n_cols: 8,
            spacing_wavelengths: 0.5,
        };
        let cb = dft_codebook(
            &geom,
            9,
            5,
            (-0.9, 0.9),
            (-0.4, 0.8),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let dir = Direction::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.3..0.7));
            let a = steering_vector(&geom, &dir);
            let best = cb
                .beams
                .iter()
                .enumerate()
                .max_by(|(_, x), (_, y)| {
                    let gx = dot_h(&x.weights, &a).norm();
                    let gy = dot_h(&y.weights, &a).norm();
                    gx.partial_cmp(&gy).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            // brute-force nearest grid direction in (u, v) space
            let nearest = cb
                .beams
                .iter()
                .enumerate()
                .min_by(|(_, x), (_, y)| {
                    let dx = (x.direction.u() - dir.u()).hypot(x.direction.v() - dir.v());
                    let dy = (y.direction.u() - dir.u()).hypot(y.direction.v() - dir.v());
                    dx.partial_cmp(&dy).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let db = &cb.beams[best].direction;
            let dn = &cb.beams[nearest].direction;
            // the winning beam is the nearest grid point or an immediate
            // neighbor of it (mainlobe maximum)
            assert!(
                (db.azimuth_rad - dn.azimuth_rad).abs() <= cb.az_step_rad() + 1e-12
                    && (db.elevation_rad - dn.elevation_rad).abs() <= cb.el_step_rad() + 1e-12,
                "winner {:?} too far from nearest {:?}",
                db,
                dn
            );
        }
    }
}
