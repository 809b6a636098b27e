//! Point-target echo simulation and backprojection imaging.
//!
//! Echoes are synthesized directly in range-compressed form,
//! `A·sinc(B(τ − R_bi/c))·exp(−j2πR_bi/λ)`, and focused with time-domain
//! backprojection. The focused impulse responses are measured to check the
//! gradient-method resolution prediction against an actual image.

mod measure;
mod synth;
mod verify;

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::geom::Vec3;
use crate::sargeom::{
    bistatic_range, ApertureWindow, BistaticGeometry, RadarParams, SarError, SceneSpec, SPEED_OF_LIGHT,
};

pub use measure::{ideal_cell_area_fraction, measure_irw, IrwAxes, IrwMeasurement};
pub use synth::{backproject, simulate_echo, Backprojection};
pub use verify::{grid_for, place_targets, scene_image, verify_resolution, ResolutionCheck, TargetRole, VerifyOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EchoError {
    #[error("target at {target} leaves the fast-time gate at pulse {pulse}")]
    TargetOutsideGate { target: Vec3, pulse: usize },
    #[error("no peak above the noise floor within {radius} m of {near}")]
    NoPeak { near: Vec3, radius: f64 },
    #[error("the -3 dB region reaches the image border; enlarge the image grid")]
    RegionTouchesBorder,
    #[error("invalid image grid: {0}")]
    InvalidGrid(String),
    #[error("no targets to simulate")]
    NoTargets,
    #[error(transparent)]
    Sar(#[from] SarError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTarget {
    pub position: Vec3,
    pub amplitude: f64,
}

impl PointTarget {
    pub fn unit(position: Vec3) -> Self {
        PointTarget { position, amplitude: 1.0 }
    }
}

/// Pulse times of the aperture: `round(T_a·PRF)` pulses (at least one) spaced
/// `1/PRF` apart and centered on the window center.
pub fn pulse_times(window: &ApertureWindow, prf: f64) -> Vec<f64> {
    let n = ((window.duration * prf).round() as usize).max(1);
    let mid = 0.5 * (n as f64 - 1.0);
    (0..n).map(|k| window.center_time + (k as f64 - mid) / prf).collect()
}

/// Fast-time sampling window of the receiver, in bistatic delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastTimeGate {
    /// Delay of sample 0, s.
    pub origin: f64,
    /// `1/S_rate`, s.
    pub step: f64,
    pub samples: usize,
}

impl FastTimeGate {
    /// Default guard band on each side, in samples. Wider than the
    /// interpolation kernel and the first sinc sidelobes.
    pub const GUARD: usize = 32;

    /// Gate spanning the bistatic delays of every scene sample point and
    /// corner over every pulse of the window, plus `guard` samples each side.
    pub fn covering(
        geometry: &BistaticGeometry,
        window: &ApertureWindow,
        scene: &SceneSpec,
        radar: &RadarParams,
        guard: usize,
    ) -> Self {
        let points: Vec<Vec3> = scene.sample_points().into_iter().chain(scene.corners()).collect();
        Self::covering_points(geometry, window, &points, radar, guard)
    }

    pub fn covering_points(
        geometry: &BistaticGeometry,
        window: &ApertureWindow,
        points: &[Vec3],
        radar: &RadarParams,
        guard: usize,
    ) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in pulse_times(window, radar.prf) {
            let tx = geometry.tx_position(t);
            let rx = geometry.rx_position(t);
            for &p in points {
                let r = bistatic_range(tx, rx, p);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let step = 1.0 / radar.sample_rate;
        let origin = lo / SPEED_OF_LIGHT - guard as f64 * step;
        let samples = ((hi - lo) / SPEED_OF_LIGHT / step).ceil() as usize + 2 * guard + 1;
        FastTimeGate { origin, step, samples }
    }

    /// Fractional sample index of delay `tau`.
    pub fn index_of(&self, tau: f64) -> f64 {
        (tau - self.origin) / self.step
    }

    pub fn delay(&self, index: usize) -> f64 {
        self.origin + index as f64 * self.step
    }
}

/// Range-compressed echo samples, one row per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoMatrix {
    pub data: Vec<Complex64>,
    pub slow_time: Vec<f64>,
    pub gate: FastTimeGate,
}

impl EchoMatrix {
    pub fn n_pulses(&self) -> usize {
        self.slow_time.len()
    }

    pub fn n_range(&self) -> usize {
        self.gate.samples
    }

    pub fn row(&self, pulse: usize) -> &[Complex64] {
        let n = self.gate.samples;
        &self.data[pulse * n..(pulse + 1) * n]
    }
}

/// Ground-plane pixel grid. Pixel `(i, j)` sits at
/// `origin + (i·spacing, j·spacing, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    pub origin: Vec3,
    pub spacing: f64,
    pub n_x: usize,
    pub n_y: usize,
}

impl ImageGrid {
    pub fn validate(&self) -> Result<(), EchoError> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(EchoError::InvalidGrid(format!("spacing must be positive, got {}", self.spacing)));
        }
        if self.n_x < 3 || self.n_y < 3 {
            return Err(EchoError::InvalidGrid(format!("need at least 3x3 pixels, got {}x{}", self.n_x, self.n_y)));
        }
        if !self.origin.is_finite() {
            return Err(EchoError::InvalidGrid("origin is not finite".into()));
        }
        Ok(())
    }

    /// Square grid of `n × n` pixels centered on `center`.
    pub fn centered(center: Vec3, spacing: f64, n: usize) -> Self {
        let half = 0.5 * (n as f64 - 1.0) * spacing;
        ImageGrid { origin: center - Vec3::new(half, half, 0.0), spacing, n_x: n, n_y: n }
    }

    /// Grid sized to hold `cells` resolution cells on each side of `center`,
    /// at a spacing of a tenth of the finer resolution, capped at `max_pixels`
    /// per side.
    pub fn around(center: Vec3, rho_r: f64, rho_a: f64, sin_psi: f64, cells: f64, max_pixels: usize) -> Self {
        let half = cells * rho_r.max(rho_a) / sin_psi;
        let mut spacing = rho_r.min(rho_a) / 10.0;
        let mut n = (2.0 * half / spacing).ceil() as usize + 1;
        if n > max_pixels {
            n = max_pixels;
            spacing = 2.0 * half / (n as f64 - 1.0);
        }
        Self::centered(center, spacing, n)
    }

    pub fn position(&self, i: usize, j: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 * self.spacing, j as f64 * self.spacing, 0.0)
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_area(&self) -> f64 {
        self.spacing * self.spacing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    pub grid: ImageGrid,
    /// Row-major, x fastest.
    pub data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn zeros(grid: ImageGrid) -> Self {
        ComplexImage { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: ImageGrid, f: impl Fn(Vec3) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.n_y {
            for i in 0..grid.n_x {
                data.push(f(grid.position(i, j)));
            }
        }
        ComplexImage { grid, data }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.grid.n_x + i]
    }

    pub fn power(&self, i: usize, j: usize) -> f64 {
        self.at(i, j).norm_sqr()
    }

    pub fn scaled(&self, factor: f64) -> ComplexImage {
        ComplexImage { grid: self.grid, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Bilinear interpolation of the modulus at ground position `(x, y)`;
    /// `None` outside the grid.
    ///
    /// The modulus is interpolated rather than the complex value: a focused
    /// image keeps a residual carrier phase whose period along the range
    /// gradient (`λ/|∇R|`) is usually finer than the pixel spacing, while its
    /// envelope is smooth.
    pub fn sample_magnitude(&self, x: f64, y: f64) -> Option<f64> {
        let g = &self.grid;
        let fx = (x - g.origin.x) / g.spacing;
        let fy = (y - g.origin.y) / g.spacing;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (g.n_x - 1) as f64 && fy <= (g.n_y - 1) as f64) {
            return None;
        }
        let i = (fx.floor() as usize).min(g.n_x - 2);
        let j = (fy.floor() as usize).min(g.n_y - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let m = |i, j| self.at(i, j).norm();
        let lower = m(i, j) * (1.0 - tx) + m(i + 1, j) * tx;
        let upper = m(i, j + 1) * (1.0 - tx) + m(i + 1, j + 1) * tx;
        Some(lower * (1.0 - ty) + upper * ty)
    }

    /// Binary dump: `PSIM`, u32 n_x, u32 n_y, f32 spacing (little-endian),
    /// then row-major interleaved f32 `(re, im)` pairs.
    pub fn write_binary(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(b"PSIM")?;
        w.write_all(&(self.grid.n_x as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n_y as u32).to_le_bytes())?;
        w.write_all(&(self.grid.spacing as f32).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&(z.re as f32).to_le_bytes())?;
            w.write_all(&(z.im as f32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(bytes: &[u8], origin: Vec3) -> io::Result<ComplexImage> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        if bytes.len() < 16 || &bytes[..4] != b"PSIM" {
            return Err(bad("missing PSIM header"));
        }
        let word = |k: usize| <[u8; 4]>::try_from(&bytes[k..k + 4]).unwrap();
        let n_x = u32::from_le_bytes(word(4)) as usize;
        let n_y = u32::from_le_bytes(word(8)) as usize;
        let spacing = f32::from_le_bytes(word(12)) as f64;
        if bytes.len() != 16 + 8 * n_x * n_y {
            return Err(bad("payload length does not match the header"));
        }
        let data = (0..n_x * n_y)
            .map(|k| {
                let o = 16 + 8 * k;
                Complex64::new(f32::from_le_bytes(word(o)) as f64, f32::from_le_bytes(word(o + 4)) as f64)
            })
            .collect();
        Ok(ComplexImage { grid: ImageGrid { origin, spacing, n_x, n_y }, data })
    }

    /// `x_m,y_m,power_db` with power relative to the image peak, floored at -120 dB.
    pub fn db_csv(&self) -> String {
        let peak = self.data.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let mut out = String::from("x_m,y_m,power_db\n");
        for j in 0..self.grid.n_y {
            for i in 0..self.grid.n_x {
                let p = self.grid.position(i, j);
                let db = if peak > 0.0 { (10.0 * (self.power(i, j) / peak).log10()).max(-120.0) } else { -120.0 };
                out.push_str(&format!("{:.4},{:.4},{:.3}\n", p.x, p.y, db));
            }
        }
        out
    }

    pub fn save(&self, binary: impl AsRef<Path>, csv: impl AsRef<Path>) -> io::Result<()> {
        let mut buf = Vec::with_capacity(16 + 8 * self.data.len());
        self.write_binary(&mut buf)?;
        std::fs::write(binary, buf)?;
        std::fs::write(csv, self.db_csv())
    }
}
