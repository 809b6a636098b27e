//! Bistatic SAR acquisition geometry.
//!
//! The transmitter is an external illuminator moving on a straight line over
//! the aperture; the receiver rides the UAV flight path. Ground resolution is
//! predicted with the gradient method: the range resolution follows from the
//! horizontal gradient of the bistatic range, the azimuth resolution from the
//! horizontal gradient of the Doppler frequency, and the resolution cell is
//! the parallelogram spanned by the two iso-line spacings.

mod datasize;
mod resolution;

use thiserror::Error;

use crate::flightpath::{FlightPath, PathTimeline};
use crate::geom::{Vec2, Vec3};

pub use datasize::{azimuth_samples, bistatic_range_spread, echo_data_size, range_samples, EchoDataSize};
pub use resolution::{
    bistatic_range, doppler_frequency, doppler_gradient_ground, range_gradient_ground, resolution_cell,
    scene_resolution_evaluator, ResolutionSample, SceneResolution,
};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Below this `|∇R|` the geometry is treated as forward scattering.
pub const MIN_RANGE_GRADIENT: f64 = 1e-6;
/// Below this `sin ψ` the range and Doppler iso-lines are treated as parallel.
pub const MIN_SIN_CROSSING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SarError {
    #[error("target {target} coincides with a platform position")]
    CoincidentTarget { target: Vec3 },
    #[error("forward-scatter degeneracy at {target}: |grad R| = {magnitude:.3e}")]
    ForwardScatter { target: Vec3, magnitude: f64 },
    #[error("no Doppler variation at {target}: azimuth resolution undefined")]
    NoDopplerGradient { target: Vec3 },
    #[error("range and Doppler gradients are parallel at {target} (sin psi = {sin_psi:.3e})")]
    ParallelGradients { target: Vec3, sin_psi: f64 },
    #[error("aperture time {aperture} s exceeds path traversal time {traversal:.3} s")]
    ApertureTooLong { aperture: f64, traversal: f64 },
    #[error("invalid radar parameters: {0}")]
    InvalidRadar(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("platform speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
}

/// Position and velocity of a platform at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlatformState {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl PlatformState {
    pub fn new(position: Vec3, velocity: Vec3) -> Self {
        PlatformState { position, velocity }
    }

    pub fn stationary(position: Vec3) -> Self {
        PlatformState { position, velocity: Vec3::ZERO }
    }
}

/// Illuminator state modeled as linear motion about a reference epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminatorTrajectory {
    pub ref_position: Vec3,
    pub ref_velocity: Vec3,
    pub ref_time: f64,
}

impl IlluminatorTrajectory {
    pub fn stationary(position: Vec3) -> Self {
        IlluminatorTrajectory { ref_position: position, ref_velocity: Vec3::ZERO, ref_time: 0.0 }
    }

    pub fn state_at(&self, t: f64) -> PlatformState {
        PlatformState {
            position: self.ref_position + self.ref_velocity * (t - self.ref_time),
            velocity: self.ref_velocity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarParams {
    /// m
    pub wavelength: f64,
    /// Hz
    pub bandwidth: f64,
    /// Hz
    pub prf: f64,
    /// Range sampling rate, Hz.
    pub sample_rate: f64,
    /// Synthetic aperture time, s.
    pub aperture_time: f64,
    /// Storage per echo sample; 128 = one complex pair of 64-bit floats.
    pub bits_per_sample: u32,
}

impl RadarParams {
    pub fn validate(&self) -> Result<(), SarError> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("bandwidth", self.bandwidth),
            ("prf", self.prf),
            ("sample_rate", self.sample_rate),
            ("aperture_time", self.aperture_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SarError::InvalidRadar(format!("{name} must be positive, got {v}")));
            }
        }
        if self.bits_per_sample == 0 {
            return Err(SarError::InvalidRadar("bits_per_sample must be positive".into()));
        }
        if self.sample_rate < self.bandwidth {
            return Err(SarError::InvalidRadar("sample_rate must be at least the bandwidth".into()));
        }
        Ok(())
    }
}

/// Rectangular imaging scene sampled on an even grid.
///
/// The azimuth axis points along `heading` (radians counter-clockwise from
/// +x); the range axis is the azimuth axis rotated by +90 degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub center: Vec3,
    pub range_extent: f64,
    pub azimuth_extent: f64,
    pub n_range: usize,
    pub n_azimuth: usize,
    pub heading: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SarError> {
        if !(self.range_extent > 0.0 && self.azimuth_extent > 0.0) {
            return Err(SarError::InvalidScene("range and azimuth extents must be positive".into()));
        }
        if self.n_range == 0 || self.n_azimuth == 0 {
            return Err(SarError::InvalidScene("scene needs at least one sample".into()));
        }
        if !self.center.is_finite() || !self.heading.is_finite() {
            return Err(SarError::InvalidScene("scene center and heading must be finite".into()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.n_range * self.n_azimuth
    }

    pub fn azimuth_axis(&self) -> Vec2 {
        Vec2::new(self.heading.cos(), self.heading.sin())
    }

    pub fn range_axis(&self) -> Vec2 {
        self.azimuth_axis().perp()
    }

    /// Point at normalized offsets `(r, a)` in `[-0.5, 0.5]` from the center.
    pub fn point(&self, r: f64, a: f64) -> Vec3 {
        let off = self.range_axis() * (r * self.range_extent) + self.azimuth_axis() * (a * self.azimuth_extent);
        Vec3::new(self.center.x + off.x, self.center.y + off.y, self.center.z)
    }

    /// Even `n_range x n_azimuth` grid spanning the scene edge to edge,
    /// range-major. A single sample along an axis sits on the center line.
    pub fn sample_points(&self) -> Vec<Vec3> {
        grid_points(self, self.n_range, self.n_azimuth)
    }

    pub fn corners(&self) -> [Vec3; 4] {
        [self.point(-0.5, -0.5), self.point(-0.5, 0.5), self.point(0.5, -0.5), self.point(0.5, 0.5)]
    }

    /// The scene scaled about its center by `factor` in both extents.
    pub fn scaled(&self, factor: f64) -> SceneSpec {
        SceneSpec { range_extent: self.range_extent * factor, azimuth_extent: self.azimuth_extent * factor, ..*self }
    }
}

pub(crate) fn grid_points(scene: &SceneSpec, n_range: usize, n_azimuth: usize) -> Vec<Vec3> {
    let frac = |k: usize, n: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 - 0.5 };
    let mut out = Vec::with_capacity(n_range * n_azimuth);
    for i in 0..n_range {
        for j in 0..n_azimuth {
            out.push(scene.point(frac(i, n_range), frac(j, n_azimuth)));
        }
    }
    out
}

/// Echo collection interval along the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureWindow {
    /// Last waypoint at or before the window start.
    pub start_index: usize,
    pub center_time: f64,
    pub duration: f64,
}

impl ApertureWindow {
    pub fn start_time(&self) -> f64 {
        self.center_time - 0.5 * self.duration
    }

    pub fn end_time(&self) -> f64 {
        self.center_time + 0.5 * self.duration
    }

    /// Window of `duration` centered at `center_time`, shifted as needed to
    /// stay inside the traversal.
    pub fn centered(timeline: &PathTimeline, center_time: f64, duration: f64) -> Result<Self, SarError> {
        let total = timeline.total_duration();
        if !(duration > 0.0) || duration > total {
            return Err(SarError::ApertureTooLong { aperture: duration, traversal: total });
        }
        let center_time = center_time.clamp(0.5 * duration, total - 0.5 * duration);
        let start_index = timeline.waypoint_before(center_time - 0.5 * duration);
        Ok(ApertureWindow { start_index, center_time, duration })
    }

    /// Window centered on the waypoint closest to `target`.
    pub fn nearest_to(path: &FlightPath, target: Vec3, duration: f64) -> Result<Self, SarError> {
        let timeline = path.timeline();
        let k = path.nearest_waypoint(target);
        Self::centered(&timeline, timeline.waypoint_time(k), duration)
    }
}

/// Transmitter trajectory and receiver path over a common time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BistaticGeometry {
    pub illuminator: IlluminatorTrajectory,
    pub receiver: PathTimeline,
}

impl BistaticGeometry {
    pub fn new(illuminator: IlluminatorTrajectory, path: &FlightPath) -> Self {
        BistaticGeometry { illuminator, receiver: path.timeline() }
    }

    pub fn tx_state(&self, t: f64) -> PlatformState {
        self.illuminator.state_at(t)
    }

    pub fn rx_state(&self, t: f64) -> PlatformState {
        PlatformState { position: self.receiver.position_at(t), velocity: self.receiver.velocity_at(t) }
    }

    pub fn tx_position(&self, t: f64) -> Vec3 {
        self.illuminator.state_at(t).position
    }

    pub fn rx_position(&self, t: f64) -> Vec3 {
        self.receiver.position_at(t)
    }

    /// Mean receiver speed over the window.
    pub fn mean_rx_speed(&self, window: &ApertureWindow) -> f64 {
        const N: usize = 64;
        let t0 = window.start_time();
        let dt = window.duration / N as f64;
        let mut dist = 0.0;
        let mut prev = self.rx_position(t0);
        for k in 1..=N {
            let p = self.rx_position(t0 + k as f64 * dt);
            dist += p.distance(prev);
            prev = p;
        }
        dist / window.duration
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scene() -> SceneSpec {
        SceneSpec {
            center: Vec3::new(100.0, 200.0, 5.0),
            range_extent: 40.0,
            azimuth_extent: 20.0,
            n_range: 5,
            n_azimuth: 3,
            heading: 0.0,
        }
    }

    #[test]
    fn sample_grid_spans_scene() {
        let pts = scene().sample_points();
        assert_eq!(pts.len(), 15);
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        assert_relative_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), 90.0);
        assert_relative_eq!(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 220.0);
        assert!(pts.iter().all(|p| p.z == 5.0));
        let single = SceneSpec { n_range: 1, n_azimuth: 1, ..scene() };
        assert_eq!(single.sample_points(), vec![Vec3::new(100.0, 200.0, 5.0)]);
    }

    #[test]
    fn rotated_scene_axes() {
        let s = SceneSpec { heading: std::f64::consts::FRAC_PI_2, ..scene() };
        let p = s.point(0.5, 0.0);
        assert_relative_eq!(p.x, 80.0, epsilon = 1e-9);
        assert_relative_eq!(p.y, 200.0, epsilon = 1e-9);
    }

    #[test]
    fn window_is_clamped_inside_traversal() {
        let path = FlightPath::line(Vec3::ZERO, Vec3::new(300.0, 0.0, 0.0), 31, 30.0).unwrap();
        let tl = path.timeline();
        let w = ApertureWindow::centered(&tl, 0.0, 2.0).unwrap();
        assert_relative_eq!(w.start_time(), 0.0);
        assert_eq!(w.start_index, 0);
        let w = ApertureWindow::nearest_to(&path, Vec3::new(150.0, 500.0, 0.0), 2.5).unwrap();
        assert_relative_eq!(w.center_time, 5.0, epsilon = 1e-9);
        assert_eq!(w.start_index, 11);
        assert!(matches!(ApertureWindow::centered(&tl, 5.0, 11.0), Err(SarError::ApertureTooLong { .. })));
    }

    #[test]
    fn radar_validation() {
        let ok = RadarParams {
            wavelength: 0.24,
            bandwidth: 1e8,
            prf: 200.0,
            sample_rate: 1.2e8,
            aperture_time: 2.0,
            bits_per_sample: 128,
        };
        assert!(ok.validate().is_ok());
        assert!(RadarParams { sample_rate: 5e7, ..ok }.validate().is_err());
        assert!(RadarParams { prf: 0.0, ..ok }.validate().is_err());
    }

    #[test]
    fn mean_speed_on_constant_path() {
        let path = FlightPath::line(Vec3::ZERO, Vec3::new(3000.0, 0.0, 0.0), 101, 30.0).unwrap();
        let g = BistaticGeometry::new(IlluminatorTrajectory::stationary(Vec3::new(0.0, -1e5, 1e4)), &path);
        let w = ApertureWindow::centered(&g.receiver, 50.0, 2.0).unwrap();
        assert_relative_eq!(g.mean_rx_speed(&w), 30.0, max_relative = 1e-9);
    }
}
