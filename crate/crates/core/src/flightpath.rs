//! Discrete flight paths, per-segment kinematics and candidate-path
//! generators.
//!
//! A path is an ordered list of waypoints with a speed at each waypoint.
//! Between waypoints the platform flies the straight chord at the mean of the
//! two endpoint speeds, which is what the segment-wise energy and capacity
//! sums integrate over.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("a flight path needs at least {min} waypoints, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("{points} waypoints but {speeds} speeds")]
    LengthMismatch { points: usize, speeds: usize },
    #[error("speed at waypoint {index} must be positive and finite, got {speed}")]
    NonPositiveSpeed { index: usize, speed: f64 },
    #[error("segment {index} has zero length")]
    ZeroLengthSegment { index: usize },
    #[error("waypoint {index} is not finite")]
    NonFinite { index: usize },
    #[error("arc bulge {bulge} m is invalid for chord {chord} m")]
    InvalidBulge { bulge: f64, chord: f64 },
    #[error("arc plane is undefined for a vertical chord")]
    VerticalChord,
}

/// Plane in which an arc path bends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcPlane {
    /// Sideways in the ground plane. Positive bulge bends to the left of the
    /// direction of travel.
    Horizontal,
    /// In the vertical plane containing the chord. Positive bulge is upward.
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightPath {
    points: Vec<Vec3>,
    speeds: Vec<f64>,
}

/// Motion over one path segment `P_i -> P_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentKinematics {
    /// Mean velocity along the chord.
    pub v: Vec3,
    /// Change in waypoint tangent velocity divided by the segment duration.
    pub a: Vec3,
    pub duration: f64,
    /// Altitude change `z_{i+1} - z_i`.
    pub climb: f64,
    pub length: f64,
}

impl FlightPath {
    pub fn new(points: Vec<Vec3>, speeds: Vec<f64>) -> Result<Self, PathError> {
        if points.len() < 2 {
            return Err(PathError::TooFewPoints { min: 2, got: points.len() });
        }
        if points.len() != speeds.len() {
            return Err(PathError::LengthMismatch { points: points.len(), speeds: speeds.len() });
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(PathError::NonFinite { index });
        }
        if let Some(index) = speeds.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(PathError::NonPositiveSpeed { index, speed: speeds[index] });
        }
        if let Some(index) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(PathError::ZeroLengthSegment { index });
        }
        Ok(FlightPath { points, speeds })
    }

    pub fn with_constant_speed(points: Vec<Vec3>, speed: f64) -> Result<Self, PathError> {
        let speeds = vec![speed; points.len()];
        Self::new(points, speeds)
    }

    /// `n` equally spaced waypoints on the segment `start -> end`.
    pub fn line(start: Vec3, end: Vec3, n: usize, speed: f64) -> Result<Self, PathError> {
        if n < 2 {
            return Err(PathError::TooFewPoints { min: 2, got: n });
        }
        let mut points: Vec<Vec3> = (0..n).map(|k| start.lerp(end, k as f64 / (n - 1) as f64)).collect();
        points[n - 1] = end;
        Self::with_constant_speed(points, speed)
    }

    /// Circular arc through `start` and `end` whose midpoint sits `bulge`
    /// meters off the chord, in the given plane.
    pub fn arc(start: Vec3, end: Vec3, bulge: f64, plane: ArcPlane, n: usize, speed: f64) -> Result<Self, PathError> {
        if n < 3 {
            return Err(PathError::TooFewPoints { min: 3, got: n });
        }
        let chord_vec = end - start;
        let chord = chord_vec.norm();
        if !(bulge.abs() > 0.0 && bulge.abs() < chord) {
            return Err(PathError::InvalidBulge { bulge, chord });
        }
        let u = chord_vec / chord;
        let side = match plane {
            ArcPlane::Horizontal => Vec3::Z.cross(u).unit(),
            ArcPlane::Vertical => (Vec3::Z - u * u.z).unit(),
        }
        .filter(|w| w.norm() > 0.5)
        .ok_or(PathError::VerticalChord)?;
        let w = side * bulge.signum();
        let b = bulge.abs();
        let half = chord / 2.0;
        let radius = (half * half + b * b) / (2.0 * b);
        let mid = start.lerp(end, 0.5);
        let center = mid + w * (b - radius);
        let half_angle = half.atan2(radius - b);
        let mut points: Vec<Vec3> = (0..n)
            .map(|k| {
                let theta = -half_angle + 2.0 * half_angle * k as f64 / (n - 1) as f64;
                center + (u * theta.sin() + w * theta.cos()) * radius
            })
            .collect();
        points[0] = start;
        points[n - 1] = end;
        Self::with_constant_speed(points, speed)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> Vec3 {
        self.points[0]
    }

    pub fn end(&self) -> Vec3 {
        self.points[self.points.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Same waypoints flown in the opposite direction.
    pub fn reversed(&self) -> FlightPath {
        let mut points = self.points.clone();
        let mut speeds = self.speeds.clone();
        points.reverse();
        speeds.reverse();
        FlightPath { points, speeds }
    }

    pub fn translated(&self, offset: Vec3) -> FlightPath {
        FlightPath { points: self.points.iter().map(|&p| p + offset).collect(), speeds: self.speeds.clone() }
    }

    /// Unit tangent at each waypoint: central chord in the interior, a
    /// second-order one-sided difference at the ends.
    pub fn tangents(&self) -> Vec<Vec3> {
        let p = &self.points;
        let n = p.len();
        let chord_dir = |a: Vec3, b: Vec3| (b - a).unit().unwrap_or(Vec3::ZERO);
        (0..n)
            .map(|k| {
                if n == 2 {
                    return chord_dir(p[0], p[1]);
                }
                let t = if k == 0 {
                    p[1] * 4.0 - p[0] * 3.0 - p[2]
                } else if k == n - 1 {
                    p[n - 1] * 3.0 - p[n - 2] * 4.0 + p[n - 3]
                } else {
                    p[k + 1] - p[k - 1]
                };
                // The one-sided stencil can vanish on a hairpin; fall back to the chord.
                t.unit().unwrap_or_else(|| if k == 0 { chord_dir(p[0], p[1]) } else { chord_dir(p[k - 1], p[k]) })
            })
            .collect()
    }

    /// Tangent velocity `speed_k * tangent_k` at each waypoint.
    pub fn waypoint_velocities(&self) -> Vec<Vec3> {
        self.tangents().into_iter().zip(&self.speeds).map(|(t, &s)| t * s).collect()
    }

    pub fn segment_kinematics(&self) -> Vec<SegmentKinematics> {
        let vel = self.waypoint_velocities();
        self.points
            .windows(2)
            .zip(self.speeds.windows(2))
            .enumerate()
            .map(|(i, (p, s))| {
                let delta = p[1] - p[0];
                let length = delta.norm();
                let speed = 0.5 * (s[0] + s[1]);
                let duration = length / speed;
                SegmentKinematics {
                    v: delta * (speed / length),
                    a: (vel[i + 1] - vel[i]) / duration,
                    duration,
                    climb: p[1].z - p[0].z,
                    length,
                }
            })
            .collect()
    }

    /// Arrival time at every waypoint, starting from zero.
    pub fn timeline(&self) -> PathTimeline {
        let mut times = Vec::with_capacity(self.points.len());
        let mut t = 0.0;
        times.push(t);
        for seg in self.segment_kinematics() {
            t += seg.duration;
            times.push(t);
        }
        PathTimeline { times, points: self.points.clone(), velocities: self.waypoint_velocities() }
    }

    /// Index of the waypoint closest to `target`.
    pub fn nearest_waypoint(&self, target: Vec3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let d = p.distance(target);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }
}

/// Time parameterization of a path: position and velocity at any time
/// inside the traversal.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTimeline {
    times: Vec<f64>,
    points: Vec<Vec3>,
    velocities: Vec<Vec3>,
}

impl PathTimeline {
    pub fn total_duration(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn waypoint_time(&self, index: usize) -> f64 {
        self.times[index]
    }

    /// Segment index and fraction for time `t`, clamped to the traversal.
    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        let t = t.clamp(0.0, self.total_duration());
        let i = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        };
        let frac = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        (i, frac)
    }

    /// Index of the last waypoint at or before time `t`.
    pub fn waypoint_before(&self, t: f64) -> usize {
        self.locate(t).0
    }

    /// Position at time `t`, linear along the segment chord.
    pub fn position_at(&self, t: f64) -> Vec3 {
        let (i, f) = self.locate(t);
        self.points[i].lerp(self.points[i + 1], f)
    }

    /// Velocity at time `t`, interpolated between waypoint tangent velocities.
    pub fn velocity_at(&self, t: f64) -> Vec3 {
        let (i, f) = self.locate(t);
        self.velocities[i].lerp(self.velocities[i + 1], f)
    }
}
