//! Terrain-proximity threat of a flight path.
//!
//! The path is resampled at a fixed arc-length step. At each sample the
//! smallest clearance over the sample itself and a ring of eight lateral
//! probes is compared with the safe clearance `d_safe`:
//!
//! ```text
//! contribution = max(0, (d_safe − c_min) / d_safe)²   (1 when c_min ≤ 0)
//! f_threat     = mean(contribution)
//! ```
//!
//! so a path that never comes within `d_safe` of the terrain scores exactly
//! zero and a path on the surface scores one.

use std::f64::consts::FRAC_PI_4;

use thiserror::Error;

use crate::flightpath::FlightPath;
use crate::geom::{GeomError, TerrainModel, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThreatError {
    #[error("path sample {index} at {position} leaves the terrain footprint")]
    OutsideFootprint { index: usize, position: Vec3 },
    #[error("invalid threat parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreatParams {
    pub safe_clearance: f64,
    pub sample_step: f64,
    /// Radius of the horizontal probe ring.
    pub lateral_probe: f64,
}

impl ThreatParams {
    pub fn validate(&self) -> Result<(), ThreatError> {
        for (name, v) in [
            ("safe_clearance", self.safe_clearance),
            ("sample_step", self.sample_step),
            ("lateral_probe", self.lateral_probe),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ThreatError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreatSample {
    /// Arc length from the path start.
    pub distance: f64,
    pub position: Vec3,
    pub min_clearance: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreatAssessment {
    pub value: f64,
    pub collision: bool,
    pub samples: Vec<ThreatSample>,
}

impl ThreatAssessment {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("distance_m,x_m,y_m,z_m,min_clearance_m,contribution\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.3},{:.3},{:.3},{:.3},{:.3},{:.6}\n",
                s.distance, s.position.x, s.position.y, s.position.z, s.min_clearance, s.contribution
            ));
        }
        out
    }
}

/// Points at every `step` meters of arc length, plus the final waypoint.
pub fn resample(path: &FlightPath, step: f64) -> Vec<(f64, Vec3)> {
    let pts = path.points();
    let mut out = vec![(0.0, pts[0])];
    let mut seg_start = 0.0;
    let mut next = step;
    for w in pts.windows(2) {
        let len = w[0].distance(w[1]);
        while next < seg_start + len {
            out.push((next, w[0].lerp(w[1], (next - seg_start) / len)));
            next += step;
        }
        seg_start += len;
    }
    let last = path.end();
    if out.last().is_some_and(|&(d, _)| seg_start - d > 1e-9 * seg_start.max(1.0)) {
        out.push((seg_start, last));
    }
    out
}

pub fn path_threat(
    path: &FlightPath,
    terrain: &TerrainModel,
    tp: &ThreatParams,
) -> Result<ThreatAssessment, ThreatError> {
    tp.validate()?;
    let probes: Vec<Vec3> = (0..8)
        .map(|k| {
            let ang = k as f64 * FRAC_PI_4;
            Vec3::new(ang.cos(), ang.sin(), 0.0) * tp.lateral_probe
        })
        .collect();
    let mut collision = false;
    let mut samples = Vec::new();
    for (index, (distance, position)) in resample(path, tp.sample_step).into_iter().enumerate() {
        let outside = |_: GeomError| ThreatError::OutsideFootprint { index, position };
        let mut c_min = terrain.clearance(position).map_err(outside)?;
        for &off in &probes {
            let q = position + off;
            // Probes past the footprint edge are ignored; the sample itself must be inside.
            if terrain.contains(q.x, q.y) {
                c_min = c_min.min(terrain.clearance(q).map_err(outside)?);
            }
        }
        let contribution = if c_min <= 0.0 {
            collision = true;
            1.0
        } else {
            let deficit = ((tp.safe_clearance - c_min) / tp.safe_clearance).max(0.0);
            deficit * deficit
        };
        samples.push(ThreatSample { distance, position, min_clearance: c_min, contribution });
    }
    let value = samples.iter().map(|s| s.contribution).sum::<f64>() / samples.len() as f64;
    Ok(ThreatAssessment { value, collision, samples })
}
