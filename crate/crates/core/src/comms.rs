//! UAV-to-ground-station data link.
//!
//! The link is a line-of-sight free-space channel; each path segment in the
//! transmission window carries `T(i)·B·log₂(1 + P·β₀ / (σ²·l(i)²))` bits, with
//! `l(i)` the distance from the segment midpoint to the station.

use thiserror::Error;

use crate::flightpath::FlightPath;
use crate::geom::{TerrainModel, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommsError {
    #[error("link distance must be positive, got {0}")]
    ZeroDistance(f64),
    #[error("segment duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("transmission window [{start}, {end}] invalid for a path of {points} waypoints")]
    InvalidWindow { start: usize, end: usize, points: usize },
    #[error("invalid link parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommParams {
    /// Hz
    pub bandwidth: f64,
    /// W
    pub tx_power: f64,
    /// Channel power gain at the 1 m reference distance.
    pub ref_gain: f64,
    /// W
    pub noise_power: f64,
    pub station: Vec3,
    /// First and last waypoint (0-based, inclusive) of the transmission
    /// window; `None` uses the whole path.
    pub window: Option<(usize, usize)>,
}

impl CommParams {
    pub fn validate(&self) -> Result<(), CommsError> {
        for (name, v) in [
            ("bandwidth", self.bandwidth),
            ("tx_power", self.tx_power),
            ("ref_gain", self.ref_gain),
            ("noise_power", self.noise_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CommsError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Receive SNR at the reference distance, `P·β₀/σ²`.
    pub fn reference_snr(&self) -> f64 {
        self.tx_power * self.ref_gain / self.noise_power
    }

    /// Shannon rate in bits/s at distance `l`.
    pub fn rate(&self, l: f64) -> Result<f64, CommsError> {
        if !(l > 0.0) {
            return Err(CommsError::ZeroDistance(l));
        }
        Ok(self.bandwidth * (self.reference_snr() / (l * l)).ln_1p() / std::f64::consts::LN_2)
    }

    fn segment_range(&self, path: &FlightPath) -> Result<std::ops::Range<usize>, CommsError> {
        let n = path.len();
        let (start, end) = self.window.unwrap_or((0, n - 1));
        if start > end || end >= n {
            return Err(CommsError::InvalidWindow { start, end, points: n });
        }
        Ok(start..end)
    }
}

/// Bits deliverable over one segment of duration `duration` at distance `l`.
pub fn segment_capacity(duration: f64, l: f64, cp: &CommParams) -> Result<f64, CommsError> {
    if !(duration > 0.0) {
        return Err(CommsError::NonPositiveDuration(duration));
    }
    Ok(duration * cp.rate(l)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentLink {
    pub index: usize,
    pub duration: f64,
    pub distance: f64,
    /// bits/s
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudgetReport {
    pub d_com: f64,
    pub per_segment: Vec<SegmentLink>,
    /// Set by [`LinkBudgetReport::assess`].
    pub feasible: Option<bool>,
    pub margin: Option<f64>,
}

impl LinkBudgetReport {
    /// Compares capacity against the echo data volume.
    pub fn assess(&mut self, d_echo: f64) -> bool {
        let margin = self.d_com - d_echo;
        self.margin = Some(margin);
        self.feasible = Some(margin >= 0.0);
        margin >= 0.0
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("segment,duration_s,distance_m,rate_bps\n");
        for s in &self.per_segment {
            out.push_str(&format!("{},{:.6},{:.3},{:.3}\n", s.index, s.duration, s.distance, s.rate));
        }
        out
    }
}

/// Neumaier-compensated sum; order-independent to well below rounding of
/// the naive sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn path_capacity(path: &FlightPath, cp: &CommParams) -> Result<LinkBudgetReport, CommsError> {
    cp.validate()?;
    let range = cp.segment_range(path)?;
    if range.is_empty() {
        let (start, end) = cp.window.unwrap_or((0, 0));
        return Err(CommsError::InvalidWindow { start, end, points: path.len() });
    }
    let kin = path.segment_kinematics();
    let pts = path.points();
    let per_segment = range
        .map(|i| {
            let distance = pts[i].lerp(pts[i + 1], 0.5).distance(cp.station);
            Ok(SegmentLink { index: i, duration: kin[i].duration, distance, rate: cp.rate(distance)? })
        })
        .collect::<Result<Vec<_>, CommsError>>()?;
    let d_com = compensated_sum(per_segment.iter().map(|s| s.duration * s.rate));
    Ok(LinkBudgetReport { d_com, per_segment, feasible: None, margin: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosCheck {
    /// Fraction of window segments whose midpoint sees the station.
    pub fraction: f64,
    pub segments: usize,
    /// Set when the window holds no segment and the fraction is vacuous.
    pub empty_window: bool,
}

impl LosCheck {
    pub fn needs_warning(&self) -> bool {
        self.empty_window || self.fraction < 1.0
    }
}

/// Checks the line-of-sight assumption behind the free-space link model.
pub fn check_los_assumption(path: &FlightPath, cp: &CommParams, terrain: &TerrainModel) -> LosCheck {
    let range = match cp.segment_range(path) {
        Ok(r) if !r.is_empty() => r,
        _ => return LosCheck { fraction: 1.0, segments: 0, empty_window: true },
    };
    let pts = path.points();
    let step = terrain.spacing();
    let segments = range.len();
    let visible = range
        .filter(|&i| {
            let mid = pts[i].lerp(pts[i + 1], 0.5);
            terrain.line_of_sight(mid, cp.station, step).unwrap_or(false)
        })
        .count();
    LosCheck { fraction: visible as f64 / segments as f64, segments, empty_window: false }
}
