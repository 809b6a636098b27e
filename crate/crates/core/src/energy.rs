//! Flight energy consumption of a fixed-wing platform.
//!
//! The path energy is the segment sum of three terms:
//!
//! ```text
//! E = Σ_i [ P_drag(i)·T(i) + m·g·(h_{i+1} − h_i) + ½·m·(|v_{i+1}|² − |v_i|²) ]
//! ```
//!
//! with the drag power
//!
//! ```text
//! P_drag = c₁|v|³ + (c₂/|v|)·( v_a²/|v|² + (|a|² − (aᵀv/|v|)²)/g² )
//! ```
//!
//! The second term inside the bracket is the squared normal (turning)
//! acceleration in units of g; along-track acceleration does not load the
//! wing.

use thiserror::Error;

use crate::flightpath::FlightPath;
use crate::geom::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("speed {speed:.3} m/s is below the minimum flight speed {v_min} m/s")]
    BelowMinSpeed { speed: f64, v_min: f64 },
    #[error("waypoint {index} speed {speed:.3} m/s outside [{v_min}, {v_max}] m/s")]
    SpeedOutOfBounds { index: usize, speed: f64, v_min: f64, v_max: f64 },
    #[error("invalid platform parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformParams {
    /// kg
    pub mass: f64,
    /// m/s²
    pub gravity: f64,
    /// Parasitic drag coefficient, kg/m.
    pub drag_c1: f64,
    /// Induced drag coefficient, kg·m³/s³.
    pub drag_c2: f64,
    /// Aerodynamic reference speed, m/s.
    pub v_a: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Acceleration above which a segment is flagged.
    pub a_max: f64,
    /// Floor each segment's energy at its drag term (no recovery when
    /// descending or decelerating).
    pub clamp_regeneration: bool,
}

impl PlatformParams {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let named = [
            ("mass", self.mass),
            ("gravity", self.gravity),
            ("drag_c1", self.drag_c1),
            ("drag_c2", self.drag_c2),
            ("v_a", self.v_a),
            ("v_min", self.v_min),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(EnergyError::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if self.v_min >= self.v_max {
            return Err(EnergyError::InvalidParams("v_min must be below v_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub drag: f64,
    pub potential: f64,
    pub kinetic: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn watt_hours(&self) -> f64 {
        self.total / 3600.0
    }
}

/// Segment flagged for exceeding the platform's acceleration limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelerationWarning {
    pub segment: usize,
    pub acceleration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnergy {
    pub breakdown: EnergyBreakdown,
    pub warnings: Vec<AccelerationWarning>,
}

/// Power in watts needed to overcome drag at velocity `v` and acceleration `a`.
pub fn drag_power(v: Vec3, a: Vec3, p: &PlatformParams) -> Result<f64, EnergyError> {
    let speed = v.norm();
    if !(speed >= p.v_min) {
        return Err(EnergyError::BelowMinSpeed { speed, v_min: p.v_min });
    }
    let along = a.dot(v) / speed;
    // Clamp rounding noise when `a` is (nearly) parallel to `v`.
    let normal_sq = (a.norm_squared() - along * along).max(0.0);
    let g2 = p.gravity * p.gravity;
    Ok(p.drag_c1 * speed.powi(3) + (p.drag_c2 / speed) * (p.v_a * p.v_a / (speed * speed) + normal_sq / g2))
}

/// Total flight energy of `path` in joules.
pub fn path_energy(path: &FlightPath, p: &PlatformParams) -> Result<PathEnergy, EnergyError> {
    for (index, &speed) in path.speeds().iter().enumerate() {
        if speed < p.v_min || speed > p.v_max {
            return Err(EnergyError::SpeedOutOfBounds { index, speed, v_min: p.v_min, v_max: p.v_max });
        }
    }
    let speeds = path.speeds();
    let mut out = EnergyBreakdown::default();
    let mut warnings = Vec::new();
    for (i, seg) in path.segment_kinematics().iter().enumerate() {
        let drag = drag_power(seg.v, seg.a, p)? * seg.duration;
        let mut potential = p.mass * p.gravity * seg.climb;
        let mut kinetic = 0.5 * p.mass * (speeds[i + 1] * speeds[i + 1] - speeds[i] * speeds[i]);
        if p.clamp_regeneration && potential + kinetic < 0.0 {
            potential = 0.0;
            kinetic = 0.0;
        }
        out.drag += drag;
        out.potential += potential;
        out.kinetic += kinetic;
        let accel = seg.a.norm();
        if accel > p.a_max {
            warnings.push(AccelerationWarning { segment: i, acceleration: accel });
        }
    }
    out.total = out.drag + out.potential + out.kinetic;
    Ok(PathEnergy { breakdown: out, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightpath::ArcPlane;
    use approx::assert_relative_eq;

    fn params() -> PlatformParams {
        PlatformParams {
            mass: 10.0,
            gravity: 9.81,
            drag_c1: 9.26e-4,
            drag_c2: 2250.0,
            v_a: 30.0,
            v_min: 10.0,
            v_max: 50.0,
            a_max: 5.0,
            clamp_regeneration: false,
        }
    }

    #[test]
    fn drag_power_hand_value() {
        // 9.26e-4 * 30^3 + (2250 / 30) * (30^2 / 30^2) = 25.002 + 75
        let pw = drag_power(Vec3::new(30.0, 0.0, 0.0), Vec3::ZERO, &params()).unwrap();
        assert_relative_eq!(pw, 100.002, max_relative = 1e-14);
    }

    #[test]
    fn parallel_acceleration_does_not_load() {
        let v = Vec3::new(20.0, 15.0, 3.0);
        let a = v * 0.07;
        let p = params();
        assert_relative_eq!(
            drag_power(v, a, &p).unwrap(),
            drag_power(v, Vec3::ZERO, &p).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn one_g_turn_adds_c2_over_speed() {
        let p = params();
        let v = Vec3::new(30.0, 0.0, 0.0);
        let a = Vec3::new(0.0, p.gravity, 0.0);
        let base = drag_power(v, Vec3::ZERO, &p).unwrap();
        assert_relative_eq!(drag_power(v, a, &p).unwrap(), base + p.drag_c2 / 30.0, max_relative = 1e-14);
    }

    #[test]
    fn drag_power_rejects_slow_flight() {
        assert!(matches!(
            drag_power(Vec3::new(5.0, 0.0, 0.0), Vec3::ZERO, &params()),
            Err(EnergyError::BelowMinSpeed { .. })
        ));
        assert!(drag_power(Vec3::ZERO, Vec3::ZERO, &params()).is_err());
    }

    #[test]
    fn level_straight_path_energy() {
        let start = Vec3::new(3000.0, 3500.0, 1500.0);
        let end = Vec3::new(15000.0, 15600.0, 1500.0);
        let path = FlightPath::line(start, end, 2, 30.0).unwrap();
        let e = path_energy(&path, &params()).unwrap().breakdown;
        let length = start.distance(end);
        assert_eq!(e.potential, 0.0);
        assert_eq!(e.kinetic, 0.0);
        assert_relative_eq!(e.drag, 100.002 * length / 30.0, max_relative = 1e-12);
        assert_relative_eq!(e.drag, 56_806.0, epsilon = 1.0);
    }

    #[test]
    fn climb_term_telescopes() {
        let p = params();
        let pts = vec![
            Vec3::new(0.0, 0.0, 1000.0),
            Vec3::new(500.0, 0.0, 1300.0),
            Vec3::new(1000.0, 0.0, 900.0),
            Vec3::new(1500.0, 0.0, 1100.0),
        ];
        let path = FlightPath::with_constant_speed(pts, 30.0).unwrap();
        let e = path_energy(&path, &p).unwrap().breakdown;
        assert_relative_eq!(e.potential, 9810.0, max_relative = 1e-12);
    }

    #[test]
    fn reverse_path_negates_endpoint_terms() {
        let p = params();
        let pts = vec![Vec3::new(0.0, 0.0, 1000.0), Vec3::new(400.0, 100.0, 1100.0), Vec3::new(900.0, 50.0, 1250.0)];
        let path = FlightPath::new(pts, vec![20.0, 28.0, 35.0]).unwrap();
        let fwd = path_energy(&path, &p).unwrap().breakdown;
        let back = path_energy(&path.reversed(), &p).unwrap().breakdown;
        assert_relative_eq!(fwd.drag, back.drag, max_relative = 1e-12);
        assert_relative_eq!(fwd.potential, -back.potential, max_relative = 1e-12);
        assert_relative_eq!(fwd.kinetic, -back.kinetic, max_relative = 1e-12);
    }

    #[test]
    fn clamped_descent_costs_at_least_drag() {
        let mut p = params();
        let down = FlightPath::line(Vec3::new(0.0, 0.0, 2000.0), Vec3::new(3000.0, 0.0, 1500.0), 11, 30.0).unwrap();
        let free = path_energy(&down, &p).unwrap().breakdown;
        assert!(free.potential < 0.0);
        p.clamp_regeneration = true;
        let clamped = path_energy(&down, &p).unwrap().breakdown;
        assert_eq!(clamped.total, clamped.drag);
        assert_eq!(clamped.drag, free.drag);
    }

    #[test]
    fn speed_bounds_enforced() {
        let path = FlightPath::line(Vec3::ZERO, Vec3::new(1000.0, 0.0, 0.0), 3, 60.0).unwrap();
        assert!(matches!(path_energy(&path, &params()), Err(EnergyError::SpeedOutOfBounds { .. })));
    }

    #[test]
    fn tight_turn_flagged() {
        // 30 m/s on a 100 m radius: 9 m/s² centripetal
        let path = FlightPath::arc(
            Vec3::new(-100.0, 0.0, 500.0),
            Vec3::new(100.0, 0.0, 500.0),
            100.0,
            ArcPlane::Horizontal,
            41,
            30.0,
        )
        .unwrap();
        let out = path_energy(&path, &params()).unwrap();
        assert_eq!(out.warnings.len(), 40);
    }

    #[test]
    fn vertical_arc_costs_more_than_line() {
        let start = Vec3::new(3000.0, 3500.0, 1500.0);
        let end = Vec3::new(15000.0, 15600.0, 1500.0);
        let line = FlightPath::line(start, end, 401, 30.0).unwrap();
        let arc = FlightPath::arc(start, end, 440.0, ArcPlane::Vertical, 401, 30.0).unwrap();
        let p = params();
        let el = path_energy(&line, &p).unwrap().breakdown.total;
        let ea = path_energy(&arc, &p).unwrap().breakdown.total;
        assert!(ea > el);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = params();
        p.v_min = 60.0;
        assert!(p.validate().is_err());
        p = params();
        p.mass = 0.0;
        assert!(p.validate().is_err());
        assert!(params().validate().is_ok());
    }
}
