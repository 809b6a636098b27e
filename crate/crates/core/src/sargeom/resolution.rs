use rayon::prelude::*;

use super::{
    ApertureWindow, BistaticGeometry, PlatformState, RadarParams, SarError, SceneSpec, MIN_RANGE_GRADIENT,
    MIN_SIN_CROSSING, SPEED_OF_LIGHT,
};
use crate::geom::{Vec2, Vec3};

/// Transmitter-to-target plus target-to-receiver distance.
pub fn bistatic_range(tx: Vec3, rx: Vec3, target: Vec3) -> f64 {
    tx.distance(target) + rx.distance(target)
}

fn unit_from(platform: Vec3, target: Vec3) -> Result<Vec3, SarError> {
    (target - platform).unit().ok_or(SarError::CoincidentTarget { target })
}

/// Horizontal gradient of the bistatic range with respect to the target's
/// ground position. Its magnitude never exceeds 2.
pub fn range_gradient_ground(tx: Vec3, rx: Vec3, target: Vec3) -> Result<Vec2, SarError> {
    let g = unit_from(tx, target)? + unit_from(rx, target)?;
    Ok(g.horizontal())
}

/// Bistatic Doppler frequency `-(1/λ)·dR/dt` of a stationary target.
pub fn doppler_frequency(tx: &PlatformState, rx: &PlatformState, target: Vec3, wavelength: f64) -> f64 {
    let rate = |s: &PlatformState| {
        let d = s.position - target;
        s.velocity.dot(d) / d.norm()
    };
    -(rate(tx) + rate(rx)) / wavelength
}

/// Horizontal gradient of [`doppler_frequency`] with respect to the target's
/// ground position, Hz/m.
///
/// Each platform contributes its velocity component normal to the line of
/// sight divided by the range: `(v − (v·û)û) / (λ·r)`.
pub fn doppler_gradient_ground(
    tx: &PlatformState,
    rx: &PlatformState,
    target: Vec3,
    wavelength: f64,
) -> Result<Vec2, SarError> {
    let term = |s: &PlatformState| -> Result<Vec3, SarError> {
        let d = s.position - target;
        let r = d.norm();
        let u = d.unit().ok_or(SarError::CoincidentTarget { target })?;
        Ok((s.velocity - u * s.velocity.dot(u)) / r)
    };
    let g = (term(tx)? + term(rx)?) / wavelength;
    Ok(g.horizontal())
}

/// Predicted ground resolution at one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionSample {
    pub target: Vec3,
    /// Spacing of iso-range lines one range cell apart, m.
    pub rho_r: f64,
    /// Spacing of iso-Doppler lines one Doppler cell apart, m.
    pub rho_a: f64,
    /// Crossing angle of the two gradients folded into `(0, π/2]`.
    pub psi: f64,
    /// Parallelogram cell area `rho_r·rho_a / sin ψ`, m².
    pub s_c: f64,
    pub range_gradient: Vec2,
    pub doppler_gradient: Vec2,
}

impl ResolutionSample {
    /// Unit direction of steepest bistatic-range increase on the ground.
    pub fn range_direction(&self) -> Vec2 {
        self.range_gradient.unit().unwrap_or_default()
    }

    pub fn doppler_direction(&self) -> Vec2 {
        self.doppler_gradient.unit().unwrap_or_default()
    }
}

pub fn resolution_cell(
    tx: &PlatformState,
    rx: &PlatformState,
    target: Vec3,
    radar: &RadarParams,
) -> Result<ResolutionSample, SarError> {
    let grad_r = range_gradient_ground(tx.position, rx.position, target)?;
    let grad_d = doppler_gradient_ground(tx, rx, target, radar.wavelength)?;
    let mag_r = grad_r.norm();
    let mag_d = grad_d.norm();
    if mag_r < MIN_RANGE_GRADIENT {
        return Err(SarError::ForwardScatter { target, magnitude: mag_r });
    }
    if !(mag_d > 0.0) {
        return Err(SarError::NoDopplerGradient { target });
    }
    let sin_psi = grad_r.perp_dot(grad_d).abs() / (mag_r * mag_d);
    if sin_psi < MIN_SIN_CROSSING {
        return Err(SarError::ParallelGradients { target, sin_psi });
    }
    let psi = grad_r.perp_dot(grad_d).abs().atan2(grad_r.dot(grad_d).abs());
    let rho_r = SPEED_OF_LIGHT / (radar.bandwidth * mag_r);
    let rho_a = 1.0 / (radar.aperture_time * mag_d);
    Ok(ResolutionSample {
        target,
        rho_r,
        rho_a,
        psi,
        s_c: rho_r * rho_a / sin_psi,
        range_gradient: grad_r,
        doppler_gradient: grad_d,
    })
}

/// Resolution over the whole scene sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneResolution {
    /// `(S_c^max / S_c^min) · mean(S_c)`, m².
    pub evaluator: f64,
    /// `S_c^max / S_c^min`.
    pub disequilibrium: f64,
    pub mean_area: f64,
    pub samples: Vec<ResolutionSample>,
}

impl SceneResolution {
    pub fn min_sample(&self) -> &ResolutionSample {
        self.samples.iter().min_by(|a, b| a.s_c.total_cmp(&b.s_c)).expect("non-empty scene")
    }

    pub fn max_sample(&self) -> &ResolutionSample {
        self.samples.iter().max_by(|a, b| a.s_c.total_cmp(&b.s_c)).expect("non-empty scene")
    }

    pub fn samples_csv(&self) -> String {
        let mut out = String::from("x_m,y_m,rho_r_m,rho_a_m,psi_rad,s_c_m2\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.3},{:.3},{:.6},{:.6},{:.6},{:.6}\n",
                s.target.x, s.target.y, s.rho_r, s.rho_a, s.psi, s.s_c
            ));
        }
        out
    }
}

/// Scene resolution evaluator with platform states frozen at the aperture
/// center.
pub fn scene_resolution_evaluator(
    geometry: &BistaticGeometry,
    window: &ApertureWindow,
    scene: &SceneSpec,
    radar: &RadarParams,
) -> Result<SceneResolution, SarError> {
    scene.validate()?;
    let tx = geometry.tx_state(window.center_time);
    let rx = geometry.rx_state(window.center_time);
    let results: Vec<Result<ResolutionSample, SarError>> =
        scene.sample_points().into_par_iter().map(|p| resolution_cell(&tx, &rx, p, radar)).collect();
    let samples = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, 0.0f64, 0.0);
    for s in &samples {
        lo = lo.min(s.s_c);
        hi = hi.max(s.s_c);
        sum += s.s_c;
    }
    let mean_area = sum / samples.len() as f64;
    let disequilibrium = hi / lo;
    Ok(SceneResolution { evaluator: disequilibrium * mean_area, disequilibrium, mean_area, samples })
}
