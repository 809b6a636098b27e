use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{pulse_times, ComplexImage, EchoError, EchoMatrix, FastTimeGate, ImageGrid, PointTarget};
use crate::sargeom::{bistatic_range, ApertureWindow, BistaticGeometry, RadarParams, SPEED_OF_LIGHT};

/// Normalized sinc, `sin(πx)/(πx)`.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

pub fn simulate_echo(
    targets: &[PointTarget],
    geometry: &BistaticGeometry,
    window: &ApertureWindow,
    radar: &RadarParams,
    gate: &FastTimeGate,
) -> Result<EchoMatrix, EchoError> {
    radar.validate()?;
    if targets.is_empty() {
        return Err(EchoError::NoTargets);
    }
    let slow_time = pulse_times(window, radar.prf);
    let n = gate.samples;
    let rows = slow_time
        .par_iter()
        .enumerate()
        .map(|(pulse, &t)| {
            let tx = geometry.tx_position(t);
            let rx = geometry.rx_position(t);
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for target in targets {
                let r = bistatic_range(tx, rx, target.position);
                let k = gate.index_of(r / SPEED_OF_LIGHT);
                if !(k >= 0.0 && k <= (n - 1) as f64) {
                    return Err(EchoError::TargetOutsideGate { target: target.position, pulse });
                }
                let phase = Complex64::from_polar(target.amplitude, -2.0 * PI * r / radar.wavelength);
                for (m, z) in row.iter_mut().enumerate() {
                    *z += phase * sinc(radar.bandwidth * (gate.delay(m) - r / SPEED_OF_LIGHT));
                }
            }
            Ok(row)
        })
        .collect::<Vec<_>>();
    let mut data = Vec::with_capacity(slow_time.len() * n);
    for row in rows {
        data.extend(row?);
    }
    Ok(EchoMatrix { data, slow_time, gate: *gate })
}

const TAPS: i64 = 8;

/// Hann-tapered sinc interpolation of `row` at fractional index `k`, with the
/// weights normalized to unit sum. `None` when any tap falls outside the row.
fn interpolate(row: &[Complex64], k: f64) -> Option<Complex64> {
    let base = k.floor() as i64;
    let first = base - TAPS / 2 + 1;
    let last = base + TAPS / 2;
    if first < 0 || last >= row.len() as i64 {
        return None;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wsum = 0.0;
    for m in first..=last {
        let d = k - m as f64;
        let w = sinc(d) * 0.5 * (1.0 + (PI * d / (TAPS / 2) as f64).cos());
        acc += row[m as usize] * w;
        wsum += w;
    }
    Some(acc / wsum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backprojection {
    pub image: ComplexImage,
    /// Pixel-pulse pairs whose delay fell outside the gate and contributed zero.
    pub out_of_gate: usize,
}

/// Time-domain backprojection of `echo` onto `grid`.
pub fn backproject(
    echo: &EchoMatrix,
    grid: &ImageGrid,
    geometry: &BistaticGeometry,
    radar: &RadarParams,
) -> Result<Backprojection, EchoError> {
    grid.validate()?;
    let states: Vec<_> = echo.slow_time.iter().map(|&t| (geometry.tx_position(t), geometry.rx_position(t))).collect();
    let gate = echo.gate;
    let pixels = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.position(idx % grid.n_x, idx / grid.n_x);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut missed = 0usize;
            for (pulse, &(tx, rx)) in states.iter().enumerate() {
                let r = bistatic_range(tx, rx, p);
                match interpolate(echo.row(pulse), gate.index_of(r / SPEED_OF_LIGHT)) {
                    Some(z) => acc += z * Complex64::from_polar(1.0, 2.0 * PI * r / radar.wavelength),
                    None => missed += 1,
                }
            }
            (acc, missed)
        })
        .collect::<Vec<_>>();
    let out_of_gate = pixels.iter().map(|p| p.1).sum();
    let data = pixels.into_iter().map(|p| p.0).collect();
    Ok(Backprojection { image: ComplexImage { grid: *grid, data }, out_of_gate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightpath::FlightPath;
    use crate::geom::Vec3;
    use crate::sargeom::IlluminatorTrajectory;
    use approx::assert_relative_eq;

    fn desk() -> (BistaticGeometry, ApertureWindow, RadarParams) {
        let path =
            FlightPath::line(Vec3::new(1000.0, 1000.0, 200.0), Vec3::new(3000.0, 1000.0, 200.0), 201, 30.0).unwrap();
        let g = BistaticGeometry::new(IlluminatorTrajectory::stationary(Vec3::new(2000.0, -20000.0, 3000.0)), &path);
        let w = ApertureWindow::centered(&g.receiver, 100.0 / 3.0, 1.0).unwrap();
        let radar = RadarParams {
            wavelength: 0.24,
            bandwidth: 100e6,
            prf: 500.0,
            sample_rate: 250e6,
            aperture_time: 1.0,
            bits_per_sample: 128,
        };
        (g, w, radar)
    }

    fn gate_for(g: &BistaticGeometry, w: &ApertureWindow, radar: &RadarParams, pts: &[Vec3]) -> FastTimeGate {
        FastTimeGate::covering_points(g, w, pts, radar, FastTimeGate::GUARD)
    }

    #[test]
    fn interpolation_reproduces_samples() {
        let row: Vec<Complex64> = (0..20).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        for k in 4..15 {
            let z = interpolate(&row, k as f64).unwrap();
            assert!((z - row[k]).norm() < 1e-12);
        }
        assert!(interpolate(&row, 2.5).is_none());
        assert!(interpolate(&row, 16.5).is_none());
    }

    #[test]
    fn unit_target_peak_and_phase() {
        let (g, w, radar) = desk();
        let target = Vec3::new(2000.0, 1350.0, 0.0);
        let gate = gate_for(&g, &w, &radar, &[target]);
        let echo = simulate_echo(&[PointTarget::unit(target)], &g, &w, &radar, &gate).unwrap();
        for pulse in [0, echo.n_pulses() / 2, echo.n_pulses() - 1] {
            let t = echo.slow_time[pulse];
            let r = bistatic_range(g.tx_position(t), g.rx_position(t), target);
            let row = echo.row(pulse);
            let (kmax, zmax) = row.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
            // Straddle loss of a sinc sampled at 2.5 samples per mainlobe width.
            assert!(zmax.norm() <= 1.0 && 20.0 * zmax.norm().log10() > -3.92);
            assert!((gate.delay(kmax) - r / SPEED_OF_LIGHT).abs() <= 0.5 * gate.step + 1e-15);
            // Interpolated to the exact delay, the peak modulus is one.
            let z = interpolate(row, gate.index_of(r / SPEED_OF_LIGHT)).unwrap();
            assert_relative_eq!(z.norm(), 1.0, max_relative = 0.02);
            let expected = (-2.0 * PI * r / radar.wavelength).rem_euclid(2.0 * PI);
            let wrapped = (zmax.arg() - expected).rem_euclid(2.0 * PI);
            assert!(wrapped.min(2.0 * PI - wrapped) < 1e-6);
        }
    }

    #[test]
    fn echo_superposition_is_exact() {
        let (g, w, radar) = desk();
        let a = PointTarget { position: Vec3::new(1950.0, 1300.0, 0.0), amplitude: 0.7 };
        let b = PointTarget { position: Vec3::new(2060.0, 1420.0, 0.0), amplitude: 1.3 };
        let gate = gate_for(&g, &w, &radar, &[a.position, b.position]);
        let ea = simulate_echo(&[a], &g, &w, &radar, &gate).unwrap();
        let eb = simulate_echo(&[b], &g, &w, &radar, &gate).unwrap();
        let eab = simulate_echo(&[a, b], &g, &w, &radar, &gate).unwrap();
        for ((x, y), z) in ea.data.iter().zip(&eb.data).zip(&eab.data) {
            assert!((x + y - z).norm() <= 1e-14);
        }
    }

    #[test]
    fn target_outside_gate_errors() {
        let (g, w, radar) = desk();
        let gate = gate_for(&g, &w, &radar, &[Vec3::new(2000.0, 1350.0, 0.0)]);
        let far = PointTarget::unit(Vec3::new(2000.0, 3000.0, 0.0));
        assert!(matches!(
            simulate_echo(&[far], &g, &w, &radar, &gate),
            Err(EchoError::TargetOutsideGate { pulse: 0, .. })
        ));
    }

    #[test]
    fn zero_echo_gives_zero_image() {
        let (g, w, radar) = desk();
        let target = Vec3::new(2000.0, 1350.0, 0.0);
        let gate = gate_for(&g, &w, &radar, &[target]);
        let mut echo = simulate_echo(&[PointTarget::unit(target)], &g, &w, &radar, &gate).unwrap();
        echo.data.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let img = backproject(&echo, &ImageGrid::centered(target, 0.5, 11), &g, &radar).unwrap().image;
        assert!(img.data.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn focused_peak_at_target_with_coherent_gain() {
        let (g, w, radar) = desk();
        let target = Vec3::new(2010.3, 1340.7, 0.0);
        let gate = gate_for(&g, &w, &radar, &[target]);
        let echo = simulate_echo(&[PointTarget::unit(target)], &g, &w, &radar, &gate).unwrap();
        let grid = ImageGrid::centered(Vec3::new(2010.0, 1341.0, 0.0), 0.25, 41);
        let bp = backproject(&echo, &grid, &g, &radar).unwrap();
        assert_eq!(bp.out_of_gate, 0);
        let (idx, _) = bp.image.data.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
        let peak = grid.position(idx % grid.n_x, idx / grid.n_x);
        assert!((peak.x - target.x).abs() <= grid.spacing && (peak.y - target.y).abs() <= grid.spacing);
        // At the exact target position every pulse adds in phase.
        let n = echo.n_pulses() as f64;
        let at = backproject(&echo, &ImageGrid::centered(target, 0.25, 3), &g, &radar).unwrap().image.at(1, 1);
        assert_relative_eq!(at.norm(), n, max_relative = 0.02);
        assert!(at.arg().abs() < 0.05);
    }

    #[test]
    fn pixels_outside_gate_are_counted() {
        let (g, w, radar) = desk();
        let target = Vec3::new(2000.0, 1350.0, 0.0);
        let gate = FastTimeGate::covering_points(&g, &w, &[target], &radar, 4);
        let echo = simulate_echo(&[PointTarget::unit(target)], &g, &w, &radar, &gate).unwrap();
        let far = ImageGrid::centered(Vec3::new(2000.0, 1500.0, 0.0), 1.0, 3);
        let bp = backproject(&echo, &far, &g, &radar).unwrap();
        assert_eq!(bp.out_of_gate, 9 * echo.n_pulses());
        assert!(bp.image.data.iter().all(|z| z.norm() == 0.0));
    }
}
