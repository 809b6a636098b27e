//! Echo matrix sizing after range compression.

use super::{bistatic_range, ApertureWindow, BistaticGeometry, RadarParams, SarError, SceneSpec, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoDataSize {
    pub n_azimuth: u64,
    pub n_range: u64,
    /// `bits_per_sample · N_a · N_r`
    pub bits: u64,
    /// Bistatic range spread over the scene, m.
    pub delta_range: f64,
    /// Platform speed used for the azimuth count, m/s.
    pub speed: f64,
}

/// Ceiling that ignores floating-point noise just above an integer.
fn slot_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// `N_a = ceil((W_a / v + T_a) · PRF)`
pub fn azimuth_samples(azimuth_extent: f64, speed: f64, aperture_time: f64, prf: f64) -> Result<u64, SarError> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(SarError::NonPositiveSpeed(speed));
    }
    Ok(slot_count((azimuth_extent / speed + aperture_time) * prf))
}

/// `N_r = ceil(ΔR_bi / c · S_rate)`
pub fn range_samples(delta_range: f64, sample_rate: f64) -> u64 {
    slot_count(delta_range / SPEED_OF_LIGHT * sample_rate)
}

/// Spread of the bistatic range over the scene grid and its corners, with
/// platforms at their aperture-center positions.
pub fn bistatic_range_spread(geometry: &BistaticGeometry, window: &ApertureWindow, scene: &SceneSpec) -> f64 {
    let tx = geometry.tx_position(window.center_time);
    let rx = geometry.rx_position(window.center_time);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in scene.sample_points().into_iter().chain(scene.corners()) {
        let r = bistatic_range(tx, rx, p);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi - lo
}

pub fn echo_data_size(
    scene: &SceneSpec,
    window: &ApertureWindow,
    speed: f64,
    radar: &RadarParams,
    geometry: &BistaticGeometry,
) -> Result<EchoDataSize, SarError> {
    scene.validate()?;
    let n_azimuth = azimuth_samples(scene.azimuth_extent, speed, radar.aperture_time, radar.prf)?;
    let delta_range = bistatic_range_spread(geometry, window, scene);
    let n_range = range_samples(delta_range, radar.sample_rate);
    Ok(EchoDataSize {
        n_azimuth,
        n_range,
        bits: u64::from(radar.bits_per_sample) * n_azimuth * n_range,
        delta_range,
        speed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightpath::FlightPath;
    use crate::geom::Vec3;
    use crate::sargeom::IlluminatorTrajectory;

    #[test]
    fn azimuth_count_example() {
        assert_eq!(azimuth_samples(1000.0, 50.0, 2.0, 200.0).unwrap(), 4400);
        assert!(matches!(azimuth_samples(1000.0, 0.0, 2.0, 200.0), Err(SarError::NonPositiveSpeed(_))));
    }

    #[test]
    fn range_count_example() {
        assert_eq!(range_samples(3000.0, 200e6), 2002);
    }

    #[test]
    fn data_size_product() {
        assert_eq!(128u64 * 4400 * 2002, 1_127_526_400);
    }

    #[test]
    fn partial_slot_rounds_up() {
        assert_eq!(azimuth_samples(1000.0, 50.0, 2.001, 200.0).unwrap(), 4401);
        assert_eq!(range_samples(0.0, 1e8), 0);
    }

    fn setup(w_a: f64) -> (SceneSpec, ApertureWindow, RadarParams, BistaticGeometry) {
        let path =
            FlightPath::line(Vec3::new(1000.0, 1000.0, 200.0), Vec3::new(3000.0, 1000.0, 200.0), 201, 30.0).unwrap();
        let g = BistaticGeometry::new(IlluminatorTrajectory::stationary(Vec3::new(2000.0, -20000.0, 3000.0)), &path);
        let w = ApertureWindow::centered(&g.receiver, 30.0, 1.0).unwrap();
        let scene = SceneSpec {
            center: Vec3::new(2000.0, 1350.0, 0.0),
            range_extent: 300.0,
            azimuth_extent: w_a,
            n_range: 5,
            n_azimuth: 5,
            heading: 0.0,
        };
        let radar = RadarParams {
            wavelength: 0.24,
            bandwidth: 100e6,
            prf: 500.0,
            sample_rate: 250e6,
            aperture_time: 1.0,
            bits_per_sample: 128,
        };
        (scene, w, radar, g)
    }

    #[test]
    fn end_to_end_consistent() {
        let (scene, w, radar, g) = setup(200.0);
        let d = echo_data_size(&scene, &w, 30.0, &radar, &g).unwrap();
        assert_eq!(d.n_azimuth, azimuth_samples(200.0, 30.0, 1.0, 500.0).unwrap());
        assert_eq!(d.n_range, range_samples(d.delta_range, 250e6));
        assert_eq!(d.bits, 128 * d.n_azimuth * d.n_range);
        assert!(d.delta_range > 0.0);
    }

    #[test]
    fn monotone_in_parameters() {
        let (scene, w, radar, g) = setup(200.0);
        let base = echo_data_size(&scene, &w, 30.0, &radar, &g).unwrap().bits;
        let grow = [
            echo_data_size(&SceneSpec { azimuth_extent: 400.0, ..scene }, &w, 30.0, &radar, &g).unwrap().bits,
            echo_data_size(&scene, &w, 30.0, &RadarParams { aperture_time: 2.0, ..radar }, &g).unwrap().bits,
            echo_data_size(&scene, &w, 30.0, &RadarParams { prf: 800.0, ..radar }, &g).unwrap().bits,
            echo_data_size(&scene, &w, 30.0, &RadarParams { sample_rate: 400e6, ..radar }, &g).unwrap().bits,
            echo_data_size(&scene.scaled(2.0), &w, 30.0, &radar, &g).unwrap().bits,
        ];
        for bits in grow {
            assert!(bits >= base);
        }
    }
}
