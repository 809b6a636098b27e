use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::measure::ideal_cell_area_fraction;
use super::{
    backproject, measure_irw, simulate_echo, Backprojection, EchoError, FastTimeGate, ImageGrid, IrwAxes,
    IrwMeasurement, PointTarget,
};
use crate::geom::Vec3;
use crate::sargeom::{
    grid_points, resolution_cell, ApertureWindow, BistaticGeometry, RadarParams, ResolutionSample, SceneSpec,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub n_targets: usize,
    /// Jitters target positions by up to a tenth of the grid pitch.
    pub seed: Option<u64>,
    /// Resolution cells imaged on each side of a target.
    pub cells: f64,
    pub max_pixels: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { n_targets: 25, seed: None, cells: 3.0, max_pixels: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetRole {
    /// Target closest to the scene center.
    Reference,
    /// Smallest predicted cell area.
    Minimum,
    /// Largest predicted cell area.
    Maximum,
}

impl TargetRole {
    pub fn label(self) -> &'static str {
        match self {
            TargetRole::Reference => "Ref.",
            TargetRole::Minimum => "Min.",
            TargetRole::Maximum => "Max.",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionCheck {
    pub role: TargetRole,
    pub predicted: ResolutionSample,
    pub measured: IrwMeasurement,
    /// `cell_area_meas / S_c`
    pub ratio: f64,
    /// `ratio` divided by the -3 dB area fraction of an ideal response; one
    /// when the image matches the predicted cell exactly.
    pub normalized_ratio: f64,
}

/// `n` targets evenly spread over the scene on the squarest grid that holds
/// them, filled range-major.
pub fn place_targets(scene: &SceneSpec, n: usize, seed: Option<u64>) -> Vec<Vec3> {
    if n == 0 {
        return Vec::new();
    }
    let n_r = (n as f64).sqrt().ceil() as usize;
    let n_a = n.div_ceil(n_r);
    let mut pts = grid_points(scene, n_r, n_a);
    pts.truncate(n);
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pitch = |extent: f64, k: usize| if k > 1 { extent / (k - 1) as f64 } else { extent };
        let (pr, pa) = (pitch(scene.range_extent, n_r), pitch(scene.azimuth_extent, n_a));
        let (ur, ua) = (scene.range_axis(), scene.azimuth_axis());
        for p in &mut pts {
            let dr = rng.random_range(-0.1..=0.1) * pr;
            let da = rng.random_range(-0.1..=0.1) * pa;
            p.x += dr * ur.x + da * ua.x;
            p.y += dr * ur.y + da * ua.y;
        }
    }
    pts
}

/// Predicted resolution of each target at the aperture-center states.
fn predict(
    targets: &[Vec3],
    geometry: &BistaticGeometry,
    window: &ApertureWindow,
    radar: &RadarParams,
) -> Result<Vec<ResolutionSample>, EchoError> {
    let tx = geometry.tx_state(window.center_time);
    let rx = geometry.rx_state(window.center_time);
    Ok(targets.iter().map(|&p| resolution_cell(&tx, &rx, p, radar)).collect::<Result<Vec<_>, _>>()?)
}

/// Image grid sized to a predicted cell.
pub fn grid_for(sample: &ResolutionSample, opts: &VerifyOptions) -> ImageGrid {
    ImageGrid::around(sample.target, sample.rho_r, sample.rho_a, sample.psi.sin(), opts.cells, opts.max_pixels)
}

/// Simulates `n_targets` point targets, images the reference, minimum and
/// maximum predicted cells, and compares measured -3 dB areas with the
/// prediction.
pub fn verify_resolution(
    scene: &SceneSpec,
    geometry: &BistaticGeometry,
    window: &ApertureWindow,
    radar: &RadarParams,
    opts: &VerifyOptions,
) -> Result<Vec<ResolutionCheck>, EchoError> {
    scene.validate()?;
    radar.validate()?;
    let targets = place_targets(scene, opts.n_targets, opts.seed);
    if targets.is_empty() {
        return Err(EchoError::NoTargets);
    }
    let predicted = predict(&targets, geometry, window, radar)?;
    let by_area = |a: &&ResolutionSample, b: &&ResolutionSample| a.s_c.total_cmp(&b.s_c);
    let center = scene.center;
    let reference = predicted
        .iter()
        .min_by(|a, b| a.target.distance(center).total_cmp(&b.target.distance(center)))
        .expect("non-empty");
    let min = predicted.iter().min_by(by_area).expect("non-empty");
    let max = predicted.iter().max_by(by_area).expect("non-empty");

    let mut gate_points: Vec<Vec3> = scene.sample_points();
    gate_points.extend(scene.corners());
    gate_points.extend(&targets);
    let gate = FastTimeGate::covering_points(geometry, window, &gate_points, radar, FastTimeGate::GUARD);
    let point_targets: Vec<PointTarget> = targets.iter().map(|&p| PointTarget::unit(p)).collect();
    let echo = simulate_echo(&point_targets, geometry, window, radar, &gate)?;
    let kappa = ideal_cell_area_fraction();

    [(TargetRole::Reference, reference), (TargetRole::Minimum, min), (TargetRole::Maximum, max)]
        .into_iter()
        .map(|(role, p)| {
            let grid = grid_for(p, opts);
            let image = backproject(&echo, &grid, geometry, radar)?.image;
            let axes = IrwAxes {
                range: p.range_direction(),
                azimuth: p.doppler_direction(),
                search_radius: 0.5 * p.rho_r.min(p.rho_a),
            };
            let measured = measure_irw(&image, p.target, axes)?;
            let ratio = measured.cell_area_meas / p.s_c;
            Ok(ResolutionCheck { role, predicted: *p, measured, ratio, normalized_ratio: ratio / kappa })
        })
        .collect()
}

/// Backprojected image of `n_targets` point targets over the whole scene
/// plus a margin of `opts.cells` reference cells, at most `opts.max_pixels`
/// pixels on the longer side.
pub fn scene_image(
    scene: &SceneSpec,
    geometry: &BistaticGeometry,
    window: &ApertureWindow,
    radar: &RadarParams,
    opts: &VerifyOptions,
) -> Result<Backprojection, EchoError> {
    scene.validate()?;
    radar.validate()?;
    let targets = place_targets(scene, opts.n_targets, opts.seed);
    if targets.is_empty() {
        return Err(EchoError::NoTargets);
    }
    let reference = predict(&[scene.center], geometry, window, radar)?[0];
    let margin = opts.cells * reference.rho_r.max(reference.rho_a) / reference.psi.sin();
    let corners = scene.corners();
    let (mut lo, mut hi) = (corners[0], corners[0]);
    for c in corners.iter().chain(&targets) {
        lo = Vec3::new(lo.x.min(c.x), lo.y.min(c.y), lo.z);
        hi = Vec3::new(hi.x.max(c.x), hi.y.max(c.y), hi.z);
    }
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let finest = reference.rho_r.min(reference.rho_a) / 4.0;
    let spacing = finest.max(w.max(h) / (opts.max_pixels - 1) as f64);
    let grid = ImageGrid {
        origin: Vec3::new(lo.x - margin, lo.y - margin, scene.center.z),
        spacing,
        n_x: (w / spacing).ceil() as usize + 1,
        n_y: (h / spacing).ceil() as usize + 1,
    };
    let mut gate_points = corners.to_vec();
    gate_points.extend(&targets);
    gate_points.extend([grid.position(0, 0), grid.position(grid.n_x - 1, grid.n_y - 1)]);
    gate_points.extend([grid.position(grid.n_x - 1, 0), grid.position(0, grid.n_y - 1)]);
    let gate = FastTimeGate::covering_points(geometry, window, &gate_points, radar, FastTimeGate::GUARD);
    let point_targets: Vec<PointTarget> = targets.iter().map(|&p| PointTarget::unit(p)).collect();
    let echo = simulate_echo(&point_targets, geometry, window, radar, &gate)?;
    backproject(&echo, &grid, geometry, radar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightpath::FlightPath;
    use crate::sargeom::IlluminatorTrajectory;

    fn desk(aperture_time: f64) -> (SceneSpec, BistaticGeometry, ApertureWindow, RadarParams) {
        let path =
            FlightPath::line(Vec3::new(1000.0, 1000.0, 200.0), Vec3::new(3000.0, 1000.0, 200.0), 201, 30.0).unwrap();
        let g = BistaticGeometry::new(IlluminatorTrajectory::stationary(Vec3::new(2000.0, -20000.0, 3000.0)), &path);
        let scene = SceneSpec {
            center: Vec3::new(2000.0, 1350.0, 0.0),
            range_extent: 300.0,
            azimuth_extent: 200.0,
            n_range: 5,
            n_azimuth: 5,
            heading: 0.0,
        };
        let w = ApertureWindow::nearest_to(&path, scene.center, aperture_time).unwrap();
        let radar = RadarParams {
            wavelength: 0.24,
            bandwidth: 100e6,
            prf: 500.0,
            sample_rate: 250e6,
            aperture_time,
            bits_per_sample: 128,
        };
        (scene, g, w, radar)
    }

    #[test]
    fn placement_is_even_and_seeded() {
        let (scene, ..) = desk(1.0);
        let pts = place_targets(&scene, 25, None);
        assert_eq!(pts.len(), 25);
        assert_eq!(pts, scene.sample_points());
        assert_eq!(place_targets(&scene, 7, None).len(), 7);
        let a = place_targets(&scene, 25, Some(3));
        assert_eq!(a, place_targets(&scene, 25, Some(3)));
        assert_ne!(a, pts);
        for (p, q) in a.iter().zip(&pts) {
            assert!((p.x - q.x).abs() <= 0.1 * 50.0 + 1e-9 && (p.y - q.y).abs() <= 0.1 * 75.0 + 1e-9);
        }
    }

    #[test]
    fn end_to_end_area_tracks_prediction() {
        let (scene, g, w, radar) = desk(1.0);
        let checks = verify_resolution(&scene, &g, &w, &radar, &VerifyOptions::default()).unwrap();
        assert_eq!(checks.len(), 3);
        for c in &checks {
            assert!((c.normalized_ratio - 1.0).abs() < 0.2, "{:?} {}", c.role, c.normalized_ratio);
            assert!(c.measured.peak_pos.distance(c.predicted.target) < 0.5 * c.predicted.rho_r.min(c.predicted.rho_a));
        }
        // The reference target sees nearly orthogonal gradients, so its -3 dB
        // widths are the ideal 0.886 fraction of the iso-line spacings.
        let r = checks.iter().find(|c| c.role == TargetRole::Reference).unwrap();
        assert!(r.predicted.psi > 1.5);
        assert!((r.measured.rho_r_meas / (0.886 * r.predicted.rho_r) - 1.0).abs() < 0.1);
        assert!((r.measured.rho_a_meas / (0.886 * r.predicted.rho_a) - 1.0).abs() < 0.1);
        assert!(r.measured.pslr.unwrap() < -10.0);
        let min = checks.iter().find(|c| c.role == TargetRole::Minimum).unwrap();
        let max = checks.iter().find(|c| c.role == TargetRole::Maximum).unwrap();
        assert!(min.measured.cell_area_meas < max.measured.cell_area_meas);
    }

    #[test]
    fn mirror_targets_measure_alike() {
        // Targets mirrored about the plane through the transmitter normal to
        // the path have identical predicted cells.
        let (scene, g, w, radar) = desk(1.0);
        let opts = VerifyOptions::default();
        let pair = [Vec3::new(1950.0, 1300.0, 0.0), Vec3::new(2050.0, 1300.0, 0.0)];
        let pred = predict(&pair, &g, &w, &radar).unwrap();
        assert!((pred[0].s_c - pred[1].s_c).abs() / pred[0].s_c < 1e-3);
        let gate = FastTimeGate::covering(&g, &w, &scene, &radar, FastTimeGate::GUARD);
        let echo =
            simulate_echo(&[PointTarget::unit(pair[0]), PointTarget::unit(pair[1])], &g, &w, &radar, &gate).unwrap();
        let areas: Vec<f64> = pred
            .iter()
            .map(|p| {
                let img = backproject(&echo, &grid_for(p, &opts), &g, &radar).unwrap().image;
                let axes = IrwAxes { range: p.range_direction(), azimuth: p.doppler_direction(), search_radius: 1.0 };
                measure_irw(&img, p.target, axes).unwrap().cell_area_meas
            })
            .collect();
        assert!((areas[0] - areas[1]).abs() / areas[0] < 0.1);
    }

    #[test]
    fn azimuth_width_halves_with_double_aperture() {
        let one = desk(1.0);
        let two = desk(2.0);
        let opts = VerifyOptions { n_targets: 1, ..VerifyOptions::default() };
        let a = verify_resolution(&one.0, &one.1, &one.2, &one.3, &opts).unwrap()[0];
        let b = verify_resolution(&two.0, &two.1, &two.2, &two.3, &opts).unwrap()[0];
        let ratio = b.measured.rho_a_meas / a.measured.rho_a_meas;
        assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn energy_concentrates_near_target() {
        let (_, g, w, radar) = desk(1.0);
        let target = Vec3::new(2000.0, 1350.0, 0.0);
        let p = predict(&[target], &g, &w, &radar).unwrap()[0];
        let opts = VerifyOptions { cells: 12.0, max_pixels: 256, ..VerifyOptions::default() };
        let grid = grid_for(&p, &opts);
        let gate = FastTimeGate::covering_points(
            &g,
            &w,
            &[
                grid.position(0, 0),
                grid.position(grid.n_x - 1, grid.n_y - 1),
                grid.position(0, grid.n_y - 1),
                grid.position(grid.n_x - 1, 0),
            ],
            &radar,
            FastTimeGate::GUARD,
        );
        let echo = simulate_echo(&[PointTarget::unit(target)], &g, &w, &radar, &gate).unwrap();
        let img = backproject(&echo, &grid, &g, &radar).unwrap().image;
        let radius = 5.0 * p.rho_r.max(p.rho_a);
        let mut inside = 0.0;
        let mut total = 0.0;
        for j in 0..grid.n_y {
            for i in 0..grid.n_x {
                let pw = img.power(i, j);
                total += pw;
                if grid.position(i, j).distance(target) <= radius {
                    inside += pw;
                }
            }
        }
        assert!(inside / total >= 0.5);
    }

    #[test]
    fn peak_phase_is_constant_across_targets() {
        let (scene, g, w, radar) = desk(1.0);
        let targets = place_targets(&scene, 4, None);
        let gate = FastTimeGate::covering(&g, &w, &scene, &radar, FastTimeGate::GUARD);
        for &t in &targets {
            let echo = simulate_echo(&[PointTarget::unit(t)], &g, &w, &radar, &gate).unwrap();
            let z = backproject(&echo, &ImageGrid::centered(t, 0.1, 3), &g, &radar).unwrap().image.at(1, 1);
            assert!(z.arg().abs() < 0.05);
        }
    }
}
