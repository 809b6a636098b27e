//! Cross-module invariants on the bundled scenarios.

use approx::assert_relative_eq;

use passive_uav_sar::energy::path_energy;
use passive_uav_sar::geom::Vec3;
use passive_uav_sar::mission::{evaluate_mission, evaluate_path, load_scenario, Scenario};
use passive_uav_sar::sargeom::{scene_resolution_evaluator, ApertureWindow, BistaticGeometry, IlluminatorTrajectory};

fn s4() -> Scenario {
    load_scenario("scenario_s4").unwrap()
}

#[test]
fn serialized_scenario_evaluates_identically() {
    let original = s4();
    let reloaded = Scenario::from_toml(&original.to_toml()).unwrap();
    assert_eq!(evaluate_mission(&original, 2).unwrap().to_csv(), evaluate_mission(&reloaded, 2).unwrap().to_csv());
}

#[test]
fn reversing_a_path_keeps_drag_and_negates_the_rest() {
    let s = s4();
    for named in &s.paths {
        let fwd = path_energy(&named.path, &s.platform).unwrap().breakdown;
        let back = path_energy(&named.path.reversed(), &s.platform).unwrap().breakdown;
        assert_relative_eq!(fwd.drag, back.drag, max_relative = 1e-9);
        assert_relative_eq!(fwd.potential, -back.potential, epsilon = 1e-6);
        assert_relative_eq!(fwd.kinetic, -back.kinetic, epsilon = 1e-6);
    }
}

#[test]
fn resolution_is_translation_invariant() {
    let s = s4();
    let path = &s.paths[0].path;
    let shift = Vec3::new(1234.5, -678.9, 0.0);
    let window = ApertureWindow::nearest_to(path, s.scene.center, s.radar.aperture_time).unwrap();
    let base =
        scene_resolution_evaluator(&BistaticGeometry::new(s.illuminator, path), &window, &s.scene, &s.radar).unwrap();

    let moved_path = path.translated(shift);
    let illuminator = IlluminatorTrajectory { ref_position: s.illuminator.ref_position + shift, ..s.illuminator };
    let mut scene = s.scene;
    scene.center += shift;
    let moved = scene_resolution_evaluator(&BistaticGeometry::new(illuminator, &moved_path), &window, &scene, &s.radar)
        .unwrap();
    assert_relative_eq!(base.evaluator, moved.evaluator, max_relative = 1e-6);
    assert_relative_eq!(base.disequilibrium, moved.disequilibrium, max_relative = 1e-6);
}

#[test]
fn longer_aperture_shrinks_cells() {
    let s = load_scenario("scenario_desk").unwrap();
    let mut config = s.config.clone();
    config.radar.aperture_time_s *= 2.0;
    let long = Scenario::from_config(config, None).unwrap();
    let short_m = evaluate_path(&s, &s.paths[0].path).unwrap();
    let long_m = evaluate_path(&long, &long.paths[0].path).unwrap();
    // Straight constant-speed flight: the Doppler gradient barely moves, so
    // cells shrink by about half while the data volume grows.
    let ratio = long_m.resolution.mean_area / short_m.resolution.mean_area;
    assert!((ratio - 0.5).abs() < 0.02, "{ratio}");
    assert!(long_m.d_echo() > short_m.d_echo());
}

#[test]
fn station_window_limits_capacity() {
    let s = s4();
    let full = {
        let mut s = s.clone();
        s.comms.window = None;
        evaluate_path(&s, &s.paths[3].path).unwrap().d_com()
    };
    let windowed = evaluate_path(&s, &s.paths[3].path).unwrap().d_com();
    let half = {
        let mut s = s.clone();
        s.comms.window = Some((0, 200));
        evaluate_path(&s, &s.paths[3].path).unwrap().d_com()
    };
    assert_relative_eq!(full, windowed, max_relative = 1e-12);
    assert!(half < windowed);
}
