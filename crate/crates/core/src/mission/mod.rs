//! Per-path mission evaluation.
//!
//! Every candidate path is scored independently on flight energy, terrain
//! threat, resolution over the target scene, echo data volume, and link
//! capacity to the ground station. A path is feasible when the link can
//! return all of its echo data.

mod config;

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{
    bundled, bundled_names, load_scenario, ApertureConfig, AperturePlacement, ApertureRule, CommsConfig, ConfigError,
    HillConfig, IlluminatorConfig, NamedPath, PathConfig, PathKind, PlatformConfig, RadarConfig, Scenario,
    ScenarioConfig, SceneConfig, TerrainConfig, ThreatConfig,
};

use crate::comms::{check_los_assumption, path_capacity, CommsError, LinkBudgetReport};
use crate::echosim::EchoError;
use crate::energy::{path_energy, EnergyBreakdown, EnergyError};
use crate::flightpath::FlightPath;
use crate::sargeom::{
    echo_data_size, scene_resolution_evaluator, ApertureWindow, BistaticGeometry, EchoDataSize, SarError,
    SceneResolution,
};
use crate::threat::{path_threat, ThreatAssessment, ThreatError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("energy: {0}")]
    Energy(#[from] EnergyError),
    #[error("threat: {0}")]
    Threat(#[from] ThreatError),
    #[error("resolution: {0}")]
    Sar(#[from] SarError),
    #[error("link: {0}")]
    Comms(#[from] CommsError),
    #[error("imaging: {0}")]
    Echo(#[from] EchoError),
    #[error("unknown path {name:?}; valid paths: {}", valid.join(", "))]
    UnknownPath { name: String, valid: Vec<String> },
    #[error("invalid job count {0}")]
    Jobs(usize),
}

/// Everything computed for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMetrics {
    pub length: f64,
    pub energy: EnergyBreakdown,
    pub threat: ThreatAssessment,
    pub window: ApertureWindow,
    pub resolution: SceneResolution,
    pub data: EchoDataSize,
    pub link: LinkBudgetReport,
    pub warnings: Vec<String>,
}

impl PathMetrics {
    pub fn f_threat(&self) -> f64 {
        self.threat.value
    }

    pub fn d_echo(&self) -> u64 {
        self.data.bits
    }

    pub fn d_com(&self) -> f64 {
        self.link.d_com
    }

    pub fn feasible(&self) -> bool {
        self.link.feasible == Some(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub name: String,
    /// Row-level failure message in place of metrics.
    pub outcome: Result<PathMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionReport {
    pub scenario: String,
    pub rows: Vec<PathRow>,
}

/// Aperture window for `path` under the scenario's placement rule.
pub fn aperture_window(scenario: &Scenario, path: &FlightPath) -> Result<ApertureWindow, SarError> {
    let duration = scenario.radar.aperture_time;
    match scenario.aperture {
        ApertureRule::NearestScene => ApertureWindow::nearest_to(path, scenario.scene.center, duration),
        ApertureRule::Fixed { center_time } => ApertureWindow::centered(&path.timeline(), center_time, duration),
    }
}

pub fn evaluate_path(scenario: &Scenario, path: &FlightPath) -> Result<PathMetrics, MissionError> {
    let mut warnings = Vec::new();
    let energy = path_energy(path, &scenario.platform)?;
    for w in &energy.warnings {
        warnings.push(format!(
            "segment {} acceleration {:.2} m/s^2 exceeds {} m/s^2",
            w.segment, w.acceleration, scenario.platform.a_max
        ));
    }
    let threat = path_threat(path, &scenario.terrain, &scenario.threat)?;
    if threat.collision {
        warnings.push("path intersects the terrain".into());
    }
    let geometry = BistaticGeometry::new(scenario.illuminator, path);
    let window = aperture_window(scenario, path)?;
    let resolution = scene_resolution_evaluator(&geometry, &window, &scenario.scene, &scenario.radar)?;
    let speed = geometry.mean_rx_speed(&window);
    let data = echo_data_size(&scenario.scene, &window, speed, &scenario.radar, &geometry)?;
    let mut link = path_capacity(path, &scenario.comms)?;
    link.assess(data.bits as f64);
    let los = check_los_assumption(path, &scenario.comms, &scenario.terrain);
    if los.needs_warning() {
        warnings.push(format!(
            "station visible from {:.1}% of transmission segments; free-space capacity is optimistic",
            100.0 * los.fraction
        ));
    }
    Ok(PathMetrics {
        length: path.length(),
        energy: energy.breakdown,
        threat,
        window,
        resolution,
        data,
        link,
        warnings,
    })
}

/// Evaluates every path on up to `jobs` threads. Rows keep the scenario
/// order and do not depend on each other.
pub fn evaluate_mission(scenario: &Scenario, jobs: usize) -> Result<MissionReport, MissionError> {
    if jobs == 0 {
        return Err(MissionError::Jobs(jobs));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|_| MissionError::Jobs(jobs))?;
    let rows = pool.install(|| {
        scenario
            .paths
            .par_iter()
            .map(|p| PathRow {
                name: p.name.clone(),
                outcome: evaluate_path(scenario, &p.path).map_err(|e| e.to_string()),
            })
            .collect()
    });
    Ok(MissionReport { scenario: scenario.name.clone(), rows })
}

pub const CSV_HEADER: &str =
    "path,length_m,energy_j,f_threat,s_c_bar_m2,disequilibrium,d_echo_bits,d_com_bits,feasible";

impl MissionReport {
    pub fn row(&self, name: &str) -> Option<&PathRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Metrics of `name`, when that row succeeded.
    pub fn metrics(&self, name: &str) -> Option<&PathMetrics> {
        self.row(name).and_then(|r| r.outcome.as_ref().ok())
    }

    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.outcome.is_err())
    }

    /// One line per path; failed rows leave the metric columns empty and
    /// read `error` in the feasibility column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            match &row.outcome {
                Ok(m) => writeln!(
                    out,
                    "{},{:.3},{:.3},{:.6},{:.4},{:.6},{},{:.0},{}",
                    row.name,
                    m.length,
                    m.energy.total,
                    m.f_threat(),
                    m.resolution.evaluator,
                    m.resolution.disequilibrium,
                    m.d_echo(),
                    m.d_com(),
                    m.feasible()
                ),
                Err(_) => writeln!(out, "{},,,,,,,,error", row.name),
            }
            .expect("writing to a String");
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("Mission report: {}\n", self.scenario);
        writeln!(
            out,
            "{:<10} {:>10} {:>11} {:>9} {:>12} {:>8} {:>11} {:>11} {:>9}",
            "path", "length km", "energy Wh", "f_threat", "S_c bar m2", "diseq.", "D_echo Gb", "D_com Gb", "feasible"
        )
        .expect("writing to a String");
        for row in &self.rows {
            match &row.outcome {
                Ok(m) => writeln!(
                    out,
                    "{:<10} {:>10.3} {:>11.3} {:>9.4} {:>12.3} {:>8.3} {:>11.3} {:>11.3} {:>9}",
                    row.name,
                    m.length / 1000.0,
                    m.energy.watt_hours(),
                    m.f_threat(),
                    m.resolution.evaluator,
                    m.resolution.disequilibrium,
                    m.d_echo() as f64 / 1e9,
                    m.d_com() / 1e9,
                    if m.feasible() { "yes" } else { "no" }
                ),
                Err(e) => writeln!(out, "{:<10} failed: {e}", row.name),
            }
            .expect("writing to a String");
        }
        for row in &self.rows {
            if let Ok(m) = &row.outcome {
                for w in &m.warnings {
                    writeln!(out, "warning [{}]: {w}", row.name).expect("writing to a String");
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s4() -> Scenario {
        load_scenario("scenario_s4").unwrap()
    }

    #[test]
    fn s4_report_shape() {
        let report = evaluate_mission(&s4(), 4).unwrap();
        assert!(!report.has_failures(), "{}", report.to_table());
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 9));
    }

    #[test]
    fn straight_path_is_shortest_and_cheapest_in_altitude() {
        let report = evaluate_mission(&s4(), 2).unwrap();
        let line = report.metrics("path4").unwrap();
        for name in ["path1", "path2", "path3"] {
            assert!(line.length < report.metrics(name).unwrap().length);
        }
        assert!(report.metrics("path3").unwrap().energy.total > line.energy.total);
    }

    #[test]
    fn all_s4_paths_feasible() {
        let report = evaluate_mission(&s4(), 2).unwrap();
        for row in &report.rows {
            let m = row.outcome.as_ref().unwrap();
            assert!(m.feasible());
            assert_eq!(m.feasible(), m.d_com() >= m.d_echo() as f64);
        }
    }

    #[test]
    fn rows_are_independent() {
        let s = s4();
        let full = evaluate_mission(&s, 4).unwrap();
        let partial = evaluate_mission(&s.with_paths(&["path1", "path3"]), 1).unwrap();
        assert_eq!(partial.rows.len(), 2);
        for row in &partial.rows {
            assert_eq!(Some(row), full.row(&row.name));
        }
    }

    #[test]
    fn failing_row_does_not_abort_others() {
        let mut s = s4();
        // Push one path below the platform's minimum speed.
        let slow = FlightPath::line(s.paths[3].path.start(), s.paths[3].path.end(), 11, 5.0).unwrap();
        s.paths[3].path = slow;
        let report = evaluate_mission(&s, 2).unwrap();
        assert!(report.has_failures());
        assert!(report.rows[3].outcome.is_err());
        assert!(report.rows[..3].iter().all(|r| r.outcome.is_ok()));
        assert!(report.to_csv().lines().nth(4).unwrap().ends_with(",error"));
    }

    #[test]
    fn zero_jobs_rejected() {
        assert_eq!(evaluate_mission(&s4(), 0), Err(MissionError::Jobs(0)));
    }

    #[test]
    fn deterministic_csv() {
        let s = s4();
        assert_eq!(evaluate_mission(&s, 8).unwrap().to_csv(), evaluate_mission(&s, 3).unwrap().to_csv());
    }
}
