//! Scenario files.
//!
//! Scenarios are TOML. Lengths suffixed `_km` are converted to metres on
//! load; every other quantity carries its SI unit in the key name. Physical
//! constants have no defaults. The documented optional keys are
//! `platform.clamp_regeneration` (false), `illuminator.reference_time_s` (0),
//! `scene.heading_deg` (0), `comms.window` (whole path) and `[aperture]`
//! (window centered on the waypoint nearest the scene center).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comms::CommParams;
use crate::energy::PlatformParams;
use crate::flightpath::{ArcPlane, FlightPath};
use crate::geom::{Footprint, HillProfile, HillSpec, TerrainModel, Vec3};
use crate::sargeom::{IlluminatorTrajectory, RadarParams, SceneSpec};
use crate::threat::ThreatParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {file}: {message}")]
    Io { file: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid { field: field.into(), message: message.to_string() }
    }

    /// Dotted path of the offending key, when known.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Parse { path, .. } => Some(path),
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub terrain: TerrainConfig,
    pub platform: PlatformConfig,
    pub illuminator: IlluminatorConfig,
    pub radar: RadarConfig,
    pub scene: SceneConfig,
    pub comms: CommsConfig,
    pub threat: ThreatConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture: Option<ApertureConfig>,
    pub paths: Vec<PathConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainConfig {
    /// ESRI ASCII grid, relative to the scenario file. Excludes the synthetic keys.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_height_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_km: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_km: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hills: Vec<HillConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillConfig {
    pub center_km: [f64; 2],
    pub peak_height_m: f64,
    pub radius_km: f64,
    pub profile: HillProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformConfig {
    pub mass_kg: f64,
    pub gravity_mps2: f64,
    pub drag_c1: f64,
    pub drag_c2: f64,
    pub v_a_mps: f64,
    pub v_min_mps: f64,
    pub v_max_mps: f64,
    pub a_max_mps2: f64,
    #[serde(default)]
    pub clamp_regeneration: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlluminatorConfig {
    pub position_km: [f64; 3],
    pub velocity_mps: [f64; 3],
    #[serde(default)]
    pub reference_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    pub wavelength_m: f64,
    pub bandwidth_hz: f64,
    pub prf_hz: f64,
    pub sample_rate_hz: f64,
    pub aperture_time_s: f64,
    pub bits_per_sample: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub center_km: [f64; 3],
    pub range_extent_km: f64,
    pub azimuth_extent_km: f64,
    pub n_range: usize,
    pub n_azimuth: usize,
    #[serde(default)]
    pub heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommsConfig {
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub ref_gain: f64,
    pub noise_power_w: f64,
    pub station_km: [f64; 3],
    /// First and last waypoint (0-based, inclusive) of the transmission window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreatConfig {
    pub safe_clearance_m: f64,
    pub sample_step_m: f64,
    pub lateral_probe_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AperturePlacement {
    /// Centered on the waypoint nearest the scene center.
    NearestScene,
    /// Centered at `center_time_s` after the path start.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureConfig {
    pub placement: AperturePlacement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Line,
    Arc,
    Waypoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub name: String,
    pub kind: PathKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_km: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_km: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulge_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<ArcPlane>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints_km: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speeds_mps: Option<Vec<f64>>,
}

/// Aperture window placement rule, resolved per path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApertureRule {
    NearestScene,
    Fixed { center_time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPath {
    pub name: String,
    pub path: FlightPath,
}

/// Validated scenario in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub terrain: TerrainModel,
    pub platform: PlatformParams,
    pub illuminator: IlluminatorTrajectory,
    pub radar: RadarParams,
    pub scene: SceneSpec,
    pub comms: CommParams,
    pub threat: ThreatParams,
    pub aperture: ApertureRule,
    pub paths: Vec<NamedPath>,
    /// Source configuration, for serialization.
    pub config: ScenarioConfig,
}

const KM: f64 = 1000.0;

fn km3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0] * KM, v[1] * KM, v[2] * KM)
}

fn need<T>(v: Option<T>, field: impl Into<String>) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::invalid(field, "missing field"))
}

const BUNDLED: [(&str, &str); 2] = [
    ("scenario_s4", include_str!("../../scenarios/scenario_s4.toml")),
    ("scenario_desk", include_str!("../../scenarios/scenario_desk.toml")),
];

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::Parse { path: ".".into(), message: e.to_string() })?;
        serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError::Parse { path: e.path().to_string(), message: e.inner().to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario configs always serialize")
    }
}

/// Names of the scenarios shipped with the library.
pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.0).collect()
}

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|b| b.0 == name).map(|b| b.1)
}

/// Loads a scenario file, or a bundled scenario by name when no such file
/// exists.
pub fn load_scenario(source: &str) -> Result<Scenario, ConfigError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { file: source.into(), message: e.to_string() })?;
        return Scenario::from_config(ScenarioConfig::from_toml(&text)?, path.parent());
    }
    match bundled(source) {
        Some(text) => Scenario::from_config(ScenarioConfig::from_toml(text)?, None),
        None => Err(ConfigError::Io {
            file: source.into(),
            message: format!("no such file or bundled scenario (bundled: {})", bundled_names().join(", ")),
        }),
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_config(ScenarioConfig::from_toml(text)?, None)
    }

    /// Validates `config`; `base_dir` resolves a relative terrain grid file.
    pub fn from_config(config: ScenarioConfig, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let terrain = build_terrain(&config.terrain, base_dir)?;
        let fp = terrain.footprint();

        let p = &config.platform;
        let platform = PlatformParams {
            mass: p.mass_kg,
            gravity: p.gravity_mps2,
            drag_c1: p.drag_c1,
            drag_c2: p.drag_c2,
            v_a: p.v_a_mps,
            v_min: p.v_min_mps,
            v_max: p.v_max_mps,
            a_max: p.a_max_mps2,
            clamp_regeneration: p.clamp_regeneration,
        };
        platform.validate().map_err(|e| ConfigError::invalid("platform", e))?;

        let il = &config.illuminator;
        let illuminator = IlluminatorTrajectory {
            ref_position: km3(il.position_km),
            ref_velocity: Vec3::new(il.velocity_mps[0], il.velocity_mps[1], il.velocity_mps[2]),
            ref_time: il.reference_time_s,
        };
        if !(illuminator.ref_position.is_finite() && illuminator.ref_velocity.is_finite()) {
            return Err(ConfigError::invalid("illuminator", "non-finite position or velocity"));
        }

        let r = &config.radar;
        let radar = RadarParams {
            wavelength: r.wavelength_m,
            bandwidth: r.bandwidth_hz,
            prf: r.prf_hz,
            sample_rate: r.sample_rate_hz,
            aperture_time: r.aperture_time_s,
            bits_per_sample: r.bits_per_sample,
        };
        radar.validate().map_err(|e| ConfigError::invalid("radar", e))?;

        let s = &config.scene;
        let scene = SceneSpec {
            center: km3(s.center_km),
            range_extent: s.range_extent_km * KM,
            azimuth_extent: s.azimuth_extent_km * KM,
            n_range: s.n_range,
            n_azimuth: s.n_azimuth,
            heading: s.heading_deg.to_radians(),
        };
        scene.validate().map_err(|e| ConfigError::invalid("scene", e))?;
        if !fp.contains(scene.center.x, scene.center.y) {
            return Err(ConfigError::invalid("scene.center_km", "outside the terrain footprint"));
        }
        if scene.corners().iter().any(|c| !fp.contains(c.x, c.y)) {
            return Err(ConfigError::invalid("scene", "scene extent leaves the terrain footprint"));
        }

        let c = &config.comms;
        let comms = CommParams {
            bandwidth: c.bandwidth_hz,
            tx_power: c.tx_power_w,
            ref_gain: c.ref_gain,
            noise_power: c.noise_power_w,
            station: km3(c.station_km),
            window: c.window.map(|w| (w[0], w[1])),
        };
        comms.validate().map_err(|e| ConfigError::invalid("comms", e))?;
        if !fp.contains(comms.station.x, comms.station.y) {
            return Err(ConfigError::invalid("comms.station_km", "outside the terrain footprint"));
        }
        if let Some([a, b]) = c.window {
            if a >= b {
                return Err(ConfigError::invalid("comms.window", format!("start {a} must precede end {b}")));
            }
        }

        let t = &config.threat;
        let threat = ThreatParams {
            safe_clearance: t.safe_clearance_m,
            sample_step: t.sample_step_m,
            lateral_probe: t.lateral_probe_m,
        };
        threat.validate().map_err(|e| ConfigError::invalid("threat", e))?;

        let aperture = match &config.aperture {
            None | Some(ApertureConfig { placement: AperturePlacement::NearestScene, center_time_s: None }) => {
                ApertureRule::NearestScene
            }
            Some(ApertureConfig { placement: AperturePlacement::NearestScene, center_time_s: Some(_) }) => {
                return Err(ConfigError::invalid("aperture.center_time_s", "only allowed with placement = \"fixed\""))
            }
            Some(ApertureConfig { placement: AperturePlacement::Fixed, center_time_s }) => {
                let t = need(*center_time_s, "aperture.center_time_s")?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(ConfigError::invalid("aperture.center_time_s", "must be non-negative"));
                }
                ApertureRule::Fixed { center_time: t }
            }
        };

        if config.paths.is_empty() {
            return Err(ConfigError::invalid("paths", "at least one path is required"));
        }
        let mut paths = Vec::with_capacity(config.paths.len());
        for (i, pc) in config.paths.iter().enumerate() {
            let field = format!("paths[{i}]");
            if paths.iter().any(|p: &NamedPath| p.name == pc.name) {
                return Err(ConfigError::invalid(
                    format!("{field}.name"),
                    format!("duplicate path name {:?}", pc.name),
                ));
            }
            let path = build_path(pc, &field)?;
            if let Some(k) = path.points().iter().position(|q| !fp.contains(q.x, q.y)) {
                return Err(ConfigError::invalid(field, format!("waypoint {k} leaves the terrain footprint")));
            }
            paths.push(NamedPath { name: pc.name.clone(), path });
        }

        Ok(Scenario {
            name: config.name.clone(),
            terrain,
            platform,
            illuminator,
            radar,
            scene,
            comms,
            threat,
            aperture,
            paths,
            config,
        })
    }

    pub fn path(&self, name: &str) -> Option<&NamedPath> {
        self.paths.iter().find(|p| p.name == name)
    }

    pub fn path_names(&self) -> Vec<&str> {
        self.paths.iter().map(|p| p.name.as_str()).collect()
    }

    /// Copy of the scenario keeping only the named paths.
    pub fn with_paths(&self, names: &[&str]) -> Scenario {
        let mut out = self.clone();
        out.paths.retain(|p| names.contains(&p.name.as_str()));
        out.config.paths.retain(|p| names.contains(&p.name.as_str()));
        out
    }

    pub fn to_toml(&self) -> String {
        self.config.to_toml()
    }
}

fn build_terrain(t: &TerrainConfig, base_dir: Option<&Path>) -> Result<TerrainModel, ConfigError> {
    if let Some(file) = &t.grid_file {
        if t.base_height_m.is_some() || t.spacing_m.is_some() || t.origin_km.is_some() || t.size_km.is_some() {
            return Err(ConfigError::invalid("terrain.grid_file", "cannot be combined with synthetic terrain keys"));
        }
        if !t.hills.is_empty() {
            return Err(ConfigError::invalid("terrain.hills", "hills apply to synthetic terrain only"));
        }
        let mut resolved = PathBuf::from(file);
        if resolved.is_relative() {
            if let Some(dir) = base_dir {
                resolved = dir.join(resolved);
            }
        }
        return TerrainModel::load_ascii_grid(&resolved).map_err(|e| ConfigError::invalid("terrain.grid_file", e));
    }
    let base = need(t.base_height_m, "terrain.base_height_m")?;
    let spacing = need(t.spacing_m, "terrain.spacing_m")?;
    let origin = need(t.origin_km, "terrain.origin_km")?;
    let size = need(t.size_km, "terrain.size_km")?;
    let hills: Vec<HillSpec> = t
        .hills
        .iter()
        .map(|h| HillSpec {
            center: (h.center_km[0] * KM, h.center_km[1] * KM),
            peak_height: h.peak_height_m,
            radius: h.radius_km * KM,
            profile: h.profile,
        })
        .collect();
    let fp = Footprint::new((origin[0] * KM, origin[1] * KM), (size[0] * KM, size[1] * KM));
    TerrainModel::synthetic(base, &hills, fp, spacing).map_err(|e| ConfigError::invalid("terrain", e))
}

fn build_path(pc: &PathConfig, field: &str) -> Result<FlightPath, ConfigError> {
    let f = |k: &str| format!("{field}.{k}");
    let bad = |e: crate::flightpath::PathError| ConfigError::invalid(field, e);
    let forbid = |present: bool, k: &str| {
        if present {
            Err(ConfigError::invalid(f(k), format!("not used by {:?} paths", pc.kind)))
        } else {
            Ok(())
        }
    };
    match pc.kind {
        PathKind::Line | PathKind::Arc => {
            forbid(pc.waypoints_km.is_some(), "waypoints_km")?;
            forbid(pc.speeds_mps.is_some(), "speeds_mps")?;
            let start = km3(need(pc.start_km, f("start_km"))?);
            let end = km3(need(pc.end_km, f("end_km"))?);
            let n = need(pc.points, f("points"))?;
            let speed = need(pc.speed_mps, f("speed_mps"))?;
            if pc.kind == PathKind::Line {
                forbid(pc.bulge_km.is_some(), "bulge_km")?;
                forbid(pc.plane.is_some(), "plane")?;
                FlightPath::line(start, end, n, speed).map_err(bad)
            } else {
                let bulge = need(pc.bulge_km, f("bulge_km"))? * KM;
                let plane = need(pc.plane, f("plane"))?;
                FlightPath::arc(start, end, bulge, plane, n, speed).map_err(bad)
            }
        }
        PathKind::Waypoints => {
            for (present, k) in [
                (pc.start_km.is_some(), "start_km"),
                (pc.end_km.is_some(), "end_km"),
                (pc.bulge_km.is_some(), "bulge_km"),
                (pc.plane.is_some(), "plane"),
                (pc.points.is_some(), "points"),
                (pc.speed_mps.is_some(), "speed_mps"),
            ] {
                forbid(present, k)?;
            }
            let pts: Vec<Vec3> = need(pc.waypoints_km.clone(), f("waypoints_km"))?.into_iter().map(km3).collect();
            let speeds = need(pc.speeds_mps.clone(), f("speeds_mps"))?;
            FlightPath::new(pts, speeds).map_err(bad)
        }
    }
}
