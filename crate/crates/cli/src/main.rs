//! `pusar`: evaluate passive bistatic SAR UAV missions from a scenario file.
//!
//! Exit status is 0 on success, 1 when an evaluation fails, and 2 for usage
//! or validation errors. Errors are printed to stderr as one JSON object.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use passive_uav_sar::echosim::{scene_image, verify_resolution, VerifyOptions};
use passive_uav_sar::mission::{aperture_window, evaluate_mission, load_scenario, MissionError, NamedPath, Scenario};
use passive_uav_sar::sargeom::{scene_resolution_evaluator, ApertureWindow, BistaticGeometry};

#[derive(Parser)]
#[command(name = "pusar", version, about = "Passive UAV bistatic SAR mission evaluator")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every path: CSV on stdout, table on stderr.
    Evaluate {
        /// Scenario file or bundled scenario name.
        scenario: String,
        /// Also write per-path threat, link and resolution traces here.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Predicted resolution over the scene sample grid as CSV.
    ResolutionMap {
        scenario: String,
        #[arg(long)]
        path: String,
    },
    /// Simulate and backproject point targets over the scene.
    Image {
        scenario: String,
        #[command(flatten)]
        sim: SimArgs,
        /// Directory for `<path>.psim` and `<path>_db.csv`.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Compare measured and predicted cell areas for the reference,
    /// smallest and largest predicted cells.
    Verify {
        scenario: String,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    path: String,
    /// Number of point targets spread over the scene.
    #[arg(long, default_value_t = 25)]
    targets: usize,
    /// Jitter target positions reproducibly.
    #[arg(long)]
    seed: Option<u64>,
}

impl SimArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions { n_targets: self.targets, seed: self.seed, ..VerifyOptions::default() }
    }
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    extra: serde_json::Value,
}

impl Failure {
    fn usage(kind: &'static str, message: impl ToString) -> Self {
        Failure { code: 2, kind, message: message.to_string(), extra: json!({}) }
    }

    fn evaluation(kind: &'static str, message: impl ToString) -> Self {
        Failure { code: 1, kind, message: message.to_string(), extra: json!({}) }
    }

    fn report(&self) -> ExitCode {
        let mut obj = json!({ "error": self.kind, "message": self.message });
        if let (Some(o), Some(extra)) = (obj.as_object_mut(), self.extra.as_object()) {
            o.extend(extra.clone());
        }
        eprintln!("{obj}");
        ExitCode::from(self.code)
    }
}

impl From<MissionError> for Failure {
    fn from(e: MissionError) -> Self {
        match &e {
            MissionError::Config(c) => Failure {
                code: 2,
                kind: "invalid_scenario",
                message: e.to_string(),
                extra: json!({ "field": c.field() }),
            },
            MissionError::UnknownPath { valid, .. } => Failure {
                code: 2,
                kind: "unknown_path",
                message: e.to_string(),
                extra: json!({ "valid_paths": valid }),
            },
            MissionError::Jobs(_) => Failure::usage("invalid_jobs", &e),
            _ => Failure::evaluation("evaluation_failed", &e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::usage("usage", e.to_string().trim_end()).report(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(MissionError::Jobs(0).into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Failure::evaluation("thread_pool", e))?;
    match cli.command {
        Command::Evaluate { scenario, trace_dir } => evaluate(&scenario, trace_dir, jobs),
        Command::ResolutionMap { scenario, path } => resolution_map(&scenario, &path),
        Command::Image { scenario, sim, out_dir } => image(&scenario, &sim, &out_dir),
        Command::Verify { scenario, sim } => verify(&scenario, &sim),
    }
}

fn load(source: &str) -> Result<Scenario, Failure> {
    load_scenario(source).map_err(|e| MissionError::Config(e).into())
}

fn find_path<'a>(scenario: &'a Scenario, name: &str) -> Result<&'a NamedPath, Failure> {
    scenario.path(name).ok_or_else(|| {
        MissionError::UnknownPath {
            name: name.into(),
            valid: scenario.path_names().into_iter().map(String::from).collect(),
        }
        .into()
    })
}

fn write_file(path: PathBuf, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(&path, contents).map_err(|e| Failure::evaluation("io", format!("{}: {e}", path.display())))
}

fn evaluate(source: &str, trace_dir: Option<PathBuf>, jobs: usize) -> Result<(), Failure> {
    let scenario = load(source)?;
    let report = evaluate_mission(&scenario, jobs)?;
    print!("{}", report.to_csv());
    eprint!("{}", report.to_table());
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(&dir).map_err(|e| Failure::evaluation("io", format!("{}: {e}", dir.display())))?;
        for row in &report.rows {
            if let Ok(m) = &row.outcome {
                write_file(dir.join(format!("{}_threat.csv", row.name)), m.threat.trace_csv())?;
                write_file(dir.join(format!("{}_link.csv", row.name)), m.link.trace_csv())?;
                write_file(dir.join(format!("{}_resolution.csv", row.name)), m.resolution.samples_csv())?;
            }
        }
    }
    if report.has_failures() {
        let failed: Vec<&str> = report.rows.iter().filter(|r| r.outcome.is_err()).map(|r| r.name.as_str()).collect();
        return Err(Failure {
            code: 1,
            kind: "evaluation_failed",
            message: format!("{} of {} paths failed", failed.len(), report.rows.len()),
            extra: json!({ "failed_paths": failed }),
        });
    }
    Ok(())
}

fn geometry_for(scenario: &Scenario, name: &str) -> Result<(BistaticGeometry, ApertureWindow), Failure> {
    let named = find_path(scenario, name)?;
    let geometry = BistaticGeometry::new(scenario.illuminator, &named.path);
    let window = aperture_window(scenario, &named.path).map_err(MissionError::from)?;
    Ok((geometry, window))
}

fn resolution_map(source: &str, name: &str) -> Result<(), Failure> {
    let scenario = load(source)?;
    let (geometry, window) = geometry_for(&scenario, name)?;
    let res =
        scene_resolution_evaluator(&geometry, &window, &scenario.scene, &scenario.radar).map_err(MissionError::from)?;
    print!("{}", res.samples_csv());
    Ok(())
}

fn image(source: &str, sim: &SimArgs, out_dir: &std::path::Path) -> Result<(), Failure> {
    let scenario = load(source)?;
    let (geometry, window) = geometry_for(&scenario, &sim.path)?;
    let bp = scene_image(&scenario.scene, &geometry, &window, &scenario.radar, &sim.options())
        .map_err(MissionError::from)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::evaluation("io", format!("{}: {e}", out_dir.display())))?;
    let bin = out_dir.join(format!("{}.psim", sim.path));
    let csv = out_dir.join(format!("{}_db.csv", sim.path));
    bp.image.save(&bin, &csv).map_err(|e| Failure::evaluation("io", e))?;
    let g = bp.image.grid;
    println!(
        "image {}x{} px at {:.3} m, origin ({:.3}, {:.3}), {} targets",
        g.n_x, g.n_y, g.spacing, g.origin.x, g.origin.y, sim.targets
    );
    println!("wrote {}", bin.display());
    println!("wrote {}", csv.display());
    if bp.out_of_gate > 0 {
        eprintln!("warning: {} pixel-pulse pairs fell outside the fast-time gate", bp.out_of_gate);
    }
    Ok(())
}

fn verify(source: &str, sim: &SimArgs) -> Result<(), Failure> {
    let scenario = load(source)?;
    let (geometry, window) = geometry_for(&scenario, &sim.path)?;
    let checks = verify_resolution(&scenario.scene, &geometry, &window, &scenario.radar, &sim.options())
        .map_err(MissionError::from)?;
    let mut out = std::io::stdout().lock();
    for c in checks {
        let p = c.predicted.target;
        writeln!(
            out,
            "{} target=({:.1},{:.1}) predicted_s_c_m2={:.4} measured_area_m2={:.4} ratio={:.4} normalized_ratio={:.4} \
             rho_r_meas_m={:.4} rho_a_meas_m={:.4} pslr_db={}",
            c.role.label(),
            p.x,
            p.y,
            c.predicted.s_c,
            c.measured.cell_area_meas,
            c.ratio,
            c.normalized_ratio,
            c.measured.rho_r_meas,
            c.measured.rho_a_meas,
            c.measured.pslr.map_or("n/a".to_string(), |v| format!("{v:.2}")),
        )
        .map_err(|e| Failure::evaluation("io", e))?;
    }
    Ok(())
}
