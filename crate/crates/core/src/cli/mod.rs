//! Command-line front end: `validate`, `compare`, `bench` and `fixture`.
//!
//! Exit status of `validate`: 0 valid, 1 collision, 2 inconclusive,
//! 3 input error. The other commands return 0 or 3.

pub mod adversarial;
pub mod bench;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::ccd::{PathValidationResult, Validator, Verdict};
use crate::discretized::validate_discretized;
use crate::geometry::{Pose, Vec3};
use crate::model::{load_scene, Scene};
use crate::path::{load_path, PathFile, PiecewisePath, StraightPath};
use bench::{format_summary, run_bench, write_summary_csv, BenchConfig, Method};

pub const EXIT_VALID: i32 = 0;
pub const EXIT_COLLISION: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "cdpr-ccd", version, about = "Continuous collision validation for cable robots carrying an arm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Continuous,
    Disc,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate one path file.
    Validate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_enum, default_value = "continuous")]
        method: MethodArg,
        /// Step of the discretized method, seconds.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Run every method on one path file and print the verdicts side by side.
    Compare {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        tau: Vec<f64>,
    },
    /// Benchmark on seeded random straight paths.
    Bench {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        tau: Vec<f64>,
        /// Per-path CSV; the summary goes next to it with a `.summary.csv` suffix.
        #[arg(long)]
        out: PathBuf,
        /// Append crafted thin-window paths (default 5 when given without a value).
        #[arg(long, num_args = 0..=1, default_missing_value = "5", default_value_t = 0)]
        adversarial: usize,
        /// Keep the arm still on every path.
        #[arg(long)]
        freeze_arm: bool,
        /// Platform position box as `xmin,ymin,zmin,xmax,ymax,zmax`.
        #[arg(long = "box", value_delimiter = ',', num_args = 6)]
        bounds: Option<Vec<f64>>,
        /// Largest start/goal rotation angle, radians.
        #[arg(long, default_value_t = 0.5)]
        max_rotation: f64,
        /// Duration range `lo,hi`, seconds.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        durations: Option<Vec<f64>>,
    },
    /// Write the synthetic example scene, its meshes and example paths into a directory.
    Fixture {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` and runs the command, writing reports to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_VALID;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_INPUT
        }
    }
}

/// Example path files shipped with the synthetic scene.
pub fn example_paths() -> Vec<(&'static str, PiecewisePath)> {
    let scene = crate::fixture::synthetic_cdpr();
    let at = |x, y, z| Pose::from_translation(Vec3::new(x, y, z));
    let q0 = [0.0, 0.3, -0.4, 0.0];
    let q1 = [1.0, -0.2, 0.5, 0.8];
    let free = StraightPath::between(&at(0.0, 0.0, 3.0), &at(0.6, 0.4, 3.3), &q0, &q1, 2.0).expect("valid path");
    let pillar = StraightPath::between(&at(-1.0, 1.5, 3.0), &at(1.8, -1.5, 3.0), &q0, &q0, 2.0).expect("valid path");
    let config = BenchConfig {
        freeze_arm: true,
        ..BenchConfig::default()
    };
    let thin = adversarial::craft_thin_window(&scene, &config, &mut ChaCha8Rng::seed_from_u64(3), 10.0, 0.1, 0.04)
        .expect("the synthetic scene admits a thin window");
    vec![
        ("free.json", PiecewisePath::single(free)),
        ("pillar.json", PiecewisePath::single(pillar)),
        ("thin_window.json", PiecewisePath::single(thin.path)),
    ]
}

fn load_inputs(scene: &PathBuf, path: &PathBuf) -> Result<(Scene, PiecewisePath), String> {
    let scene_data = load_scene(scene).map_err(|e| format!("{}: {e}", scene.display()))?;
    let path_data = load_path(path, scene_data.arm.len()).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((scene_data, path_data))
}

fn run_method(scene: &Scene, path: &PiecewisePath, method: Method) -> Result<(PathValidationResult, f64), String> {
    let start = Instant::now();
    let result = match method {
        Method::Continuous => Validator::new(scene).validate(path),
        Method::Discretized(tau) => validate_discretized(scene, path, tau),
    }
    .map_err(|e| e.to_string())?;
    Ok((result, start.elapsed().as_secs_f64()))
}

fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Valid => EXIT_VALID,
        Verdict::Collision => EXIT_COLLISION,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Machine-readable form of a validation result.
pub fn result_json(method: Method, result: &PathValidationResult, time_s: f64) -> serde_json::Value {
    let v = |p: Vec3| [p.x, p.y, p.z];
    json!({
        "method": method.to_string(),
        "verdict": result.verdict.to_string(),
        "valid_prefix": result.valid_prefix.map(|(a, b)| [a, b]),
        "report": result.report.map(|r| json!({
            "pair": r.kind.to_string(),
            "t": r.t,
            "witness_a": v(r.witness_a),
            "witness_b": v(r.witness_b),
            "distance": r.distance,
        })),
        "probes": result.probes,
        "time_s": time_s,
    })
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Validate {
            scene,
            path,
            method,
            tau,
            json,
        } => {
            let method = match (method, tau) {
                (MethodArg::Continuous, _) => Method::Continuous,
                (MethodArg::Disc, Some(t)) if t > 0.0 => Method::Discretized(t),
                (MethodArg::Disc, _) => return Err("--method disc needs a positive --tau".into()),
            };
            let (scene, path) = load_inputs(&scene, &path)?;
            let (result, time) = run_method(&scene, &path, method)?;
            if json {
                writeln!(out, "{:#}", result_json(method, &result, time)).map_err(io)?;
            } else {
                writeln!(out, "{method}: {}", result.verdict).map_err(io)?;
                if let Some(report) = &result.report {
                    writeln!(out, "first collision: {report}").map_err(io)?;
                }
                match result.valid_prefix {
                    Some((a, b)) => writeln!(out, "certified prefix: [{a:.6}, {b:.6}] s").map_err(io)?,
                    None => writeln!(out, "certified prefix: empty").map_err(io)?,
                }
                writeln!(out, "probes: {}, time: {:.3} ms", result.probes, time * 1e3).map_err(io)?;
            }
            Ok(exit_code(result.verdict))
        }
        Command::Compare { scene, path, tau } => {
            let (scene, path) = load_inputs(&scene, &path)?;
            let mut methods = vec![Method::Continuous];
            methods.extend(tau.iter().map(|&t| Method::Discretized(t)));
            let mut rows = Vec::new();
            for m in methods {
                if let Method::Discretized(t) = m {
                    if !(t > 0.0) {
                        return Err(format!("step {t} is not positive"));
                    }
                }
                rows.push((m, run_method(&scene, &path, m)?));
            }
            let reference = rows[0].1 .0.verdict;
            writeln!(out, "{:<12} {:<13} {:>12} {:>8} {:>10}", "method", "verdict", "collision t", "probes", "ms").map_err(io)?;
            for (m, (r, time)) in &rows {
                let t = r.report.map_or("-".into(), |rep| format!("{:.4}", rep.t));
                let flag = if r.verdict != reference { "  <- disagrees" } else { "" };
                writeln!(
                    out,
                    "{:<12} {:<13} {:>12} {:>8} {:>10.3}{flag}",
                    m.to_string(),
                    r.verdict.to_string(),
                    t,
                    r.probes,
                    time * 1e3
                )
                .map_err(io)?;
            }
            Ok(EXIT_VALID)
        }
        Command::Bench {
            scene,
            n,
            seed,
            tau,
            out: csv_path,
            adversarial,
            freeze_arm,
            bounds,
            max_rotation,
            durations,
        } => {
            let mut config = BenchConfig {
                n_paths: n,
                seed,
                taus: tau,
                max_rotation,
                freeze_arm,
                adversarial,
                ..BenchConfig::default()
            };
            if let Some(b) = bounds {
                config.box_min = Vec3::new(b[0], b[1], b[2]);
                config.box_max = Vec3::new(b[3], b[4], b[5]);
            }
            if let Some(d) = durations {
                config.durations = (d[0], d[1]);
            }
            config.check()?;
            let scene = load_scene(&scene).map_err(|e| format!("{}: {e}", scene.display()))?;
            let report = run_bench(&scene, &config, |done, total| {
                if done % 100 == 0 || done == total {
                    log::info!("{done}/{total} paths");
                }
            })
            .map_err(|e| e.to_string())?;
            let file = std::fs::File::create(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?;
            report.write_csv(file).map_err(|e| e.to_string())?;
            let summary_path = csv_path.with_extension("summary.csv");
            let file =
                std::fs::File::create(&summary_path).map_err(|e| format!("{}: {e}", summary_path.display()))?;
            write_summary_csv(&report.summary(), file).map_err(|e| e.to_string())?;
            write!(out, "{}", format_summary(&report)).map_err(io)?;
            Ok(EXIT_VALID)
        }
        Command::Fixture { out: dir } => {
            let fail = |e: std::io::Error| format!("{}: {e}", dir.display());
            crate::fixture::write_fixture_files(&dir).map_err(fail)?;
            for (name, path) in example_paths() {
                std::fs::write(dir.join(name), PathFile::from_piecewise(&path).to_json() + "\n").map_err(fail)?;
            }
            writeln!(out, "wrote {}", dir.display()).map_err(io)?;
            Ok(EXIT_VALID)
        }
    }
}
