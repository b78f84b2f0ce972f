//! Random-path benchmark: every path is validated by the continuous method
//! and by the fixed-step baseline at each requested step, and verdicts are
//! scored against the continuous one.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adversarial::craft_thin_window;
use crate::bounds::{BoundsError, Configuration, PathMotion};
use crate::ccd::{validate_straight_path, Counters, PathValidationResult, Validator, Verdict, DEFAULT_ITERATION_CAP};
use crate::discretized::{check_configuration, validate_discretized_straight};
use crate::geometry::{exp_rotation, Pose, Vec3};
use crate::model::{enumerate_collision_elements, PairKind, Scene};
use crate::path::StraightPath;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub taus: Vec<f64>,
    pub box_min: Vec3,
    pub box_max: Vec3,
    pub max_rotation: f64,
    pub durations: (f64, f64),
    pub freeze_arm: bool,
    /// Crafted thin-window paths appended to the random ones.
    pub adversarial: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            seed: 0,
            taus: vec![0.1, 0.01, 0.001],
            box_min: Vec3::new(-2.0, -2.0, 2.0),
            box_max: Vec3::new(2.0, 2.0, 4.5),
            max_rotation: 0.5,
            durations: (1.0, 3.0),
            freeze_arm: false,
            adversarial: 0,
        }
    }
}

impl BenchConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.n_paths == 0 {
            return Err("n must be positive".into());
        }
        if !(0..3).all(|k| self.box_min[k] <= self.box_max[k]) {
            return Err("box minimum exceeds maximum".into());
        }
        if !(self.durations.0 > 0.0 && self.durations.0 <= self.durations.1) {
            return Err(format!("bad duration range {:?}", self.durations));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0)) {
            return Err(format!("step {t} is not positive"));
        }
        if !(self.max_rotation >= 0.0 && self.max_rotation < std::f64::consts::PI) {
            return Err(format!("max rotation {} outside [0, π)", self.max_rotation));
        }
        Ok(())
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_pose(rng: &mut ChaCha8Rng, config: &BenchConfig) -> Pose {
    let p = Vec3::from_fn(|k, _| {
        let (lo, hi) = (config.box_min[k], config.box_max[k]);
        if lo < hi {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    });
    let angle = if config.max_rotation > 0.0 {
        rng.random_range(0.0..config.max_rotation)
    } else {
        0.0
    };
    Pose::new(exp_rotation(&random_unit(rng), angle), p)
}

fn random_joints(rng: &mut ChaCha8Rng, scene: &Scene) -> Vec<f64> {
    scene
        .arm
        .iter()
        .map(|j| {
            if j.limits.0 < j.limits.1 {
                rng.random_range(j.limits.0..j.limits.1)
            } else {
                j.limits.0
            }
        })
        .collect()
}

/// One candidate path from the benchmark distribution; `duration` overrides the sampled one.
pub fn sample_path(scene: &Scene, config: &BenchConfig, rng: &mut ChaCha8Rng, duration: Option<f64>) -> StraightPath {
    let a = random_pose(rng, config);
    let b = random_pose(rng, config);
    let q0 = random_joints(rng, scene);
    let q1 = if config.freeze_arm {
        q0.clone()
    } else {
        random_joints(rng, scene)
    };
    let (lo, hi) = config.durations;
    let t = duration.unwrap_or_else(|| if lo < hi { rng.random_range(lo..hi) } else { lo });
    StraightPath::between(&a, &b, &q0, &q1, t).expect("rotations below a half turn")
}

/// Whether the path can be validated and starts collision-free.
pub fn usable_start(scene: &Scene, kinds: &[PairKind], path: &StraightPath) -> bool {
    if PathMotion::new(scene, path).is_err() {
        return false;
    }
    let config = Configuration::new(scene, *path.start_pose(), path.q_start());
    matches!(check_configuration(scene, kinds, &config, 0.0, &mut Counters::default()), Ok(None))
}

/// `n` usable random paths and the number of rejected draws.
pub fn generate_paths(scene: &Scene, config: &BenchConfig, rng: &mut ChaCha8Rng) -> (Vec<StraightPath>, u64) {
    let kinds = enumerate_collision_elements(scene);
    let mut paths = Vec::with_capacity(config.n_paths);
    let mut rejected = 0;
    while paths.len() < config.n_paths {
        let path = sample_path(scene, config, rng, None);
        if usable_start(scene, &kinds, &path) {
            paths.push(path);
        } else {
            rejected += 1;
        }
    }
    (paths, rejected)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Continuous,
    Discretized(f64),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Continuous => f.write_str("continuous"),
            Method::Discretized(tau) => write!(f, "tau={tau}"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuous" => Ok(Method::Continuous),
            _ => s
                .strip_prefix("tau=")
                .and_then(|t| t.parse().ok())
                .map(Method::Discretized)
                .ok_or_else(|| format!("unknown method `{s}`")),
        }
    }
}

fn parse_verdict(s: &str) -> Result<Verdict, String> {
    match s {
        "valid" => Ok(Verdict::Valid),
        "collision" => Ok(Verdict::Collision),
        "inconclusive" => Ok(Verdict::Inconclusive),
        _ => Err(format!("unknown verdict `{s}`")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub path_id: usize,
    pub method: Method,
    pub verdict: Verdict,
    pub time_s: f64,
    pub first_collision_t: Option<f64>,
    pub n_probes: u64,
}

impl PathRecord {
    fn new(path_id: usize, method: Method, result: &PathValidationResult, time_s: f64) -> Self {
        Self {
            path_id,
            method,
            verdict: result.verdict,
            time_s,
            first_collision_t: result.report.map(|r| r.t),
            n_probes: result.probes,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    path_id: usize,
    method: String,
    verdict: String,
    time_s: f64,
    first_collision_t: Option<f64>,
    n_probes: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub methods: Vec<Method>,
    pub records: Vec<PathRecord>,
    /// Random draws rejected because they started in collision or left the workspace.
    pub resampled: u64,
    /// Mean time spent computing `Vmax` for a path before the continuous run; not part of `time_s`.
    pub bind_s: f64,
}

/// Runs the benchmark. `progress` is called after each path.
pub fn run_bench(
    scene: &Scene,
    config: &BenchConfig,
    mut progress: impl FnMut(usize, usize),
) -> Result<BenchReport, BoundsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut paths, resampled) = generate_paths(scene, config, &mut rng);
    let frozen = BenchConfig {
        freeze_arm: true,
        ..config.clone()
    };
    let mut crafted = 0;
    while crafted < config.adversarial {
        if let Some(w) = craft_thin_window(scene, &frozen, &mut rng, 10.0, 0.1, 0.04) {
            paths.push(w.path);
            crafted += 1;
        }
    }

    let kinds = enumerate_collision_elements(scene);
    let mut methods = vec![Method::Continuous];
    methods.extend(config.taus.iter().map(|&t| Method::Discretized(t)));
    let validator = Validator::with_elements(scene, kinds.clone());
    let mut records = Vec::with_capacity(paths.len() * methods.len());
    let mut bind_total = 0.0;
    for (id, path) in paths.iter().enumerate() {
        for &method in &methods {
            let mut elements = Vec::new();
            if method == Method::Continuous {
                let start = Instant::now();
                elements = validator.bind(path)?;
                bind_total += start.elapsed().as_secs_f64();
            }
            let start = Instant::now();
            let result = match method {
                Method::Continuous => {
                    validate_straight_path(&mut elements, scene, path, DEFAULT_ITERATION_CAP, &mut Counters::default())?
                }
                Method::Discretized(tau) => {
                    validate_discretized_straight(scene, &kinds, path, tau, &mut Counters::default())?
                }
            };
            records.push(PathRecord::new(id, method, &result, start.elapsed().as_secs_f64()));
        }
        progress(id + 1, paths.len());
    }
    Ok(BenchReport {
        methods,
        bind_s: bind_total / paths.len().max(1) as f64,
        records,
        resampled,
    })
}

impl BenchReport {
    pub fn write_csv(&self, out: impl io::Write) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(CsvRow {
                path_id: r.path_id,
                method: r.method.to_string(),
                verdict: r.verdict.to_string(),
                time_s: r.time_s,
                first_collision_t: r.first_collision_t,
                n_probes: r.n_probes,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads records written by [`BenchReport::write_csv`]. The resample count is not part of the file.
    pub fn read_csv(input: impl io::Read) -> Result<Self, String> {
        let mut records = Vec::new();
        let mut methods = Vec::new();
        for row in csv::Reader::from_reader(input).deserialize::<CsvRow>() {
            let row = row.map_err(|e| e.to_string())?;
            let method: Method = row.method.parse()?;
            if !methods.contains(&method) {
                methods.push(method);
            }
            records.push(PathRecord {
                path_id: row.path_id,
                method,
                verdict: parse_verdict(&row.verdict)?,
                time_s: row.time_s,
                first_collision_t: row.first_collision_t,
                n_probes: row.n_probes,
            });
        }
        Ok(Self {
            methods,
            records,
            resampled: 0,
            bind_s: 0.0,
        })
    }

    fn reference(&self) -> Vec<Option<Verdict>> {
        let n = self.records.iter().map(|r| r.path_id + 1).max().unwrap_or(0);
        let mut v = vec![None; n];
        for r in self.records.iter().filter(|r| r.method == Method::Continuous) {
            v[r.path_id] = Some(r.verdict);
        }
        v
    }

    /// Timing statistics per method and confusion category.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let reference = self.reference();
        let mut rows = Vec::new();
        for &method in &self.methods {
            let mine: Vec<_> = self.records.iter().filter(|r| r.method == method).collect();
            for category in Category::ALL {
                let times: Vec<f64> = mine
                    .iter()
                    .filter(|r| category.matches(reference[r.path_id], r.verdict))
                    .map(|r| r.time_s)
                    .collect();
                rows.push(SummaryRow::new(method, category, &times));
            }
        }
        rows
    }

    pub fn mean_time(&self, method: Method) -> f64 {
        let times: Vec<f64> = self.records.iter().filter(|r| r.method == method).map(|r| r.time_s).collect();
        times.iter().sum::<f64>() / times.len().max(1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    TruePositive,
    TrueNegative,
    FalseNegative,
    FalsePositive,
    Inconclusive,
    All,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::TruePositive,
        Category::TrueNegative,
        Category::FalseNegative,
        Category::FalsePositive,
        Category::Inconclusive,
        Category::All,
    ];

    fn matches(self, reference: Option<Verdict>, verdict: Verdict) -> bool {
        use Verdict::*;
        match self {
            Category::All => true,
            Category::Inconclusive => reference == Some(Inconclusive) || verdict == Inconclusive,
            _ if reference == Some(Inconclusive) || verdict == Inconclusive => false,
            Category::TruePositive => reference == Some(Collision) && verdict == Collision,
            Category::TrueNegative => reference == Some(Valid) && verdict == Valid,
            Category::FalseNegative => reference == Some(Collision) && verdict == Valid,
            Category::FalsePositive => reference == Some(Valid) && verdict == Collision,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::TruePositive => "true_positive",
            Category::TrueNegative => "true_negative",
            Category::FalseNegative => "false_negative",
            Category::FalsePositive => "false_positive",
            Category::Inconclusive => "inconclusive",
            Category::All => "all",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub category: String,
    pub count: usize,
    pub min_s: Option<f64>,
    pub mean_s: Option<f64>,
    pub max_s: Option<f64>,
}

impl SummaryRow {
    fn new(method: Method, category: Category, times: &[f64]) -> Self {
        let (min, max) = times
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        let some = !times.is_empty();
        Self {
            method: method.to_string(),
            category: category.to_string(),
            count: times.len(),
            min_s: some.then_some(min),
            mean_s: some.then(|| times.iter().sum::<f64>() / times.len() as f64),
            max_s: some.then_some(max),
        }
    }
}

pub fn write_summary_csv(rows: &[SummaryRow], out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table of the summary.
pub fn format_summary(report: &BenchReport) -> String {
    let ms = |x: Option<f64>| x.map_or("-".to_string(), |t| format!("{:.3}", t * 1e3));
    let mut out = format!(
        "{:<12} {:<15} {:>6} {:>10} {:>10} {:>10}\n",
        "method", "paths", "count", "min ms", "mean ms", "max ms"
    );
    for r in report.summary() {
        if r.count == 0 && r.category != "all" {
            continue;
        }
        out += &format!(
            "{:<12} {:<15} {:>6} {:>10} {:>10} {:>10}\n",
            r.method,
            r.category,
            r.count,
            ms(r.min_s),
            ms(r.mean_s),
            ms(r.max_s)
        );
    }
    out += &format!("resampled start configurations: {}\n", report.resampled);
    if report.bind_s > 0.0 {
        out += &format!("Vmax precomputation (not in the times above): {:.3} ms per path\n", report.bind_s * 1e3);
    }
    out
}
