//! The staged pipeline behind the command line: configuration, the checks
//! each stage runs and the artifacts written to the output directory.
//!
//! Every stage records its outcome; a stage whose input failed is skipped.
//! Checks that the theory guarantees are collected as invariants, and the
//! run fails (exit code 2) iff one of them does not hold. Reports contain
//! no timings or paths, so equal configurations give byte-identical files.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cone::{base_density, build_cone, cone_density, cone_mass_growth, first_variation, gradient_check, Bump, VectorField};
use crate::curve::{Mass, Varifold1};
use crate::error::{Error, Result};
use crate::index::IndexResult;
use crate::io;
use crate::network::{
    classify_junction, fixtures, integer_density_filter, network_is_stationary, GeodesicNetwork, JunctionClass,
};
use crate::rng;
use crate::search::{closed_geodesic_search, GeodesicSummary};
use crate::surface::{EllipsoidParams, Vec3};
use crate::sweepout::{
    concentration_profile, crofton_mass, distance_to_linear_product, evaluate_cycle, nested_scans, CroftonEstimate,
    SweepoutFamily,
};
use crate::tolerances;
use crate::widths::{candidate_table, counterexample_report, principal_index, width_assignment, CandidateTable, IndexOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Named tolerances a run may override with `tol.NAME=VALUE`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// `|sup M(F_k) − 2π|` for `k ≤ 3` on the round sphere.
    pub width_low: f64,
    /// `|sup M(F_k) − 4π|` for `4 ≤ k ≤ 8` on the round sphere.
    pub width_high: f64,
    /// Projective distance of some argmax to a product of linear forms.
    pub product: f64,
    /// Relative Crofton/arc-length gap allowed besides `3·SE`.
    pub crofton: f64,
    /// Eigenvalue modulus counted as zero; default `10·(2π/n)²`.
    pub zero_tol: Option<f64>,
    pub junction: f64,
    pub cone_density: f64,
    pub cone_growth: f64,
    /// `|δC(X)| / ‖X‖∞` for the Y-cone.
    pub first_variation: f64,
    /// Allowed distance of the gradient-check error ratio from 10.
    pub gradient_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            width_low: 1e-2,
            width_high: 5e-2,
            product: 1e-2,
            crofton: 1e-2,
            zero_tol: None,
            junction: tolerances::JUNCTION_RESIDUAL,
            cone_density: 0.03,
            cone_growth: 0.05,
            first_variation: 1e-3,
            gradient_ratio: 2.0,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 10] = [
        "width_low",
        "width_high",
        "product",
        "crofton",
        "zero_tol",
        "junction",
        "cone_density",
        "cone_growth",
        "first_variation",
        "gradient_ratio",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config(format!("tolerance {name} = {value} must be positive")));
        }
        let slot = match name {
            "width_low" => &mut self.width_low,
            "width_high" => &mut self.width_high,
            "product" => &mut self.product,
            "crofton" => &mut self.crofton,
            "zero_tol" => {
                self.zero_tol = Some(value);
                return Ok(());
            }
            "junction" => &mut self.junction,
            "cone_density" => &mut self.cone_density,
            "cone_growth" => &mut self.cone_growth,
            "first_variation" => &mut self.first_variation,
            "gradient_ratio" => &mut self.gradient_ratio,
            _ => {
                return Err(Error::Config(format!(
                    "unknown tolerance '{name}' (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub surface: EllipsoidParams,
    /// Icosahedral subdivision level of the contouring grid.
    pub level: u32,
    /// Uniform samples per sweepout scan.
    pub budget: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: PathBuf,
    /// Network file for `network-check`; the labeled fixtures otherwise.
    pub network: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            surface: EllipsoidParams::sphere(),
            level: 6,
            budget: 5000,
            seed: 1,
            tolerances: Tolerances::default(),
            out: PathBuf::from("widthlab-out"),
            network: None,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

/// `a1,a2,a3`.
pub fn parse_surface(value: &str) -> Result<EllipsoidParams> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("surface '{value}' must be a1,a2,a3")));
    }
    let mut a = [0.0; 3];
    for (slot, p) in a.iter_mut().zip(&parts) {
        *slot = parse_value("surface", p)?;
    }
    EllipsoidParams::new(a[0], a[1], a[2]).map_err(|e| Error::Config(e.to_string()))
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one setting. Tolerances are `tol.NAME`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "surface" => self.surface = parse_surface(value)?,
            "level" => {
                let level: u32 = parse_value(key, value)?;
                if !(4..=7).contains(&level) {
                    return Err(Error::Config(format!("level {level} outside 4..=7")));
                }
                self.level = level;
            }
            "budget" => {
                let budget: usize = parse_value(key, value)?;
                if budget == 0 {
                    return Err(Error::Config("budget must be positive".into()));
                }
                self.budget = budget;
            }
            "seed" => self.seed = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "network" => self.network = Some(PathBuf::from(value)),
            _ => match key.strip_prefix("tol.") {
                Some(name) => self.tolerances.set(name, parse_value(key, value)?)?,
                None => return Err(Error::Config(format!("unknown config key '{key}'"))),
            },
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_config_text(text)? {
            self.apply(&k, &v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Scan,
    ConeCheck,
    NetworkCheck,
    Index,
    Widths,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::ConeCheck => "cone-check",
            Command::NetworkCheck => "network-check",
            Command::Index => "index",
            Command::Widths => "widths",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub surface: [f64; 3],
    pub level: u32,
    pub budget: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: &'static str,
    /// `ok`, `error` or `skipped`.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub k: usize,
    pub budget: usize,
    pub seed: u64,
    pub sup_mass: f64,
    pub argmax: Vec<f64>,
    pub evaluations: usize,
    /// `pass`, `fail`, or `n/a` off the round sphere.
    pub crofton_check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crofton: Option<CroftonEstimate>,
    pub arclength_mass: f64,
    pub max_concentration_r01: Option<f64>,
    pub product_distance: Option<f64>,
    pub confidence: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayCheck {
    pub varifold: &'static str,
    pub point: [f64; 3],
    pub cone: f64,
    pub base: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldCheck {
    pub center: [f64; 3],
    pub radius: f64,
    pub first_variation: f64,
    pub sup_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeReport {
    pub densities: Vec<RayCheck>,
    pub max_density_error: f64,
    /// `(varifold, growth, base mass)`.
    pub growth: Vec<(&'static str, f64, f64)>,
    pub fields: Vec<FieldCheck>,
    pub max_relative_variation: f64,
    pub gradient_steps: Vec<(f64, f64, f64)>,
    pub gradient_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkVerdict {
    pub name: String,
    pub classes: Vec<JunctionClass>,
    pub densities: Vec<f64>,
    pub integral: bool,
    pub stationary: bool,
    pub residuals: Vec<f64>,
    pub mass: f64,
    /// Hand labels agree; absent for a user-supplied network.
    pub matches_label: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexRow {
    pub geodesic: String,
    pub i: usize,
    pub covering: u32,
    pub length: f64,
    pub coarse: IndexResult,
    pub fine: IndexResult,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub cap: f64,
    pub geodesics: Vec<GeodesicSummary>,
    pub primitive_classes: usize,
    pub fixed_points: usize,
    pub collapsed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: ConfigSummary,
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scans: Option<Vec<ScanRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub networks: Option<Vec<NetworkVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<Vec<IndexRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<CandidateTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widths: Option<crate::widths::WidthAssignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<crate::widths::CounterexampleReport>,
    pub invariants: Vec<Check>,
    pub warnings: Vec<String>,
    /// Width statements taken from theory rather than computed.
    pub assumptions: Vec<&'static str>,
    pub exit_code: i32,
}

/// Files a run writes, relative to the output directory, with contents.
pub type Artifacts = BTreeMap<String, String>;

struct Run<'a> {
    cfg: &'a RunConfig,
    report: Report,
    files: Artifacts,
}

impl Run<'_> {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.report.invariants.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn stage<T>(&mut self, name: &'static str, r: Result<T>) -> Option<T> {
        let (status, message, value) = match r {
            Ok(v) => ("ok", None, Some(v)),
            Err(e) => ("error", Some(e.to_string()), None),
        };
        if status == "error" {
            self.check(format!("stage {name}"), false, message.clone().unwrap_or_default());
        }
        self.report.stages.push(StageRecord { name, status, message });
        value
    }

    fn skip(&mut self, name: &'static str, why: &str) {
        self.report.stages.push(StageRecord { name, status: "skipped", message: Some(why.into()) });
    }

    fn dump(&mut self, name: String, body: String) {
        self.files.insert(format!("curves/{name}"), format!("# seed {}\n{body}", self.cfg.seed));
    }
}

/// Runs `cmd` without touching the file system.
pub fn execute(cmd: Command, cfg: &RunConfig) -> (Report, Artifacts) {
    let mut run = Run {
        cfg,
        report: Report {
            command: cmd.name(),
            config: ConfigSummary {
                surface: cfg.surface.coefficients(),
                level: cfg.level,
                budget: cfg.budget,
                seed: cfg.seed,
                tolerances: cfg.tolerances.clone(),
            },
            stages: Vec::new(),
            scans: None,
            cone: None,
            networks: None,
            index: None,
            candidates: None,
            search: None,
            widths: None,
            counterexample: None,
            invariants: Vec::new(),
            warnings: Vec::new(),
            assumptions: Vec::new(),
            exit_code: EXIT_OK,
        },
        files: Artifacts::new(),
    };
    let all = cmd == Command::All;
    if all || cmd == Command::Scan {
        let rows = scan_stage(&mut run);
        run.report.scans = rows;
    }
    if all || cmd == Command::ConeCheck {
        let r = cone_stage(cfg);
        if let Some(c) = run.stage("cone", r) {
            cone_checks(&mut run, &c);
            let y = fixtures::y_network(16).and_then(|n| build_cone(&Varifold1::new(n.pieces().to_vec())?, 1.0));
            if let Ok(y) = y {
                run.dump("y_cone.txt".into(), io::write_cone(&y));
            }
            run.report.cone = Some(c);
        }
    }
    if all || cmd == Command::NetworkCheck {
        network_stage(&mut run);
    }
    if all || cmd == Command::Index {
        index_stage(&mut run);
        search_stage(&mut run);
    }
    if all || cmd == Command::Widths {
        widths_stage(&mut run);
    }
    let failed = run.report.invariants.iter().any(|c| !c.passed);
    run.report.exit_code = if failed { EXIT_INVARIANT } else { EXIT_OK };
    let mut json = serde_json::to_string_pretty(&run.report).expect("report serializes");
    json.push('\n');
    run.files.insert("report.json".into(), json);
    (run.report, run.files)
}

/// Input files named by the config must exist and parse; anything else is
/// checked by the stages themselves.
pub fn validate(cmd: Command, cfg: &RunConfig) -> Result<()> {
    if let (Command::NetworkCheck | Command::All, Some(path)) = (cmd, &cfg.network) {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        io::read_network(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Runs `cmd` and writes its artifacts under `cfg.out`.
pub fn run_command(cmd: Command, cfg: &RunConfig) -> Result<Report> {
    validate(cmd, cfg)?;
    let (report, files) = execute(cmd, cfg);
    write_artifacts(&cfg.out, &files)?;
    Ok(report)
}

/// Every stage.
pub fn run_all(cfg: &RunConfig) -> Result<Report> {
    run_command(Command::All, cfg)
}

pub fn write_artifacts(dir: &Path, files: &Artifacts) -> Result<()> {
    for (name, body) in files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, body)?;
    }
    Ok(())
}

fn csv_text<F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>>(f: F) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn scan_stage(run: &mut Run) -> Option<Vec<ScanRow>> {
    let cfg = run.cfg;
    let low = cfg.budget < tolerances::MIN_SCAN_BUDGET;
    if low {
        run.report.warnings.push(format!(
            "scan budget {} below {}: results are LOW-CONFIDENCE and attainment is not checked",
            cfg.budget,
            tolerances::MIN_SCAN_BUDGET
        ));
    }
    let ks: Vec<usize> = (1..=8).collect();
    let scans = nested_scans(&cfg.surface, &ks, cfg.level, cfg.budget, cfg.seed);
    let scans = run.stage("scan", scans)?;
    let round = cfg.surface.is_round();
    let tol = &cfg.tolerances;
    let mut rows = Vec::new();
    for (k, s) in scans {
        let family = SweepoutFamily::standard(k, cfg.surface).expect("k in range");
        let contour = evaluate_cycle(&family, &s.argmax, cfg.level).expect("matching parameter");
        let arclength_mass = contour.cycle.mass();
        run.dump(format!("scan_F{k}.txt"), io::write_cycle(&contour.cycle));
        let (crofton_check, crofton, conc, product) = if round {
            let est = crofton_mass(&family.polynomial(&s.argmax), 100_000, cfg.seed).ok();
            let verdict = match &est {
                Some(e) => {
                    let gap = (e.mass - arclength_mass).abs();
                    if gap <= (tol.crofton * arclength_mass).max(3.0 * e.standard_error) {
                        "pass"
                    } else {
                        "fail"
                    }
                }
                None => "fail",
            };
            let prof = concentration_profile(&family, &s.argmax, &[0.1], cfg.level, 256, cfg.seed).ok();
            let conc = prof.map(|p| p.values[0].1);
            let product = (k >= 4).then(|| distance_to_linear_product(&s.argmax));
            (verdict, est, conc, product)
        } else {
            ("n/a", None, None, None)
        };
        rows.push(ScanRow {
            k,
            budget: cfg.budget,
            seed: cfg.seed,
            sup_mass: s.sup_mass,
            argmax: s.argmax.coefficients().to_vec(),
            evaluations: s.evaluations,
            crofton_check,
            crofton,
            arclength_mass,
            max_concentration_r01: conc,
            product_distance: product,
            confidence: if s.low_confidence { "LOW-CONFIDENCE" } else { "ok" },
        });
    }
    if round {
        for r in &rows {
            let (target, t) = if r.k <= 3 { (TAU, tol.width_low) } else { (2.0 * TAU, tol.width_high) };
            run.check(
                format!("scan F{} below degree bound", r.k),
                r.sup_mass <= target + t,
                format!("sup {:.6} vs {:.6} + {t}", r.sup_mass, target),
            );
            if !low {
                run.check(
                    format!("scan F{} attains width", r.k),
                    (r.sup_mass - target).abs() <= t,
                    format!("|{:.6} - {:.6}| <= {t}", r.sup_mass, target),
                );
            }
            run.check(format!("crofton F{}", r.k), r.crofton_check == "pass", format!("{:?}", r.crofton));
            if let Some(m) = r.max_concentration_r01 {
                let bound = 4.0 * PI * 0.1f64.sin();
                run.check(format!("no concentration F{}", r.k), m <= bound, format!("{m:.6} <= {bound:.6}"));
            }
        }
        if !low {
            let best = rows.iter().filter_map(|r| r.product_distance).fold(f64::INFINITY, f64::min);
            run.check(
                "argmax near a product of linear forms",
                best <= tol.product,
                format!("min distance {best:.3e}"),
            );
        }
    }
    let csv = csv_text(|w| {
        w.write_record(["k", "budget", "seed", "sup_mass", "argmax", "crofton_check", "max_concentration_r01", "confidence"])?;
        for r in &rows {
            let argmax = r.argmax.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
            w.write_record([
                r.k.to_string(),
                r.budget.to_string(),
                r.seed.to_string(),
                r.sup_mass.to_string(),
                argmax,
                r.crofton_check.to_string(),
                r.max_concentration_r01.map_or(String::new(), |m| m.to_string()),
                r.confidence.to_string(),
            ])?;
        }
        Ok(())
    });
    if let Some(text) = run.stage("scan-csv", csv) {
        run.files.insert("scans.csv".into(), text);
    }
    Some(rows)
}

/// The three test varifolds: an equator, two crossing great circles and
/// the Y-network.
fn test_varifolds() -> Result<Vec<(&'static str, Varifold1)>> {
    let eq = fixtures::great_circle(1, 512)?;
    let cross = fixtures::crossing_circles(PI / 2.0, 256)?;
    let y = fixtures::y_network(256)?;
    Ok(vec![
        ("equator", Varifold1::new(eq.pieces().to_vec())?),
        ("crossing", Varifold1::new(cross.pieces().to_vec())?),
        ("y", Varifold1::new(y.pieces().to_vec())?),
    ])
}

/// Ray points per test varifold.
pub const RAY_POINTS: usize = 20;

/// Random bump fields for the first-variation check.
pub const FIELDS: usize = 10;

fn uniform(seed: u64, stream: u64, count: usize) -> Vec<f64> {
    use rand::Rng;
    let mut g = rng::block_rng(seed, stream);
    (0..count).map(|_| g.gen::<f64>()).collect()
}

/// Density, mass-growth and first-variation checks on cones over the test
/// varifolds.
pub fn cone_stage(cfg: &RunConfig) -> Result<ConeReport> {
    let seed = cfg.seed;
    let mut densities = Vec::new();
    let mut growth = Vec::new();
    for (s, (name, v)) in test_varifolds()?.into_iter().enumerate() {
        let cone = build_cone(&v, 1.0)?;
        let verts: Vec<Vec3> = v.pieces().iter().flat_map(|(c, _)| c.vertices().iter().copied()).collect();
        let u = uniform(seed, 100 + s as u64, 2 * RAY_POINTS);
        for p in 0..RAY_POINTS {
            let base = verts[((u[2 * p] * verts.len() as f64) as usize).min(verts.len() - 1)];
            let y = base * (0.2 + 0.6 * u[2 * p + 1]);
            densities.push(RayCheck {
                varifold: name,
                point: [y[0], y[1], y[2]],
                cone: cone_density(&cone, &y)?.value,
                base: base_density(&cone, &y)?.value,
            });
        }
        // generic: off the cone and off the spine of the Y and crossing cones
        let y = Vec3::new(0.1, 0.2, 0.15);
        let far = build_cone(&v, 20.0 * y.norm())?;
        growth.push((name, cone_mass_growth(&far, &y)?, v.mass()));
    }
    let max_density_error = densities.iter().map(|d| (d.cone - d.base).abs() / d.base).fold(0.0, f64::max);

    let y_cone = build_cone(&Varifold1::new(fixtures::y_network(256)?.pieces().to_vec())?, 1.0)?;
    let fields: Vec<Bump> = (0..FIELDS as u64)
        .map(|i| {
            let u = uniform(seed, 200 + i, 3);
            let c = Vec3::from_vec(rng::sphere_sample(seed, 300 + i, 3)) * (0.2 + 0.4 * u[0]);
            let d = Vec3::from_vec(rng::sphere_sample(seed, 400 + i, 3));
            // support inside the unit ball, so the boundary adds nothing
            let radius = (0.1 + 0.2 * u[1]).min(0.95 - c.norm());
            Bump { center: c, radius, direction: d }
        })
        .collect();
    let checks: Vec<FieldCheck> = fields
        .iter()
        .map(|b| FieldCheck {
            center: [b.center[0], b.center[1], b.center[2]],
            radius: b.radius,
            first_variation: first_variation(&y_cone, b),
            sup_norm: b.sup_norm(),
        })
        .collect();
    let max_relative_variation = checks.iter().map(|f| f.first_variation.abs() / f.sup_norm).fold(0.0, f64::max);
    let g = gradient_check(&y_cone, &fields[0]);
    Ok(ConeReport {
        densities,
        max_density_error,
        growth,
        fields: checks,
        max_relative_variation,
        gradient_steps: g.steps,
        gradient_ratio: g.ratio,
    })
}

fn cone_checks(run: &mut Run, c: &ConeReport) {
    let tol = run.cfg.tolerances.clone();
    run.check(
        "cone density matches base density",
        c.max_density_error <= tol.cone_density,
        format!("max relative error {:.4}", c.max_density_error),
    );
    for (name, g, m) in &c.growth {
        run.check(
            format!("cone mass growth {name}"),
            (g - m).abs() / m <= tol.cone_growth,
            format!("{g:.6} vs {m:.6}"),
        );
    }
    run.check(
        "Y-cone first variation",
        c.max_relative_variation <= tol.first_variation,
        format!("max |dC(X)|/|X| = {:.3e}", c.max_relative_variation),
    );
    run.check(
        "gradient check ratio",
        (c.gradient_ratio - 10.0).abs() <= tol.gradient_ratio,
        format!("ratio {:.3}", c.gradient_ratio),
    );
}

fn verdict(name: String, net: &GeodesicNetwork, tol: f64) -> NetworkVerdict {
    let st = network_is_stationary(net, tol);
    let dens = integer_density_filter(net);
    NetworkVerdict {
        name,
        classes: net.junctions().iter().map(classify_junction).collect(),
        densities: dens.densities,
        integral: dens.integral,
        stationary: st.stationary,
        residuals: st.residuals,
        mass: net.mass(),
        matches_label: None,
    }
}

fn network_stage(run: &mut Run) {
    let tol = run.cfg.tolerances.junction;
    if let Some(path) = run.cfg.network.clone() {
        let net = fs::read_to_string(&path).map_err(Error::from).and_then(|t| io::read_network(&t));
        let Some(net) = run.stage("network", net) else { return };
        let v = verdict(path.file_name().map_or("network".into(), |n| n.to_string_lossy().into_owned()), &net, tol);
        run.check("network stationary", v.stationary, format!("residuals {:?}", v.residuals));
        run.report.networks = Some(vec![v]);
        return;
    }
    let Some(cases) = run.stage("network", fixtures::labeled(256)) else { return };
    let mut out = Vec::new();
    for c in cases {
        let mut v = verdict(c.name.into(), &c.network, tol);
        let ok = v.classes == c.classes && v.integral == c.integral && v.stationary == c.stationary;
        let balanced = !c.stationary || v.residuals.iter().all(|r| *r < 1e-12);
        v.matches_label = Some(ok);
        run.check(format!("network {}", c.name), ok && balanced, format!("{:?}", v.classes));
        out.push(v);
    }
    run.report.networks = Some(out);
}

fn index_stage(run: &mut Run) {
    let cfg = run.cfg;
    let s = cfg.surface;
    let opts = |n| IndexOptions { points_per_cover: n, zero_tol: cfg.tolerances.zero_tol };
    let rows: Result<Vec<IndexRow>> = (1..=3)
        .flat_map(|i| (1..=3u32).map(move |r| (i, r)))
        .map(|(i, r)| {
            let coarse = principal_index(&s, i, r, opts(512))?;
            let fine = principal_index(&s, i, r, opts(1024))?;
            let length = crate::surface::principal_ellipse(&s, i, 1024)?.length();
            Ok(IndexRow {
                geodesic: format!("g{i}^({r})"),
                i,
                covering: r,
                length: r as f64 * length,
                stable: (coarse.index, coarse.nullity) == (fine.index, fine.nullity),
                coarse,
                fine,
            })
        })
        .collect();
    let Some(rows) = run.stage("index", rows) else { return };
    if s.is_strictly_ordered() {
        for row in rows.iter().filter(|r| r.covering <= 2) {
            let expect = (row.i + 2 * (row.covering as usize - 1), 0);
            run.check(
                format!("index {}", row.geodesic),
                (row.coarse.index, row.coarse.nullity) == expect && row.stable,
                format!("({}, {}) expected {:?}", row.coarse.index, row.coarse.nullity, expect),
            );
        }
    }
    if s.is_round() {
        let g = &rows[6];
        run.check(
            "round control index",
            (g.coarse.index, g.coarse.nullity) == (1, 2),
            format!("({}, {})", g.coarse.index, g.coarse.nullity),
        );
    }
    run.report.index = Some(rows);
}

/// Length cap of the closed-geodesic search.
pub const SEARCH_CAP: f64 = 2.5 * PI;

fn search_stage(run: &mut Run) {
    let s = run.cfg.surface;
    let Some(out) = run.stage("search", closed_geodesic_search(&s, SEARCH_CAP)) else { return };
    for (j, g) in out.geodesics.iter().enumerate() {
        let name = match g.principal {
            Some(i) => format!("geodesic_{j}_g{i}.txt"),
            None => format!("geodesic_{j}.txt"),
        };
        run.dump(name, io::write_curves(std::slice::from_ref(g.geodesic.curve())));
    }
    let rep = SearchReport {
        cap: SEARCH_CAP,
        geodesics: out.geodesics.iter().map(|g| g.summary()).collect(),
        primitive_classes: out.primitive_classes(),
        fixed_points: out.fixed_points,
        collapsed: out.collapsed,
    };
    if s.is_strictly_ordered() && s.is_near_round() {
        run.check(
            "three closed geodesics below 2.5π",
            rep.primitive_classes == 3,
            format!("{} primitive classes", rep.primitive_classes),
        );
    }
    run.report.search = Some(rep);
}

fn widths_stage(run: &mut Run) {
    let cfg = run.cfg;
    let opts = IndexOptions { points_per_cover: 512, zero_tol: cfg.tolerances.zero_tol };
    let Some(table) = run.stage("candidates", candidate_table(&cfg.surface, opts)) else {
        run.skip("widths", "candidate table failed");
        run.skip("counterexample", "candidate table failed");
        return;
    };
    let seed = cfg.seed;
    let csv = csv_text(|w| {
        w.write_record([
            "label",
            "mass",
            "support",
            "multiplicity",
            "index",
            "nullity",
            "ambiguous",
            "first_three_ordered",
            "next_three_ordered",
            "w6_minus_w7",
            "seed",
        ])?;
        for r in &table.rows {
            w.write_record([
                r.label.clone(),
                r.mass.to_string(),
                r.support.clone(),
                r.multiplicity.to_string(),
                r.index.map_or(String::new(), |v| v.to_string()),
                r.nullity.map_or(String::new(), |v| v.to_string()),
                r.ambiguous.to_string(),
                table.first_three_ordered.to_string(),
                table.next_three_ordered.to_string(),
                table.w6_minus_w7.to_string(),
                seed.to_string(),
            ])?;
        }
        Ok(())
    });
    if let Some(text) = run.stage("candidates-csv", csv) {
        run.files.insert("candidates.csv".into(), text);
    }
    let strict = cfg.surface.is_strictly_ordered();
    if strict {
        run.check(
            "candidate orderings",
            table.first_three_ordered && table.next_three_ordered,
            "L1 < L2 < L3 forces W1 < W2 < W3 and W4 < W5 < W6",
        );
        run.check("W5 midpoint", table.midpoint_defect <= 1e-12, format!("defect {:.3e}", table.midpoint_defect));
    }
    let assignment = width_assignment(&table);
    run.report.stages.push(StageRecord { name: "widths", status: "ok", message: None });
    let csv = csv_text(|w| {
        w.write_record(["k", "candidate", "mass", "possible", "source", "seed"])?;
        for r in &assignment.rows {
            w.write_record([
                r.k.to_string(),
                r.candidate.clone().unwrap_or_default(),
                r.mass.to_string(),
                r.possible.join(";"),
                r.source.to_string(),
                seed.to_string(),
            ])?;
        }
        Ok(())
    });
    if let Some(text) = run.stage("widths-csv", csv) {
        run.files.insert("widths.csv".into(), text);
    }
    if strict {
        run.check(
            "widths strictly increasing",
            assignment.strictly_increasing,
            "assigned masses over widths 1..8",
        );
    }
    run.report.assumptions = vec![
        "widths 1..8 are realized by W1..W9 without repetition (min-max theorem, not computed)",
        "true ellipsoid widths are not computed; only arithmetic consequences are checked",
    ];
    if assignment.ambiguous {
        run.report.warnings.push("candidate masses tie: width assignment is ambiguous, counterexample skipped".into());
        run.skip("counterexample", "ambiguous width assignment");
    } else {
        if let Some(rep) = run.stage("counterexample", counterexample_report(&table, &assignment)) {
            if strict {
                run.check("every scenario violated", rep.every_scenario_violated, rep.verdict.clone());
            }
            run.report.counterexample = Some(rep);
        }
    }
    run.report.candidates = Some(table);
    run.report.widths = Some(assignment);
}

/// Human summary of a report, one line per stage and failed invariant.
pub fn summary(report: &Report) -> String {
    let mut out = String::new();
    for s in &report.stages {
        let _ = writeln!(out, "{:<15} {}{}", s.name, s.status, s.message.as_ref().map_or(String::new(), |m| format!(": {m}")));
    }
    let failed: Vec<&Check> = report.invariants.iter().filter(|c| !c.passed).collect();
    let _ = writeln!(out, "invariants: {} checked, {} failed", report.invariants.len(), failed.len());
    for c in failed {
        let _ = writeln!(out, "FAILED {}: {}", c.name, c.detail);
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    if let Some(c) = &report.counterexample {
        let _ = writeln!(out, "verdict: {}", c.verdict);
    }
    out
}
