//! Scene files and the command-line front end.
//!
//! Exit codes: 0 success, 2 schema or input error, 3 solver failure,
//! 4 no arrival at the receiver, 5 trapped ray, 6 I/O failure.

mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::finsler::{Metric, SpatialNorm};
use crate::interface::{Interface, Shape};
use crate::linalg::{Matrix, Vector};
use crate::snell::{
    critical_angle, incident_data, predict_reflection, predict_refraction, solve_reflection, solve_refraction, Media,
};
use crate::tracer::{
    convergence_study, discretize, trace, trace_all_branches, trace_discretized, BranchPolicy, GridScene, Receiver,
    Scene, Source, Termination, TraceOptions, Trajectory,
};

pub use svg::render_svg;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Minkowski,
    /// `L = (v⁰)² − n(x)² |ṽ|²`.
    Isotropic { index: ScalarExpr },
    /// Zermelo data: `h`-unit ball shifted by the wind.
    Randers {
        #[serde(default)]
        h: Option<Vec<Vec<ScalarExpr>>>,
        wind: Vec<ScalarExpr>,
    },
    Quadratic { matrix: Vec<Vec<f64>>, time_vector: Vec<f64> },
    Conformal {
        base: Vec<Vec<f64>>,
        factor: ScalarExpr,
        time_vector: Vec<f64>,
    },
    QuadraticField {
        entries: Vec<Vec<ScalarExpr>>,
        time_vector: Vec<ScalarExpr>,
    },
}

fn matrix(rows: &[Vec<f64>], dim: usize) -> Result<Matrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidMetric(format!("matrix must be {dim}x{dim}")));
    }
    Ok(Matrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

impl MetricSpec {
    pub fn build(&self, dim: usize) -> Result<Metric> {
        let vec = |v: &[f64]| -> Result<Vector> {
            if v.len() != dim {
                return Err(Error::InvalidMetric(format!("time vector must have {dim} entries")));
            }
            Ok(Vector::from_row_slice(v))
        };
        match self {
            MetricSpec::Minkowski => Ok(Metric::minkowski(dim)),
            MetricSpec::Isotropic { index } => Metric::isotropic(dim, index.clone()),
            MetricSpec::Randers { h, wind } => Metric::product(
                dim,
                SpatialNorm::Randers {
                    h: h.clone(),
                    wind: wind.clone(),
                },
            ),
            MetricSpec::Quadratic { matrix: g, time_vector } => Metric::quadratic(matrix(g, dim)?, vec(time_vector)?),
            MetricSpec::Conformal {
                base,
                factor,
                time_vector,
            } => Metric::conformal(matrix(base, dim)?, factor.clone(), vec(time_vector)?),
            MetricSpec::QuadraticField { entries, time_vector } => {
                if entries.len() != dim {
                    return Err(Error::InvalidMetric(format!("entries must be {dim}x{dim}")));
                }
                Metric::quadratic_entries(entries.clone(), time_vector.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// A ray start. `direction` is either a full vector, projected onto the
/// cone, or a spatial vector with `dim − 1` entries that is lifted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    pub start: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Cells per axis; several values run a convergence study.
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub dim: usize,
    pub bounds: BoundsSpec,
    pub medium1: MetricSpec,
    pub medium2: MetricSpec,
    pub interface: Shape,
    #[serde(default)]
    pub rays: Vec<RaySpec>,
    #[serde(default)]
    pub source: Option<Source>,
    #[serde(default)]
    pub receiver: Option<Receiver>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub max_events: Option<usize>,
    /// Grid mode discretises `medium1`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<SceneFile> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: SceneFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d < 2 {
            return Err(schema("dim", "dimension must be at least 2"));
        }
        if self.bounds.min.len() != d || self.bounds.max.len() != d {
            return Err(schema("bounds", format!("bounds need {d} entries")));
        }
        if self.bounds.min.iter().zip(&self.bounds.max).any(|(a, b)| !(a < b)) {
            return Err(schema("bounds", "min must be below max on every axis"));
        }
        for (i, r) in self.rays.iter().enumerate() {
            if r.start.len() != d {
                return Err(schema(&format!("rays[{i}].start"), format!("expected {d} entries")));
            }
            if r.direction.len() != d && r.direction.len() != d - 1 {
                return Err(schema(&format!("rays[{i}].direction"), format!("expected {d} or {} entries", d - 1)));
            }
        }
        if let Some(g) = &self.grid {
            if g.resolution.is_empty() || g.resolution.contains(&0) {
                return Err(schema("grid.resolution", "resolutions must be positive"));
            }
        }
        Ok(())
    }

    pub fn bounds(&self) -> ChartBox {
        ChartBox::new(self.bounds.min.clone(), self.bounds.max.clone())
    }

    pub fn media(&self) -> Result<Media> {
        let iface = Interface::new(self.dim, self.interface.clone()).map_err(|e| schema("interface", e.to_string()))?;
        let m1 = self.medium1.build(self.dim).map_err(|e| schema("medium1", e.to_string()))?;
        let m2 = self.medium2.build(self.dim).map_err(|e| schema("medium2", e.to_string()))?;
        Ok(Media::new(m1, m2, iface))
    }

    pub fn scene(&self, policy: BranchPolicy) -> Result<Scene> {
        let mut s = Scene::new(self.media()?, self.bounds());
        s.source = self.source.clone();
        s.receiver = self.receiver.clone();
        s.options = TraceOptions {
            step: self.step,
            ..TraceOptions::default()
        };
        s.branch_policy = policy;
        Ok(s)
    }

    /// Ray starts with lightlike directions for the medium at the start.
    pub fn rays(&self, media: &Media) -> Result<Vec<(Vector, Vector)>> {
        self.rays
            .iter()
            .map(|r| {
                let x = Vector::from_row_slice(&r.start);
                match media.interface.side(&x).medium() {
                    Some(k) => self.lift_ray(media.metric(k), r),
                    None => Err(Error::InvalidInput("ray starts on the interface".into())),
                }
            })
            .collect()
    }

    fn lift_ray(&self, m: &Metric, r: &RaySpec) -> Result<(Vector, Vector)> {
        let x = Vector::from_row_slice(&r.start);
        let v = if r.direction.len() == self.dim {
            m.project_to_cone(&x, &Vector::from_row_slice(&r.direction))?
        } else {
            let mut w = vec![0.0];
            w.extend_from_slice(&r.direction);
            let (_, sp) = m.split(&x, &Vector::from_row_slice(&w))?;
            m.lift(&x, &sp)?
        };
        Ok((x, v))
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Schema { .. } | Error::InvalidInput(_) | Error::InvalidMetric(_) | Error::Domain { .. } => 2,
        Error::NoArrival(_) => 4,
        Error::Trapped(_) => 5,
        Error::Io(_) => 6,
        _ => 3,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Snell,
    All,
    Reflect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "conesnell", version, about = "Refraction and reflection of lightlike rays between Lorentz-Finsler media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct PointArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Comma-separated point on the interface.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Vec<f64>,
    /// Comma-separated incident direction (full or spatial).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Causal character of the interface and predicted cases.
    Classify(PointArgs),
    /// Refracted (or, with `--reflect`, reflected) directions at a point.
    Snell {
        #[command(flatten)]
        at: PointArgs,
        #[arg(long)]
        reflect: bool,
    },
    /// Trace the scene's rays.
    Trace {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "snell")]
        branch_policy: PolicyArg,
        #[arg(long)]
        max_events: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Trace through a piecewise-constant discretisation of medium 1.
    Grid {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cells per axis; several comma-separated values run a convergence study.
        #[arg(long, value_delimiter = ',')]
        resolution: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_events: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compare refraction angles against the sine law.
    VerifyClassical {
        #[arg(long, default_value_t = 1.0)]
        n1: f64,
        #[arg(long, default_value_t = 1.5)]
        n2: f64,
        /// Sweep step in degrees over (0°, 90°).
        #[arg(long, default_value_t = 5.0)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_scene(path: &Path) -> Result<(SceneFile, String)> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| schema("", e.to_string()))?;
    let hash = sha256_hex(text.as_bytes());
    Ok((SceneFile::parse(&text)?, hash))
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            // A closed reader (e.g. `| head`) is not an error worth reporting.
            if let Err(e) = writeln!(out, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut value = serde_json::to_value(v).expect("report types serialise");
    flatten_vectors(&mut value);
    serde_json::to_string_pretty(&value).expect("values serialise")
}

/// nalgebra writes a column vector as `[data, nrows, null]`; reports show
/// the plain `data` array instead.
fn flatten_vectors(v: &mut Value) {
    match v {
        Value::Array(items) => {
            let is_vector = items.len() == 3
                && items[2].is_null()
                && items[1].is_u64()
                && items[0].as_array().is_some_and(|d| {
                    d.iter().all(Value::is_number) && Some(d.len() as u64) == items[1].as_u64()
                });
            if is_vector {
                *v = items[0].take();
            } else {
                items.iter_mut().for_each(flatten_vectors);
            }
        }
        Value::Object(map) => map.values_mut().for_each(flatten_vectors),
        _ => {}
    }
}

fn point_direction(file: &SceneFile, media: &Media, a: &PointArgs) -> Result<(Vector, Vector)> {
    let d = file.dim;
    if a.point.len() != d {
        return Err(Error::InvalidInput(format!("--point needs {d} values")));
    }
    let p = Vector::from_row_slice(&a.point);
    let u = match a.direction.len() {
        n if n == d => Vector::from_row_slice(&a.direction),
        n if n + 1 == d => {
            let mut w = vec![0.0];
            w.extend_from_slice(&a.direction);
            let (_, sp) = media.metric1.split(&p, &Vector::from_row_slice(&w))?;
            media.metric1.lift(&p, &sp)?
        }
        _ => return Err(Error::InvalidInput(format!("--direction needs {d} or {} values", d - 1))),
    };
    Ok((p, u))
}

fn cmd_classify(a: &PointArgs) -> Result<i32> {
    let (file, _) = read_scene(&a.scene)?;
    let media = file.media()?;
    let d = file.dim;
    if a.point.len() != d {
        return Err(Error::InvalidInput(format!("--point needs {d} values")));
    }
    let p = Vector::from_row_slice(&a.point);
    let side = media.interface.side(&p);
    if side != crate::interface::Side::OnInterface {
        return Err(Error::InvalidInput("--point is not on the interface".into()));
    }
    let c1 = media.interface.classify(&media.metric1, &p)?;
    let c2 = media.interface.classify(&media.metric2, &p)?;
    let mut warnings = Vec::new();
    for (k, c) in [(1, &c1), (2, &c2)] {
        if c.is_borderline() {
            warnings.push(format!("interface character for medium {k} is borderline"));
        }
    }
    let mut report = json!({
        "command": "classify",
        "point": a.point,
        "eta": format!("{:?}/{:?}", c1.char, c2.char),
        "eta_medium1": c1,
        "eta_medium2": c2,
    });
    if !a.direction.is_empty() {
        let (p, u) = point_direction(&file, &media, a)?;
        let inc = incident_data(&media, &p, &u)?;
        report["incident"] = json!({
            "u": inc.u,
            "pi_medium1": inc.pi_class_1,
            "pi_medium2": inc.pi_class_2,
            "cone2_meets_q2": inc.cone2_meets_q2,
            "cone1_meets_q1": inc.cone1_meets_q1,
            "refraction_case": predict_refraction(&inc),
            "reflection_case": predict_reflection(&inc),
        });
        for k in [1, 2] {
            if inc.borderline(k) {
                warnings.push(format!("incident classification for medium {k} is borderline"));
            }
        }
    }
    report["warnings"] = json!(warnings);
    emit(None, "", &to_json(&report))?;
    Ok(0)
}

/// Degrees, rounded to six decimals for reports.
fn deg(rad: f64) -> f64 {
    (rad.to_degrees() * 1e6).round() / 1e6
}

/// Angle between the spatial parts of `v` and `±φ`, for product metrics.
fn angle_from_normal(v: &Vector, phi: &Vector, reflect: bool) -> f64 {
    let n = phi.rows(1, phi.len() - 1).into_owned() * if reflect { -1.0 } else { 1.0 };
    crate::linalg::angle_between(&v.rows(1, v.len() - 1).into_owned(), &n)
}

fn cmd_snell(a: &PointArgs, reflect: bool) -> Result<i32> {
    let (file, _) = read_scene(&a.scene)?;
    let media = file.media()?;
    let (p, u) = point_direction(&file, &media, a)?;
    let inc = incident_data(&media, &p, &u)?;
    let outcome = if reflect {
        solve_reflection(&media, &inc)?
    } else {
        solve_refraction(&media, &inc)?
    };
    let product = media.metric1.is_product() && media.metric2.is_product();
    let angles: Vec<f64> = outcome
        .directions
        .iter()
        .map(|d| deg(angle_from_normal(&d.v, &inc.phi, reflect)))
        .collect();
    let mut report = json!({
        "command": if reflect { "snell --reflect" } else { "snell" },
        "point": p,
        "incident": inc.u,
        "outcome": outcome,
        "warnings": outcome.warnings,
    });
    if product {
        report["incidence_deg"] = json!(deg(angle_from_normal(&inc.u, &inc.phi, false)));
        report["angles_deg"] = json!(angles);
    }
    emit(None, "", &to_json(&report))?;
    Ok(0)
}

#[derive(Serialize)]
struct EventSummary {
    index: usize,
    point: Vector,
    refraction_case: crate::snell::CaseLabel,
    reflection_case: crate::snell::CaseLabel,
    chosen: Option<crate::snell::EventKind>,
    straight_oriented: Option<bool>,
    annotation: Option<crate::tracer::Annotation>,
}

#[derive(Serialize)]
struct TrajectorySummary {
    termination: Termination,
    arrival: Option<f64>,
    end: Vector,
    events: Vec<EventSummary>,
}

fn summarize(t: &Trajectory) -> TrajectorySummary {
    TrajectorySummary {
        termination: t.termination,
        arrival: t.arrival,
        end: t.end().x.clone(),
        events: t
            .events
            .iter()
            .map(|e| EventSummary {
                index: e.index,
                point: e.crossing.point.clone(),
                refraction_case: e.refraction.case_label,
                reflection_case: e.reflection.case_label,
                chosen: e.chosen.as_ref().map(|b| b.kind),
                straight_oriented: e.chosen.as_ref().map(|b| b.straight_oriented),
                annotation: e.annotation,
            })
            .collect(),
    }
}

fn write_trajectories(out: Option<&Path>, format: Format, file: &SceneFile, all: &[Vec<Trajectory>]) -> Result<()> {
    match format {
        Format::Json => emit(out, "trajectories.json", &to_json(&all)),
        Format::Svg => emit(out, "trace.svg", &render_svg(file, all)),
        Format::Csv => {
            for (i, ts) in all.iter().enumerate() {
                for (j, t) in ts.iter().enumerate() {
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf)?;
                    emit(out, &format!("ray{i}_branch{j}.csv"), &String::from_utf8_lossy(&buf))?;
                }
            }
            Ok(())
        }
    }
}

fn cmd_trace(scene: &Path, out: Option<&Path>, policy: PolicyArg, max_events: Option<usize>, format: Format) -> Result<i32> {
    let started = Instant::now();
    let (file, hash) = read_scene(scene)?;
    let policy = match policy {
        PolicyArg::Snell => BranchPolicy::SnellConeGeodesicOnly,
        PolicyArg::All => BranchPolicy::AllBranches,
        PolicyArg::Reflect => BranchPolicy::ReflectOnly,
    };
    let sc = file.scene(policy)?;
    let rays = file.rays(&sc.media)?;
    if rays.is_empty() {
        return Err(schema("rays", "scene has no rays to trace"));
    }
    let max_events = max_events.or(file.max_events).unwrap_or(8);
    let mut all = Vec::new();
    for (x, v) in &rays {
        let ts = match policy {
            BranchPolicy::AllBranches => trace_all_branches(&sc, x, v, max_events)?,
            _ => vec![trace(&sc, x, v, max_events)?],
        };
        all.push(ts);
    }
    let arrived = all.iter().all(|ts| ts.iter().any(|t| t.termination == Termination::ReceiverHit));
    let code = if sc.receiver.is_some() && !arrived { 4 } else { 0 };
    let mut warnings = Vec::new();
    for (i, ts) in all.iter().enumerate() {
        for t in ts {
            for e in &t.events {
                for o in [&e.refraction, &e.reflection] {
                    for w in &o.warnings {
                        warnings.push(format!("ray {i}, event {}: {w}", e.index));
                    }
                    if o.borderline {
                        warnings.push(format!("ray {i}, event {}: borderline {:?} classification", e.index, o.kind));
                    }
                    if o.directions.iter().any(|d| d.exceptional) {
                        warnings.push(format!("ray {i}, event {}: exceptional {:?} direction", e.index, o.kind));
                    }
                }
            }
        }
    }
    warnings.dedup();
    let report = json!({
        "command": "trace",
        "scene": file,
        "warnings": warnings,
        "version": env!("CARGO_PKG_VERSION"),
        "scene_sha256": hash,
        "branch_policy": policy,
        "max_events": max_events,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "exit_code": code,
        "rays": all.iter().map(|ts| ts.iter().map(summarize).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    match out {
        Some(_) => {
            emit(out, "report.json", &to_json(&report))?;
            write_trajectories(out, format, &file, &all)?;
        }
        None if format == Format::Json => emit(None, "", &to_json(&report))?,
        None => write_trajectories(None, format, &file, &all)?,
    }
    Ok(code)
}

fn cmd_grid(
    scene: &Path,
    out: Option<&Path>,
    resolution: &[usize],
    seed: Option<u64>,
    max_events: Option<usize>,
    format: Format,
) -> Result<i32> {
    let started = Instant::now();
    let (file, hash) = read_scene(scene)?;
    let reference = file.medium1.build(file.dim)?;
    let spec = file.grid.clone().unwrap_or(GridSpec {
        resolution: vec![16],
        seed: 0,
    });
    let levels = if resolution.is_empty() { spec.resolution.clone() } else { resolution.to_vec() };
    if levels.contains(&0) {
        return Err(Error::InvalidInput("resolutions must be positive".into()));
    }
    let seed = seed.unwrap_or(spec.seed);
    let bounds = file.bounds();
    let grid = GridScene::uniform(reference.clone(), bounds, levels[0], seed);
    let rays = file
        .rays
        .iter()
        .map(|r| file.lift_ray(&reference, r))
        .collect::<Result<Vec<_>>>()?;
    if rays.is_empty() {
        return Err(schema("rays", "scene has no rays to trace"));
    }
    let max_events = max_events.unwrap_or(usize::MAX);
    let mut results = Vec::new();
    let mut trajectories = Vec::new();
    if levels.len() == 1 {
        let cc = discretize(&grid)?;
        for (x, v) in &rays {
            let t = trace_discretized(&cc, x, v, max_events)?;
            results.push(serde_json::to_value(summarize(&t)).expect("summary serialises"));
            trajectories.push(vec![t]);
        }
    } else {
        for (x, v) in &rays {
            let table = convergence_study(&grid, x, v, &levels)?;
            results.push(serde_json::to_value(&table).expect("table serialises"));
        }
    }
    let report = json!({
        "command": "grid",
        "scene": file,
        "version": env!("CARGO_PKG_VERSION"),
        "scene_sha256": hash,
        "seed": seed,
        "resolution": levels,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "rays": results,
    });
    match (out, format) {
        (Some(_), _) => {
            emit(out, "report.json", &to_json(&report))?;
            if !trajectories.is_empty() {
                write_trajectories(out, format, &file, &trajectories)?;
            }
        }
        (None, Format::Json) => emit(None, "", &to_json(&report))?,
        (None, _) => write_trajectories(None, format, &file, &trajectories)?,
    }
    Ok(0)
}

/// Sweeps incidence angles over `(0°, 90°)` in steps of `step` degrees on
/// the isotropic planar scene and compares refraction angles with
/// `arcsin((n₁/n₂) sin θ)`. Beyond the critical angle no straight refraction
/// may exist.
pub fn verify_classical(n1: f64, n2: f64, step: f64) -> Result<serde_json::Value> {
    if !(step > 0.0 && step < 90.0) {
        return Err(Error::InvalidInput("step must lie in (0, 90) degrees".into()));
    }
    let m1 = Metric::isotropic(3, n1)?;
    let m2 = Metric::isotropic(3, n2)?;
    let media = Media::new(m1.clone(), m2, Interface::coordinate_plane(3, 1, 0.0));
    let p = Vector::zeros(3);
    let crit = critical_angle(n1, n2);
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    let mut rows = Vec::new();
    let mut k = 1;
    while (k as f64) * step < 90.0 - 1e-9 {
        let th = (k as f64 * step).to_radians();
        k += 1;
        let u = m1.lift(&p, &Vector::from_row_slice(&[0.0, th.cos(), th.sin()]))?;
        let inc = incident_data(&media, &p, &u)?;
        let out = solve_refraction(&media, &inc)?;
        let sine = n1 / n2 * th.sin();
        let expected = (sine < 1.0).then(|| sine.asin());
        let refracted = out.straight().map(|d| angle_from_normal(&d.v, &inc.phi, false));
        let delta = match (refracted, expected) {
            (Some(a), Some(b)) => Some((a - b).abs().to_degrees()),
            (None, None) => None,
            _ => {
                mismatches += 1;
                None
            }
        };
        if let Some(dd) = delta {
            worst = worst.max(dd);
        }
        rows.push(json!({
            "incidence_deg": deg(th),
            "expected_deg": expected.map(deg),
            "refraction_deg": refracted.map(deg),
            "delta_deg": delta,
            "case": out.case_label,
        }));
    }
    Ok(json!({
        "command": "verify-classical",
        "n1": n1,
        "n2": n2,
        "critical_angle_deg": crit.map(deg),
        "max_delta_deg": worst,
        "existence_mismatches": mismatches,
        "passed": worst <= 1e-4 && mismatches == 0,
        "sweep": rows,
    }))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Snell { at, reflect } => cmd_snell(at, *reflect),
        Command::Trace {
            scene,
            out,
            branch_policy,
            max_events,
            format,
        } => cmd_trace(scene, out.as_deref(), *branch_policy, *max_events, *format),
        Command::Grid {
            scene,
            out,
            resolution,
            seed,
            max_events,
            format,
        } => cmd_grid(scene, out.as_deref(), resolution, *seed, *max_events, *format),
        Command::VerifyClassical { n1, n2, step, out } => verify_classical(*n1, *n2, *step).and_then(|r| {
            let passed = r["passed"].as_bool() == Some(true);
            emit(out.as_deref(), "verify.json", &to_json(&r))?;
            Ok(if passed { 0 } else { 3 })
        }),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests;
