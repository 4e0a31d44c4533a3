//! The `ghlab` command line: argument parsing, dispatch, and output.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! carries the witnesses), 2 on usage or input errors.

mod config;
pub mod plot;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub use config::{parse_params, run_experiment, ExperimentConfig, Outputs, EXPERIMENTS};
use config::{family_output, Params};
use report::{cell, emit, Output, Report, Table};

use crate::covers::{flat_torus, glued_sphere, normal_cover, polygon_rp2, universal_cover_ball, CoverOptions, GluedSphereOptions, Mesh, DEFAULT_MAX_VERTICES};
use crate::doubling::{default_radii, global_doubling_profile, lemma21_packing_bound_check, local_doubling_check, two_point_propagation_sweep};
use crate::domains::{
    cone_condition_check, delta_intrinsic_metric, jones_flatness_check, r_extrinsic_metric, r_interior, sine_curve_region, square_region,
    undistortedness_certificate, DomainInGraph, SampleGrid,
};
use crate::error::{Error, Result};
use crate::gh::{family_precompactness, gh_exact_small, gh_heuristic, gh_lower_bounds, DivergenceRule, FamilyMember, EXACT_CAP};
use crate::invariants::{covering_number, packing_number, sandwich_check, ExactCaps, Mode};
use crate::io::{read_space, LoadedSpace, SpaceFile};
use crate::metric::{DiscretizedLengthSpace, MetricSpace};
use crate::spaces;

#[derive(Debug, Parser)]
#[command(name = "ghlab", version, about = "Packing, covering and doubling invariants, covers, and Gromov-Hausdorff bounds of finite length spaces")]
pub struct Cli {
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write an SVG chart of the report to this path.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated space (JSON) or sample grid (CSV).
    Gen(GenArgs),
    /// Packing and covering numbers.
    Invariants(InvariantsArgs),
    /// Local doubling, two-point propagation, packing bound, global profile.
    Doubling(DoublingArgs),
    /// Interiors, undistortedness, cone and flatness checks, induced metrics.
    DomainCert(DomainArgs),
    /// Truncated universal or normal cover of a ball in a glued surface.
    Cover(CoverArgs),
    /// Gromov-Hausdorff bounds between two spaces, or a family verdict.
    Gh(GhArgs),
    /// Run a named experiment with `key=value` parameters.
    Experiment(ExperimentArgs),
    /// Run an experiment from a JSON config file.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Line,
    Path,
    Cycle,
    Grid,
    TorusGrid,
    Circle,
    Random,
    Rp2,
    Sphere,
    Torus,
    SquareGrid,
    SineGrid,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Point count, or side count for grids.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long)]
    pub m: Option<usize>,
    /// Edge length, grid step, circle radius or torus side.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Half the side count of the `rp2` polygon.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub mesh_h: f64,
    /// Flat torus sides `a,b`.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0])]
    pub sides: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantWhat {
    Cap,
    Cov,
    Sandwich,
}

#[derive(Debug, Args, Serialize)]
pub struct InvariantsArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilon: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = InvariantWhat::Sandwich)]
    pub what: InvariantWhat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoublingWhat {
    Local,
    Propagate,
    Lemma21,
    Profile,
}

#[derive(Debug, Args, Serialize)]
pub struct DoublingArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = DoublingWhat::Local)]
    pub what: DoublingWhat,
    /// Center point ids; the basepoint, else every point, when absent.
    #[arg(long, value_delimiter = ',')]
    pub center: Vec<String>,
    /// Ball radius for `propagate`; defaults to ρ.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Doubling constant; measured at scale ρ when absent.
    #[arg(long)]
    pub a0: Option<f64>,
    /// Packing scales for `lemma21`; defaults to ρ/4 and ρ/8.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    /// Radii for `profile`; defaults to ρ, 2ρ, 4ρ.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Every `stride`-th point is a profile center.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainWhat {
    Interior,
    Undistorted,
    Cone,
    Jones,
    DeltaMetric,
    Extrinsic,
}

#[derive(Debug, Args, Serialize)]
pub struct DomainArgs {
    #[arg(long, value_enum)]
    pub what: DomainWhat,
    /// Graph space file with a `boundary` list.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Signed sample grid CSV (`x,y[,z],inside`).
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Boundary point ids, overriding the file's list.
    #[arg(long, value_delimiter = ',')]
    pub boundary: Vec<String>,
    /// Subset point ids for the induced metrics; all points when absent.
    #[arg(long, value_delimiter = ',')]
    pub subset: Vec<String>,
    /// `key=value` pairs; lists use `;`.
    #[arg(long, default_value = "")]
    pub params: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverWhat {
    Universal,
    Normal,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverArgs {
    /// `rp2:k=K`, `sphere`, or `torus:a,b`.
    #[arg(long)]
    pub base: String,
    #[arg(long, value_enum, default_value_t = CoverWhat::Universal)]
    pub what: CoverWhat,
    /// Ball radius (inner radius for normal covers).
    #[arg(long)]
    pub r: f64,
    /// Outer radius for normal covers.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Truncation radius of the cover.
    #[arg(long)]
    pub trunc: f64,
    #[arg(long, default_value_t = 0.05)]
    pub mesh_h: f64,
    /// Marked base point to unfold from; `o` for rp2 and sphere, `p` for torus.
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    pub max_vertices: usize,
    /// Cover graph destination (space JSON with fibers).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_conflicts_with_subcommands = true)]
pub struct GhArgs {
    #[command(subcommand)]
    #[serde(skip)]
    pub family: Option<GhCommand>,
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GhMode::Exact)]
    pub mode: GhMode,
    /// Heuristic restarts.
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
    /// Largest point count for the exact solver.
    #[arg(long, default_value_t = EXACT_CAP)]
    pub cap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GhMode {
    Exact,
    Heuristic,
    Lower,
}

#[derive(Debug, Subcommand)]
pub enum GhCommand {
    /// Uniform total boundedness of every space file in a directory.
    Family(FamilyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long)]
    pub dir: PathBuf,
    /// Restrict each member to the ball of `--radius` about its basepoint.
    #[arg(long)]
    pub pointed: bool,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = DivergenceRule::default().min_members)]
    pub min_members: usize,
    #[arg(long, default_value_t = DivergenceRule::default().growth)]
    pub growth: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// One of sandwich, sw-packing, sw-normal, petersen.
    #[arg(long)]
    pub name: String,
    /// `key=value` pairs; ranges as `a..b`, lists with `;`.
    #[arg(long, default_value = "")]
    pub params: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config JSON.
    pub config: PathBuf,
}

/// Parses `args`, runs the command, writes its outputs, and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a check failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = match &cli.command {
        Command::Gen(a) => return generate(a, cli.output.as_deref(), cli.seed).map(|_| true),
        Command::Invariants(a) => invariants(a)?,
        Command::Doubling(a) => doubling(a)?,
        Command::DomainCert(a) => domain_cert(a, cli.seed)?,
        Command::Cover(a) => cover(a)?,
        Command::Gh(a) => match &a.family {
            Some(GhCommand::Family(f)) => family(f)?,
            None => gh_pair(a, cli.seed)?,
        },
        Command::Experiment(a) => {
            let cfg = ExperimentConfig { experiment: a.name.clone(), params: parse_params(&a.params)?, seed: cli.seed, outputs: Outputs::default() };
            run_experiment(&cfg)?
        }
        Command::Run(a) => {
            let text = std::fs::read_to_string(&a.config).map_err(|e| Error::Input(format!("cannot read config {}: {e}", a.config.display())))?;
            let cfg: ExperimentConfig =
                serde_json::from_str(&text).map_err(|e| Error::Input(format!("config {} does not match the schema: {e}", a.config.display())))?;
            let out = run_experiment(&cfg)?;
            return write_run(&cfg, &out, cli);
        }
    };
    write_output(&out, cli.output.as_deref(), cli.format, cli.plot.as_deref())?;
    Ok(out.report.pass)
}

/// The single place command results reach the filesystem.
fn write_output(out: &Output, path: Option<&Path>, format: Format, plot: Option<&Path>) -> Result<()> {
    match format {
        Format::Json => emit(path, &out.report.to_json()?)?,
        Format::Csv => emit(path, &out.table.to_csv()?)?,
    }
    if let Some(p) = plot {
        match &out.plot {
            Some(svg) => emit(Some(p), svg)?,
            None => eprintln!("note: `{}` has no chart; {} not written", out.report.command, p.display()),
        }
    }
    Ok(())
}

fn write_run(cfg: &ExperimentConfig, out: &Output, cli: &Cli) -> Result<bool> {
    let json = cli.output.as_deref().or(cfg.outputs.json.as_deref());
    if cli.format == Format::Csv && cfg.outputs.csv.is_none() {
        emit(json, &out.table.to_csv()?)?;
    } else {
        emit(json, &out.report.to_json()?)?;
    }
    if let Some(p) = &cfg.outputs.csv {
        emit(Some(p), &out.table.to_csv()?)?;
    }
    if let Some(p) = cli.plot.as_deref().or(cfg.outputs.plot.as_deref()) {
        if let Some(svg) = &out.plot {
            emit(Some(p), svg)?;
        }
    }
    Ok(out.report.pass)
}

fn generate(a: &GenArgs, path: Option<&Path>, seed: u64) -> Result<()> {
    let m = a.m.unwrap_or(a.n);
    let file = match a.kind {
        GenKind::Line => SpaceFile::from_dense(&spaces::line(a.n)?),
        GenKind::Path => SpaceFile::from_graph(&spaces::path_graph(a.n, a.step)?),
        GenKind::Cycle => SpaceFile::from_graph(&spaces::cycle_graph(a.n, a.step)?),
        GenKind::Grid => SpaceFile::from_graph(&spaces::grid_graph(a.n, m, a.step)?),
        GenKind::TorusGrid => SpaceFile::from_graph(&spaces::torus_grid(a.n, a.step)?),
        GenKind::Circle => SpaceFile::from_graph(&spaces::circle_graph(a.n, a.step)?),
        GenKind::Random => SpaceFile::from_dense(&spaces::random_space(seed, a.n)?),
        GenKind::Rp2 => mesh_file(&polygon_rp2(a.k, a.mesh_h)?, "o")?,
        GenKind::Sphere => mesh_file(&glued_sphere(&GluedSphereOptions { mesh_h: a.mesh_h, refine: vec![], cap: None })?, "o")?,
        GenKind::Torus => {
            let [s0, s1] = sides(&a.sides)?;
            mesh_file(&flat_torus(s0, s1, a.mesh_h)?, "p")?
        }
        GenKind::SquareGrid => {
            let grid = SampleGrid::from_region(&square_region(), &[0.0, 0.0], &[1.0, 1.0], a.step)?;
            return emit(path, &grid.to_csv());
        }
        GenKind::SineGrid => {
            let grid = SampleGrid::from_region(&sine_curve_region(), &[0.0, -2.0], &[1.0, 1.0], a.step)?;
            return emit(path, &grid.to_csv());
        }
    };
    emit(path, &(serde_json::to_string_pretty(&file)? + "\n"))
}

fn sides(v: &[f64]) -> Result<[f64; 2]> {
    <[f64; 2]>::try_from(v).map_err(|_| Error::Input(format!("torus needs two sides a,b, got {v:?}")))
}

fn mesh_file(mesh: &Mesh, base: &str) -> Result<SpaceFile> {
    let o = mesh.marked(base)?;
    Ok(SpaceFile::from_graph(&mesh.space.clone().with_basepoint_index(o)))
}

fn invariants(a: &InvariantsArgs) -> Result<Output> {
    let loaded = read_space(&a.space)?;
    let space = loaded.as_metric();
    let caps = ExactCaps::default();
    let mode = match a.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Greedy => Mode::Greedy,
    };
    let (result, pass, table) = match a.what {
        InvariantWhat::Cap => {
            let rows = a.epsilon.iter().map(|&e| packing_number(space, e, mode, caps)).collect::<Result<Vec<_>>>()?;
            let mut t = Table::new(&["epsilon", "cap", "exact"]);
            rows.iter().for_each(|r| t.push(vec![cell(r.epsilon), cell(r.count), cell(r.exact)]));
            (serde_json::to_value(&rows)?, true, t)
        }
        InvariantWhat::Cov => {
            let rows = a.epsilon.iter().map(|&e| covering_number(space, e, mode, caps)).collect::<Result<Vec<_>>>()?;
            let mut t = Table::new(&["epsilon", "cov", "exact"]);
            rows.iter().for_each(|r| t.push(vec![cell(r.epsilon), cell(r.count), cell(r.exact)]));
            (serde_json::to_value(&rows)?, true, t)
        }
        InvariantWhat::Sandwich => {
            let rows = a.epsilon.iter().map(|&e| sandwich_check(space, e, caps)).collect::<Result<Vec<_>>>()?;
            let mut t = Table::new(&["epsilon", "cov", "cap", "cov_half", "holds"]);
            rows.iter().for_each(|r| t.push(vec![cell(r.epsilon), cell(r.cov), cell(r.cap), cell(r.cov_half), cell(r.holds)]));
            (serde_json::to_value(&rows)?, rows.iter().all(|r| r.holds), t)
        }
    };
    Ok(Output { report: Report::new("invariants", a, pass, result)?, table, plot: None })
}

/// Graph space from a file, with counting measure when the file has none.
fn graph_with_measure(path: &Path) -> Result<(DiscretizedLengthSpace, bool)> {
    match read_space(path)? {
        LoadedSpace::Graph(g) if g.has_measure() => Ok((g, false)),
        LoadedSpace::Graph(g) => {
            let n = g.len();
            Ok((g.with_measure(vec![1.0; n])?, true))
        }
        LoadedSpace::Dense(_) => Err(Error::Input(format!("{} holds a distance matrix; doubling checks need a graph space", path.display()))),
    }
}

fn centers(space: &DiscretizedLengthSpace, ids: &[String]) -> Result<Vec<usize>> {
    if !ids.is_empty() {
        return ids.iter().map(|id| space.index_of(id).ok_or_else(|| Error::UnknownPoint(id.clone()))).collect();
    }
    Ok(match space.basepoint() {
        Some(b) => vec![b],
        None => (0..space.len()).collect(),
    })
}

fn doubling(a: &DoublingArgs) -> Result<Output> {
    let (space, counting) = graph_with_measure(&a.space)?;
    let config = json!({ "args": a, "measure": if counting { "counting" } else { "file" } });
    let a0 = match a.a0 {
        Some(v) => v,
        None => local_doubling_check(&space, a.rho, &default_radii(a.rho))?.a0,
    };
    let out = match a.what {
        DoublingWhat::Local => {
            let cert = local_doubling_check(&space, a.rho, &default_radii(a.rho))?;
            let mut t = Table::new(&["rho", "A0", "pass"]);
            t.push(vec![cell(cert.rho), cell(cert.a0), cell(cert.pass)]);
            Output { report: Report::new("doubling", config, cert.pass, &cert)?, table: t, plot: None }
        }
        DoublingWhat::Propagate => {
            let r = a.radius.unwrap_or(a.rho);
            let rows = two_point_propagation_sweep(&space, &centers(&space, &a.center)?, r, a.rho, a0)?;
            let mut t = Table::new(&["center", "radius", "exponent", "tested", "max_ratio", "worst_point", "pass"]);
            for p in &rows {
                t.push(vec![p.center.clone(), cell(p.radius), cell(p.exponent), cell(p.tested), cell(p.max_ratio), p.worst_point.clone(), cell(p.pass)]);
            }
            let pass = rows.iter().all(|p| p.pass);
            Output { report: Report::new("doubling", config, pass, &rows)?, table: t, plot: None }
        }
        DoublingWhat::Lemma21 => {
            let eps = if a.epsilon.is_empty() { vec![a.rho / 4.0, a.rho / 8.0] } else { a.epsilon.clone() };
            let mut rows = Vec::new();
            for p in centers(&space, &a.center)? {
                for &e in &eps {
                    rows.push(lemma21_packing_bound_check(&space, p, a.rho, a0, e, ExactCaps::default().packing)?);
                }
            }
            let mut t = Table::new(&["center", "epsilon", "packing", "exact", "bound", "pass"]);
            for r in &rows {
                t.push(vec![r.center.clone(), cell(r.epsilon), cell(r.packing), cell(r.exact), cell(r.bound), cell(r.pass)]);
            }
            let pass = rows.iter().all(|r| r.pass);
            Output { report: Report::new("doubling", config, pass, &rows)?, table: t, plot: None }
        }
        DoublingWhat::Profile => {
            let radii = if a.radii.is_empty() { vec![a.rho, 2.0 * a.rho, 4.0 * a.rho] } else { a.radii.clone() };
            let prof = global_doubling_profile(&space, a.rho, a0, &radii, a.stride.max(1))?;
            let mut t = Table::new(&["radius", "cover_count", "exponent", "A", "observed", "pass"]);
            for r in &prof.rows {
                t.push(vec![cell(r.radius), cell(r.cover_count), cell(r.exponent), cell(r.a), cell(r.observed), cell(r.pass)]);
            }
            let series = vec![
                plot::Series::new("A(r)", prof.rows.iter().map(|r| (r.radius, r.a)).collect()),
                plot::Series::new("observed", prof.rows.iter().map(|r| (r.radius, r.observed)).collect()),
            ];
            let svg = plot::line_chart("Global doubling profile", "r", "constant", &series);
            Output { report: Report::new("doubling", config, prof.pass, &prof)?, table: t, plot: Some(svg) }
        }
    };
    Ok(out)
}

fn read_grid(a: &DomainArgs) -> Result<SampleGrid> {
    let path = a.grid.as_ref().ok_or_else(|| Error::Input(format!("`domain-cert --what {:?}` needs --grid", a.what)))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read grid {}: {e}", path.display())))?;
    SampleGrid::from_csv(&text)
}

fn read_graph(a: &DomainArgs) -> Result<DiscretizedLengthSpace> {
    let path = a.space.as_ref().ok_or_else(|| Error::Input(format!("`domain-cert --what {:?}` needs --space", a.what)))?;
    match read_space(path)? {
        LoadedSpace::Graph(g) => Ok(g),
        LoadedSpace::Dense(_) => Err(Error::Input(format!("{} holds a distance matrix; this check needs a graph space", path.display()))),
    }
}

/// Domain from `--space` (with its boundary or `--boundary`), else from `--grid`.
fn read_domain(a: &DomainArgs) -> Result<DomainInGraph> {
    if a.space.is_none() && a.grid.is_some() {
        return read_grid(a)?.to_cloud()?.to_domain("grid");
    }
    let g = read_graph(a)?;
    if a.boundary.is_empty() {
        return DomainInGraph::from_space(&g);
    }
    let b = ids_to_indices(&g, &a.boundary)?;
    let all: Vec<usize> = (0..g.len()).collect();
    DomainInGraph::new(&g, &all, &b)
}

fn ids_to_indices(space: &dyn MetricSpace, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter().map(|id| space.index_of(id).ok_or_else(|| Error::UnknownPoint(id.clone()))).collect()
}

fn domain_cert(a: &DomainArgs, seed: u64) -> Result<Output> {
    let map = parse_params(&a.params)?;
    let label = format!("domain-cert {:?}", a.what).to_lowercase();
    let (result, pass, table, plot) = match a.what {
        DomainWhat::Interior => {
            let p = Params::from_map(&label, &map, &["t"])?;
            let d = read_domain(a)?;
            let ts = p.f64_list("t", &[])?;
            if ts.is_empty() {
                return Err(Error::Input("interior needs params t=...".into()));
            }
            let mut t = Table::new(&["t", "interior_size"]);
            let mut rows = BTreeMap::new();
            for &tv in &ts {
                let ids: Vec<String> = r_interior(&d, tv).into_iter().map(|v| d.space().point_id(v).to_string()).collect();
                t.push(vec![cell(tv), cell(ids.len())]);
                rows.insert(tv.to_string(), ids);
            }
            (serde_json::to_value(rows)?, true, t, None)
        }
        DomainWhat::Undistorted => {
            let p = Params::from_map(&label, &map, &["t", "tau", "tol"])?;
            let d = read_domain(a)?;
            let tau = p.required("tau")?;
            let cert = undistortedness_certificate(&d, &p.f64_list("t", &[0.05, 0.1, 0.15])?, |t| tau * t, p.f64("tol", 5.0)?)?;
            let mut t = Table::new(&["t", "s", "interior_size", "max_gap", "pass"]);
            for r in &cert.rows {
                t.push(vec![cell(r.t), cell(r.s), cell(r.interior_size), cell(r.max_gap), cell(r.pass)]);
            }
            let series = vec![
                plot::Series::new("max gap", cert.rows.iter().map(|r| (r.t, r.max_gap)).collect()),
                plot::Series::new("s(t)", cert.rows.iter().map(|r| (r.t, r.s)).collect()),
            ];
            let svg = plot::line_chart("Boundary undistortedness", "t", "distance", &series);
            (serde_json::to_value(&cert)?, cert.pass, t, Some(svg))
        }
        DomainWhat::Cone => {
            let p = Params::from_map(&label, &map, &["theta", "height"])?;
            let rep = cone_condition_check(&read_grid(a)?, p.required("theta")?, p.required("height")?)?;
            let mut t = Table::new(&["theta", "height", "tested", "failures", "pass", "tau"]);
            t.push(vec![cell(rep.theta), cell(rep.height), cell(rep.tested), cell(rep.failures), cell(rep.pass), cell(rep.tau)]);
            (serde_json::to_value(&rep)?, rep.pass, t, None)
        }
        DomainWhat::Jones => {
            let p = Params::from_map(&label, &map, &["r0", "pairs"])?;
            let cloud = read_grid(a)?.to_cloud()?;
            let rep = jones_flatness_check(&cloud, p.required("r0")?, p.usize("pairs", 200)?, seed)?;
            let mut t = Table::new(&["r", "neighborhood", "interior_depth", "max_gap", "pass"]);
            for s in &rep.scales {
                t.push(vec![cell(s.r), cell(s.neighborhood), cell(s.interior_depth), cell(s.max_gap), cell(s.pass)]);
            }
            (serde_json::to_value(&rep)?, rep.pass, t, None)
        }
        DomainWhat::DeltaMetric | DomainWhat::Extrinsic => {
            let key = if a.what == DomainWhat::DeltaMetric { "delta" } else { "r" };
            let p = Params::from_map(&label, &map, &[key])?;
            let scale = p.required(key)?;
            let g = read_graph(a)?;
            let subset = if a.subset.is_empty() { (0..g.len()).collect() } else { ids_to_indices(&g, &a.subset)? };
            let induced = if a.what == DomainWhat::DeltaMetric {
                delta_intrinsic_metric(&g.to_finite()?, &subset, scale)?
            } else {
                r_extrinsic_metric(&g, &subset, scale)?
            };
            let mut t = Table::new(&["x", "y", "distance"]);
            for i in 0..induced.len() {
                for j in i + 1..induced.len() {
                    t.push(vec![induced.point_id(i).to_string(), induced.point_id(j).to_string(), cell(induced.dist(i, j))]);
                }
            }
            (serde_json::to_value(SpaceFile::from_dense(&induced))?, true, t, None)
        }
    };
    Ok(Output { report: Report::new("domain-cert", a, pass, result)?, table, plot })
}

/// Mesh and default center for a `--base` spec.
pub fn base_mesh(spec: &str, mesh_h: f64) -> Result<(Mesh, &'static str)> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "rp2" => {
            let k = rest
                .strip_prefix("k=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Input(format!("expected rp2:k=K, got `{spec}`")))?;
            Ok((polygon_rp2(k, mesh_h)?, "o"))
        }
        "sphere" => Ok((glued_sphere(&GluedSphereOptions { mesh_h, refine: vec![], cap: None })?, "o")),
        "torus" => {
            let v: Vec<f64> = rest.split(',').map(|s| s.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| Error::Input(format!("expected torus:a,b, got `{spec}`")))?;
            let [s0, s1] = sides(&v)?;
            Ok((flat_torus(s0, s1, mesh_h)?, "p"))
        }
        _ => Err(Error::Input(format!("unknown base `{spec}`; use rp2:k=K, sphere, or torus:a,b"))),
    }
}

#[derive(Serialize)]
struct CoverSummary {
    base_vertices: usize,
    vertices: usize,
    truncated: bool,
    r_trunc: f64,
    center: String,
    center_lifts: usize,
    nearest_lift: Option<f64>,
}

fn cover(a: &CoverArgs) -> Result<Output> {
    let (mesh, default_center) = base_mesh(&a.base, a.mesh_h)?;
    let c = mesh.marked(a.center.as_deref().unwrap_or(default_center))?;
    let opts = CoverOptions { max_vertices: a.max_vertices, ..CoverOptions::new(a.trunc) };
    let cover = match a.what {
        CoverWhat::Universal => universal_cover_ball(&mesh, c, a.r, &opts)?,
        CoverWhat::Normal => {
            let r2 = a.r2.ok_or_else(|| Error::Input("normal covers need --r2".into()))?;
            normal_cover(&mesh, c, a.r, r2, &opts)?
        }
    };
    if let Some(p) = &a.out {
        emit(Some(p), &(serde_json::to_string_pretty(&cover.to_space_file())? + "\n"))?;
    }
    let lifts = cover.lifts_of(c);
    let summary = CoverSummary {
        base_vertices: mesh.space.len(),
        vertices: cover.len(),
        truncated: cover.truncated,
        r_trunc: cover.r_trunc,
        center: mesh.space.point_id(c).to_string(),
        center_lifts: lifts.len(),
        nearest_lift: lifts.get(1).map(|&v| cover.root_distance[v]),
    };
    let mut t = Table::new(&["base_vertices", "vertices", "truncated", "center_lifts", "nearest_lift"]);
    t.push(vec![
        cell(summary.base_vertices),
        cell(summary.vertices),
        cell(summary.truncated),
        cell(summary.center_lifts),
        summary.nearest_lift.map(cell).unwrap_or_default(),
    ]);
    Ok(Output { report: Report::new("cover", a, true, &summary)?, table: t, plot: None })
}

fn gh_pair(a: &GhArgs, seed: u64) -> Result<Output> {
    let (Some(xp), Some(yp)) = (&a.x, &a.y) else {
        return Err(Error::Input("gh needs --x and --y, or the `family` subcommand".into()));
    };
    let (x, y) = (read_space(xp)?, read_space(yp)?);
    let (x, y) = (x.as_metric(), y.as_metric());
    let config = json!({ "args": a, "seed": seed });
    let mut t = Table::new(&["x", "y", "mode", "value", "lower_bound"]);
    let report = match a.mode {
        GhMode::Lower => {
            let lb = gh_lower_bounds(x, y)?;
            t.push(vec![x.id().into(), y.id().into(), "lower".into(), cell(lb.value), cell(lb.value)]);
            Report::new("gh", config, true, &lb)?
        }
        GhMode::Exact | GhMode::Heuristic => {
            let r = if a.mode == GhMode::Exact { gh_exact_small(x, y, a.cap)? } else { gh_heuristic(x, y, a.budget, seed)? };
            let mode = if r.exact { "exact" } else { "heuristic" };
            t.push(vec![r.x.clone(), r.y.clone(), mode.into(), cell(r.distance), cell(r.lower_bound)]);
            Report::new("gh", config, true, &r)?
        }
    };
    Ok(Output { report, table: t, plot: None })
}

/// Trailing integer of a file stem, used as the family parameter.
fn stem_parameter(stem: &str) -> Option<f64> {
    let digits: String = stem.chars().rev().take_while(char::is_ascii_digit).collect::<Vec<_>>().into_iter().rev().collect();
    digits.parse().ok()
}

fn family(a: &FamilyArgs) -> Result<Output> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&a.dir)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", a.dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Input(format!("no .json space files in {}", a.dir.display())));
    }
    let loaded = paths.iter().map(read_space).collect::<Result<Vec<_>>>()?;
    let members: Vec<FamilyMember> = paths
        .iter()
        .zip(&loaded)
        .enumerate()
        .map(|(i, (p, s))| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            FamilyMember { parameter: stem_parameter(&stem).unwrap_or(i as f64), label: stem, space: s.as_metric() }
        })
        .collect();
    let pointed = match (a.pointed, a.radius) {
        (true, Some(r)) => Some(r),
        (true, None) => return Err(Error::Input("--pointed needs --radius".into())),
        (false, _) => None,
    };
    let rule = DivergenceRule { min_members: a.min_members, growth: a.growth };
    let family_id = a.dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "family".into());
    let report = family_precompactness(&family_id, &members, &a.eps, pointed, rule)?;
    family_output("gh family", a, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stem_parameters() {
        assert_eq!(stem_parameter("cover-k10"), Some(10.0));
        assert_eq!(stem_parameter("plain"), None);
    }

    #[test]
    fn base_specs() {
        assert_eq!(base_mesh("torus:1,1", 0.2).unwrap().1, "p");
        assert!(base_mesh("klein", 0.2).is_err());
        assert!(base_mesh("rp2:k=x", 0.2).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with(["ghlab", "nonsense"]), 2);
        assert_eq!(main_with(["ghlab", "gh", "--mode", "exact"]), 2);
    }
}
