use super::alpha::{AlphaArgs, ResolvedAlpha};
use super::instance::{load_instance, Instance};
use super::output::{csv_table, json_envelope, pgm, Artifact};
use super::{CliError, Command, VERSION_TAG};
use crate::blaschke::{partition_lengths, solve_parameter, BlaschkeModel, RotationSolve, SolveOptions};
use crate::cellgraph::{
    build_graph, build_partitions, dilatation_statistics, enumerate_cells, exp_cell_region_area, strip_height,
    CellClass, CircleSource, DilatationLevel, Edge, ExpAreas, GraphGamma, Vertex,
};
use crate::contfrac::{brjuno_partials, convergents, pz_statistic, verify_e0, CFExpansion, ConvergentPair, E0Verdict};
use crate::covering::{certify_lemma1, certify_lemma2, lemma1_constants, synth_exclusion_set, synth_lemma2};
use crate::dynamics::{
    classify_f, deficiency_exponent, density_scan, k_r_fate, scan_budget, siegel_boundary, DeficiencyFit, DensityScan,
    ModelP, OrbitFate, ScanRow,
};
use clap::{Args, ValueEnum};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub(crate) fn dispatch(command: &Command) -> Result<Vec<Artifact>, CliError> {
    let config = serde_json::to_value(command).map_err(|e| CliError::Io(e.to_string()))?;
    let name = command.name();
    match command {
        Command::Classify(a) => classify(a, name, &config),
        Command::Rotnum(a) => rotnum(a, name, &config),
        Command::Partition(a) => partition(a, name, &config),
        Command::DensityScan(a) => scan(a, name, &config),
        Command::DeepFit(a) => deep_fit(a, name, &config),
        Command::Render(a) => render(a, name, &config),
        Command::CoverCheck(a) => cover_check(a, name, &config),
        Command::Cellgraph(a) => cellgraph(a, name, &config),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be positive, got {v}")))
    }
}

/// `crit`, `re,im` or a real number.
fn parse_center(spec: &str, crit: Complex<f64>) -> Result<Complex<f64>, CliError> {
    let bad = || CliError::usage(format!("bad center {spec:?}: expected crit, re,im or re"));
    let s = spec.trim();
    if s == "crit" {
        return Ok(crit);
    }
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    match parts.as_slice() {
        [re] => Ok(Complex::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex::new(num(re)?, num(im)?)),
        _ => Err(bad()),
    }
}

/// The config echo with the parameter actually used.
fn with_resolved_t(config: &serde_json::Value, t: Option<f64>) -> serde_json::Value {
    let mut c = config.clone();
    if let (Some(t), Some(obj)) = (t, c.as_object_mut()) {
        obj.insert("resolved_t".into(), serde_json::json!(t));
    }
    c
}

/// Blaschke parameter from `--t`, or solved for the rotation number.
fn model_parameter(alpha: &ResolvedAlpha, t: Option<f64>, tol: f64) -> Result<(f64, Option<RotationSolve>), CliError> {
    match t {
        Some(t) if (0.0..=1.0).contains(&t) => Ok((t, None)),
        Some(t) => Err(CliError::usage(format!("--t = {t} is not in [0,1]"))),
        None => {
            let sol = solve_parameter(alpha.value, positive("solve-tol", tol)?, SolveOptions::default())?;
            Ok((sol.t, Some(sol)))
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub alpha: AlphaArgs,
    /// Number of entries, convergents and partial sums reported.
    #[arg(long, default_value_t = 20)]
    pub terms: usize,
    /// Block-class witness file to check against the expansion.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ClassifyPayload {
    value: f64,
    periodic: bool,
    truncated: bool,
    expansion: CFExpansion,
    convergents: Vec<ConvergentPair>,
    pz_statistic: f64,
    brjuno_partials: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e0: Option<E0Verdict>,
}

fn classify(a: &ClassifyArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let alpha = a.alpha.resolve()?;
    if a.terms == 0 {
        return Err(CliError::usage("--terms must be at least 1"));
    }
    let n = alpha.cf.available().map_or(a.terms, |k| k.min(a.terms));
    let e0 = match &a.witness {
        Some(p) => match load_instance(p)? {
            Instance::Witness(w) => Some(verify_e0(&alpha.cf, &w)?),
            other => {
                return Err(CliError::usage(format!(
                    "--witness expects a witness file, got a {} instance",
                    other.kind()
                )))
            }
        },
        None => None,
    };
    let payload = ClassifyPayload {
        value: alpha.value,
        periodic: alpha.cf.is_periodic(),
        truncated: alpha.cf.is_truncated(),
        expansion: alpha.cf.prefix(n)?,
        convergents: convergents(&alpha.cf, n)?,
        pz_statistic: pz_statistic(&alpha.cf, n)?,
        brjuno_partials: brjuno_partials(&alpha.cf, n)?,
        e0,
    };
    Ok(vec![Artifact { path: a.out.clone(), bytes: json_envelope(name, config, payload)? }])
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RotnumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub alpha: AlphaArgs,
    /// Certified bound on `|ρ(t) − α|`.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RotnumPayload {
    alpha: f64,
    solve: RotationSolve,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

fn rotnum(a: &RotnumArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let alpha = a.alpha.resolve()?;
    let solve = solve_parameter(alpha.value, positive("tol", a.tol)?, SolveOptions::default())?;
    let payload = RotnumPayload { alpha: alpha.value, warning: solve.warning(), solve };
    Ok(vec![Artifact { path: a.out.clone(), bytes: json_envelope(name, config, payload)? }])
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub alpha: AlphaArgs,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Blaschke parameter; solved from the rotation number when absent.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub solve_tol: f64,
    /// Angular tolerance of each inverse step, in turns.
    #[arg(long, default_value_t = 1e-12)]
    pub orbit_tol: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn partition(a: &PartitionArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let alpha = a.alpha.resolve()?;
    let (t, _) = model_parameter(&alpha, a.t, a.solve_tol)?;
    let lengths = partition_lengths(&BlaschkeModel::new(t), &alpha.cf, a.n_max, positive("orbit-tol", a.orbit_tol)?)?;
    let config = with_resolved_t(config, Some(t));
    Ok(vec![Artifact { path: a.out.clone(), bytes: csv_table(name, &config, &lengths.rows)? }])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ModelKind {
    /// The cubic Blaschke model, captured inside the closed unit disk.
    #[value(name = "F")]
    F,
    /// The quadratic polynomial, measured against its Siegel-disk approximation.
    #[value(name = "P")]
    P,
}

/// Model selection and escape parameters shared by scans and renders.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::F)]
    pub model: ModelKind,
    /// Width of the collar: escape is certified beyond distance `r`.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub solve_tol: f64,
    /// Critical-orbit length for the Siegel-disk polygon (model P).
    #[arg(long, default_value_t = 100_000)]
    pub orbit: usize,
    #[arg(long, default_value_t = 2048)]
    pub angle_bins: usize,
}

enum Model {
    F { model: BlaschkeModel<f64>, r: f64 },
    P { model: ModelP<f64>, siegel: crate::dynamics::SiegelApprox<f64>, r: f64 },
}

impl Model {
    fn new(m: &ModelArgs, alpha: &ResolvedAlpha) -> Result<Self, CliError> {
        let r = positive("r", m.r)?;
        Ok(match m.model {
            ModelKind::F => Model::F { model: BlaschkeModel::new(model_parameter(alpha, m.t, m.solve_tol)?.0), r },
            ModelKind::P => {
                let model = ModelP::new(alpha.value);
                let siegel = siegel_boundary(&model, m.orbit, m.angle_bins)?;
                Model::P { model, siegel, r }
            }
        })
    }

    fn parameter(&self) -> Option<f64> {
        match self {
            Model::F { model, .. } => Some(model.t()),
            Model::P { .. } => None,
        }
    }

    fn critical_point(&self) -> Complex<f64> {
        match self {
            Model::F { .. } => Complex::new(1.0, 0.0),
            Model::P { model, .. } => model.critical_point(),
        }
    }

    fn fate(&self, z: Complex<f64>, budget: u64) -> OrbitFate {
        match self {
            Model::F { model, r } => classify_f(model, *r, z, budget),
            Model::P { model, siegel, r } => k_r_fate(model, siegel, *r, z, budget),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub alpha: AlphaArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// `crit`, `re,im` or a real number.
    #[arg(long, default_value = "crit", allow_hyphen_values = true)]
    pub center: String,
    #[arg(long, default_value_t = 0.125)]
    pub r0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub factor: f64,
    #[arg(long, default_value_t = 4)]
    pub scales: usize,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Iteration budget at radii down to 2⁻⁸, doubled per halving below.
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// One density-scan CSV record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) struct ScanRecord {
    scale: usize,
    radius: f64,
    frac_escaped: f64,
    frac_captured: f64,
    frac_undecided: f64,
    samples: u64,
    ci: f64,
}

impl From<&ScanRow> for ScanRecord {
    fn from(r: &ScanRow) -> Self {
        ScanRecord {
            scale: r.scale,
            radius: r.radius,
            frac_escaped: r.frac_escaped,
            frac_captured: r.frac_captured,
            frac_undecided: r.frac_undecided,
            samples: r.samples,
            ci: r.ci_halfwidth,
        }
    }
}

impl From<ScanRecord> for ScanRow {
    fn from(r: ScanRecord) -> Self {
        ScanRow {
            scale: r.scale,
            radius: r.radius,
            frac_escaped: r.frac_escaped,
            frac_captured: r.frac_captured,
            frac_undecided: r.frac_undecided,
            samples: r.samples,
            ci_halfwidth: r.ci,
        }
    }
}

fn scan(a: &DensityScanArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let alpha = a.alpha.resolve()?;
    positive("r0", a.r0)?;
    let model = Model::new(&a.model, &alpha)?;
    let center = parse_center(&a.center, model.critical_point())?;
    let budget = a.budget;
    let s = density_scan(
        center,
        a.r0,
        a.factor,
        a.scales,
        |z, radius| model.fate(z, scan_budget(budget, radius)),
        a.grid,
        a.seed,
    )?;
    let rows: Vec<ScanRecord> = s.rows.iter().map(ScanRecord::from).collect();
    let config = with_resolved_t(config, model.parameter());
    Ok(vec![Artifact { path: a.out.clone(), bytes: csv_table(name, &config, &rows)? }])
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeepFitArgs {
    /// A density-scan CSV, or a JSON scan replay.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Rows of a density-scan CSV; `#` lines are comments.
pub(crate) fn read_scan_csv(path: &Path) -> Result<DensityScan, CliError> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let rows = rd
        .deserialize::<ScanRecord>()
        .map(|r| r.map(ScanRow::from))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::usage(format!("{}: scan schema mismatch: {e}", path.display())))?;
    Ok(DensityScan { center: (0.0, 0.0), rows })
}

fn deep_fit(a: &DeepFitArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let head = std::fs::read(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
    let scan = if head.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') {
        match load_instance(&a.input)? {
            Instance::Scan(s) => s,
            other => return Err(CliError::usage(format!("--input expects a scan, got a {} instance", other.kind()))),
        }
    } else {
        read_scan_csv(&a.input)?
    };
    let fit: DeficiencyFit = deficiency_exponent(&scan)?;
    Ok(vec![Artifact { path: a.out.clone(), bytes: json_envelope(name, config, fit)? }])
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RenderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub alpha: AlphaArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub center: String,
    /// Half the width of the window; pixels are square.
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

/// Binary greyscale pixmap with a `# config:` comment in the header.
fn pgm_with_config(
    name: &str,
    config: &serde_json::Value,
    w: usize,
    h: usize,
    pixels: &[u8],
) -> Result<Vec<u8>, CliError> {
    let header = serde_json::json!({ "version": VERSION_TAG, "subcommand": name, "config": config });
    let body = pgm(w, h, pixels);
    let mut out = format!("P5\n# config: {header}\n").into_bytes();
    out.extend_from_slice(&body[3..]);
    Ok(out)
}

fn render(a: &RenderArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let alpha = a.alpha.resolve()?;
    if a.width == 0 || a.height == 0 || a.width * a.height > 1 << 26 {
        return Err(CliError::usage("width and height must be positive with at most 2^26 pixels"));
    }
    let hw = positive("half-width", a.half_width)?;
    let model = Model::new(&a.model, &alpha)?;
    let center = parse_center(&a.center, model.critical_point())?;
    let px = 2.0 * hw / a.width as f64;
    let top = center.im + px * a.height as f64 / 2.0;
    let pixels: Vec<u8> = (0..a.height)
        .into_par_iter()
        .flat_map_iter(|i| {
            let model = &model;
            (0..a.width).map(move |j| {
                let z = Complex::new(center.re - hw + (j as f64 + 0.5) * px, top - (i as f64 + 0.5) * px);
                model.fate(z, a.budget).code()
            })
        })
        .collect();
    let config = with_resolved_t(config, model.parameter());
    Ok(vec![Artifact { path: Some(a.out.clone()), bytes: pgm_with_config(name, &config, a.width, a.height, &pixels)? }])
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverCheckArgs {
    /// 1: the M-adic exclusion lemma; 2: the dyadic density lemma.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub lemma: u8,
    /// Offset bound: each exclusion center satisfies |y_n − x| ≤ c·r_n.
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    /// Contraction of the exclusion radii: r_{n+1} ≤ η·r_n.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Number of scales.
    #[arg(long = "N", default_value_t = 10)]
    #[serde(rename = "N")]
    pub n_scales: usize,
    /// Density bound of the dyadic lemma.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Resolution of synthetic instances (tree depth of the cells).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check this instance file instead of a synthetic one.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Also write the checked instance.
    #[arg(long)]
    #[serde(skip)]
    pub save_instance: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn cover_check(a: &CoverCheckArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let loaded = a.instance.as_deref().map(load_instance).transpose()?;
    let (report, instance) = if a.lemma == 1 {
        let k = lemma1_constants(a.c, a.eta)?;
        let e = match loaded {
            Some(Instance::Covering(e)) => e,
            Some(other) => {
                return Err(CliError::usage(format!("--lemma 1 needs a covering instance, got {}", other.kind())))
            }
            None => synth_exclusion_set(a.seed, &k, a.n_scales, a.depth.unwrap_or(3))?,
        };
        let r = certify_lemma1(&e, &k, a.n_scales)?;
        (json_envelope(name, config, r)?, Instance::Covering(e))
    } else {
        let e = match loaded {
            Some(Instance::Density(e)) => e,
            Some(other) => {
                return Err(CliError::usage(format!("--lemma 2 needs a density instance, got {}", other.kind())))
            }
            None => synth_lemma2(a.seed, a.depth.unwrap_or(5), a.lambda)?,
        };
        let r = certify_lemma2(&e, a.lambda, false)?;
        (json_envelope(name, config, r)?, Instance::Density(e))
    };
    let mut out = vec![Artifact { path: a.out.clone(), bytes: report }];
    if let Some(p) = &a.save_instance {
        out.push(Artifact { path: Some(p.clone()), bytes: instance.to_bytes()? });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSource {
    /// Backward orbit under the Blaschke model (`Γ`).
    Blaschke,
    /// Backward orbit under the rigid rotation (`Γ′`).
    Rotation,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CellgraphArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub alpha: AlphaArgs,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = GraphSource::Blaschke)]
    pub graph: GraphSource,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    pub solve_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub orbit_tol: f64,
    /// Raster size for areas of the exponential images; 0 skips them.
    #[arg(long, default_value_t = 0)]
    pub exp_grid: usize,
    /// Side of the pixmap drawing of the graph over `[0,1] × [0,1.05]`.
    #[arg(long, default_value_t = 512)]
    pub ppm_size: usize,
    #[arg(long)]
    #[serde(skip)]
    pub ppm: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CellSummary {
    n: usize,
    #[serde(flatten)]
    class: CellClass,
    k: usize,
    left_j: u64,
    left_x: f64,
}

#[derive(Serialize)]
struct CellgraphPayload<'a> {
    source: GraphSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    vertices: &'a [Vertex],
    edges: &'a [Edge],
    cells: Vec<CellSummary>,
    strip_heights: Vec<f64>,
    sigma_fit: f64,
    max_slope: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dilatation: Option<Vec<DilatationLevel>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exp_areas: Option<ExpAreas>,
}

/// Edges of `Γ` over `[0,1] × [0, 1.05]`, black on white.
fn draw_graph(g: &GraphGamma, size: usize) -> Vec<u8> {
    let mut img = vec![255u8; size * size];
    let (sx, sy) = (size as f64, size as f64 / 1.05);
    let to_px = |x: f64, y: f64| (x * sx, size as f64 - y * sy);
    for e in &g.edges {
        let (a, b) = (&g.vertices[e.from], &g.vertices[e.to]);
        if (a.x < 0.0 && b.x < 0.0) || (a.x > 1.0 && b.x > 1.0) {
            continue;
        }
        let (p, q) = (to_px(a.x, a.y), to_px(b.x, b.y));
        let steps = ((q.0 - p.0).abs().max((q.1 - p.1).abs()).ceil() as usize).max(1);
        for s in 0..=steps {
            let u = s as f64 / steps as f64;
            let (x, y) = ((p.0 + u * (q.0 - p.0)).floor(), (p.1 + u * (q.1 - p.1)).floor());
            if x >= 0.0 && y >= 0.0 && (x as usize) < size && (y as usize) < size {
                img[y as usize * size + x as usize] = 0;
            }
        }
    }
    img
}

fn cellgraph(a: &CellgraphArgs, name: &str, config: &serde_json::Value) -> Result<Vec<Artifact>, CliError> {
    let alpha = a.alpha.resolve()?;
    if a.n_max < 1 {
        return Err(CliError::usage("--n-max must be at least 1"));
    }
    let rotation = build_partitions(CircleSource::Rotation { alpha: alpha.value }, &alpha.cf, a.n_max)?;
    let rot_graph = build_graph(&rotation)?;
    let (t, graph, dilatation) = match a.graph {
        GraphSource::Rotation => (None, rot_graph, None),
        GraphSource::Blaschke => {
            let (t, _) = model_parameter(&alpha, a.t, a.solve_tol)?;
            let model = BlaschkeModel::new(t);
            let tol = positive("orbit-tol", a.orbit_tol)?;
            let g = build_graph(&build_partitions(CircleSource::Blaschke { model: &model, tol }, &alpha.cf, a.n_max)?)?;
            let d = dilatation_statistics(&g, &rot_graph)?;
            (Some(t), g, Some(d))
        }
    };
    let config = &with_resolved_t(config, t);
    let heights = strip_height(&graph)?;
    let exp_areas = (a.exp_grid > 0).then(|| exp_cell_region_area(&graph, a.exp_grid)).transpose()?;
    let cells = (0..a.n_max)
        .flat_map(|n| enumerate_cells(&graph, n))
        .map(|c| CellSummary { n: c.n, class: c.class, k: c.k, left_j: c.x.j, left_x: c.x.x })
        .collect();
    let payload = CellgraphPayload {
        source: a.graph,
        t,
        vertices: &graph.vertices,
        edges: &graph.edges,
        cells,
        strip_heights: heights.heights,
        sigma_fit: heights.sigma,
        max_slope: graph.max_slope(),
        dilatation,
        exp_areas,
    };
    let mut out = vec![Artifact { path: a.out.clone(), bytes: json_envelope(name, config, payload)? }];
    if let Some(p) = &a.ppm {
        if a.ppm_size < 16 || a.ppm_size > 8192 {
            return Err(CliError::usage("--ppm-size must lie in 16..=8192"));
        }
        let img = draw_graph(&graph, a.ppm_size);
        out.push(Artifact {
            path: Some(p.clone()),
            bytes: pgm_with_config(name, config, a.ppm_size, a.ppm_size, &img)?,
        });
    }
    Ok(out)
}
