//! The `dcx` command line: workspace decomposition, gluing, verification and the gallery.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod error;
pub mod gluespec;
pub mod workspace;

use crate::canonical::to_canonical;
use crate::error::CliError;
use crate::gluespec::{GlueRun, GlueSpec};
use crate::workspace::Workspace;
use clap::{Args, Parser, Subcommand};
use dcx::gallery::{chyba_grid, BumpSystem};
use dcx::verify::{check_midpoint_convex, RegionSampler};
use dcx::{ConvexFn, ConvexSet, HullBody, Norm, Provenance, SamplingConfig, VerificationReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "dcx", version, about = "Delta-convex calculus: build, glue and verify control functions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Output file; `.csv` selects CSV where a command supports it, anything else JSON.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed stored in the input file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the verification tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample count (value samples, convexity pairs or control segments, per command).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Grid size for CSV dumps.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Overrides the ambient norm of the input.
    #[arg(long, global = true, value_parser = parse_norm)]
    norm: Option<Norm>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the d.c. function of a workspace and check its control.
    Decompose { file: PathBuf },
    /// Run the gluing recursion of a glue request.
    Glue { spec: PathBuf },
    /// Check the control of a workspace or a glue request.
    Verify {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        segments: Option<usize>,
    },
    /// Explicit constructions.
    Gallery {
        #[command(subcommand)]
        which: Gallery,
    },
    /// Minkowski gauge of a hull body at a point.
    Gauge {
        #[arg(long)]
        body: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Rewrite a workspace in canonical JSON.
    Fmt { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum Gallery {
    /// The dyadic integral and its convex pair, sampled on `[-1, 0]`.
    Chyba,
    /// A bump mapping and its control.
    Bumps {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    match s {
        "l1" => Ok(Norm::L1),
        "l2" => Ok(Norm::L2),
        "linf" => Ok(Norm::Linf),
        _ => Err(format!("unknown norm `{s}`; expected l1, l2 or linf")),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("dcx: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("DCX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Decompose { file } => decompose(g, &load_workspace(g, file)?),
        Command::Glue { spec } => glue(g, &load_glue(g, spec)?),
        Command::Verify { function, segments } => {
            let text = read(function)?;
            if is_glue_spec(&text) {
                verify_glue(g, &glue_overrides(g, GlueSpec::parse(&text)?), *segments)
            } else {
                verify_workspace(g, &workspace_overrides(g, Workspace::parse(&text)?), *segments)
            }
        }
        Command::Gallery { which: Gallery::Chyba } => chyba(g),
        Command::Gallery { which: Gallery::Bumps { spec } } => bumps(g, spec),
        Command::Gauge { body, point } => gauge(body, point),
        Command::Fmt { file } => {
            let ws = Workspace::parse(&read(file)?)?;
            emit_text(g, &to_canonical(&ws)?)?;
            Ok(true)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn is_glue_spec(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.as_object().map(|o| o.contains_key("stages")))
        .unwrap_or(false)
}

fn workspace_overrides(g: &Global, mut ws: Workspace) -> Workspace {
    if let Some(s) = g.seed {
        ws.seed = s;
    }
    if let Some(t) = g.tol {
        ws.tolerances.tol = t;
    }
    if let Some(n) = g.norm {
        ws.ambient.norm = n;
    }
    ws
}

fn glue_overrides(g: &Global, mut spec: GlueSpec) -> GlueSpec {
    if let Some(s) = g.seed {
        spec.seed = s;
    }
    if let Some(n) = g.norm {
        spec.ambient.norm = n;
    }
    spec
}

fn load_workspace(g: &Global, path: &Path) -> Result<Workspace, CliError> {
    Ok(workspace_overrides(g, Workspace::parse(&read(path)?)?))
}

fn load_glue(g: &Global, path: &Path) -> Result<GlueSpec, CliError> {
    Ok(glue_overrides(g, GlueSpec::parse(&read(path)?)?))
}

/// Writes to `--out` or stdout.
fn emit_text(g: &Global, text: &str) -> Result<(), CliError> {
    match &g.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn wants_csv(g: &Global) -> bool {
    g.out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn csv_sink(g: &Global) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let inner: Box<dyn Write> = match &g.out {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(inner))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct PointSample {
    x: Vec<f64>,
    value: f64,
    control: f64,
    /// The expression evaluated directly, without the d.c. machinery.
    direct: f64,
}

#[derive(Serialize)]
struct DecomposeReport<'a> {
    command: &'static str,
    pass: bool,
    provenance: &'a Provenance,
    domain: &'a ConvexSet,
    samples: Vec<PointSample>,
    value_error: f64,
    report: VerificationReport,
}

fn sampling(ws: &Workspace, segments: Option<usize>) -> SamplingConfig {
    let mut cfg = SamplingConfig::default()
        .with_segments(segments.unwrap_or(ws.tolerances.segments))
        .with_duals(ws.tolerances.duals)
        .with_tol(ws.tolerances.tol)
        .with_seed(ws.seed);
    if let Some(r) = &ws.region {
        cfg = cfg.on(r.clone().with_norm(ws.ambient.norm));
    }
    cfg
}

fn decompose(g: &Global, ws: &Workspace) -> Result<bool, CliError> {
    let f = ws.build()?;
    let report = f.check_control(&sampling(ws, None))?;
    let region = ws.region.clone().unwrap_or_else(|| f.domain().clone());
    let sampler = RegionSampler::new(&region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ws.seed);
    let samples: Vec<PointSample> = (0..g.samples.unwrap_or(32))
        .map(|_| {
            let x = sampler.point(&mut rng);
            PointSample {
                value: f.value(&x),
                control: f.control().value(&x),
                direct: ws.value(&x),
                x,
            }
        })
        .collect();
    let value_error = samples
        .iter()
        .map(|s| (s.value - s.direct).abs() / (1.0 + s.direct.abs()))
        .fold(0.0, f64::max);
    let pass = report.pass;
    let out = DecomposeReport {
        command: "decompose",
        pass,
        provenance: f.provenance(),
        domain: f.domain(),
        samples,
        value_error,
        report,
    };
    emit_text(g, &to_canonical(&out)?)?;
    Ok(pass)
}

fn verify_workspace(g: &Global, ws: &Workspace, segments: Option<usize>) -> Result<bool, CliError> {
    let f = ws.build()?;
    let report = f.check_control(&sampling(ws, segments.or(g.samples)))?;
    let pass = report.pass;
    emit_text(g, &to_canonical(&report)?)?;
    Ok(pass)
}

/// Midpoint convexity of the glued control and its control contract, both on the request's region.
fn glue_reports(spec: &GlueSpec, run: &GlueRun, samples: usize, tol: f64) -> Result<Vec<VerificationReport>, CliError> {
    let region = spec.region.clone().with_norm(spec.ambient.norm);
    let control = run.function.control().clone();
    let convex = check_midpoint_convex(&move |x: &[f64]| control.value(x), &region, samples, tol, spec.seed)?;
    let cfg = SamplingConfig::default()
        .with_segments(samples)
        .with_tol(tol)
        .with_seed(spec.seed)
        .on(region);
    let contract = run.function.check_control(&cfg)?;
    Ok(vec![convex, contract])
}

fn verify_glue(g: &Global, spec: &GlueSpec, segments: Option<usize>) -> Result<bool, CliError> {
    let run = spec.run()?;
    let reports = glue_reports(spec, &run, segments.or(g.samples).unwrap_or(10_000), g.tol.unwrap_or(1e-8))?;
    let pass = reports.iter().all(|r| r.pass);
    emit_text(g, &to_canonical(&reports)?)?;
    Ok(pass)
}

#[derive(Serialize)]
struct GlueReport<'a> {
    command: &'static str,
    pass: bool,
    stages: usize,
    certified_on: &'a ConvexSet,
    bounds: &'a [f64],
    shifts: &'a [f64],
    records: &'a [dcx::glue::StageRecord],
    reports: Vec<VerificationReport>,
}

fn glue(g: &Global, spec: &GlueSpec) -> Result<bool, CliError> {
    let run = spec.run()?;
    let reports = glue_reports(spec, &run, g.samples.unwrap_or(10_000), g.tol.unwrap_or(1e-8))?;
    let pass = reports.iter().all(|r| r.pass);
    if wants_csv(g) {
        glue_csv(g, spec, &run)?;
    } else {
        let out = GlueReport {
            command: "glue",
            pass,
            stages: spec.stage_sets()?.len(),
            certified_on: &run.glued.certified_on,
            bounds: run.glued.family.bounds(),
            shifts: run.glued.family.shifts(),
            records: &run.glued.records,
            reports,
        };
        emit_text(g, &to_canonical(&out)?)?;
    }
    Ok(pass)
}

/// `x, φ_n, h_n, g_n, f_n, f` on a grid over the region; one dimension only.
fn glue_csv(g: &Global, spec: &GlueSpec, run: &GlueRun) -> Result<(), CliError> {
    if spec.ambient.dimension != 1 {
        return Err(CliError::Input("CSV dumps of glued stages are one-dimensional".into()));
    }
    let (lo, hi) = spec
        .region
        .bounding_box()
        .ok_or_else(|| CliError::Input("the region must be bounded".into()))?;
    let n = g.grid.unwrap_or(1001).max(2);
    let ex = spec.exhaustion()?;
    let glued = &run.glued;
    let bounds = glued.family.bounds();
    let phis: Vec<ConvexFn> = (0..glued.patches.len())
        .map(|k| {
            let coeff = (bounds[k + 1] + 1.0) / ex.gaps()[k];
            ConvexFn::distance(coeff, ex.stages()[k].clone(), ex.ambient().clone())
        })
        .collect::<dcx::Result<_>>()?;
    let mut header = vec!["x".to_string()];
    let families: [(&str, &[ConvexFn]); 4] = [
        ("phi", &phis),
        ("h", &glued.patches),
        ("g", &glued.raises),
        ("f", &glued.partial),
    ];
    for (name, fs) in &families {
        header.extend((1..=fs.len()).map(|k| format!("{name}_{k}")));
    }
    header.push("f".into());
    let mut w = csv_sink(g)?;
    w.write_record(&header)?;
    for i in 0..n {
        let x = [lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64];
        let mut row = vec![num(x[0])];
        for (_, fs) in &families {
            row.extend(fs.iter().map(|f| num(f.value(&x))));
        }
        row.push(num(glued.control.value(&x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn chyba(g: &Global) -> Result<bool, CliError> {
    let rows = chyba_grid(g.grid.unwrap_or(4096))?;
    let mut w = csv_sink(g)?;
    w.write_record(["x", "d", "g", "v", "c1", "c2", "c1_minus_c2"])?;
    for r in rows {
        w.write_record([
            num(r.x),
            r.d.to_string(),
            num(r.g),
            r.v.map(|v| v.to_string()).unwrap_or_default(),
            num(r.c1),
            num(r.c2),
            num(r.c1 - r.c2),
        ])?;
    }
    w.flush()?;
    Ok(true)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpSpec {
    dimension: usize,
    targets: Vec<Vec<f64>>,
    #[serde(default)]
    rho: Option<f64>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    grid: Option<usize>,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct BumpReport<'a> {
    command: &'static str,
    pass: bool,
    system: &'a BumpSystem,
    reports: Vec<VerificationReport>,
}

fn bumps(g: &Global, path: &Path) -> Result<bool, CliError> {
    let spec: BumpSpec = serde_json::from_str(&read(path)?).map_err(CliError::parse)?;
    let seed = g.seed.unwrap_or(spec.seed);
    let sys = BumpSystem::standard(spec.dimension, spec.targets, spec.rho, spec.delta)?;
    let map = sys.mapping()?;
    let cfg = SamplingConfig::default()
        .with_segments(g.samples.unwrap_or(10_000))
        .with_tol(g.tol.unwrap_or(1e-8))
        .with_seed(seed);
    let m = sys.dimension;
    let mut regions = vec![ConvexSet::cube(&vec![0.0; m], 1.5, false)];
    // the bump regions are small; give each its own box
    for n in 0..sys.targets.len() {
        let e = sys.basis(n);
        let reach = 1.2
            * sys
                .boundary_points(n, 256, seed)
                .iter()
                .map(|p| Norm::Linf.dist(p, &e))
                .fold(0.0, f64::max);
        regions.push(ConvexSet::cube(&e, reach, false));
    }
    let reports: Vec<VerificationReport> = regions
        .into_iter()
        .map(|r| map.check_control(&cfg.clone().on(r.with_norm(Norm::Linf))))
        .collect::<dcx::Result<_>>()?;
    let pass = reports.iter().all(|r| r.pass);
    if wants_csv(g) {
        let n = g.grid.or(spec.grid).unwrap_or(101).max(2);
        if m > 3 {
            return Err(CliError::Input("grid dumps are limited to dimension 3".into()));
        }
        let control = map.control().clone();
        let mut w = csv_sink(g)?;
        let mut header: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
        header.extend((1..=map.output_dim()).map(|j| format!("H{j}")));
        header.extend(["h".to_string(), "region".to_string()]);
        w.write_record(&header)?;
        for idx in 0..n.pow(m as u32) {
            let x: Vec<f64> = (0..m)
                .map(|i| {
                    let k = (idx / n.pow(i as u32)) % n;
                    -1.5 + 3.0 * k as f64 / (n - 1) as f64
                })
                .collect();
            let mut row: Vec<String> = x.iter().map(|v| num(*v)).collect();
            row.extend(map.apply(&x).into_iter().map(num));
            row.push(num(control.value(&x)));
            row.push(sys.active(&x).map(|k| (k + 1).to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
    } else {
        let out = BumpReport {
            command: "gallery bumps",
            pass,
            system: &sys,
            reports,
        };
        emit_text(g, &to_canonical(&out)?)?;
    }
    Ok(pass)
}

fn gauge(body: &Path, point: &str) -> Result<bool, CliError> {
    let body: HullBody = serde_json::from_str(&read(body)?).map_err(CliError::parse)?;
    let x: Vec<f64> = point
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Input(format!("bad coordinate `{s}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    println!("{}", body.gauge(&x)?);
    Ok(true)
}

