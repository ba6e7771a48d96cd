//! `slabkernel`: batch runs of the slab heat-conduction engine driven by a
//! JSON scenario file.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::{json, Value};

use slabkernel::eigen::solve_eigenvalues;
use slabkernel::kernel::KernelEval;
use slabkernel::model::{FieldRequest, Frame, SourceVariant};
use slabkernel::profile::{temperature, temperature_grid};
use slabkernel::reference::{
    compare_with_fd, fd_solve, numerical_ilt, rosenthal2d_cooling, rosenthal3d, steady_state_mean,
    steady_state_temperature,
};
use slabkernel::scenario::{Format, Scenario};

use output::{write_json, Cell, Table};

#[derive(Parser)]
#[command(name = "slabkernel", version, about = "Moving heat sources in a cooled slab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory; defaults to the scenario's `outputs.dir`, else `.`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of eigenmodes kept in the z-kernel series.
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Worker threads for the parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Table format, overriding the scenario.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenvalues, norms and residue amplitudes of the z-problem.
    Poles,
    /// The z-kernel on the scenario's (z, z′, t̄) samples.
    Kernel,
    /// Temperature on the requested points and times.
    Profile,
    /// Analytical field against the finite-difference and inverse-Laplace references.
    Compare,
    /// Steady closed-form limits against the steady series.
    Limits,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Poles => "poles",
            Command::Kernel => "kernel",
            Command::Profile => "profile",
            Command::Compare => "compare",
            Command::Limits => "limits",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Engine(slabkernel::Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<slabkernel::Error> for Failure {
    fn from(e: slabkernel::Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Engine(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }

    fn record(&self) -> Value {
        match self {
            Failure::Engine(e) => {
                let details: Vec<Value> = match e {
                    slabkernel::Error::Validation(list) => list
                        .iter()
                        .map(|v| json!({"code": v.code(), "message": v.to_string()}))
                        .collect(),
                    _ => Vec::new(),
                };
                json!({"error": e.code(), "message": e.to_string(), "details": details})
            }
            Failure::Io(path, e) => json!({
                "error": "OutputUnwritable",
                "message": format!("{}: {e}", path.display()),
                "details": [],
            }),
            Failure::Usage(msg) => json!({"error": "InvalidRequest", "message": msg, "details": []}),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

/// Everything a subcommand needs, resolved from flags and the scenario.
struct Context {
    scenario: Scenario,
    scenario_path: PathBuf,
    out: PathBuf,
    format: Format,
    threads: usize,
    written: Vec<String>,
}

impl Context {
    fn table(&mut self, table: &Table, stem: &str) -> Run<()> {
        let path = table
            .write(&self.out, stem, self.format)
            .map_err(|e| Failure::Io(self.out.clone(), e))?;
        self.note(&path);
        Ok(())
    }

    fn json(&mut self, value: &Value, name: &str) -> Run<()> {
        let path = self.out.join(name);
        write_json(&path, value).map_err(|e| Failure::Io(path.clone(), e))?;
        self.note(&path);
        Ok(())
    }

    fn note(&mut self, path: &Path) {
        info!("wrote {}", path.display());
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.written.push(name);
    }

    fn kernel(&self) -> Run<KernelEval> {
        Ok(KernelEval::new(&self.scenario.slab, self.scenario.truncation)?)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SLABKERNEL_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command, cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.record());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(command: Command, common: Common) -> Run<()> {
    let scenario_path = common
        .scenario
        .ok_or_else(|| Failure::Usage("--scenario is required".into()))?;
    let mut scenario = Scenario::load(&scenario_path)?;
    if let Some(n) = common.truncation {
        scenario.truncation = n;
    }
    scenario.validate()?;

    let threads = match common.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(k) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                warn!("thread pool already initialised: {e}");
            }
            k
        }
        None => rayon::current_num_threads(),
    };

    let out = common
        .out
        .or_else(|| scenario.outputs.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Failure::Io(out.clone(), e))?;
    let format = match common.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => scenario.outputs.format,
    };

    let mut ctx = Context {
        scenario,
        scenario_path,
        out,
        format,
        threads,
        written: Vec::new(),
    };
    info!("{} on {}", command.name(), ctx.scenario_path.display());
    match command {
        Command::Poles => poles(&mut ctx)?,
        Command::Kernel => kernel(&mut ctx)?,
        Command::Profile => profile(&mut ctx)?,
        Command::Compare => compare(&mut ctx)?,
        Command::Limits => limits(&mut ctx)?,
    }
    manifest(&mut ctx, command)
}

fn poles(ctx: &mut Context) -> Run<()> {
    let spectrum = solve_eigenvalues(&ctx.scenario.slab, ctx.scenario.poles)?;
    let mut table = Table::new(&["n", "lambda", "lambda_sq", "norm", "amplitude"]);
    for mode in &spectrum.modes {
        table.push(vec![
            Cell::Int(mode.n),
            Cell::Float(mode.lambda),
            Cell::Float(mode.lambda * mode.lambda),
            Cell::Float(mode.norm),
            Cell::Float(mode.amplitude),
        ]);
    }
    ctx.table(&table, "poles")
}

fn kernel(ctx: &mut Context) -> Run<()> {
    let k = ctx.kernel()?;
    let model = ctx.scenario.slab;
    let spec = ctx.scenario.kernel.clone().unwrap_or_else(|| slabkernel::scenario::KernelSpec {
        z: (0..=10).map(|i| model.w * i as f64 / 10.0).collect(),
        z_source: vec![ctx.scenario.source.center[2]],
        tbar: ctx.scenario.request.times.iter().copied().filter(|t| *t > 0.0).collect(),
    });
    for &z in spec.z.iter().chain(&spec.z_source) {
        if !(0.0..=model.w).contains(&z) {
            return Err(slabkernel::Error::Validation(vec![
                slabkernel::ValidationError::PointOutsideSlab { z, w: model.w },
            ])
            .into());
        }
    }
    let ilt = ctx.scenario.ilt;
    let mut columns = vec!["z", "z_source", "tbar", "value", "tail", "flag"];
    if ilt.is_some() {
        columns.extend(["ilt", "ilt_error"]);
    }
    let mut table = Table::new(&columns);
    for &zp in &spec.z_source {
        for &tbar in &spec.tbar {
            for &z in &spec.z {
                let v = k.g_z_checked(z, zp, tbar);
                // A failed inversion is reported on its row, not fatal.
                let inverse = ilt.as_ref().map(|plan| {
                    numerical_ilt(|s| k.g_z_transform(z, zp, s), tbar, plan).map_err(|e| {
                        warn!("inversion at z = {z}, z' = {zp}, t = {tbar}: {e}");
                    })
                });
                let failed = matches!(inverse, Some(Err(())));
                let flag = match (v.truncated, failed) {
                    (false, false) => "ok",
                    (true, false) => "truncation",
                    (false, true) => "ilt",
                    (true, true) => "truncation|ilt",
                };
                let mut row = vec![
                    Cell::Float(z),
                    Cell::Float(zp),
                    Cell::Float(tbar),
                    Cell::Float(v.value),
                    Cell::Float(v.tail),
                    Cell::Text(flag),
                ];
                match inverse {
                    Some(Ok(inv)) => row.extend([Cell::Float(inv.value), Cell::Float(inv.error)]),
                    Some(Err(())) => row.extend([Cell::Float(f64::NAN), Cell::Float(f64::NAN)]),
                    None => {}
                }
                table.push(row);
            }
        }
    }
    ctx.table(&table, "kernel")
}

fn profile(ctx: &mut Context) -> Run<()> {
    let k = ctx.kernel()?;
    let s = &ctx.scenario;
    let mut table = Table::new(&["t", "x", "y", "z", "value", "flag"]);
    let grid_only = s.request.points.is_empty() && s.request.grid.is_some();
    if grid_only && s.request.frame == Frame::CoMoving && s.source.variant != SourceVariant::PointOnOff {
        let grid = s.request.grid.expect("grid present");
        let (xs, ys, zs) = (grid.x.values(), grid.y.values(), grid.z.values());
        let field = temperature_grid(&k, &s.source, &xs, &ys, &zs, &s.request.times, &s.plan)?;
        for (ti, &t) in field.times.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    for (kk, &z) in zs.iter().enumerate() {
                        let value = field.value(ti, i, j, kk);
                        let flags = slabkernel::model::SampleFlags {
                            truncation: field.truncated && value != 0.0,
                            quadrature: !field.converged[ti],
                        };
                        table.push(vec![
                            Cell::Float(t),
                            Cell::Float(x),
                            Cell::Float(y),
                            Cell::Float(z),
                            Cell::Float(value),
                            Cell::Text(flags.label()),
                        ]);
                    }
                }
            }
        }
    } else {
        let request = s.request.field_request();
        let field = temperature(&k, &s.source, &request, &s.plan)?;
        for (ti, &t) in request.times.iter().enumerate() {
            for (pi, p) in request.points.iter().enumerate() {
                table.push(vec![
                    Cell::Float(t),
                    Cell::Float(p[0]),
                    Cell::Float(p[1]),
                    Cell::Float(p[2]),
                    Cell::Float(field.values[ti][pi]),
                    Cell::Text(field.flags[ti][pi].label()),
                ]);
            }
        }
    }
    ctx.table(&table, "profile")
}

/// Smallest αt̄/w² at which the inverse-Laplace check is run; below it the
/// kernel is too sharply peaked for a fixed node count.
const ILT_MIN_FOURIER: f64 = 0.04;

fn compare(ctx: &mut Context) -> Run<()> {
    let k = ctx.kernel()?;
    let s = &ctx.scenario;
    let spec = s
        .fd
        .clone()
        .ok_or_else(|| Failure::Usage("compare needs an `fd` section in the scenario".into()))?;
    let config = s.fd_config().expect("fd section present");
    config.validate(&s.slab)?;
    let times = s.fd_times().expect("fd section present");
    info!(
        "mesh {}x{}x{}, dt {:e}, {} snapshots",
        config.nx,
        config.ny,
        config.nz,
        config.dt,
        times.len()
    );
    let fd = fd_solve(&s.slab, &s.source, &config, &times)?;
    let discrepancy = compare_with_fd(&k, &s.source, &fd, spec.stride, &s.plan)?;

    // Centre line through the source depth for plotting.
    let nearest = |axis: &[f64], x: f64| {
        (0..axis.len())
            .min_by(|&a, &b| (axis[a] - x).abs().total_cmp(&(axis[b] - x).abs()))
            .unwrap_or(0)
    };
    let j = nearest(&fd.ys, s.source.center[1]);
    let kz = nearest(&fd.zs, s.source.center[2]);
    let points: Vec<[f64; 3]> = fd.xs.iter().map(|&x| [x, fd.ys[j], fd.zs[kz]]).collect();
    let mut request = FieldRequest::new(points.clone(), fd.times.clone());
    request.frame = fd.config.frame;
    let line = temperature(&k, &s.source, &request, &s.plan)?;
    let mut overlay = Table::new(&["t", "x", "y", "z", "analytical", "fd"]);
    for (ti, &t) in fd.times.iter().enumerate() {
        for (i, p) in points.iter().enumerate() {
            overlay.push(vec![
                Cell::Float(t),
                Cell::Float(p[0]),
                Cell::Float(p[1]),
                Cell::Float(p[2]),
                Cell::Float(line.values[ti][i]),
                Cell::Float(fd.value(ti, i, j, kz)),
            ]);
        }
    }

    let ilt_report = match &s.ilt {
        None => Value::Null,
        Some(plan) => {
            let model = s.slab;
            let zp = s.source.center[2];
            let mut worst: f64 = 0.0;
            let mut samples = 0;
            let mut checked = Vec::new();
            for &tbar in times.iter().filter(|&&t| model.alpha * t >= ILT_MIN_FOURIER * model.w * model.w) {
                let zs: Vec<f64> = (0..=10).map(|i| model.w * i as f64 / 10.0).collect();
                let series: Vec<f64> = zs.iter().map(|&z| k.g_z(z, zp, tbar)).collect();
                let peak = series.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for (&z, &g) in zs.iter().zip(&series) {
                    let inv = numerical_ilt(|p| k.g_z_transform(z, zp, p), tbar, plan)?;
                    worst = worst.max((inv.value - g).abs() / peak.max(f64::MIN_POSITIVE));
                    samples += 1;
                }
                checked.push(tbar);
            }
            json!({"tbar": checked, "samples": samples, "max_rel_error": worst})
        }
    };

    let report = json!({
        "scenario": s.name,
        "mesh": {
            "nx": fd.config.nx, "ny": fd.config.ny, "nz": fd.config.nz,
            "lx": fd.config.lx, "ly": fd.config.ly, "dt": fd.config.dt,
            "steps": fd.steps, "stride": spec.stride,
        },
        "times": fd.times,
        "fd": discrepancy,
        "ilt": ilt_report,
    });
    ctx.table(&overlay, "compare_overlay")?;
    ctx.json(&report, "compare.json")
}

fn limits(ctx: &mut Context) -> Run<()> {
    let s = &ctx.scenario;
    let spec = s
        .limits
        .clone()
        .ok_or_else(|| Failure::Usage("limits needs a `limits` section in the scenario".into()))?;
    let model = s.slab;
    let zp = s.source.center[2];
    let spectrum = solve_eigenvalues(&model, spec.modes)?;
    let q = spec.power;
    let q_line = q / (2.0 * std::f64::consts::PI * model.w);
    let strength = q / (4.0 * std::f64::consts::PI * model.alpha);
    let mut table = Table::new(&["r", "x", "series", "series_mean", "rosenthal2d", "rosenthal3d"]);
    for &r in &spec.radii {
        // Behind and ahead of the source along the path.
        for x in [r, -r] {
            table.push(vec![
                Cell::Float(r),
                Cell::Float(x),
                Cell::Float(steady_state_temperature(&spectrum, q, x, 0.0, zp, zp, spec.modes)?),
                Cell::Float(steady_state_mean(&spectrum, q, x, 0.0, zp, spec.modes)?),
                Cell::Float(rosenthal2d_cooling(&model, q_line, r, x)?),
                Cell::Float(rosenthal3d(&model, strength, r, x)?),
            ]);
        }
    }
    ctx.table(&table, "limits")
}

fn manifest(ctx: &mut Context, command: Command) -> Run<()> {
    let s = &ctx.scenario;
    let format = match ctx.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut outputs = ctx.written.clone();
    outputs.push("manifest.json".into());
    let value = json!({
        "tool": "slabkernel",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": command.name(),
        "scenario": ctx.scenario_path.display().to_string(),
        "name": s.name,
        "truncation": s.truncation,
        "poles": s.poles,
        "plan": s.plan,
        "ilt": s.ilt,
        "threads": ctx.threads,
        "format": format,
        "outputs": outputs,
    });
    ctx.json(&value, "manifest.json")
}
