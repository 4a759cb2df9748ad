use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use awm_core::config::ConfigFile;
use awm_core::density::{scale_density, CanonicalDensity};
use awm_core::empirical::{load_households_path, EmpiricalDistribution};
use awm_core::fitter::{self, Fitter, ModelFamily, SearchConfig, TrendRow};
use awm_core::io::{self, CurveDocument};
use awm_core::lorenz::{self, gini, LorenzCurve, DEFAULT_RESOLUTION};
use awm_core::montecarlo::{self, ModelKind, SimConfig};
use awm_core::params::ParameterVector;
use awm_core::sam::sam_lorenz_curve;
use awm_core::solver::{solve_model, SolverConfig};
use awm_core::Error;

const EXIT_IO: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Affine Wealth Model toolkit: solve, simulate and fit wealth distributions.
#[derive(Parser)]
#[command(name = "awm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state Lorenz curve and density for θ = (χ, ζ, κ).
    Solve(SolveArgs),
    /// Monte Carlo simulation of the agent process.
    Simulate(SimulateArgs),
    /// Fit a model family to household wealth data.
    Fit(FitArgs),
    /// Fit every data file in a directory and emit a parameter table.
    Trend(TrendArgs),
    /// Lorenz curve of household data, a density file, or the analytic SAM.
    Lorenz(LorenzArgs),
    /// Gini coefficient of a curve or of household data.
    Gini(GiniArgs),
    /// Apply one symmetry (duality, shift or scale) to a curve or density.
    Transform(TransformArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Number of log-spaced solver cells.
    #[arg(long = "grid")]
    n_cells: Option<usize>,
    /// Initial upper wealth cutoff (doubled automatically when needed).
    #[arg(long)]
    w_max: Option<f64>,
    /// Relaxation pseudo-time step in (0, 1].
    #[arg(long)]
    dt: Option<f64>,
    /// Convergence threshold on the integrated residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
}

impl SolverFlags {
    fn resolve(&self, cfg: &ConfigFile, base: SolverConfig) -> anyhow::Result<SolverConfig> {
        Ok(SolverConfig {
            n_cells: cfg.pick(self.n_cells, "grid", base.n_cells)?,
            w_max: cfg.pick(self.w_max, "w-max", base.w_max)?,
            dt: cfg.pick(self.dt, "dt", base.dt)?,
            tol_residual: cfg.pick(self.tol, "tol", base.tol_residual)?,
            max_steps: cfg.pick(self.max_steps, "max-steps", base.max_steps)?,
            ..base
        })
    }
}

#[derive(Args)]
struct ThetaFlags {
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

impl ThetaFlags {
    fn resolve(&self, cfg: &ConfigFile) -> anyhow::Result<ParameterVector> {
        let chi = cfg
            .pick_opt(self.chi, "chi")?
            .ok_or_else(|| usage("--chi is required (flag or config key 'chi')"))?;
        let zeta = cfg.pick(self.zeta, "zeta", 0.0)?;
        let kappa = cfg.pick(self.kappa, "kappa", 0.0)?;
        Ok(ParameterVector::new(chi, zeta, kappa)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    theta: ThetaFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Number of points of the output Lorenz curve.
    #[arg(long)]
    resolution: Option<usize>,
    /// Key-value config file (defaults to $AWM_CONFIG).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for lorenz.csv, lorenz.json and density.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimModel {
    Sam,
    Eysm,
    Awm,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: Option<SimModel>,
    #[command(flatten)]
    theta: ThetaFlags,
    #[arg(long)]
    agents: Option<usize>,
    /// Transactional time advanced per sweep.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    sweeps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Average this many Lorenz snapshots taken after the run.
    #[arg(long)]
    snapshots: Option<usize>,
    /// Sweeps between snapshots.
    #[arg(long)]
    interval: Option<u64>,
    /// Key-value config file, or a JSON SimConfig document (defaults to $AWM_CONFIG).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Sam,
    EysmRedist,
    EysmFull,
    Awm,
}

impl From<FamilyArg> for ModelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Sam => ModelFamily::Sam,
            FamilyArg::EysmRedist => ModelFamily::EysmRedist,
            FamilyArg::EysmFull => ModelFamily::EysmFull,
            FamilyArg::Awm => ModelFamily::Awm,
        }
    }
}

#[derive(Args)]
struct SearchFlags {
    #[arg(long)]
    chi_min: Option<f64>,
    #[arg(long)]
    chi_max: Option<f64>,
    #[arg(long)]
    zeta_min: Option<f64>,
    #[arg(long)]
    zeta_max: Option<f64>,
    #[arg(long)]
    kappa_min: Option<f64>,
    #[arg(long)]
    kappa_max: Option<f64>,
    /// Coarse-grid points per axis.
    #[arg(long)]
    grid_density: Option<usize>,
    #[arg(long)]
    refine_tol: Option<f64>,
    /// f-grid size for the discrepancy.
    #[arg(long)]
    resolution: Option<usize>,
    /// Solver cells used for each model evaluation.
    #[arg(long = "grid")]
    n_cells: Option<usize>,
}

impl SearchFlags {
    fn resolve(&self, cfg: &ConfigFile) -> anyhow::Result<SearchConfig> {
        let d = SearchConfig::default();
        Ok(SearchConfig {
            chi_range: (
                cfg.pick(self.chi_min, "chi-min", d.chi_range.0)?,
                cfg.pick(self.chi_max, "chi-max", d.chi_range.1)?,
            ),
            zeta_range: (
                cfg.pick(self.zeta_min, "zeta-min", d.zeta_range.0)?,
                cfg.pick(self.zeta_max, "zeta-max", d.zeta_range.1)?,
            ),
            kappa_range: (
                cfg.pick(self.kappa_min, "kappa-min", d.kappa_range.0)?,
                cfg.pick(self.kappa_max, "kappa-max", d.kappa_range.1)?,
            ),
            grid_density: cfg.pick(self.grid_density, "grid-density", d.grid_density)?,
            refine_tol: cfg.pick(self.refine_tol, "refine-tol", d.refine_tol)?,
            curve_resolution: cfg.pick(self.resolution, "resolution", d.curve_resolution)?,
            solver: SolverConfig {
                n_cells: cfg.pick(self.n_cells, "grid", d.solver.n_cells)?,
                ..d.solver
            },
            ..d
        })
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    model: FamilyArg,
    /// Household file with `weight,networth` columns.
    #[arg(long)]
    data: PathBuf,
    /// Extra household records (e.g. a rich list) merged into --data.
    #[arg(long)]
    extra: Vec<PathBuf>,
    #[command(flatten)]
    search: SearchFlags,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json, local_error.csv and overlay.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct TrendArgs {
    #[arg(long, value_enum)]
    model: FamilyArg,
    /// Directory of `*.csv` household files; each file stem is a row label.
    #[arg(long)]
    data_dir: PathBuf,
    #[command(flatten)]
    search: SearchFlags,
    /// Number of concurrent fits.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV table.
    #[arg(long, default_value = "trend.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct LorenzArgs {
    /// Household file with `weight,networth` columns.
    #[arg(long, conflicts_with_all = ["density", "sam_chi"])]
    data: Option<PathBuf>,
    /// Density file (`w,p` CSV or JSON document).
    #[arg(long, conflicts_with = "sam_chi")]
    density: Option<PathBuf>,
    /// Analytic single-agent-model curve at this χ.
    #[arg(long)]
    sam_chi: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Output file (`.json` for a JSON document, CSV otherwise).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GiniArgs {
    /// Lorenz curve file (`f,l` CSV or JSON document).
    #[arg(long, conflicts_with = "data")]
    curve: Option<PathBuf>,
    /// Household file with `weight,networth` columns.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformOp {
    Dual,
    Shift,
    Scale,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long, value_enum)]
    op: TransformOp,
    /// Input Lorenz curve (dual, shift).
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Input canonical density (scale).
    #[arg(long)]
    density: Option<PathBuf>,
    #[arg(long)]
    chi: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Agent count for scale.
    #[arg(long)]
    n: Option<f64>,
    /// Total wealth for scale.
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        return EXIT_USAGE;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Infeasible(_) | Error::Domain(_) => EXIT_INFEASIBLE,
                Error::Convergence { .. } => EXIT_NONCONVERGENCE,
                _ => EXIT_IO,
            };
        }
    }
    EXIT_IO
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_json_file<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    io::write_json(value, file)?;
    Ok(())
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn load_empirical(path: &Path, extra: &[PathBuf]) -> anyhow::Result<EmpiricalDistribution> {
    let mut dist = load_households_path(path).with_context(|| format!("reading {}", path.display()))?;
    for e in extra {
        let more = load_households_path(e).with_context(|| format!("reading {}", e.display()))?;
        dist = dist.merge(&more)?;
    }
    Ok(dist)
}

fn load_density(path: &Path) -> anyhow::Result<CanonicalDensity> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Ok(io::read_document(file)?.to_density()?)
    } else {
        Ok(io::read_density_csv(std::io::BufReader::new(file))?)
    }
}

fn load_curve(path: &Path) -> anyhow::Result<LorenzCurve> {
    io::load_curve(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::resolve(args.config.as_deref())?;
    let theta = args.theta.resolve(&cfg)?;
    let solver = args.solver.resolve(&cfg, SolverConfig::default())?;
    let resolution = cfg.pick(args.resolution, "resolution", DEFAULT_RESOLUTION)?;
    let sol = solve_model(&theta, &solver, resolution)?;

    create_dir(&args.out)?;
    io::save_curve(args.out.join("lorenz.csv"), &sol.curve, Some(theta))?;
    io::save_curve(args.out.join("lorenz.json"), &sol.curve, Some(theta))?;
    let doc = CurveDocument::from_density(&sol.density, Some(theta)).with_diagnostics(sol.outcome.diagnostics());
    write_json_file(&args.out.join("density.json"), &doc)?;

    println!(
        "chi={} zeta={} kappa={} regime={} gini={:.6} terminal={:.6} oligarchy_fraction={:.6}",
        theta.chi(),
        theta.zeta(),
        theta.kappa(),
        if theta.is_supercritical() { "supercritical" } else { "subcritical" },
        gini(&sol.curve),
        sol.curve.terminal(),
        theta.oligarchy_fraction()
    );
    println!(
        "solver: steps={} residual={:.3e} mass_drift={:.3e} wealth_drift={:.3e} w_max={}",
        sol.outcome.steps, sol.outcome.residual, sol.outcome.mass_drift, sol.outcome.wealth_drift, sol.outcome.w_max
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let explicit_json = args
        .config
        .as_ref()
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")));
    let (sim, cfg) = if let Some(path) = explicit_json {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let sim: SimConfig = serde_json::from_str(&text).map_err(Error::from)?;
        (sim, ConfigFile::default())
    } else {
        let cfg = ConfigFile::resolve(args.config.as_deref())?;
        let model = match args.model {
            Some(m) => m,
            None => match cfg.raw("model") {
                Some(s) => SimModel::from_str(s, true).map_err(|_| usage(format!("unknown model '{s}'")))?,
                None => return Err(usage("--model is required (sam, eysm, awm)")),
            },
        };
        let sim = SimConfig {
            n_agents: cfg.pick(args.agents, "agents", 10_000)?,
            dt: cfg.pick(args.dt, "dt", 0.01)?,
            sweeps: cfg.pick(args.sweeps, "sweeps", 10_000)?,
            seed: cfg.pick(args.seed, "seed", 1)?,
            theta: args.theta.resolve(&cfg)?,
            model: match model {
                SimModel::Sam => ModelKind::Sam,
                SimModel::Eysm => ModelKind::Eysm,
                SimModel::Awm => ModelKind::Awm,
            },
        };
        (sim, cfg)
    };
    let snapshots = cfg.pick(args.snapshots, "snapshots", 1usize)?;
    let interval = cfg.pick(args.interval, "interval", 100u64)?;
    let resolution = cfg.pick(None, "resolution", 2001usize)?;
    let (curve, ensemble) = if snapshots > 1 {
        montecarlo::averaged_lorenz(&sim, sim.sweeps, snapshots, interval, resolution)?
    } else {
        let e = montecarlo::run(&sim)?;
        (montecarlo::empirical_lorenz(&e)?, e)
    };
    let top = montecarlo::top_shares(&ensemble, 1e-3)?;

    create_dir(&args.out)?;
    write_table(
        &args.out.join("wealths.csv"),
        &["w"],
        ensemble.wealths.iter().map(|w| vec![w.to_string()]),
    )?;
    io::save_curve(args.out.join("lorenz.csv"), &curve, Some(sim.theta))?;
    io::save_curve(args.out.join("lorenz.json"), &curve, Some(sim.theta))?;
    let summary = serde_json::json!({
        "config": sim,
        "time": ensemble.time,
        "gini": gini(&curve),
        "top_shares": top,
        "clamp_events": ensemble.clamp_events,
    });
    write_json_file(&args.out.join("summary.json"), &summary)?;
    println!(
        "model={} agents={} time={} gini={:.6} top_agent_share={:.6} clamp_events={}",
        sim.model,
        sim.n_agents,
        ensemble.time,
        gini(&curve),
        top.top_agent,
        ensemble.clamp_events
    );
    Ok(())
}

fn cmd_fit(args: FitArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::resolve(args.config.as_deref())?;
    let search = args.search.resolve(&cfg)?;
    let dist = load_empirical(&args.data, &args.extra)?;
    let empirical = dist.canonicalize()?.lorenz_ordinates()?;
    let family = ModelFamily::from(args.model);
    let report = fitter::fit(family, &empirical, &search)?;

    create_dir(&args.out)?;
    write_json_file(&args.out.join("report.json"), &report)?;
    write_table(
        &args.out.join("local_error.csv"),
        &["f", "l", "local_error"],
        empirical
            .f()
            .iter()
            .zip(empirical.l())
            .skip(1)
            .zip(&report.local_error_profile)
            .map(|((f, l), e)| vec![f.to_string(), l.to_string(), e.to_string()]),
    )?;
    let model = &report.model_curve;
    write_table(
        &args.out.join("overlay.csv"),
        &["f", "model", "empirical"],
        model
            .f()
            .iter()
            .zip(model.l())
            .map(|(&f, &m)| vec![f.to_string(), m.to_string(), empirical.eval(f).to_string()]),
    )?;
    let t = report.theta_opt;
    println!(
        "model={} chi={} zeta={} kappa={} J={:.6e} fitted_gini={:.6} empirical_gini={:.6} oligarchy_fraction={:.6} mean_local_error={:.6e}",
        family,
        t.chi(),
        t.zeta(),
        t.kappa(),
        report.j_opt,
        report.fitted_gini,
        report.empirical_gini,
        report.oligarchy_fraction,
        report.mean_local_error
    );
    Ok(())
}

fn cmd_trend(args: TrendArgs) -> anyhow::Result<()> {
    let cfg = ConfigFile::resolve(args.config.as_deref())?;
    let search = args.search.resolve(&cfg)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.data_dir)
        .with_context(|| format!("reading directory {}", args.data_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(anyhow!(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no .csv files in {}", args.data_dir.display()),
        ))));
    }
    let mut datasets = Vec::new();
    let mut failed = Vec::new();
    for path in &files {
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let curve = load_households_path(path).and_then(|d| d.canonicalize()).and_then(|d| d.lorenz_ordinates());
        match curve {
            Ok(c) => datasets.push((label, c)),
            Err(e) => failed.push(TrendRow {
                label,
                report: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let fitter = Fitter::new(search)?;
    let mut rows = fitter::trend(&datasets, args.model.into(), &fitter, args.jobs);
    rows.extend(failed);
    rows.sort_by(|a, b| a.label.cmp(&b.label));
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_table(&args.out, &fitter::TABLE_HEADER, rows.iter().map(TrendRow::table_row))?;
    let ok = rows.iter().filter(|r| r.report.is_some()).count();
    println!("{} rows written to {} ({} fitted, {} failed)", rows.len(), args.out.display(), ok, rows.len() - ok);
    Ok(())
}

fn cmd_lorenz(args: LorenzArgs) -> anyhow::Result<()> {
    let (curve, params) = if let Some(path) = &args.data {
        (load_empirical(path, &[])?.canonicalize()?.lorenz_ordinates()?, None)
    } else if let Some(path) = &args.density {
        (lorenz::lorenz_from_density_with(&load_density(path)?, args.resolution)?, None)
    } else if let Some(chi) = args.sam_chi {
        (sam_lorenz_curve(chi, args.resolution)?, Some(ParameterVector::eysm(chi, 0.0)?))
    } else {
        return Err(usage("one of --data, --density or --sam-chi is required"));
    };
    io::save_curve(&args.out, &curve, params)?;
    println!("gini={:.6} points={}", gini(&curve), curve.len());
    Ok(())
}

fn cmd_gini(args: GiniArgs) -> anyhow::Result<()> {
    let g = match (&args.curve, &args.data) {
        (Some(path), _) => gini(&load_curve(path)?),
        (None, Some(path)) => load_empirical(path, &[])?.gini()?,
        (None, None) => return Err(usage("one of --curve or --data is required")),
    };
    println!("{g}");
    Ok(())
}

fn cmd_transform(args: TransformArgs) -> anyhow::Result<()> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("--{name} is required for this operation")));
    match args.op {
        TransformOp::Dual => {
            let curve = load_curve(args.curve.as_deref().ok_or_else(|| usage("--curve is required"))?)?;
            let (chi, zeta) = (need(args.chi, "chi")?, need(args.zeta, "zeta")?);
            let out = lorenz::dual_lorenz(&curve, chi, zeta)?;
            io::save_curve(&args.out, &out, Some(ParameterVector::eysm(chi, zeta)?))?;
            println!("terminal={}", out.terminal());
        }
        TransformOp::Shift => {
            let curve = load_curve(args.curve.as_deref().ok_or_else(|| usage("--curve is required"))?)?;
            let chi = args.chi.unwrap_or(1.0);
            let zeta = args.zeta.unwrap_or(0.0);
            let theta = ParameterVector::new(chi, zeta, need(args.kappa, "kappa")?)?;
            let out = lorenz::awm_lorenz(&curve, &theta)?;
            io::save_curve(&args.out, &out, Some(theta))?;
            println!("terminal={}", out.terminal());
        }
        TransformOp::Scale => {
            let density = load_density(args.density.as_deref().ok_or_else(|| usage("--density is required"))?)?;
            let out = scale_density(&density, need(args.n, "n")?, need(args.w, "w")?)?;
            write_json_file(&args.out, &CurveDocument::from_density(&out, None))?;
            println!("n_total={} w_total={}", out.n_total(), out.w_total());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Trend(a) => cmd_trend(a),
        Command::Lorenz(a) => cmd_lorenz(a),
        Command::Gini(a) => cmd_gini(a),
        Command::Transform(a) => cmd_transform(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
