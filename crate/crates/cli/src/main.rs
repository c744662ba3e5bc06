//! `qrelu` command-line driver.
//!
//! Every subcommand reads flags, optionally layered over a JSON run config
//! given with `--config` (flags win), and writes its results to files or
//! stdout. Usage errors exit with 2, runtime failures with 1 and a line of
//! the form `error[category]: message` on stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use qrelu::multiindex::{compute_j, enumerate_quasi_optimal, estimate_p_volume, DEFAULT_TAU};
use qrelu::orthopoly::{synthetic_target, QuasiOptimalExpansion};
use qrelu::synth::{synth_unn, SynthOptions};
use qrelu::verify::{convergence_study, CsvRowSink, LinkCheck, PVolumeSource, StudyConfig};
use qrelu::{BoundFunction, Error, FamilyKind, Precision, ReluNetwork, SamplerSpec};

#[derive(Parser)]
#[command(name = "qrelu", version, about = "Build and check ReLU emulations of quasi-optimal polynomial expansions")]
struct Cli {
    /// JSON run config; explicit flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the quasi-optimal index set Λ_M as JSON.
    Indexset {
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Estimate the volume |𝒫| of the normalized sublevel set.
    Pvolume {
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(long)]
        tau: Option<f64>,
        #[command(flatten)]
        extrapolate: ExtrapolateArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Build u_NN for an expansion and persist it with its report.
    Synth {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "M")]
        m: Option<usize>,
        /// Expansion JSON; a seeded synthetic target is used when absent.
        #[arg(long, value_name = "PATH")]
        expansion: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        network: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Apply a persisted network to a CSV of points.
    Eval {
        #[arg(long, value_name = "PATH")]
        network: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        points: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Single-M check of the per-subnetwork, budget-sum and headline links.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Convergence study over a list of M, written as CSV plus a JSON sidecar.
    Study {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "M-list", value_delimiter = ',')]
        m_list: Option<Vec<usize>>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Defaults to the CSV path with `.json` appended.
        #[arg(long, value_name = "PATH")]
        sidecar: Option<PathBuf>,
        /// Write 0 for wall_time so repeated runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum BoundArg {
    Isotropic,
    Taylor,
    Legendre,
    LegendreLiteral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PrecisionArg {
    Auto,
    F64,
    DoubleDouble,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    bound: Option<BoundArg>,
    #[arg(long)]
    d: Option<usize>,
    /// Per-dimension rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long = "logC", allow_hyphen_values = true)]
    log_c: Option<f64>,
}

#[derive(Args)]
struct ExtrapolateArgs {
    #[arg(long, conflicts_with = "no_extrapolate")]
    extrapolate: bool,
    #[arg(long)]
    no_extrapolate: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    bound: BoundArgs,
    #[arg(long, value_parser = parse_family)]
    family: Option<FamilyKind>,
    /// Exact |𝒫|; estimated from the lattice count otherwise.
    #[arg(long)]
    pvol: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[command(flatten)]
    extrapolate: ExtrapolateArgs,
    /// Tensor grid with this many points per axis.
    #[arg(long, conflicts_with = "samples")]
    grid: Option<usize>,
    /// Shifted Halton points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    sampler_seed: Option<u64>,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    /// Seed for the signs of the synthetic target.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse::<FamilyKind>().map_err(|e| e.to_string())
}

/// File form of the run configuration. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    bound: Option<BoundArg>,
    d: Option<usize>,
    rho: Option<Vec<f64>>,
    #[serde(rename = "logC")]
    log_c: Option<f64>,
    family: Option<FamilyKind>,
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "M_list")]
    m_list: Option<Vec<usize>>,
    tau: Option<f64>,
    extrapolate: Option<bool>,
    pvol: Option<f64>,
    sampler: Option<SamplerSpec>,
    precision: Option<PrecisionArg>,
    seed: Option<u64>,
    timing: Option<bool>,
    expansion: Option<PathBuf>,
    network: Option<PathBuf>,
    report: Option<PathBuf>,
    points: Option<PathBuf>,
    out: Option<PathBuf>,
    sidecar: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Check(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Parse(e))
    }
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Check(_) => "check",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Check(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::Config(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str::<RunConfig>(&text)?
        }
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Indexset { bound, m, out } => {
            let b = resolve_bound(&bound, &cfg)?;
            let m = m.or(cfg.m).ok_or_else(|| config_err("missing --M"))?;
            let set = enumerate_quasi_optimal(&b, m)?;
            let mut doc: Value = serde_json::from_str(&set.to_json()?)?;
            doc["J"] = json!(compute_j(&set)?);
            emit_json(&doc, out.or(cfg.out).as_deref())
        }
        Command::Pvolume { bound, tau, extrapolate, out } => {
            let b = resolve_bound(&bound, &cfg)?;
            let tau = tau.or(cfg.tau).unwrap_or(DEFAULT_TAU);
            let extrap = extrapolate.resolve(&cfg, false);
            let est = estimate_p_volume(&b, tau, extrap)?;
            emit_json(&serde_json::to_value(est)?, out.or(cfg.out).as_deref())
        }
        Command::Synth { run, m, expansion, network, report } => {
            let b = resolve_bound(&run.bound, &cfg)?;
            let network = network.or(cfg.network.clone()).ok_or_else(|| config_err("missing --network"))?;
            let report = report.or(cfg.report.clone());
            let family = run.family.or(cfg.family).unwrap_or(FamilyKind::ShiftedLegendre);
            let exp = match expansion.or(cfg.expansion.clone()) {
                Some(path) => {
                    let e = QuasiOptimalExpansion::from_json(&std::fs::read_to_string(path)?, &b)?;
                    match m.or(cfg.m) {
                        Some(m) => e.truncate(m)?,
                        None => e,
                    }
                }
                None => {
                    let m = m.or(cfg.m).ok_or_else(|| config_err("missing --M"))?;
                    let top = enumerate_quasi_optimal(&b, m)?;
                    let seed = run.seed.or(cfg.seed).unwrap_or(0);
                    synthetic_target(&b, family, top.threshold_j(), seed)?.truncate(m)?
                }
            };
            let pvol = resolve_pvol_value(&b, &run, &cfg)?;
            let opts = resolve_options(b.dim(), &run, &cfg)?;
            let (net, rep) = synth_unn(&exp, pvol, &opts)?;
            net.save(&network)?;
            let doc = rep.to_value();
            emit_json(&doc, report.as_deref())
        }
        Command::Eval { network, points, out } => {
            let network = network.or(cfg.network).ok_or_else(|| config_err("missing --network"))?;
            let points = points.or(cfg.points).ok_or_else(|| config_err("missing --points"))?;
            let net = ReluNetwork::load(&network)?;
            let pts = read_points(&points)?;
            let mut ev = net.evaluator::<f64>();
            let mut w = open_out(out.or(cfg.out).as_deref())?;
            for p in &pts {
                let y = ev.eval(p)?;
                let line: Vec<String> = y.iter().map(|v| format!("{v:e}")).collect();
                writeln!(w, "{}", line.join(","))?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Verify { run, m, out } => {
            let b = resolve_bound(&run.bound, &cfg)?;
            let m = m.or(cfg.m).ok_or_else(|| config_err("missing --M"))?;
            let family = run.family.or(cfg.family).unwrap_or(FamilyKind::ShiftedLegendre);
            let seed = run.seed.or(cfg.seed).unwrap_or(0);
            let pvol = resolve_pvol_value(&b, &run, &cfg)?;
            let opts = resolve_options(b.dim(), &run, &cfg)?;
            let (_, rep, links) = qrelu::verify::verify_single(&b, family, m, pvol, &opts, seed)?;
            let doc = json!({ "links": links, "passed": links.all(), "synthesis": rep.to_value() });
            emit_json(&doc, out.or(cfg.out).as_deref())?;
            check_links(&links)
        }
        Command::Study { run, m_list, out, sidecar, no_timing } => {
            let b = resolve_bound(&run.bound, &cfg)?;
            let m_list = m_list.or(cfg.m_list.clone()).ok_or_else(|| config_err("missing --M-list"))?;
            let out = out.or(cfg.out.clone()).ok_or_else(|| config_err("missing --out"))?;
            let sidecar = sidecar.or(cfg.sidecar.clone()).unwrap_or_else(|| {
                let mut s = out.clone().into_os_string();
                s.push(".json");
                PathBuf::from(s)
            });
            let family = run.family.or(cfg.family).unwrap_or(FamilyKind::ShiftedLegendre);
            let mut sc = StudyConfig::new(b, family, m_list);
            let d = sc.bound.dim();
            let opts = resolve_options(d, &run, &cfg)?;
            sc.sampler = opts.sampler;
            sc.precision = opts.precision;
            sc.pvol = resolve_pvol_source(&run, &cfg);
            sc.seed = run.seed.or(cfg.seed).unwrap_or(0);
            sc.timing = !no_timing && cfg.timing.unwrap_or(true);

            let mut sink = CsvRowSink::new(BufWriter::new(File::create(&out)?))?;
            let report = convergence_study(&sc, |row, _| {
                eprintln!(
                    "M={} J={} sup_error={:e} bound_rhs={:e} complexity={} depth={}",
                    row.m, row.j, row.sup_error, row.bound_rhs, row.complexity, row.depth
                );
                sink.push(row)
            })?;
            drop(sink);
            let mut doc = report.sidecar();
            if sc.timing {
                doc["wall_time"] = json!(report.rows.iter().map(|r| r.wall_time).collect::<Vec<_>>());
            }
            let mut w = BufWriter::new(File::create(&sidecar)?);
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
            let failed: Vec<usize> = report.rows.iter().filter(|r| !r.links.all()).map(|r| r.m).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(format!("link checks failed for M = {failed:?}")))
            }
        }
    }
}

impl ExtrapolateArgs {
    fn resolve(&self, cfg: &RunConfig, default: bool) -> bool {
        if self.extrapolate {
            true
        } else if self.no_extrapolate {
            false
        } else {
            cfg.extrapolate.unwrap_or(default)
        }
    }
}

fn resolve_bound(args: &BoundArgs, cfg: &RunConfig) -> CliResult<BoundFunction> {
    let kind = args.bound.or(cfg.bound).ok_or_else(|| config_err("missing --bound"))?;
    let d = args.d.or(cfg.d);
    let rho = args.rho.clone().or(cfg.rho.clone());
    let log_c = args.log_c.or(cfg.log_c).unwrap_or(0.0);
    if let (Some(d), Some(r)) = (d, &rho) {
        if r.len() != d {
            return Err(CliError::Core(Error::DimensionMismatch { expected: d, got: r.len() }));
        }
    }
    let b = match kind {
        BoundArg::Isotropic => {
            let d = d.or(rho.as_ref().map(Vec::len)).ok_or_else(|| config_err("missing --d"))?;
            BoundFunction::isotropic(d)?
        }
        _ => {
            let rho = rho.ok_or_else(|| config_err("missing --rho"))?;
            match kind {
                BoundArg::Taylor => BoundFunction::taylor(rho)?,
                BoundArg::Legendre => BoundFunction::legendre(rho)?,
                _ => BoundFunction::legendre_literal(rho)?,
            }
        }
    };
    Ok(b.with_log_c(log_c))
}

fn resolve_pvol_source(run: &RunArgs, cfg: &RunConfig) -> PVolumeSource {
    match run.pvol.or(cfg.pvol) {
        Some(value) => PVolumeSource::Exact { value },
        None => PVolumeSource::Estimate {
            tau: run.tau.or(cfg.tau).unwrap_or(DEFAULT_TAU),
            extrapolate: run.extrapolate.resolve(cfg, true),
        },
    }
}

fn resolve_pvol_value(b: &BoundFunction, run: &RunArgs, cfg: &RunConfig) -> CliResult<f64> {
    let v = match resolve_pvol_source(run, cfg) {
        PVolumeSource::Exact { value } => value,
        PVolumeSource::Estimate { tau, extrapolate } => estimate_p_volume(b, tau, extrapolate)?.value,
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(config_err(format!("|P| must be positive and finite, got {v}")));
    }
    Ok(v)
}

fn resolve_options(d: usize, run: &RunArgs, cfg: &RunConfig) -> CliResult<SynthOptions> {
    let seed = run.sampler_seed;
    let sampler = match (run.grid, run.samples) {
        (Some(per_axis), _) => SamplerSpec::Grid { per_axis },
        (None, Some(count)) => SamplerSpec::Halton { count, seed: seed.unwrap_or(0) },
        (None, None) => match (cfg.sampler.clone(), seed) {
            (Some(SamplerSpec::Halton { count, .. }), Some(s)) => SamplerSpec::Halton { count, seed: s },
            (Some(s), _) => s,
            (None, _) => SamplerSpec::default_for(d),
        },
    };
    let precision = match run.precision.or(cfg.precision).unwrap_or(PrecisionArg::Auto) {
        PrecisionArg::Auto => None,
        PrecisionArg::F64 => Some(Precision::F64),
        PrecisionArg::DoubleDouble => Some(Precision::DoubleDouble),
    };
    Ok(SynthOptions { sampler, precision })
}

fn check_links(links: &LinkCheck) -> CliResult<()> {
    if links.all() {
        return Ok(());
    }
    let mut failed = Vec::new();
    if !links.subnet_budgets {
        failed.push(format!("subnetwork budgets (positions {:?})", links.budget_violations));
    }
    if !links.budget_sum || !links.triangle {
        failed.push("budget sum".to_string());
    }
    if !links.headline {
        failed.push("headline bound".to_string());
    }
    Err(CliError::Check(format!("failed links: {}", failed.join(", "))))
}

fn read_points(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut pts = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config_err(format!("{}:{}: {e}", path.display(), k + 1)))?;
        if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(config_err(format!("{}:{}: coordinate {v} outside [0,1]", path.display(), k + 1)));
        }
        pts.push(p);
    }
    Ok(pts)
}

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(doc: &Value, path: Option<&Path>) -> CliResult<()> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
