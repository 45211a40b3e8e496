//! The `dfsrep` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numerical failure (in a scan: at least one grid point failed).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{ExperimentConfig, Grid, UnitsSpec};
use super::report::{json_bytes, scan_csv, OutputSet};
use super::verify::{run_verify, SuiteSelection, VerifyOptions};
use crate::error::Error;
use crate::lattice::{
    detuning_scan, gate_time, GateKind, LatticeUnits, Regime, ScanGate, ScanKnob,
};
use crate::noise::{analytic_module_fidelity, ModuleKind};
use crate::protocol::{gate_time_budget, nested_repeater_run, AuxPolicy, RepeaterResult};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DFSREP_OUT_DIR";
/// Output directory when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT_DIR: &str = "dfsrep-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dfsrep",
    version,
    about = "DFS quantum-repeater simulator: gate scans, timing, protocol runs and self-checks"
)]
pub struct Cli {
    /// TOML configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $DFSREP_OUT_DIR, else ./dfsrep-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel work; never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep one parameter of a lattice gate and tabulate its accuracy.
    Scan(ScanArgs),
    /// Durations of the lattice gates and of the repeater modules.
    GateTimes(GateTimesArgs),
    /// Run the nested purify-and-swap repeater.
    Repeater(RepeaterArgs),
    /// Check the library's invariants.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// rz, rx or cphase.
    #[arg(long)]
    gate: Option<String>,
    /// UoverJ, J2_over_J1, Uab_over_U, Uq1_over_J or residual_U_over_J.
    #[arg(long)]
    knob: Option<String>,
    /// start:stop:count.
    #[arg(long)]
    grid: Option<String>,
    /// Tunneling J in recoil energies.
    #[arg(long = "J")]
    j: Option<f64>,
    /// Fixed U/J when another knob is swept.
    #[arg(long = "UoverJ")]
    u_over_j: Option<f64>,
    /// interacting or free.
    #[arg(long)]
    regime: Option<String>,
    /// Trajectory samples per gate.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct GateTimesArgs {
    /// Named units preset (na514).
    #[arg(long, conflicts_with_all = ["wavelength", "mass"])]
    units: Option<String>,
    /// Lattice wavelength, nm.
    #[arg(long, requires = "mass")]
    wavelength: Option<f64>,
    /// Atomic mass, atomic mass units.
    #[arg(long, requires = "wavelength")]
    mass: Option<f64>,
    /// Tunneling J in recoil energies.
    #[arg(long = "J")]
    j: Option<f64>,
    /// On-site interaction U/J.
    #[arg(long = "UoverJ")]
    u_over_j: Option<f64>,
    /// Regime of the module schedule: interacting or free.
    #[arg(long)]
    regime: Option<String>,
    /// Ancilla dephasing rate, 1/s.
    #[arg(long, conflicts_with = "decoherence_ms")]
    gamma: Option<f64>,
    /// Ancilla decoherence time 1/γ, ms.
    #[arg(long)]
    decoherence_ms: Option<f64>,
}

#[derive(Debug, Args)]
struct RepeaterArgs {
    /// Werner fidelity of the source pairs.
    #[arg(long = "F0")]
    f0: Option<f64>,
    /// Smallest fidelity purification is attempted on.
    #[arg(long)]
    f_min: Option<f64>,
    /// Fidelity at which a level stops purifying.
    #[arg(long)]
    target: Option<f64>,
    /// Nesting levels of swapping.
    #[arg(long)]
    levels: Option<usize>,
    /// Purification rounds allowed per level.
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Ancilla dephasing rate, 1/s.
    #[arg(long)]
    gamma: Option<f64>,
    /// pumping or recurrence.
    #[arg(long)]
    policy: Option<String>,
    /// Sampled trajectories in addition to the exact run.
    #[arg(long)]
    trajectories: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// all, dfs, lattice, noise or protocol.
    #[arg(long)]
    suite: Option<String>,
    /// Random inputs per operation-fidelity minimization.
    #[arg(long)]
    samples: Option<usize>,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) | Error::Io(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, Failure> {
    s.parse().map_err(Failure::from)
}

fn parse_regime(s: &str) -> Result<Regime, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "interacting" => Ok(Regime::Interacting),
        "free" => Ok(Regime::Free),
        _ => Err(usage(format!(
            "unknown regime '{s}' (expected interacting or free)"
        ))),
    }
}

fn parse_policy(s: &str) -> Result<AuxPolicy, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "pumping" => Ok(AuxPolicy::Pumping),
        "recurrence" => Ok(AuxPolicy::Recurrence),
        _ => Err(usage(format!(
            "unknown policy '{s}' (expected pumping or recurrence)"
        ))),
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("dfsrep: {}", f.message);
            f.code
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let threads = match cli.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure {
            code: EXIT_NUMERICAL,
            message: e.to_string(),
        })?;
    let dir = out_dir(&cli);
    pool.install(|| match &cli.command {
        Command::Scan(a) => cmd_scan(cfg, a, &dir, threads),
        Command::GateTimes(a) => cmd_gate_times(cfg, a, &dir, threads),
        Command::Repeater(a) => cmd_repeater(cfg, a, &dir, threads),
        Command::Verify(a) => cmd_verify(cfg, a, &dir, threads),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let bytes = json_bytes(value)?;
    std::io::stdout()
        .write_all(&bytes)
        .map_err(|e| Failure::from(Error::from(e)))
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

fn cmd_scan(
    mut cfg: ExperimentConfig,
    a: &ScanArgs,
    dir: &Path,
    threads: usize,
) -> Result<i32, Failure> {
    let s = &mut cfg.scan;
    if let Some(g) = &a.gate {
        s.gate = Some(parse::<ScanGate>(g)?);
    }
    if let Some(k) = &a.knob {
        s.knob = Some(parse::<ScanKnob>(k)?);
    }
    if let Some(g) = &a.grid {
        s.grid = Some(parse::<Grid>(g)?);
    }
    if let Some(j) = a.j {
        s.j = j;
    }
    if let Some(u) = a.u_over_j {
        s.u_over_j = u;
    }
    if let Some(r) = &a.regime {
        s.regime = parse_regime(r)?;
    }
    if let Some(n) = a.samples {
        s.samples = n;
    }
    let gate = s
        .gate
        .ok_or_else(|| usage("scan needs --gate (or scan.gate in the config)"))?;
    let knob = s
        .knob
        .ok_or_else(|| usage("scan needs --knob (or scan.knob in the config)"))?;
    let grid = s
        .grid
        .ok_or_else(|| usage("scan needs --grid (or scan.grid in the config)"))?;
    let result = detuning_scan(gate, knob, &grid.values(), &s.base())?;

    let mut out = OutputSet::create(dir)?;
    let csv_path = out.write("scan.csv", &scan_csv(&result)?)?;
    out.finish("scan", &cfg, threads)?;
    let failed = result.failures();
    println!(
        "scan: {} rows, {} failed -> {}",
        result.rows.len(),
        failed,
        csv_path.display()
    );
    if failed > 0 {
        for r in result.rows.iter().filter(|r| r.error.is_some()) {
            eprintln!(
                "dfsrep: point {} failed: {}",
                r.knob,
                r.error.as_deref().unwrap_or_default()
            );
        }
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// gate-times
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct UnitsReport {
    wavelength_m: f64,
    mass_kg: f64,
    recoil_rate_per_s: f64,
}

#[derive(Debug, Serialize)]
struct TimedEntry {
    name: &'static str,
    seconds: f64,
    ms: f64,
}

#[derive(Debug, Serialize)]
struct BudgetEntry {
    module: &'static str,
    seconds: f64,
    ms: f64,
    cphase_count: usize,
}

#[derive(Debug, Serialize)]
struct FidelityEntry {
    module: ModuleKind,
    value: f64,
    lower_bound: bool,
}

#[derive(Debug, Serialize)]
struct NoiseReport {
    regime: Regime,
    /// Duration of one CPHASE in this regime, seconds.
    cphase_time: f64,
    gamma_t: f64,
    fidelities: Vec<FidelityEntry>,
}

#[derive(Debug, Serialize)]
struct GateTimesReport {
    units: UnitsReport,
    j: f64,
    u_over_j: f64,
    regime: Regime,
    gates: Vec<TimedEntry>,
    budgets: Vec<BudgetEntry>,
    /// Ancilla dephasing rate, 1/s.
    gamma: Option<f64>,
    noise: Vec<NoiseReport>,
}

fn units_report(u: &LatticeUnits) -> UnitsReport {
    UnitsReport {
        wavelength_m: u.wavelength,
        mass_kg: u.mass,
        recoil_rate_per_s: u.recoil_rate(),
    }
}

fn cmd_gate_times(
    mut cfg: ExperimentConfig,
    a: &GateTimesArgs,
    dir: &Path,
    threads: usize,
) -> Result<i32, Failure> {
    let l = &mut cfg.lattice;
    if let Some(p) = &a.units {
        l.units = UnitsSpec {
            preset: Some(p.clone()),
            wavelength_nm: None,
            mass_u: None,
        };
    }
    if let (Some(w), Some(m)) = (a.wavelength, a.mass) {
        l.units = UnitsSpec {
            preset: None,
            wavelength_nm: Some(w),
            mass_u: Some(m),
        };
    }
    if let Some(j) = a.j {
        l.j = Some(j);
    }
    if let Some(u) = a.u_over_j {
        l.u_over_j = u;
    }
    if let Some(r) = &a.regime {
        l.regime = parse_regime(r)?;
    }
    if let Some(g) = a.gamma {
        cfg.gate_times.gamma = Some(g);
    }
    if let Some(ms) = a.decoherence_ms {
        if !(ms > 0.0 && ms.is_finite()) {
            return Err(usage("--decoherence-ms must be positive"));
        }
        cfg.gate_times.gamma = Some(1e3 / ms);
    }
    let l = &cfg.lattice;
    let j =
        l.j.ok_or_else(|| usage("gate-times needs --J (or lattice.j in the config)"))?;
    let units = l.units.resolve()?;
    let gates = GateKind::ALL
        .iter()
        .map(|&k| {
            let s = gate_time(k, j, l.u_over_j, Some(&units))?;
            Ok(TimedEntry {
                name: k.name(),
                seconds: s,
                ms: s * 1e3,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let budgets = gate_time_budget(&units, j, l.u_over_j, l.regime)?
        .into_iter()
        .map(|b| BudgetEntry {
            module: b.module.name(),
            seconds: b.duration,
            ms: b.duration * 1e3,
            cphase_count: b.cphase_count,
        })
        .collect();
    let gamma = cfg.gate_times.gamma;
    let mut noise = Vec::new();
    if let Some(g) = gamma {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(usage("gamma must be finite and non-negative"));
        }
        for (regime, kind) in [
            (Regime::Interacting, GateKind::CphaseInteracting),
            (Regime::Free, GateKind::CphaseFree),
        ] {
            let t = gate_time(kind, j, l.u_over_j, Some(&units))?;
            let fidelities = [
                ModuleKind::Cphase,
                ModuleKind::Cnot,
                ModuleKind::StateTransfer,
                ModuleKind::EntPurification,
            ]
            .iter()
            .map(|&m| {
                let f = analytic_module_fidelity(m, g * t)?;
                Ok(FidelityEntry {
                    module: m,
                    value: f.value,
                    lower_bound: f.lower_bound,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
            noise.push(NoiseReport {
                regime,
                cphase_time: t,
                gamma_t: g * t,
                fidelities,
            });
        }
    }
    let report = GateTimesReport {
        units: units_report(&units),
        j,
        u_over_j: l.u_over_j,
        regime: l.regime,
        gates,
        budgets,
        gamma,
        noise,
    };
    let bytes = json_bytes(&report)?;
    let mut out = OutputSet::create(dir)?;
    out.write("gate_times.json", &bytes)?;
    out.finish("gate-times", &cfg, threads)?;
    print_json(&report)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// repeater
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct RepeaterReport {
    config: crate::protocol::ProtocolConfig,
    result: RepeaterResult,
}

fn cmd_repeater(
    mut cfg: ExperimentConfig,
    a: &RepeaterArgs,
    dir: &Path,
    threads: usize,
) -> Result<i32, Failure> {
    let r = &mut cfg.repeater;
    if let Some(x) = a.f0 {
        r.source_fidelity = x;
    }
    if let Some(x) = a.f_min {
        r.f_min = x;
    }
    if let Some(x) = a.target {
        r.target_fidelity = x;
    }
    if let Some(x) = a.levels {
        r.levels = x;
    }
    if let Some(x) = a.max_rounds {
        r.max_rounds = x;
    }
    if let Some(x) = a.gamma {
        r.gamma = x;
    }
    if let Some(p) = &a.policy {
        r.aux_policy = parse_policy(p)?;
    }
    if let Some(n) = a.trajectories {
        r.trajectories = n;
    }
    let protocol = cfg.protocol()?;
    let result = nested_repeater_run(&protocol)?;
    let report = RepeaterReport {
        config: protocol,
        result,
    };
    let mut out = OutputSet::create(dir)?;
    out.write("repeater.json", &json_bytes(&report)?)?;
    out.finish("repeater", &cfg, threads)?;
    print_json(&report)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(
    mut cfg: ExperimentConfig,
    a: &VerifyArgs,
    dir: &Path,
    threads: usize,
) -> Result<i32, Failure> {
    if let Some(s) = &a.suite {
        cfg.verify.suite = s.clone();
    }
    if let Some(n) = a.samples {
        cfg.verify.samples = n;
    }
    let selection: SuiteSelection = parse(&cfg.verify.suite)?;
    if cfg.verify.samples == 0 {
        return Err(usage("verify needs at least one sample"));
    }
    let report = run_verify(
        selection,
        &VerifyOptions {
            seed: cfg.seed,
            samples: cfg.verify.samples,
        },
    );
    let mut out = OutputSet::create(dir)?;
    out.write("verify.json", &json_bytes(&report)?)?;
    out.finish("verify", &cfg, threads)?;
    print_json(&report)?;
    if report.passed {
        return Ok(EXIT_OK);
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "dfsrep: FAILED {}: value {:e} > tolerance {:e} ({})",
            c.name, c.value, c.tolerance, c.detail
        );
    }
    Ok(EXIT_VERIFY_FAILED)
}
