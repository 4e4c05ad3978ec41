//! Command-line front end for the simulator and analysis toolkit.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bcc_concat::analysis::{
    self, biased_factors, biased_threshold_by_crossing, fit_suppression, fit_threshold, overhead_ratio, scaling_points,
    suppression_points, uniform_factor, CrossingSearch, FitOptions, OverheadRow,
};
use bcc_concat::circuit::{detectability_check, schedule_for, schedule_with, ScheduleKind};
use bcc_concat::inner_codes::{code, CodeId};
use bcc_concat::lattice::{build_lattice, Boundary};
use bcc_concat::montecarlo::{
    append_results, config_key, existing_keys, read_results, run_grid, Experiment, ResultRow,
};
use bcc_concat::noise::NoiseModel;
use bcc_concat::Error;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "bcc-concat", version, about = "Concatenated bcc cluster state simulations")]
struct Cli {
    /// Size of the worker pool (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; overrides the one in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo grid of a config file, appending CSV rows.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the finite-size scaling ansatz to stored results.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        scheme: CodeId,
        #[arg(long)]
        model: NoiseModel,
        /// Bootstrap resamples for the error bars.
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
    },
    /// Check that every single fault converts to detectable block errors.
    Detectability {
        #[arg(long)]
        scheme: CodeId,
        #[arg(long, default_value = "fig5")]
        schedule: ScheduleKind,
        /// Emit the JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Lattice size of the patch.
        #[arg(long, default_value_t = 4)]
        l: usize,
    },
    /// Thresholds under Z-biased noise from the phenomenological ones.
    Biased {
        #[arg(long)]
        scheme: Option<CodeId>,
        /// Results CSV to fit phenomenological thresholds from; the known
        /// values are used otherwise.
        #[arg(long = "phen-in")]
        phen_in: Option<PathBuf>,
        /// Trials per point of the crossing search for non-uniform codes.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Spacetime overhead against the cubic scheme at one physical rate.
    Overhead {
        #[arg(long)]
        scheme: CodeId,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        target: f64,
        /// Lattice sizes of the suppression fits.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4, 5, 6])]
        l: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value = "circuit_level")]
        model: NoiseModel,
        #[arg(long, default_value = "periodic_xy_rough_z")]
        boundary: Boundary,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad arguments, config or data: exit 2.
    User(String),
    /// I/O and other environment problems: exit 3.
    Env(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Env(e.to_string()),
            _ => Failure::User(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Env(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out.as_deref(), cli.seed, cli.threads.is_some()),
        Command::Fit { input, scheme, model, bootstrap } => {
            fit(&input, scheme, model, FitOptions { bootstrap, seed: cli.seed.unwrap_or(0) })
        }
        Command::Detectability { scheme, schedule, json, l } => detectability(scheme, schedule, json, l),
        Command::Biased { scheme, phen_in, trials } => {
            biased(scheme, phen_in.as_deref(), trials, cli.seed.unwrap_or(0))
        }
        Command::Overhead { scheme, p, target, l, trials, model, boundary, out } => overhead(
            OverheadArgs { scheme, p, target, ls: l, trials, model, boundary, seed: cli.seed.unwrap_or(0) },
            out.as_deref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Env(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}

fn simulate(config_path: &Path, out: Option<&Path>, seed: Option<u64>, pool_set: bool) -> CmdResult {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::User(format!("cannot read {}: {e}", config_path.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(Failure::User)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let (Some(n), false) = (cfg.threads, pool_set) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Env(e.to_string()))?;
    }
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| Failure::User("no output path (pass --out or set \"out\")".into()))?;
    let done = existing_keys(&out)?;
    let mut written = 0usize;
    for trial in cfg.trial_configs()? {
        if done.contains(&config_key(&trial)) {
            continue;
        }
        let stats = Experiment::new(trial.clone())?.run_point()?;
        let row = ResultRow::new(&trial, &stats);
        eprintln!("{} {} p={} L={}: {}/{} failures", row.scheme, row.model, row.p, row.l, row.failures, row.trials);
        append_results(&out, &[row])?;
        written += 1;
    }
    eprintln!("{written} new rows in {}", out.display());
    Ok(())
}

fn fit(input: &Path, scheme: CodeId, model: NoiseModel, opts: FitOptions) -> CmdResult {
    let rows = read_results(input)?;
    let points = scaling_points(&rows, scheme, model);
    let res = fit_threshold(&points, opts)?;
    println!("{}", res.to_json());
    println!("{}", res.summary());
    Ok(())
}

fn detectability(scheme: CodeId, kind: ScheduleKind, json: bool, l: usize) -> CmdResult {
    let layout = build_lattice(l, Boundary::Torus)?;
    let c = code(scheme);
    let sched = schedule_with(c, &layout, kind)?;
    let report = detectability_check(c, &sched, &layout)?;
    let text = if json { report.to_json() + "\n" } else { report.to_text() };
    emit(&text)
}

/// Write to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> CmdResult {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn biased(scheme: Option<CodeId>, phen_in: Option<&Path>, trials: u64, seed: u64) -> CmdResult {
    let codes: Vec<CodeId> = scheme.map_or_else(|| CodeId::ALL.to_vec(), |s| vec![s]);
    let rows = match phen_in {
        Some(p) => Some(read_results(p)?),
        None => None,
    };
    let layout = build_lattice(4, Boundary::Torus)?;
    println!("scheme,factors,phenomenological_pct,biased_pct,reference_pct");
    for id in codes {
        let sched = schedule_for(code(id), &layout)?;
        let factors = biased_factors(&sched);
        let reference = analysis::reference(id);
        let phen = match &rows {
            Some(r) => fit_threshold(&scaling_points(r, id, NoiseModel::Phenomenological), FitOptions::default())?.p_th,
            None => reference.phenomenological,
        };
        let value = if uniform_factor(&sched).is_some() {
            analysis::biased_threshold(&sched, Some(phen))?
        } else {
            let search = CrossingSearch { small_l: 5, large_l: 9, trials, seed, lo: 0.005, hi: 0.02, iterations: 8 };
            biased_threshold_by_crossing(id, search)?
        };
        let f: Vec<String> = factors.iter().map(|f| format!("{f:.4}")).collect();
        println!("{id},{},{:.4},{:.4},{:.4}", f.join(" "), 100.0 * phen, 100.0 * value, 100.0 * reference.biased);
    }
    Ok(())
}

struct OverheadArgs {
    scheme: CodeId,
    p: f64,
    target: f64,
    ls: Vec<usize>,
    trials: u64,
    model: NoiseModel,
    boundary: Boundary,
    seed: u64,
}

fn overhead(a: OverheadArgs, out: Option<&Path>) -> CmdResult {
    if !(a.target > 0.0 && a.target < 1.0) {
        return Err(Failure::User(format!("target {} outside (0, 1)", a.target)));
    }
    let curve = |id: CodeId| -> Result<Vec<(usize, f64)>, Failure> {
        let rows = run_grid(id, a.model, &[a.p], &a.ls, a.boundary, a.trials, a.seed)?;
        Ok(suppression_points(&rows))
    };
    let scheme_fit = fit_suppression(&curve(a.scheme)?)?;
    let reference_fit = fit_suppression(&curve(CodeId::Cubic)?)?;
    let r = overhead_ratio(&scheme_fit, code(a.scheme).size, &reference_fit, a.target)?;
    if r.extrapolated {
        eprintln!("warning: the target lies outside the fitted lattice sizes");
    }
    let row = OverheadRow {
        scheme: a.scheme,
        p: a.p,
        target: a.target,
        l_scheme: r.l_scheme,
        l_reference: r.l_reference,
        ratio: r.ratio,
        extrapolated: r.extrapolated,
    };
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.serialize(&row).map_err(|e| Failure::Env(e.to_string()))?;
    w.flush()?;
    Ok(())
}
