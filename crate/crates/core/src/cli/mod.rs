//! Command-line front end: `point`, `sweep`, `figure`, `validate`.

pub mod config;
pub mod csv;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{figures, sweep, SweepGrid};
use crate::error::Error;
use crate::reduced_state::evaluate;

pub use config::{OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "squeezelink", version, about = "Squeezed-vacuum entanglement transfer to three atomic qubits")]
pub struct Cli {
    /// Flat key = value file; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one (s, tau, alpha) point.
    Point {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a two-parameter grid.
    Sweep {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        axes: AxisArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        threads: Option<String>,
    },
    /// Reproduce a published figure grid (1 to 7).
    Figure {
        id: u8,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        threads: Option<String>,
    },
    /// Randomized oracle-agreement and invariant checks.
    Validate {
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        count: Option<String>,
        #[arg(long)]
        threads: Option<String>,
        #[arg(long, hide = true)]
        corrupt_propagator: bool,
    },
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// alpha or phi2
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Squeeze parameter.
    #[arg(long)]
    pub s: Option<String>,
    /// Interaction time g t.
    #[arg(long)]
    pub tau: Option<String>,
    /// `full` or a beam-splitter angle in radians.
    #[arg(long)]
    pub injection: Option<String>,
    #[arg(long)]
    pub n_max: Option<String>,
    #[arg(long)]
    pub weight_tolerance: Option<String>,
}

#[derive(Debug, Args)]
pub struct AxisArgs {
    /// Parameter along rows: s, tau or alpha.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub x_min: Option<String>,
    #[arg(long)]
    pub x_max: Option<String>,
    #[arg(long)]
    pub x_step: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    #[arg(long)]
    pub y_min: Option<String>,
    #[arg(long)]
    pub y_max: Option<String>,
    #[arg(long)]
    pub y_step: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
}

type Pairs<'a> = Vec<(&'static str, &'a Option<String>)>;

impl FieldArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![
            ("family", &self.family),
            ("alpha", &self.alpha),
            ("s", &self.s),
            ("tau", &self.tau),
            ("injection", &self.injection),
            ("n_max", &self.n_max),
            ("weight_tolerance", &self.weight_tolerance),
        ]
    }
}

impl AxisArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![
            ("x", &self.x),
            ("x_min", &self.x_min),
            ("x_max", &self.x_max),
            ("x_step", &self.x_step),
            ("y", &self.y),
            ("y_min", &self.y_min),
            ("y_max", &self.y_max),
            ("y_step", &self.y_step),
        ]
    }
}

impl OutputArgs {
    fn pairs(&self) -> Pairs<'_> {
        vec![("output", &self.output), ("format", &self.format)]
    }
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Computation(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Computation(_) => EXIT_COMPUTATION,
            Failure::Validation(_) => EXIT_VALIDATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Computation(m) | Failure::Validation(m) => m,
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn computation(e: Error) -> Failure {
    Failure::Computation(e.to_string())
}

fn merged(config: Option<&Path>, flags: Pairs<'_>) -> Result<RunConfig, Failure> {
    let mut cfg = match config {
        Some(path) => RunConfig::from_file(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(usage)?;
        }
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Computation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Computation(format!("cannot write output: {e}")))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Computation(format!("JSON encoding failed: {e}")))
}

fn grids_text(cfg: &RunConfig, grids: &[SweepGrid]) -> Result<String, Failure> {
    match cfg.format() {
        OutputFormat::Csv => Ok(csv::write_csv(grids.iter().flat_map(|g| g.cells.iter()))),
        OutputFormat::Json if grids.len() == 1 => to_json(&grids[0]),
        OutputFormat::Json => to_json(&grids),
    }
}

fn describe(grid: &SweepGrid) -> String {
    let best = grid.max_cell();
    let family = match best.alpha {
        Some(a) => format!("alpha family (alpha = {a})"),
        None => "phi2 family".to_string(),
    };
    let mut text = format!(
        "{family}: {}x{} grid over ({}, {}); max ng_{:?} = {:.6} at s = {}, tau = {}",
        grid.nx(),
        grid.ny(),
        grid.spec.x.param,
        grid.spec.y.param,
        grid.spec.annotate,
        grid.spec.annotate_value(best),
        csv::format_sig(best.s),
        csv::format_sig(best.tau),
    );
    if grid.annotations.len() == 1 {
        let a = &grid.annotations[0];
        text.push_str(&format!("\n  refined peak {:.6} at tau = {:.4}", a.peak.value, a.peak.tau));
        for iv in &a.intervals {
            match iv.revival {
                Some(r) => text.push_str(&format!("\n  zero negativity on [{:.4}, {:.4}]", iv.death, r)),
                None => text.push_str(&format!("\n  zero negativity from {:.4} to the end", iv.death)),
            }
        }
    }
    text
}

fn cmd_point(cli_config: Option<&Path>, field: &FieldArgs, output: &OutputArgs) -> Result<(), Failure> {
    let mut flags = field.pairs();
    flags.extend(output.pairs());
    let cfg = merged(cli_config, flags)?;
    let initial = cfg.initial_state().map_err(usage)?;
    let spec = cfg.field().map_err(usage)?;
    let tau = cfg.tau.ok_or_else(|| Failure::Usage("missing 'tau'".into()))?;
    let report = evaluate(&initial, &spec, tau).map_err(computation)?;
    let text = match cfg.format() {
        OutputFormat::Csv => csv::write_csv([&report]),
        OutputFormat::Json => to_json(&report)?,
    };
    emit(&cfg, &text)
}

fn cmd_sweep(
    cli_config: Option<&Path>,
    field: &FieldArgs,
    axes: &AxisArgs,
    output: &OutputArgs,
    threads: &Option<String>,
) -> Result<(), Failure> {
    let mut flags = field.pairs();
    flags.extend(axes.pairs());
    flags.extend(output.pairs());
    flags.push(("threads", threads));
    let cfg = merged(cli_config, flags)?;
    let spec = cfg.grid_spec().map_err(usage)?;
    let grid = sweep(&spec, cfg.threads).map_err(computation)?;
    emit(&cfg, &grids_text(&cfg, std::slice::from_ref(&grid))?)
}

fn cmd_figure(
    cli_config: Option<&Path>,
    id: u8,
    output: &OutputArgs,
    threads: &Option<String>,
) -> Result<(), Failure> {
    let mut flags = output.pairs();
    flags.push(("threads", threads));
    let cfg = merged(cli_config, flags)?;
    if cfg.output.is_none() {
        return Err(Failure::Usage("figure needs --output".into()));
    }
    let specs = figures::figure_specs(id).map_err(usage)?;
    let grids = specs
        .iter()
        .map(|spec| sweep(spec, cfg.threads))
        .collect::<Result<Vec<_>, _>>()
        .map_err(computation)?;
    emit(&cfg, &grids_text(&cfg, &grids)?)?;
    for g in &grids {
        println!("{}", describe(g));
    }
    Ok(())
}

fn cmd_validate(
    cli_config: Option<&Path>,
    seed: &Option<String>,
    count: &Option<String>,
    threads: &Option<String>,
    corrupt: bool,
) -> Result<(), Failure> {
    let cfg = merged(cli_config, vec![("seed", seed), ("count", count), ("threads", threads)])?;
    let mut opts = validate::ValidateOptions::new(cfg.seed.unwrap_or(0), cfg.count.unwrap_or(100));
    if corrupt {
        opts.pair_propagator = validate::corrupted_u_two;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(crate::analysis::thread_count(cfg.threads))
        .build()
        .map_err(|e| Failure::Computation(format!("cannot build thread pool: {e}")))?;
    let summary = pool.install(|| validate::run_validation(&opts));
    println!("{summary}");
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Validation("one or more invariants failed".into()))
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::Point { field, output } => cmd_point(config, field, output),
        Command::Sweep { field, axes, output, threads } => cmd_sweep(config, field, axes, output, threads),
        Command::Figure { id, output, threads } => cmd_figure(config, *id, output, threads),
        Command::Validate { seed, count, threads, corrupt_propagator } => {
            cmd_validate(config, seed, count, threads, *corrupt_propagator)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}
