use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use giantatom_ssh_cli::output::describe;
use giantatom_ssh_cli::{exit_code, run, run_figure, CliError, Figure, RunConfig, Task};

#[derive(Parser)]
#[command(name = "giantatom-ssh", version, about = "Giant atom on a nonreciprocal SSH ring: spectra, profiles, localization and dynamics")]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, env = "GIANTATOM_SSH_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override a config field, e.g. `--set lattice.t1=0.8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the resolved config and exit without running.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues with state classes and IPR.
    Spectrum(RunArgs),
    /// Bound states above and below the bands, with closed forms.
    Boundstates(RunArgs),
    /// Zero-mode profile (exit 4 if none lies within the tolerance).
    Zeromode(RunArgs),
    /// Averaged IPR over a (g_m, g_n) grid.
    IprHeatmap(RunArgs),
    /// |β1|, |β2| of the selected state class.
    BetaProfile(RunArgs),
    /// Bulk winding number.
    Winding(RunArgs),
    /// Lyapunov exponent λ(v) from real-time evolution.
    Lyapunov(RunArgs),
    /// Spectrum over a one-parameter sweep.
    Sweep(RunArgs),
    /// Regenerate the data behind a figure (fig2..fig8).
    Figure {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(task: Task, args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::new(task),
    };
    cfg.task = task;
    let mut cfg = cfg.with_overrides(&args.set)?;
    if let Some(out) = &args.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (task, args) = match cli.command {
        Command::Figure { name, out } => {
            let fig: Figure = name.parse()?;
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(fig.as_str()));
            let manifest = run_figure(fig, &out)?;
            println!("{}", describe(&manifest));
            return Ok(exit_code(&manifest));
        }
        Command::Spectrum(a) => (Task::Spectrum, a),
        Command::Boundstates(a) => (Task::Boundstates, a),
        Command::Zeromode(a) => (Task::Zeromode, a),
        Command::IprHeatmap(a) => (Task::IprHeatmap, a),
        Command::BetaProfile(a) => (Task::BetaProfile, a),
        Command::Winding(a) => (Task::Winding, a),
        Command::Lyapunov(a) => (Task::Lyapunov, a),
        Command::Sweep(a) => (Task::Sweep, a),
    };
    let cfg = resolve(task, &args)?;
    if args.dry_run {
        println!("{}", cfg.to_json_pretty());
        return Ok(0);
    }
    let manifest = run(&cfg)?;
    println!("{}", describe(&manifest));
    if manifest.status == "no-gap-mode" {
        eprintln!("no gap mode found within |E| <= {}", cfg.options.zero_tolerance);
    }
    Ok(exit_code(&manifest))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot start thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
