use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qardns::cli::{cmd_compare, cmd_plot, cmd_run, cmd_sweep, format_comparison};
use qardns::output::format_summary_text;
use qardns::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "qardns", version, about = "Multi-agent quantum-circuit RL in a 3D grid world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and write episodes.csv, summary.txt, summary.json, run_config.txt
    Run(RunArgs),
    /// Mann-Whitney U on per-episode rewards of two runs
    Compare {
        /// Run directory or config file
        a: PathBuf,
        /// Run directory or config file
        b: PathBuf,
        /// Where comparison.txt goes (default: the current directory)
        #[arg(long, short, default_value = ".")]
        output: PathBuf,
    },
    /// Render SVG figures from a run directory
    Plot { run_dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// key = value file; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// e.g. 10,10,3
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    goal: Option<String>,
    #[arg(long)]
    obstacle_fraction: Option<String>,
    #[arg(long)]
    max_steps: Option<String>,
    #[arg(long)]
    n_qubits: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    /// qardns or baseline
    #[arg(long)]
    learner: Option<String>,
    /// Pin ε for every episode (1.0 = random-policy control)
    #[arg(long)]
    fixed_epsilon: Option<String>,
    /// broadcast or outcome-signed
    #[arg(long)]
    plasticity: Option<String>,
    #[arg(long)]
    stage_schedule: Option<String>,
    #[arg(long, short, env = "QARDNS_OUTPUT_DIR")]
    output: Option<String>,
    /// Comma-separated seeds run in parallel into <output>/seed-<n>
    #[arg(long, value_delimiter = ',')]
    sweep_seeds: Vec<u64>,
}

impl RunArgs {
    fn config(&self) -> qardns::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_kv_file(p)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("episodes", &self.episodes),
            ("seed", &self.seed),
            ("dims", &self.dims),
            ("goal", &self.goal),
            ("obstacle_fraction", &self.obstacle_fraction),
            ("max_steps", &self.max_steps),
            ("n_qubits", &self.n_qubits),
            ("shots", &self.shots),
            ("learner", &self.learner),
            ("fixed_epsilon", &self.fixed_epsilon),
            ("plasticity", &self.plasticity),
            ("stage_schedule", &self.stage_schedule),
            ("output_dir", &self.output),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> qardns::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let outcomes = if args.sweep_seeds.is_empty() {
                vec![cmd_run(&cfg)?]
            } else {
                cmd_sweep(&cfg, &args.sweep_seeds)?
            };
            for o in outcomes {
                println!("{}", o.dir.display());
                print!("{}", format_summary_text(&o.summary));
            }
        }
        Command::Compare { a, b, output } => {
            print!("{}", format_comparison(&cmd_compare(&a, &b, &output)?));
        }
        Command::Plot { run_dir } => {
            let report = cmd_plot(&run_dir)?;
            if !report.smoothed {
                eprintln!("note: run shorter than the smoothing window; reward curve left unsmoothed");
            }
            for f in report.files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    u8::try_from(e.exit_code()).unwrap_or(1)
}
