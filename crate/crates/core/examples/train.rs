//! A short training run with the default stage schedule, written to a run
//! directory and plotted.
//!
//! `cargo run --release --example train -- 300 /tmp/qardns-run`

use std::path::PathBuf;

use qardns::cli::{cmd_plot, cmd_run};
use qardns::output::format_summary_text;
use qardns::RunConfig;

fn main() -> qardns::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().map_or(Ok(200), |s| s.parse()).expect("episodes must be an integer");
    let dir = args.next().map_or_else(|| std::env::temp_dir().join("qardns-train"), PathBuf::from);

    let config = RunConfig { episodes, seed: 42, output_dir: dir, ..RunConfig::default() };
    let run = cmd_run(&config)?;
    print!("{}", format_summary_text(&run.summary));

    for r in run.records.iter().step_by((run.records.len() / 10).max(1)) {
        let a = &r.agents[0];
        println!(
            "episode {:>4}  reward {:>9.2}  steps {:>4}  ε {:.3}  η {:.3}",
            r.episode, a.total_reward, a.steps, a.epsilon, a.eta
        );
    }
    let plots = cmd_plot(&run.dir)?;
    println!("artifacts in {}", run.dir.display());
    if !plots.smoothed {
        println!("(fewer episodes than the smoothing window; reward curve is raw)");
    }
    Ok(())
}
