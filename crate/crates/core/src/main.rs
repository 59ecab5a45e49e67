use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retne_core::harness::{
    noise_sweep, run_experiment, run_landscape, summary_path, write_results, write_snapshots,
    write_sweep, ExperimentConfig, ExperimentStats, Task,
};
use retne_core::{Method, Result};

#[derive(Parser)]
#[command(name = "retne", version, about = "Reverse-encoding-tree neuroevolution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeat one task/method experiment and write per-run results.
    Run(Common),
    /// Gaussian and reverse observation-noise sweep on cart-pole.
    Sweep(Common),
    /// Use the evolutionary loop as an optimizer on a 2-D landscape and
    /// write per-generation population snapshots.
    Landscape(Common),
}

#[derive(Args)]
struct Common {
    /// imply, nand, nor, xor, cartpole, cartpole_noise, rastrigin or grid
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    /// neat, fs-neat, bi-neat or gs-neat
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Number of independent runs
    #[arg(long)]
    iterations: Option<usize>,
    /// Base seed; run i uses seed + i
    #[arg(long)]
    seed: Option<u64>,
    /// Key-value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: retne_core::Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: retne_core::Error| e.to_string())
}

impl Common {
    fn resolve(&self, default_task: Task) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file_or(path, self.task, self.method, default_task)?,
            None => ExperimentConfig::preset(
                self.task.unwrap_or(default_task),
                self.method.unwrap_or(Method::BiNeat),
            ),
        };
        if let Some(n) = self.iterations {
            cfg.iterations = n;
        }
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn na(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), |v| format!("{v:.2}"))
}

fn print_stats(label: &str, s: &ExperimentStats) {
    println!(
        "{label}: runs {} fail rate {:.1}% avg gen {} stdev gen {} mean nodes {:.2}",
        s.runs,
        100.0 * s.fail_rate,
        na(s.avg_gen),
        na(s.stdev_gen),
        s.mean_node_count
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve(Task::Xor)?;
            let exp = run_experiment(&cfg)?;
            print_stats(&format!("{} {}", cfg.task, cfg.method), &exp.stats);
            let out = cfg
                .output_path
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}_{}.csv", cfg.task, cfg.method)));
            write_results(&exp.records, &exp.stats, &out)?;
            println!("wrote {} and {}", out.display(), summary_path(&out).display());
        }
        Command::Sweep(args) => {
            let cfg = args.resolve(Task::CartPoleNoise)?;
            let rows = noise_sweep(&cfg)?;
            for row in &rows {
                print_stats(&format!("{} {} {}", cfg.method, row.kind, row.level), &row.experiment.stats);
            }
            let out = cfg
                .output_path
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("sweep_{}.csv", cfg.method)));
            write_sweep(cfg.method, &rows, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Landscape(args) => {
            let cfg = args.resolve(Task::Rastrigin)?;
            let run = run_landscape(&cfg)?;
            print_stats(&format!("{} {}", cfg.task, cfg.method), &run.experiment.stats);
            let out = cfg
                .output_path
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}_{}_snapshots.csv", cfg.task, cfg.method)));
            write_snapshots(&run.snapshots, &out)?;
            let results = out.with_extension("runs.csv");
            write_results(&run.experiment.records, &run.experiment.stats, &results)?;
            println!("wrote {} and {}", out.display(), results.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
