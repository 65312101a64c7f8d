use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use spheremax::harness::{run, write_outputs, ExperimentConfig, EXPERIMENTS};

/// Numerical experiments for bilinear spherical maximal functions.
#[derive(Parser, Debug)]
#[command(name = "spheremax", version)]
struct Cli {
    /// Experiment name, or `all`.
    experiment: String,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    j_min: Option<u32>,
    #[arg(long)]
    j_max: Option<u32>,
    /// Smoothing parameter of the angular cutoff.
    #[arg(long, default_value_t = spheremax::symbols::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Grid points per axis.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Torus period.
    #[arg(long, default_value_t = 1.0)]
    grid_l: f64,
    /// Ratio between consecutive radii.
    #[arg(long)]
    t_ratio: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write a log-log plot.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    workers: Option<usize>,
}

impl Cli {
    fn config(&self, name: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(name);
        c.n = self.n;
        c.j_min = self.j_min;
        c.j_max = self.j_max;
        c.epsilon = self.epsilon;
        c.grid_n = self.grid_n;
        c.grid_l = self.grid_l;
        if let Some(r) = self.t_ratio {
            c.t_ratio = r;
        }
        c.r_min = self.r_min;
        c.r_max = self.r_max;
        c.seed = self.seed;
        c.out = self.out.clone();
        c.svg = self.svg;
        c.workers = self.workers;
        c
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let names: Vec<&str> = if cli.experiment == "all" { EXPERIMENTS.to_vec() } else { vec![cli.experiment.as_str()] };
    let mut failed = false;
    for name in names {
        let cfg = cli.config(name);
        let start = Instant::now();
        let report = match run(&cfg) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {name}: {e}");
                return ExitCode::from(2);
            }
        };
        if let Err(e) = write_outputs(&report, &cfg.out, cfg.svg) {
            eprintln!("error: {name}: {e}");
            return ExitCode::from(2);
        }
        for c in &report.checks {
            let value = c.value.map(|v| format!("{v:.6e}")).unwrap_or_default();
            println!("{} {name}/{} {value} [{}] {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.limit, c.detail);
        }
        for (k, f) in &report.fits {
            println!("fit  {name}/{k} slope {:.5} r2 {:.6}", f.slope, f.r_squared);
        }
        println!("{name}: {} in {:.1?}", if report.passed { "passed" } else { "FAILED" }, start.elapsed());
        failed |= !report.passed;
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
