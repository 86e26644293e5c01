use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use weightmax::harness::{preset, run_matrix, Checkpoint, ExperimentConfig, Trainer, PRESET_NAMES};
use weightmax::oracle::{run_verification, EnumBudget};
use weightmax::{Error, Result};

#[derive(Parser)]
#[command(name = "weightmax", version, about = "Train and verify networks of Bernoulli logistic units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one training experiment.
    Train {
        /// Config file or preset name.
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Metrics CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Checkpoint file, written every `--checkpoint-every` steps and at the end.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        checkpoint_every: Option<u64>,
        /// Continue from a checkpoint written by a compatible config.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Override the total sample count.
        #[arg(long)]
        samples: Option<u64>,
        /// Write the final weights as JSON.
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Run the exact-enumeration verification suite.
    Verify {
        #[arg(long, default_value_t = EnumBudget::default().max_total_hidden_bits)]
        max_hidden_bits: usize,
        #[arg(long, default_value_t = EnumBudget::default().max_states)]
        max_states: usize,
        /// JSON report destination; printed to stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run configs under several seeds and summarize mean and std.
    Sweep {
        /// Config files or preset names.
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        samples: Option<u64>,
        /// Summary CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for one metrics CSV per run.
        #[arg(long)]
        runs_dir: Option<PathBuf>,
    },
    /// Print a preset, or list all of them.
    ShowConfig { name: Option<String> },
}

fn load_config(src: &str) -> Result<ExperimentConfig> {
    let path = Path::new(src);
    if path.exists() {
        ExperimentConfig::load(path)
    } else if PRESET_NAMES.contains(&src) {
        preset(src)
    } else {
        Err(Error::Config(format!(
            "{src:?} is neither a config file nor a preset ({})",
            PRESET_NAMES.join(", ")
        )))
    }
}

fn beta_line(cfg: &ExperimentConfig) -> String {
    let b: Vec<String> = cfg.rule.reg_weights.iter().map(|&v| if v == 0.0 { "0".to_string() } else { format!("{v:e}") }).collect();
    if b.is_empty() {
        "beta = none".into()
    } else {
        format!("beta = ({})", b.join(", "))
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train {
            config,
            seed,
            out,
            checkpoint,
            checkpoint_every,
            resume,
            samples,
            weights_out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = samples {
                cfg.total_samples = n;
            }
            if out.is_some() {
                cfg.output = out;
            }
            if let Some(path) = checkpoint {
                cfg.checkpoint_interval = Some(checkpoint_every.unwrap_or_else(|| cfg.steps().max(1)));
                cfg.checkpoint_path = Some(path);
            }
            let trainer = match resume {
                Some(path) => Trainer::resume(cfg, Checkpoint::load(&path)?)?,
                None => Trainer::new(cfg)?,
            };
            let outcome = trainer.run()?;
            if let Some(path) = weights_out {
                outcome.weights.save(&path)?;
            }
            if let Some(avg) = outcome.metrics.final_running_avg() {
                eprintln!("steps {} final running_avg {avg}", outcome.metrics.rows.len());
            }
            Ok(true)
        }
        Command::Verify {
            max_hidden_bits,
            max_states,
            report,
        } => {
            let budget = EnumBudget {
                max_total_hidden_bits: max_hidden_bits,
                max_states,
            };
            let rep = run_verification(&budget)?;
            for c in &rep.checks {
                eprintln!(
                    "{} {}: measured {:e}, tolerance {:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.tolerance
                );
            }
            let json = rep.to_json()?;
            match report {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            Ok(rep.passed)
        }
        Command::Sweep {
            config,
            seeds,
            samples,
            out,
            runs_dir,
        } => {
            let mut configs = Vec::new();
            for (i, src) in config.iter().enumerate() {
                let mut cfg = load_config(src)?;
                if let Some(n) = samples {
                    cfg.total_samples = n;
                }
                if cfg.name.is_empty() {
                    cfg.name = format!("config{i}");
                }
                configs.push(cfg);
            }
            let summary = run_matrix(&configs, &seeds)?;
            if let Some(dir) = runs_dir {
                std::fs::create_dir_all(&dir)?;
                for r in &summary.runs {
                    r.metrics.write_csv(&dir.join(format!("{}_seed{}.csv", r.config, r.seed)))?;
                }
            }
            match out {
                Some(path) => summary.write_csv(&path)?,
                None => print!("{}", summary.to_csv()),
            }
            for cfg in &configs {
                let finals = summary.finals(&cfg.name);
                let (m, s) = weightmax::harness::mean_std(&finals);
                eprintln!("{}: final running_avg mean {m:.4} std {s:.4} over {} seeds", cfg.name, finals.len());
            }
            Ok(true)
        }
        Command::ShowConfig { name } => {
            match name {
                Some(n) => {
                    let cfg = preset(&n)?;
                    println!("{}", beta_line(&cfg));
                    println!("{}", cfg.to_json()?);
                }
                None => {
                    for n in PRESET_NAMES {
                        let cfg = preset(n)?;
                        println!("{n}: rule {}, {}", cfg.rule.kind.name(), beta_line(&cfg));
                    }
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
