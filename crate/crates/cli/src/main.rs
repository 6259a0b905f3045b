//! `graphpack`: generate instances, pack them, re-verify dumps, sweep seeds
//! and probe matching resilience.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphpack::completion::estimate_resilience;
use graphpack::error::{ConfigError, Error};
use graphpack::pipeline::{emit_outputs, prepare_instances, reverify, run_pipeline, RunConfig};
use graphpack::report::{parse_embeddings, PackingReport};
use graphpack::InstanceSet;

#[derive(Parser)]
#[command(name = "graphpack", version, about = "Edge-disjoint packing of bounded-degree graphs into K_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the prepared instances of a config to a directory.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the pipeline; exit 0 if the packing verifies, 1 if not.
    Pack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-verify an embedding dump against the instances in a directory.
    Verify {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// Host order; defaults to the instance order.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a config over consecutive seeds, one CSV row each.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perfect matchings of B(n, p) under a greedy deleting adversary.
    Resilience {
        #[arg(long, default_value_t = 150)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::from)?;
    Ok(RunConfig::from_json(&text)?)
}

fn write_or_print(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Generate { config, out } => {
            let cfg = load_config(&config)?;
            let set = prepare_instances(&cfg)?;
            set.write_dir(&out)?;
            eprintln!("wrote {} instances ({} edges) to {}", set.instances.len(), set.total_edges, out.display());
            Ok(true)
        }
        Command::Pack {
            config,
            seed,
            report,
            embeddings,
            csv,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.output.report = report.or(cfg.output.report);
            cfg.output.embeddings = embeddings.or(cfg.output.embeddings);
            cfg.output.csv = csv.or(cfg.output.csv);
            let r = run_pipeline(&cfg)?;
            emit_outputs(&cfg, &r)?;
            if cfg.output.report.is_none() {
                print!("{}", r.to_canonical_json());
            }
            eprintln!(
                "valid: {}, {} instances, density {:.4}, {:.1} ms{}",
                r.valid,
                r.instance_count,
                r.density,
                r.timings.total_ms,
                r.failure.as_ref().map_or(String::new(), |f| format!(", failed in {}: {}", f.phase, f.message))
            );
            Ok(r.valid)
        }
        Command::Verify { instances, embeddings, n } => {
            let set = InstanceSet::read_dir(&instances)?;
            let guests: Vec<_> = set.instances.iter().map(|i| i.graph.clone()).collect();
            let orders: Vec<usize> = guests.iter().map(|g| g.vertex_count()).collect();
            let text = std::fs::read_to_string(&embeddings)?;
            let es = parse_embeddings(&text, &orders)?;
            let report = reverify(&guests, n.unwrap_or(set.n), &es);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(report.valid)
        }
        Command::Bench {
            config,
            seeds,
            first_seed,
            out,
        } => {
            let base = load_config(&config)?;
            let mut text = format!("{}\n", PackingReport::csv_header());
            let mut all = true;
            for seed in first_seed..first_seed + seeds {
                let mut cfg = base.clone();
                cfg.seed = seed;
                let r = run_pipeline(&cfg)?;
                all &= r.valid;
                text.push_str(&r.to_csv_row());
                text.push('\n');
            }
            write_or_print(&out, &text)?;
            Ok(all)
        }
        Command::Resilience {
            n,
            p,
            fraction,
            trials,
            seed,
            out,
        } => {
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&fraction) {
                return Err(ConfigError::Invalid("p and fraction must lie in [0, 1]".into()).into());
            }
            let stats = estimate_resilience(n, p, fraction, trials, seed);
            write_or_print(&out, &stats.to_csv())?;
            eprintln!("survived {}/{} ({:.3})", stats.survived, trials, stats.survival_rate);
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
            ExitCode::from(2)
        }
    }
}
