use clap::{Parser, Subcommand};
use sparsemac::analysis::{analyze, CoherenceOptions, CAPACITY_DIM_CAP};
use sparsemac::exec::with_threads;
use sparsemac::harness::{
    self, detect, emit_outputs, realize, run_plan, table1_report, ExperimentPlan, PrecoderCache,
    PUBLISHED_COUNTS, PUBLISHED_ESN0_DB, PUBLISHED_ROWS,
};
use sparsemac::recovery::Algorithm;
use sparsemac::{rng, Error, Execution, Result};
use std::path::PathBuf;
use std::process::ExitCode;

/// Block-sparse multi-user detection experiments.
#[derive(Debug, Parser)]
#[command(name = "sparsemac", version)]
struct Cli {
    /// Master seed (overrides the plan).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per point (overrides the plan).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory (overrides the plan).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Plan file; the built-in desk plan when absent.
    #[arg(long, global = true)]
    plan: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sweep and write CSV, plot script and reports.
    Run {
        /// Run trials one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Largest provably supported number of active users per row.
    Table1 {
        /// Rows file (`M, N, d, T, s_l, mu_B, tau` per line); published rows when absent.
        #[arg(long)]
        rows: Option<PathBuf>,
        /// Es/N0 columns in dB.
        #[arg(long, value_delimiter = ',')]
        esn0: Option<Vec<f64>>,
    },
    /// Draw one realization and print its guarantee report.
    Analyze {
        /// Error probability for the capacity check.
        #[arg(long, default_value_t = 0.0)]
        p_e: f64,
        /// Sweep value to take the scenario at (first plan value when absent).
        #[arg(long)]
        at: Option<f64>,
    },
    /// Check the fast code paths against dense references on tiny systems.
    Selftest {
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
}

fn load_plan(cli: &Cli) -> Result<ExperimentPlan> {
    let mut plan = match &cli.plan {
        Some(p) => ExperimentPlan::parse(&std::fs::read_to_string(p)?)?,
        None => ExperimentPlan::desk(),
    };
    if let Some(s) = cli.seed {
        plan.base.seed = s;
    }
    if let Some(t) = cli.trials {
        plan.trials = t;
    }
    if let Some(d) = &cli.out_dir {
        plan.out_dir = d.clone();
    }
    plan.validate()?;
    Ok(plan)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Run { sequential } => {
            let plan = load_plan(&cli)?;
            let exec = if *sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let out = with_threads(cli.threads, || run_plan(&plan, exec))?;
            for s in &out.stats {
                println!(
                    "{:<10} {}={:<6} ser={:.4e} fer={:.4e} throughput={:.4} flagged={}",
                    s.algorithm, s.axis, s.axis_value, s.ser, s.fer, s.throughput, s.flagged_trials
                );
            }
            for p in emit_outputs(&out, &plan, &plan.out_dir)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Table1 { rows, esn0 } => {
            let custom = rows.is_some();
            let rows = match rows {
                Some(p) => harness::parse_rows(&std::fs::read_to_string(p)?)?,
                None => PUBLISHED_ROWS.to_vec(),
            };
            let esn0 = esn0.clone().unwrap_or_else(|| PUBLISHED_ESN0_DB.to_vec());
            let table = table1_report(&rows, &esn0);
            print!("{}", table.render());
            if !custom && esn0 == PUBLISHED_ESN0_DB {
                let matches = table.counts.iter().zip(&PUBLISHED_COUNTS).all(|(a, b)| a[..] == b[..]);
                println!("published counts reproduced: {matches}");
            }
        }
        Command::Analyze { p_e, at } => {
            let plan = load_plan(&cli)?;
            let value = at.or(plan.values.first().copied());
            let cfg = match value {
                Some(v) => plan.config_at(v)?,
                None => plan.base.clone(),
            };
            let cache = PrecoderCache::default();
            let mut r = rng::substream(cfg.seed, &[rng::TAG_ANALYSIS]);
            let real = realize(&cfg, cache.get(&cfg)?, &mut r)?;
            let icbomp = detect(Algorithm::Icbomp, &real, &cfg)?;
            let p_e = (cfg.n_active * cfg.d <= CAPACITY_DIM_CAP).then_some(*p_e);
            let opts = CoherenceOptions {
                subsample: Some((CoherenceOptions::default().max_pairs, cfg.seed)),
                ..CoherenceOptions::default()
            };
            let report = with_threads(cli.threads, || analyze(&real.dict, &real.frame, &cfg, Some(&icbomp), p_e, &opts))?;
            let text = report.to_kv_string();
            print!("{text}");
            if let Some(dir) = &cli.out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("report.txt"), &text)?;
            }
        }
        Command::Selftest { instances } => {
            let checks = harness::run_selftest(cli.seed.unwrap_or(1), *instances)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Err(Error::InvalidConfig("selftest failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
