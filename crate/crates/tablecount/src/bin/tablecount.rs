use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use tablecount::bench::{self, GridSpec};
use tablecount::format::{format_margins, parse_margins, write_tables, z_csv};
use tablecount::methods::{evaluate, EvalOptions, Orient};
use tablecount::parallel;
use tablecount_core::exact::{self, ln_biguint, DEFAULT_STATE_GUARD};
use tablecount_core::generate::{MarginGenerator, Scheme};
use tablecount_core::maxent::{self, DEFAULT_MAX_ITER, DEFAULT_TOL};
use tablecount_core::sis::{SisPlan, TrialKind};
use tablecount_core::{Margins, Method};

#[derive(Parser)]
#[command(name = "tablecount", version, about = "Count contingency tables with fixed margins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate ln of the number of tables.
    Estimate {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Margins file (`-` for stdin).
        #[arg(long)]
        margins: PathBuf,
        #[arg(long, value_enum, default_value = "as-given")]
        orient: Orient,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Write the maximum-entropy table as CSV.
        #[arg(long)]
        dump_z: Option<PathBuf>,
        /// Iterations for sampling methods.
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Count tables exactly.
    Exact {
        #[arg(long)]
        margins: PathBuf,
        /// Count 0-1 tables only.
        #[arg(long)]
        zero_one: bool,
        /// Refuse margins whose row-state bound exceeds this.
        #[arg(long, default_value_t = DEFAULT_STATE_GUARD as u64)]
        guard: u64,
    },
    /// Sequential importance sampling.
    Sis {
        #[arg(long, value_parser = parse_trial, default_value = "ec")]
        trial: TrialKind,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        margins: PathBuf,
        /// Write every sampled table, one per line.
        #[arg(long)]
        emit_tables: Option<PathBuf>,
        /// Report progress on stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Run an error grid.
    Bench {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Generate 0-1 margins and use 0-1 truth.
        #[arg(long)]
        zero_one: bool,
        #[arg(long)]
        emit_plot_data: bool,
        /// Report each record on stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Print random margins.
    GenMargins {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'N')]
        total: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        zero_one: bool,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|_| {
        let ids: Vec<&str> = Method::ALL.iter().map(|m| m.id()).collect();
        format!("expected one of {}", ids.join(", "))
    })
}

fn parse_trial(s: &str) -> Result<TrialKind, String> {
    TrialKind::from_id(s).ok_or_else(|| "expected ec, gc or greedy".to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::from_id(s).ok_or_else(|| "expected uniform or matrix".to_string())
}

fn load(path: &Path) -> Result<Margins> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_margins(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let threads = parallel::thread_count();
    match cli.command {
        Command::Estimate {
            method,
            margins,
            orient,
            tol,
            max_iter,
            dump_z,
            iters,
            seed,
        } => {
            let margins = load(&margins)?;
            let opts = EvalOptions {
                tol,
                max_iter,
                sis_iterations: iters,
                seed,
                orient,
                ..EvalOptions::default()
            };
            if let Some(path) = dump_z {
                let solution = maxent::solve_maxent(&orient.apply(&margins), tol, max_iter)?;
                fs::write(&path, z_csv(&solution)).with_context(|| format!("writing {}", path.display()))?;
            }
            let pool = parallel::pool(threads);
            let v = evaluate(method, &margins, &opts, Some(&pool))?;
            println!("method {}", method.id());
            println!("ln {:.17e}", v.ln_omega);
            println!("log10 {:.17e}", v.log10());
            if let Some(se) = v.std_err {
                println!("std_err {se:.6e}");
            }
        }
        Command::Exact { margins, zero_one, guard } => {
            let margins = load(&margins)?;
            let guard = guard as u128;
            let count = if zero_one {
                exact::count_exact_01_with_guard(&margins, guard)?
            } else {
                exact::count_exact_with_guard(&margins, guard)?
            };
            match u64::try_from(&count) {
                Ok(v) => println!("count {v}"),
                Err(_) => println!("count {count}"),
            }
            println!("ln {:.17e}", ln_biguint(&count));
        }
        Command::Sis {
            trial,
            iters,
            seed,
            margins,
            emit_tables,
            progress,
        } => {
            let margins = load(&margins)?;
            if iters < 2 {
                bail!("--iters must be at least 2");
            }
            let pool = parallel::pool(threads);
            let run = if progress {
                // batches so there is something to report
                let plan = SisPlan::new(&margins, trial);
                let mut weights = Vec::with_capacity(iters);
                let step = (iters / 20).max(1);
                let mut from = 0;
                while from < iters {
                    let to = (from + step).min(iters);
                    let chunk = pool.install(|| {
                        use rayon::prelude::*;
                        (from as u64..to as u64)
                            .into_par_iter()
                            .map(|t| plan.log_weight(seed, t))
                            .collect::<tablecount_core::Result<Vec<f64>>>()
                    })?;
                    weights.extend(chunk);
                    from = to;
                    eprintln!("{from}/{iters}");
                }
                tablecount_core::sis::SisRun {
                    trial,
                    seed,
                    column_order: plan.column_order().to_vec(),
                    log_weights: weights,
                }
            } else {
                parallel::run(&pool, &margins, trial, iters, seed)?
            };
            if let Some(path) = emit_tables {
                let tables = parallel::sample_tables(&pool, &margins, trial, iters, seed)?;
                let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                write_tables(&mut out, &tables)?;
                out.flush()?;
            }
            println!("trial {}", trial.id());
            println!("ln {:.17e}", run.ln_estimate());
            println!("std_err {:.6e}", run.std_err());
            println!("ess {:.3}", run.ess());
            println!("iterations {}", run.iterations());
        }
        Command::Bench {
            grid,
            out,
            zero_one,
            emit_plot_data,
            progress,
        } => {
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let mut spec = GridSpec::from_json(&text)?;
            spec.zero_one |= zero_one;
            let mut stderr = io::stderr();
            let sink: Option<&mut dyn Write> = if progress { Some(&mut stderr) } else { None };
            let records = bench::run_to_dir(&spec, &out, threads, emit_plot_data, sink)?;
            println!("{} records written to {}", records.len(), out.display());
        }
        Command::GenMargins {
            scheme,
            m,
            n,
            total,
            seed,
            zero_one,
        } => {
            let margins = MarginGenerator::new(scheme, m, n, total, seed).zero_one(zero_one).generate()?;
            print!("{}", format_margins(&margins));
        }
    }
    Ok(())
}
