use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use boostcast::bench::{
    self, compare_rows, emit_plot_data, parse_report_tsv, render_grid_tsv, render_table,
    run_experiment, tune_experiment, write_run_artifacts, write_tune_artifacts, ExperimentConfig,
};
use boostcast::frame::{canonical_schema, write_delimited};
use boostcast::{Error, Result};

#[derive(Parser)]
#[command(
    name = "boostcast",
    version,
    about = "Window-based gradient-boosted forecasting benchmarks",
    after_help = "Exit codes: 0 success, 1 configuration or usage error, 2 data or I/O error, \
                  3 numerical failure."
)]
struct Cli {
    /// Log filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset, apply imputation and derived covariates, and write
    /// the canonical CSV plus a schema sidecar.
    Prepare {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override a config value, e.g. --set window.h=6 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Destination directory (default: <output_dir>/prepared).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score every hyper-parameter grid point on the validation block.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Train the configured models and report test metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Compare two report.tsv files over their shared (model, metric) pairs.
    Compare {
        /// Baseline report.tsv.
        a: PathBuf,
        /// Candidate report.tsv.
        b: PathBuf,
    },
    /// Expand a run's retained predictions into per-series plot TSVs.
    Plotdata {
        /// Run directory holding predictions.tsv.
        #[arg(long)]
        run_dir: PathBuf,
        /// Destination directory (default: <run_dir>/plots).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf, set: &[String]) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path, set)?;
    bench::init_thread_pool(cfg.workers);
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Prepare { config, set, out } => {
            let cfg = load_config(&config, &set)?;
            let frame = bench::prepare_frame(&cfg)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.join("prepared"));
            std::fs::create_dir_all(&dir)?;
            let data_path = dir.join("prepared.csv");
            write_delimited(&frame, &data_path, b',')?;
            let schema = canonical_schema(&frame, ",");
            let schema_path = dir.join("prepared.schema.toml");
            let schema_text = toml::to_string(&schema)
                .map_err(|e| Error::Data(format!("cannot serialize schema: {e}")))?;
            std::fs::write(&schema_path, schema_text)?;
            println!(
                "prepared {}: {} series x {} steps, {} covariate channel(s)",
                cfg.dataset.id,
                frame.n(),
                frame.len(),
                frame.num_covariates()
            );
            println!("wrote {}", data_path.display());
            println!("wrote {}", schema_path.display());
            Ok(())
        }
        Command::Tune { config, set } => {
            let cfg = load_config(&config, &set)?;
            let tuned = tune_experiment(&cfg)?;
            print!("{}", render_grid_tsv(&tuned.rows, cfg.primary_metric));
            println!(
                "selected window_gbrt: {} (w={})",
                tuned.selected_window.describe(&cfg),
                tuned.selected_window.w
            );
            if let Some(r) = tuned.window_rounds {
                println!("early stopping kept {r} round(s)");
            }
            let written = write_tune_artifacts(&cfg, &tuned)?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Run { config, set } => {
            let cfg = load_config(&config, &set)?;
            let outcome = run_experiment(&cfg)?;
            print!("{}", render_table(&outcome.reports, &cfg.metrics, &outcome.manifest.config_digest));
            let written = write_run_artifacts(&cfg, &outcome)?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Compare { a, b } => {
            let read = |p: &PathBuf| -> Result<String> {
                std::fs::read_to_string(p)
                    .map_err(|e| Error::Data(format!("cannot read {}: {e}", p.display())))
            };
            let rows_a = parse_report_tsv(&read(&a)?)?;
            let rows_b = parse_report_tsv(&read(&b)?)?;
            let text = compare_rows(
                &a.display().to_string(),
                &rows_a,
                &b.display().to_string(),
                &rows_b,
            )?;
            print!("{text}");
            Ok(())
        }
        Command::Plotdata { run_dir, out } => {
            let dest = out.unwrap_or_else(|| run_dir.join("plots"));
            let written = emit_plot_data(&run_dir, &dest)?;
            for p in &written {
                println!("wrote {}", p.display());
            }
            println!("{} plot file(s)", written.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems share the configuration exit code; --help and
            // --version are successes.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log))
        .format_timestamp(None)
        .init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
