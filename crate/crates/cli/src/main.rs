use std::io;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hrpca_cli::bound::bound_rows;
use hrpca_cli::record::{append_results, summarize, write_csv, write_rows};
use hrpca_cli::{run_method, summary_path, sweep, BoundSpec, ExperimentSpec, Metric, MethodSpec, ResultRow};
use hrpca_core::datagen::{generate, read_dataset, read_truth, truth_path, write_dataset, write_truth, DatasetHeader, GenSpec};

#[derive(Parser)]
#[command(name = "hrpca", version, about = "Robust PCA experiments on contaminated data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and its truth sidecar from a generator spec.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one method on a dataset file and emit a result row.
    Run {
        dataset: PathBuf,
        #[arg(long, default_value = "hrpca")]
        method: String,
        /// JSON method settings; replaces the defaults of --method.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Algorithm seed; defaults to the dataset seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        t_hat: Option<usize>,
        #[arg(long)]
        t_bar: Option<usize>,
        /// Results CSV to append to; prints to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep and write per-trial and summary CSVs.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the base seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate asymptotic bound curves.
    Bound {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { spec, out, seed } => {
            let mut g: GenSpec = hrpca_cli::spec::read_json(&spec)?;
            if let Some(s) = seed {
                g.seed = s;
            }
            let (data, truth) = generate(&g)?;
            let header = DatasetHeader {
                n: g.n,
                m: g.m,
                d: g.d,
                lambda: g.lambda,
                seed: g.seed,
            };
            write_dataset(&out, &data, &header)?;
            write_truth(&truth_path(&out), &truth)?;
        }
        Command::Run {
            dataset,
            method,
            spec,
            seed,
            t_hat,
            t_bar,
            out,
        } => {
            let base = match spec {
                Some(p) => hrpca_cli::spec::read_json::<MethodSpec>(&p)?,
                None => MethodSpec::from_name(&method)?,
            };
            let method = base.with_budgets(t_hat, t_bar)?;
            let (header, data) =
                read_dataset(&dataset).with_context(|| format!("reading {}", dataset.display()))?;
            let tp = truth_path(&dataset);
            let truth = if tp.exists() { Some(read_truth(&tp)?) } else { None };
            let seed = seed.unwrap_or(header.seed);
            let outcome = run_method(&method, &data, truth.as_ref(), header.d, seed);
            let spec = truth.as_ref().map(|t| &t.spec);
            let row = ResultRow {
                cell_id: 0,
                method: method.label().into(),
                lambda: header.lambda,
                sigma: Metric(spec.map(|s| s.sigma)),
                mag: Metric(spec.map(|s| s.mag)),
                n: header.n,
                m: header.m,
                d: header.d,
                trial: 0,
                seed,
                ev: Metric(outcome.ev),
                opt: Metric(outcome.opt),
                status: outcome.status,
                runtime_ms: outcome.runtime_ms,
            };
            match out {
                Some(p) => append_results(&[row], &p)?,
                None => write_rows(&[row], io::stdout().lock())?,
            }
        }
        Command::Sweep { spec, out, seed } => {
            let mut exp: ExperimentSpec = hrpca_cli::spec::read_json(&spec)?;
            if let Some(s) = seed {
                exp.base_seed = s;
            }
            let Some(out) = out.or_else(|| exp.output.clone()) else {
                bail!("no output path: pass --out or set \"output\" in the spec");
            };
            let rows = sweep(&exp)?;
            write_csv(&rows, &out)?;
            write_csv(&summarize(&rows), &summary_path(&out))?;
        }
        Command::Bound { spec, out } => {
            let spec = match spec {
                Some(p) => hrpca_cli::spec::read_json(&p)?,
                None => BoundSpec::default(),
            };
            let rows = bound_rows(&spec)?;
            match out {
                Some(p) => write_csv(&rows, &p)?,
                None => write_rows(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
