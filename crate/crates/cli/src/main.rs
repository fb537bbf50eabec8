use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use horocurv::config::{ConfigOverrides, SuiteConfig};
use horocurv::models::{CurvatureMode, MetricModel, MODEL_NAMES};
use horocurv::report;
use horocurv::riccati;

#[derive(Parser)]
#[command(name = "horocurv", version, about = "Horosphere curvature via the matrix Riccati equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered models.
    Models {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the verification suite on one model.
    Verify(RunArgs),
    /// Tabulate horosphere data over sampled directions.
    Scan(RunArgs),
    /// Stable Riccati solution along one direction, with its trajectory.
    Riccati {
        #[command(flatten)]
        run: RunArgs,
        /// Chart components of the direction at the default point (normalized).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file; defaults to $HOROCURV_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long)]
    curvature_mode: Option<CurvatureMode>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output here (atomically) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            model: self.model.clone(),
            dim: self.dim,
            k: self.k,
            amplitude: self.amplitude,
            curvature_mode: self.curvature_mode,
            samples: self.samples,
            seed: self.seed,
            step: self.step,
            horizon: self.horizon,
            tol: self.tol,
            ..Default::default()
        }
    }

    fn resolve(&self) -> anyhow::Result<SuiteConfig> {
        Ok(SuiteConfig::resolve(self.config.as_deref(), &self.overrides())?)
    }
}

fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn models(format: Format) -> anyhow::Result<()> {
    let mut rows = Vec::new();
    for name in MODEL_NAMES {
        let model = match name {
            "complex-hyperbolic" => MetricModel::complex_hyperbolic()?,
            "perturbed" => MetricModel::perturbed(3, 1.0, 0.05)?,
            _ => MetricModel::hyperbolic(3, 1.0)?,
        };
        rows.push(report::ModelDescriptor::of(&model));
    }
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut s = String::from("name,default_dimension,curvature_bound,locally_symmetric\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{}\n", r.name, r.dimension, r.curvature_bound, r.locally_symmetric));
            }
            s
        }
    };
    emit(None, &text)
}

fn verify(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.resolve()?;
    let rep = report::run_suite(&cfg)?;
    let text = match args.format {
        Format::Json => rep.to_json() + "\n",
        Format::Csv => rep.to_csv(),
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(e) = &rep.error {
        eprintln!("horocurv: {e}");
    }
    Ok(ExitCode::from(rep.status.exit_code() as u8))
}

fn scan(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.resolve()?;
    let table = report::scan(&cfg)?;
    let text = match args.format {
        Format::Json => table.to_json() + "\n",
        Format::Csv => table.to_csv(),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn riccati_cmd(args: &RunArgs, direction: Option<&[f64]>) -> anyhow::Result<ExitCode> {
    let cfg = args.resolve()?;
    let model = cfg.model_spec().build()?;
    let v = match direction {
        Some(d) => model.unit_vector(&model.default_point(), d)?,
        None => report::suite_direction(&model, cfg.seed)?,
    };
    let run = riccati::stable_shape_operator(&model, &v, &cfg.riccati())?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&run)? + "\n",
        Format::Csv => report::trajectory_csv(&run),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Models { format } => models(*format).map(|_| ExitCode::SUCCESS),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => {
            if a.samples == Some(0) {
                bail!("--samples must be at least 1");
            }
            scan(a)
        }
        Command::Riccati { run, direction } => riccati_cmd(run, direction.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("horocurv: {e:#}");
            ExitCode::from(2)
        }
    }
}
