use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use synthpriv::anonymity;
use synthpriv::data::{self, Schema};
use synthpriv::eval;
use synthpriv::noise::NoiseModel;
use synthpriv::pipeline::{self, PipelineConfig, SweepGrid, SweepReport};
use synthpriv::surrogate::{self, SurrogateConfig};
use synthpriv::{Error, Label, Result, RngSeed};

#[derive(Parser)]
#[command(
    name = "synthpriv",
    version,
    about = "SMOTE + Gaussian perturbation with a k-anonymity audit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline once and write the released table and reports.
    Synthesize(PipelineArgs),
    /// k-anonymity audit of a table as it is.
    Audit(PipelineArgs),
    /// Train on `--input`, score on `--test`.
    Evaluate {
        #[command(flatten)]
        args: PipelineArgs,
        /// Held-out test CSV with the same schema.
        #[arg(long)]
        test: PathBuf,
    },
    /// Run the pipeline over a grid of (g, E, k).
    Sweep {
        #[command(flatten)]
        args: PipelineArgs,
        #[arg(long, value_delimiter = ',', default_values_t = SweepGrid::figure_grid().noise_levels)]
        noise_levels: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = SweepGrid::figure_grid().smote_amounts)]
        smote_amounts: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = SweepGrid::figure_grid().k_values)]
        k_values: Vec<usize>,
    },
    /// Turn a saved sweep.json into per-figure CSV tables.
    Plotdata {
        /// sweep.json written by `sweep`.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the generated body-sensor stand-in (data.csv, schema.toml and a
    /// matching config.toml).
    Surrogate {
        #[arg(long, default_value_t = SurrogateConfig::default().records)]
        records: usize,
        #[arg(long, default_value_t = SurrogateConfig::default().seed.0)]
        data_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flags mirror `PipelineConfig`; any flag given overrides the config file.
#[derive(Args, Default)]
struct PipelineArgs {
    /// TOML file with `PipelineConfig` fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    minority_label: Option<String>,
    #[arg(long)]
    smote_amount: Option<u32>,
    #[arg(long)]
    neighbors: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    /// `diagonal_scaled` or `full_covariance`.
    #[arg(long)]
    noise_model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    qi_columns: Option<Vec<String>>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<String>>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut cfg = PipelineConfig::load(path).map_err(|e| e.in_stage("load"))?;
                cfg.rebase(path.parent().unwrap_or(Path::new("")));
                cfg
            }
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &self.schema {
            cfg.schema = Some(v.clone());
        }
        if let Some(v) = &self.minority_label {
            cfg.minority_label = Label::new(v.as_str());
        }
        if let Some(v) = self.smote_amount {
            cfg.smote_amount = v;
        }
        if let Some(v) = self.neighbors {
            cfg.neighbors = v;
        }
        if let Some(v) = self.noise {
            cfg.noise = v;
        }
        if let Some(v) = &self.noise_model {
            cfg.noise_model = match v.as_str() {
                "diagonal_scaled" => NoiseModel::DiagonalScaled,
                "full_covariance" => NoiseModel::FullCovariance,
                other => {
                    return Err(Error::ConfigInvalid(format!(
                        "unknown noise model `{other}`"
                    )))
                }
            };
        }
        if let Some(v) = &self.qi_columns {
            cfg.qi_columns = v.clone();
            cfg.qi_rules = None;
        }
        if let Some(v) = self.bins {
            cfg.bins = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = &self.classifiers {
            cfg.classifiers = v.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = self.test_fraction {
            cfg.test_fraction = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        Ok(cfg)
    }
}

fn schema_of(cfg: &PipelineConfig) -> Result<Schema> {
    let path = cfg
        .schema
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("no schema file given".into()))?;
    Schema::load(path).map_err(|e| e.in_stage("load"))
}

/// Write to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"));
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Summary<'a> {
    records_released: usize,
    risk: f64,
    satisfies_k_anonymity: bool,
    accuracy: Vec<(&'a str, f64)>,
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synthesize(args) => {
            let cfg = args.resolve()?;
            let outcome = pipeline::run_pipeline(&cfg)?;
            print_json(&Summary {
                records_released: outcome.released.len(),
                risk: outcome.risk.risk,
                satisfies_k_anonymity: outcome.risk.satisfies_k_anonymity,
                accuracy: outcome
                    .evals
                    .iter()
                    .map(|e| (e.classifier.as_str(), e.accuracy))
                    .collect(),
            })
        }
        Command::Audit(args) => {
            let cfg = args.resolve()?;
            let data = pipeline::load_input(&cfg)?;
            let spec = cfg.qi_spec(&data);
            spec.validate(&data)?;
            let report = anonymity::audit(&data, &spec, cfg.k)?;
            if let Some(out) = &cfg.out {
                write_json(&report, &out.join("risk.json"))?;
            }
            print_json(&report)
        }
        Command::Evaluate { args, test } => {
            let cfg = args.resolve()?;
            let train = pipeline::load_input(&cfg)?;
            let test = data::load_csv(&test, &schema_of(&cfg)?).map_err(|e| e.in_stage("load"))?;
            let mut reports = Vec::new();
            for &kind in &cfg.classifiers {
                let seed = cfg.stage_seed(kind.as_str());
                let report = eval::evaluate(kind, &cfg.classifier_params, &train, &test, seed)
                    .map_err(|e| e.in_stage("evaluate"))?;
                if let Some(out) = &cfg.out {
                    write_json(&report, &out.join(format!("eval_{kind}.json")))?;
                }
                reports.push(report);
            }
            print_json(&reports)
        }
        Command::Sweep {
            args,
            noise_levels,
            smote_amounts,
            k_values,
        } => {
            let cfg = args.resolve()?;
            let grid = SweepGrid {
                noise_levels,
                smote_amounts,
                k_values,
            };
            grid.validate()?;
            let data = pipeline::load_input(&cfg)?;
            cfg.validate(&data)?;
            let report = pipeline::run_sweep(&data, &cfg, &grid)?;
            emit(&report.to_csv_string());
            Ok(())
        }
        Command::Plotdata { report, out } => {
            let report = SweepReport::load_json(&report).map_err(|e| e.in_stage("load"))?;
            for path in pipeline::emit_plot_data(&report, &out)? {
                emit(&format!("{}\n", path.display()));
            }
            Ok(())
        }
        Command::Surrogate {
            records,
            data_seed,
            out,
        } => {
            let data = surrogate::generate(&SurrogateConfig {
                records,
                seed: RngSeed(data_seed),
                ..Default::default()
            });
            std::fs::create_dir_all(&out).map_err(|e| Error::io(out.clone(), e))?;
            let csv_path = out.join("data.csv");
            let schema_path = out.join("schema.toml");
            data::save_csv(&data, &csv_path)?;
            std::fs::write(&schema_path, surrogate::schema().to_toml_string())
                .map_err(|e| Error::io(schema_path.clone(), e))?;
            // Relative, so the directory can be moved; paths in a config file
            // resolve against the file's own directory.
            let cfg = PipelineConfig {
                input: Some("data.csv".into()),
                schema: Some("schema.toml".into()),
                ..surrogate::pipeline_config()
            };
            let cfg_path = out.join("config.toml");
            std::fs::write(&cfg_path, cfg.to_toml_string())
                .map_err(|e| Error::io(cfg_path.clone(), e))?;
            emit(&format!("{}\n", cfg_path.display()));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
