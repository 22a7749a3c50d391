//! Experiment CLI: dataset generation, training, objective enumeration,
//! verification suites, and evaluation reports, all seeded and
//! reproducible.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 I/O error, 4 numeric
//! abort during training. Every artifact-producing command writes a
//! `run_manifest.json` recording the command line, the config checksum,
//! the seed, the output paths, and the wall-clock duration. Manifests are
//! the only output that varies between identical runs (duration); all
//! other artifacts are byte-identical given the same configs and seeds.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use mvfactor::error::Error;
use mvfactor::eval::{
    ablation_csv, classification_probe, classification_report_csv, complexity_csv,
    complexity_report, modality_sweep, percent_increase, regression_probe, regression_report_csv,
    run_ablation, sweep_csv,
};
use mvfactor::objectives::{enumerate_objectives, Scheme};
use mvfactor::synth::{generate, GeneratorConfig, SyntheticRegionDataset};
use mvfactor::train::{export_embeddings, load_model, run_training, save_model, TrainConfig};
use mvfactor::verify::{all_passed, checks_csv, grad_suite, oracle_suite, sandwich_suite};

#[derive(Parser)]
#[command(
    name = "mvfactor",
    version,
    about = "Factorized multi-view contrastive learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Pairwise,
    Factorized,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Pairwise => Scheme::Pairwise,
            SchemeArg::Factorized => Scheme::Factorized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AblationArg {
    /// Remove intra-view learning.
    Ir,
    /// Remove unique-information objectives.
    Ur,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Oracle,
    Grad,
    Sandwich,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Regression,
    Classification,
    Ablation,
    Sweep,
    Complexity,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multimodal dataset.
    Gen(GenArgs),
    /// Pretrain and jointly train encoders on a dataset.
    Train(TrainArgs),
    /// List the objectives of a scheme.
    Enumerate(EnumerateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Evaluate a trained model or run a study.
    Eval(EvalArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Generator config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory produced by `gen`.
    #[arg(long)]
    data: PathBuf,
    /// Training config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Ablation variant: ir (no intra-view) or ur (no unique objectives).
    #[arg(long, value_enum)]
    ablation: Option<AblationArg>,
    /// Output directory for the checkpoint, traces, and manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Modality count (2..=6).
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Optional output directory for the listing and manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    /// Optional output directory for the per-check CSV and manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// Trained model directory (regression / classification tasks).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Training config (ablation / sweep / complexity tasks).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seeds for multi-seed studies, e.g. "1,2,3".
    #[arg(long)]
    seeds: Option<String>,
    /// Semicolon-separated 1-based modality subsets, e.g. "1,2;1,3,4".
    #[arg(long)]
    subsets: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config_path: Option<String>,
    config_sha256: Option<String>,
    seed: Option<u64>,
    outputs: Vec<String>,
    duration_ms: u128,
    version: String,
}

struct ManifestBuilder {
    start: Instant,
    command: String,
    config_path: Option<String>,
    config_sha256: Option<String>,
    seed: Option<u64>,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    fn new(command: &str) -> ManifestBuilder {
        ManifestBuilder {
            start: Instant::now(),
            command: command.to_string(),
            config_path: None,
            config_sha256: None,
            seed: None,
            outputs: Vec::new(),
        }
    }

    fn with_config(&mut self, path: &Path) -> Result<(), Error> {
        let bytes = fs::read(path)?;
        self.config_path = Some(path.display().to_string());
        self.config_sha256 = Some(hex_digest(&bytes));
        Ok(())
    }

    fn record(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn write(self, dir: &Path) -> Result<(), Error> {
        let manifest = RunManifest {
            command: self.command,
            config_path: self.config_path,
            config_sha256: self.config_sha256,
            seed: self.seed,
            outputs: self.outputs,
            duration_ms: self.start.elapsed().as_millis(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::parse("run manifest", e.to_string()))?;
        fs::write(dir.join("run_manifest.json"), json)?;
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::NumericAbort { .. } | Error::Numeric { .. } => 4,
        _ => 2,
    }
}

fn write_owned(manifest: &mut ManifestBuilder, path: &Path, content: &str) -> Result<(), Error> {
    fs::write(path, content)?;
    manifest.record(path);
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), Error> {
    let mut manifest = ManifestBuilder::new("gen");
    manifest.with_config(&args.config)?;
    let text = fs::read_to_string(&args.config)?;
    let config: GeneratorConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    manifest.seed = Some(config.seed);
    let model = config.build_model()?;
    let dataset = generate(&model, config.n, config.seed)?;
    fs::create_dir_all(&args.out)?;
    dataset.save_dir(&args.out)?;
    for i in 0..dataset.num_modalities() {
        manifest.record(&args.out.join(format!("modality_{i}.csv")));
    }
    manifest.record(&args.out.join("labels.csv"));
    manifest.record(&args.out.join("dataset.json"));
    manifest.write(&args.out)?;
    println!(
        "generated {} regions x {} modalities -> {}",
        dataset.num_regions(),
        dataset.num_modalities(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<(), Error> {
    let mut manifest = ManifestBuilder::new("train");
    manifest.with_config(&args.config)?;
    let mut config = TrainConfig::from_json_file(&args.config)?;
    if let Some(scheme) = args.scheme {
        config.scheme = scheme.into();
    }
    match args.ablation {
        Some(AblationArg::Ir) => config.disable_intra = true,
        Some(AblationArg::Ur) => config.disable_unique = true,
        None => {}
    }
    manifest.seed = Some(config.seed);
    let dataset = SyntheticRegionDataset::load_dir(&args.data)?;
    let model = run_training(&dataset, &config)?;
    fs::create_dir_all(&args.out)?;
    save_model(&model, &args.out)?;
    manifest.record(&args.out.join("model.json"));
    manifest.record(&args.out.join("traces.csv"));
    manifest.write(&args.out)?;
    println!(
        "trained {} scheme on {} modalities, {} objectives -> {}",
        config.scheme,
        dataset.num_modalities(),
        model.assembly.objectives.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<(), Error> {
    if !(2..=6).contains(&args.m) {
        return Err(Error::Input(format!(
            "m must be within 2..=6, got {}",
            args.m
        )));
    }
    let scheme: Scheme = args.scheme.into();
    let objectives = enumerate_objectives(args.m, scheme)?;
    let rendered = match args.format {
        FormatArg::Text => {
            let mut text = String::new();
            for o in &objectives {
                text.push_str(&o.label());
                text.push('\n');
            }
            text.push_str(&format!("count: {}\n", objectives.len()));
            text
        }
        FormatArg::Json => {
            #[derive(Serialize)]
            struct Listing {
                m: usize,
                scheme: String,
                count: usize,
                objectives: Vec<String>,
            }
            serde_json::to_string_pretty(&Listing {
                m: args.m,
                scheme: scheme.to_string(),
                count: objectives.len(),
                objectives: objectives.iter().map(|o| o.label()).collect(),
            })
            .map_err(|e| Error::parse("listing", e.to_string()))?
                + "\n"
        }
    };
    print!("{rendered}");
    if let Some(out) = &args.out {
        let mut manifest = ManifestBuilder::new("enumerate");
        fs::create_dir_all(out)?;
        write_owned(&mut manifest, &out.join("objectives.txt"), &rendered)?;
        manifest.write(out)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let (name, checks) = match args.suite {
        SuiteArg::Oracle => ("oracle", oracle_suite()?),
        SuiteArg::Grad => ("grad", grad_suite()?),
        SuiteArg::Sandwich => ("sandwich", sandwich_suite()?),
    };
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {}/{}: {}",
            check.suite, check.name, check.detail
        );
    }
    if let Some(out) = &args.out {
        let mut manifest = ManifestBuilder::new(&format!("verify --suite {name}"));
        fs::create_dir_all(out)?;
        write_owned(&mut manifest, &out.join("checks.csv"), &checks_csv(&checks))?;
        manifest.write(out)?;
    }
    Ok(all_passed(&checks))
}

fn parse_seeds(text: Option<&str>, fallback: u64) -> Result<Vec<u64>, Error> {
    match text {
        None => Ok(vec![fallback]),
        Some(t) => t
            .split(',')
            .map(|f| {
                f.trim()
                    .parse()
                    .map_err(|e| Error::Input(format!("bad seed {f:?}: {e}")))
            })
            .collect(),
    }
}

fn parse_subsets(text: &str) -> Result<Vec<Vec<usize>>, Error> {
    text.split(';')
        .map(|group| {
            group
                .split(',')
                .map(|f| {
                    let one_based: usize = f
                        .trim()
                        .parse()
                        .map_err(|e| Error::Input(format!("bad modality index {f:?}: {e}")))?;
                    if one_based == 0 {
                        return Err(Error::Input("modality indices are 1-based".into()));
                    }
                    Ok(one_based - 1)
                })
                .collect()
        })
        .collect()
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Error> {
    let dataset = SyntheticRegionDataset::load_dir(&args.data)?;
    fs::create_dir_all(&args.out)?;
    let task_name = match args.task {
        TaskArg::Regression => "regression",
        TaskArg::Classification => "classification",
        TaskArg::Ablation => "ablation",
        TaskArg::Sweep => "sweep",
        TaskArg::Complexity => "complexity",
    };
    let mut manifest = ManifestBuilder::new(&format!("eval --task {task_name}"));

    let need_model = || -> Result<PathBuf, Error> {
        args.model
            .clone()
            .ok_or_else(|| Error::Input("this task needs --model".into()))
    };
    let need_config = || -> Result<TrainConfig, Error> {
        let path = args
            .config
            .as_ref()
            .ok_or_else(|| Error::Input("this task needs --config".into()))?;
        TrainConfig::from_json_file(path)
    };
    if let Some(path) = &args.config {
        manifest.with_config(path)?;
    }

    match args.task {
        TaskArg::Regression => {
            let model = load_model(&need_model()?)?;
            manifest.seed = Some(model.config.seed);
            let embeddings = export_embeddings(&model, &dataset)?;
            let report = regression_probe(&embeddings, &dataset.labels, 5, model.config.seed)?;
            write_owned(
                &mut manifest,
                &args.out.join("regression.csv"),
                &regression_report_csv(&report),
            )?;
            write_owned(
                &mut manifest,
                &args.out.join("regression.json"),
                &serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::parse("report", e.to_string()))?,
            )?;
            println!(
                "regression r2 mean {:.4} (+/- {:.4})",
                report.r2_mean, report.r2_std
            );
        }
        TaskArg::Classification => {
            let model = load_model(&need_model()?)?;
            manifest.seed = Some(model.config.seed);
            let embeddings = export_embeddings(&model, &dataset)?;
            let report = classification_probe(&embeddings, &dataset.classes, 5, model.config.seed)?;
            write_owned(
                &mut manifest,
                &args.out.join("classification.csv"),
                &classification_report_csv(&report),
            )?;
            write_owned(
                &mut manifest,
                &args.out.join("classification.json"),
                &serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::parse("report", e.to_string()))?,
            )?;
            println!(
                "classification cosine mean {:.4} (+/- {:.4})",
                report.cosine_mean, report.cosine_std
            );
        }
        TaskArg::Ablation => {
            let config = need_config()?;
            manifest.seed = Some(config.seed);
            let seeds = parse_seeds(args.seeds.as_deref(), config.seed)?;
            let table = run_ablation(&dataset, &config, &seeds)?;
            write_owned(
                &mut manifest,
                &args.out.join("ablation.csv"),
                &ablation_csv(&table),
            )?;
            write_owned(
                &mut manifest,
                &args.out.join("ablation.json"),
                &serde_json::to_string_pretty(&table)
                    .map_err(|e| Error::parse("report", e.to_string()))?,
            )?;
            for row in &table.rows {
                println!(
                    "{}: r2 {:.4} cosine {:.4}",
                    row.variant, row.regression_r2_mean, row.classification_cosine_mean
                );
            }
        }
        TaskArg::Sweep => {
            let config = need_config()?;
            manifest.seed = Some(config.seed);
            let seeds = parse_seeds(args.seeds.as_deref(), config.seed)?;
            let subset_text = args
                .subsets
                .as_ref()
                .ok_or_else(|| Error::Input("sweep needs --subsets".into()))?;
            let subsets = parse_subsets(subset_text)?;
            let table = modality_sweep(&dataset, &config, &subsets, &seeds)?;
            for warning in &table.warnings {
                eprintln!("warning: {warning}");
            }
            write_owned(
                &mut manifest,
                &args.out.join("sweep.csv"),
                &sweep_csv(&table),
            )?;
            write_owned(
                &mut manifest,
                &args.out.join("sweep.json"),
                &serde_json::to_string_pretty(&table)
                    .map_err(|e| Error::parse("report", e.to_string()))?,
            )?;
            for row in &table.rows {
                println!("{}: r2 {:.4}", row.subset, row.regression_r2_mean);
            }
        }
        TaskArg::Complexity => {
            let config = need_config()?;
            let encoder_specs: Vec<_> = dataset
                .modalities
                .iter()
                .map(|m| {
                    let mut dims = vec![m.cols()];
                    dims.extend_from_slice(&config.encoder_hidden);
                    dims.push(config.embed_dim);
                    mvfactor::numerics::MlpSpec::uniform(dims, config.encoder_activation)
                })
                .collect::<Result<_, _>>()?;
            let base = complexity_report(
                Scheme::Pairwise,
                config.embed_dim,
                &encoder_specs,
                config.critic_hidden,
                1,
            )?;
            let other = complexity_report(
                Scheme::Factorized,
                config.embed_dim,
                &encoder_specs,
                config.critic_hidden,
                1,
            )?;
            let increase = percent_increase(&base, &other)?;
            write_owned(
                &mut manifest,
                &args.out.join("complexity.csv"),
                &complexity_csv(&[base.clone(), other.clone()], Some(&increase)),
            )?;
            #[derive(Serialize)]
            struct Summary<'a> {
                pairwise: &'a mvfactor::eval::ComplexityReport,
                factorized: &'a mvfactor::eval::ComplexityReport,
                percent_increase: &'a mvfactor::eval::PercentIncrease,
            }
            write_owned(
                &mut manifest,
                &args.out.join("complexity.json"),
                &serde_json::to_string_pretty(&Summary {
                    pairwise: &base,
                    factorized: &other,
                    percent_increase: &increase,
                })
                .map_err(|e| Error::parse("report", e.to_string()))?,
            )?;
            println!(
                "params: pairwise {} factorized {} (+{:.2}%)",
                base.total_params, other.total_params, increase.params
            );
        }
    }
    manifest.write(&args.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool, Error> = match &cli.command {
        Command::Gen(args) => cmd_gen(args).map(|()| true),
        Command::Train(args) => cmd_train(args).map(|()| true),
        Command::Enumerate(args) => cmd_enumerate(args).map(|()| true),
        Command::Verify(args) => cmd_verify(args),
        Command::Eval(args) => cmd_eval(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
