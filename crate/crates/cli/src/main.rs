//! `pinn` — command-line front end for the `pinn-core` training engine.
//!
//! Four subcommands cover the full workflow:
//!
//! * `verify`   — recompute every built-in reference value and report
//!   PASS/FAIL per entry.  Hermetic: touches no files unless `--json PATH`
//!   is given.
//! * `train`    — run a seeded training job and write `checkpoint.json`,
//!   `history.csv`, and `metrics.json` into the output directory.
//! * `validate` — score a checkpoint against the exact solution, print the
//!   error metrics and a five-point prediction table, and (by default) gate
//!   on the relative L2 error.
//! * `export`   — re-derive `plotdata.csv` and/or `metrics.json` from an
//!   existing checkpoint without retraining.
//!
//! Exit codes: 0 success; 1 verification failure, threshold breach, or
//! divergence; 2 usage error (bad flags or config values); 3 I/O or parse
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pinn_core::io::{
    read_checkpoint, write_checkpoint, write_history, write_metrics, write_plotdata, RunArtifacts,
};
use pinn_core::train::{train, EngineKind, LossHistory, Optimizer, TrainConfig};
use pinn_core::validate::{validate, Metrics};
use pinn_core::verify::{build_report, VerifyReport};
use pinn_core::Error;

/// The problem is posed on t ∈ [0, 1]; checkpoints do not carry the domain,
/// so `validate` and `export` always score on this interval.
const DOMAIN: [f64; 2] = [0.0, 1.0];

#[derive(Parser)]
#[command(
    name = "pinn",
    version,
    about = "Train, verify, and score a small physics-informed network for y' + y = 0, y(0) = 1"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the built-in reference tables and report PASS/FAIL per value
    Verify(VerifyArgs),
    /// Train a network and write run artifacts
    Train(TrainArgs),
    /// Score a checkpoint against the exact solution
    Validate(ValidateArgs),
    /// Re-derive plot data and/or metrics from a checkpoint
    Export(ExportArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Print only the gradient section (the exit code still reflects all checks)
    #[arg(long)]
    gradients: bool,

    /// Emit the report as JSON: to stdout with no value, or to PATH
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    json: Option<Option<PathBuf>>,
}

#[derive(Args)]
struct TrainArgs {
    /// Seed for parameter initialization
    #[arg(long)]
    seed: Option<u64>,

    /// Number of training epochs
    #[arg(long)]
    epochs: Option<usize>,

    /// Number of collocation points (endpoints included)
    #[arg(long)]
    nc: Option<usize>,

    /// Weight on the initial-condition loss term
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,

    /// Learning rate for the selected optimizer
    #[arg(long, allow_negative_numbers = true)]
    lr: Option<f64>,

    /// Optimizer: "gd" or "adam"
    #[arg(long)]
    optimizer: Option<String>,

    /// Gradient engine: "sensitivity", "adjoint", or "findiff"
    #[arg(long)]
    engine: Option<String>,

    /// Comma-separated layer widths, e.g. 1,3,3,1
    #[arg(long, value_delimiter = ',')]
    arch: Option<Vec<usize>>,

    /// Record every k-th epoch in the loss history
    #[arg(long)]
    history_stride: Option<usize>,

    /// TOML file with the same keys as the flags; flags take precedence
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for checkpoint.json, history.csv, and metrics.json
    #[arg(long, default_value = "run")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Path to a checkpoint.json
    #[arg(long)]
    checkpoint: PathBuf,

    /// Evaluation grid size
    #[arg(long, default_value_t = 500)]
    n_eval: usize,

    /// Where to write metrics.json and plotdata.csv (default: alongside the checkpoint)
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Exit nonzero if the relative L2 error exceeds this bound
    #[arg(long, default_value_t = 1e-3, conflicts_with = "no_threshold")]
    threshold: f64,

    /// Report metrics without gating on them
    #[arg(long)]
    no_threshold: bool,
}

#[derive(Args)]
struct ExportArgs {
    /// Path to a checkpoint.json
    #[arg(long)]
    checkpoint: PathBuf,

    /// Write the prediction-versus-solution CSV here
    #[arg(long, value_name = "PATH")]
    plotdata: Option<PathBuf>,

    /// Write the metrics JSON here
    #[arg(long, value_name = "PATH")]
    metrics: Option<PathBuf>,

    /// Evaluation grid size
    #[arg(long, default_value_t = 500)]
    n_eval: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(args) => cmd_verify(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Export(args) => cmd_export(&args),
    };
    ExitCode::from(code)
}

/// Map a core error onto the documented exit codes.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) => 2,
        Error::Diverged { .. } | Error::NonFinite { .. } => 1,
        Error::Shape { .. }
        | Error::FormatVersion { .. }
        | Error::Malformed { .. }
        | Error::Io { .. }
        | Error::Json(_) => 3,
    }
}

/// Print a core error to stderr and return its exit code.
fn fail(err: &Error) -> u8 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(args: &VerifyArgs) -> u8 {
    let report = build_report();

    match &args.json {
        // `--json` with no path: machine-readable output only.
        Some(None) => match serde_json::to_string_pretty(&report) {
            Ok(text) => println!("{text}"),
            Err(err) => return fail(&Error::Json(err)),
        },
        // `--json PATH`: write the report and keep the human-readable output.
        Some(Some(path)) => {
            let text = match serde_json::to_string_pretty(&report) {
                Ok(text) => text,
                Err(err) => return fail(&Error::Json(err)),
            };
            if let Err(err) = std::fs::write(path, text + "\n") {
                return fail(&Error::io(path, err));
            }
            print_report(&report, args.gradients);
            println!("wrote {}", path.display());
        }
        None => print_report(&report, args.gradients),
    }

    if report.all_pass() {
        0
    } else {
        1
    }
}

/// Print the report section by section; with `gradients_only`, restrict the
/// listing to the gradient table.
fn print_report(report: &VerifyReport, gradients_only: bool) {
    for section in &report.sections {
        if gradients_only && section.title != "gradients" {
            continue;
        }
        println!("{}:", section.title);
        for check in &section.checks {
            let verdict = if check.passes() { "PASS" } else { "FAIL" };
            println!(
                "  {} = {:.4} (recomputed {:.6}) ... {}",
                check.name, check.expected, check.actual, verdict
            );
        }
        println!();
    }
    let total = report.len();
    let passed = total - report.failures().len();
    println!("{passed}/{total} checks passed");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

/// Optional overrides read from a `--config` TOML file.  Every key mirrors a
/// command-line flag; unknown keys are rejected.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    epochs: Option<usize>,
    nc: Option<usize>,
    lambda: Option<f64>,
    lr: Option<f64>,
    optimizer: Option<String>,
    engine: Option<String>,
    arch: Option<Vec<usize>>,
    history_stride: Option<usize>,
}

/// Layer built-in defaults, then the config file, then the flags, and
/// validate the result.
fn resolve_config(file: &FileConfig, args: &TrainArgs) -> Result<TrainConfig, Error> {
    let defaults = TrainConfig::default();

    let optimizer_name = args
        .optimizer
        .clone()
        .or_else(|| file.optimizer.clone())
        .unwrap_or_else(|| defaults.optimizer.name().to_string());
    let lr = args.lr.or(file.lr).unwrap_or_else(|| defaults.optimizer.eta());
    let optimizer = Optimizer::from_name(&optimizer_name, lr)?;

    let engine = match args.engine.clone().or_else(|| file.engine.clone()) {
        Some(name) => EngineKind::from_name(&name)?,
        None => defaults.engine,
    };

    let cfg = TrainConfig {
        arch: args.arch.clone().or_else(|| file.arch.clone()).unwrap_or(defaults.arch),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
        n_collocation: args.nc.or(file.nc).unwrap_or(defaults.n_collocation),
        domain: defaults.domain,
        lambda: args.lambda.or(file.lambda).unwrap_or(defaults.lambda),
        epochs: args.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        optimizer,
        engine,
        history_stride: args
            .history_stride
            .or(file.history_stride)
            .unwrap_or(defaults.history_stride),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_file_config(path: &Path) -> Result<FileConfig, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", path.display());
            return Err(3);
        }
    };
    toml::from_str(&text).map_err(|err| {
        eprintln!("error: cannot parse {}: {err}", path.display());
        3
    })
}

fn cmd_train(args: &TrainArgs) -> u8 {
    let file_cfg = match &args.config {
        Some(path) => match load_file_config(path) {
            Ok(cfg) => cfg,
            Err(code) => return code,
        },
        None => FileConfig::default(),
    };
    let cfg = match resolve_config(&file_cfg, args) {
        Ok(cfg) => cfg,
        Err(err) => return fail(&err),
    };

    println!(
        "training: arch {:?}, seed {}, {} epochs, nc = {}, lambda = {}, optimizer = {} (lr = {}), engine = {}",
        cfg.arch,
        cfg.seed,
        cfg.epochs,
        cfg.n_collocation,
        cfg.lambda,
        cfg.optimizer.name(),
        cfg.optimizer.eta(),
        cfg.engine.name(),
    );

    let (params, history) = match train(&cfg) {
        Ok(result) => result,
        Err(err) => return fail(&err),
    };
    print_loss_table(&history, cfg.epochs);

    let metrics = match validate(&params, 500, cfg.domain) {
        Ok(metrics) => metrics,
        Err(err) => return fail(&err),
    };

    if let Err(err) = std::fs::create_dir_all(&args.out_dir) {
        return fail(&Error::io(&args.out_dir, err));
    }
    let artifacts = RunArtifacts::in_dir(&args.out_dir);
    if let Err(err) = write_checkpoint(&params, Some(cfg.seed), &artifacts.checkpoint_path) {
        return fail(&err);
    }
    if let Err(err) = write_history(&history, &artifacts.history_path) {
        return fail(&err);
    }
    if let Err(err) = write_metrics(&metrics, 500, cfg.domain, &artifacts.metrics_path) {
        return fail(&err);
    }

    println!();
    println!("relative L2 error on 500 points: {:.6e}", metrics.rel_l2);
    println!("wrote {}", artifacts.checkpoint_path.display());
    println!("wrote {}", artifacts.history_path.display());
    println!("wrote {}", artifacts.metrics_path.display());
    0
}

/// Print the recorded loss history at epoch 1, every 3000 epochs, and the
/// final epoch (skipping marks the stride did not record).
fn print_loss_table(history: &LossHistory, epochs: usize) {
    let mut markers: Vec<u64> = vec![1];
    let mut next = 3000u64;
    while (next as usize) < epochs {
        markers.push(next);
        next += 3000;
    }
    markers.push(epochs as u64);
    markers.dedup();

    println!("{:>8}  {:>13}  {:>13}  {:>13}", "epoch", "L_total", "L_R", "L_IC");
    for marker in markers {
        if let Some(i) = history.epochs.iter().position(|&epoch| epoch == marker) {
            println!(
                "{:>8}  {:>13.6e}  {:>13.6e}  {:>13.6e}",
                history.epochs[i], history.l_total[i], history.l_r[i], history.l_ic[i]
            );
        }
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: &ValidateArgs) -> u8 {
    let (params, _seed) = match read_checkpoint(&args.checkpoint) {
        Ok(loaded) => loaded,
        Err(err) => return fail(&err),
    };
    let metrics = match validate(&params, args.n_eval, DOMAIN) {
        Ok(metrics) => metrics,
        Err(err) => return fail(&err),
    };
    print_metrics_tables(&metrics);

    let out_dir = match &args.out_dir {
        Some(dir) => dir.clone(),
        None => args
            .checkpoint
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf(),
    };
    if let Err(err) = std::fs::create_dir_all(&out_dir) {
        return fail(&Error::io(&out_dir, err));
    }
    let artifacts = RunArtifacts::in_dir(&out_dir);
    if let Err(err) = write_metrics(&metrics, args.n_eval, DOMAIN, &artifacts.metrics_path) {
        return fail(&err);
    }
    if let Err(err) = write_plotdata(&params, args.n_eval, DOMAIN, &artifacts.plotdata_path) {
        return fail(&err);
    }
    println!();
    println!("wrote {}", artifacts.metrics_path.display());
    println!("wrote {}", artifacts.plotdata_path.display());

    if !args.no_threshold && metrics.rel_l2 > args.threshold {
        eprintln!(
            "relative L2 error {:.6e} exceeds threshold {:.6e}",
            metrics.rel_l2, args.threshold
        );
        return 1;
    }
    0
}

/// Print the error-metric table followed by the five-point prediction table.
fn print_metrics_tables(metrics: &Metrics) {
    println!("{:<22} {:>12.6e}", "MSE", metrics.mse);
    println!("{:<22} {:>12.6e}", "Relative L2 error", metrics.rel_l2);
    println!(
        "{:<22} {:>12.6e}  (at t = {:.4})",
        "Max abs error", metrics.max_abs_err, metrics.max_err_location
    );
    println!("{:<22} {:>12.6e}", "Mean abs error", metrics.mean_abs_err);
    println!("{:<22} {:>12.6e}", "Std of abs error", metrics.std_abs_err);
    println!();
    println!("{:>6}  {:>10}  {:>10}  {:>10}", "t", "y_hat", "y_exact", "abs_err");
    for row in &metrics.pointwise {
        println!(
            "{:>6.2}  {:>10.6}  {:>10.6}  {:>10.3e}",
            row.t, row.y_hat, row.y_exact, row.abs_err
        );
    }
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

fn cmd_export(args: &ExportArgs) -> u8 {
    if args.plotdata.is_none() && args.metrics.is_none() {
        eprintln!("error: nothing to export; pass --plotdata PATH and/or --metrics PATH");
        return 2;
    }
    let (params, _seed) = match read_checkpoint(&args.checkpoint) {
        Ok(loaded) => loaded,
        Err(err) => return fail(&err),
    };

    if let Some(path) = &args.plotdata {
        if let Err(err) = ensure_parent_dir(path) {
            return fail(&err);
        }
        if let Err(err) = write_plotdata(&params, args.n_eval, DOMAIN, path) {
            return fail(&err);
        }
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.metrics {
        let metrics = match validate(&params, args.n_eval, DOMAIN) {
            Ok(metrics) => metrics,
            Err(err) => return fail(&err),
        };
        if let Err(err) = ensure_parent_dir(path) {
            return fail(&err);
        }
        if let Err(err) = write_metrics(&metrics, args.n_eval, DOMAIN, path) {
            return fail(&err);
        }
        println!("wrote {}", path.display());
    }
    0
}

/// Create the parent directory of `path` if it has one.
fn ensure_parent_dir(path: &Path) -> Result<(), Error> {
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => {
            std::fs::create_dir_all(parent).map_err(|err| Error::io(parent, err))
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_flags() -> TrainArgs {
        TrainArgs {
            seed: None,
            epochs: None,
            nc: None,
            lambda: None,
            lr: None,
            optimizer: None,
            engine: None,
            arch: None,
            history_stride: None,
            config: None,
            out_dir: PathBuf::from("run"),
        }
    }

    #[test]
    fn resolve_config_uses_defaults_when_nothing_is_given() {
        let cfg = resolve_config(&FileConfig::default(), &no_flags()).unwrap();
        let defaults = TrainConfig::default();
        assert_eq!(cfg.arch, defaults.arch);
        assert_eq!(cfg.seed, defaults.seed);
        assert_eq!(cfg.n_collocation, defaults.n_collocation);
        assert_eq!(cfg.lambda, defaults.lambda);
        assert_eq!(cfg.epochs, defaults.epochs);
        assert_eq!(cfg.optimizer.name(), defaults.optimizer.name());
        assert_eq!(cfg.optimizer.eta(), defaults.optimizer.eta());
        assert_eq!(cfg.engine.name(), defaults.engine.name());
        assert_eq!(cfg.history_stride, defaults.history_stride);
    }

    #[test]
    fn resolve_config_lets_the_file_override_defaults() {
        let file: FileConfig = toml::from_str(
            "seed = 9\nepochs = 5\nnc = 12\nlambda = 2.5\noptimizer = \"gd\"\nlr = 0.01\nengine = \"sensitivity\"\n",
        )
        .unwrap();
        let cfg = resolve_config(&file, &no_flags()).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.epochs, 5);
        assert_eq!(cfg.n_collocation, 12);
        assert_eq!(cfg.lambda, 2.5);
        assert_eq!(cfg.optimizer.name(), "gd");
        assert_eq!(cfg.optimizer.eta(), 0.01);
        assert_eq!(cfg.engine.name(), "sensitivity");
    }

    #[test]
    fn resolve_config_lets_flags_override_the_file() {
        let file: FileConfig = toml::from_str("seed = 9\nepochs = 5\n").unwrap();
        let mut args = no_flags();
        args.epochs = Some(3);
        let cfg = resolve_config(&file, &args).unwrap();
        assert_eq!(cfg.epochs, 3, "flag beats file");
        assert_eq!(cfg.seed, 9, "file beats default");
    }

    #[test]
    fn resolve_config_combines_optimizer_name_and_lr_across_layers() {
        // Optimizer name from the file, learning rate from a flag.
        let file: FileConfig = toml::from_str("optimizer = \"gd\"\n").unwrap();
        let mut args = no_flags();
        args.lr = Some(0.5);
        let cfg = resolve_config(&file, &args).unwrap();
        assert_eq!(cfg.optimizer.name(), "gd");
        assert_eq!(cfg.optimizer.eta(), 0.5);
    }

    #[test]
    fn resolve_config_rejects_bad_values() {
        let mut args = no_flags();
        args.optimizer = Some("sgd".to_string());
        assert!(matches!(
            resolve_config(&FileConfig::default(), &args),
            Err(Error::InvalidArgument(_))
        ));

        let mut args = no_flags();
        args.lambda = Some(-1.0);
        assert!(matches!(
            resolve_config(&FileConfig::default(), &args),
            Err(Error::InvalidArgument(_))
        ));

        let mut args = no_flags();
        args.engine = Some("autodiff".to_string());
        assert!(matches!(
            resolve_config(&FileConfig::default(), &args),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        let parsed: Result<FileConfig, _> = toml::from_str("learning_rate = 0.1\n");
        assert!(parsed.is_err());
    }

    #[test]
    fn exit_codes_follow_the_documented_mapping() {
        assert_eq!(exit_code_for(&Error::InvalidArgument("x".into())), 2);
        assert_eq!(
            exit_code_for(&Error::Diverged {
                epoch: 3,
                value: f64::INFINITY
            }),
            1
        );
        assert_eq!(
            exit_code_for(&Error::Malformed {
                kind: "checkpoint",
                detail: "x".into()
            }),
            3
        );
        assert_eq!(
            exit_code_for(&Error::FormatVersion {
                found: 2,
                expected: 1
            }),
            3
        );
    }

    #[test]
    fn cli_definition_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
