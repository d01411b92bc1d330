//! Run artifacts: checkpoint, loss history, metrics, and plot data.
//!
//! Four files describe a run completely:
//!
//! | file             | format | contents                                   |
//! |------------------|--------|--------------------------------------------|
//! | `checkpoint.json`| JSON   | architecture, activation, seed, parameters |
//! | `history.csv`    | CSV    | `epoch,l_total,l_r,l_ic` per recorded epoch|
//! | `metrics.json`   | JSON   | aggregate metrics + pointwise table        |
//! | `plotdata.csv`   | CSV    | `t,y_hat,y_exact,abs_err` per grid point   |
//!
//! Floats are written in the shortest form that round-trips double
//! precision (the native behavior of both the `Display` formatter and the
//! JSON serializer), so write → read → write is byte-stable and two writes
//! of the same data are byte-identical — the reproducibility checks diff
//! artifacts at the byte level and rely on this.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dual::forward_dual;
use crate::error::{Error, Result};
use crate::net::{ActivationKind, LayerParams, MlpParams};
use crate::train::{collocation_grid, LossHistory};
use crate::validate::{exact_solution, Metrics, PointwiseRow};

/// Revision of the checkpoint schema this build reads and writes.
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Standard file names of one run, rooted in an output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    pub checkpoint_path: PathBuf,
    pub history_path: PathBuf,
    pub metrics_path: PathBuf,
    pub plotdata_path: PathBuf,
}

impl RunArtifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            checkpoint_path: dir.join("checkpoint.json"),
            history_path: dir.join("history.csv"),
            metrics_path: dir.join("metrics.json"),
            plotdata_path: dir.join("plotdata.csv"),
        }
    }
}

/// On-disk schema of `checkpoint.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointFile {
    pub format_version: u32,
    /// Layer widths, input to output; redundant with the parameter shapes
    /// and cross-checked against them on read.
    pub arch: Vec<usize>,
    /// Activation name as accepted by the network module ("tanh", ...).
    pub activation: String,
    /// Seed the parameters were initialized from, when known. Restarting a
    /// run needs it; a hand-built network has none.
    pub seed: Option<u64>,
    pub layers: Vec<LayerParams>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Serializes parameters (and the seed that produced them, if any) to
/// pretty-printed JSON.
pub fn write_checkpoint(params: &MlpParams, seed: Option<u64>, path: &Path) -> Result<()> {
    let file = CheckpointFile {
        format_version: CHECKPOINT_FORMAT_VERSION,
        arch: params.arch(),
        activation: params.activation.name().to_string(),
        seed,
        layers: params.layers.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    write_text(path, &text)
}

/// Reads a checkpoint back, validating the format revision, the activation
/// name, the declared architecture against the actual parameter shapes, and
/// (through the network constructor) finiteness of every value.
pub fn read_checkpoint(path: &Path) -> Result<(MlpParams, Option<u64>)> {
    let text = read_text(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Malformed {
            kind: "checkpoint",
            detail: "missing or non-integer format_version".to_string(),
        })?;
    if found != u64::from(CHECKPOINT_FORMAT_VERSION) {
        return Err(Error::FormatVersion {
            found: found.try_into().unwrap_or(u32::MAX),
            expected: CHECKPOINT_FORMAT_VERSION,
        });
    }
    let file: CheckpointFile = serde_json::from_value(value)?;

    let activation = ActivationKind::from_name(&file.activation).map_err(|_| Error::Malformed {
        kind: "checkpoint",
        detail: format!("unknown activation {:?}", file.activation),
    })?;
    if file.arch.len() != file.layers.len() + 1 {
        return Err(Error::Malformed {
            kind: "checkpoint",
            detail: format!(
                "arch lists {} widths but {} layers are stored",
                file.arch.len(),
                file.layers.len()
            ),
        });
    }
    for (l, layer) in file.layers.iter().enumerate() {
        if layer.n_in() != file.arch[l] || layer.n_out() != file.arch[l + 1] {
            return Err(Error::Shape {
                layer: l,
                detail: format!(
                    "stored shape {}x{} contradicts declared arch {:?}",
                    layer.n_out(),
                    layer.n_in(),
                    file.arch
                ),
            });
        }
    }
    let params = MlpParams::new(activation, file.layers)?;
    Ok((params, file.seed))
}

const HISTORY_HEADER: &str = "epoch,l_total,l_r,l_ic";

/// Writes the loss curve as CSV, one row per recorded epoch.
pub fn write_history(history: &LossHistory, path: &Path) -> Result<()> {
    if history.is_empty() {
        return Err(Error::InvalidArgument(
            "refusing to write an empty loss history".into(),
        ));
    }
    let mut text = String::from(HISTORY_HEADER);
    text.push('\n');
    for i in 0..history.len() {
        text.push_str(&format!(
            "{},{},{},{}\n",
            history.epochs[i], history.l_total[i], history.l_r[i], history.l_ic[i]
        ));
    }
    write_text(path, &text)
}

fn split_csv_row<const N: usize>(
    kind: &'static str,
    line_no: usize,
    line: &str,
) -> Result<[f64; N]> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != N {
        return Err(Error::Malformed {
            kind,
            detail: format!("line {line_no}: expected {N} columns, found {}", fields.len()),
        });
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(&fields) {
        *slot = field.trim().parse::<f64>().map_err(|_| Error::Malformed {
            kind,
            detail: format!("line {line_no}: {field:?} is not a number"),
        })?;
    }
    Ok(out)
}

/// Parses a `history.csv` back into a [`LossHistory`].
pub fn read_history(path: &Path) -> Result<LossHistory> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == HISTORY_HEADER => {}
        other => {
            return Err(Error::Malformed {
                kind: "history",
                detail: format!("expected header {HISTORY_HEADER:?}, found {other:?}"),
            })
        }
    }
    let mut history = LossHistory::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 2; // 1-based, after the header
        let [epoch, l_total, l_r, l_ic] = split_csv_row::<4>("history", line_no, line)?;
        if epoch < 0.0 || epoch.fract() != 0.0 {
            return Err(Error::Malformed {
                kind: "history",
                detail: format!("line {line_no}: epoch {epoch} is not a non-negative integer"),
            });
        }
        history.epochs.push(epoch as u64);
        history.l_total.push(l_total);
        history.l_r.push(l_r);
        history.l_ic.push(l_ic);
    }
    if history.is_empty() {
        return Err(Error::Malformed {
            kind: "history",
            detail: "no data rows".to_string(),
        });
    }
    Ok(history)
}

/// On-disk schema of `metrics.json`: the metrics plus enough context to
/// recompute them (grid size, domain) and the code revision that wrote them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsFile {
    pub code_version: String,
    pub n_eval: usize,
    pub domain: [f64; 2],
    pub metrics: Metrics,
}

/// Writes metrics with their evaluation context as pretty-printed JSON.
pub fn write_metrics(metrics: &Metrics, n_eval: usize, domain: [f64; 2], path: &Path) -> Result<()> {
    let file = MetricsFile {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        n_eval,
        domain,
        metrics: metrics.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_metrics(path: &Path) -> Result<MetricsFile> {
    let text = read_text(path)?;
    Ok(serde_json::from_str(&text)?)
}

const PLOTDATA_HEADER: &str = "t,y_hat,y_exact,abs_err";

/// Evaluates the network on an `n_eval`-point uniform grid over `domain`
/// and writes the prediction-versus-solution table as CSV — the raw
/// material for plots, and for recomputing every aggregate metric.
pub fn write_plotdata(params: &MlpParams, n_eval: usize, domain: [f64; 2], path: &Path) -> Result<()> {
    if n_eval < 2 {
        return Err(Error::InvalidArgument(format!(
            "plot data needs at least 2 evaluation points, got {n_eval}"
        )));
    }
    let grid = collocation_grid(n_eval, domain)?;
    let mut text = String::from(PLOTDATA_HEADER);
    text.push('\n');
    for &t in &grid {
        let y_hat = forward_dual(params, t).y_hat;
        if !y_hat.is_finite() {
            return Err(Error::NonFinite {
                context: format!("prediction at t = {t}"),
            });
        }
        let y_exact = exact_solution(t);
        let abs_err = (y_hat - y_exact).abs();
        text.push_str(&format!("{t},{y_hat},{y_exact},{abs_err}\n"));
    }
    write_text(path, &text)
}

/// Parses a `plotdata.csv` back into rows.
pub fn read_plotdata(path: &Path) -> Result<Vec<PointwiseRow>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == PLOTDATA_HEADER => {}
        other => {
            return Err(Error::Malformed {
                kind: "plot data",
                detail: format!("expected header {PLOTDATA_HEADER:?}, found {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let [t, y_hat, y_exact, abs_err] = split_csv_row::<4>("plot data", i + 2, line)?;
        rows.push(PointwiseRow {
            t,
            y_hat,
            y_exact,
            abs_err,
        });
    }
    if rows.is_empty() {
        return Err(Error::Malformed {
            kind: "plot data",
            detail: "no data rows".to_string(),
        });
    }
    Ok(rows)
}
