//! Text formats for traces, sweeps and fitted models.

use std::fmt::Write as _;

use thiserror::Error;

use super::{AlphaSweepResult, NormMode, TraceRecord, TrainConfig, TrainingTrace};
use crate::Matrix;

pub const TRACE_HEADER: &str = "iteration,mean_loss,accuracy";
pub const SWEEP_HEADER: &str = "alpha,final_loss,iterations_to_threshold,status";
const MODEL_MAGIC: &str = "aaseq-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{format}: line {line}: {message}")]
pub struct FormatError {
    pub format: &'static str,
    pub line: usize,
    pub message: String,
}

fn err(format: &'static str, line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        format,
        line,
        message: message.into(),
    }
}

pub fn write_trace_csv(trace: &TrainingTrace) -> String {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(out, "{},{},{}", r.iteration, r.mean_loss, r.accuracy);
    }
    out
}

/// Parses a trace CSV, requiring the exact header and iterations numbered
/// 1, 2, … with no gaps. An empty trace is rejected.
pub fn read_trace_csv(text: &str) -> Result<TrainingTrace, FormatError> {
    const F: &str = "trace csv";
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(err(F, 0, "file is empty"));
    };
    if header.trim_end_matches('\r') != TRACE_HEADER {
        return Err(err(
            F,
            1,
            format!("expected header `{TRACE_HEADER}`, found `{header}`"),
        ));
    }
    let mut records = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(err(
                F,
                line,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        let iteration: usize = fields[0]
            .parse()
            .map_err(|_| err(F, line, format!("bad iteration {:?}", fields[0])))?;
        if iteration != records.len() + 1 {
            return Err(err(
                F,
                line,
                format!(
                    "iteration {iteration} out of sequence, expected {}",
                    records.len() + 1
                ),
            ));
        }
        let num = |s: &str| -> Result<f64, FormatError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(F, line, format!("bad number {s:?}")))
        };
        records.push(TraceRecord {
            iteration,
            mean_loss: num(fields[1])?,
            accuracy: num(fields[2])?,
        });
    }
    if records.is_empty() {
        return Err(err(F, 1, "no rows after header"));
    }
    Ok(TrainingTrace { records })
}

/// One row per α in ascending order; failed runs leave the numeric columns
/// empty.
pub fn write_sweep_csv(result: &AlphaSweepResult) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for e in &result.entries {
        let loss = e.final_loss.map(|v| v.to_string()).unwrap_or_default();
        let hit = e
            .iterations_to_threshold
            .map(|v| v.to_string())
            .unwrap_or_default();
        let status = if e.succeeded() { "ok" } else { "failed" };
        let _ = writeln!(out, "{},{loss},{hit},{status}", e.alpha);
    }
    out
}

/// Weights with the class list and training configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub weights: Matrix,
    pub classes: Vec<String>,
    pub config: TrainConfig,
}

/// Versioned text model:
///
/// ```text
/// aaseq-model 1
/// classes 2
/// features 3
/// alpha 0.5
/// iters 300
/// seed 13
/// norm softmax
/// epsilon 0.0000000001
/// step 1
/// class <name>        (one line per class, in row order)
/// weights
/// <row of W, space separated>
/// ```
pub fn write_model(model: &SavedModel) -> String {
    let c = &model.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}");
    let _ = writeln!(out, "classes {}", model.weights.rows());
    let _ = writeln!(out, "features {}", model.weights.cols());
    let _ = writeln!(out, "alpha {}", c.alpha);
    let _ = writeln!(out, "iters {}", c.iters);
    let _ = writeln!(out, "seed {}", c.seed);
    let _ = writeln!(out, "norm {}", c.norm);
    let _ = writeln!(out, "epsilon {}", c.epsilon);
    let _ = writeln!(out, "step {}", c.step);
    for name in &model.classes {
        let _ = writeln!(out, "class {name}");
    }
    out.push_str("weights\n");
    for row in model.weights.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_model(text: &str) -> Result<SavedModel, FormatError> {
    const F: &str = "model file";
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    let mut next = |what: &str| -> Result<(usize, &str), FormatError> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| err(F, 0, format!("unexpected end of file, expected {what}")))
    };
    let (line, magic) = next("header")?;
    if magic != format!("{MODEL_MAGIC} {MODEL_VERSION}") {
        return Err(err(F, line, format!("unsupported header {magic:?}")));
    }
    fn field<'a>(line: usize, text: &'a str, key: &str) -> Result<&'a str, FormatError> {
        text.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| err(F, line, format!("expected `{key} <value>`")))
    }
    fn parse<T: std::str::FromStr>(line: usize, v: &str, key: &str) -> Result<T, FormatError> {
        v.parse()
            .map_err(|_| err(F, line, format!("bad value for {key}: {v:?}")))
    }
    let mut get = |key: &str| -> Result<(usize, String), FormatError> {
        let (line, text) = next(key)?;
        Ok((line, field(line, text, key)?.to_string()))
    };
    let (l, v) = get("classes")?;
    let classes: usize = parse(l, &v, "classes")?;
    let (l, v) = get("features")?;
    let features: usize = parse(l, &v, "features")?;
    let (l, v) = get("alpha")?;
    let alpha = parse(l, &v, "alpha")?;
    let (l, v) = get("iters")?;
    let iters = parse(l, &v, "iters")?;
    let (l, v) = get("seed")?;
    let seed = parse(l, &v, "seed")?;
    let (l, v) = get("norm")?;
    let norm: NormMode = v.parse().map_err(|e: String| err(F, l, e))?;
    let (l, v) = get("epsilon")?;
    let epsilon = parse(l, &v, "epsilon")?;
    let (l, v) = get("step")?;
    let step = parse(l, &v, "step")?;
    let mut names = Vec::with_capacity(classes);
    for _ in 0..classes {
        let (_, name) = get("class")?;
        names.push(name);
    }
    let (l, marker) = next("weights")?;
    if marker != "weights" {
        return Err(err(F, l, "expected `weights`"));
    }
    let mut data = Vec::with_capacity(classes * features);
    for _ in 0..classes {
        let (l, row) = next("weight row")?;
        let before = data.len();
        for cell in row.split_ascii_whitespace() {
            data.push(parse::<f64>(l, cell, "weight")?);
        }
        if data.len() - before != features {
            return Err(err(
                F,
                l,
                format!("expected {features} weights, found {}", data.len() - before),
            ));
        }
    }
    Ok(SavedModel {
        weights: Matrix::from_row_major(classes, features, data).expect("row widths checked"),
        classes: names,
        config: TrainConfig {
            alpha,
            iters,
            seed,
            norm,
            epsilon,
            step,
        },
    })
}
