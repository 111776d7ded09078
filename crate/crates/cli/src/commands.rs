use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use aaseq_core::embed::{embed_dataset, FeatureMatrix, Method, PcaPolicy, SpectrumConfig};
use aaseq_core::seq_io::{
    attach_labels, parse_fasta, synth_dataset, Alphabet, LabelTable, SynthParams,
};
use aaseq_core::trainer::{
    self, alpha_sweep, read_trace_csv, write_model, write_sweep_csv, write_trace_csv, NormMode,
    SavedModel, TrainConfig, TrainError,
};
use aaseq_core::Matrix;
use anyhow::{anyhow, bail, Context, Result};

use crate::config::{sha256_hex, write_atomic, Manifest, Resolver};
use crate::svg::{self, Series, SeriesRole};
use crate::{EmbedArgs, NumericalFailure, ReportArgs, SweepArgs, SynthArgs, TrainArgs};

const FASTA_WIDTH: usize = 60;

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Reads an input file and returns its text and sha256 digest.
fn read_input(op: &str, what: &str, path: &Path) -> Result<(String, String)> {
    let bytes = fs::read(path)
        .with_context(|| format!("{op}: cannot read {what} file {}", path.display()))?;
    let digest = sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| anyhow!("{op}: {what} file {} is not UTF-8", path.display()))?;
    Ok((text, digest))
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let mut r = Resolver::new("synth", a.config.as_deref())?;
    let params = SynthParams {
        num_classes: r.or("classes", a.classes, 3)?,
        per_class: r.or("per-class", a.per_class, 100)?,
        length: r.or("length", a.length, 60)?,
        motif_len: r.or("motif-len", a.motif_len, 6)?,
        noise: r.or("noise", a.noise, 0.05)?,
        seed: r.or("seed", a.seed, 0)?,
    };
    let alphabet_spec: String = r.or("alphabet", a.alphabet, "amino".into())?;
    let fasta_out: PathBuf = r.required("fasta-out", a.fasta_out)?;
    let labels_out: PathBuf = r.required("labels-out", a.labels_out)?;
    r.finish()?;

    let alphabet = Alphabet::from_spec(&alphabet_spec)?;
    let s = synth_dataset(&params, &alphabet)?;
    write_atomic(&fasta_out, s.dataset.to_fasta(FASTA_WIDTH).as_bytes())?;
    write_atomic(&labels_out, s.dataset.to_labels_tsv().as_bytes())?;

    let mut m = Manifest::new("synth");
    m.push("classes", params.num_classes);
    m.push("per-class", params.per_class);
    m.push("length", params.length);
    m.push("motif-len", params.motif_len);
    m.push("noise", params.noise);
    m.push("seed", params.seed);
    m.push("alphabet", &alphabet_spec);
    m.path("fasta-out", &fasta_out);
    m.path("labels-out", &labels_out);
    m.push("result.sequences", s.dataset.len());
    m.push("result.classes", s.dataset.num_classes());
    m.write_next_to(&fasta_out)?;
    Ok(())
}

fn parse_method(
    name: &str,
    k: Option<usize>,
    m: Option<usize>,
    g: Option<usize>,
) -> Result<Method> {
    let stray = |flag: &str| anyhow!("embed: --{flag} does not apply to method {name}");
    let method = match name {
        "spike2vec" | "kmer" => {
            if m.is_some() {
                return Err(stray("m"));
            }
            if g.is_some() {
                return Err(stray("g"));
            }
            Method::KmerSpectrum { k: k.unwrap_or(3) }
        }
        "minimizer" => {
            if g.is_some() {
                return Err(stray("g"));
            }
            Method::Minimizer {
                k: k.unwrap_or(9),
                m: m.unwrap_or(3),
            }
        }
        "spaced" => {
            if m.is_some() {
                return Err(stray("m"));
            }
            Method::Spaced {
                k: k.unwrap_or(4),
                g: g.unwrap_or(9),
            }
        }
        other => bail!("embed: unknown method {other:?} (expected spike2vec, minimizer or spaced)"),
    };
    Ok(method)
}

pub fn embed(a: EmbedArgs) -> Result<()> {
    let mut r = Resolver::new("embed", a.config.as_deref())?;
    let fasta: PathBuf = r.required("fasta", a.fasta)?;
    let labels: PathBuf = r.required("labels", a.labels)?;
    let method_name: String = r.or("method", a.method, "spike2vec".into())?;
    let k = r.opt("k", a.k)?;
    let mm = r.opt("m", a.m)?;
    let g = r.opt("g", a.g)?;
    let alphabet_spec: String = r.or("alphabet", a.alphabet, "amino".into())?;
    let policy = PcaPolicy {
        threshold: r.or("pca-threshold", a.pca_threshold, 1000)?,
        components: r.or("pca-components", a.pca_components, 500)?,
    };
    let out: PathBuf = r.required("out", a.out)?;
    let labels_out = r
        .opt("labels-out", a.labels_out)?
        .unwrap_or_else(|| with_suffix(&out, ".labels.tsv"));
    r.finish()?;

    if policy.components == 0 {
        bail!("embed: --pca-components must be at least 1");
    }
    let method = parse_method(&method_name, k, mm, g)?;
    let alphabet = Alphabet::from_spec(&alphabet_spec)?;
    let cfg = SpectrumConfig::new(method, alphabet.clone())?;

    let (fasta_text, fasta_digest) = read_input("parse_fasta", "FASTA", &fasta)?;
    r.check_digest("fasta", &fasta_digest);
    let (label_text, label_digest) = read_input("attach_labels", "labels", &labels)?;
    r.check_digest("labels", &label_digest);

    let records = parse_fasta(&fasta_text, &alphabet)?;
    let table = LabelTable::parse(&label_text)?;
    let attached = attach_labels(records, &table)?;
    if !attached.dropped.is_empty() {
        eprintln!(
            "warning: attach_labels: {} record(s) without a label were dropped (first: {})",
            attached.dropped.len(),
            attached.dropped[0]
        );
    }
    let ds = attached.dataset;
    let embedding = embed_dataset(&ds, &cfg, &policy)?;

    let mut csv = Vec::new();
    embedding.features.write_csv(&mut csv)?;
    write_atomic(&out, &csv)?;
    write_atomic(&labels_out, ds.to_labels_tsv().as_bytes())?;

    let mut m = Manifest::new("embed");
    m.path("fasta", &fasta);
    m.path("labels", &labels);
    m.push("method", method.name());
    match method {
        Method::KmerSpectrum { k } => m.push("k", k),
        Method::Minimizer { k, m: mer } => {
            m.push("k", k);
            m.push("m", mer);
        }
        Method::Spaced { k, g } => {
            m.push("k", k);
            m.push("g", g);
        }
    }
    m.push("alphabet", &alphabet_spec);
    m.push("pca-threshold", policy.threshold);
    m.push("pca-components", policy.components);
    m.path("out", &out);
    m.path("labels-out", &labels_out);
    m.push("input.fasta.sha256", fasta_digest);
    m.push("input.labels.sha256", label_digest);
    m.push("result.rows", embedding.features.rows());
    m.push("result.cols", embedding.features.cols());
    m.push("result.spectrum_width", cfg.width());
    m.push(
        "result.pca",
        if embedding.pca.is_some() {
            "applied"
        } else {
            "skipped"
        },
    );
    m.push("result.dropped", attached.dropped.len());
    m.write_next_to(&out)?;
    Ok(())
}

/// Feature matrix plus one-hot targets aligned to its rows.
struct TrainingData {
    x: Matrix,
    y: Matrix,
    classes: Vec<String>,
    matrix_digest: String,
    labels_digest: String,
}

fn load_training(op: &str, r: &Resolver, matrix: &Path, labels: &Path) -> Result<TrainingData> {
    let (matrix_text, matrix_digest) = read_input(op, "matrix", matrix)?;
    r.check_digest("matrix", &matrix_digest);
    let (label_text, labels_digest) = read_input(op, "labels", labels)?;
    r.check_digest("labels", &labels_digest);
    let fm = FeatureMatrix::read_csv(matrix_text.as_bytes())
        .with_context(|| format!("{op}: matrix {}", matrix.display()))?;
    let table = LabelTable::parse(&label_text)?;
    let mut row_labels = Vec::with_capacity(fm.rows());
    for id in &fm.row_ids {
        let l = table.get(id).ok_or_else(|| {
            anyhow!(
                "{op}: matrix row {id:?} has no label in {}",
                labels.display()
            )
        })?;
        row_labels.push(l.to_string());
    }
    let classes: Vec<String> = row_labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut y = Matrix::zeros(fm.rows(), classes.len());
    for (i, l) in row_labels.iter().enumerate() {
        let c = classes
            .binary_search(l)
            .expect("class list built from labels");
        y[(i, c)] = 1.0;
    }
    Ok(TrainingData {
        x: fm.values,
        y,
        classes,
        matrix_digest,
        labels_digest,
    })
}

fn parse_norm(s: &str) -> Result<NormMode> {
    s.parse().map_err(|e: String| anyhow!("train: {e}"))
}

pub fn train(a: TrainArgs) -> Result<()> {
    let mut r = Resolver::new("train", a.config.as_deref())?;
    let matrix: PathBuf = r.required("matrix", a.matrix)?;
    let labels: PathBuf = r.required("labels", a.labels)?;
    let norm_name: String = r.or("norm", a.norm, "softmax".into())?;
    let cfg = TrainConfig {
        alpha: r.or("alpha", a.alpha, 0.0)?,
        iters: r.or("iters", a.iters, 700)?,
        seed: r.or("seed", a.seed, 0)?,
        norm: parse_norm(&norm_name)?,
        epsilon: r.or("epsilon", a.epsilon, 1e-10)?,
        step: r.or("step", a.step, 1.0)?,
    };
    let trace_out: PathBuf = r.required("trace-out", a.trace_out)?;
    let model_out = r
        .opt("model-out", a.model_out)?
        .unwrap_or_else(|| with_suffix(&trace_out, ".model"));
    r.finish()?;
    cfg.validate()?;

    let data = load_training("train", &r, &matrix, &labels)?;

    let mut m = Manifest::new("train");
    m.path("matrix", &matrix);
    m.path("labels", &labels);
    m.push("alpha", cfg.alpha);
    m.push("iters", cfg.iters);
    m.push("seed", cfg.seed);
    m.push("norm", cfg.norm);
    m.push("step", cfg.step);
    m.push("epsilon", cfg.epsilon);
    m.path("trace-out", &trace_out);
    m.path("model-out", &model_out);
    m.push("input.matrix.sha256", &data.matrix_digest);
    m.push("input.labels.sha256", &data.labels_digest);

    match trainer::train(&data.x, &data.y, &cfg) {
        Ok(run) => {
            write_atomic(&trace_out, write_trace_csv(&run.trace).as_bytes())?;
            let model = SavedModel {
                weights: run.state.weights,
                classes: data.classes,
                config: cfg,
            };
            write_atomic(&model_out, write_model(&model).as_bytes())?;
            m.push("result.status", "ok");
            m.push("result.partial", false);
            m.push("result.iterations", run.trace.len());
            m.push("result.anderson_steps", run.anderson_steps);
            m.push("result.degenerate_samples", run.degenerate_samples);
            if let Some(l) = run.trace.final_loss() {
                m.push("result.final_loss", l);
            }
            m.write_next_to(&trace_out)?;
            Ok(())
        }
        Err(TrainError::NonFiniteWeights { iteration, partial }) => {
            write_atomic(&trace_out, write_trace_csv(&partial).as_bytes())?;
            m.push("result.status", "diverged");
            m.push("result.partial", true);
            m.push("result.iterations", partial.len());
            m.push("result.diverged_at", iteration);
            m.write_next_to(&trace_out)?;
            Err(
                anyhow::Error::new(TrainError::NonFiniteWeights { iteration, partial })
                    .context(format!("partial trace written to {}", trace_out.display())),
            )
        }
        Err(e) => Err(e.into()),
    }
}

/// Parses `start:stop:step` (inclusive, values rounded to 12 decimals) or a
/// comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let round = |v: f64| (v * 1e12).round() / 1e12;
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| anyhow!("alpha_sweep: bad grid value {t:?}"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                bail!("alpha_sweep: grid {s:?} needs start <= stop and a positive step");
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| round(start + i as f64 * step)).collect()
        }
        [_] => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| num(t).map(round))
            .collect::<Result<Vec<_>>>()?,
        _ => bail!("alpha_sweep: grid {s:?} is neither start:stop:step nor a comma list"),
    };
    if grid.is_empty() {
        bail!("alpha_sweep: grid is empty");
    }
    Ok(grid)
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let mut r = Resolver::new("sweep", a.config.as_deref())?;
    let matrix: PathBuf = r.required("matrix", a.matrix)?;
    let labels: PathBuf = r.required("labels", a.labels)?;
    let grid_spec: String = r.or("grid", a.grid, "0:1:0.1".into())?;
    let threshold_spec: String = r.or("threshold", a.threshold, "auto".into())?;
    let norm_name: String = r.or("norm", a.norm, "softmax".into())?;
    let base = TrainConfig {
        alpha: 0.0,
        iters: r.or("iters", a.iters, 300)?,
        seed: r.or("seed", a.seed, 0)?,
        norm: parse_norm(&norm_name)?,
        epsilon: r.or("epsilon", a.epsilon, 1e-10)?,
        step: r.or("step", a.step, 1.0)?,
    };
    let out_dir: PathBuf = r.required("out-dir", a.out_dir)?;
    r.finish()?;

    let grid = parse_grid(&grid_spec)?;
    let fixed_threshold = match threshold_spec.as_str() {
        "auto" => None,
        t => Some(
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| anyhow!("alpha_sweep: --threshold must be a number or auto"))?,
        ),
    };
    let data = load_training("alpha_sweep", &r, &matrix, &labels)?;
    let mut result = alpha_sweep(
        &data.x,
        &data.y,
        &base,
        &grid,
        fixed_threshold.unwrap_or(f64::NEG_INFINITY),
    )?;
    if fixed_threshold.is_none() {
        if let Some(reference) = result.entries.iter().find_map(|e| e.final_loss) {
            result.set_threshold(1.1 * reference);
        }
    }

    let sweep_csv = out_dir.join("sweep.csv");
    let mut m = Manifest::new("sweep");
    m.path("matrix", &matrix);
    m.path("labels", &labels);
    m.push("grid", &grid_spec);
    m.push("threshold", &threshold_spec);
    m.push("iters", base.iters);
    m.push("seed", base.seed);
    m.push("norm", base.norm);
    m.push("step", base.step);
    m.push("epsilon", base.epsilon);
    m.path("out-dir", &out_dir);
    m.push("input.matrix.sha256", &data.matrix_digest);
    m.push("input.labels.sha256", &data.labels_digest);
    m.push("result.loss_threshold", result.loss_threshold);
    for e in &result.entries {
        let trace_path = out_dir.join(format!("trace_alpha_{}.csv", e.alpha));
        write_atomic(&trace_path, write_trace_csv(&e.trace).as_bytes())?;
        m.push(&format!("result.trace.{}", e.alpha), trace_path.display());
        if let Some(f) = &e.failure {
            eprintln!("warning: alpha_sweep: alpha={} failed: {f}", e.alpha);
        }
    }
    write_atomic(&sweep_csv, write_sweep_csv(&result).as_bytes())?;
    match result.best_alpha {
        Some(b) => m.push("result.best_alpha", b),
        None => m.push("result.best_alpha", "none"),
    }
    m.write_next_to(&sweep_csv)?;

    match result.best_alpha {
        Some(b) => {
            println!("best_alpha={b}");
            Ok(())
        }
        None => Err(NumericalFailure(format!(
            "alpha_sweep: every alpha in the grid failed ({} runs)",
            result.entries.len()
        ))
        .into()),
    }
}

fn series_label(role: &str, path: &Path, count: usize) -> String {
    if count == 1 {
        return role.to_string();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!("{role}: {stem}")
}

pub fn report(a: ReportArgs) -> Result<()> {
    let mut r = Resolver::new("report", a.config.as_deref())?;
    let with_aa = r.list("with-aa", a.with_aa);
    let without_aa = r.list("without-aa", a.without_aa);
    let out: PathBuf = r.required("out", a.out)?;
    r.finish()?;
    if with_aa.is_empty() && without_aa.is_empty() {
        bail!("report: at least one --with-aa or --without-aa trace is required");
    }

    let mut m = Manifest::new("report");
    let mut series = Vec::new();
    let mut digests = Vec::new();
    for (key, role, label, paths) in [
        ("with-aa", SeriesRole::WithAa, "with AA", &with_aa),
        (
            "without-aa",
            SeriesRole::WithoutAa,
            "without AA",
            &without_aa,
        ),
    ] {
        for (i, p) in paths.iter().enumerate() {
            let (text, digest) = read_input("report", "trace", p)?;
            let trace =
                read_trace_csv(&text).with_context(|| format!("report: {}", p.display()))?;
            m.path(key, p);
            digests.push((format!("input.{key}.{i}.sha256"), digest));
            series.push(Series {
                label: series_label(label, p, paths.len()),
                role,
                trace,
            });
        }
    }
    write_atomic(&out, svg::render(&series).as_bytes())?;
    m.path("out", &out);
    for (k, d) in digests {
        m.push(&k, d);
    }
    m.push("result.series", series.len());
    m.write_next_to(&out)?;
    Ok(())
}
