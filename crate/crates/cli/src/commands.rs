use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clubench_core::algorithms::{fit_predict_many, Agglomerative, Clusterer, KMeans, KMeansConfig, Linkage};
use clubench_core::dataset::{list_batteries, list_datasets};
use clubench_core::results::{
    list_methods, load_method, read_partition, result_path, save_results, MethodId, ResultsError,
};
use clubench_core::scoring::{get_best_score, noise_free_confusion, noise_row, score_one};
use clubench_core::{load_dataset, BenchmarkDataset, MetricId, ReferenceLabelling};
use rayon::prelude::*;
use thiserror::Error;

use crate::args::Selection;
use crate::external::{ExternalMethod, ExternalMethodSpec};
use crate::plot::scatter_svg;
use crate::report::{Format, ScoreReport, ScoreRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("no data root: pass --data or set CLUBENCH_DATA")]
    MissingDataRoot,
    #[error("no results root: pass --results or set CLUBENCH_RESULTS")]
    MissingResultsRoot,
    #[error("no datasets match the selection")]
    NothingSelected,
    #[error("unknown method {0:?} (expected kmeans, single, complete, average or exec:COMMAND)")]
    UnknownMethod(String),
    #[error("external methods need --name")]
    MissingName,
    #[error("{id} has no labels{index} ({available} labelling(s) available)")]
    MissingLabels {
        id: String,
        index: usize,
        available: usize,
    },
    #[error("{id} has no reference labelling with k={k}")]
    MissingK { id: String, k: usize },
}

pub(crate) fn data_root(path: &Option<PathBuf>) -> Result<&Path> {
    Ok(path.as_deref().ok_or(CliError::MissingDataRoot)?)
}

pub(crate) fn results_root(path: &Option<PathBuf>) -> Result<&Path> {
    Ok(path.as_deref().ok_or(CliError::MissingResultsRoot)?)
}

/// `(battery, dataset)` pairs in sorted order.
pub fn select(data_root: &Path, selection: &Selection) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for battery in list_batteries(data_root)? {
        if !selection.batteries.is_empty() && !selection.batteries.contains(&battery) {
            continue;
        }
        for dataset in list_datasets(data_root, &battery)? {
            if selection.datasets.is_empty() || selection.datasets.contains(&dataset) {
                out.push((battery.clone(), dataset));
            }
        }
    }
    Ok(out)
}

fn thread_pool(workers: Option<u64>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w as usize);
    }
    Ok(builder.build()?)
}

fn join_ks(ks: impl IntoIterator<Item = usize>) -> String {
    ks.into_iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

pub fn list(data_root: &Path, selection: &Selection, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let mut failures = 0;
    for (battery, dataset) in select(data_root, selection)? {
        match load_dataset(data_root, &battery, &dataset) {
            Ok(ds) => writeln!(
                out,
                "{}  {}  {}  {}",
                ds.id(),
                ds.n_points(),
                ds.dim(),
                join_ks(ds.distinct_ks())
            )?,
            Err(e) => {
                failures += 1;
                writeln!(err, "error: {battery}/{dataset}: {e}")?;
            }
        }
    }
    Ok(u8::from(failures > 0))
}

/// Turns a `--method` value into a clusterer and the name to store under.
pub fn method_from_arg(
    method: &str,
    name: Option<&str>,
    seed: u64,
    timeout: u64,
) -> Result<(Box<dyn Clusterer>, MethodId)> {
    let clusterer: Box<dyn Clusterer> = if let Some(template) = method.strip_prefix("exec:") {
        let name = name.ok_or(CliError::MissingName)?;
        Box::new(ExternalMethod {
            name: name.to_string(),
            spec: ExternalMethodSpec::new(template, timeout)?,
            seed,
        })
    } else if method.eq_ignore_ascii_case("kmeans") {
        Box::new(KMeans {
            config: KMeansConfig::with_seed(seed),
        })
    } else {
        let linkage: Linkage = method
            .parse()
            .map_err(|_| CliError::UnknownMethod(method.to_string()))?;
        Box::new(Agglomerative { linkage })
    };
    let id = MethodId::new(name.map_or_else(|| clusterer.name(), str::to_string))?;
    Ok((clusterer, id))
}

pub struct RunOptions<'a> {
    pub method: &'a str,
    pub name: Option<&'a str>,
    pub seed: u64,
    pub workers: Option<u64>,
    pub timeout: u64,
}

pub fn run(
    data_root: &Path,
    results_root: &Path,
    selection: &Selection,
    options: &RunOptions<'_>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8> {
    let (clusterer, method) = method_from_arg(options.method, options.name, options.seed, options.timeout)?;
    let selected = select(data_root, selection)?;
    if selected.is_empty() {
        return Err(CliError::NothingSelected.into());
    }
    let pool = thread_pool(options.workers)?;
    let outcomes: Vec<Result<_>> = pool.install(|| {
        selected
            .par_iter()
            .map(|(battery, dataset)| {
                let ds = load_dataset(data_root, battery, dataset)?;
                Ok(fit_predict_many(clusterer.as_ref(), ds.data().view(), &ds.distinct_ks())?)
            })
            .collect()
    });
    // writes happen here, one dataset at a time and in sorted order
    let mut failures = 0;
    for ((battery, dataset), outcome) in selected.iter().zip(outcomes) {
        let stored = outcome.and_then(|set| {
            save_results(results_root, &method, battery, dataset, &set)?;
            Ok(set)
        });
        match stored {
            Ok(set) => writeln!(out, "{method}  {battery}/{dataset}  k={}", join_ks(set.ks()))?,
            Err(e) => {
                failures += 1;
                writeln!(err, "error: {method} on {battery}/{dataset}: {e:#}")?;
            }
        }
    }
    if failures > 0 {
        writeln!(err, "{failures} of {} dataset(s) failed", selected.len())?;
    }
    Ok(u8::from(failures > 0))
}

pub struct ScoreOptions<'a> {
    pub methods: &'a [String],
    pub metrics: &'a [MetricId],
    pub format: Format,
    pub workers: Option<u64>,
}

struct Scored {
    rows: Vec<ScoreRow>,
    warnings: Vec<String>,
    failed: bool,
}

fn unavailable(method: &str, battery: &str, dataset: &str, metrics: &[MetricId]) -> Vec<ScoreRow> {
    metrics
        .iter()
        .map(|&metric| ScoreRow {
            method: method.to_string(),
            battery: battery.to_string(),
            dataset: dataset.to_string(),
            metric,
            outcome: None,
        })
        .collect()
}

fn score_variant(results_root: &Path, method: &MethodId, ds: &BenchmarkDataset, metrics: &[MetricId]) -> Scored {
    let (battery, dataset) = (ds.battery(), ds.dataset());
    let na = || unavailable(method.as_str(), battery, dataset, metrics);
    let set = match load_method(results_root, method, battery, dataset, &ds.distinct_ks()) {
        Ok(set) => set,
        Err(e @ ResultsError::MissingResult { .. }) => {
            return Scored {
                rows: na(),
                warnings: vec![e.to_string()],
                failed: false,
            }
        }
        Err(e) => {
            return Scored {
                rows: na(),
                warnings: vec![format!("{method} on {}: {e}", ds.id())],
                failed: true,
            }
        }
    };
    let mut scored = Scored {
        rows: Vec::new(),
        warnings: Vec::new(),
        failed: false,
    };
    for &metric in metrics {
        let outcome = match get_best_score(ds.labellings(), &set, metric) {
            Ok(best) => Some((best.score, best.k)),
            Err(e) => {
                scored.warnings.push(format!("{method} on {} ({metric}): {e}", ds.id()));
                scored.failed = true;
                None
            }
        };
        scored.rows.push(ScoreRow {
            method: method.to_string(),
            battery: battery.to_string(),
            dataset: dataset.to_string(),
            metric,
            outcome,
        });
    }
    scored
}

/// Scores every selected method variant on every selected dataset.
pub fn score_report(
    data_root: &Path,
    results_root: &Path,
    selection: &Selection,
    options: &ScoreOptions<'_>,
) -> Result<(ScoreReport, Vec<String>, bool)> {
    let selected = select(data_root, selection)?;
    if selected.is_empty() {
        return Err(CliError::NothingSelected.into());
    }
    let stored = list_methods(results_root)?;
    let mut variants = BTreeSet::new();
    let mut empty_groups = Vec::new();
    if options.methods.is_empty() {
        variants.extend(stored);
    } else {
        for group in options.methods {
            let matching: Vec<_> = stored.iter().filter(|m| m.as_str().starts_with(group.as_str())).cloned().collect();
            if matching.is_empty() {
                empty_groups.push(group.clone());
            }
            variants.extend(matching);
        }
    }
    let metrics = options.metrics;
    let pool = thread_pool(options.workers)?;
    let (datasets, scored): (Vec<Result<BenchmarkDataset, String>>, Vec<Scored>) = pool.install(|| {
        let datasets: Vec<_> = selected
            .par_iter()
            .map(|(b, d)| load_dataset(data_root, b, d).map_err(|e| format!("{b}/{d}: {e}")))
            .collect();
        let items: Vec<(&MethodId, &BenchmarkDataset)> = variants
            .iter()
            .flat_map(|m| datasets.iter().filter_map(move |ds| ds.as_ref().ok().map(|ds| (m, ds))))
            .collect();
        let scored = items
            .par_iter()
            .map(|(m, ds)| score_variant(results_root, m, ds, metrics))
            .collect();
        (datasets, scored)
    });

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut failed = false;
    for group in &empty_groups {
        warnings.push(format!("no stored results match {group:?}"));
        for (b, d) in &selected {
            rows.extend(unavailable(group, b, d, metrics));
        }
    }
    for ((b, d), ds) in selected.iter().zip(&datasets) {
        if let Err(e) = ds {
            failed = true;
            warnings.push(e.clone());
            for m in &variants {
                rows.extend(unavailable(m.as_str(), b, d, metrics));
            }
        }
    }
    for s in scored {
        rows.extend(s.rows);
        warnings.extend(s.warnings);
        failed |= s.failed;
    }
    Ok((ScoreReport::new(rows), warnings, failed))
}

pub fn score(
    data_root: &Path,
    results_root: &Path,
    selection: &Selection,
    options: &ScoreOptions<'_>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8> {
    let (report, warnings, failed) = score_report(data_root, results_root, selection, options)?;
    out.write_all(report.render(options.format).as_bytes())?;
    for w in &warnings {
        writeln!(err, "warning: {w}")?;
    }
    if !warnings.is_empty() {
        writeln!(err, "{} warning(s)", warnings.len())?;
    }
    Ok(u8::from(failed))
}

fn stored_partition(results_root: &Path, method: &MethodId, ds: &BenchmarkDataset, k: usize) -> Result<Vec<usize>> {
    let path = result_path(results_root, method, ds.battery(), ds.dataset(), k);
    if !path.is_file() {
        return Err(ResultsError::MissingResult {
            method: method.clone(),
            battery: ds.battery().to_string(),
            dataset: ds.dataset().to_string(),
            k,
        }
        .into());
    }
    Ok(read_partition(&path, k)?)
}

pub enum PlotSource<'a> {
    Reference(usize),
    Stored { results_root: &'a Path, method: &'a str, k: usize },
}

pub fn plot(
    data_root: &Path,
    battery: &str,
    dataset: &str,
    source: PlotSource<'_>,
    path: &Path,
    out: &mut dyn Write,
) -> Result<u8> {
    let ds = load_dataset(data_root, battery, dataset)?;
    let (labels, what) = match source {
        PlotSource::Reference(j) => {
            let labelling = ds.labellings().get(j).ok_or_else(|| CliError::MissingLabels {
                id: ds.id(),
                index: j,
                available: ds.labellings().len(),
            })?;
            (labelling.labels().to_vec(), format!("labels{j}"))
        }
        PlotSource::Stored { results_root, method, k } => {
            let method = MethodId::new(method)?;
            (stored_partition(results_root, &method, &ds, k)?, format!("{method} k={k}"))
        }
    };
    let svg = scatter_svg(ds.data().view(), &labels, &format!("{} {what}", ds.id()))
        .with_context(|| format!("cannot plot {}", ds.id()))?;
    fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(0)
}

/// The confusion matrix of `y_pred` against one labelling, with the noise
/// points in a separate first row.
pub fn confusion_table(labelling: &ReferenceLabelling, y_pred: &[usize]) -> Result<String> {
    let c = noise_free_confusion(labelling, y_pred)?;
    let noise = noise_row(labelling, y_pred)?;
    let nca = score_one(labelling, y_pred, MetricId::Nca)?;

    let mut rows: Vec<(String, Vec<u64>)> = Vec::new();
    if let Some(noise) = noise {
        rows.push(("0 (excluded)".to_string(), noise));
    }
    for i in 0..c.n_rows() {
        rows.push(((i + 1).to_string(), c.row(i).to_vec()));
    }
    let head = rows.iter().map(|(h, _)| h.len()).max().unwrap_or(0);
    let width = rows
        .iter()
        .flat_map(|(_, r)| r.iter().map(|v| v.to_string().len()))
        .chain(std::iter::once(c.n_cols().to_string().len()))
        .max()
        .unwrap_or(1);
    let mut text = format!("{:head$}", "");
    for j in 1..=c.n_cols() {
        let _ = write!(text, "  {j:>width$}");
    }
    text.push('\n');
    for (h, r) in rows {
        let _ = write!(text, "{h:<head$}");
        for v in r {
            let _ = write!(text, "  {v:>width$}");
        }
        text.push('\n');
    }
    let _ = writeln!(text, "nca: {nca:.6}");
    Ok(text)
}

pub fn confusion(
    data_root: &Path,
    results_root: &Path,
    method: &str,
    battery: &str,
    dataset: &str,
    k: usize,
    out: &mut dyn Write,
) -> Result<u8> {
    let ds = load_dataset(data_root, battery, dataset)?;
    let method = MethodId::new(method)?;
    let matching: Vec<(usize, &ReferenceLabelling)> = ds
        .labellings()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.n_clusters() == k)
        .collect();
    if matching.is_empty() {
        return Err(CliError::MissingK { id: ds.id(), k }.into());
    }
    let y_pred = stored_partition(results_root, &method, &ds, k)?;
    for (n, (j, labelling)) in matching.into_iter().enumerate() {
        if n > 0 {
            writeln!(out)?;
        }
        writeln!(out, "{} labels{j} vs {method} (k={k})", ds.id())?;
        out.write_all(confusion_table(labelling, &y_pred)?.as_bytes())?;
    }
    Ok(0)
}
