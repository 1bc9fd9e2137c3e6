//! Stored predicted partitions.
//!
//! Layout: `<results_root>/<method>/<battery>/<dataset>.result<k>.gz`, one
//! label in `1..=k` per line, LF line endings, no comments. Method variants
//! such as `Genie_G0.3` are grouped by name prefix (`Genie`).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::{self, DataError};
use crate::labels::{validate_partition, LabelError};
use crate::scoring::PartitionSet;
use crate::textio::{self, ReadTextError};

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("results root {0} does not exist")]
    MissingRoot(PathBuf),
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
    #[error("{method} has no {k}-partition for {battery}/{dataset}")]
    MissingResult {
        method: MethodId,
        battery: String,
        dataset: String,
        k: usize,
    },
    #[error("invalid method name {0:?} (expected [A-Za-z0-9_.-]+)")]
    InvalidMethod(String),
    #[error("invalid name {0:?} (expected [a-z0-9_]+)")]
    InvalidName(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl ResultsError {
    fn parse(path: &Path, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.to_path_buf(),
            line: None,
            message: message.into(),
        }
    }
}

impl From<DataError> for ResultsError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Parse {
                path,
                line,
                message,
            } => Self::Parse {
                path,
                line,
                message,
            },
            DataError::Io { path, source } => Self::Io { path, source },
            DataError::MissingRoot(p) => Self::MissingRoot(p),
            DataError::InvalidName(n) => Self::InvalidName(n),
            other => Self::Parse {
                path: PathBuf::new(),
                line: None,
                message: other.to_string(),
            },
        }
    }
}

/// Name of a method variant, e.g. `Genie_G0.3` or `KMeans`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodId(String);

impl MethodId {
    pub fn new(name: impl Into<String>) -> Result<Self, ResultsError> {
        let name = name.into();
        let charset_ok = !name.is_empty()
            && name
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'));
        if !charset_ok || name.bytes().all(|b| b == b'.') {
            return Err(ResultsError::InvalidMethod(name));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Partitions found for a method group, plus notes on skipped variants.
#[derive(Debug, Clone, Default)]
pub struct LoadedResults {
    pub partitions: BTreeMap<MethodId, PartitionSet>,
    pub warnings: Vec<String>,
}

fn ensure_root(root: &Path) -> Result<(), ResultsError> {
    if root.is_dir() {
        Ok(())
    } else {
        Err(ResultsError::MissingRoot(root.to_path_buf()))
    }
}

fn check_names(battery: &str, dataset: &str) -> Result<(), ResultsError> {
    for name in [battery, dataset] {
        if !dataset::is_valid_name(name) {
            return Err(ResultsError::InvalidName(name.to_string()));
        }
    }
    Ok(())
}

/// Every method variant directory under `results_root`, sorted.
pub fn list_methods(results_root: &Path) -> Result<Vec<MethodId>, ResultsError> {
    ensure_root(results_root)?;
    let io_err = |source| ResultsError::Io {
        path: results_root.to_path_buf(),
        source,
    };
    let mut methods = Vec::new();
    for entry in fs::read_dir(results_root).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        if !entry.path().is_dir() {
            continue;
        }
        if let Some(id) = entry
            .file_name()
            .to_str()
            .and_then(|name| MethodId::new(name).ok())
        {
            methods.push(id);
        }
    }
    methods.sort();
    Ok(methods)
}

/// Variants whose name starts with `group`.
pub fn methods_in_group(results_root: &Path, group: &str) -> Result<Vec<MethodId>, ResultsError> {
    Ok(list_methods(results_root)?
        .into_iter()
        .filter(|m| m.as_str().starts_with(group))
        .collect())
}

pub fn result_path(
    results_root: &Path,
    method: &MethodId,
    battery: &str,
    dataset: &str,
    k: usize,
) -> PathBuf {
    results_root
        .join(method.as_str())
        .join(battery)
        .join(format!("{dataset}.result{k}.gz"))
}

/// Reads one stored partition and checks that it uses exactly the labels
/// `1..=k`.
pub fn read_partition(path: &Path, k: usize) -> Result<Vec<usize>, ResultsError> {
    let raw = dataset::read_label_column(path, false)?;
    if let Some(v) = raw.iter().find(|&&v| v < 1) {
        return Err(ResultsError::parse(path, format!("label {v} outside 1..={k}")));
    }
    let labels: Vec<usize> = raw.into_iter().map(|v| v as usize).collect();
    let found = validate_partition(&labels).map_err(|e| ResultsError::parse(path, e.to_string()))?;
    if found != k {
        return Err(ResultsError::parse(
            path,
            LabelError::WrongClusterCount { expected: k, found }.to_string(),
        ));
    }
    Ok(labels)
}

/// Loads the partitions of one method variant at the requested cluster
/// counts.
pub fn load_method(
    results_root: &Path,
    method: &MethodId,
    battery: &str,
    dataset: &str,
    ks: &[usize],
) -> Result<PartitionSet, ResultsError> {
    ensure_root(results_root)?;
    check_names(battery, dataset)?;
    let mut set: Option<PartitionSet> = None;
    for &k in ks {
        let path = result_path(results_root, method, battery, dataset, k);
        if !path.is_file() {
            return Err(ResultsError::MissingResult {
                method: method.clone(),
                battery: battery.to_string(),
                dataset: dataset.to_string(),
                k,
            });
        }
        let labels = read_partition(&path, k)?;
        let set = set.get_or_insert_with(|| PartitionSet::new(labels.len()));
        if labels.len() != set.n() {
            return Err(ResultsError::parse(
                &path,
                format!("{} labels, other partitions have {}", labels.len(), set.n()),
            ));
        }
        set.insert(labels)
            .map_err(|e| ResultsError::parse(&path, e.to_string()))?;
    }
    Ok(set.unwrap_or_else(|| PartitionSet::new(0)))
}

/// Loads the partitions of every variant of `method_group` for one dataset
/// at the requested cluster counts. Variants lacking some `k` are skipped
/// and reported in [`LoadedResults::warnings`].
pub fn load_results(
    results_root: &Path,
    method_group: &str,
    battery: &str,
    dataset: &str,
    ks: &[usize],
) -> Result<LoadedResults, ResultsError> {
    check_names(battery, dataset)?;
    let mut loaded = LoadedResults::default();
    for method in methods_in_group(results_root, method_group)? {
        match load_method(results_root, &method, battery, dataset, ks) {
            Ok(set) if set.is_empty() => {}
            Ok(set) => {
                loaded.partitions.insert(method, set);
            }
            Err(e @ ResultsError::MissingResult { .. }) => loaded.warnings.push(e.to_string()),
            Err(e) => return Err(e),
        }
    }
    Ok(loaded)
}

/// Writes one gzip file per stored `k`, overwriting earlier versions.
/// Identical partitions always produce identical bytes.
pub fn save_results(
    results_root: &Path,
    method: &MethodId,
    battery: &str,
    dataset: &str,
    partitions: &PartitionSet,
) -> Result<(), ResultsError> {
    check_names(battery, dataset)?;
    for (k, labels) in partitions.iter() {
        let path = result_path(results_root, method, battery, dataset, k);
        dataset::write_labels(&path, labels)?;
    }
    Ok(())
}

/// Imports results kept in the layout of the public clustering-results
/// repository: `<root>/<group>/<battery>/<dataset>.result<k>.gz` holding a
/// comma-separated table with one column per method variant under a header
/// row of variant names. Columns that are not valid `k`-partitions are
/// skipped with a warning.
pub fn load_published_results(
    results_root: &Path,
    method_group: &str,
    battery: &str,
    dataset: &str,
    ks: &[usize],
) -> Result<LoadedResults, ResultsError> {
    ensure_root(results_root)?;
    check_names(battery, dataset)?;
    let mut per_variant: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut found_ks = Vec::new();
    for &k in ks {
        let path = results_root
            .join(method_group)
            .join(battery)
            .join(format!("{dataset}.result{k}.gz"));
        if !path.is_file() {
            warnings.push(format!("{method_group}: no {k}-partitions for {battery}/{dataset}"));
            continue;
        }
        found_ks.push(k);
        for (name, column) in read_table(&path)? {
            match column.and_then(|labels| {
                let got = validate_partition(&labels).map_err(|e| e.to_string())?;
                if got == k {
                    Ok(labels)
                } else {
                    Err(format!("{got} clusters instead of {k}"))
                }
            }) {
                Ok(labels) => per_variant.entry(name).or_default().push(labels),
                Err(why) => warnings.push(format!("{name} (k={k}): {why}")),
            }
        }
    }
    let mut partitions = BTreeMap::new();
    for (name, columns) in per_variant {
        if columns.len() != found_ks.len() || found_ks.len() != ks.len() {
            warnings.push(format!("{name}: not every requested k is available"));
            continue;
        }
        let Ok(method) = MethodId::new(name.clone()) else {
            warnings.push(format!("{name}: unusable method name"));
            continue;
        };
        let n = columns[0].len();
        match PartitionSet::from_partitions(n, columns) {
            Ok(set) => {
                partitions.insert(method, set);
            }
            Err(e) => warnings.push(format!("{name}: {e}")),
        }
    }
    Ok(LoadedResults {
        partitions,
        warnings,
    })
}

type Column = Result<Vec<usize>, String>;

fn read_table(path: &Path) -> Result<Vec<(String, Column)>, ResultsError> {
    let text = textio::read_text(path).map_err(|e| match e {
        ReadTextError::Io(source) => ResultsError::Io {
            path: path.to_path_buf(),
            source,
        },
        ReadTextError::Decode(message) => ResultsError::parse(path, message),
    })?;
    let mut lines = textio::content_lines(&text, false);
    let (_, header) = lines
        .next()
        .ok_or_else(|| ResultsError::parse(path, "empty table"))?;
    let names: Vec<String> = header
        .split(',')
        .map(|s| s.trim().trim_matches('"').to_string())
        .collect();
    let mut columns: Vec<Column> = vec![Ok(Vec::new()); names.len()];
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(ResultsError::Parse {
                path: path.to_path_buf(),
                line: Some(lineno),
                message: format!("{} fields, header has {}", fields.len(), names.len()),
            });
        }
        for (column, field) in columns.iter_mut().zip(fields) {
            if let Ok(values) = column {
                match field.trim().parse::<usize>() {
                    Ok(v) => values.push(v),
                    Err(_) => *column = Err(format!("non-label value {:?}", field.trim())),
                }
            }
        }
    }
    Ok(names.into_iter().zip(columns).collect())
}
