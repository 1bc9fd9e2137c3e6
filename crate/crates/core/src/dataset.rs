//! Benchmark batteries on disk.
//!
//! A data root holds one directory per battery. Each dataset `name` in a
//! battery consists of
//!
//! * `name.data.gz`: one point per line, coordinates separated by spaces or
//!   tabs;
//! * `name.labels0.gz`, `name.labels1.gz`, ...: one integer label per line,
//!   `0` marking noise points.
//!
//! Uncompressed `.data` / `.labels<j>` files are accepted as well. Lines
//! starting with `%` or `#` are comments.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use thiserror::Error;

use crate::labels::{validate_labelling, LabelError, NOISE};
use crate::textio::{self, ReadTextError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("data root {0} does not exist")]
    MissingRoot(PathBuf),
    #[error("dataset {battery}/{dataset} not found")]
    MissingDataset { battery: String, dataset: String },
    #[error("{}: {message}", location(path, *line))]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
    #[error("{}: invalid labelling: {source}", path.display())]
    Label {
        path: PathBuf,
        #[source]
        source: LabelError,
    },
    #[error("invalid dataset: {0}")]
    Invariant(String),
    #[error("invalid name {0:?} (expected [a-z0-9_]+)")]
    InvalidName(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn location(path: &Path, line: Option<usize>) -> String {
    match line {
        Some(line) => format!("{}:{line}", path.display()),
        None => path.display().to_string(),
    }
}

/// One expert-provided partition of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceLabelling {
    pub(crate) labels: Vec<usize>,
    pub(crate) n_clusters: usize,
}

impl ReferenceLabelling {
    /// Validates `labels` (values `0..=k`, each of `1..=k` present, `k >= 2`).
    pub fn new(labels: Vec<usize>) -> Result<Self, LabelError> {
        let signed: Vec<i64> = labels
            .iter()
            .map(|&l| i64::try_from(l).unwrap_or(i64::MAX))
            .collect();
        let n_clusters = validate_labelling(&signed)?;
        Ok(Self { labels, n_clusters })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn has_noise(&self) -> bool {
        self.labels.contains(&NOISE)
    }
}

/// An `n x d` point matrix with one or more reference labellings, addressed
/// as `battery/dataset`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkDataset {
    battery: String,
    dataset: String,
    data: Array2<f64>,
    labellings: Vec<ReferenceLabelling>,
}

impl BenchmarkDataset {
    pub fn new(
        battery: impl Into<String>,
        dataset: impl Into<String>,
        data: Array2<f64>,
        labellings: Vec<ReferenceLabelling>,
    ) -> Result<Self, DataError> {
        let battery = battery.into();
        let dataset = dataset.into();
        check_name(&battery)?;
        check_name(&dataset)?;
        let (n, d) = data.dim();
        if n == 0 || d == 0 {
            return Err(DataError::Invariant(format!(
                "data matrix must be non-empty, got {n}x{d}"
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Invariant(format!(
                "non-finite coordinate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        if labellings.is_empty() {
            return Err(DataError::Invariant("no reference labelling".into()));
        }
        for (j, l) in labellings.iter().enumerate() {
            if l.len() != n {
                return Err(DataError::Invariant(format!(
                    "labelling {j} has {} entries, expected {n}",
                    l.len()
                )));
            }
        }
        Ok(Self {
            battery,
            dataset,
            data,
            labellings,
        })
    }

    pub fn battery(&self) -> &str {
        &self.battery
    }

    pub fn dataset(&self) -> &str {
        &self.dataset
    }

    /// `battery/dataset`.
    pub fn id(&self) -> String {
        format!("{}/{}", self.battery, self.dataset)
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn labellings(&self) -> &[ReferenceLabelling] {
        &self.labellings
    }

    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Cluster counts of the reference labellings, in labelling order.
    pub fn n_clusters(&self) -> Vec<usize> {
        self.labellings.iter().map(|l| l.n_clusters()).collect()
    }

    /// Distinct reference cluster counts, ascending.
    pub fn distinct_ks(&self) -> Vec<usize> {
        let mut ks = self.n_clusters();
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

/// Battery and dataset names must be path-safe.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn check_name(name: &str) -> Result<(), DataError> {
    if is_valid_name(name) {
        Ok(())
    } else {
        Err(DataError::InvalidName(name.to_string()))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn ensure_root(data_root: &Path) -> Result<(), DataError> {
    if data_root.is_dir() {
        Ok(())
    } else {
        Err(DataError::MissingRoot(data_root.to_path_buf()))
    }
}

/// Names of the batteries under `data_root`: subdirectories holding at least
/// one dataset, sorted.
pub fn list_batteries(data_root: &Path) -> Result<Vec<String>, DataError> {
    ensure_root(data_root)?;
    let mut batteries = Vec::new();
    for entry in fs::read_dir(data_root).map_err(io_err(data_root))? {
        let entry = entry.map_err(io_err(data_root))?;
        let Ok(name) = entry.file_name().into_string() else {
            continue;
        };
        if !is_valid_name(&name) || !entry.path().is_dir() {
            continue;
        }
        if !list_datasets(data_root, &name)?.is_empty() {
            batteries.push(name);
        }
    }
    batteries.sort();
    Ok(batteries)
}

/// Names of the datasets in one battery, sorted.
pub fn list_datasets(data_root: &Path, battery: &str) -> Result<Vec<String>, DataError> {
    ensure_root(data_root)?;
    check_name(battery)?;
    let dir = data_root.join(battery);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut names = Vec::new();
    for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
        let entry = entry.map_err(io_err(&dir))?;
        let Ok(file) = entry.file_name().into_string() else {
            continue;
        };
        let stem = file
            .strip_suffix(".data.gz")
            .or_else(|| file.strip_suffix(".data"));
        if let Some(stem) = stem {
            if is_valid_name(stem) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    names.dedup();
    Ok(names)
}

/// Prefers the compressed variant of `<dir>/<stem>.<suffix>`.
fn find_file(dir: &Path, stem: &str, suffix: &str) -> Option<PathBuf> {
    let gz = dir.join(format!("{stem}.{suffix}.gz"));
    if gz.is_file() {
        return Some(gz);
    }
    let plain = dir.join(format!("{stem}.{suffix}"));
    plain.is_file().then_some(plain)
}

/// Loads `battery/dataset` with all of its consecutive labellings
/// (`labels0`, `labels1`, ...).
pub fn load_dataset(
    data_root: &Path,
    battery: &str,
    dataset: &str,
) -> Result<BenchmarkDataset, DataError> {
    ensure_root(data_root)?;
    check_name(battery)?;
    check_name(dataset)?;
    let dir = data_root.join(battery);
    let missing = || DataError::MissingDataset {
        battery: battery.to_string(),
        dataset: dataset.to_string(),
    };
    let data_path = find_file(&dir, dataset, "data").ok_or_else(missing)?;
    let data = read_data_matrix(&data_path)?;
    let n = data.nrows();

    let mut labellings = Vec::new();
    while let Some(path) = find_file(&dir, dataset, &format!("labels{}", labellings.len())) {
        labellings.push(read_labelling(&path, n)?);
    }
    if labellings.is_empty() {
        return Err(missing());
    }
    BenchmarkDataset::new(battery, dataset, data, labellings)
}

/// Writes `dataset` under `data_root` as gzip-compressed files, replacing any
/// previous version (stale higher-index labellings are removed).
pub fn save_dataset(data_root: &Path, dataset: &BenchmarkDataset) -> Result<(), DataError> {
    let dir = data_root.join(dataset.battery());
    let name = dataset.dataset();
    write_data_matrix(&dir.join(format!("{name}.data.gz")), dataset.data())?;
    for (j, labelling) in dataset.labellings().iter().enumerate() {
        write_labels(
            &dir.join(format!("{name}.labels{j}.gz")),
            labelling.labels(),
        )?;
    }
    for j in dataset.labellings().len().. {
        let mut removed = false;
        for file in [format!("{name}.labels{j}.gz"), format!("{name}.labels{j}")] {
            let stale = dir.join(file);
            if stale.is_file() {
                fs::remove_file(&stale).map_err(io_err(&stale))?;
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, DataError> {
    textio::read_text(path).map_err(|e| match e {
        ReadTextError::Io(source) => DataError::Io {
            path: path.to_path_buf(),
            source,
        },
        ReadTextError::Decode(message) => DataError::Parse {
            path: path.to_path_buf(),
            line: None,
            message,
        },
    })
}

/// Parses a whitespace-delimited numeric matrix, one point per line.
pub fn read_data_matrix(path: &Path) -> Result<Array2<f64>, DataError> {
    let text = read_text(path)?;
    parse_data_matrix(&text).map_err(|(line, message)| DataError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

fn parse_data_matrix(text: &str) -> Result<Array2<f64>, (Option<usize>, String)> {
    let mut values = Vec::new();
    let mut dim = None;
    let mut rows = 0usize;
    for (lineno, line) in textio::content_lines(text, true) {
        let before = values.len();
        for field in line.split_ascii_whitespace() {
            let v: f64 = field
                .parse()
                .map_err(|_| (Some(lineno), format!("malformed number {field:?}")))?;
            if !v.is_finite() {
                return Err((Some(lineno), format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        let width = values.len() - before;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err((
                    Some(lineno),
                    format!("ragged row: {width} fields, expected {d}"),
                ))
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let dim = dim.ok_or((None, "no data rows".to_string()))?;
    Array2::from_shape_vec((rows, dim), values).map_err(|e| (None, e.to_string()))
}

fn read_labelling(path: &Path, n: usize) -> Result<ReferenceLabelling, DataError> {
    let raw = read_label_column(path, true)?;
    let label_err = |source| DataError::Label {
        path: path.to_path_buf(),
        source,
    };
    if raw.len() != n {
        return Err(label_err(LabelError::LengthMismatch {
            expected: n,
            found: raw.len(),
        }));
    }
    validate_labelling(&raw).map_err(label_err)?;
    let labels = raw.into_iter().map(|v| v as usize).collect();
    ReferenceLabelling::new(labels).map_err(label_err)
}

/// Reads one integer per line. Used for reference labellings and, without
/// comment support, for stored results.
pub(crate) fn read_label_column(path: &Path, allow_comments: bool) -> Result<Vec<i64>, DataError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (lineno, line) in textio::content_lines(&text, allow_comments) {
        let mut fields = line.split_ascii_whitespace();
        let field = fields.next().unwrap_or_default();
        if fields.next().is_some() {
            return Err(DataError::Parse {
                path: path.to_path_buf(),
                line: Some(lineno),
                message: "expected a single integer per line".into(),
            });
        }
        let v: i64 = field.parse().map_err(|_| DataError::Parse {
            path: path.to_path_buf(),
            line: Some(lineno),
            message: format!("malformed integer {field:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Writes a point matrix, gzip-compressed if the file name ends in `.gz`.
pub fn write_data_matrix(path: &Path, data: &Array2<f64>) -> Result<(), DataError> {
    let mut text = String::with_capacity(data.len() * 12);
    for row in data.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                text.push(' ');
            }
            text.push_str(&textio::format_coordinate(*v));
        }
        text.push('\n');
    }
    textio::write_text(path, &text).map_err(io_err(path))
}

/// Writes one label per line, gzip-compressed if the file name ends in `.gz`.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<(), DataError> {
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    textio::write_text(path, &text).map_err(io_err(path))
}
