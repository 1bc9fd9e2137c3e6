//! Out-of-process clustering tools.
//!
//! The tool is started once per cluster count with `{data}` replaced by the
//! path of an uncompressed data file and `{k}` by the cluster count (an
//! optional `{seed}` receives the run seed). It must print exactly one label
//! in `1..=k` per point, each on its own line, and exit successfully.

use std::io::Read;
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::Duration;

use clubench_core::algorithms::{AlgorithmError, Clusterer};
use clubench_core::dataset::{write_data_matrix, DataError};
use clubench_core::labels::validate_partition;
use clubench_core::PartitionSet;
use ndarray::ArrayView2;
use thiserror::Error;
use wait_timeout::ChildExt;

pub const DEFAULT_TIMEOUT_SECS: u64 = 300;

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("command template lacks the {0} placeholder")]
    MissingPlaceholder(&'static str),
    #[error("cannot split command template: {0}")]
    BadTemplate(String),
    #[error("timeout must be positive")]
    ZeroTimeout,
    #[error("cannot start {program:?}: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("k={k}: tool failed ({status}){}", last_line(stderr))]
    Exit {
        k: usize,
        status: ExitStatus,
        stderr: String,
    },
    #[error("k={k}: no answer within {secs} s")]
    Timeout { k: usize, secs: u64 },
    #[error("k={k}: {message}")]
    Output { k: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Data(#[from] DataError),
}

fn last_line(stderr: &str) -> String {
    stderr
        .lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .map(|l| format!(": {}", l.trim()))
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalMethodSpec {
    argv: Vec<String>,
    timeout: Duration,
}

impl ExternalMethodSpec {
    pub fn new(template: &str, timeout_secs: u64) -> Result<Self, ExternalError> {
        for placeholder in ["{data}", "{k}"] {
            if !template.contains(placeholder) {
                return Err(ExternalError::MissingPlaceholder(placeholder));
            }
        }
        if timeout_secs == 0 {
            return Err(ExternalError::ZeroTimeout);
        }
        let argv = shell_words::split(template).map_err(|e| ExternalError::BadTemplate(e.to_string()))?;
        if argv.is_empty() {
            return Err(ExternalError::BadTemplate("empty command".into()));
        }
        Ok(Self {
            argv,
            timeout: Duration::from_secs(timeout_secs),
        })
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn command_line(&self, data: &Path, k: usize, seed: u64) -> Vec<String> {
        let data = data.to_string_lossy();
        self.argv
            .iter()
            .map(|a| {
                a.replace("{data}", &data)
                    .replace("{k}", &k.to_string())
                    .replace("{seed}", &seed.to_string())
            })
            .collect()
    }

    /// Runs the tool on an already written data file.
    pub fn invoke(&self, data: &Path, n: usize, k: usize, seed: u64) -> Result<Vec<usize>, ExternalError> {
        let argv = self.command_line(data, k, seed);
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| ExternalError::Spawn {
                program: argv[0].clone(),
                source,
            })?;
        let stdout = drain(child.stdout.take().expect("piped stdout"));
        let stderr = drain(child.stderr.take().expect("piped stderr"));
        let Some(status) = child.wait_timeout(self.timeout)? else {
            // readers are left behind: a grandchild may still hold the pipes
            let _ = child.kill();
            let _ = child.wait();
            return Err(ExternalError::Timeout {
                k,
                secs: self.timeout.as_secs(),
            });
        };
        let out = stdout.join().expect("reader thread")?;
        let err = stderr.join().expect("reader thread")?;
        if !status.success() {
            return Err(ExternalError::Exit {
                k,
                status,
                stderr: String::from_utf8_lossy(&err).into_owned(),
            });
        }
        parse_labels(&out, n, k).map_err(|message| ExternalError::Output { k, message })
    }

    /// Writes `data` to a temporary file and runs the tool for every `k`.
    pub fn fit_predict_each(
        &self,
        data: ArrayView2<'_, f64>,
        ks: &[usize],
        seed: u64,
    ) -> Result<PartitionSet, ExternalError> {
        let dir = tempfile::Builder::new().prefix("clubench").tempdir()?;
        let path = dir.path().join("points.data");
        write_data_matrix(&path, &data.to_owned())?;
        let mut set = PartitionSet::new(data.nrows());
        for &k in ks {
            let labels = self.invoke(&path, data.nrows(), k, seed)?;
            set.insert(labels)
                .map_err(|e| ExternalError::Output { k, message: e.to_string() })?;
        }
        Ok(set)
    }
}

fn drain<R: Read + Send + 'static>(mut pipe: R) -> thread::JoinHandle<std::io::Result<Vec<u8>>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        pipe.read_to_end(&mut buf)?;
        Ok(buf)
    })
}

/// Exactly `n` lines holding the labels `1..=k`, all of them used. A final
/// newline is optional and CR before LF is tolerated.
pub fn parse_labels(output: &[u8], n: usize, k: usize) -> Result<Vec<usize>, String> {
    let text = std::str::from_utf8(output).map_err(|_| "output is not UTF-8".to_string())?;
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    if lines.len() != n {
        return Err(format!("expected {n} lines of labels, got {}", lines.len()));
    }
    let labels = lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let field = line.trim();
            field
                .parse::<usize>()
                .map_err(|_| format!("line {}: {field:?} is not a label", i + 1))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if labels.contains(&0) {
        return Err("label 0 is not allowed".into());
    }
    let found = validate_partition(&labels).map_err(|e| e.to_string())?;
    if found != k {
        return Err(format!("{found} clusters instead of {k}"));
    }
    Ok(labels)
}

/// An external tool seen as a [`Clusterer`].
pub struct ExternalMethod {
    pub name: String,
    pub spec: ExternalMethodSpec,
    pub seed: u64,
}

impl Clusterer for ExternalMethod {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn fit_predict(&self, data: ArrayView2<'_, f64>, k: usize) -> Result<Vec<usize>, AlgorithmError> {
        let set = self.fit_predict_each(data, &[k])?;
        Ok(set.get(k).expect("requested k").to_vec())
    }

    fn fit_predict_each(
        &self,
        data: ArrayView2<'_, f64>,
        ks: &[usize],
    ) -> Result<PartitionSet, AlgorithmError> {
        ExternalMethodSpec::fit_predict_each(&self.spec, data, ks, self.seed)
            .map_err(|e| AlgorithmError::Failed(e.to_string()))
    }
}
