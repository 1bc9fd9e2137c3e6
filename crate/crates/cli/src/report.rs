//! Score tables.

use std::fmt::Write;

use clubench_core::MetricId;

/// One table row; `outcome` is `None` when the score is unavailable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub method: String,
    pub battery: String,
    pub dataset: String,
    pub metric: MetricId,
    /// Score and the cluster count of the labelling that attained it.
    pub outcome: Option<(f64, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreReport {
    rows: Vec<ScoreRow>,
}

impl ScoreReport {
    /// Rows are kept sorted by method, battery, dataset and metric.
    pub fn new(mut rows: Vec<ScoreRow>) -> Self {
        rows.sort_by(|a, b| {
            (&a.method, &a.battery, &a.dataset, a.metric.name())
                .cmp(&(&b.method, &b.battery, &b.dataset, b.metric.name()))
        });
        rows.dedup_by(|a, b| {
            (&a.method, &a.battery, &a.dataset, a.metric) == (&b.method, &b.battery, &b.dataset, b.metric)
        });
        Self { rows }
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Markdown => self.to_markdown(),
        }
    }

    fn cells(&self, decimals: usize) -> Vec<[String; 6]> {
        self.rows
            .iter()
            .map(|r| {
                let (score, k) = match r.outcome {
                    Some((s, k)) => (format!("{s:.decimals$}"), k.to_string()),
                    None => ("NA".to_string(), "NA".to_string()),
                };
                [
                    r.method.clone(),
                    r.battery.clone(),
                    r.dataset.clone(),
                    r.metric.name().to_string(),
                    score,
                    k,
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,battery,dataset,metric,score,k_used\n");
        for cells in self.cells(6) {
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        const HEADER: [&str; 6] = ["method", "battery", "dataset", "metric", "score", "k_used"];
        let cells = self.cells(2);
        let mut widths = HEADER.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        // text columns left-aligned, numbers right-aligned
        let numeric = |i: usize| i >= 4;
        let mut out = String::new();
        let line = |out: &mut String, row: &[&str]| {
            out.push('|');
            for (i, c) in row.iter().enumerate() {
                let w = widths[i];
                if numeric(i) {
                    let _ = write!(out, " {c:>w$} |");
                } else {
                    let _ = write!(out, " {c:<w$} |");
                }
            }
            out.push('\n');
        };
        line(&mut out, &HEADER);
        out.push('|');
        for (i, &w) in widths.iter().enumerate() {
            if numeric(i) {
                let _ = write!(out, " {}: |", "-".repeat(w - 1));
            } else {
                let _ = write!(out, " :{} |", "-".repeat(w - 1));
            }
        }
        out.push('\n');
        for row in &cells {
            let refs: Vec<&str> = row.iter().map(String::as_str).collect();
            line(&mut out, &refs);
        }
        out
    }
}
