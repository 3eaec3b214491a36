//! Result rows, per-step aggregates and embedded checks of a run.

use std::collections::BTreeMap;

use crate::config::ExperimentName;

/// One row of observables for a `(trial, step)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub trial: u64,
    pub step: u64,
    pub values: Vec<f64>,
}

/// Rows recorded by one trial, with the error that aborted it, if any.
#[derive(Debug, Clone, Default)]
pub struct TrialOutput {
    steps: Vec<u64>,
    values: Vec<f64>,
    pub failure: Option<String>,
}

impl TrialOutput {
    pub fn push(&mut self, step: u64, values: &[f64]) {
        self.steps.push(step);
        self.values.extend_from_slice(values);
    }

    pub fn fail(&mut self, err: impl ToString) {
        self.failure = Some(err.to_string());
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// All rows of a run in trial-major order, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    trials: Vec<u64>,
    steps: Vec<u64>,
    data: Vec<f64>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            trials: Vec::new(),
            steps: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn push(&mut self, trial: u64, step: u64, values: &[f64]) {
        assert_eq!(values.len(), self.width(), "row width");
        self.trials.push(trial);
        self.steps.push(step);
        self.data.extend_from_slice(values);
    }

    fn append(&mut self, trial: u64, out: &TrialOutput) {
        let w = self.width();
        assert_eq!(out.values.len(), out.steps.len() * w, "row width");
        self.trials.extend(std::iter::repeat(trial).take(out.steps.len()));
        self.steps.extend_from_slice(&out.steps);
        self.data.extend_from_slice(&out.values);
    }

    /// `(trial, step, values)` in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (u64, u64, &[f64])> + '_ {
        let w = self.width();
        self.trials
            .iter()
            .zip(&self.steps)
            .enumerate()
            .map(move |(k, (&t, &s))| (t, s, &self.data[k * w..(k + 1) * w]))
    }

    pub fn row(&self, k: usize) -> ResultRow {
        let w = self.width();
        ResultRow {
            trial: self.trials[k],
            step: self.steps[k],
            values: self.data[k * w..(k + 1) * w].to_vec(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of one column for one trial, in step order.
    pub fn trial_column(&self, trial: u64, col: usize) -> Vec<(u64, f64)> {
        self.rows()
            .filter(|(t, _, _)| *t == trial)
            .map(|(_, s, v)| (s, v[col]))
            .collect()
    }
}

/// Mean and standard error of every column at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub step: u64,
    pub count: u64,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

/// Per-step aggregates in step order. Sums run in storage (trial) order,
/// so results do not depend on how trials were scheduled.
pub fn summarize(table: &Table) -> Vec<SummaryRow> {
    let w = table.width();
    let mut acc: BTreeMap<u64, (u64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (_, step, v) in table.rows() {
        let e = acc.entry(step).or_insert_with(|| (0, vec![0.0; w], vec![0.0; w]));
        e.0 += 1;
        for (k, x) in v.iter().enumerate() {
            e.1[k] += x;
        }
    }
    let means: BTreeMap<u64, Vec<f64>> = acc
        .iter()
        .map(|(&s, (n, sum, _))| (s, sum.iter().map(|x| x / *n as f64).collect()))
        .collect();
    for (_, step, v) in table.rows() {
        let m = &means[&step];
        let e = acc.get_mut(&step).expect("step present");
        for (k, x) in v.iter().enumerate() {
            e.2[k] += (x - m[k]).powi(2);
        }
    }
    acc.into_iter()
        .map(|(step, (n, _, ss))| SummaryRow {
            step,
            count: n,
            mean: means[&step].clone(),
            se: ss
                .iter()
                .map(|s| if n > 1 { (s / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 })
                .collect(),
        })
        .collect()
}

/// An embedded acceptance check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    pub series: Vec<Series>,
}

/// An extra output file (checkpoint, orbit sample).
#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    pub suffix: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: ExperimentName,
    pub table: Table,
    pub summary: Vec<SummaryRow>,
    pub checks: Vec<Check>,
    pub failures: Vec<(u64, String)>,
    pub chart: Option<Chart>,
    pub attachments: Vec<Attachment>,
}

impl Outcome {
    /// Collects trial outputs (already in trial order) into an outcome with
    /// aggregates and a completion check.
    pub fn from_trials(experiment: ExperimentName, columns: Vec<&'static str>, trials: Vec<TrialOutput>) -> Self {
        let mut table = Table::new(columns);
        let mut failures = Vec::new();
        for (t, out) in trials.iter().enumerate() {
            table.append(t as u64, out);
            if let Some(f) = &out.failure {
                failures.push((t as u64, f.clone()));
            }
        }
        let summary = summarize(&table);
        let checks = vec![Check::new(
            "trials-completed",
            failures.is_empty(),
            format!("{} of {} trials aborted", failures.len(), trials.len()),
        )];
        Self {
            experiment,
            table,
            summary,
            checks,
            failures,
            chart: None,
            attachments: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Summary `(step, mean, se)` of one column.
    pub fn column_summary(&self, name: &str) -> Vec<(u64, f64, f64)> {
        let Some(k) = self.table.column_index(name) else {
            return Vec::new();
        };
        self.summary.iter().map(|r| (r.step, r.mean[k], r.se[k])).collect()
    }
}
