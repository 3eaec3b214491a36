//! Seeded Monte Carlo experiments on random two-point and Steiner
//! symmetrizations: configs, trial runner, checkpoints and report files.

pub mod checkpoint;
pub mod config;
pub mod csv;
pub mod error;
mod experiments;
pub mod outcome;
pub mod shapes;
pub mod svg;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentName};
pub use error::{LabError, Result};
pub use outcome::Outcome;

/// Environment variable consulted when no thread count is given.
pub const THREADS_ENV: &str = "LAB_THREADS";

/// Explicit count, else `LAB_THREADS`, else rayon's default (0).
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .unwrap_or(0)
}

/// Runs one experiment on a dedicated pool of `threads` workers (0 picks
/// the rayon default). Outputs do not depend on `threads`.
pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| experiments::dispatch(cfg))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| LabError::Io {
        path: path.to_owned(),
        source,
    })
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `<stem>.csv`, `<stem>_summary.csv`, `<stem>_checks.csv`, the
/// chart `<stem>.svg` and every attachment as `<stem>_<suffix>`. Returns the
/// written paths.
pub fn write_outputs(out: &Outcome, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    let mut written = Vec::new();
    let mut emit = |name: String, body: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
        let path = dir.join(name);
        let mut w = create(&path)?;
        body(&mut w).and_then(|_| w.flush()).map_err(io_at(&path))?;
        written.push(path);
        Ok(())
    };
    emit(format!("{stem}.csv"), &|w| csv::write_table(w, &out.table))?;
    emit(format!("{stem}_summary.csv"), &|w| {
        csv::write_summary(w, &out.table.columns, &out.summary)
    })?;
    emit(format!("{stem}_checks.csv"), &|w| {
        csv::write_checks(w, &out.checks, &out.failures)
    })?;
    if let Some(chart) = &out.chart {
        emit(format!("{stem}.svg"), &|w| w.write_all(svg::render(chart).as_bytes()))?;
    }
    for a in &out.attachments {
        emit(format!("{stem}_{}", a.suffix), &|w| w.write_all(&a.bytes))?;
    }
    Ok(written)
}
