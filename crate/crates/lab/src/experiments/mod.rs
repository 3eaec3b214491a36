//! The named experiments. Each trial draws from its own stream
//! `trial_rng(seed, trial)`, so results do not depend on the worker count.

mod exact;
mod grid;
mod misc;

use polarlab_core::sampling::{trial_rng, SamplerSpec};
use polarlab_core::Lattice;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentName};
use crate::error::{config_err, Result};
use crate::outcome::{Chart, Check, Outcome, Series, TrialOutput};
use crate::shapes::Initial;

pub fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentName::ConvPolar => grid::conv_polar(cfg),
        ExperimentName::RateUniform => grid::rate_uniform(cfg),
        ExperimentName::RecursionAudit => grid::recursion_audit(cfg),
        ExperimentName::SteinerRate => grid::steiner_rate(cfg),
        ExperimentName::CompactHausdorff => grid::compact_hausdorff(cfg),
        ExperimentName::LowerCone => exact::lower_cone(cfg),
        ExperimentName::LowerEllipsoid => exact::lower_ellipsoid(cfg),
        ExperimentName::NonconvCone => exact::nonconv_cone(cfg),
        ExperimentName::NonconvSteiner => exact::nonconv_steiner(cfg),
        ExperimentName::OrbitDensity => misc::orbit_density(cfg),
        ExperimentName::DivergenceAudit => misc::divergence_audit(cfg),
    }
}

/// Runs every trial on the current pool and returns the outputs in trial
/// order, each with the payload its closure produced.
fn run_trials<X, F>(cfg: &ExperimentConfig, f: F) -> Vec<(TrialOutput, Option<X>)>
where
    X: Send,
    F: Fn(u64, &mut ChaCha8Rng, &mut TrialOutput) -> polarlab_core::Result<Option<X>> + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let mut out = TrialOutput::default();
            match f(t, &mut rng, &mut out) {
                Ok(x) => (out, x),
                Err(e) => {
                    out.fail(e);
                    (out, None)
                }
            }
        })
        .collect()
}

/// Splits trial outputs into an outcome and the payload of trial 0.
fn collect<X>(
    cfg: &ExperimentConfig,
    columns: Vec<&'static str>,
    results: Vec<(TrialOutput, Option<X>)>,
) -> (Outcome, Option<X>) {
    let mut first = None;
    let outs = results
        .into_iter()
        .enumerate()
        .map(|(t, (out, x))| {
            if t == 0 {
                first = x;
            }
            out
        })
        .collect();
    (Outcome::from_trials(cfg.experiment, columns, outs), first)
}

fn lattice(cfg: &ExperimentConfig) -> Result<Lattice> {
    match &cfg.grid {
        Some(g) => Ok(Lattice::new(cfg.dim, g.half_width, g.cells)?),
        None => config_err(format!("{} needs a grid", cfg.experiment)),
    }
}

fn initial(cfg: &ExperimentConfig) -> Result<&Initial> {
    cfg.initial
        .as_ref()
        .map_or_else(|| config_err(format!("{} needs initial data", cfg.experiment)), Ok)
}

/// The configured sampler or `default`; feedback rules are rejected unless
/// `feedback` is set.
fn sampler(cfg: &ExperimentConfig, default: Option<SamplerSpec>, feedback: bool) -> Result<SamplerSpec> {
    let spec = match (&cfg.sampler, default) {
        (Some(s), _) => s.clone(),
        (None, Some(d)) => d,
        (None, None) => return config_err(format!("{} needs a sampler", cfg.experiment)),
    };
    spec.validate(cfg.dim)?;
    if spec.is_feedback() != feedback {
        return config_err(if feedback {
            "this experiment needs an adversarial sampler"
        } else {
            "adversarial samplers need the nonconv experiments"
        });
    }
    Ok(spec)
}

/// Recorded steps as a membership test.
struct Recorder(Vec<u64>);

impl Recorder {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self(cfg.record.steps(cfg.steps))
    }

    fn every(steps: u64) -> Self {
        Self((0..=steps).collect())
    }

    fn hit(&self, step: u64) -> bool {
        self.0.binary_search(&step).is_ok()
    }
}

/// Worst `mean − bound` over the summary, with a pass iff
/// `mean ≤ bound + sigmas·se` everywhere the bound is defined.
fn upper_check(
    name: &str,
    summary: &[(u64, f64, f64)],
    sigmas: f64,
    bound: impl Fn(u64) -> Option<f64>,
) -> Check {
    side_check(name, summary, sigmas, bound, true)
}

/// Pass iff `mean ≥ bound − sigmas·se` everywhere the bound is defined.
fn lower_check(
    name: &str,
    summary: &[(u64, f64, f64)],
    sigmas: f64,
    bound: impl Fn(u64) -> Option<f64>,
) -> Check {
    side_check(name, summary, sigmas, bound, false)
}

fn side_check(
    name: &str,
    summary: &[(u64, f64, f64)],
    sigmas: f64,
    bound: impl Fn(u64) -> Option<f64>,
    upper: bool,
) -> Check {
    let mut worst: Option<(u64, f64, f64, f64)> = None;
    let mut failures = 0;
    for &(step, mean, se) in summary {
        let Some(b) = bound(step) else { continue };
        // Margin in standard errors; positive is safe.
        let gap = if upper { b - mean } else { mean - b };
        let ok = gap + sigmas * se >= 0.0;
        if !ok {
            failures += 1;
        }
        let score = if se > 0.0 { gap / se } else if gap >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        if worst.map_or(true, |w| score < w.3) {
            worst = Some((step, mean, b, score));
        }
    }
    match worst {
        None => Check::new(name, false, "no step to check"),
        Some((step, mean, b, score)) => Check::new(
            name,
            failures == 0,
            format!(
                "{failures} violations; tightest at n={step}: mean {mean:.6e} vs bound {b:.6e} ({score:.2} SE)"
            ),
        ),
    }
}

/// Per-trial audit that a recorded column never increases by more than
/// `tol`.
fn monotone_check(name: &str, out: &Outcome, column: &str, tol: f64) -> Check {
    let Some(k) = out.table.column_index(column) else {
        return Check::new(name, false, format!("no column {column}"));
    };
    let mut prev: Option<(u64, f64)> = None;
    let (mut violations, mut worst) = (0usize, 0.0f64);
    for (trial, _, v) in out.table.rows() {
        if let Some((t, p)) = prev {
            if t == trial {
                let up = v[k] - p;
                worst = worst.max(up);
                if up > tol {
                    violations += 1;
                }
            }
        }
        prev = Some((trial, v[k]));
    }
    Check::new(
        name,
        violations == 0,
        format!("{violations} increases above {tol:.3e}; largest increase {worst:.3e}"),
    )
}

/// Reference curve evaluated at a step.
type BoundFn<'a> = dyn Fn(u64) -> Option<f64> + 'a;

fn chart(
    cfg: &ExperimentConfig,
    out: &Outcome,
    column: &str,
    y_label: &str,
    bound: Option<(&str, &BoundFn)>,
) -> Chart {
    let mean = out.column_summary(column);
    let mut series = vec![Series {
        name: format!("mean {column}"),
        points: mean.iter().map(|&(s, m, _)| (s as f64, m)).collect(),
    }];
    if let Some((name, b)) = bound {
        series.push(Series {
            name: name.to_owned(),
            points: mean
                .iter()
                .filter_map(|&(s, _, _)| b(s).map(|v| (s as f64, v)))
                .collect(),
        });
    }
    Chart {
        title: format!("{} (d = {}, {} trials)", cfg.experiment, cfg.dim, cfg.trials),
        x_label: "step n".into(),
        y_label: y_label.into(),
        log_log: cfg.output.log_log,
        series,
    }
}
