//! Orbit density on the sphere and divergence audits of the concentrating
//! families.

use polarlab_core::orbits::{covering_radius, generating_heuristics, orbit_expand, DirectionSet};
use polarlab_core::sampling::{divergence_audit as audit, SamplerSpec};
use polarlab_core::Direction;

use super::{chart, sampler, Recorder};
use crate::config::ExperimentConfig;
use crate::csv::write_directions;
use crate::error::{config_err, Result};
use crate::outcome::{Attachment, Check, Outcome, TrialOutput};

fn default_start(dim: usize) -> Vec<f64> {
    (0..dim).map(|k| 1.0 + 0.37 * k as f64 + 0.11 * (k * k) as f64).collect()
}

/// Grows the folding orbit of one point under a finite direction set and
/// records its covering radius at each budget.
pub fn orbit_density(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dim;
    let spec = sampler(cfg, None, false)?;
    let SamplerSpec::FiniteIid { directions, .. } = spec else {
        return config_err("orbit-density reads G from a finite_iid sampler");
    };
    let g = DirectionSet::new(directions)?;
    let start = if cfg.orbit.start.is_empty() {
        default_start(d)
    } else {
        cfg.orbit.start.clone()
    };
    let x = Direction::new(start)?;
    let mut budgets = cfg.orbit.budgets.clone();
    budgets.sort_unstable();
    budgets.dedup();
    let (Some(&small), Some(&max)) = (budgets.first(), budgets.last()) else {
        return config_err("orbit budgets are empty");
    };
    if small == 0 || cfg.orbit.probes == 0 {
        return config_err("orbit budgets and probes must be positive");
    }

    let orbit = orbit_expand(&g, &x, max)?;
    let mut trial = TrialOutput::default();
    let mut radii = Vec::new();
    for &b in &budgets {
        let part = &orbit[..b.min(orbit.len())];
        let r = covering_radius(part, cfg.orbit.probes)?;
        radii.push(r);
        trial.push(b as u64, &[part.len() as f64, r]);
    }
    let mut out = Outcome::from_trials(cfg.experiment, vec!["orbit_size", "covering_radius"], vec![trial]);

    let prefix = orbit_expand(&g, &x, small)?;
    out.checks.push(Check::new(
        "budget-prefix",
        orbit.starts_with(&prefix),
        format!("expansion at budget {small} is a prefix of budget {max}"),
    ));
    let worst_norm = orbit
        .iter()
        .map(|p| (p.coords().iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    out.checks.push(Check::new(
        "unit-norm",
        worst_norm <= 1e-9,
        format!("max ||p| − 1| = {worst_norm:.3e}"),
    ));
    let shrinking = radii.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    out.checks.push(Check::new(
        "covering-nonincreasing",
        shrinking,
        "covering radius never grows with the budget",
    ));
    let target = cfg.tolerances.target.unwrap_or(0.05);
    let last = *radii.last().expect("nonempty budgets");
    out.checks.push(Check::new(
        "covering-below-target",
        last < target,
        format!("covering radius {last:.4e} at {} points vs target {target}", orbit.len()),
    ));
    let h = generating_heuristics(&g, cfg.orbit.max_denominator)?;
    out.checks.push(Check::new(
        "generating-set",
        h.spans && h.connected,
        format!(
            "spans: {}, connected: {}, irrational angle (heuristic, q ≤ {}): {}",
            h.spans, h.connected, cfg.orbit.max_denominator, h.irrational_angle
        ),
    ));

    let rows: Vec<&[f64]> = orbit.iter().map(|p| p.coords()).collect();
    let mut bytes = Vec::new();
    write_directions(&mut bytes, d, &rows).expect("writing to memory");
    out.attachments.push(Attachment {
        suffix: "orbit.csv".into(),
        bytes,
    });
    let mut c = chart(cfg, &out, "covering_radius", "covering radius", None);
    c.x_label = "budget".into();
    out.chart = Some(c);
    Ok(out)
}

/// Partial sums of the lower-bound terms for a Gaussian or Poisson family
/// over `steps` indices.
pub fn divergence_audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = sampler(cfg, None, false)?;
    let n = usize::try_from(cfg.steps).map_err(|_| crate::error::LabError::Config("too many steps".into()))?;
    let a = audit(&spec, cfg.dim, cfg.divergence.rho, cfg.divergence.half_width, n)?;
    let rec = Recorder::new(cfg);
    let mut trial = TrialOutput::default();
    for (k, (t, s)) in a.terms.iter().zip(&a.partial_sums).enumerate() {
        let step = k as u64 + 1;
        if rec.hit(step) {
            trial.push(step, &[*t, *s]);
        }
    }
    let mut out = Outcome::from_trials(cfg.experiment, vec!["term", "partial_sum"], vec![trial]);
    out.checks.push(Check::new(
        "partial-sums-increase",
        a.monotone,
        "every term is positive",
    ));
    let threshold = cfg.tolerances.target.unwrap_or(10.0);
    let first = a.first_exceeding(threshold);
    let scale = a.scale.map_or(String::new(), |s| format!("; probability scale {s:.4e}"));
    out.checks.push(Check::new(
        "partial-sum-exceeds",
        first.is_some(),
        match first {
            Some(n) => format!("partial sum exceeds {threshold} at N = {n}{scale}"),
            None => format!(
                "partial sum {:.4e} after {n} terms stays below {threshold}{scale}",
                a.partial_sums.last().copied().unwrap_or(0.0)
            ),
        },
    ));
    out.chart = Some(chart(cfg, &out, "partial_sum", "partial sum", None));
    Ok(out)
}
