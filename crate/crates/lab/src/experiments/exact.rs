//! Experiments on the closed-form cone and ellipsoid families.

use std::cell::RefCell;

use polarlab_core::exact::EllipsoidFunction;
use polarlab_core::sampling::{sample, AdversarialCone, AdversarialSteiner, SamplerSpec};
use polarlab_core::steiner::{eigen_gap, eval_gap_bound, steiner_ellipsoid};
use polarlab_core::{Direction, PolarParam};

use super::{chart, collect, initial, lower_check, run_trials, sampler, Recorder};
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result};
use crate::outcome::{Check, Outcome};

/// Whether the law of `U` is invariant under `U ↦ −U`.
fn symmetric_in_direction(spec: &SamplerSpec) -> bool {
    match spec {
        SamplerSpec::UniformPolar { .. } | SamplerSpec::UniformDirection | SamplerSpec::GaussianPolar { .. } => true,
        SamplerSpec::FiniteIid { directions, .. } => directions.iter().all(|u| {
            let v = u.neg();
            directions
                .iter()
                .any(|w| w.coords().iter().zip(v.coords()).all(|(a, b)| (a - b).abs() <= 1e-12))
        }),
        _ => false,
    }
}

/// Minimum of one column over rows at `step ≥ first`.
fn column_min(out: &Outcome, column: &str, first: u64) -> f64 {
    let k = out.table.column_index(column).expect("known column");
    out.table
        .rows()
        .filter(|(_, s, _)| *s >= first)
        .map(|(_, _, v)| v[k])
        .fold(f64::INFINITY, f64::min)
}

/// `E‖F_n − f*‖_∞ ≥ ‖f − f*‖_∞ 2^(−n)` for cones under laws symmetric in `±U`.
pub fn lower_cone(cfg: &ExperimentConfig) -> Result<Outcome> {
    let cone0 = initial(cfg)?.cone()?;
    if cone0.apex.norm() > 1.0 {
        return config_err("the apex must lie in the closed unit ball");
    }
    let spec = sampler(cfg, Some(SamplerSpec::UniformPolar { half_width: 2.0 }), false)?;
    let d0 = cone0.distance_to_sdr();
    let rec = Recorder::new(cfg);
    let results = run_trials(cfg, |_, rng, out| {
        let mut apex = cone0.apex.clone();
        for n in 0..=cfg.steps {
            if n > 0 {
                apex = sample(&spec, cfg.dim, n, rng)?.fold(&apex);
            }
            if rec.hit(n) {
                let r = apex.norm();
                out.push(n, &[r, r.min(1.0)]);
            }
        }
        Ok(None::<()>)
    });
    let (mut out, _) = collect(cfg, vec!["apex_norm", "sup"], results);
    out.checks.push(Check::new(
        "symmetric-law",
        symmetric_in_direction(&spec),
        "direction law invariant under U ↦ −U",
    ));
    let bound = |n: u64| Some(d0 * 0.5f64.powi(n.min(2000) as i32));
    let summary = out.column_summary("sup");
    out.checks
        .push(lower_check("exponential-lower-bound", &summary, cfg.tolerances.sigmas, bound));
    out.chart = Some(chart(cfg, &out, "sup", "E‖F_n − f*‖∞", Some(("‖f − f*‖ 2^(−n)", &bound))));
    Ok(out)
}

/// `E(ψ(⟨U, v⟩)) = 1/d − 3/(d(d+2))` for `U` uniform on the sphere.
pub fn expected_psi(dim: usize) -> f64 {
    let d = dim as f64;
    1.0 / d - 3.0 / (d * (d + 2.0))
}

/// Ellipsoids under uniform Steiner symmetrizations: the `3^(−n)` lower
/// bound, the one-step gap ratio and the per-sample gap bound.
pub fn lower_ellipsoid(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dim;
    let m0 = initial(cfg)?.ellipsoid_matrix(d)?;
    let f0 = EllipsoidFunction::new(m0.clone())?;
    let star = f0.mean_eigenvalue();
    let dist0 = f0.distance_to_sdr();
    let (hi0, lo0, gap0) = eigen_gap(&m0);
    if gap0 <= 0.0 {
        return config_err("the ellipsoid is already a ball");
    }
    let spec = sampler(cfg, Some(SamplerSpec::UniformDirection), false)?;
    if spec != SamplerSpec::UniformDirection {
        return config_err("lower-ellipsoid needs the uniform_direction sampler");
    }
    let observe = |hi: f64, lo: f64| [(hi - lo) / (2.0 * hi), (1.0 - star / hi).max(1.0 - lo / star).max(0.0), hi - lo];
    let first = observe(hi0, lo0);
    let rec = Recorder::new(cfg);
    let results = run_trials(cfg, |_, rng, out| {
        let mut m = m0.clone();
        let mut gap = gap0;
        if rec.hit(0) {
            out.push(0, &[first[0], first[1], first[2], 1.0, 1.0, 0.0]);
        }
        for n in 1..=cfg.steps {
            let u = sample(&spec, d, n, rng)?.u;
            let bound = eval_gap_bound(&m, &u)?;
            m = steiner_ellipsoid(&m, &u)?;
            let (hi, lo, g) = eigen_gap(&m);
            if rec.hit(n) {
                let o = observe(hi, lo);
                out.push(n, &[o[0], o[1], o[2], g / gap, bound / gap, g - bound]);
            }
            gap = g;
        }
        Ok(None::<()>)
    });
    let (mut out, _) = collect(
        cfg,
        vec!["lower", "distance", "gap", "gap_ratio", "bound_ratio", "bound_slack"],
        results,
    );
    let sigmas = cfg.tolerances.sigmas;
    let ratio = hi0 / lo0;
    out.checks.push(Check::new(
        "eigenvalue-ratio",
        ratio <= 2.0,
        format!("λmax/λmin = {ratio:.6}"),
    ));
    let bound = |n: u64| Some(0.25 * dist0 * (1.0f64 / 3.0).powi(n.min(2000) as i32));
    let lower = out.column_summary("lower");
    out.checks
        .push(lower_check("exponential-lower-bound", &lower, sigmas, bound));

    let step1 = |col: &str| out.column_summary(col).into_iter().find(|r| r.0 == 1);
    if let (Some(g), Some(b)) = (step1("gap_ratio"), step1("bound_ratio")) {
        out.checks.push(lower_check("extremal-gap-ratio", &[g], sigmas, |_| Some(1.0 / 3.0)));
        let c = 1.0 + hi0 / lo0;
        let exact = 1.0 - (c + 2.0) * expected_psi(d);
        out.checks.push(Check::new(
            "expected-gap-factor",
            (b.1 - exact).abs() <= sigmas * b.2,
            format!("Monte Carlo {:.6} ± {:.2e} vs exact {exact:.6}", b.1, b.2),
        ));
    }
    let slack = column_min(&out, "bound_slack", 1);
    out.checks.push(Check::new(
        "gap-bound-per-sample",
        slack >= -cfg.tolerances.gap,
        format!("min(gap − bound) = {slack:.3e}"),
    ));
    out.chart = Some(chart(cfg, &out, "lower", "E(λmax − λmin)/(2λmax)", Some(("¼‖f − f*‖ 3^(−n)", &bound))));
    Ok(out)
}

fn adversarial_base(spec: &SamplerSpec, dim: usize) -> Result<(SamplerSpec, f64)> {
    let (base, eps) = match spec {
        SamplerSpec::AdversarialCone { base, eps } | SamplerSpec::AdversarialSteiner { base, eps } => {
            ((**base).clone(), *eps)
        }
        _ => return config_err("expected an adversarial sampler"),
    };
    base.validate(dim)?;
    if base.is_feedback() {
        return config_err("the base law of an adversarial sampler must be a plain law");
    }
    Ok((base, eps))
}

/// Audit columns: count of base elements emitted so far, and whether every
/// emitted base element reproduced the next base draw exactly.
struct SubsequenceAudit<T> {
    draws: RefCell<Vec<T>>,
    served: usize,
    ok: bool,
}

impl<T: PartialEq> SubsequenceAudit<T> {
    fn new() -> Self {
        Self {
            draws: RefCell::new(Vec::new()),
            served: 0,
            ok: true,
        }
    }

    fn record(&mut self, value: &T, base_index: Option<usize>) {
        if let Some(i) = base_index {
            let draws = self.draws.borrow();
            self.ok &= i == self.served && draws.get(i) == Some(value);
            self.served += 1;
        }
    }

    fn columns(&self) -> [f64; 2] {
        [self.served as f64, if self.ok { 1.0 } else { 0.0 }]
    }
}

fn subsequence_check(out: &Outcome, min_served: f64) -> Check {
    let ok = column_min(out, "subsequence_ok", 0);
    let sk = out.table.column_index("served").expect("column");
    let mut last_served = f64::INFINITY;
    let mut prev_trial = None;
    let mut per_trial = Vec::new();
    for (t, _, v) in out.table.rows() {
        if prev_trial != Some(t) {
            if prev_trial.is_some() {
                per_trial.push(last_served);
            }
            prev_trial = Some(t);
        }
        last_served = v[sk];
    }
    per_trial.push(last_served);
    let fewest = per_trial.iter().copied().fold(f64::INFINITY, f64::min);
    Check::new(
        "base-subsequence",
        ok == 1.0 && fewest >= min_served,
        format!("emitted base elements match the base draws in order: {}; fewest served {fewest}", ok == 1.0),
    )
}

/// Adversarial interleaving that keeps the cone apex at distance at least
/// `|a₀| − ε` from the origin.
pub fn nonconv_cone(cfg: &ExperimentConfig) -> Result<Outcome> {
    let cone0 = initial(cfg)?.cone()?;
    let spec = sampler(cfg, None, true)?;
    if !matches!(spec, SamplerSpec::AdversarialCone { .. }) {
        return config_err("nonconv-cone needs the adversarial_cone sampler");
    }
    let (base, eps) = adversarial_base(&spec, cfg.dim)?;
    let r0 = cone0.apex.norm();
    let rec = Recorder::new(cfg);
    let results = run_trials(cfg, |_, rng, out| {
        let mut adv = AdversarialCone::new(&cone0.apex, eps)?;
        let mut audit = SubsequenceAudit::<PolarParam>::new();
        let mut apex = cone0.apex.clone();
        let mut k = 0;
        let mut min_norm = r0;
        if rec.hit(0) {
            let a = audit.columns();
            out.push(0, &[r0, r0, a[0], a[1]]);
        }
        for n in 1..=cfg.steps {
            let e = {
                let draws = &audit.draws;
                let mut next_base = || {
                    k += 1;
                    let w = sample(&base, cfg.dim, k, rng)?;
                    draws.borrow_mut().push(w.clone());
                    Ok(w)
                };
                adv.next(&apex, &mut next_base)?
            };
            audit.record(&e.value, e.base_index);
            apex = e.value.fold(&apex);
            min_norm = min_norm.min(apex.norm());
            if rec.hit(n) {
                let a = audit.columns();
                out.push(n, &[apex.norm(), min_norm, a[0], a[1]]);
            }
        }
        Ok(None::<()>)
    });
    let (mut out, _) = collect(cfg, vec!["apex_norm", "min_apex_norm", "served", "subsequence_ok"], results);
    let floor = r0 - eps;
    let lowest = column_min(&out, "min_apex_norm", 0);
    out.checks.push(Check::new(
        "apex-floor",
        lowest >= floor - 1e-12,
        format!("min |apex_n| = {lowest:.6} vs |apex_0| − ε = {floor:.6}"),
    ));
    out.checks
        .push(subsequence_check(&out, (cfg.steps / 2) as f64));
    out.chart = Some(chart(cfg, &out, "apex_norm", "|apex_n|", None));
    Ok(out)
}

/// Adversarial walk on the sphere that keeps the eigenvalue gap of an
/// ellipsoid above `gap₀ ∏ (1 − (C+2) sin²(ε/k))`.
pub fn nonconv_steiner(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = cfg.dim;
    let m0 = initial(cfg)?.ellipsoid_matrix(d)?;
    let spec = sampler(cfg, None, true)?;
    if !matches!(spec, SamplerSpec::AdversarialSteiner { .. }) {
        return config_err("nonconv-steiner needs the adversarial_steiner sampler");
    }
    let (base, eps) = adversarial_base(&spec, d)?;
    let gap0 = eigen_gap(&m0).2;
    let rec = Recorder::new(cfg);
    let tol = cfg.tolerances.gap;
    let results = run_trials(cfg, |_, rng, out| {
        let mut adv = AdversarialSteiner::new(&m0, eps)?;
        let mut audit = SubsequenceAudit::<Direction>::new();
        let mut m = m0.clone();
        let mut k = 0;
        let mut worst = f64::INFINITY;
        if rec.hit(0) {
            let a = audit.columns();
            out.push(0, &[gap0, gap0, 0.0, a[0], a[1]]);
        }
        for n in 1..=cfg.steps {
            let e = {
                let draws = &audit.draws;
                let mut next_base = || {
                    k += 1;
                    let u = sample(&base, d, k, rng)?.u;
                    draws.borrow_mut().push(u.clone());
                    Ok(u)
                };
                adv.next(&mut next_base)?
            };
            audit.record(&e.value, e.base_index);
            m = steiner_ellipsoid(&m, &e.value)?;
            let gap = eigen_gap(&m).2;
            let bound = gap0 * adv.gap_factor();
            worst = worst.min(gap - bound);
            if rec.hit(n) {
                let a = audit.columns();
                out.push(n, &[gap, bound, worst, a[0], a[1]]);
            }
        }
        Ok(None::<()>)
    });
    let (mut out, _) = collect(
        cfg,
        vec!["gap", "gap_bound", "min_slack", "served", "subsequence_ok"],
        results,
    );
    let slack = column_min(&out, "min_slack", 1);
    out.checks.push(Check::new(
        "gap-floor",
        slack >= -tol,
        format!("min(gap_n − gap₀∏(1 − (C+2)sin²(ε/k))) = {slack:.3e}"),
    ));
    out.checks.push(subsequence_check(&out, 1.0));
    out.chart = Some(chart(cfg, &out, "gap", "λmax − λmin", None));
    Ok(out)
}
