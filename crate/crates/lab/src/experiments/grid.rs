//! Experiments on lattice functions and sets.

use polarlab_core::geometry::{ball_volume, sphere_area, unit_ball_volume};
use polarlab_core::metrics::{hausdorff, i_functional, signed_distance};
use polarlab_core::polarize::{polarize_grid, polarize_set};
use polarlab_core::sampling::{sample, SamplerSpec};
use polarlab_core::steiner::steiner_grid;
use polarlab_core::{GridFunction, GridSet, Mode};

use super::{
    chart, collect, initial, lattice, lower_check, monotone_check, run_trials, sampler, upper_check, Recorder,
};
use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result};
use crate::outcome::{Attachment, Check, Outcome};
use crate::shapes::support_radius;

fn function_checkpoint(f: &GridFunction) -> Attachment {
    let mut bytes = Vec::new();
    checkpoint::write_grid(&mut bytes, f).expect("writing to memory");
    Attachment {
        suffix: "final_trial0.bin".into(),
        bytes,
    }
}

fn set_checkpoint(a: &GridSet) -> Attachment {
    function_checkpoint(&a.indicator())
}

/// `C = 2d m(B_{2L})`.
fn rate_constant(dim: usize, l: f64) -> f64 {
    2.0 * dim as f64 * ball_volume(dim, 2.0 * l)
}

/// Per-step slack of the monotonicity audits for sup distance and `𝓘`.
/// Exact mirrors permute cells, so only rounding is allowed; interpolation
/// may raise either quantity by `O(h)` times the oscillation of `f` over one
/// cell, scaled for `𝓘` by `m(supp f) · max |x|` over the support.
fn monotone_slack(cfg: &ExperimentConfig, f0: &GridFunction) -> (f64, f64) {
    let tol = cfg.tolerances.monotone;
    if cfg.mode == Mode::MirrorExact {
        return (tol, tol);
    }
    let lat = f0.lattice();
    let osc = cfg.tolerances.h_factor * f0.modulus_of_continuity(lat.spacing());
    let support = f0.values().iter().filter(|v| **v > 0.0).count() as f64 * lat.cell_volume();
    (tol + osc, tol + osc * support * support_radius(f0))
}

/// Sup, L1 and `𝓘` along random polarizations of a grid function.
pub fn conv_polar(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lat = lattice(cfg)?;
    let f0 = initial(cfg)?.function(lat)?;
    let star = f0.sdr();
    let spec = sampler(
        cfg,
        Some(SamplerSpec::UniformPolar {
            half_width: lat.half_width(),
        }),
        false,
    )?;
    let rec = Recorder::new(cfg);
    let results = run_trials(cfg, |t, rng, out| {
        let mut f = f0.clone();
        for n in 0..=cfg.steps {
            if n > 0 {
                f = polarize_grid(&f, &sample(&spec, cfg.dim, n, rng)?, cfg.mode)?;
            }
            if rec.hit(n) {
                out.push(n, &[f.sup_distance(&star)?, f.l1_distance(&star)?, i_functional(&f)]);
            }
        }
        Ok((t == 0).then_some(f))
    });
    let (mut out, first) = collect(cfg, vec!["sup", "l1", "i_value"], results);
    let (sup_tol, i_tol) = monotone_slack(cfg, &f0);
    out.checks.push(monotone_check("monotone-i", &out, "i_value", i_tol));
    out.checks.push(monotone_check("monotone-sup", &out, "sup", sup_tol));
    if let Some(target) = cfg.tolerances.target {
        out.checks.push(first_below(&out, "sup", target));
    }
    out.chart = Some(chart(cfg, &out, "sup", "sup distance to f*", None));
    out.attachments.extend(first.map(|f| function_checkpoint(&f)));
    Ok(out)
}

/// Passes iff every trial records `column < target` at some step; reports
/// the latest first-hitting step over trials.
fn first_below(out: &Outcome, column: &str, target: f64) -> Check {
    let k = out.table.column_index(column).expect("known column");
    let trials = out.table.rows().map(|(t, _, _)| t).max().map_or(0, |t| t + 1);
    let mut hit: Vec<Option<u64>> = vec![None; trials as usize];
    for (t, s, v) in out.table.rows() {
        let h = &mut hit[t as usize];
        if h.is_none() && v[k] < target {
            *h = Some(s);
        }
    }
    let missing = hit.iter().filter(|h| h.is_none()).count();
    let latest = hit.iter().flatten().max();
    Check::new(
        format!("{column}-below-target"),
        missing == 0 && trials > 0,
        format!(
            "{missing} of {trials} trials never below {target:e}; latest first hit at n={}",
            latest.map_or("-".into(), |n| n.to_string())
        ),
    )
}

/// Half-width `L` of a uniform polar law, and a check that the initial data
/// lives in `B_L`.
fn uniform_half_width(spec: &SamplerSpec, f0: &GridFunction) -> Result<f64> {
    let SamplerSpec::UniformPolar { half_width } = spec else {
        return config_err("the rate bound needs a uniform_polar sampler");
    };
    let r = support_radius(f0);
    if r > *half_width {
        return config_err(format!(
            "initial data reaches radius {r:.4} beyond L = {half_width}"
        ));
    }
    Ok(*half_width)
}

/// Rates under uniform polarizations: symmetric difference for sets, L1 and
/// Hölder sup rates for functions.
pub fn rate_uniform(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lat = lattice(cfg)?;
    let init = initial(cfg)?;
    let f0 = init.function(lat)?;
    let spec = sampler(
        cfg,
        Some(SamplerSpec::UniformPolar {
            half_width: lat.half_width(),
        }),
        false,
    )?;
    let l = uniform_half_width(&spec, &f0)?;
    let (d, h) = (cfg.dim, lat.spacing());
    let c = rate_constant(d, l);
    let offset = (d as f64) * 2f64.powi(d as i32 + 1);
    let sigmas = cfg.tolerances.sigmas;
    let hf = cfg.tolerances.h_factor;
    let rec = Recorder::new(cfg);

    if init.is_set() {
        let a0 = init.set(lat)?;
        let star = a0.sdr();
        let per = init.perimeter(d).expect("sets have a perimeter");
        let results = run_trials(cfg, |t, rng, out| {
            let mut a = a0.clone();
            for n in 0..=cfg.steps {
                if n > 0 {
                    a = polarize_set(&a, &sample(&spec, d, n, rng)?, cfg.mode)?;
                }
                if rec.hit(n) {
                    out.push(n, &[a.symm_diff_count(&star)? as f64 * lat.cell_volume()]);
                }
            }
            Ok((t == 0).then_some(a))
        });
        let (mut out, first) = collect(cfg, vec!["symm_diff"], results);
        let bound = |n: u64| Some(c / (n as f64 + offset) + hf * h * per);
        let summary = out.column_summary("symm_diff");
        out.checks.push(upper_check("symm-diff-rate", &summary, sigmas, bound));
        out.chart = Some(chart(
            cfg,
            &out,
            "symm_diff",
            "m(A_n △ A*)",
            Some(("C/(n + d 2^(d+1)) + allowance", &bound)),
        ));
        out.attachments.extend(first.map(|a| set_checkpoint(&a)));
        return Ok(out);
    }

    let star = f0.sdr();
    let sup_f = f0.max_value();
    let holder = init.holder();
    let results = run_trials(cfg, |t, rng, out| {
        let mut f = f0.clone();
        for n in 0..=cfg.steps {
            if n > 0 {
                f = polarize_grid(&f, &sample(&spec, d, n, rng)?, cfg.mode)?;
            }
            if rec.hit(n) {
                out.push(n, &[f.l1_distance(&star)?, f.sup_distance(&star)?, i_functional(&f)]);
            }
        }
        Ok((t == 0).then_some(f))
    });
    let (mut out, first) = collect(cfg, vec!["l1", "sup", "i_value"], results);
    // Boundary-layer allowance for the L1 norm: h_factor cells around a
    // sphere of radius L.
    let l1_allow = hf * h * sup_f * sphere_area(d) * l.powi(d as i32 - 1);
    let l1_bound = |n: u64| (n > 0).then(|| c * sup_f / n as f64 + l1_allow);
    let summary = out.column_summary("l1");
    out.checks.push(upper_check("l1-rate", &summary, sigmas, l1_bound));
    if let Some((hc, alpha)) = holder {
        let e = alpha / (d as f64 + alpha);
        let sup_bound = |n: u64| (n > 0).then(|| 10.0 * hc * l.powf(alpha) * (n as f64).powf(-e) + hf * h * hc);
        let summary = out.column_summary("sup");
        out.checks.push(upper_check("holder-sup-rate", &summary, sigmas, sup_bound));
    }
    let (sup_tol, i_tol) = monotone_slack(cfg, &f0);
    out.checks.push(monotone_check("monotone-i", &out, "i_value", i_tol));
    out.checks.push(monotone_check("monotone-sup", &out, "sup", sup_tol));
    out.chart = Some(chart(cfg, &out, "l1", "‖F_n − f*‖₁", Some(("C‖f‖/n + allowance", &l1_bound))));
    out.attachments.extend(first.map(|f| function_checkpoint(&f)));
    Ok(out)
}

/// Per-step audit of `z_n ≤ z_(n−1)(1 − z_(n−1))` for `z_n = E m(A_n △ A*)/C`
/// and of the expected single-step drop behind it.
pub fn recursion_audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lat = lattice(cfg)?;
    let init = initial(cfg)?;
    if !init.is_set() {
        return config_err("recursion-audit evolves a set");
    }
    let a0 = init.set(lat)?;
    let star = a0.sdr();
    let spec = sampler(
        cfg,
        Some(SamplerSpec::UniformPolar {
            half_width: lat.half_width(),
        }),
        false,
    )?;
    let l = uniform_half_width(&spec, &a0.indicator())?;
    let d = cfg.dim;
    let c = rate_constant(d, l);
    let cell = lat.cell_volume();
    let rec = Recorder::every(cfg.steps);
    let results = run_trials(cfg, |_, rng, out| {
        let mut a = a0.clone();
        let mut prev = a.symm_diff_count(&star)? as f64 * cell;
        out.push(0, &[prev, 0.0]);
        for n in 1..=cfg.steps {
            a = polarize_set(&a, &sample(&spec, d, n, rng)?, cfg.mode)?;
            let now = a.symm_diff_count(&star)? as f64 * cell;
            if rec.hit(n) {
                // Drop in excess of the guaranteed conditional expectation.
                out.push(n, &[now, prev - now - prev * prev / c]);
            }
            prev = now;
        }
        Ok(None::<()>)
    });
    let (mut out, _) = collect(cfg, vec!["symm_diff", "drop_excess"], results);
    let sigmas = cfg.tolerances.sigmas;
    // Lattice noise of a single interpolated step, in cells.
    let allow = cfg.tolerances.h_factor * cell;

    let z0 = a0.symm_diff_count(&star)? as f64 * cell / c;
    let needed = d as f64 * 2f64.powi(d as i32 + 1);
    out.checks.push(Check::new(
        "initial-z",
        1.0 / z0 >= needed,
        format!("1/z_0 = {:.4} vs d 2^(d+1) = {needed}", 1.0 / z0),
    ));

    // Single steps are too skewed for a normal interval (most trials move
    // nothing), so each trial's excess is averaged over its steps first.
    let k = out.table.column_index("drop_excess").expect("column");
    let mut per_trial = vec![(0.0, 0u64); cfg.trials as usize];
    for (t, s, v) in out.table.rows() {
        if s > 0 {
            per_trial[t as usize].0 += v[k];
            per_trial[t as usize].1 += 1;
        }
    }
    let means: Vec<f64> = per_trial.iter().filter(|p| p.1 > 0).map(|p| p.0 / p.1 as f64).collect();
    let nt = means.len() as f64;
    let mean = means.iter().sum::<f64>() / nt;
    let se = if nt > 1.0 {
        (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (nt - 1.0) / nt).sqrt()
    } else {
        0.0
    };
    out.checks.push(lower_check("expected-drop", &[(cfg.steps, mean, se)], sigmas, |_| Some(-allow)));

    let sd = out.column_summary("symm_diff");
    let mut violations = 0;
    let mut tightest = (0u64, f64::INFINITY);
    for w in sd.windows(2) {
        let (zp, sp) = (w[0].1 / c, w[0].2 / c);
        let (zn, sn) = (w[1].1 / c, w[1].2 / c);
        let slack = zp * (1.0 - zp) - zn + sigmas * (sp + sn) + allow / c;
        if slack < 0.0 {
            violations += 1;
        }
        if slack < tightest.1 {
            tightest = (w[1].0, slack);
        }
    }
    out.checks.push(Check::new(
        "recursion",
        violations == 0,
        format!(
            "{violations} violations; tightest at n={} with slack {:.3e}",
            tightest.0, tightest.1
        ),
    ));
    let zs: Vec<(u64, f64)> = sd.iter().map(|&(s, m, _)| (s, m / c)).collect();
    let bound = move |n: u64| Some(1.0 / (n as f64 + needed));
    let mut ch = chart(cfg, &out, "symm_diff", "z_n", Some(("1/(n + d 2^(d+1))", &bound)));
    ch.series[0].name = "z_n".into();
    ch.series[0].points = zs.iter().map(|&(s, z)| (s as f64, z)).collect();
    out.chart = Some(ch);
    Ok(out)
}

/// L1 rate of uniform random Steiner symmetrizations.
pub fn steiner_rate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lat = lattice(cfg)?;
    let f0 = initial(cfg)?.function(lat)?;
    let star = f0.sdr();
    let spec = sampler(cfg, Some(SamplerSpec::UniformDirection), false)?;
    if spec != SamplerSpec::UniformDirection {
        return config_err("steiner-rate needs the uniform_direction sampler");
    }
    let d = cfg.dim;
    let l = support_radius(&f0);
    let c = rate_constant(d, l);
    let sup_f = f0.max_value();
    let rec = Recorder::new(cfg);
    let results = run_trials(cfg, |t, rng, out| {
        let mut f = f0.clone();
        for n in 0..=cfg.steps {
            if n > 0 {
                f = steiner_grid(&f, &sample(&spec, d, n, rng)?.u)?;
            }
            if rec.hit(n) {
                out.push(n, &[f.l1_distance(&star)?, f.sup_distance(&star)?, i_functional(&f)]);
            }
        }
        Ok((t == 0).then_some(f))
    });
    let (mut out, first) = collect(cfg, vec!["l1", "sup", "i_value"], results);
    let allow = cfg.tolerances.h_factor * lat.spacing() * sup_f * sphere_area(d) * l.powi(d as i32 - 1);
    let bound = |n: u64| (n > 0).then(|| c * sup_f / n as f64 + allow);
    let summary = out.column_summary("l1");
    out.checks
        .push(upper_check("l1-rate", &summary, cfg.tolerances.sigmas, bound));
    out.chart = Some(chart(cfg, &out, "l1", "‖F_n − f*‖₁", Some(("C‖f‖/n + allowance", &bound))));
    out.attachments.extend(first.map(|f| function_checkpoint(&f)));
    Ok(out)
}

/// Offset `h` of the auxiliary function `[h + dist(·, ∁K) − dist(·, K)]⁺`.
const AUX_OFFSET: f64 = 0.5;

/// Hausdorff convergence of a set and of its boundary, with the auxiliary
/// distance function polarized alongside for the parallel-set radii bound.
pub fn compact_hausdorff(cfg: &ExperimentConfig) -> Result<Outcome> {
    let lat = lattice(cfg)?;
    let init = initial(cfg)?;
    if !init.is_set() {
        return config_err("compact-hausdorff evolves a set");
    }
    let k0 = init.set(lat)?;
    let star = k0.sdr();
    let star_boundary = star.boundary();
    let aux0 = polarlab_core::metrics::aux_distance_function(&k0, AUX_OFFSET)?;
    let aux_star = aux0.sdr();
    let spec = sampler(cfg, None, false)?;
    let (d, h) = (cfg.dim, lat.spacing());

    // ρ(t) from the signed distance of K: radius of the ball with the volume
    // of {φ > −t}.
    let phi = signed_distance(&k0)?;
    let mut sorted: Vec<f64> = phi.values().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let rho = move |t: f64| {
        let count = sorted.partition_point(|&v| v > -t);
        (count as f64 * lat.cell_volume() / unit_ball_volume(d)).powf(1.0 / d as f64)
    };
    let rho0 = rho(0.0);

    let rec = Recorder::new(cfg);
    let results = run_trials(cfg, |t, rng, out| {
        let mut k = k0.clone();
        let mut f = aux0.clone();
        for n in 0..=cfg.steps {
            if n > 0 {
                let w = sample(&spec, d, n, rng)?;
                k = polarize_set(&k, &w, cfg.mode)?;
                f = polarize_grid(&f, &w, cfg.mode)?;
            }
            if rec.hit(n) {
                let eps = f.sup_distance(&aux_star)?;
                let radii = (rho(eps) - rho0).abs().max((rho(-eps) - rho0).abs());
                out.push(
                    n,
                    &[
                        hausdorff(&k, &star)?,
                        hausdorff(&k.boundary(), &star_boundary)?,
                        k.symm_diff_count(&star)? as f64 * lat.cell_volume(),
                        eps,
                        radii,
                    ],
                );
            }
        }
        Ok((t == 0).then_some(k))
    });
    let (mut out, first) = collect(
        cfg,
        vec!["hausdorff", "boundary_hausdorff", "symm_diff", "aux_sup", "radii_bound"],
        results,
    );

    let target = cfg.tolerances.target.unwrap_or(4.0) * h;
    let hk = out.table.column_index("hausdorff").expect("column");
    let bk = out.table.column_index("boundary_hausdorff").expect("column");
    let mut hit: Vec<Option<u64>> = vec![None; cfg.trials as usize];
    for (t, s, v) in out.table.rows() {
        let e = &mut hit[t as usize];
        if e.is_none() && v[hk] < target && v[bk] < target {
            *e = Some(s);
        }
    }
    let missing = hit.iter().filter(|e| e.is_none()).count();
    out.checks.push(Check::new(
        "hausdorff-below-target",
        missing == 0,
        format!(
            "{missing} of {} trials never below {target:.4e}; latest first hit at n={}",
            cfg.trials,
            hit.iter().flatten().max().map_or("-".into(), |n| n.to_string())
        ),
    ));

    // Boundary distance against twice the parallel-set radii bound plus a
    // lattice allowance.
    let allow = cfg.tolerances.h_factor * h;
    let rk = out.table.column_index("radii_bound").expect("column");
    let (mut bad, mut worst) = (0usize, f64::NEG_INFINITY);
    for (_, _, v) in out.table.rows() {
        let excess = v[bk] - (2.0 * v[rk] + allow);
        worst = worst.max(excess);
        if excess > 0.0 {
            bad += 1;
        }
    }
    out.checks.push(Check::new(
        "radii-bound",
        bad == 0,
        format!("{bad} rows exceed 2·radii + {allow:.3e}; worst excess {worst:.3e}"),
    ));

    out.chart = Some(chart(cfg, &out, "boundary_hausdorff", "d_H(∂K_n, ∂K*)", None));
    out.attachments.extend(first.map(|k| set_checkpoint(&k)));
    Ok(out)
}
