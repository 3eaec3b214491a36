//! End-to-end acceptance run: one line per criterion with its measured
//! runtime against the budget. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use polarlab::config::{GridParams, Record};
use polarlab::shapes::Initial;
use polarlab::{run, ExperimentConfig, ExperimentName, Outcome};
use polarlab_core::metrics::i_functional;
use polarlab_core::orbits::DirectionSet;
use polarlab_core::polarize::{polarization_drop, polarize_grid};
use polarlab_core::sampling::{trial_rng, uniform_direction, RadialLaw, SamplerSpec, Schedule};
use polarlab_core::steiner::{eigen_gap, ellipsoid_to_ball, eval_gap_bound, steiner_ellipsoid, steiner_ellipsoid_seq, steiner_grid};
use polarlab_core::{Direction, GridFunction, Lattice, Mode, PolarParam, SymMatrix};
use rand::Rng;

type Verdict = (bool, String);
type Criterion = (&'static str, u64, fn() -> Verdict);

fn sorted_bits(f: &GridFunction) -> Vec<u64> {
    let mut v: Vec<u64> = f.values().iter().map(|x| x.to_bits()).collect();
    v.sort_unstable();
    v
}

/// Random values on a disk of radius 0.9 in a `[-1, 1]²` lattice.
fn random_grid<R: Rng>(n: usize, rng: &mut R) -> GridFunction {
    let lat = Lattice::new(2, 1.0, n).unwrap();
    GridFunction::from_fn(lat, |x| {
        let v = if rng.random_bool(0.2) { 0.5 } else { rng.random::<f64>() };
        if x[0] * x[0] + x[1] * x[1] < 0.81 {
            v
        } else {
            0.0
        }
    })
    .unwrap()
}

fn lattice_mirror<R: Rng>(n: usize, rng: &mut R) -> PolarParam {
    let h = 2.0 / n as f64;
    let k = rng.random_range(1..n);
    PolarParam::new(k as f64 * h, Direction::axis(2, rng.random_range(0..2), rng.random_bool(0.5))).unwrap()
}

fn polarization_identity() -> Verdict {
    let mut rng = trial_rng(1, 0);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let f = random_grid(64, &mut rng);
        let w = lattice_mirror(64, &mut rng);
        let g = polarize_grid(&f, &w, Mode::MirrorExact).unwrap();
        let drop = i_functional(&f) - i_functional(&g);
        worst = worst.max((polarization_drop(&f, &w).unwrap() - drop).abs());
    }
    (worst <= 1e-10, format!("200 pairs on 64², max |identity − drop| = {worst:.2e}"))
}

fn equimeasurability() -> Verdict {
    let mut rng = trial_rng(2, 0);
    let (mut multiset, mut expand) = (0, 0);
    for k in 0..1000 {
        let f = random_grid(64, &mut rng);
        let g = random_grid(64, &mut rng);
        let (sf, sg) = if k < 500 {
            let w = lattice_mirror(64, &mut rng);
            (polarize_grid(&f, &w, Mode::MirrorExact).unwrap(), polarize_grid(&g, &w, Mode::MirrorExact).unwrap())
        } else {
            let u = Direction::axis(2, rng.random_range(0..2), true);
            (steiner_grid(&f, &u).unwrap(), steiner_grid(&g, &u).unwrap())
        };
        if sorted_bits(&sf) != sorted_bits(&f) || sorted_bits(&sg) != sorted_bits(&g) {
            multiset += 1;
        }
        if sf.sup_distance(&sg).unwrap() > f.sup_distance(&g).unwrap() {
            expand += 1;
        }
    }
    (
        multiset == 0 && expand == 0,
        format!("500 polarizations and 500 axis Steiner maps: {multiset} multiset changes, {expand} expansions"),
    )
}

fn random_spd<R: Rng>(d: usize, rng: &mut R) -> SymMatrix {
    let a: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = (0..d).map(|k| a[k * d + i] * a[k * d + j]).sum::<f64>() + if i == j { 0.3 } else { 0.0 };
        }
    }
    SymMatrix::new(d, m).unwrap()
}

fn ellipsoid_calculus() -> Verdict {
    let mut rng = trial_rng(3, 0);
    let (mut eig, mut det, mut gap, mut ball) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut wrong_len = 0;
    for k in 0..1000 {
        let d = 2 + k % 4;
        let m = random_spd(d, &mut rng);
        let u = uniform_direction(d, &mut rng);
        let m1 = steiner_ellipsoid(&m, &u).unwrap();
        let lambda = m.quad_form(u.coords());
        let mu = m1.mul_vec(u.coords());
        eig = eig.max(mu.iter().zip(u.coords()).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max));
        det = det.max((m1.det() - m.det()).abs() / m.det());
        gap = gap.max(eval_gap_bound(&m, &u).unwrap() - eigen_gap(&m1).2);

        let unit = m.scale(m.det().powf(-1.0 / d as f64));
        let dirs = ellipsoid_to_ball(&unit).unwrap();
        if dirs.len() != d - 1 {
            wrong_len += 1;
        }
        let end = steiner_ellipsoid_seq(&unit, &dirs).unwrap();
        ball = ball.max(end.max_abs_diff(&SymMatrix::identity(d)));
    }
    (
        eig <= 1e-9 && det <= 1e-9 && gap <= 1e-9 && ball <= 1e-8 && wrong_len == 0,
        format!(
            "1000 SPD, d = 2..5: eigen residual {eig:.1e}, det rel. change {det:.1e}, gap shortfall {gap:.1e}, \
             ball residual {ball:.1e}, wrong step counts {wrong_len}"
        ),
    )
}

fn checks(out: &Outcome, names: &[&str]) -> Verdict {
    let mut ok = out.check("trials-completed").is_some_and(|c| c.passed);
    let mut detail = Vec::new();
    for name in names {
        match out.check(name) {
            Some(c) => {
                ok &= c.passed;
                detail.push(format!("{name}: {}", c.detail));
            }
            None => {
                ok = false;
                detail.push(format!("{name}: missing"));
            }
        }
    }
    (ok, detail.join("; "))
}

fn lab(cfg: &ExperimentConfig) -> Outcome {
    run(cfg, 0).unwrap_or_else(|e| panic!("{}: {e}", cfg.experiment))
}

fn extremal_gap() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::LowerEllipsoid, 3, 1, 1_000_000);
    cfg.initial = Some(Initial::Ellipsoid {
        diagonal: vec![2.0, 1.2, 1.01],
        rows: Vec::new(),
        max_ratio: None,
    });
    cfg.record = Record::At(vec![1]);
    cfg.seed = 4;
    checks(&lab(&cfg), &["extremal-gap-ratio", "expected-gap-factor", "gap-bound-per-sample"])
}

fn cone_lower() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::LowerCone, 2, 20, 10_000);
    cfg.initial = Some(Initial::Cone {
        apex: vec![0.5, 0.0],
        radius: 1.0,
    });
    cfg.sampler = Some(SamplerSpec::UniformPolar { half_width: 2.0 });
    cfg.record = Record::Every(1);
    cfg.seed = 5;
    checks(&lab(&cfg), &["symmetric-law", "exponential-lower-bound"])
}

fn ellipsoid_lower() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::LowerEllipsoid, 3, 15, 10_000);
    cfg.initial = Some(Initial::Ellipsoid {
        diagonal: vec![1.4, 1.2, 25.0 / 42.0],
        rows: Vec::new(),
        max_ratio: Some(2.0),
    });
    cfg.record = Record::Every(1);
    cfg.seed = 6;
    checks(&lab(&cfg), &["eigenvalue-ratio", "exponential-lower-bound"])
}

fn set_rate() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::RateUniform, 2, 500, 200);
    cfg.grid = Some(GridParams {
        half_width: 2.0,
        cells: 256,
    });
    cfg.initial = Some(Initial::Cube {
        center: vec![0.5, 0.5],
        side: PI.sqrt(),
    });
    cfg.sampler = Some(SamplerSpec::UniformPolar { half_width: 2.0 });
    cfg.seed = 7;
    checks(&lab(&cfg), &["symm-diff-rate"])
}

fn holder_rate() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::RateUniform, 2, 1000, 100);
    cfg.grid = Some(GridParams {
        half_width: 1.0,
        cells: 256,
    });
    cfg.initial = Some(Initial::Cone {
        apex: vec![0.3, 0.2],
        radius: 0.5,
    });
    cfg.sampler = Some(SamplerSpec::UniformPolar { half_width: 1.0 });
    cfg.record = Record::At(vec![10, 100, 1000]);
    cfg.seed = 8;
    checks(&lab(&cfg), &["holder-sup-rate", "monotone-sup"])
}

fn non_convergence() -> Verdict {
    let mut cone = ExperimentConfig::new(ExperimentName::NonconvCone, 2, 10_000, 1);
    cone.initial = Some(Initial::Cone {
        apex: vec![0.8, 0.0],
        radius: 1.0,
    });
    cone.sampler = Some(SamplerSpec::AdversarialCone {
        base: Box::new(SamplerSpec::UniformPolar { half_width: 2.0 }),
        eps: 0.2,
    });
    cone.seed = 9;
    let (a, da) = checks(&lab(&cone), &["apex-floor", "base-subsequence"]);

    let mut st = ExperimentConfig::new(ExperimentName::NonconvSteiner, 2, 10_000, 1);
    st.initial = Some(Initial::Ellipsoid {
        diagonal: vec![2.0, 0.5],
        rows: Vec::new(),
        max_ratio: None,
    });
    st.sampler = Some(SamplerSpec::AdversarialSteiner {
        base: Box::new(SamplerSpec::UniformDirection),
        eps: 0.35,
    });
    st.seed = 9;
    let (b, db) = checks(&lab(&st), &["gap-floor", "base-subsequence"]);
    (a && b, format!("cone: {da}; steiner: {db}"))
}

fn finite_g() -> Vec<Direction> {
    let (s, c) = 1f64.sin_cos();
    vec![
        Direction::axis(2, 0, true),
        Direction::axis(2, 0, false),
        Direction::axis(2, 1, true),
        Direction::axis(2, 1, false),
        Direction::new(vec![c, s]).unwrap(),
    ]
}

fn compact_sets() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::CompactHausdorff, 2, 10_000, 4);
    cfg.grid = Some(GridParams {
        half_width: 2.0,
        cells: 128,
    });
    cfg.initial = Some(Initial::AnnulusNotch {
        center: vec![0.3, -0.2],
        inner: 0.6,
        outer: 1.2,
        notch: 0.3,
    });
    cfg.sampler = Some(SamplerSpec::FiniteIid {
        directions: finite_g(),
        radial: RadialLaw::Uniform { max: 4.0 },
    });
    cfg.seed = 10;
    checks(&lab(&cfg), &["hausdorff-below-target"])
}

fn sphere_moments() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in [2usize, 3, 5] {
        let mut rng = trial_rng(11, d as u64);
        let v = Direction::new((1..=d).map(|k| k as f64).collect()).unwrap();
        let n = 1_000_000;
        let (mut s2, mut ss2, mut s4, mut ss4) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let t = uniform_direction(d, &mut rng).dot(&v);
            let (a, b) = (t * t, t.powi(4));
            s2 += a;
            ss2 += a * a;
            s4 += b;
            ss4 += b * b;
        }
        let nf = n as f64;
        let se = |s: f64, ss: f64| ((ss - s * s / nf) / (nf - 1.0) / nf).sqrt();
        let (m2, m4) = (s2 / nf, s4 / nf);
        let (e2, e4) = (1.0 / d as f64, 3.0 / (d * (d + 2)) as f64);
        let z2 = (m2 - e2) / se(s2, ss2);
        let z4 = (m4 - e4) / se(s4, ss4);
        ok &= z2.abs() <= 3.0 && z4.abs() <= 3.0;
        detail.push(format!("d={d}: z₂ = {z2:+.2}, z₄ = {z4:+.2}"));
    }
    (ok, detail.join(", "))
}

fn divergence() -> Verdict {
    let dim = 2;
    let runs = [
        ("gaussian 1/loglog i", SamplerSpec::GaussianPolar { schedule: Schedule::InvLogLog }),
        (
            "gaussian i^(2/d)",
            SamplerSpec::GaussianPolar {
                schedule: Schedule::Power {
                    scale: 1.0,
                    exponent: 2.0 / dim as f64,
                },
            },
        ),
        (
            "poisson 1 − 1/i",
            SamplerSpec::PoissonDirection {
                schedule: Schedule::OneMinusInv,
                pole: Direction::axis(dim, 0, true),
            },
        ),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec) in runs {
        let mut cfg = ExperimentConfig::new(ExperimentName::DivergenceAudit, dim, 1_000_000, 1);
        cfg.sampler = Some(spec);
        let (pass, d) = checks(&lab(&cfg), &["partial-sums-increase", "partial-sum-exceeds"]);
        ok &= pass;
        let n = d.split("N = ").nth(1).map_or("none", |s| s.split(';').next().unwrap_or(s));
        detail.push(format!("{name}: N = {n}"));
    }
    (ok, detail.join(", "))
}

fn orbit_density() -> Verdict {
    let mut cfg = ExperimentConfig::new(ExperimentName::OrbitDensity, 2, 1, 1);
    let g = finite_g();
    DirectionSet::new(g.clone()).unwrap();
    cfg.sampler = Some(SamplerSpec::FiniteIid {
        directions: g,
        radial: RadialLaw::Uniform { max: 4.0 },
    });
    cfg.orbit.start = vec![0.6, 0.8];
    cfg.orbit.budgets = vec![100, 1_000, 10_000, 100_000];
    checks(&lab(&cfg), &["covering-below-target", "budget-prefix", "generating-set"])
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("polarization identity", 5, polarization_identity),
        ("equimeasurability and contraction", 10, equimeasurability),
        ("ellipsoid calculus", 5, ellipsoid_calculus),
        ("extremal gap at d = 3", 30, extremal_gap),
        ("cone lower bound", 10, cone_lower),
        ("ellipsoid lower bound", 30, ellipsoid_lower),
        ("symmetric-difference rate", 300, set_rate),
        ("Hölder rate", 600, holder_rate),
        ("non-convergence", 60, non_convergence),
        ("compact-set convergence", 300, compact_sets),
        ("sphere moments", 10, sphere_moments),
        ("divergence audits", 1, divergence),
        ("orbit density", 30, orbit_density),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = f();
        let took = start.elapsed();
        let in_time = took < Duration::from_secs(*budget);
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name} [{:.2} s of {budget} s{}] {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
