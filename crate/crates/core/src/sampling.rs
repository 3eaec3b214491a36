//! Distributions of rearrangement parameters `W₁, W₂, …`, the adversarial
//! feedback rules that defeat convergence, and divergence audits for the
//! Gaussian and Poisson-kernel families.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, great_circle_step, sphere_area, Direction, Point, PolarParam, Side};
use crate::linalg::SymMatrix;

/// Proposal budget of the Poisson-kernel rejection sampler.
pub const REJECTION_BUDGET: u64 = 1_000_000;

/// Deterministic per-trial generator: ChaCha8 keyed by `seed`, with the
/// trial index selecting an independent stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A positive sequence indexed by the step `i ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Schedule {
    Constant { value: f64 },
    /// `1/log log i`, with `i < 3` evaluated at `i = 3`.
    InvLogLog,
    /// `scale · i^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `1 − 1/i`.
    OneMinusInv,
}

impl Schedule {
    pub fn at(&self, i: u64) -> f64 {
        let x = i.max(1) as f64;
        match *self {
            Schedule::Constant { value } => value,
            Schedule::InvLogLog => 1.0 / x.max(3.0).ln().ln(),
            Schedule::Power { scale, exponent } => scale * x.powf(exponent),
            Schedule::OneMinusInv => 1.0 - 1.0 / x,
        }
    }
}

/// Law of the radial component of a [`SamplerSpec::FiniteIid`] draw.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum RadialLaw {
    /// Uniform on `(0, max)`.
    Uniform { max: f64 },
    Exponential { mean: f64 },
}

/// Description of the law `μᵢ` of the `i`-th parameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SamplerSpec {
    /// Uniform on `(0, 2L) × 𝕊^(d−1)`.
    UniformPolar { half_width: f64 },
    /// Uniform on the sphere, `r = 0` (Steiner directions).
    UniformDirection,
    /// Density `∝ e^(−r²/2t) r^(d−1)` with `t = tᵢ`: the polar image of the
    /// centered heat kernel.
    GaussianPolar { schedule: Schedule },
    /// Poisson kernel `(1 − |z|²)/|z − u|ᵈ` on the sphere with
    /// `z = sᵢ · pole`, `sᵢ ∈ [0, 1)`.
    PoissonDirection { schedule: Schedule, pole: Direction },
    /// Direction uniform on a finite set `G`, radius from `radial`.
    FiniteIid {
        directions: Vec<Direction>,
        radial: RadialLaw,
    },
    /// Feedback rule of [`AdversarialCone`] over a base law.
    AdversarialCone { base: Box<SamplerSpec>, eps: f64 },
    /// Feedback rule of [`AdversarialSteiner`] over a base law.
    AdversarialSteiner { base: Box<SamplerSpec>, eps: f64 },
}

fn finite_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl SamplerSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        match self {
            SamplerSpec::UniformPolar { half_width } if !finite_positive(*half_width) => {
                bad("half_width must be positive")
            }
            SamplerSpec::GaussianPolar { schedule } => match schedule {
                Schedule::Constant { value } if !finite_positive(*value) => {
                    bad("schedule must be positive")
                }
                Schedule::Power { scale, exponent } if !finite_positive(*scale) || !exponent.is_finite() => {
                    bad("schedule must be positive")
                }
                Schedule::OneMinusInv => bad("schedule must be positive"),
                _ => Ok(()),
            },
            SamplerSpec::PoissonDirection { schedule, pole } => {
                if pole.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: pole.dim(),
                    });
                }
                match schedule {
                    Schedule::Constant { value } if !(0.0..1.0).contains(value) => {
                        bad("Poisson pole radius must lie in [0, 1)")
                    }
                    Schedule::Power { .. } | Schedule::InvLogLog => {
                        bad("Poisson pole radius schedule must stay in [0, 1)")
                    }
                    _ => Ok(()),
                }
            }
            SamplerSpec::FiniteIid { directions, radial } => {
                if directions.is_empty() {
                    return bad("direction set is empty");
                }
                if let Some(u) = directions.iter().find(|u| u.dim() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: u.dim(),
                    });
                }
                match radial {
                    RadialLaw::Uniform { max: x } | RadialLaw::Exponential { mean: x }
                        if !finite_positive(*x) =>
                    {
                        bad("radial scale must be positive")
                    }
                    _ => Ok(()),
                }
            }
            SamplerSpec::AdversarialCone { base, eps } | SamplerSpec::AdversarialSteiner { base, eps } => {
                if !finite_positive(*eps) {
                    return bad("eps must be positive");
                }
                if matches!(
                    **base,
                    SamplerSpec::AdversarialCone { .. } | SamplerSpec::AdversarialSteiner { .. }
                ) {
                    return bad("base law cannot be a feedback rule");
                }
                base.validate(dim)
            }
            _ => Ok(()),
        }
    }

    pub fn is_feedback(&self) -> bool {
        matches!(
            self,
            SamplerSpec::AdversarialCone { .. } | SamplerSpec::AdversarialSteiner { .. }
        )
    }
}

/// Uniform point of `𝕊^(d−1)` by normalizing a standard Gaussian vector.
pub fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Direction {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(u) = Direction::new(v) {
            return u;
        }
    }
}

fn poisson_direction<R: Rng + ?Sized>(pole: &Direction, s: f64, rng: &mut R) -> Result<Direction> {
    let d = pole.dim() as i32;
    if s == 0.0 {
        return Ok(uniform_direction(pole.dim(), rng));
    }
    // Density against the uniform law peaks at u = pole.
    let peak = (1.0 + s) / (1.0 - s).powi(d - 1);
    for _ in 0..REJECTION_BUDGET {
        let u = uniform_direction(pole.dim(), rng);
        let dist_sq = 1.0 + s * s - 2.0 * s * u.dot(pole);
        let density = (1.0 - s * s) / dist_sq.powf(d as f64 / 2.0);
        if rng.random::<f64>() * peak < density {
            return Ok(u);
        }
    }
    Err(Error::RejectionBudgetExceeded(REJECTION_BUDGET))
}

/// One draw from `μᵢ` (`i ≥ 1`). Direction laws return `r = 0`.
pub fn sample<R: Rng + ?Sized>(spec: &SamplerSpec, dim: usize, i: u64, rng: &mut R) -> Result<PolarParam> {
    match spec {
        SamplerSpec::UniformPolar { half_width } => {
            let u = uniform_direction(dim, rng);
            let r = loop {
                let r = 2.0 * half_width * rng.random::<f64>();
                if r > 0.0 {
                    break r;
                }
            };
            PolarParam::new(r, u)
        }
        SamplerSpec::UniformDirection => Ok(PolarParam::direction(uniform_direction(dim, rng))),
        SamplerSpec::GaussianPolar { schedule } => {
            let sd = schedule.at(i).sqrt();
            loop {
                let g: Vec<f64> = (0..dim)
                    .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, rng))
                    .collect();
                let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if let Ok(u) = Direction::new(g) {
                    return PolarParam::new(r, u);
                }
            }
        }
        SamplerSpec::PoissonDirection { schedule, pole } => {
            let s = schedule.at(i);
            if !(0.0..1.0).contains(&s) {
                return Err(Error::InvalidSpec(format!("Poisson pole radius {s} outside [0, 1)")));
            }
            Ok(PolarParam::direction(poisson_direction(pole, s, rng)?))
        }
        SamplerSpec::FiniteIid { directions, radial } => {
            if directions.is_empty() {
                return Err(Error::InvalidSpec("direction set is empty".into()));
            }
            let u = directions[rng.random_range(0..directions.len())].clone();
            let r = match *radial {
                RadialLaw::Uniform { max } => max * rng.random::<f64>(),
                RadialLaw::Exponential { mean } => -mean * (1.0 - rng.random::<f64>()).ln(),
            };
            PolarParam::new(r, u)
        }
        SamplerSpec::AdversarialCone { .. } => Err(Error::UnsupportedSpec(
            "adversarial cone rule needs the current apex",
        )),
        SamplerSpec::AdversarialSteiner { .. } => Err(Error::UnsupportedSpec(
            "adversarial Steiner rule needs the current matrix",
        )),
    }
}

/// An emitted parameter, tagged with the index of the base element it
/// reproduces verbatim, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted<T> {
    pub value: T,
    pub base_index: Option<usize>,
}

/// Interleaves a base sequence `ωₙ = (rₙ, uₙ)` with shrunken parameters
/// `(min(2⁻ⁿε, rₙ), ±uₙ)` chosen so that the following `ωₙ` leaves the cone
/// unchanged. The apex then never moves by more than `ε` in total.
#[derive(Debug, Clone)]
pub struct AdversarialCone {
    eps: f64,
    emitted: u64,
    pending: Option<PolarParam>,
    base_drawn: usize,
}

impl AdversarialCone {
    pub fn new(initial_apex: &Point, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < initial_apex.norm()) {
            return Err(Error::PreconditionViolated(format!(
                "need 0 < eps < |apex| = {}",
                initial_apex.norm()
            )));
        }
        Ok(Self {
            eps,
            emitted: 0,
            pending: None,
            base_drawn: 0,
        })
    }

    /// Next parameter given the current apex; `base` yields `ω₁, ω₂, …`.
    pub fn next(
        &mut self,
        apex: &Point,
        base: &mut impl FnMut() -> Result<PolarParam>,
    ) -> Result<Emitted<PolarParam>> {
        self.emitted += 1;
        if let Some(w) = self.pending.take() {
            self.base_drawn += 1;
            return Ok(Emitted {
                value: w,
                base_index: Some(self.base_drawn - 1),
            });
        }
        let w = base()?;
        let n = self.emitted.div_ceil(2);
        let shrink = self.eps * 0.5f64.powi(n.min(1000) as i32);
        let r = shrink.min(w.r);
        let mut chosen = None;
        for u in [w.u.clone(), w.u.neg()] {
            let cand = PolarParam::new(r, u)?;
            let moved = cand.fold(apex);
            if w.half_space_side(&moved) != Side::Negative {
                chosen = Some(cand);
                break;
            }
        }
        let value = chosen.unwrap_or_else(|| PolarParam::new(r, w.u.clone()).expect("r is valid"));
        self.pending = Some(w);
        Ok(Emitted {
            value,
            base_index: None,
        })
    }
}

/// Walks on the sphere from a maximizing eigenvector of `M` toward each base
/// direction in turn with steps `ε/n`, emitting every waypoint. Each emitted
/// direction is an eigenvector of the matrix after its own symmetrization,
/// so the next one is nearly aligned with an eigenbasis and the eigenvalue
/// gap stays bounded below by `gap₀ ∏ (1 − (C+2) sin²(ε/k))`.
#[derive(Debug, Clone)]
pub struct AdversarialSteiner {
    eps: f64,
    c: f64,
    current: Option<Direction>,
    first: Direction,
    target: Option<Direction>,
    emitted: u64,
    base_drawn: usize,
    factor: f64,
}

impl AdversarialSteiner {
    pub fn new(m: &SymMatrix, eps: f64) -> Result<Self> {
        let e = m.eigen();
        let (hi, vmax) = e.max();
        let lo = e.min().0;
        if !(lo > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let c = 1.0 + hi / lo;
        if !(eps > 0.0 && (c + 2.0) * eps.sin().powi(2) < 1.0) {
            return Err(Error::PreconditionViolated(format!(
                "need (C+2)·sin²ε < 1 with C = {c}"
            )));
        }
        Ok(Self {
            eps,
            c,
            current: None,
            first: vmax.clone(),
            target: None,
            emitted: 0,
            base_drawn: 0,
            factor: 1.0,
        })
    }

    /// `C = 1 + λmax/λmin` of the initial matrix.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// `∏ (1 − (C+2) sin²(ε/k))` over the moves made so far.
    pub fn gap_factor(&self) -> f64 {
        self.factor
    }

    /// Next direction; `base` yields `u₁, u₂, …`.
    pub fn next(
        &mut self,
        base: &mut impl FnMut() -> Result<Direction>,
    ) -> Result<Emitted<Direction>> {
        self.emitted += 1;
        let Some(v) = self.current.clone() else {
            self.current = Some(self.first.clone());
            return Ok(Emitted {
                value: self.first.clone(),
                base_index: None,
            });
        };
        let target = match self.target.take() {
            Some(t) => t,
            None => base()?,
        };
        let n = (self.emitted - 1) as f64;
        let step = self.eps / n;
        self.factor *= 1.0 - (self.c + 2.0) * step.sin().powi(2);
        if v.angle_to(&target) <= step {
            self.base_drawn += 1;
            self.current = Some(target.clone());
            return Ok(Emitted {
                value: target,
                base_index: Some(self.base_drawn - 1),
            });
        }
        let out = match great_circle_step(&v, &target, step) {
            Err(Error::AntipodalInput) => {
                // Any great circle works; leave along a coordinate plane.
                let k = (0..v.dim())
                    .min_by(|&a, &b| v.coords()[a].abs().total_cmp(&v.coords()[b].abs()))
                    .unwrap_or(0);
                great_circle_step(&v, &Direction::axis(v.dim(), k, true), step)?
            }
            other => other?,
        };
        self.target = Some(target);
        self.current = Some(out.clone());
        Ok(Emitted {
            value: out,
            base_index: None,
        })
    }
}

/// Partial sums of the per-family lower-bound terms of a divergence audit.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceAudit {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Partial sums strictly increase.
    pub monotone: bool,
    /// Known multiplicative constant relating the terms to probabilities,
    /// when the family provides one.
    pub scale: Option<f64>,
}

impl DivergenceAudit {
    /// First `N` (1-based) whose partial sum exceeds `threshold`.
    pub fn first_exceeding(&self, threshold: f64) -> Option<usize> {
        self.partial_sums.iter().position(|&s| s > threshold).map(|k| k + 1)
    }
}

/// Terms `tᵢ^(−d/2) e^(−2L²/tᵢ)` (Gaussian) or `1 − |zᵢ|` (Poisson) for
/// `i = 1..=n` and their partial sums.
pub fn divergence_audit(spec: &SamplerSpec, dim: usize, rho: f64, half_width: f64, n: usize) -> Result<DivergenceAudit> {
    let (terms, scale): (Vec<f64>, Option<f64>) = match spec {
        SamplerSpec::GaussianPolar { schedule } => {
            let l2 = half_width * half_width;
            let terms = (1..=n as u64)
                .map(|i| {
                    let t = schedule.at(i);
                    t.powf(-(dim as f64) / 2.0) * (-2.0 * l2 / t).exp()
                })
                .collect();
            (terms, None)
        }
        SamplerSpec::PoissonDirection { schedule, .. } => {
            let terms = (1..=n as u64).map(|i| 1.0 - schedule.at(i).abs()).collect();
            let scale = 0.5f64.powi(dim as i32 - 1) * ball_volume(dim, rho) / sphere_area(dim);
            (terms, Some(scale))
        }
        _ => return Err(Error::UnsupportedSpec("divergence audit needs a Gaussian or Poisson family")),
    };
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = terms
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect();
    let monotone = terms.iter().all(|&t| t > 0.0);
    Ok(DivergenceAudit {
        terms,
        partial_sums,
        monotone,
        scale,
    })
}
