//! Points, unit directions and the reflections `σ_(r,u)` of ℝᵈ.
//!
//! A parameter `ω = (r, u)` with `r ≥ 0` labels the reflection that maps the
//! origin to `r·u`, i.e. the mirror across the hyperplane `⟨z, u⟩ = r/2`.
//! For `r = 0` the mirror passes through the origin and the half-space
//! containing the origin degenerates; the limiting convention is used there:
//! `H⁺_u = {⟨x, u⟩ ≤ 0}` (u is the exterior normal at the origin).

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Distance to the mirror below which a point sits on it.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Tolerance on the norm of a unit vector.
pub const UNIT_TOL: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A point of ℝᵈ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateVector);
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(alloc::vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm_sq(&self.0).sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        dist(&self.0, &other.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Direction> for Point {
    fn from(d: Direction) -> Self {
        Point(d.0)
    }
}

/// A unit vector of 𝕊^(d−1).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords`; fails on a zero or non-finite vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let n = norm_sq(&coords).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::DegenerateVector);
        }
        Ok(Self(coords.into_iter().map(|c| c / n).collect()))
    }

    /// The k-th standard basis vector, `sign·e_k`.
    pub fn axis(dim: usize, k: usize, positive: bool) -> Self {
        let mut v = alloc::vec![0.0; dim];
        v[k] = if positive { 1.0 } else { -1.0 };
        Self(v)
    }

    /// Unit vector at `angle` radians in the plane (d = 2).
    pub fn from_angle(angle: f64) -> Self {
        Self(alloc::vec![angle.cos(), angle.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Geodesic (angular) distance on the sphere.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        // atan2 of |a×b| and a·b is accurate for both tiny and near-π angles.
        let c = self.dot(other);
        let s = dist(
            &self.0.iter().map(|x| x * c).collect::<Vec<_>>(),
            &other.0,
        );
        s.atan2(c)
    }

    /// Index and sign if this is `±e_k` within [`UNIT_TOL`].
    pub fn as_axis(&self) -> Option<(usize, bool)> {
        let (k, &c) = self
            .0
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
        let off: f64 = self
            .0
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max);
        ((c.abs() - 1.0).abs() <= UNIT_TOL && off <= UNIT_TOL).then_some((k, c > 0.0))
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(de)?;
        Direction::new(v).map_err(serde::de::Error::custom)
    }
}

/// Which side of the mirror a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Strictly closer to the origin than its mirror image.
    Positive,
    /// Strictly farther from the origin than its mirror image.
    Negative,
    Boundary,
}

/// A point `ω = (r, u)` of the parameter space `[0, ∞) × 𝕊^(d−1)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolarParam {
    pub r: f64,
    pub u: Direction,
}

impl PolarParam {
    pub fn new(r: f64, u: Direction) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidRadius(r));
        }
        Ok(Self { r, u })
    }

    /// The mirror through the origin with normal `u` (a Steiner direction).
    pub fn direction(u: Direction) -> Self {
        Self { r: 0.0, u }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// `x + (r − 2⟨x,u⟩)u`, written into `out`.
    pub fn reflect_into(&self, x: &[f64], out: &mut [f64]) {
        let s = self.r - 2.0 * dot(x, &self.u.0);
        for ((o, xi), ui) in out.iter_mut().zip(x).zip(&self.u.0) {
            *o = xi + s * ui;
        }
    }

    pub fn reflect(&self, x: &Point) -> Point {
        let mut out = alloc::vec![0.0; x.dim()];
        self.reflect_into(&x.0, &mut out);
        Point(out)
    }

    pub(crate) fn side_of(&self, x: &[f64]) -> Side {
        // Signed distance to the mirror. Its sign is that of
        // |x|² − |σx|² = r(2⟨x,u⟩ − r), and it does not vanish with r.
        let gap = dot(x, &self.u.0) - self.r / 2.0;
        if gap < -BOUNDARY_TOL {
            Side::Positive
        } else if gap > BOUNDARY_TOL {
            Side::Negative
        } else {
            Side::Boundary
        }
    }

    pub fn half_space_side(&self, x: &Point) -> Side {
        self.side_of(&x.0)
    }

    /// Folding map: fixes `H⁺` (and the mirror), reflects `H⁻`.
    pub fn fold_into(&self, x: &[f64], out: &mut [f64]) {
        if self.side_of(x) == Side::Negative {
            self.reflect_into(x, out);
        } else {
            out.copy_from_slice(x);
        }
    }

    pub fn fold(&self, x: &Point) -> Point {
        let mut out = alloc::vec![0.0; x.dim()];
        self.fold_into(&x.0, &mut out);
        Point(out)
    }
}

/// Lebesgue volume of the ball of radius `radius` in ℝᵈ.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    unit_ball_volume(dim) * radius.powi(dim as i32)
}

/// `π^(d/2) / Γ(d/2 + 1)` via `V_d = V_(d−2) · 2π/d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let mut v = if dim % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if dim % 2 == 0 { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Riemannian volume of 𝕊^(d−1), `d·m(B₁)`.
pub fn sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// Point on the great circle from `from` toward `target` at angular
/// distance `min(step, d(from, target))`.
pub fn great_circle_step(from: &Direction, target: &Direction, step: f64) -> Result<Direction> {
    if from.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: from.dim(),
            got: target.dim(),
        });
    }
    let c = from.dot(target);
    if c <= -1.0 + 1e-12 {
        return Err(Error::AntipodalInput);
    }
    let total = from.angle_to(target);
    if total <= step {
        return Ok(target.clone());
    }
    let w: Vec<f64> = target
        .0
        .iter()
        .zip(&from.0)
        .map(|(t, v)| t - c * v)
        .collect();
    let w = Direction::new(w)?;
    let (s, cs) = step.sin_cos();
    Direction::new(
        from.0
            .iter()
            .zip(&w.0)
            .map(|(v, w)| cs * v + s * w)
            .collect(),
    )
}
