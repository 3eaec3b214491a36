//! Two-point symmetrization (polarization) of grid functions, grid sets and
//! cones, the polarization identity for the drop of `𝓘`, and a certified
//! lower bound on its expected drop under uniform random polarizations.
//!
//! On the positive side of the mirror a cell takes `max{f(x), f(σx)}`, on the
//! negative side `min{f(x), f(σx)}`; cells on the mirror are left unchanged.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exact::ConeFunction;
use crate::geometry::{ball_volume, norm_sq, sphere_area, PolarParam, Side};
use crate::grid::{GridFunction, GridSet, Lattice};

/// How the mirror image `f(σx)` of a cell is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mode {
    /// Arbitrary mirrors; off-lattice values by multilinear interpolation
    /// (functions) or by the containing cell (sets).
    Interp,
    /// Mirrors `u = ±e_k`, `r ∈ hℤ` that map the lattice onto itself.
    MirrorExact,
}

/// Index form of a lattice-preserving mirror: along `axis`, cell `i` maps to
/// `pivot − i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeMirror {
    pub axis: usize,
    pub pivot: i64,
    /// `u = +e_axis`.
    pub positive: bool,
}

impl LatticeMirror {
    pub fn new(lattice: &Lattice, omega: &PolarParam) -> Result<Self> {
        if omega.dim() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                expected: lattice.dim(),
                got: omega.dim(),
            });
        }
        let (axis, positive) = omega.u.as_axis().ok_or(Error::NotLatticeCompatible)?;
        let steps = omega.r / lattice.spacing();
        let k = steps.round();
        if (steps - k).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::NotLatticeCompatible);
        }
        let n = lattice.cells_per_axis() as i64;
        // u = +e: x ↦ r − x, so i + j + 1 − n = r/h; u = −e: x ↦ −r − x.
        let pivot = if positive {
            n - 1 + k as i64
        } else {
            n - 1 - k as i64
        };
        Ok(Self {
            axis,
            pivot,
            positive,
        })
    }

    /// Mirror index along the axis (possibly outside `0..n`).
    #[inline]
    pub fn image(&self, i: usize) -> i64 {
        self.pivot - i as i64
    }

    #[inline]
    pub fn side(&self, i: usize) -> Side {
        let j = self.image(i);
        let i = i as i64;
        if i == j {
            Side::Boundary
        } else if (i < j) == self.positive {
            Side::Positive
        } else {
            Side::Negative
        }
    }

    /// Flat index of the mirror cell, if inside the box.
    #[inline]
    pub fn image_flat(&self, lattice: &Lattice, flat: usize) -> Option<usize> {
        let i = lattice.axis_index(flat, self.axis);
        let j = self.image(i);
        if j < 0 || j >= lattice.cells_per_axis() as i64 {
            return None;
        }
        let s = lattice.stride(self.axis) as i64;
        Some((flat as i64 + (j - i as i64) * s) as usize)
    }
}

#[inline]
fn two_point(side: Side, here: f64, there: f64) -> f64 {
    match side {
        Side::Positive => here.max(there),
        Side::Negative => here.min(there),
        Side::Boundary => here,
    }
}

fn check_dim(lattice: &Lattice, omega: &PolarParam) -> Result<()> {
    if omega.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            got: omega.dim(),
        });
    }
    Ok(())
}

/// Polarization `S_ω f` of a grid function.
pub fn polarize_grid(f: &GridFunction, omega: &PolarParam, mode: Mode) -> Result<GridFunction> {
    let lat = *f.lattice();
    check_dim(&lat, omega)?;
    let values = f.values();
    let out: Vec<f64> = match mode {
        Mode::MirrorExact => {
            let m = LatticeMirror::new(&lat, omega)?;
            (0..lat.len())
                .map(|c| {
                    let side = m.side(lat.axis_index(c, m.axis));
                    let there = m.image_flat(&lat, c).map_or(0.0, |j| values[j]);
                    two_point(side, values[c], there)
                })
                .collect()
        }
        Mode::Interp => {
            let mut x = [0.0; 8];
            let mut y = [0.0; 8];
            let d = lat.dim();
            (0..lat.len())
                .map(|c| {
                    lat.center_into(c, &mut x[..d]);
                    let side = omega.side_of(&x[..d]);
                    if side == Side::Boundary {
                        return values[c];
                    }
                    // Cheap exits: max with 0 and min with anything from 0.
                    if side == Side::Negative && values[c] == 0.0 {
                        return 0.0;
                    }
                    omega.reflect_into(&x[..d], &mut y[..d]);
                    two_point(side, values[c], f.interpolate(&y[..d]))
                })
                .collect()
        }
    };
    Ok(GridFunction::from_raw(lat, out))
}

/// Polarization of a set; in [`Mode::Interp`] the mirror image reads the
/// membership of the cell containing `σx`, so the output stays a set.
pub fn polarize_set(a: &GridSet, omega: &PolarParam, mode: Mode) -> Result<GridSet> {
    let lat = *a.lattice();
    check_dim(&lat, omega)?;
    let members = a.members();
    let out: Vec<bool> = match mode {
        Mode::MirrorExact => {
            let m = LatticeMirror::new(&lat, omega)?;
            (0..lat.len())
                .map(|c| {
                    let there = m.image_flat(&lat, c).is_some_and(|j| members[j]);
                    match m.side(lat.axis_index(c, m.axis)) {
                        Side::Positive => members[c] || there,
                        Side::Negative => members[c] && there,
                        Side::Boundary => members[c],
                    }
                })
                .collect()
        }
        Mode::Interp => {
            let mut x = [0.0; 8];
            let mut y = [0.0; 8];
            let d = lat.dim();
            (0..lat.len())
                .map(|c| {
                    let here = members[c];
                    lat.center_into(c, &mut x[..d]);
                    let side = omega.side_of(&x[..d]);
                    match (side, here) {
                        (Side::Boundary, _) | (Side::Positive, true) | (Side::Negative, false) => {
                            return here
                        }
                        _ => {}
                    }
                    omega.reflect_into(&x[..d], &mut y[..d]);
                    lat.cell_of(&y[..d]).is_some_and(|j| members[j])
                })
                .collect()
        }
    };
    Ok(GridSet::from_raw(lat, out))
}

/// Polarization of a cone: the apex is folded, `S_ω f = [1 − |x − τ_ω a|]⁺`.
pub fn polarize_cone(c: &ConeFunction, omega: &PolarParam) -> ConeFunction {
    ConeFunction::new(omega.fold(&c.apex))
}

/// Right-hand side of the polarization identity,
/// `hᵈ Σ_x [f(σx) − f(x)]⁺ [|σx| − |x|]⁺`, over a lattice-preserving mirror.
pub fn polarization_drop(f: &GridFunction, omega: &PolarParam) -> Result<f64> {
    let lat = *f.lattice();
    let m = LatticeMirror::new(&lat, omega)?;
    let d = lat.dim();
    let values = f.values();
    let mut x = [0.0; 8];
    let mut y = [0.0; 8];
    let mut acc = 0.0;
    for c in 0..lat.len() {
        let Some(j) = m.image_flat(&lat, c) else {
            continue;
        };
        let gain = values[j] - values[c];
        if gain <= 0.0 {
            continue;
        }
        lat.center_into(c, &mut x[..d]);
        lat.center_into(j, &mut y[..d]);
        let farther = norm_sq(&y[..d]).sqrt() - norm_sq(&x[..d]).sqrt();
        if farther > 0.0 {
            acc += gain * farther;
        }
    }
    Ok(acc * lat.cell_volume())
}

/// Certified lower bound on `E[𝓘(f) − 𝓘(S_W f)]` for `W` uniform on
/// `(0, 2L) × 𝕊^(d−1)` and `f` supported in `B_L`.
///
/// With `ε = ‖f − f*‖_∞` and the largest lattice radius `ρ = kh` such that
/// the modulus of continuity satisfies `η(ρ) ≤ ε/8`, returns
/// `C_ε · m(B_ρ) / (m(𝕊^(d−1)) (2L)ᵈ)` where `C_ε = ερ m(B_ρ)/2`. The second
/// factor bounds `P(|σ_W x − b| < ρ)` from below uniformly over admissible
/// pairs, since the change of variables `z = σ_ω x` has density
/// `|z − x|^{−(d−1)} ≥ (2L)^{−(d−1)}` on `B_L`.
pub fn drop_lower_bound_uniform(f: &GridFunction, support_radius: f64) -> Result<f64> {
    if !(support_radius > 0.0) {
        return Err(Error::InvalidRadius(support_radius));
    }
    let lat = *f.lattice();
    let eps = f.sup_distance(&f.sdr())?;
    if eps == 0.0 {
        return Err(Error::AlreadySymmetric);
    }
    let h = lat.spacing();
    let target = eps / 8.0;
    let mut k = 0usize;
    // η is nondecreasing in ρ; walk outward until the condition breaks.
    while k < lat.cells_per_axis() && f.modulus_of_continuity((k + 1) as f64 * h) <= target {
        k += 1;
    }
    if k == 0 {
        return Err(Error::NoValidRho);
    }
    let d = lat.dim();
    let rho = k as f64 * h;
    let ball = ball_volume(d, rho);
    let c_eps = eps * rho * ball / 2.0;
    let hit = ball / (sphere_area(d) * (2.0 * support_radius).powi(d as i32));
    Ok(c_eps * hit)
}
