//! The functional `𝓘(f) = ∫ f(x)|x| dx`, set distances, Hausdorff distance
//! and parallel sets of grid sets.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::edt::{squared_distance, squared_distance_to_exterior, UNREACHABLE};
use crate::error::{Error, Result};
use crate::geometry::{norm_sq, unit_ball_volume, PolarParam, Side};
use crate::grid::{GridFunction, GridSet, Lattice};
use crate::polarize::LatticeMirror;

/// `hᵈ Σ f(x)|x|` over cell centers.
pub fn i_functional(f: &GridFunction) -> f64 {
    let lat = f.lattice();
    let d = lat.dim();
    let mut x = [0.0; 8];
    let s: f64 = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(c, v)| {
            lat.center_into(c, &mut x[..d]);
            v * norm_sq(&x[..d]).sqrt()
        })
        .sum();
    s * lat.cell_volume()
}

/// `hᵈ |A △ B|`.
pub fn symm_diff_volume(a: &GridSet, b: &GridSet) -> Result<f64> {
    Ok(a.symm_diff_count(b)? as f64 * a.lattice().cell_volume())
}

/// Number of cells `x ∈ A* ∖ A` strictly on the positive side whose mirror
/// image lies in `A ∖ A*`.
pub fn delta_drop_count(a: &GridSet, a_star: &GridSet, omega: &PolarParam) -> Result<usize> {
    let lat = *a.lattice();
    lat.check_same(a_star.lattice())?;
    let m = LatticeMirror::new(&lat, omega)?;
    let (am, sm) = (a.members(), a_star.members());
    Ok((0..lat.len())
        .filter(|&c| sm[c] && !am[c] && m.side(lat.axis_index(c, m.axis)) == Side::Positive)
        .filter(|&c| m.image_flat(&lat, c).is_some_and(|j| am[j] && !sm[j]))
        .count())
}

/// `2hᵈ |{x ∈ A*∖A : σx ∈ A∖A*}|`, the drop of `m(A △ A*)` under `S_ω`.
pub fn delta_drop(a: &GridSet, a_star: &GridSet, omega: &PolarParam) -> Result<f64> {
    Ok(2.0 * delta_drop_count(a, a_star, omega)? as f64 * a.lattice().cell_volume())
}

fn nonempty(a: &GridSet) -> Result<()> {
    if a.is_empty() {
        Err(Error::EmptySet)
    } else {
        Ok(())
    }
}

/// Largest squared distance (cells²) from a cell of `a` to the set `b`.
fn directed_sq(a: &GridSet, b: &GridSet) -> u64 {
    let db = squared_distance(b.lattice(), b.members());
    a.cells().map(|c| db[c]).max().unwrap_or(0)
}

/// Hausdorff distance between the sets of cell centers.
pub fn hausdorff(a: &GridSet, b: &GridSet) -> Result<f64> {
    a.lattice().check_same(b.lattice())?;
    nonempty(a)?;
    nonempty(b)?;
    let sq = directed_sq(a, b).max(directed_sq(b, a));
    Ok((sq as f64).sqrt() * a.lattice().spacing())
}

/// Signed distance to the boundary of `K` with half-cell correction:
/// `dist(x, ∁K) − h/2` inside and `h/2 − dist(x, K)` outside, distances
/// taken between cell centers. Cells outside the box belong to `∁K`.
pub fn signed_distance(k: &GridSet) -> Result<SignedDistance> {
    nonempty(k)?;
    let lat = *k.lattice();
    let h = lat.spacing();
    let to_k = squared_distance(&lat, k.members());
    let outside: Vec<bool> = k.members().iter().map(|m| !m).collect();
    let to_out = squared_distance(&lat, &outside);
    let to_ext = squared_distance_to_exterior(&lat);
    let values = (0..lat.len())
        .map(|c| {
            if k.members()[c] {
                let sq = to_out[c].min(to_ext[c]);
                (sq as f64).sqrt() * h - 0.5 * h
            } else {
                debug_assert_ne!(to_k[c], UNREACHABLE);
                0.5 * h - (to_k[c] as f64).sqrt() * h
            }
        })
        .collect();
    Ok(SignedDistance { lattice: lat, values })
}

/// Signed distance values on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistance {
    lattice: Lattice,
    values: Vec<f64>,
}

impl SignedDistance {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Cells with value `> t`.
    pub fn superlevel(&self, t: f64) -> GridSet {
        GridSet::from_raw(self.lattice, self.values.iter().map(|&v| v > t).collect())
    }
}

/// Outer (`t > 0`) or inner (`t < 0`) parallel set
/// `{dist(x, K) < t}` resp. `{dist(x, ∁K) > −t}`; `t = 0` gives `K`.
pub fn parallel_set(k: &GridSet, t: f64) -> Result<GridSet> {
    Ok(signed_distance(k)?.superlevel(-t))
}

/// Radius of the ball with the volume of the parallel set at `t`.
pub fn parallel_radius(k: &GridSet, t: f64) -> Result<f64> {
    let p = parallel_set(k, t)?;
    if p.is_empty() {
        return Err(Error::EmptyParallelSet);
    }
    let d = k.lattice().dim();
    Ok((p.volume() / unit_ball_volume(d)).powf(1.0 / d as f64))
}

/// `[h_off + dist(x, ∁K) − dist(x, K)]⁺` on the lattice (with the
/// half-cell-corrected signed distance). Its superlevel sets above `h_off`
/// are inner parallel sets and below `h_off` outer ones.
pub fn aux_distance_function(k: &GridSet, h_offset: f64) -> Result<GridFunction> {
    if !(h_offset > 0.0 && h_offset.is_finite()) {
        return Err(Error::InvalidRadius(h_offset));
    }
    let phi = signed_distance(k)?;
    let values = phi.values.iter().map(|v| (h_offset + v).max(0.0)).collect();
    Ok(GridFunction::from_raw(phi.lattice, values))
}
