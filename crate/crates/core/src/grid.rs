//! Functions and sets sampled on a regular lattice of cell centers in the box
//! `[−L, L]ᵈ`, with implicit value zero outside the box.
//!
//! Cell `i` along an axis has center `−L + (i + ½)h`, `h = 2L/n`. Storage is
//! row-major (last axis fastest).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Upper bound on `n_cellsᵈ` accepted by [`Lattice::new`].
pub const MAX_CELLS: usize = 1 << 28;

/// The regular lattice shared by every grid operand.
///
/// The half-width is validated finite, so equality is reflexive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lattice {
    dim: usize,
    half_width: f64,
    cells: usize,
}

impl Eq for Lattice {}

impl Lattice {
    pub fn new(dim: usize, half_width: f64, cells: usize) -> Result<Self> {
        if dim == 0 || dim > 8 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidLattice(alloc::format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let total = (cells as u128).checked_pow(dim as u32);
        if cells == 0 || total.map_or(true, |t| t > MAX_CELLS as u128) {
            return Err(Error::InvalidLattice(alloc::format!(
                "{cells} cells per axis in {dim} dimensions"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    /// Cell width `h`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of cells, `n_cellsᵈ`.
    pub fn len(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat-index step for one unit along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.cells.pow((self.dim - 1 - axis) as u32)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Twice the center coordinate in units of `h`: `2i + 1 − n`, exact.
    pub fn doubled_offset(&self, i: usize) -> i64 {
        2 * i as i64 + 1 - self.cells as i64
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.cells + i)
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = flat % self.cells;
            flat /= self.cells;
        }
    }

    /// Coordinate of `flat` along `axis`.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.cells
    }

    pub fn center_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for slot in out.iter_mut().rev() {
            *slot = self.coord(rest % self.cells);
            rest /= self.cells;
        }
    }

    pub fn center(&self, flat: usize) -> Point {
        let mut c = vec![0.0; self.dim];
        self.center_into(flat, &mut c);
        Point::new(c).expect("cell centers are finite")
    }

    /// Exact `|center|²` in units of `(h/2)²`.
    pub fn radial_key(&self, flat: usize) -> u64 {
        let mut rest = flat;
        let mut key = 0u64;
        for _ in 0..self.dim {
            let o = self.doubled_offset(rest % self.cells);
            key += (o * o) as u64;
            rest /= self.cells;
        }
        key
    }

    /// Cell indices ordered by distance of their centers to the origin,
    /// ties broken lexicographically on the index tuple.
    pub fn radial_order(&self) -> Vec<usize> {
        let keys: Vec<u64> = (0..self.len()).map(|i| self.radial_key(i)).collect();
        let mut order: Vec<usize> = (0..self.len()).collect();
        // Row-major flat order is lexicographic order on index tuples.
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        order
    }

    /// Cell containing `x`, if inside the box.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let h = self.spacing();
        let mut flat = 0;
        for &c in x {
            let t = ((c + self.half_width) / h).floor();
            if !(t >= 0.0 && t < self.cells as f64) {
                return None;
            }
            flat = flat * self.cells + t as usize;
        }
        Some(flat)
    }

    pub fn check_same(&self, other: &Lattice) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }
}

/// A nonnegative function sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lattice: Lattice,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::DimensionMismatch {
                expected: lattice.len(),
                got: values.len(),
            });
        }
        if let Some((cell, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidValue { cell, value });
        }
        Ok(Self { lattice, values })
    }

    pub(crate) fn from_raw(lattice: Lattice, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), lattice.len());
        Self { lattice, values }
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self::from_raw(lattice, vec![0.0; lattice.len()])
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; lattice.dim()];
        let values = (0..lattice.len())
            .map(|i| {
                lattice.center_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(lattice, values)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Value at a flat index.
    #[inline]
    pub fn get(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// Multilinear interpolation through the cell centers; the lattice is
    /// extended by zeros so the result vanishes outside the box.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let lat = &self.lattice;
        let n = lat.cells as isize;
        let h = lat.spacing();
        let d = lat.dim;
        let mut base = [0isize; 8];
        let mut frac = [0.0f64; 8];
        for k in 0..d {
            let t = (x[k] + lat.half_width) / h - 0.5;
            if !(t > -1.0 && t < n as f64) {
                return 0.0;
            }
            let b = t.floor();
            base[k] = b as isize;
            frac[k] = t - b;
        }
        let mut acc = 0.0;
        'corner: for mask in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for k in 0..d {
                let up = (mask >> k) & 1 == 1;
                let i = base[k] + up as isize;
                if i < 0 || i >= n {
                    continue 'corner;
                }
                w *= if up { frac[k] } else { 1.0 - frac[k] };
                flat = flat * lat.cells + i as usize;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Symmetric decreasing rearrangement on the lattice: the same multiset
    /// of values, reassigned nonincreasingly along [`Lattice::radial_order`].
    pub fn sdr(&self) -> GridFunction {
        let order = self.lattice.radial_order();
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut out = vec![0.0; self.values.len()];
        for (&cell, v) in order.iter().zip(sorted) {
            out[cell] = v;
        }
        Self::from_raw(self.lattice, out)
    }

    /// `max |f − g|` over cells.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.lattice.check_same(&other.lattice)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `hᵈ Σ |f − g|`.
    pub fn l1_distance(&self, other: &GridFunction) -> Result<f64> {
        self.lattice.check_same(&other.lattice)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(s * self.lattice.cell_volume())
    }

    /// `max |f(x) − f(y)|` over cell pairs with `|x − y| ≤ ρ`, counting the
    /// zero cells outside the box.
    pub fn modulus_of_continuity(&self, rho: f64) -> f64 {
        let lat = &self.lattice;
        let d = lat.dim;
        let n = lat.cells as isize;
        let h = lat.spacing();
        if !(rho >= 0.0) {
            return 0.0;
        }
        let reach = (rho / h * (1.0 + 1e-12)).floor() as isize;
        if reach == 0 {
            return 0.0;
        }
        let limit = (rho / h) * (rho / h) * (1.0 + 1e-12);
        let side = (2 * reach + 1) as usize;
        let offsets: Vec<Vec<isize>> = (0..side.pow(d as u32))
            .map(|mut code| {
                (0..d)
                    .map(|_| {
                        let o = (code % side) as isize - reach;
                        code /= side;
                        o
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|o| {
                let sq: isize = o.iter().map(|x| x * x).sum();
                sq > 0 && sq as f64 <= limit
            })
            .collect();

        let mut idx = vec![0usize; d];
        let mut best: f64 = 0.0;
        for flat in 0..lat.len() {
            let fx = self.values[flat];
            lat.multi_index(flat, &mut idx);
            for o in &offsets {
                let mut g = 0usize;
                let mut inside = true;
                for k in 0..d {
                    let j = idx[k] as isize + o[k];
                    if j < 0 || j >= n {
                        inside = false;
                        break;
                    }
                    g = g * lat.cells + j as usize;
                }
                let fy = if inside { self.values[g] } else { 0.0 };
                best = best.max((fx - fy).abs());
            }
        }
        best
    }

    /// Cells with `f > t`.
    pub fn level_set(&self, t: f64) -> GridSet {
        GridSet::from_raw(self.lattice, self.values.iter().map(|&v| v > t).collect())
    }
}

/// A subset of lattice cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSet {
    lattice: Lattice,
    members: Vec<bool>,
}

impl GridSet {
    pub fn new(lattice: Lattice, members: Vec<bool>) -> Result<Self> {
        if members.len() != lattice.len() {
            return Err(Error::DimensionMismatch {
                expected: lattice.len(),
                got: members.len(),
            });
        }
        Ok(Self { lattice, members })
    }

    pub(crate) fn from_raw(lattice: Lattice, members: Vec<bool>) -> Self {
        Self { lattice, members }
    }

    pub fn empty(lattice: Lattice) -> Self {
        Self::from_raw(lattice, vec![false; lattice.len()])
    }

    /// Cells whose centers satisfy `pred`.
    pub fn from_fn(lattice: Lattice, mut pred: impl FnMut(&[f64]) -> bool) -> Self {
        let mut x = vec![0.0; lattice.dim()];
        let members = (0..lattice.len())
            .map(|i| {
                lattice.center_into(i, &mut x);
                pred(&x)
            })
            .collect();
        Self::from_raw(lattice, members)
    }

    pub fn from_cells(lattice: Lattice, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(lattice);
        for c in cells {
            s.members[c] = true;
        }
        s
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, flat: usize) -> bool {
        self.members[flat]
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.lattice.cell_volume()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn indicator(&self) -> GridFunction {
        GridFunction::from_raw(
            self.lattice,
            self.members.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }

    /// The same number of cells, taken first along the radial order.
    pub fn sdr(&self) -> GridSet {
        let k = self.count();
        let mut out = vec![false; self.members.len()];
        for &c in self.lattice.radial_order().iter().take(k) {
            out[c] = true;
        }
        Self::from_raw(self.lattice, out)
    }

    /// Number of cells in exactly one of the two sets.
    pub fn symm_diff_count(&self, other: &GridSet) -> Result<usize> {
        self.lattice.check_same(&other.lattice)?;
        Ok(self
            .members
            .iter()
            .zip(&other.members)
            .filter(|(a, b)| a != b)
            .count())
    }

    /// Cells of the set with an axis neighbour outside the set (or the box).
    pub fn boundary(&self) -> GridSet {
        let lat = &self.lattice;
        let n = lat.cells;
        let mut out = vec![false; self.members.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            if !self.members[flat] {
                continue;
            }
            *slot = (0..lat.dim).any(|axis| {
                let i = lat.axis_index(flat, axis);
                let s = lat.stride(axis);
                i == 0 || i == n - 1 || !self.members[flat - s] || !self.members[flat + s]
            });
        }
        Self::from_raw(self.lattice, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn lat2(n: usize, l: f64) -> Lattice {
        Lattice::new(2, l, n).unwrap()
    }

    #[test]
    fn lattice_geometry() {
        let lat = lat2(4, 1.0);
        assert_eq!(lat.spacing(), 0.5);
        assert_eq!(lat.coord(0), -0.75);
        assert_eq!(lat.coord(3), 0.75);
        let mut m = [0; 2];
        lat.multi_index(lat.flat_index(&[2, 3]), &mut m);
        assert_eq!(m, [2, 3]);
        assert_eq!(lat.cell_of(&[0.1, -0.9]), Some(lat.flat_index(&[2, 0])));
        assert_eq!(lat.cell_of(&[1.1, 0.0]), None);
        assert_eq!(lat.axis_index(lat.flat_index(&[2, 3]), 0), 2);
    }

    #[test]
    fn sdr_of_zero_is_zero() {
        let f = GridFunction::zeros(lat2(8, 1.0));
        assert_eq!(f.sdr(), f);
    }

    #[test]
    fn sdr_moves_blob_to_center() {
        let lat = lat2(8, 1.0);
        let blob = GridSet::from_cells(lat, [0, 1, 8]);
        let out = blob.indicator().sdr();
        let expected: Vec<usize> = lat.radial_order().into_iter().take(3).collect();
        for c in 0..lat.len() {
            assert_eq!(out.get(c) == 1.0, expected.contains(&c));
        }
        assert_eq!(blob.sdr().indicator(), out);
    }

    #[test]
    fn sdr_fixes_radial_profiles() {
        let f = GridFunction::from_fn(lat2(16, 2.0), |x| {
            (1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt()).max(0.0)
        })
        .unwrap();
        assert_eq!(f.sdr(), f);
    }

    #[test]
    fn distances() {
        let lat = lat2(8, 1.0);
        let a = GridSet::from_cells(lat, [3, 4]).indicator();
        let b = GridSet::from_cells(lat, [10, 11, 12]).indicator();
        let z = GridFunction::zeros(lat);
        assert_eq!(a.sup_distance(&a).unwrap(), 0.0);
        assert_eq!(a.sup_distance(&z).unwrap(), 1.0);
        assert_eq!(a.l1_distance(&b).unwrap(), 5.0 * lat.cell_volume());
        let other = GridFunction::zeros(lat2(4, 1.0));
        assert_eq!(a.sup_distance(&other), Err(Error::LatticeMismatch));
    }

    #[test]
    fn cone_sup_distance_matches_closed_form() {
        let lat = lat2(256, 2.0);
        let cone = |a: [f64; 2]| {
            GridFunction::from_fn(lat, move |x| {
                (1.0 - ((x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2)).sqrt()).max(0.0)
            })
            .unwrap()
        };
        let d = cone([0.1, 0.2]).sup_distance(&cone([0.4, -0.2])).unwrap();
        assert!((d - 0.5).abs() < lat.spacing());
    }

    #[test]
    fn l1_of_shifted_disks_matches_lens_area() {
        // Oracle: |B₁ △ B₁(c)| = 2(π − lens), lens = 2acos(c/2) − (c/2)√(4 − c²).
        let c: f64 = 0.5;
        let lens = 2.0 * (c / 2.0).acos() - (c / 2.0) * (4.0 - c * c).sqrt();
        let expected = 2.0 * (PI - lens);
        assert!((expected - 1.9790).abs() < 1e-3);
        let lat = lat2(512, 2.0);
        let a = GridSet::from_fn(lat, |x| x[0] * x[0] + x[1] * x[1] < 1.0).indicator();
        let b = GridSet::from_fn(lat, |x| (x[0] - c).powi(2) + x[1] * x[1] < 1.0).indicator();
        let got = a.l1_distance(&b).unwrap();
        assert!((got - expected).abs() < 4.0 * PI * lat.spacing(), "{got} vs {expected}");
    }

    #[test]
    fn modulus_examples() {
        let lat = lat2(32, 2.0);
        let h = lat.spacing();
        let cone = GridFunction::from_fn(lat, |x| {
            (1.0 - ((x[0] - 0.3).powi(2) + x[1] * x[1]).sqrt()).max(0.0)
        })
        .unwrap();
        assert_eq!(cone.modulus_of_continuity(0.0), 0.0);
        for k in 1..5 {
            let rho = k as f64 * h * 1.3;
            let got = cone.modulus_of_continuity(rho);
            // Brute-force pair scan oracle.
            let mut brute: f64 = 0.0;
            for i in 0..lat.len() {
                let xi = lat.center(i);
                for j in 0..lat.len() {
                    if xi.distance(&lat.center(j)) <= rho {
                        brute = brute.max((cone.get(i) - cone.get(j)).abs());
                    }
                }
            }
            assert!((got - brute).abs() < 1e-15, "{got} vs {brute}");
            assert!(got <= rho + 1e-12);
        }
        let constant = GridFunction::from_fn(lat, |_| 0.0).unwrap();
        assert_eq!(constant.modulus_of_continuity(0.5), 0.0);
    }

    #[test]
    fn modulus_sees_the_box_edge() {
        let lat = lat2(8, 1.0);
        let f = GridFunction::from_fn(lat, |_| 1.0).unwrap();
        assert_eq!(f.modulus_of_continuity(lat.spacing()), 1.0);
    }

    #[test]
    fn level_sets() {
        let lat = lat2(64, 2.0);
        let cone = GridFunction::from_fn(lat, |x| {
            (1.0 - ((x[0] - 0.5).powi(2) + x[1] * x[1]).sqrt()).max(0.0)
        })
        .unwrap();
        assert!(cone.level_set(cone.max_value()).is_empty());
        let ball = cone.level_set(0.5);
        let expected = GridSet::from_fn(lat, |x| (x[0] - 0.5).powi(2) + x[1] * x[1] < 0.25);
        assert_eq!(ball, expected);
        let ind = expected.indicator();
        assert_eq!(ind.level_set(0.0), expected);
    }

    #[test]
    fn boundary_of_square() {
        let lat = lat2(8, 1.0);
        let sq = GridSet::from_fn(lat, |x| x[0].abs() < 0.5 && x[1].abs() < 0.5);
        assert_eq!(sq.count(), 16);
        assert_eq!(sq.boundary().count(), 12);
    }
}
