//! Closed-form function families that are preserved by the rearrangements:
//! cones `[1 − |x − a|]⁺` under polarization and ellipsoids
//! `[1 − ⟨x, Mx⟩]⁺` under Steiner symmetrization.


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{GridFunction, Lattice};
use crate::linalg::SymMatrix;

/// `f(x) = [1 − |x − apex|]⁺`, Lipschitz with constant one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeFunction {
    pub apex: Point,
}

impl ConeFunction {
    pub fn new(apex: Point) -> Self {
        Self { apex }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = crate::geometry::dist(x, self.apex.coords());
        (1.0 - d).max(0.0)
    }

    /// The rearrangement `[1 − |x|]⁺`.
    pub fn sdr(&self) -> ConeFunction {
        Self::new(Point::origin(self.apex.dim()))
    }

    /// Exact `‖f − g‖_∞ = min{|a − a′|, 1}`.
    pub fn sup_distance(&self, other: &ConeFunction) -> f64 {
        self.apex.distance(&other.apex).min(1.0)
    }

    /// `‖f − f*‖_∞ = min{|a|, 1}`.
    pub fn distance_to_sdr(&self) -> f64 {
        self.apex.norm().min(1.0)
    }

    pub fn to_grid(&self, lattice: Lattice) -> Result<GridFunction> {
        GridFunction::from_fn(lattice, |x| self.eval(x))
    }
}

/// `f(x) = [1 − ⟨x, Mx⟩]⁺` for symmetric positive definite `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidFunction {
    m: SymMatrix,
}

impl EllipsoidFunction {
    pub fn new(m: SymMatrix) -> Result<Self> {
        if !m.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.m
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (1.0 - self.m.quad_form(x)).max(0.0)
    }

    /// Geometric mean of the eigenvalues, `(det M)^(1/d)`.
    pub fn mean_eigenvalue(&self) -> f64 {
        self.m.det().powf(1.0 / self.m.dim() as f64)
    }

    /// The rearrangement `[1 − λ*|x|²]⁺`.
    pub fn sdr(&self) -> EllipsoidFunction {
        Self {
            m: SymMatrix::scaled_identity(self.m.dim(), self.mean_eigenvalue()),
        }
    }

    /// Exact `‖f − f*‖_∞ = max{1 − λ*/λ_max, 1 − λ_min/λ*}`.
    ///
    /// Along a ray with `q = ⟨v, Mv⟩` the two profiles differ by at most
    /// `1 − min(q, λ*)/max(q, λ*)`, which is largest at the extremal `q`.
    pub fn distance_to_sdr(&self) -> f64 {
        let e = self.m.eigen();
        let (hi, lo) = (e.max().0, e.min().0);
        let star = self.mean_eigenvalue();
        (1.0 - star / hi).max(1.0 - lo / star).max(0.0)
    }

    /// Bracket `((λmax − λmin)/(2λmax), (λmax − λmin)/λmin)` on `‖f − f*‖_∞`.
    pub fn distance_bounds(&self) -> (f64, f64) {
        let e = self.m.eigen();
        let (hi, lo) = (e.max().0, e.min().0);
        ((hi - lo) / (2.0 * hi), (hi - lo) / lo)
    }

    pub fn to_grid(&self, lattice: Lattice) -> Result<GridFunction> {
        GridFunction::from_fn(lattice, |x| self.eval(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn cone_rearrangement() {
        let c = ConeFunction::new(Point::new(vec![0.7, 0.0]).unwrap());
        assert_eq!(c.sdr().apex, Point::origin(2));
        assert!((c.distance_to_sdr() - 0.7).abs() < 1e-15);
        let far = ConeFunction::new(Point::new(vec![3.0, 4.0]).unwrap());
        assert_eq!(far.distance_to_sdr(), 1.0);
        let o = ConeFunction::new(Point::origin(2));
        assert_eq!(o.sdr(), o);
    }

    #[test]
    fn ellipsoid_rearrangement() {
        let e = EllipsoidFunction::new(SymMatrix::diagonal(&[2.0, 0.5])).unwrap();
        assert!(e.sdr().matrix().max_abs_diff(&SymMatrix::identity(2)) < 1e-15);
        let i = EllipsoidFunction::new(SymMatrix::identity(3)).unwrap();
        assert_eq!(i.sdr(), i);
        let e = EllipsoidFunction::new(SymMatrix::diagonal(&[4.0, 1.0, 1.0])).unwrap();
        let s = e.sdr().matrix().get(0, 0);
        assert!((s - 4f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!((s - 1.5874).abs() < 1e-4);
        assert!(EllipsoidFunction::new(SymMatrix::diagonal(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn ellipsoid_distance_against_dense_sampling() {
        let e = EllipsoidFunction::new(SymMatrix::diagonal(&[2.0, 0.5])).unwrap();
        let star = e.sdr();
        let mut brute: f64 = 0.0;
        let n = 2000;
        for i in 0..=n {
            for j in 0..=n {
                let x = [-1.5 + 3.0 * i as f64 / n as f64, -1.5 + 3.0 * j as f64 / n as f64];
                brute = brute.max((e.eval(&x) - star.eval(&x)).abs());
            }
        }
        let exact = e.distance_to_sdr();
        assert!((exact - 0.5).abs() < 1e-12);
        assert!(exact >= brute - 1e-12 && exact - brute < 5e-3, "{exact} {brute}");
        let (lo, hi) = e.distance_bounds();
        assert!(lo <= exact && exact <= hi);
    }
}
