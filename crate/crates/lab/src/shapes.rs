//! Initial data: exact cones and ellipsoids, and lattice sets with known
//! perimeter.

use std::f64::consts::PI;

use polarlab_core::geometry::sphere_area;
use polarlab_core::{ConeFunction, GridFunction, GridSet, Lattice, Point, SymMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    /// `[radius − |x − apex|]⁺`, Lipschitz with constant one.
    Cone {
        apex: Vec<f64>,
        #[serde(default = "one")]
        radius: f64,
    },
    /// `[1 − ⟨x, Mx⟩]⁺` from a diagonal or full row list. With `max_ratio`,
    /// the eigenvalues are pulled toward their geometric mean as
    /// `λ* (λ/λ*)^p` until `λmax/λmin ≤ max_ratio`; the determinant and the
    /// eigenvectors are kept.
    Ellipsoid {
        #[serde(default)]
        diagonal: Vec<f64>,
        #[serde(default)]
        rows: Vec<Vec<f64>>,
        #[serde(default)]
        max_ratio: Option<f64>,
    },
    /// Open axis-parallel cube.
    Cube { center: Vec<f64>, side: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    /// Planar annulus with a straight slot of width `notch` cut through the
    /// ring on the side of `+e₁`.
    AnnulusNotch {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
        notch: f64,
    },
}

fn check_len(what: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
        return config_err(format!("{what} needs {dim} finite coordinates"));
    }
    Ok(())
}

fn positive(what: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return config_err(format!("{what} must be positive"));
    }
    Ok(())
}

impl Initial {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Initial::Cone { apex, radius } => {
                check_len("apex", apex, dim)?;
                positive("radius", *radius)
            }
            Initial::Ellipsoid { max_ratio, .. } => {
                if let Some(r) = max_ratio {
                    if !(r.is_finite() && *r >= 1.0) {
                        return config_err("max_ratio must be at least 1");
                    }
                }
                self.ellipsoid_matrix(dim).map(|_| ())
            }
            Initial::Cube { center, side } => {
                check_len("center", center, dim)?;
                positive("side", *side)
            }
            Initial::Ball { center, radius } => {
                check_len("center", center, dim)?;
                positive("radius", *radius)
            }
            Initial::AnnulusNotch {
                center,
                inner,
                outer,
                notch,
            } => {
                if dim != 2 {
                    return config_err("annulus_notch is planar");
                }
                check_len("center", center, 2)?;
                positive("inner", *inner)?;
                positive("notch", *notch)?;
                if !(outer > inner && *notch < 2.0 * inner) {
                    return config_err("need inner < outer and notch < 2·inner");
                }
                Ok(())
            }
        }
    }

    /// Whether this describes a set rather than a function.
    pub fn is_set(&self) -> bool {
        matches!(
            self,
            Initial::Cube { .. } | Initial::Ball { .. } | Initial::AnnulusNotch { .. }
        )
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Initial::Cube { center, side } => x.iter().zip(center).all(|(a, c)| (a - c).abs() < side / 2.0),
            Initial::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>() < radius * radius
            }
            Initial::AnnulusNotch {
                center,
                inner,
                outer,
                notch,
            } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let r = dx.hypot(dy);
                r >= *inner && r <= *outer && !(dx > 0.0 && dy.abs() < notch / 2.0)
            }
            _ => false,
        }
    }

    /// The lattice set of cell centers inside the shape.
    pub fn set(&self, lattice: Lattice) -> Result<GridSet> {
        if !self.is_set() {
            return config_err("initial data is not a set");
        }
        Ok(GridSet::from_fn(lattice, |x| self.contains(x)))
    }

    /// Grid samples; sets become indicator functions.
    pub fn function(&self, lattice: Lattice) -> Result<GridFunction> {
        match self {
            Initial::Cone { apex, radius } => Ok(GridFunction::from_fn(lattice, |x| {
                let d = x.iter().zip(apex).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
                (radius - d).max(0.0)
            })?),
            Initial::Ellipsoid { .. } => {
                let m = self.ellipsoid_matrix(lattice.dim())?;
                Ok(GridFunction::from_fn(lattice, |x| (1.0 - m.quad_form(x)).max(0.0))?)
            }
            _ => Ok(self.set(lattice)?.indicator()),
        }
    }

    /// Analytic surface measure of the boundary, for sets.
    pub fn perimeter(&self, dim: usize) -> Option<f64> {
        match self {
            Initial::Cube { side, .. } => Some(2.0 * dim as f64 * side.powi(dim as i32 - 1)),
            Initial::Ball { radius, .. } => Some(sphere_area(dim) * radius.powi(dim as i32 - 1)),
            Initial::AnnulusNotch {
                inner, outer, notch, ..
            } => {
                let ao = (notch / (2.0 * outer)).asin();
                let ai = (notch / (2.0 * inner)).asin();
                let arcs = outer * (2.0 * PI - 2.0 * ao) + inner * (2.0 * PI - 2.0 * ai);
                Some(arcs + 2.0 * (outer * ao.cos() - inner * ai.cos()))
            }
            _ => None,
        }
    }

    /// `(c, α)` with `η(δ) ≤ c δ^α`, when known.
    pub fn holder(&self) -> Option<(f64, f64)> {
        match self {
            Initial::Cone { .. } => Some((1.0, 1.0)),
            _ => None,
        }
    }

    pub fn cone(&self) -> Result<ConeFunction> {
        match self {
            Initial::Cone { apex, radius } if *radius == 1.0 => Ok(ConeFunction::new(Point::new(apex.clone())?)),
            Initial::Cone { .. } => config_err("exact cones have radius 1"),
            _ => config_err("initial data is not a cone"),
        }
    }

    /// The (possibly compressed) matrix of an ellipsoid.
    pub fn ellipsoid_matrix(&self, dim: usize) -> Result<SymMatrix> {
        let Initial::Ellipsoid {
            diagonal,
            rows,
            max_ratio,
        } = self
        else {
            return config_err("initial data is not an ellipsoid");
        };
        let m = match (diagonal.is_empty(), rows.is_empty()) {
            (false, true) => {
                check_len("diagonal", diagonal, dim)?;
                SymMatrix::diagonal(diagonal)
            }
            (true, false) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return config_err(format!("rows must be {dim}×{dim}"));
                }
                SymMatrix::new(dim, rows.concat())?
            }
            _ => return config_err("give exactly one of diagonal and rows"),
        };
        if !m.is_positive_definite() {
            return Err(polarlab_core::Error::NotPositiveDefinite.into());
        }
        match max_ratio {
            Some(r) => Ok(compress(&m, *r)?),
            None => Ok(m),
        }
    }
}

/// Eigenvalues mapped to `λ* (λ/λ*)^p` with the largest `p ≤ 1` giving
/// `λmax/λmin ≤ max_ratio`.
pub fn compress(m: &SymMatrix, max_ratio: f64) -> polarlab_core::Result<SymMatrix> {
    let e = m.eigen();
    let (hi, lo) = (e.max().0, e.min().0);
    let ratio = hi / lo;
    if ratio <= max_ratio {
        return Ok(m.clone());
    }
    // Shrink p slightly so rounding cannot leave the ratio above the cap.
    let p = max_ratio.ln() / ratio.ln() * (1.0 - 1e-12);
    let mean = e.values.iter().map(|v| v.ln()).sum::<f64>() / e.values.len() as f64;
    let values: Vec<f64> = e.values.iter().map(|v| (mean + p * (v.ln() - mean)).exp()).collect();
    SymMatrix::from_eigen(&values, &e.vectors)
}

/// Largest norm of a cell center carrying a nonzero value.
pub fn support_radius(f: &GridFunction) -> f64 {
    let lat = f.lattice();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(c, _)| lat.center(c).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_perimeter_thin_notch_limit() {
        let shape = Initial::AnnulusNotch {
            center: vec![0.0, 0.0],
            inner: 0.5,
            outer: 1.0,
            notch: 1e-9,
        };
        // Two slot walls of length outer − inner remain.
        assert!((shape.perimeter(2).unwrap() - (3.0 * PI + 1.0)).abs() < 1e-6);
        let cube = Initial::Cube {
            center: vec![0.0; 3],
            side: 2.0,
        };
        assert_eq!(cube.perimeter(3), Some(24.0));
    }

    #[test]
    fn compression_keeps_determinant_and_caps_ratio() {
        let m = SymMatrix::diagonal(&[1.4, 1.2, 25.0 / 42.0]);
        let c = compress(&m, 2.0).unwrap();
        let e = c.eigen();
        assert!(e.max().0 / e.min().0 <= 2.0);
        assert!(e.max().0 / e.min().0 > 2.0 - 1e-9);
        assert!((c.det() - m.det()).abs() < 1e-12);
        assert_eq!(compress(&SymMatrix::diagonal(&[1.5, 1.0]), 2.0).unwrap(), SymMatrix::diagonal(&[1.5, 1.0]));
    }

    #[test]
    fn sets_on_lattice() {
        let lat = Lattice::new(2, 2.0, 128).unwrap();
        let ball = Initial::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let s = ball.set(lat).unwrap();
        assert!((s.volume() - PI).abs() < 0.05);
        assert!((support_radius(&s.indicator()) - 1.0).abs() < 2.0 * lat.spacing());
        assert!(Initial::Cone {
            apex: vec![0.5, 0.0],
            radius: 1.0
        }
        .set(lat)
        .is_err());
    }
}
