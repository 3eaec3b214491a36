//! Steiner symmetrization of grid functions and the closed-form calculus of
//! Steiner symmetrization on ellipsoids `[1 − ⟨x, Mx⟩]⁺`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{dot, Direction};
use crate::grid::{GridFunction, GridSet};
use crate::linalg::SymMatrix;

/// Tolerance on `det M = 1` accepted by [`ellipsoid_to_ball`].
pub const UNIT_DET_TOL: f64 = 1e-8;

/// Line positions in placement order: nearest the center first, ties toward
/// the lower index.
fn placement_order(n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ((2 * i + 1).abs_diff(n), i));
    order
}

/// Symmetric decreasing rearrangement of every lattice line along `axis`.
fn steiner_axis(f: &GridFunction, axis: usize) -> GridFunction {
    let lat = *f.lattice();
    let n = lat.cells_per_axis();
    let stride = lat.stride(axis);
    let order = placement_order(n);
    let src = f.values();
    let mut out = vec![0.0; lat.len()];
    let mut line = vec![0.0; n];
    // A line is identified by its first cell: flat indices with axis index 0.
    for start in (0..lat.len()).filter(|&c| lat.axis_index(c, axis) == 0) {
        for (i, v) in line.iter_mut().enumerate() {
            *v = src[start + i * stride];
        }
        line.sort_unstable_by(|a, b| b.total_cmp(a));
        for (v, &pos) in line.iter().zip(&order) {
            out[start + pos * stride] = *v;
        }
    }
    GridFunction::from_raw(lat, out)
}

/// Householder reflection `H = I − 2wwᵀ/|w|²` with `He₁ = u`, as a matrix.
fn householder_to(u: &Direction) -> SymMatrix {
    let d = u.dim();
    let mut w: Vec<f64> = u.coords().iter().map(|x| -x).collect();
    w[0] += 1.0;
    let wn = dot(&w, &w);
    if wn < 1e-30 {
        return SymMatrix::identity(d);
    }
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { 1.0 } else { 0.0 };
            data[i * d + j] = id - 2.0 * w[i] * w[j] / wn;
        }
    }
    SymMatrix::new(d, data).expect("Householder matrix is symmetric")
}

fn resample(f: &GridFunction, map: &SymMatrix) -> GridFunction {
    let lat = *f.lattice();
    let d = lat.dim();
    let mut x = [0.0; 8];
    let values = (0..lat.len())
        .map(|c| {
            lat.center_into(c, &mut x[..d]);
            let y = map.mul_vec(&x[..d]);
            f.interpolate(&y)
        })
        .collect();
    GridFunction::from_raw(lat, values)
}

/// Steiner symmetrization `S_u f` about the hyperplane `u⊥`.
///
/// For `u = ±e_k` every lattice line along axis `k` is rearranged exactly:
/// samples sorted in decreasing order are placed from the center outward,
/// ties toward the negative side. Other directions rotate by a Householder
/// reflection taking `e₁` to `u`, resample multilinearly, symmetrize along
/// the first axis and resample back, at an `O(h·Lip f)` cost.
pub fn steiner_grid(f: &GridFunction, u: &Direction) -> Result<GridFunction> {
    let lat = f.lattice();
    if u.dim() != lat.dim() {
        return Err(Error::DimensionMismatch {
            expected: lat.dim(),
            got: u.dim(),
        });
    }
    if let Some((axis, _)) = u.as_axis() {
        return Ok(steiner_axis(f, axis));
    }
    let h = householder_to(u);
    let rotated = resample(f, &h);
    Ok(resample(&steiner_axis(&rotated, 0), &h))
}

/// Steiner symmetrization of a set along a lattice axis.
pub fn steiner_set(a: &GridSet, axis: usize) -> Result<GridSet> {
    let lat = *a.lattice();
    if axis >= lat.dim() {
        return Err(Error::DimensionMismatch {
            expected: lat.dim(),
            got: axis + 1,
        });
    }
    Ok(steiner_axis(&a.indicator(), axis).level_set(0.5))
}

fn check_square(m: &SymMatrix, u: &Direction) -> Result<()> {
    if m.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: u.dim(),
        });
    }
    Ok(())
}

/// Matrix of `S_u [1 − ⟨x, Mx⟩]⁺`:
/// `M′ = M − (Mu)(Mu)ᵀ/⟨u,Mu⟩ + ⟨u,Mu⟩ uuᵀ`.
pub fn steiner_ellipsoid(m: &SymMatrix, u: &Direction) -> Result<SymMatrix> {
    check_square(m, u)?;
    if !m.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let d = m.dim();
    let u = u.coords();
    let mu = m.mul_vec(u);
    let q = dot(u, &mu);
    let mut data = m.as_slice().to_vec();
    for i in 0..d {
        for j in 0..d {
            data[i * d + j] += q * u[i] * u[j] - mu[i] * mu[j] / q;
        }
    }
    SymMatrix::new(d, data)
}

/// `(λmax, λmin, λmax − λmin)`.
pub fn eigen_gap(m: &SymMatrix) -> (f64, f64, f64) {
    let e = m.eigen();
    let (hi, lo) = (e.max().0, e.min().0);
    (hi, lo, (hi - lo).max(0.0))
}

/// `ψ(t) = t²(1 − t²)`.
pub fn psi(t: f64) -> f64 {
    let t2 = t * t;
    t2 * (1.0 - t2)
}

/// Lower bound `(1 − Cψ(⟨u,v_max⟩) − 2ψ(⟨u,v_min⟩))(λmax − λmin)` on the
/// eigenvalue gap of `steiner_ellipsoid(M, u)`, with `C = 1 + λmax/λmin`.
pub fn eval_gap_bound(m: &SymMatrix, u: &Direction) -> Result<f64> {
    check_square(m, u)?;
    let e = m.eigen();
    let (hi, vmax) = e.max();
    let (lo, vmin) = e.min();
    let c = 1.0 + hi / lo;
    let factor = 1.0 - c * psi(u.dot(vmax)) - 2.0 * psi(u.dot(vmin));
    Ok(factor * (hi - lo))
}

/// Gram–Schmidt completion of `basis` inside the orthogonal complement of
/// `fixed`.
fn complement_basis(d: usize, fixed: &[Direction]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - fixed.len());
    for k in 0..d {
        if basis.len() + fixed.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for w in fixed.iter().map(|w| w.coords()).chain(basis.iter().map(|b| b.as_slice())) {
            let p = dot(&v, w);
            for (vi, wi) in v.iter_mut().zip(w) {
                *vi -= p * wi;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Directions `u₁, …, u_(d−1)` such that Steiner symmetrizing `M` (with
/// `det M = 1`) along them in order yields the identity.
///
/// Each `uᵢ` is orthogonal to its predecessors and satisfies
/// `⟨uᵢ, M_(i−1) uᵢ⟩ = 1`. The restricted form on the remaining subspace has
/// unit determinant, so its extremal eigenvalues bracket 1 and `uᵢ` is taken
/// in closed form on the great circle from the minimizing to the maximizing
/// eigenvector.
pub fn ellipsoid_to_ball(m: &SymMatrix) -> Result<Vec<Direction>> {
    if !m.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let det = m.det();
    if (det - 1.0).abs() > UNIT_DET_TOL {
        return Err(Error::NotUnitDeterminant(det));
    }
    let d = m.dim();
    let mut current = m.clone();
    let mut chosen: Vec<Direction> = Vec::with_capacity(d.saturating_sub(1));
    for _ in 1..d {
        let q = complement_basis(d, &chosen);
        let k = q.len();
        let mut r = vec![0.0; k * k];
        for a in 0..k {
            let mq = current.mul_vec(&q[a]);
            for b in 0..k {
                r[a * k + b] = dot(&q[b], &mq);
            }
        }
        let e = SymMatrix::new(k, r)?.eigen();
        let (hi, vmax) = e.max();
        let (lo, vmin) = e.min();
        let (c, s) = if hi - lo < 1e-14 {
            (1.0, 0.0)
        } else {
            let s2 = ((1.0 - lo) / (hi - lo)).clamp(0.0, 1.0);
            ((1.0 - s2).sqrt(), s2.sqrt())
        };
        let mut u = vec![0.0; d];
        for (a, qa) in q.iter().enumerate() {
            let coef = c * vmin.coords()[a] + s * vmax.coords()[a];
            for (ui, qi) in u.iter_mut().zip(qa) {
                *ui += coef * qi;
            }
        }
        let u = Direction::new(u)?;
        current = steiner_ellipsoid(&current, &u)?;
        chosen.push(u);
    }
    Ok(chosen)
}

/// Applies [`steiner_ellipsoid`] along each direction in turn.
pub fn steiner_ellipsoid_seq(m: &SymMatrix, dirs: &[Direction]) -> Result<SymMatrix> {
    dirs.iter()
        .try_fold(m.clone(), |acc, u| steiner_ellipsoid(&acc, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn diag2() -> SymMatrix {
        SymMatrix::diagonal(&[2.0, 0.5])
    }

    fn diagonal_u() -> Direction {
        Direction::new(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
    }

    /// Independent 1-D oracle: pick the largest remaining value and put it at
    /// the free position closest to the center, lower index on ties.
    fn place_brute(samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        let mut left: Vec<f64> = samples.to_vec();
        let mut out = vec![f64::NAN; n];
        let center = (n as f64 - 1.0) / 2.0;
        while !left.is_empty() {
            let (k, &v) = left
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            left.remove(k);
            let pos = (0..n)
                .filter(|&i| out[i].is_nan())
                .min_by(|&i, &j| {
                    (i as f64 - center)
                        .abs()
                        .total_cmp(&(j as f64 - center).abs())
                        .then(i.cmp(&j))
                })
                .unwrap();
            out[pos] = v;
        }
        out
    }

    #[test]
    fn placement_examples() {
        let lat = Lattice::new(1, 1.0, 5).unwrap();
        let f = GridFunction::new(lat, vec![0.0, 3.0, 1.0, 2.0, 0.0]).unwrap();
        let g = steiner_grid(&f, &Direction::axis(1, 0, true)).unwrap();
        assert_eq!(g.values(), &[0.0, 2.0, 3.0, 1.0, 0.0]);
        assert_eq!(place_brute(f.values()), g.values());
        let lat = Lattice::new(1, 1.0, 6).unwrap();
        let raw = vec![0.1, 0.7, 0.0, 0.4, 0.9, 0.2];
        let f = GridFunction::new(lat, raw.clone()).unwrap();
        let g = steiner_grid(&f, &Direction::axis(1, 0, false)).unwrap();
        assert_eq!(g.values(), place_brute(&raw).as_slice());
    }

    #[test]
    fn radial_function_is_fixed() {
        let lat = Lattice::new(2, 1.0, 33).unwrap();
        let f = GridFunction::from_fn(lat, |x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0)).unwrap();
        for k in 0..2 {
            let g = steiner_grid(&f, &Direction::axis(2, k, true)).unwrap();
            assert!(g.sup_distance(&f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rectangle_is_recentered() {
        let lat = Lattice::new(2, 1.0, 16).unwrap();
        let rect = GridSet::from_fn(lat, |x| (0.1..0.6).contains(&x[0]) && (0.2..0.9).contains(&x[1]));
        let out = steiner_set(&rect, 1).unwrap();
        let expected = GridSet::from_fn(lat, |x| (0.1..0.6).contains(&x[0]) && (-0.35..0.25).contains(&x[1]));
        assert_eq!(out, expected);
        let g = steiner_grid(&rect.indicator(), &Direction::axis(2, 1, true)).unwrap();
        assert_eq!(g, expected.indicator());
    }

    #[test]
    fn general_direction_matches_axis_for_rotated_data() {
        // A centered ellipse symmetrized along a diagonal agrees with the
        // closed-form ellipsoid update up to O(h).
        let lat = Lattice::new(2, 1.5, 96).unwrap();
        let m = diag2();
        let f = GridFunction::from_fn(lat, |x| (1.0 - m.quad_form(x)).max(0.0)).unwrap();
        let u = diagonal_u();
        let g = steiner_grid(&f, &u).unwrap();
        let m2 = steiner_ellipsoid(&m, &u).unwrap();
        let exact = GridFunction::from_fn(lat, |x| (1.0 - m2.quad_form(x)).max(0.0)).unwrap();
        assert!(g.sup_distance(&exact).unwrap() < 8.0 * lat.spacing());
        let l1 = g.l1_distance(&exact).unwrap();
        assert!(l1 < 2.0 * lat.spacing(), "{l1}");
    }

    #[test]
    fn ellipsoid_examples() {
        let m = diag2();
        assert_eq!(steiner_ellipsoid(&m, &Direction::axis(2, 0, true)).unwrap(), m);
        let m2 = steiner_ellipsoid(&m, &diagonal_u()).unwrap();
        let want = SymMatrix::new(2, vec![1.025, 0.225, 0.225, 1.025]).unwrap();
        assert!(m2.max_abs_diff(&want) < 1e-15);
        assert!((m2.quad_form(diagonal_u().coords()) - 1.25).abs() < 1e-15);
        assert!((m2.det() - 1.0).abs() < 1e-14);
        let mu = m2.mul_vec(diagonal_u().coords());
        assert!(mu.iter().all(|x| (x - 1.25 * FRAC_1_SQRT_2).abs() < 1e-15));

        let ball = SymMatrix::scaled_identity(3, 2.5);
        let u = Direction::new(vec![1.0, -2.0, 0.5]).unwrap();
        assert!(steiner_ellipsoid(&ball, &u).unwrap().max_abs_diff(&ball) < 1e-15);
        assert_eq!(
            steiner_ellipsoid(&SymMatrix::diagonal(&[1.0, -1.0]), &diagonal_u()),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn gap_examples() {
        assert_eq!(eigen_gap(&diag2()), (2.0, 0.5, 1.5));
        assert_eq!(eigen_gap(&SymMatrix::identity(3)), (1.0, 1.0, 0.0));
        let m2 = steiner_ellipsoid(&diag2(), &diagonal_u()).unwrap();
        let (hi, lo, gap) = eigen_gap(&m2);
        assert!((hi - 1.25).abs() < 1e-13 && (lo - 0.8).abs() < 1e-13);
        assert!((gap - 0.45).abs() < 1e-13);

        let b = eval_gap_bound(&diag2(), &diagonal_u()).unwrap();
        assert!((b + 1.125).abs() < 1e-14);
        assert!(gap >= b);
        assert_eq!(eval_gap_bound(&diag2(), &Direction::axis(2, 0, true)).unwrap(), 1.5);
        let m3 = SymMatrix::diagonal(&[4.0, 2.0, 1.0]);
        assert_eq!(eval_gap_bound(&m3, &Direction::axis(3, 1, false)).unwrap(), 3.0);
    }

    #[test]
    fn ellipsoid_to_ball_examples() {
        let dirs = ellipsoid_to_ball(&diag2()).unwrap();
        assert_eq!(dirs.len(), 1);
        assert!((dirs[0].coords()[1].powi(2) - 2.0 / 3.0).abs() < 1e-12);
        let out = steiner_ellipsoid_seq(&diag2(), &dirs).unwrap();
        assert!(out.max_abs_diff(&SymMatrix::identity(2)) < 1e-8);

        let m = SymMatrix::diagonal(&[4.0, 1.0, 0.25]);
        let dirs = ellipsoid_to_ball(&m).unwrap();
        assert_eq!(dirs.len(), 2);
        assert!(dirs[0].dot(&dirs[1]).abs() < 1e-12);
        let out = steiner_ellipsoid_seq(&m, &dirs).unwrap();
        assert!(out.max_abs_diff(&SymMatrix::identity(3)) < 1e-8);

        let out = steiner_ellipsoid_seq(
            &SymMatrix::identity(3),
            &ellipsoid_to_ball(&SymMatrix::identity(3)).unwrap(),
        )
        .unwrap();
        assert!(out.max_abs_diff(&SymMatrix::identity(3)) < 1e-15);

        assert!(matches!(
            ellipsoid_to_ball(&SymMatrix::diagonal(&[2.0, 1.0])),
            Err(Error::NotUnitDeterminant(_))
        ));
    }
}
