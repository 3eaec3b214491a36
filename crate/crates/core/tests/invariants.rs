use polarlab_core::geometry::Side;
use polarlab_core::metrics::{delta_drop_count, hausdorff, i_functional, symm_diff_volume};
use polarlab_core::polarize::{polarization_drop, polarize_grid, polarize_set, Mode};
use polarlab_core::steiner::{eigen_gap, eval_gap_bound, steiner_ellipsoid, steiner_grid};
use polarlab_core::{Direction, GridFunction, GridSet, Lattice, Point, PolarParam, SymMatrix};
use proptest::prelude::*;

fn sorted(v: &[f64]) -> Vec<u64> {
    let mut bits: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
    bits.sort_unstable();
    bits
}

fn direction(dim: usize) -> impl Strategy<Value = Direction> {
    prop::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| Direction::new(v).unwrap())
}

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-3.0f64..3.0, dim).prop_map(|v| Point::new(v).unwrap())
}

fn param(dim: usize) -> impl Strategy<Value = PolarParam> {
    (0.0f64..4.0, direction(dim)).prop_map(|(r, u)| PolarParam::new(r, u).unwrap())
}

/// Random grid function on an `n × n` lattice, supported in a disk and with
/// a few repeated values to exercise ties.
fn grid(n: usize) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(prop_oneof![Just(0.0), Just(0.5), 0.0f64..1.0], n * n).prop_map(move |v| {
        let lat = Lattice::new(2, 1.0, n).unwrap();
        let mut x = [0.0; 2];
        let vals = v
            .into_iter()
            .enumerate()
            .map(|(c, a)| {
                lat.center_into(c, &mut x);
                if x[0] * x[0] + x[1] * x[1] < 0.9 {
                    a
                } else {
                    0.0
                }
            })
            .collect();
        GridFunction::new(lat, vals).unwrap()
    })
}

/// Lattice-compatible mirror `(k h, ±e_axis)` with `k ≥ 1`.
fn lattice_mirror(n: usize) -> impl Strategy<Value = PolarParam> {
    (1..n, 0..2usize, any::<bool>()).prop_map(move |(k, axis, pos)| {
        let h = 2.0 / n as f64;
        PolarParam::new(k as f64 * h, Direction::axis(2, axis, pos)).unwrap()
    })
}

fn spd(dim: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0f64..1.0, dim * dim).prop_map(move |a| {
        // AᵀA + 0.2 I is safely positive definite.
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                m[i * dim + j] = (0..dim).map(|k| a[k * dim + i] * a[k * dim + j]).sum::<f64>()
                    + if i == j { 0.2 } else { 0.0 };
            }
        }
        SymMatrix::new(dim, m).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_isometric_involution(w in param(3), x in point(3), y in point(3)) {
        let back = w.reflect(&w.reflect(&x));
        prop_assert!(back.distance(&x) < 1e-12);
        prop_assert!((w.reflect(&x).distance(&w.reflect(&y)) - x.distance(&y)).abs() < 1e-12);
    }

    #[test]
    fn folding_moves_toward_origin(w in param(3), x in point(3)) {
        let f = w.fold(&x);
        prop_assert!(f.norm() <= x.norm() + 1e-12);
        prop_assert_eq!(w.fold(&f), f);
        if w.r > 0.0 {
            prop_assert_eq!(w.half_space_side(&Point::origin(3)), Side::Positive);
        }
    }

    #[test]
    fn rearrangement_invariants(f in grid(12), g in grid(12)) {
        let s = f.sdr();
        prop_assert_eq!(sorted(f.values()), sorted(s.values()));
        let order = f.lattice().radial_order();
        prop_assert!(order.windows(2).all(|w| s.get(w[0]) >= s.get(w[1])));
        prop_assert_eq!(s.sdr(), s.clone());
        prop_assert!(s.sup_distance(&g.sdr()).unwrap() <= f.sup_distance(&g).unwrap());
        for t in [0.0, 0.25, 0.5, 0.75] {
            prop_assert_eq!(s.level_set(t).count(), f.level_set(t).count());
        }
        prop_assert!(i_functional(&s) <= i_functional(&f) + 1e-12);
    }

    #[test]
    fn exact_polarization_invariants(f in grid(16), g in grid(16), w in lattice_mirror(16)) {
        let p = polarize_grid(&f, &w, Mode::MirrorExact).unwrap();
        prop_assert_eq!(sorted(f.values()), sorted(p.values()));
        prop_assert_eq!(polarize_grid(&p, &w, Mode::MirrorExact).unwrap(), p.clone());
        let q = polarize_grid(&g, &w, Mode::MirrorExact).unwrap();
        prop_assert!(p.sup_distance(&q).unwrap() <= f.sup_distance(&g).unwrap());
        let drop = i_functional(&f) - i_functional(&p);
        prop_assert!(drop >= -1e-12);
        prop_assert!((polarization_drop(&f, &w).unwrap() - drop).abs() < 1e-10);
    }

    #[test]
    fn interpolated_polarization_is_nonexpansive(f in grid(16), g in grid(16), w in param(2)) {
        let p = polarize_grid(&f, &w, Mode::Interp).unwrap();
        let q = polarize_grid(&g, &w, Mode::Interp).unwrap();
        prop_assert!(p.sup_distance(&q).unwrap() <= f.sup_distance(&g).unwrap() + 1e-15);
    }

    #[test]
    fn steiner_dominates_polarization(f in grid(16), w in lattice_mirror(16)) {
        let axis = w.u.as_axis().unwrap().0;
        let s = steiner_grid(&f, &Direction::axis(2, axis, true)).unwrap();
        let p = polarize_grid(&f, &w, Mode::MirrorExact).unwrap();
        let (is, ip, i0) = (i_functional(&s), i_functional(&p), i_functional(&f));
        prop_assert!(is <= ip + 1e-12 && ip <= i0 + 1e-12);
        prop_assert!(i_functional(&f.sdr()) <= is + 1e-12);
    }

    #[test]
    fn axis_steiner_invariants(f in grid(15), axis in 0..2usize) {
        let lat = *f.lattice();
        let u = Direction::axis(2, axis, true);
        let s = steiner_grid(&f, &u).unwrap();
        prop_assert_eq!(steiner_grid(&s, &u).unwrap(), s.clone());
        let n = lat.cells_per_axis();
        let stride = lat.stride(axis);
        for start in (0..lat.len()).filter(|&c| lat.axis_index(c, axis) == 0) {
            let line = |g: &GridFunction| (0..n).map(|i| g.get(start + i * stride)).collect::<Vec<_>>();
            let (a, b) = (line(&f), line(&s));
            prop_assert_eq!(sorted(&a), sorted(&b));
            // Every superlevel set on the line is an interval centered within
            // half a cell.
            for t in b.iter().copied() {
                let idx: Vec<usize> = (0..n).filter(|&i| b[i] > t).collect();
                if let (Some(&lo), Some(&hi)) = (idx.first(), idx.last()) {
                    prop_assert_eq!(hi - lo + 1, idx.len());
                    let mid = (lo + hi) as f64 / 2.0;
                    prop_assert!((mid - (n as f64 - 1.0) / 2.0).abs() <= 0.5);
                }
            }
        }
    }

    #[test]
    fn ellipsoid_steiner_invariants(m in spd(3), u in direction(3)) {
        let m2 = steiner_ellipsoid(&m, &u).unwrap();
        prop_assert!((m2.det() - m.det()).abs() < 1e-10 * m.det().max(1.0));
        let (hi, lo, _) = eigen_gap(&m);
        let (hi2, lo2, gap2) = eigen_gap(&m2);
        prop_assert!(hi2 <= hi + 1e-10 && lo2 >= lo - 1e-10);
        prop_assert!(gap2 >= eval_gap_bound(&m, &u).unwrap() - 1e-10);
    }

    #[test]
    fn set_polarization_and_symmetric_difference(
        bits in prop::collection::vec(any::<bool>(), 16 * 16),
        w in lattice_mirror(16),
    ) {
        let lat = Lattice::new(2, 1.0, 16).unwrap();
        let a = GridSet::from_cells(lat, (0..lat.len()).filter(|&c| bits[c] && lat.center(c).norm() < 0.95));
        let star = a.sdr();
        let b = polarize_set(&a, &w, Mode::MirrorExact).unwrap();
        prop_assert_eq!(b.count(), a.count());
        let before = a.symm_diff_count(&star).unwrap();
        let after = b.symm_diff_count(&star).unwrap();
        prop_assert_eq!(before % 2, 0);
        prop_assert_eq!(after % 2, 0);
        prop_assert_eq!(before - after, 2 * delta_drop_count(&a, &star, &w).unwrap());
        prop_assert!(symm_diff_volume(&b, &star).unwrap() <= symm_diff_volume(&a, &star).unwrap());
    }

    #[test]
    fn hausdorff_triangle_inequality(
        a in prop::collection::btree_set(0usize..256, 1..20),
        b in prop::collection::btree_set(0usize..256, 1..20),
        c in prop::collection::btree_set(0usize..256, 1..20),
    ) {
        let lat = Lattice::new(2, 1.0, 16).unwrap();
        let (a, b, c) = (
            GridSet::from_cells(lat, a),
            GridSet::from_cells(lat, b),
            GridSet::from_cells(lat, c),
        );
        let ab = hausdorff(&a, &b).unwrap();
        let bc = hausdorff(&b, &c).unwrap();
        let ac = hausdorff(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
    }
}
