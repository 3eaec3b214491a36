//! Orbits of a point of `𝕊^(d−1)` under the folding maps of a finite
//! direction set, and empirical density diagnostics.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{dot, Direction, PolarParam};

/// Orbit points closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-9;

const DISTINCT_TOL: f64 = 1e-10;

/// A finite nonempty set `G` of pairwise distinct unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet(Vec<Direction>);

impl DirectionSet {
    pub fn new(directions: Vec<Direction>) -> Result<Self> {
        let first = directions.first().ok_or(Error::EmptySet)?;
        let d = first.dim();
        if let Some(u) = directions.iter().find(|u| u.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.dim(),
            });
        }
        for (i, u) in directions.iter().enumerate() {
            for v in &directions[..i] {
                if chord(u.coords(), v.coords()) < DISTINCT_TOL {
                    return Err(Error::InvalidSpec("directions must be pairwise distinct".into()));
                }
            }
        }
        Ok(Self(directions))
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.0
    }
}

fn chord(a: &[f64], b: &[f64]) -> f64 {
    crate::geometry::dist(a, b)
}

/// Grid hash over ℝᵈ with cell side [`DEDUP_TOL`]; a query inspects the
/// `3ᵈ` neighbouring cells.
struct PointIndex {
    cells: BTreeMap<Vec<i64>, Vec<usize>>,
}

impl PointIndex {
    fn key(x: &[f64]) -> Vec<i64> {
        x.iter().map(|c| (c / DEDUP_TOL).floor() as i64).collect()
    }

    fn contains_near(&self, x: &[f64], points: &[Direction]) -> bool {
        let base = Self::key(x);
        let d = base.len();
        let mut key = base.clone();
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            for k in 0..d {
                key[k] = base[k] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(ids) = self.cells.get(&key) {
                if ids.iter().any(|&i| chord(points[i].coords(), x) < DEDUP_TOL) {
                    return true;
                }
            }
        }
        false
    }

    fn insert(&mut self, x: &[f64], id: usize) {
        self.cells.entry(Self::key(x)).or_default().push(id);
    }
}

/// Breadth-first closure of `{x}` under the folding maps `τ_u`, `u ∈ G`
/// (fix `{⟨·,u⟩ ≤ 0}`, reflect the rest), stopping at `budget` points.
/// Points are listed in discovery order, so smaller budgets give prefixes.
pub fn orbit_expand(g: &DirectionSet, x: &Direction, budget: usize) -> Result<Vec<Direction>> {
    if x.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: x.dim(),
        });
    }
    if budget == 0 {
        return Err(Error::PreconditionViolated("budget must be at least 1".into()));
    }
    let folds: Vec<PolarParam> = g.0.iter().cloned().map(PolarParam::direction).collect();
    let mut points = vec![x.clone()];
    let mut index = PointIndex {
        cells: BTreeMap::new(),
    };
    index.insert(x.coords(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut y = vec![0.0; x.dim()];
    while let Some(i) = queue.pop_front() {
        for w in &folds {
            if points.len() >= budget {
                return Ok(points);
            }
            w.fold_into(points[i].coords(), &mut y);
            let Ok(p) = Direction::new(y.clone()) else {
                continue;
            };
            if !index.contains_near(p.coords(), &points) {
                index.insert(p.coords(), points.len());
                queue.push_back(points.len());
                points.push(p);
            }
        }
    }
    Ok(points)
}

/// Static kd-tree over points of ℝᵈ for nearest-neighbour queries.
struct KdTree<'a> {
    points: &'a [Direction],
    /// Implicit balanced tree: `order[lo..hi]` with the median as node.
    order: Vec<usize>,
    dim: usize,
}

impl<'a> KdTree<'a> {
    fn new(points: &'a [Direction]) -> Self {
        let dim = points[0].dim();
        let mut order: Vec<usize> = (0..points.len()).collect();
        Self::build(points, &mut order, 0, dim);
        Self { points, order, dim }
    }

    fn build(points: &[Direction], idx: &mut [usize], depth: usize, dim: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % dim;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            points[a].coords()[axis].total_cmp(&points[b].coords()[axis])
        });
        let (left, right) = idx.split_at_mut(mid);
        Self::build(points, left, depth + 1, dim);
        Self::build(points, &mut right[1..], depth + 1, dim);
    }

    /// Squared Euclidean distance to the nearest point.
    fn nearest_sq(&self, q: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        self.search(q, 0, self.order.len(), 0, &mut best);
        best
    }

    fn search(&self, q: &[f64], lo: usize, hi: usize, depth: usize, best: &mut f64) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let p = self.points[self.order[mid]].coords();
        let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < *best {
            *best = d2;
        }
        let axis = depth % self.dim;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, depth + 1, best);
        if diff * diff < *best {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let b = base as f64;
    let (mut x, mut f) = (0.0, 1.0 / b);
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f /= b;
    }
    x
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Quasi-uniform probe points on `𝕊^(d−1)`: equispaced on the circle, a
/// Fibonacci lattice on `𝕊²`, Halton points pushed through Box–Muller
/// otherwise.
pub fn sphere_probes(dim: usize, count: usize) -> Vec<Direction> {
    match dim {
        1 => vec![Direction::axis(1, 0, true), Direction::axis(1, 0, false)],
        2 => (0..count)
            .map(|k| Direction::from_angle(2.0 * PI * (k as f64 + 0.5) / count as f64))
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (golden * k as f64).sin_cos();
                    Direction::new(vec![r * c, r * s, z]).expect("unit by construction")
                })
                .collect()
        }
        _ => {
            let pairs = dim.div_ceil(2);
            (1..)
                .filter_map(|k: u64| {
                    let mut v = Vec::with_capacity(dim);
                    for j in 0..pairs {
                        let u1 = radical_inverse(k, PRIMES[(2 * j) % PRIMES.len()]).max(1e-300);
                        let u2 = radical_inverse(k, PRIMES[(2 * j + 1) % PRIMES.len()]);
                        let rad = (-2.0 * u1.ln()).sqrt();
                        let (s, c) = (2.0 * PI * u2).sin_cos();
                        v.push(rad * c);
                        v.push(rad * s);
                    }
                    v.truncate(dim);
                    Direction::new(v).ok()
                })
                .take(count)
                .collect()
        }
    }
}

/// Largest angular distance from a probe point to its nearest sample point.
pub fn covering_radius(sample: &[Direction], probes: usize) -> Result<f64> {
    let first = sample.first().ok_or(Error::EmptySet)?;
    let tree = KdTree::new(sample);
    let worst = sphere_probes(first.dim(), probes)
        .iter()
        .map(|p| tree.nearest_sq(p.coords()))
        .fold(0.0, f64::max);
    let chord = worst.sqrt().min(2.0);
    Ok(2.0 * (chord / 2.0).asin())
}

/// Outcome of the three screening tests for a generating set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicReport {
    /// `G` spans ℝᵈ.
    pub spans: bool,
    /// `G` admits no partition into two mutually orthogonal parts.
    pub connected: bool,
    /// Heuristic: some pairwise angle is farther than the tolerance from
    /// every `pπ/q` with `q ≤ Q`.
    pub irrational_angle: bool,
}

/// Tolerance of the rationality screen.
pub const RATIONAL_TOL: f64 = 1e-9;

fn rank(vectors: &[Direction]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for u in vectors {
        let mut v = u.coords().to_vec();
        for b in &basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-10 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis.len()
}

fn looks_irrational(theta: f64, max_q: u64) -> bool {
    (1..=max_q).all(|q| {
        let p = (theta * q as f64 / PI).round();
        (theta - p * PI / q as f64).abs() > RATIONAL_TOL
    })
}

pub fn generating_heuristics(g: &DirectionSet, max_q: u64) -> Result<HeuristicReport> {
    if max_q == 0 {
        return Err(Error::PreconditionViolated("max denominator must be at least 1".into()));
    }
    let dirs = g.directions();
    let n = dirs.len();
    let spans = rank(dirs) == g.dim();

    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && dirs[i].dot(&dirs[j]).abs() > 1e-12 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let connected = seen.iter().all(|&s| s);

    let irrational_angle = (0..n).any(|i| {
        (0..i).any(|j| looks_irrational(dirs[i].dot(&dirs[j]).clamp(-1.0, 1.0).acos(), max_q))
    });
    Ok(HeuristicReport {
        spans,
        connected,
        irrational_angle,
    })
}
