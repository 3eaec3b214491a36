//! Exact squared Euclidean distance transforms on the lattice, in units of
//! the cell spacing.
//!
//! Separable lower-envelope algorithm of Felzenszwalb and Huttenlocher with
//! all parabola intersections compared as exact rationals, so results are
//! integers and reproducible bit-for-bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Lattice;

/// Squared distance of a cell with no site in reach.
pub const UNREACHABLE: u64 = u64::MAX;

/// `s = num/den` with `den > 0`.
#[derive(Clone, Copy)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn le(self, other: Frac) -> bool {
        self.num * other.den <= other.num * self.den
    }

    fn lt_int(self, q: i128) -> bool {
        self.num < q * self.den
    }
}

/// Intersection abscissa of the parabolas rooted at `p < q`.
fn meet(f: &[u64], p: usize, q: usize) -> Frac {
    let (pi, qi) = (p as i128, q as i128);
    Frac {
        num: (f[q] as i128 + qi * qi) - (f[p] as i128 + pi * pi),
        den: 2 * (qi - pi),
    }
}

/// `out[q] = min_p (q − p)² + f[p]` over finite `f[p]`.
fn transform_1d(f: &[u64], out: &mut [u64], v: &mut Vec<usize>, z: &mut Vec<Frac>) {
    v.clear();
    z.clear();
    for q in 0..f.len() {
        if f[q] == UNREACHABLE {
            continue;
        }
        // z[k] is the left boundary of v[k]'s interval; z[0] is −∞.
        while let Some(&p) = v.last() {
            let s = meet(f, p, q);
            if v.len() > 1 && s.le(z[v.len() - 1]) {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
        if v.is_empty() {
            v.push(q);
            z.push(Frac { num: -1, den: 0 });
        }
    }
    if v.is_empty() {
        out.fill(UNREACHABLE);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1].lt_int(q as i128) {
            k += 1;
        }
        let p = v[k];
        let dq = q.abs_diff(p) as u64;
        *o = dq * dq + f[p];
    }
}

/// Squared distance (in cells²) from every cell center to the nearest cell
/// with `sites[c] == true`; [`UNREACHABLE`] if there is none.
pub fn squared_distance(lattice: &Lattice, sites: &[bool]) -> Vec<u64> {
    assert_eq!(sites.len(), lattice.len());
    let mut g: Vec<u64> = sites
        .iter()
        .map(|&s| if s { 0 } else { UNREACHABLE })
        .collect();
    let n = lattice.cells_per_axis();
    let mut line = vec![0u64; n];
    let mut out = vec![0u64; n];
    let (mut v, mut z) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for axis in 0..lattice.dim() {
        let stride = lattice.stride(axis);
        for start in (0..lattice.len()).filter(|&c| lattice.axis_index(c, axis) == 0) {
            for (i, x) in line.iter_mut().enumerate() {
                *x = g[start + i * stride];
            }
            transform_1d(&line, &mut out, &mut v, &mut z);
            for (i, x) in out.iter().enumerate() {
                g[start + i * stride] = *x;
            }
        }
    }
    g
}

/// Squared distance (in cells²) from each cell center to the nearest
/// center outside the box.
pub fn squared_distance_to_exterior(lattice: &Lattice) -> Vec<u64> {
    let n = lattice.cells_per_axis();
    let d = lattice.dim();
    let mut idx = vec![0usize; d];
    (0..lattice.len())
        .map(|c| {
            lattice.multi_index(c, &mut idx);
            let k = idx.iter().map(|&i| (i + 1).min(n - i)).min().unwrap_or(0) as u64;
            k * k
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(lat: &Lattice, sites: &[bool]) -> Vec<u64> {
        let d = lat.dim();
        let (mut a, mut b) = (vec![0usize; d], vec![0usize; d]);
        (0..lat.len())
            .map(|c| {
                lat.multi_index(c, &mut a);
                (0..lat.len())
                    .filter(|&s| sites[s])
                    .map(|s| {
                        lat.multi_index(s, &mut b);
                        a.iter().zip(&b).map(|(x, y)| (x.abs_diff(*y) as u64).pow(2)).sum()
                    })
                    .min()
                    .unwrap_or(UNREACHABLE)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut bit = |p: u64| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % 100 < p
        };
        for (dim, n, p) in [(1, 40, 10), (2, 17, 5), (2, 12, 40), (3, 7, 8)] {
            let lat = Lattice::new(dim, 1.0, n).unwrap();
            let sites: Vec<bool> = (0..lat.len()).map(|_| bit(p)).collect();
            assert_eq!(squared_distance(&lat, &sites), brute(&lat, &sites));
        }
    }

    #[test]
    fn empty_and_exterior() {
        let lat = Lattice::new(2, 1.0, 5).unwrap();
        assert!(squared_distance(&lat, &[false; 25]).iter().all(|&x| x == UNREACHABLE));
        let ext = squared_distance_to_exterior(&lat);
        assert_eq!(ext[lat.flat_index(&[2, 2])], 9);
        assert_eq!(ext[lat.flat_index(&[0, 3])], 1);
        assert_eq!(ext[lat.flat_index(&[1, 2])], 4);
    }
}
