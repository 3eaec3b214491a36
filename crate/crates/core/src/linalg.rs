//! Small dense symmetric matrices and a cyclic Jacobi eigensolver.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{dot, Direction};

/// Symmetry tolerance accepted by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// A real symmetric `d×d` matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Accepts a row-major matrix symmetric within [`SYMMETRY_TOL`] and
    /// stores its exact symmetrization.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotSymmetric);
        }
        let mut m = Self { dim, data };
        for i in 0..dim {
            for j in i + 1..dim {
                let (a, b) = (m.get(i, j), m.get(j, i));
                if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::NotSymmetric);
                }
                let s = 0.5 * (a + b);
                m.set_sym(i, j, s);
            }
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, lambda: f64) -> Self {
        Self::diagonal(&vec![lambda; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &x) in diag.iter().enumerate() {
            data[i * dim + i] = x;
        }
        Self { dim, data }
    }

    /// `Q·diag(values)·Qᵀ` for orthonormal columns `vectors`.
    pub fn from_eigen(values: &[f64], vectors: &[Direction]) -> Result<Self> {
        let dim = values.len();
        let mut data = vec![0.0; dim * dim];
        for (lambda, v) in values.iter().zip(vectors) {
            let v = v.coords();
            for i in 0..dim {
                for j in 0..dim {
                    data[i * dim + j] += lambda * v[i] * v[j];
                }
            }
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.dim + j] = x;
        self.data[j * self.dim + i] = x;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.dim).map(|row| dot(row, x)).collect()
    }

    /// `⟨x, Mx⟩`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_some()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))
                .unwrap_or(c);
            if a[p * n + c] == 0.0 {
                return 0.0;
            }
            if p != c {
                for k in 0..n {
                    a.swap(p * n + k, c * n + k);
                }
                det = -det;
            }
            let piv = a[c * n + c];
            det *= piv;
            for i in c + 1..n {
                let f = a[i * n + c] / piv;
                for k in c..n {
                    a[i * n + k] -= f * a[c * n + k];
                }
            }
        }
        det
    }

    /// Eigen-decomposition by cyclic Jacobi rotations.
    pub fn eigen(&self) -> SymEigen {
        jacobi(self)
    }
}

/// Eigenvalues in nonincreasing order with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Direction>,
}

impl SymEigen {
    pub fn max(&self) -> (f64, &Direction) {
        (self.values[0], &self.vectors[0])
    }

    pub fn min(&self) -> (f64, &Direction) {
        let k = self.values.len() - 1;
        (self.values[k], &self.vectors[k])
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

fn jacobi(m: &SymMatrix) -> SymEigen {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let col: Vec<f64> = (0..n).map(|k| v[k * n + i]).collect();
            Direction::new(col).expect("Jacobi rotations keep columns orthonormal")
        })
        .collect();
    SymEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_eigen() {
        let m = SymMatrix::diagonal(&[0.5, 2.0, 1.0]);
        let e = m.eigen();
        assert_eq!(e.values, vec![2.0, 1.0, 0.5]);
        assert_eq!(e.max().1.as_axis(), Some((1, true)));
    }

    #[test]
    fn two_by_two_eigen_against_characteristic_polynomial() {
        let m = SymMatrix::new(2, vec![1.025, 0.225, 0.225, 1.025]).unwrap();
        let e = m.eigen();
        assert!((e.values[0] - 1.25).abs() < 1e-13);
        assert!((e.values[1] - 0.8).abs() < 1e-13);
    }

    #[test]
    fn reconstruction() {
        let m = SymMatrix::new(
            3,
            vec![4.0, 1.0, -2.0, 1.0, 3.0, 0.5, -2.0, 0.5, 5.0],
        )
        .unwrap();
        let e = m.eigen();
        let r = SymMatrix::from_eigen(&e.values, &e.vectors).unwrap();
        assert!(r.max_abs_diff(&m) < 1e-12);
        let prod: f64 = e.values.iter().product();
        assert!((prod - m.det()).abs() < 1e-11);
    }

    #[test]
    fn rejects_asymmetric_and_detects_indefinite() {
        assert_eq!(
            SymMatrix::new(2, vec![1.0, 0.5, 0.4, 1.0]),
            Err(Error::NotSymmetric)
        );
        assert!(!SymMatrix::diagonal(&[1.0, -1.0]).is_positive_definite());
        assert!(SymMatrix::diagonal(&[1.0, 1e-8]).is_positive_definite());
    }
}
