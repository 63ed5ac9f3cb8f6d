//! Small dense linear algebra: cyclic Jacobi for Hermitian and real symmetric
//! matrices, and a row-major real matrix type with the handful of operations
//! the asymptotics need.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Jacobi rotation parameters `(t, c, s)` annihilating an off-diagonal entry of
/// modulus `r` between diagonal entries `app`, `aqq`.
fn rotation(app: f64, aqq: f64, r: f64) -> (f64, f64, f64) {
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + theta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    (t, c, t * c)
}

/// Eigenvalues of the Hermitian matrix `a` (row-major, `n×n`), ascending.
///
/// Only the upper triangle's Hermitian structure is assumed; `a` is
/// overwritten by the rotated matrix.
pub fn jacobi_hermitian(n: usize, a: &mut [Complex64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; n];
    }
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let e = apq / r;
                let ec = e.conj();
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let (t, c, s) = rotation(app, aqq, r);
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * ec * s;
                    a[k * n + q] = akp * s + akq * ec * c;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * e * s;
                    a[q * n + k] = apk * s + aqk * e * c;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::WrongShape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.as_ref().len() != cols {
                return Err(Error::WrongShape("ragged rows".into()));
            }
            data.extend_from_slice(r.as_ref());
        }
        Ok(RealMatrix { rows: rows.len(), cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    pub fn from_int(m: &crate::intlat::IntMatrix) -> Self {
        RealMatrix { rows: m.rows(), cols: m.cols(), data: m.to_f64() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &RealMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(l, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        RealMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn sub(&self, other: &RealMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let t = self.transpose();
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&t.data).map(|(a, b)| 0.5 * (a + b)).collect(),
        }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::WrongShape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a.get(i, k).abs().total_cmp(&a.get(j, k).abs()))
                .unwrap();
            if a.get(piv, k).abs() <= 1e-14 * scale {
                return Err(Error::RankDeficient);
            }
            for j in 0..n {
                a.data.swap(k * n + j, piv * n + j);
                inv.data.swap(k * n + j, piv * n + j);
            }
            let p = a.get(k, k);
            for j in 0..n {
                a.data[k * n + j] /= p;
                inv.data[k * n + j] /= p;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a.get(i, k);
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.data[i * n + j] -= f * a.data[k * n + j];
                    inv.data[i * n + j] -= f * inv.data[k * n + j];
                }
            }
        }
        Ok(inv)
    }
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.
///
/// Returns ascending eigenvalues and the matrix whose columns are the
/// matching orthonormal eigenvectors.
pub fn symmetric_eigen(m: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let n = m.rows();
    assert_eq!(n, m.cols(), "symmetric_eigen needs a square matrix");
    let mut a = m.symmetrized();
    let mut v = RealMatrix::identity(n);
    let norm = a.data.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off = (0..n)
                .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
                .map(|(p, q)| a.get(p, q).powi(2))
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * norm {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let (app, aqq) = (a.get(p, p), a.get(q, q));
                    let (t, c, s) = rotation(app, aqq, apq.abs());
                    let s = s * apq.signum();
                    for k in 0..n {
                        let (akp, akq) = (a.get(k, p), a.get(k, q));
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a.get(p, k), a.get(q, k));
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    a.set(p, p, app - t * apq.abs());
                    a.set(q, q, aqq + t * apq.abs());
                    for k in 0..n {
                        let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(&a.get(j, j)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vecs = RealMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs.set(k, new, v.get(k, old));
        }
    }
    (values, vecs)
}

/// `V · diag(f(λ)) · Vᵀ` for a symmetric matrix with eigenpairs `(λ, V)`.
pub fn symmetric_function(m: &RealMatrix, f: impl Fn(f64) -> f64) -> (Vec<f64>, RealMatrix) {
    let (values, vecs) = symmetric_eigen(m);
    let fd = RealMatrix::diagonal(&values.iter().map(|&x| f(x)).collect::<Vec<_>>());
    let out = vecs.mul(&fd).mul(&vecs.transpose());
    (values, out.symmetrized())
}
