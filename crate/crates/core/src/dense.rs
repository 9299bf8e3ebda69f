//! Small dense symmetric linear algebra: Cholesky and cyclic Jacobi.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: alloc::vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    /// Lower Cholesky factor.
    pub fn cholesky(&self) -> Result<DenseMatrix> {
        let n = self.n;
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { column: j, pivot: d });
            }
            let djj = libm::sqrt(d);
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(l)
    }
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and the
/// eigenvectors as columns of the returned matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.n;
    let mut m = a.clone();
    m.symmetrize();
    let mut v = DenseMatrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = m[(i, j)] * m[(i, j)];
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = idx.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n);
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (values, vecs)
}

/// Solves `A x = λ B x` for symmetric `A` and symmetric positive definite `B`.
/// Eigenvectors are `B`-orthonormal columns.
pub fn generalized_symmetric_eigen(a: &DenseMatrix, b: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.n;
    let l = b.cholesky()?;
    // C = L⁻¹ A L⁻ᵀ
    let mut tmp = DenseMatrix::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = a[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * tmp[(k, col)];
            }
            tmp[(i, col)] = s / l[(i, i)];
        }
    }
    let mut c = DenseMatrix::zeros(n);
    for row in 0..n {
        for i in 0..n {
            let mut s = tmp[(row, i)];
            for k in 0..i {
                s -= l[(i, k)] * c[(row, k)];
            }
            c[(row, i)] = s / l[(i, i)];
        }
    }
    let (vals, y) = symmetric_eigen(&c);
    // x = L⁻ᵀ y
    let mut x = DenseMatrix::zeros(n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = y[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    Ok((vals, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_tridiagonal() {
        // eigenvalues of tridiag(-1, 2, -1) of size n: 2 - 2 cos(kπ/(n+1))
        let n = 12;
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let (vals, vecs) = symmetric_eigen(&a);
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((v - exact).abs() < 1e-13);
        }
        for i in 0..n {
            for j in 0..n {
                let d: f64 = (0..n).map(|k| vecs[(k, i)] * vecs[(k, j)]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn generalized_problem_residual() {
        let n = 5;
        let mut a = DenseMatrix::zeros(n);
        let mut b = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = 1.0 / (1.0 + i as f64 + j as f64);
                b[(i, j)] = if i == j { 2.0 + i as f64 } else { 0.1 };
            }
        }
        let (vals, x) = generalized_symmetric_eigen(&a, &b).unwrap();
        for k in 0..n {
            for i in 0..n {
                let ax: f64 = (0..n).map(|j| a[(i, j)] * x[(j, k)]).sum();
                let bx: f64 = (0..n).map(|j| b[(i, j)] * x[(j, k)]).sum();
                assert!((ax - vals[k] * bx).abs() < 1e-12);
            }
            let bnorm: f64 = (0..n).map(|i| (0..n).map(|j| x[(i, k)] * b[(i, j)] * x[(j, k)]).sum::<f64>()).sum();
            assert!((bnorm - 1.0).abs() < 1e-12);
        }
    }
}
