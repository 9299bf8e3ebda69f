//! Lowest eigenpairs of `K u = λ M u` for sparse symmetric positive definite pencils.
//!
//! Shift-invert subspace iteration at shift zero with a sparse Cholesky factor
//! of `K`, Rayleigh-Ritz on the block at every step.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cholesky::{nested_dissection, SparseCholesky};
use crate::dense::{generalized_symmetric_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::gauge::OperatorAssembly;
use crate::geometry::Point;
use crate::sparse::{dot, CsrMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Bound on the relative residual `‖Ku − λMu‖_{K⁻¹} / ‖u‖_K`.
    pub tol: f64,
    pub max_iter: usize,
    /// Block size; defaults to `max(count + 4, 2·count)`.
    pub block: Option<usize>,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-9, max_iter: 500, block: None, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSlice {
    pub pairs: Vec<EigenPair>,
    /// Smallest `(λ_{i+1} − λ_i)/λ_{i+1}` over the returned values.
    pub min_relative_gap: f64,
    pub iterations: usize,
}

impl SpectrumSlice {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// The `count` smallest eigenpairs of an assembled operator.
pub fn solve_assembly(asm: &OperatorAssembly, count: usize, opts: &EigenOptions) -> Result<SpectrumSlice> {
    solve_lowest(&asm.stiffness, &asm.mass, &asm.dof_coords(), count, opts)
}

/// The `count` smallest eigenpairs of `K u = λ M u`; `coords` (one point per
/// unknown) drive the fill-reducing ordering.
pub fn solve_lowest(
    k: &CsrMatrix,
    m: &CsrMatrix,
    coords: &[Point],
    count: usize,
    opts: &EigenOptions,
) -> Result<SpectrumSlice> {
    let n = k.dim();
    if count == 0 || count > n {
        return Err(Error::invalid(alloc::format!("cannot compute {count} eigenpairs of a size-{n} problem")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("eigensolver tolerance must be positive"));
    }
    let b = opts.block.unwrap_or((count + 4).max(2 * count)).max(count).min(n);
    let factor = SparseCholesky::factor(k, nested_dissection(k, coords))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0).collect())
        .collect();
    let mut theta: Vec<f64> = alloc::vec![f64::NAN; b];
    let mut have_ritz = false;
    let mut worst = f64::INFINITY;

    for iter in 0..opts.max_iter {
        let mx: Vec<Vec<f64>> = x.iter().map(|v| m.mul_vec(v)).collect();
        let y: Vec<Vec<f64>> = mx.iter().map(|v| factor.solve(v)).collect();

        if have_ritz {
            // residual of the current Ritz pairs in the K⁻¹ norm, using K⁻¹Mx = y
            let mut residuals = Vec::with_capacity(count);
            for i in 0..count {
                let kx = k.mul_vec(&x[i]);
                let r: Vec<f64> = kx.iter().zip(&mx[i]).map(|(a, c)| a - theta[i] * c).collect();
                let z: Vec<f64> = x[i].iter().zip(&y[i]).map(|(a, c)| a - theta[i] * c).collect();
                let rr = dot(&r, &z).max(0.0);
                residuals.push(libm::sqrt(rr / theta[i]));
            }
            worst = residuals.iter().copied().fold(0.0, f64::max);
            if worst <= opts.tol {
                return Ok(finish(&x, &theta, &residuals, count, iter));
            }
        }

        // Rayleigh-Ritz on span(y)
        let ky: Vec<Vec<f64>> = y.iter().map(|v| k.mul_vec(v)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|v| m.mul_vec(v)).collect();
        let mut a = DenseMatrix::zeros(b);
        let mut bm = DenseMatrix::zeros(b);
        for i in 0..b {
            for j in i..b {
                let kij = dot(&y[i], &ky[j]);
                let mij = dot(&y[i], &my[j]);
                a[(i, j)] = kij;
                a[(j, i)] = kij;
                bm[(i, j)] = mij;
                bm[(j, i)] = mij;
            }
        }
        let (vals, c) = generalized_symmetric_eigen(&a, &bm)
            .map_err(|_| Error::NoConvergence { iterations: iter, residual: worst })?;
        for col in 0..b {
            let mut v = alloc::vec![0.0; n];
            for (i, yi) in y.iter().enumerate() {
                let cij = c[(i, col)];
                if cij != 0.0 {
                    for (vk, yk) in v.iter_mut().zip(yi) {
                        *vk += cij * yk;
                    }
                }
            }
            x[col] = v;
        }
        theta = vals;
        if theta[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite { column: 0, pivot: theta[0] });
        }
        have_ritz = true;
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: worst })
}

fn finish(x: &[Vec<f64>], theta: &[f64], residuals: &[f64], count: usize, iterations: usize) -> SpectrumSlice {
    let mut pairs: Vec<EigenPair> = (0..count)
        .map(|i| {
            let mut v = x[i].clone();
            normalize_sign(&mut v);
            EigenPair { value: theta[i], vector: v, residual: residuals[i] }
        })
        .collect();
    pairs.sort_by(|p, q| p.value.total_cmp(&q.value).then(vector_hash(&p.vector).cmp(&vector_hash(&q.vector))));
    let min_relative_gap =
        pairs.windows(2).map(|w| (w[1].value - w[0].value) / w[1].value).fold(f64::INFINITY, f64::min);
    SpectrumSlice { pairs, min_relative_gap, iterations }
}

/// Makes the entry of largest modulus (first one on ties) positive.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn vector_hash(v: &[f64]) -> u64 {
    // FNV-1a over the bit patterns
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in v {
        for byte in x.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Rescales so that `uᵀ M u = 1`.
pub fn normalize_q(mut pair: EigenPair, m: &CsrMatrix) -> Result<EigenPair> {
    let norm2 = m.bilinear(&pair.vector, &pair.vector);
    if !(norm2 > 0.0) {
        return Err(Error::ZeroVector("eigenvector has zero M-norm"));
    }
    let s = 1.0 / libm::sqrt(norm2);
    if s != 1.0 {
        for x in pair.vector.iter_mut() {
            *x *= s;
        }
    }
    Ok(pair)
}

/// Outcome of [`align_sign`].
#[derive(Clone, Debug, PartialEq)]
pub struct Aligned {
    pub pair: EigenPair,
    /// `uᵀ M u_ref` after alignment.
    pub overlap: f64,
    /// Set when the overlap is too small for the sign to be meaningful.
    pub nearly_orthogonal: bool,
}

/// Flips `pair` so that `uᵀ M u_ref > 0`.
pub fn align_sign(mut pair: EigenPair, reference: &[f64], m: &CsrMatrix) -> Result<Aligned> {
    let rr = m.bilinear(reference, reference);
    if !(rr > 0.0) {
        return Err(Error::ZeroVector("reference vector has zero M-norm"));
    }
    let uu = m.bilinear(&pair.vector, &pair.vector);
    let mut overlap = m.bilinear(&pair.vector, reference);
    if overlap < 0.0 {
        for x in pair.vector.iter_mut() {
            *x = -*x;
        }
        overlap = -overlap;
    }
    let nearly_orthogonal = overlap < 1e-8 * libm::sqrt(rr * uu);
    Ok(Aligned { pair, overlap, nearly_orthogonal })
}

/// Checks that the `index`-th (1-based) value of the slice is simple:
/// `min(λ_{N+1} − λ_N, λ_N − λ_{N−1}) / λ_N ≥ gap_tol`. Returns the gap.
pub fn simplicity_guard(slice: &SpectrumSlice, index: usize, gap_tol: f64) -> Result<f64> {
    let v = slice.values();
    if index == 0 || index >= v.len() {
        return Err(Error::invalid(alloc::format!(
            "simplicity check of index {index} needs at least {} values, got {}",
            index + 1,
            v.len()
        )));
    }
    let ln = v[index - 1];
    let mut gap = (v[index] - ln) / ln;
    if index >= 2 {
        gap = gap.min((ln - v[index - 2]) / ln);
    }
    if gap >= gap_tol {
        Ok(gap)
    } else {
        Err(Error::NotSimple { index, gap, tol: gap_tol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;
    use core::f64::consts::PI;

    /// 1D Dirichlet Laplacian on (0, 1) with P1 elements: K and M known in closed form.
    fn laplace_1d(n: usize) -> (CsrMatrix, CsrMatrix, Vec<Point>) {
        let h = 1.0 / (n + 1) as f64;
        let mut k = TripletBuilder::new(n);
        let mut m = TripletBuilder::new(n);
        for i in 0..n {
            k.add(i, i, 2.0 / h);
            m.add(i, i, 4.0 * h / 6.0);
            if i + 1 < n {
                k.add(i, i + 1, -1.0 / h);
                m.add(i, i + 1, h / 6.0);
            }
        }
        let coords = (0..n).map(|i| Point::new((i + 1) as f64 * h, 0.0)).collect();
        (k.build_symmetric_from_upper(), m.build_symmetric_from_upper(), coords)
    }

    #[test]
    fn one_dimensional_oracle() {
        // discrete eigenvalues: (6/h²)(1 − cos kπh)/(2 + cos kπh), with 1 − cos x = 2 sin²(x/2)
        let n = 400;
        let (k, m, c) = laplace_1d(n);
        let s = solve_lowest(&k, &m, &c, 4, &EigenOptions::default()).unwrap();
        let h = 1.0 / (n + 1) as f64;
        for (i, p) in s.pairs.iter().enumerate() {
            let x = (i + 1) as f64 * PI * h;
            let s2 = libm::sin(0.5 * x);
            let exact = 6.0 / (h * h) * (2.0 * s2 * s2) / (2.0 + libm::cos(x));
            assert!((p.value - exact).abs() / exact < 1e-12, "{} vs {exact}", p.value);
            assert!(p.residual <= 1e-9);
            assert!((k.bilinear(&p.vector, &p.vector) - p.value).abs() <= 1e-8 * p.value);
        }
        for i in 0..4 {
            for j in 0..4 {
                let d = m.bilinear(&s.pairs[i].vector, &s.pairs[j].vector);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn runs_are_bit_identical() {
        let (k, m, c) = laplace_1d(200);
        let a = solve_lowest(&k, &m, &c, 3, &EigenOptions::default()).unwrap();
        let b = solve_lowest(&k, &m, &c, 3, &EigenOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn normalization_and_alignment() {
        let (_, m, _) = laplace_1d(50);
        let v: Vec<f64> = (0..50).map(|i| libm::sin(i as f64)).collect();
        let p = EigenPair { value: 1.0, vector: v.iter().map(|x| 2.0 * x).collect(), residual: 0.0 };
        let n1 = normalize_q(p, &m).unwrap();
        assert!((m.bilinear(&n1.vector, &n1.vector) - 1.0).abs() < 1e-14);
        let n2 = normalize_q(n1.clone(), &m).unwrap();
        for (a, b) in n1.vector.iter().zip(&n2.vector) {
            assert!((a - b).abs() < 1e-15);
        }
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let al = align_sign(n1.clone(), &neg, &m).unwrap();
        assert!(al.overlap > 0.0 && !al.nearly_orthogonal);
        assert_eq!(al.pair.vector[3], -n1.vector[3]);
        let again = align_sign(al.pair.clone(), &neg, &m).unwrap();
        assert_eq!(again.pair, al.pair);
        let zero = EigenPair { value: 1.0, vector: alloc::vec![0.0; 50], residual: 0.0 };
        assert!(matches!(normalize_q(zero, &m), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn simplicity() {
        let mk = |v: &[f64]| SpectrumSlice {
            pairs: v.iter().map(|&value| EigenPair { value, vector: Vec::new(), residual: 0.0 }).collect(),
            min_relative_gap: 0.0,
            iterations: 0,
        };
        let s = mk(&[14.682, 26.375, 40.706]);
        let g = simplicity_guard(&s, 1, 0.1).unwrap();
        assert!((g - (26.375 - 14.682) / 14.682).abs() < 1e-12);
        assert!(simplicity_guard(&s, 2, 0.1).is_ok());
        let dup = mk(&[14.682, 14.682, 26.375]);
        assert!(matches!(simplicity_guard(&dup, 1, 1e-6), Err(Error::NotSimple { .. })));
    }
}
