//! Sparse Cholesky factorization with a geometric nested-dissection ordering.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::sparse::CsrMatrix;

const LEAF: usize = 64;
const NONE: usize = usize::MAX;

/// Fill-reducing ordering from unknown coordinates: recursive median bisection
/// along the wider axis, with the smaller one-sided vertex separator ordered last.
///
/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(a: &CsrMatrix, coords: &[Point]) -> Vec<usize> {
    let n = a.dim();
    assert_eq!(coords.len(), n);
    let mut order = Vec::with_capacity(n);
    let mut part = alloc::vec![0u32; n];
    let mut next_part = 1u32;
    let all: Vec<usize> = (0..n).collect();
    // explicit stack of (nodes, separator pending) frames
    enum Frame {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = alloc::vec![Frame::Split(all)];
    while let Some(frame) = stack.pop() {
        let mut nodes = match frame {
            Frame::Emit(s) => {
                order.extend(s);
                continue;
            }
            Frame::Split(nodes) => nodes,
        };
        if nodes.len() <= LEAF {
            order.extend(nodes);
            continue;
        }
        let (mut lo, mut hi) =
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for &i in &nodes {
            let p = coords[i];
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let by_x = hi.x - lo.x >= hi.y - lo.y;
        let key = |i: usize| if by_x { coords[i].x } else { coords[i].y };
        let mid = nodes.len() / 2;
        nodes.select_nth_unstable_by(mid, |&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let right: Vec<usize> = nodes.split_off(mid);
        let left = nodes;
        let (pl, pr) = (next_part, next_part + 1);
        next_part += 2;
        for &i in &left {
            part[i] = pl;
        }
        for &i in &right {
            part[i] = pr;
        }
        let touching = |side: &[usize], other: u32| -> Vec<usize> {
            side.iter().copied().filter(|&i| a.row_indices(i).iter().any(|&j| part[j] == other)).collect()
        };
        let sep_l = touching(&left, pr);
        let sep_r = touching(&right, pl);
        let (sep, sep_part) = if sep_l.len() <= sep_r.len() { (sep_l, pl) } else { (sep_r, pr) };
        for &i in &sep {
            part[i] = 0;
        }
        let keep = |side: Vec<usize>, p: u32| -> Vec<usize> {
            if p == sep_part {
                side.into_iter().filter(|&i| part[i] == p).collect()
            } else {
                side
            }
        };
        let left = keep(left, pl);
        let right = keep(right, pr);
        stack.push(Frame::Emit(sep));
        stack.push(Frame::Split(right));
        stack.push(Frame::Split(left));
    }
    order
}

/// `L Lᵀ = P A Pᵀ` with `L` stored by columns.
#[derive(Clone, Debug)]
pub struct SparseCholesky {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    /// Factors a symmetric positive definite matrix with the given ordering
    /// (`perm[new] = old`).
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        assert_eq!(perm.len(), n);
        let c = a.permute_symmetric(&perm);
        let parent = etree(&c);

        // symbolic: column counts through row patterns
        let mut counts = alloc::vec![1usize; n];
        let mut stack = alloc::vec![0usize; n];
        let mut mark = alloc::vec![NONE; n];
        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = alloc::vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + counts[k];
        }
        let nnz = col_ptr[n];
        let mut row_idx = alloc::vec![0usize; nnz];
        let mut values = alloc::vec![0.0; nnz];
        let mut next: Vec<usize> = col_ptr[..n].to_vec();
        let mut x = alloc::vec![0.0; n];
        mark.fill(NONE);

        for k in 0..n {
            let top = ereach(&c, k, &parent, &mut stack, &mut mark);
            for (j, v) in c.row(k) {
                if j <= k {
                    x[j] = v;
                }
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = 0.0;
                for p in (col_ptr[i] + 1)..next[i] {
                    x[row_idx[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { column: k, pivot: d });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = libm::sqrt(d);
        }
        Ok(SparseCholesky { n, perm, col_ptr, row_idx, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.solve_permuted_in_place(&mut y);
        let mut x = alloc::vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    fn solve_permuted_in_place(&self, y: &mut [f64]) {
        for j in 0..self.n {
            let start = self.col_ptr[j];
            y[j] /= self.values[start];
            let yj = y[j];
            for p in (start + 1)..self.col_ptr[j + 1] {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        for j in (0..self.n).rev() {
            let start = self.col_ptr[j];
            let mut s = y[j];
            for p in (start + 1)..self.col_ptr[j + 1] {
                s -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = s / self.values[start];
        }
    }
}

fn etree(c: &CsrMatrix) -> Vec<usize> {
    let n = c.dim();
    let mut parent = alloc::vec![NONE; n];
    let mut ancestor = alloc::vec![NONE; n];
    for k in 0..n {
        for &j in c.row_indices(k) {
            let mut i = j;
            while i != NONE && i < k {
                let inext = ancestor[i];
                ancestor[i] = k;
                if inext == NONE {
                    parent[i] = k;
                }
                i = inext;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (excluding the diagonal) in `stack[top..]`,
/// in topological order.
fn ereach(c: &CsrMatrix, k: usize, parent: &[usize], stack: &mut [usize], mark: &mut [usize]) -> usize {
    let n = c.dim();
    let mut top = n;
    mark[k] = k;
    for &j in c.row_indices(k) {
        if j > k {
            continue;
        }
        let mut i = j;
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
            if i == NONE {
                break;
            }
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn grid_laplacian(m: usize) -> (CsrMatrix, Vec<Point>) {
        let n = m * m;
        let mut b = TripletBuilder::new(n);
        let id = |i: usize, j: usize| i * m + j;
        let mut coords = Vec::new();
        for i in 0..m {
            for j in 0..m {
                coords.push(Point::new(i as f64, j as f64));
                b.add(id(i, j), id(i, j), 4.0);
                if i + 1 < m {
                    b.add(id(i, j), id(i + 1, j), -1.0);
                }
                if j + 1 < m {
                    b.add(id(i, j), id(i, j + 1), -1.0);
                }
            }
        }
        (b.build_symmetric_from_upper(), coords)
    }

    #[test]
    fn ordering_is_a_permutation() {
        let (a, coords) = grid_laplacian(30);
        let mut p = nested_dissection(&a, &coords);
        p.sort_unstable();
        assert_eq!(p, (0..900).collect::<Vec<_>>());
    }

    #[test]
    fn solves_grid_laplacian() {
        let (a, coords) = grid_laplacian(40);
        let perm = nested_dissection(&a, &coords);
        let f = SparseCholesky::factor(&a, perm).unwrap();
        let identity = SparseCholesky::factor(&a, (0..1600).collect()).unwrap();
        assert!(f.nnz() < identity.nnz(), "{} vs {}", f.nnz(), identity.nnz());
        let x_true: Vec<f64> = (0..1600).map(|i| libm::sin(i as f64)).collect();
        let b = a.mul_vec(&x_true);
        for fac in [&f, &identity] {
            let x = fac.solve(&b);
            let err = x.iter().zip(&x_true).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(err < 1e-11, "{err}");
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut b = TripletBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(0, 1, 2.0);
        b.add(1, 1, 1.0);
        let a = b.build_symmetric_from_upper();
        assert!(matches!(
            SparseCholesky::factor(&a, alloc::vec![0, 1]),
            Err(Error::NotPositiveDefinite { column: 1, .. })
        ));
    }
}
