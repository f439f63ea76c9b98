//! Dense matrices and the few linear-algebra routines the crate needs.
//!
//! Problem sizes here are tiny (support enumeration caps at 6×6, economies at a
//! few dozen entries), so a flat row-major `Vec` and plain Gaussian elimination
//! are all that is required.

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = T::one();
        }
        m
    }

    /// Builds from nested rows. Panics if the rows are ragged.
    pub fn from_rows(rows_data: Vec<Vec<T>>) -> Self {
        let rows = rows_data.len();
        let cols = rows_data.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for r in rows_data {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        t
    }

    /// `M · v`
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Mᵀ · v` without materializing the transpose.
    pub fn tr_matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o = o.clone() + self.get(i, j).clone() * vi.clone();
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows).map(|i| sum(self.row(i))).collect()
    }

    /// Copies the block with row range `r0..r1` and column range `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix<T> {
        let mut b = Matrix::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                *b.get_mut(i - r0, j - c0) = self.get(i, j).clone();
            }
        }
        b
    }

    /// Assembles a 2×2 block matrix `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: &Matrix<T>, tr: &Matrix<T>, bl: &Matrix<T>, br: &Matrix<T>) -> Matrix<T> {
        assert_eq!(tl.rows, tr.rows);
        assert_eq!(bl.rows, br.rows);
        assert_eq!(tl.cols, bl.cols);
        assert_eq!(tr.cols, br.cols);
        let mut m = Matrix::zeros(tl.rows + bl.rows, tl.cols + tr.cols);
        for i in 0..tl.rows {
            for j in 0..tl.cols {
                *m.get_mut(i, j) = tl.get(i, j).clone();
            }
            for j in 0..tr.cols {
                *m.get_mut(i, tl.cols + j) = tr.get(i, j).clone();
            }
        }
        for i in 0..bl.rows {
            for j in 0..bl.cols {
                *m.get_mut(tl.rows + i, j) = bl.get(i, j).clone();
            }
            for j in 0..br.cols {
                *m.get_mut(tl.rows + i, bl.cols + j) = br.get(i, j).clone();
            }
        }
        m
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.data.iter_mut()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_nested(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dot dimension mismatch");
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn sum<T: Scalar>(v: &[T]) -> T {
    let mut acc = T::zero();
    for x in v {
        acc = acc + x.clone();
    }
    acc
}

pub fn scale<T: Scalar>(v: &[T], s: &T) -> Vec<T> {
    v.iter().map(|x| x.clone() * s.clone()).collect()
}

/// Solves the square system `M x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol` (singular system).
pub fn solve_square(m: &Matrix<f64>, rhs: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "solve_square needs a square matrix");
    assert_eq!(n, rhs.len());
    let mut a = m.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a.get(r1, col)
                    .abs()
                    .partial_cmp(&a.get(r2, col).abs())
                    .unwrap()
            })
            .unwrap();
        if a.get(pivot_row, col).abs() <= tol {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = *a.get(col, j);
                *a.get_mut(col, j) = *a.get(pivot_row, j);
                *a.get_mut(pivot_row, j) = tmp;
            }
            b.swap(col, pivot_row);
        }
        let pivot = *a.get(col, col);
        for row in col + 1..n {
            let factor = a.get(row, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                *a.get_mut(row, j) -= factor * a.get(col, j);
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for (j, xj) in x.iter().enumerate().skip(row + 1) {
            acc -= a.get(row, j) * xj;
        }
        x[row] = acc / a.get(row, row);
    }
    Some(x)
}

/// Basis of the null space of `M` (columns as vectors), via reduced row
/// echelon form with partial pivoting. `tol` decides pivot viability.
pub fn null_space(m: &Matrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pivot_row = (r..rows)
            .max_by(|&r1, &r2| {
                a.get(r1, c).abs().partial_cmp(&a.get(r2, c).abs()).unwrap()
            })
            .unwrap();
        if a.get(pivot_row, c).abs() <= tol {
            continue;
        }
        if pivot_row != r {
            for j in 0..cols {
                let tmp = *a.get(r, j);
                *a.get_mut(r, j) = *a.get(pivot_row, j);
                *a.get_mut(pivot_row, j) = tmp;
            }
        }
        let pivot = *a.get(r, c);
        for j in 0..cols {
            *a.get_mut(r, j) /= pivot;
        }
        for row in 0..rows {
            if row == r {
                continue;
            }
            let factor = *a.get(row, c);
            if factor == 0.0 {
                continue;
            }
            for j in 0..cols {
                let sub = factor * a.get(r, j);
                *a.get_mut(row, j) -= sub;
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = vec![0.0; cols];
        v[fc] = 1.0;
        for (rank_row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a.get(rank_row, fc);
        }
        basis.push(v);
    }
    basis
}
