//! Dense exact linear algebra: reduced row echelon form, kernels,
//! determinants, and RREF-canonicalized subspaces.
//!
//! Pivots are always the first nonzero entry of the working row, so the RREF
//! (and everything derived from it: kernel bases, quotient constraints,
//! determinant signs) is identical across platforms and runs.

use crate::field::Field;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
}

/// A dense matrix over an exact field, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> Matrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must be rows x cols");
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = m.field.one();
        }
        m
    }

    pub fn from_rows(field: F, rows: Vec<Vec<F::Elem>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
        }
        Matrix::new(field, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(field: F, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|n| field.from_i64(*n)))
            .collect();
        Matrix::new(field.clone(), r, c, data)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &F::Elem {
        assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut F::Elem {
        assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[F::Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| self.field.is_zero(e))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Matrix::zeros(self.field.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn mul_matrix(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(
            self.cols, other.rows,
            "matrix product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let f = &self.field;
        let mut out = Matrix::zeros(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    acc = f.add(&acc, &f.mul(self.at(i, k), other.at(k, j)));
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn mul_vector(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(self.cols, v.len());
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    acc = f.add(&acc, &f.mul(self.at(i, k), &v[k]));
                }
                acc
            })
            .collect()
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix::new(self.field.clone(), self.rows + other.rows, self.cols, data)
    }

    /// Reduced row echelon form together with the rank and pivot columns.
    pub fn rref(&self) -> (Matrix<F>, usize, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0usize;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            // First nonzero entry in this column at or below pivot_row.
            let found = (pivot_row..m.rows).find(|&r| !f.is_zero(m.at(r, col)));
            let Some(r) = found else { continue };
            if r != pivot_row {
                for c in 0..m.cols {
                    let a = m.at(r, c).clone();
                    let b = m.at(pivot_row, c).clone();
                    *m.at_mut(r, c) = b;
                    *m.at_mut(pivot_row, c) = a;
                }
            }
            let inv = f.inv(m.at(pivot_row, col)).expect("pivot is nonzero");
            for c in 0..m.cols {
                *m.at_mut(pivot_row, c) = f.mul(m.at(pivot_row, c), &inv);
            }
            for r2 in 0..m.rows {
                if r2 != pivot_row && !f.is_zero(m.at(r2, col)) {
                    let factor = m.at(r2, col).clone();
                    for c in 0..m.cols {
                        let delta = f.mul(&factor, m.at(pivot_row, c));
                        *m.at_mut(r2, c) = f.sub(m.at(r2, c), &delta);
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        let rank = pivots.len();
        (m, rank, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// A basis of the right kernel { v : self·v = 0 }, one vector per free
    /// column in ascending column order, each with a 1 in its free slot.
    pub fn kernel_basis(&self) -> Vec<Vec<F::Elem>> {
        let f = self.field.clone();
        let (r, rank, pivots) = self.rref();
        let mut basis = Vec::with_capacity(self.cols - rank);
        let mut pivot_of_col = vec![None; self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            pivot_of_col[col] = Some(row);
        }
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (row, &col) in pivots.iter().enumerate() {
                v[col] = f.neg(r.at(row, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Exact determinant by Gaussian elimination with the leading-entry pivot
    /// rule; the sign convention is the standard Leibniz one.
    pub fn det(&self) -> Result<F::Elem, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let f = self.field.clone();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = f.one();
        for col in 0..n {
            let found = (col..n).find(|&r| !f.is_zero(m.at(r, col)));
            let Some(r) = found else {
                return Ok(f.zero());
            };
            if r != col {
                det = f.neg(&det);
                for c in 0..n {
                    let a = m.at(r, c).clone();
                    let b = m.at(col, c).clone();
                    *m.at_mut(r, c) = b;
                    *m.at_mut(col, c) = a;
                }
            }
            let pivot = m.at(col, col).clone();
            det = f.mul(&det, &pivot);
            let inv = f.inv(&pivot).expect("pivot is nonzero");
            for r2 in col + 1..n {
                if !f.is_zero(m.at(r2, col)) {
                    let factor = f.mul(m.at(r2, col), &inv);
                    for c in col..n {
                        let delta = f.mul(&factor, m.at(col, c));
                        *m.at_mut(r2, c) = f.sub(m.at(r2, c), &delta);
                    }
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Option<Matrix<F>> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = {
            let mut data = Vec::with_capacity(n * 2 * n);
            for i in 0..n {
                data.extend(self.row(i).iter().cloned());
                for j in 0..n {
                    data.push(if i == j {
                        self.field.one()
                    } else {
                        self.field.zero()
                    });
                }
            }
            Matrix::new(self.field.clone(), n, 2 * n, data)
        };
        let (r, _, pivots) = aug.rref();
        // Invertible iff every pivot lands in the left block.
        if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
            return None;
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            data.extend(r.row(i)[n..].iter().cloned());
        }
        Some(Matrix::new(self.field.clone(), n, n, data))
    }
}

/// A linear subspace of k^n, canonicalized as the row space of an RREF basis
/// matrix. Equality of subspaces is equality of canonical forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace<F: Field> {
    basis: Matrix<F>,
    pivots: Vec<usize>,
    ambient_dim: usize,
}

impl<F: Field> Subspace<F> {
    /// Span of the rows of `gens` (dependent or zero rows are dropped).
    pub fn from_rows(gens: &Matrix<F>) -> Self {
        let (r, rank, pivots) = gens.rref();
        let mut data = Vec::new();
        for row in 0..rank {
            data.extend(r.row(row).iter().cloned());
        }
        Subspace {
            basis: Matrix::new(gens.field().clone(), rank, gens.cols(), data),
            pivots,
            ambient_dim: gens.cols(),
        }
    }

    pub fn zero(field: F, ambient_dim: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(field, 0, ambient_dim),
            pivots: Vec::new(),
            ambient_dim,
        }
    }

    pub fn full(field: F, ambient_dim: usize) -> Self {
        Subspace::from_rows(&Matrix::identity(field, ambient_dim))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// The canonical RREF basis matrix (dim x ambient).
    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, v: &[F::Elem]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        let f = self.basis.field().clone();
        let mut residual = v.to_vec();
        for (row, &p) in self.pivots.iter().enumerate() {
            let coeff = residual[p].clone();
            if f.is_zero(&coeff) {
                continue;
            }
            for c in 0..self.ambient_dim {
                let delta = f.mul(&coeff, self.basis.at(row, c));
                residual[c] = f.sub(&residual[c], &delta);
            }
        }
        residual.iter().all(|e| f.is_zero(e))
    }

    /// Linear functionals cutting out the subspace, one row per non-pivot
    /// coordinate of the ambient space in ascending order. A vector lies in
    /// the subspace iff this matrix kills it; the rows are a canonical basis
    /// of the quotient's coordinates.
    pub fn quotient_constraints(&self) -> Matrix<F> {
        let f = self.basis.field().clone();
        let non_pivots: Vec<usize> = (0..self.ambient_dim)
            .filter(|c| !self.pivots.contains(c))
            .collect();
        let mut out = Matrix::zeros(f.clone(), non_pivots.len(), self.ambient_dim);
        for (k, &c) in non_pivots.iter().enumerate() {
            *out.at_mut(k, c) = f.one();
            for (row, &p) in self.pivots.iter().enumerate() {
                *out.at_mut(k, p) = f.neg(self.basis.at(row, c));
            }
        }
        out
    }

    /// Preimage { x : m·x ∈ self } of the subspace under a linear map.
    pub fn preimage(&self, m: &Matrix<F>) -> Subspace<F> {
        assert_eq!(m.rows(), self.ambient_dim);
        let q = self.quotient_constraints();
        let composed = q.mul_matrix(m);
        let kernel = composed.kernel_basis();
        let rows = kernel.len();
        let data: Vec<F::Elem> = kernel.into_iter().flatten().collect();
        Subspace::from_rows(&Matrix::new(m.field().clone(), rows, m.cols(), data))
    }
}
