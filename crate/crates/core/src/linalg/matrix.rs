use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
///
/// All shapes are validated at construction; indexing past the declared
/// shape is a programming error and panics. Arithmetic that could fail on
/// user-supplied shapes returns `Result` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// A matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from a flat row-major buffer. The buffer length must equal
    /// `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "from_vec",
                left_rows: rows,
                left_cols: cols,
                right_rows: 1,
                right_cols: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from a slice of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    op: "from_rows",
                    left_rows: 1,
                    left_cols: ncols,
                    right_rows: i,
                    right_cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Flat row-major view of the entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.data[row * self.cols + col] = value;
    }

    /// Borrow one row as a slice.
    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        assert!(row < self.rows, "row out of bounds");
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        assert!(row < self.rows, "row out of bounds");
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Matrix product `self * other`.
    ///
    /// Output rows are computed independently and in parallel; within each
    /// row the accumulation order is fixed (k ascending), so the result is
    /// bit-identical regardless of thread count.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        let n = other.cols;
        out.data
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out_row)| {
                let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
                for (k, &a_ik) in a_row.iter().enumerate() {
                    let b_row = &other.data[k * n..(k + 1) * n];
                    for (o, &b_kj) in out_row.iter_mut().zip(b_row) {
                        *o += a_ik * b_kj;
                    }
                }
            });
        Ok(out)
    }

    /// Matrix product `self * otherᵀ` without materializing the transpose.
    pub fn matmul_transpose(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op: "matmul_transpose",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.cols,
                right_cols: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        let n = other.rows;
        out.data
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, out_row)| {
                let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
                for (j, o) in out_row.iter_mut().enumerate() {
                    let b_row = &other.data[j * other.cols..(j + 1) * other.cols];
                    let mut acc = 0.0;
                    for (&a, &b) in a_row.iter().zip(b_row) {
                        acc += a * b;
                    }
                    *o = acc;
                }
            });
        Ok(out)
    }

    /// `self - other`, elementwise.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op: "sub",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// In-place `self += scale * other`.
    pub fn add_scaled(&mut self, scale: f64, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op: "add_scaled",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    /// Multiply every entry by `scale`.
    pub fn scale(&mut self, scale: f64) {
        for v in &mut self.data {
            *v *= scale;
        }
    }

    /// Index of the first non-finite entry, if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|p| (p / self.cols.max(1), p % self.cols.max(1)))
    }

    /// Largest absolute entry (0.0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of the diagonal entries.
    pub fn trace(&self) -> f64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.data[i * self.cols + i]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_matmul(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Matrix::from_vec(2, 3, vec![1.0; 5]).is_err());
        assert!(Matrix::from_vec(2, 3, vec![1.0; 6]).is_ok());
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn matmul_matches_triple_loop() {
        // Deterministic pseudo-random fill, no RNG needed.
        let a = Matrix::from_vec(
            5,
            7,
            (0..35).map(|i| ((i * 37 + 11) % 19) as f64 / 7.0 - 1.0).collect(),
        )
        .unwrap();
        let b = Matrix::from_vec(
            7,
            3,
            (0..21).map(|i| ((i * 53 + 5) % 23) as f64 / 11.0 - 1.0).collect(),
        )
        .unwrap();
        let fast = a.matmul(&b).unwrap();
        let slow = naive_matmul(&a, &b);
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() < 1e-12, "matmul mismatch: {x} vs {y}");
        }
    }

    #[test]
    fn matmul_rejects_mismatched_shapes() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(4, 2);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn matmul_transpose_matches_explicit_transpose() {
        let a = Matrix::from_vec(4, 6, (0..24).map(|i| (i as f64).sin()).collect()).unwrap();
        let b = Matrix::from_vec(3, 6, (0..18).map(|i| (i as f64).cos()).collect()).unwrap();
        let direct = a.matmul_transpose(&b).unwrap();
        let via_t = a.matmul(&b.transpose()).unwrap();
        for (x, y) in direct.data().iter().zip(via_t.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_round_trips() {
        let a = Matrix::from_vec(3, 5, (0..15).map(|i| i as f64).collect()).unwrap();
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().get(4, 2), a.get(2, 4));
    }

    #[test]
    fn trace_and_max_abs() {
        let a = Matrix::from_rows(&[vec![1.0, -9.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(a.trace(), 4.0);
        assert_eq!(a.max_abs(), 9.0);
    }

    #[test]
    fn find_non_finite_locates_entry() {
        let mut a = Matrix::zeros(3, 4);
        assert_eq!(a.find_non_finite(), None);
        a.set(1, 2, f64::NAN);
        assert_eq!(a.find_non_finite(), Some((1, 2)));
    }
}
