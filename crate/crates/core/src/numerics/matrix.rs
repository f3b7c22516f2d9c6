use std::fmt;

use serde::{Deserialize, Serialize};

use super::gemm::gemm;
use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
///
/// Dimensions are always at least 1×1.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(
                "Matrix::new",
                format!("empty shape {rows}x{cols}"),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(
                "Matrix::new",
                format!("{} values for shape {rows}x{cols}", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("Matrix::from_rows", "ragged rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two equally shaped matrices.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::shape(
                "Matrix::zip_map",
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for (c, &v) in self.row(r).iter().enumerate() {
                out[c * self.rows + r] = v;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// Gathers the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::shape("Matrix::select_rows", "no rows selected"));
        }
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::shape(
                    "Matrix::select_rows",
                    format!("row {i} out of {}", self.rows),
                ));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Matrix product `self × rhs`.
    ///
    /// Every output element is accumulated over the shared dimension in
    /// increasing index order with fused multiply-adds, starting from zero, so results are bitwise
    /// reproducible regardless of the blocking used.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "matmul",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let out = gemm(&self.data, &rhs.data, m, k, n);
        Ok(Self {
            rows: m,
            cols: n,
            data: out,
        })
    }

    /// `selfᵀ × rhs` without the caller materializing the transpose.
    pub fn t_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::shape(
                "t_matmul",
                format!(
                    "({}x{})ᵀ times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        self.transpose().matmul(rhs)
    }

    /// `self × rhsᵀ`.
    pub fn matmul_t(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::shape(
                "matmul_t",
                format!(
                    "{}x{} times ({}x{})ᵀ",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        self.matmul(&rhs.transpose())
    }
}

/// Free-function form of [`Matrix::matmul`].
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.matmul(b)
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.iter_rows().take(8) {
            writeln!(f, "  {row:?}")?;
        }
        if self.rows > 8 {
            writeln!(f, "  ... {} more rows", self.rows - 8)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc = a.get(i, k).mul_add(b.get(k, j), acc);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn identity_times_a_is_a() {
        let a = Matrix::from_rows(&[vec![1.5, -2.0], vec![0.25, 7.0]]).unwrap();
        assert_eq!(Matrix::identity(2).matmul(&a).unwrap(), a);
    }

    #[test]
    fn hand_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.as_slice(), &[3.0, 7.0]);
        assert_eq!(c.shape(), (2, 1));
    }

    #[test]
    fn mismatched_shapes_error() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(2, 2);
        assert!(matches!(a.matmul(&b), Err(Error::Shape { .. })));
    }

    #[test]
    fn rejects_empty_and_wrong_length() {
        assert!(Matrix::new(0, 3, vec![]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn select_rows_out_of_range() {
        let a = Matrix::zeros(3, 2);
        assert!(a.select_rows(&[0, 3]).is_err());
        assert_eq!(a.select_rows(&[2, 0]).unwrap().shape(), (2, 2));
    }

    proptest! {
        // Blocked kernel must agree bit-for-bit with the textbook triple loop,
        // since both accumulate left to right over the shared dimension.
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn blocked_matches_naive_bitwise(
            (m, k, n) in prop_oneof![
                (1usize..11, 1usize..9, 1usize..300),
                (1usize..150, 1usize..600, 1usize..20),
            ],
            seed in any::<u64>()
        ) {
            let mut rng = crate::numerics::RngStream::new(seed);
            let a = Matrix::new(m, k, (0..m * k).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap();
            let b = Matrix::new(k, n, (0..k * n).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap();
            prop_assert_eq!(a.matmul(&b).unwrap(), naive(&a, &b));
            prop_assert_eq!(a.t_matmul(&a.matmul(&b).unwrap()).unwrap().shape(), (k, n));
        }
    }
}
