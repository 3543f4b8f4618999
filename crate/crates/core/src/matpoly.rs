//! Dense matrices and univariate polynomials over a [`Field`].

use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatPolyError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("evaluation points must be distinct and nonzero")]
    BadPoints,
    #[error("repeated x value in interpolation")]
    RepeatedX,
    #[error("interpolation needs at least one point")]
    NoPoints,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Row-major matrix of canonical field values.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Field, rows: &[Vec<u64>]) -> Result<Matrix, MatPolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(MatPolyError::Shape("ragged rows".into()));
            }
            for &v in row {
                field.element(v)?;
                data.push(v);
            }
        }
        Ok(Matrix { field, rows: r, cols: c, data })
    }

    pub fn diag(field: Field, entries: &[u64]) -> Matrix {
        let mut m = Matrix::zeros(field, entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, MatPolyError> {
        if self.cols != other.rows {
            return Err(MatPolyError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.field != other.field {
            return Err(FieldError::MixedFields(self.field, other.field).into());
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(l, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>, MatPolyError> {
        if v.len() != self.cols {
            return Err(MatPolyError::Shape(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect())
    }

    /// Columns `cols` of `self`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                self.set(row, c, f.mul(self.get(row, c), inv));
            }
            for r in 0..self.rows {
                let factor = self.get(r, col);
                if r == row || factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn invert(&self) -> Result<Matrix, MatPolyError> {
        if self.rows != self.cols {
            return Err(MatPolyError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(MatPolyError::Singular);
        }
        let mut inv = Matrix::zeros(self.field, n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, aug.get(r, n + c));
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// `r × len(points)` matrix with entry `(u, v) = points[v]^u`.
pub fn vandermonde(field: Field, r: usize, points: &[u64]) -> Result<Matrix, MatPolyError> {
    check_points(points)?;
    let mut m = Matrix::zeros(field, r, points.len());
    for (v, &x) in points.iter().enumerate() {
        let mut p = 1;
        for u in 0..r {
            m.set(u, v, p);
            p = field.mul(p, x);
        }
    }
    Ok(m)
}

fn check_points(points: &[u64]) -> Result<(), MatPolyError> {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    if sorted.first() == Some(&0) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(MatPolyError::BadPoints);
    }
    Ok(())
}

/// Polynomial with coefficients lowest degree first, kept trimmed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    field: Field,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(field: Field, mut coeffs: Vec<u64>) -> Poly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }

    pub fn zero(field: Field) -> Poly {
        Poly { field, coeffs: Vec::new() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn eval_many(&self, xs: &[u64]) -> Vec<u64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                f.sub(a, b)
            })
            .collect();
        Poly::new(f, c)
    }
}

pub fn poly_eval(f: &Poly, points: &[u64]) -> Vec<u64> {
    f.eval_many(points)
}

/// Lagrange interpolation through `(x, y)` pairs.
pub fn interpolate(field: Field, points: &[(u64, u64)]) -> Result<Poly, MatPolyError> {
    if points.is_empty() {
        return Err(MatPolyError::NoPoints);
    }
    let xs: Vec<u64> = points.iter().map(|p| p.0).collect();
    let mut sorted = xs.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(MatPolyError::RepeatedX);
    }
    let f = field;
    let n = points.len();
    // master polynomial N(X) = prod (X - x_i)
    let mut master = vec![1u64];
    for &x in &xs {
        let mut next = vec![0u64; master.len() + 1];
        for (i, &c) in master.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], c);
            next[i] = f.sub(next[i], f.mul(c, x));
        }
        master = next;
    }
    let mut out = vec![0u64; n];
    for (i, &(xi, yi)) in points.iter().enumerate() {
        if yi == 0 {
            continue;
        }
        // N(X) / (X - xi) by synthetic division
        let mut quot = vec![0u64; n];
        let mut carry = 0;
        for d in (0..n).rev() {
            carry = f.add(master[d + 1], f.mul(carry, xi));
            quot[d] = carry;
        }
        let denom = xs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(1, |acc, (_, &xj)| f.mul(acc, f.sub(xi, xj)));
        let scale = f.mul(yi, f.inv(denom)?);
        for d in 0..n {
            out[d] = f.add(out[d], f.mul(scale, quot[d]));
        }
    }
    Ok(Poly::new(field, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf11() -> Field {
        Field::prime(11).unwrap()
    }

    #[test]
    fn vandermonde_examples() {
        let v = vandermonde(gf11(), 2, &[1, 2, 3]).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1, 1, 1], vec![1, 2, 3]]);
        let v = vandermonde(gf11(), 1, &[4, 7]).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1, 1]]);
        let f5 = Field::prime(5).unwrap();
        let v = vandermonde(f5, 3, &[1, 2, 4]).unwrap();
        assert_eq!(v.to_rows(), vec![vec![1, 1, 1], vec![1, 2, 4], vec![1, 4, 1]]);
        assert_eq!(v.rank(), 3);
        assert!(vandermonde(gf11(), 2, &[1, 1]).is_err());
        assert!(vandermonde(gf11(), 2, &[0, 1]).is_err());
    }

    #[test]
    fn inverse_and_rank() {
        let id = Matrix::identity(gf11(), 3);
        assert_eq!(id.invert().unwrap(), id);
        let v = vandermonde(gf11(), 3, &[1, 2, 3]).unwrap();
        let vi = v.invert().unwrap();
        assert_eq!(vi.matmul(&v).unwrap(), id);
        let m = Matrix::from_rows(gf11(), &[vec![1, 2, 3], vec![1, 2, 3]]).unwrap();
        assert_eq!(m.rank(), 1);
        let sq = Matrix::from_rows(gf11(), &[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(sq.invert(), Err(MatPolyError::Singular));
        assert_eq!(m.transpose().rows(), 3);
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly_eval(&Poly::zero(gf11()), &[1, 2]), vec![0, 0]);
        let f = Poly::new(gf11(), vec![1, 1]);
        assert_eq!(poly_eval(&f, &[0, 1, 2]), vec![1, 2, 3]);
        let f8 = Field::binary(3).unwrap();
        let cube = Poly::new(f8, vec![0, 0, 0, 1]);
        assert_eq!(poly_eval(&cube, &[0b010]), vec![0b011]);
    }

    #[test]
    fn interpolate_examples() {
        assert_eq!(interpolate(gf11(), &[(1, 5)]).unwrap().coeffs(), &[5]);
        assert_eq!(interpolate(gf11(), &[(1, 2), (2, 3)]).unwrap().coeffs(), &[1, 1]);
        assert_eq!(interpolate(gf11(), &[(1, 2), (1, 3)]), Err(MatPolyError::RepeatedX));
    }

    proptest! {
        #[test]
        fn interpolate_round_trip(coeffs in proptest::collection::vec(0u64..11, 1..8), seed in 0u64..1000) {
            let f = gf11();
            let p = Poly::new(f, coeffs.clone());
            let n = coeffs.len();
            // distinct x values from a rotated range
            let xs: Vec<u64> = (0..n as u64).map(|i| (i + seed) % 11).collect();
            let ys = poly_eval(&p, &xs);
            let pts: Vec<(u64, u64)> = xs.into_iter().zip(ys).collect();
            prop_assert_eq!(interpolate(f, &pts).unwrap(), p);
        }

        #[test]
        fn vandermonde_inverse(start in 1u64..200, len in 1usize..6) {
            let f = Field::binary(8).unwrap();
            let pts: Vec<u64> = (0..len as u64).map(|i| start + i).collect();
            let v = vandermonde(f, len, &pts).unwrap();
            prop_assert_eq!(v.invert().unwrap().matmul(&v).unwrap(), Matrix::identity(f, len));
        }
    }
}
