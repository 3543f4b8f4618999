//! Square product of a Reed-Solomon code with itself (2D RS), used as the
//! baseline in protocol comparisons.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bc_code::{min_weight_by_enumeration, BcError};
use crate::field::Field;
use crate::grs::{GrsError, GrsSpec};
use crate::matpoly::{Matrix, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProductError {
    #[error("field of order {q} is too small for component length {n0}")]
    FieldTooSmall { q: u64, n0: usize },
    #[error("component dimension {k0} must be in 1..={n0}")]
    BadDimension { k0: usize, n0: usize },
    #[error("grid shape mismatch: expected {want}x{want}")]
    Shape { want: usize },
    #[error(transparent)]
    Grs(#[from] GrsError),
    #[error(transparent)]
    Enumeration(#[from] BcError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

#[derive(Debug, Clone)]
pub struct ProductSpec {
    n0: usize,
    k0: usize,
    field: Field,
    component: GrsSpec,
}

pub type Grid = Vec<Vec<Option<u64>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelStatus {
    pub residual_erasures: usize,
    pub sweeps: usize,
}

impl PeelStatus {
    pub fn recovered(&self) -> bool {
        self.residual_erasures == 0
    }
}

impl ProductSpec {
    pub fn build(n0: usize, k0: usize, field: Field) -> Result<ProductSpec, ProductError> {
        if k0 == 0 || k0 > n0 {
            return Err(ProductError::BadDimension { k0, n0 });
        }
        let locators = field.primitive_powers(n0).ok_or(ProductError::FieldTooSmall { q: field.order(), n0 })?;
        let component = GrsSpec::brs(field, locators, n0 - k0)?;
        Ok(ProductSpec { n0, k0, field, component })
    }

    /// Parameters only; no field is needed.
    pub fn params_for(n0: usize, k0: usize) -> ProductParams {
        let d0 = n0 - k0 + 1;
        ProductParams { n: n0 * n0, k: k0 * k0, d: d0 * d0 }
    }

    pub fn params(&self) -> ProductParams {
        ProductSpec::params_for(self.n0, self.k0)
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn component(&self) -> &GrsSpec {
        &self.component
    }

    fn encode_line(&self, coeffs: &[u64]) -> Vec<u64> {
        self.component.encode_eval(&Poly::new(self.field, coeffs.to_vec())).expect("degree below k0")
    }

    /// Encodes the rows of the `k₀×k₀` message, then every column.
    pub fn encode(&self, message: &[Vec<u64>]) -> Result<Vec<Vec<u64>>, ProductError> {
        if message.len() != self.k0 || message.iter().any(|r| r.len() != self.k0) {
            return Err(ProductError::Shape { want: self.k0 });
        }
        let rows: Vec<Vec<u64>> = message.iter().map(|r| self.encode_line(r)).collect();
        let mut out = vec![vec![0u64; self.n0]; self.n0];
        for col in 0..self.n0 {
            let column: Vec<u64> = rows.iter().map(|r| r[col]).collect();
            for (row, v) in self.encode_line(&column).into_iter().enumerate() {
                out[row][col] = v;
            }
        }
        Ok(out)
    }

    pub fn is_codeword(&self, grid: &[Vec<u64>]) -> bool {
        let h = self.component.pc_matrix();
        let zero = |v: Vec<u64>| v.iter().all(|&x| x == 0);
        grid.iter().all(|r| zero(h.mul_vec(r).expect("row length")))
            && (0..self.n0).all(|c| zero(h.mul_vec(&grid.iter().map(|r| r[c]).collect::<Vec<_>>()).expect("column length")))
    }

    /// Generator matrix over the row-major flattening of message and codeword grids.
    pub fn generator(&self) -> Matrix {
        let k = self.k0 * self.k0;
        let mut g = Matrix::zeros(self.field, k, self.n0 * self.n0);
        for idx in 0..k {
            let mut m = vec![vec![0u64; self.k0]; self.k0];
            m[idx / self.k0][idx % self.k0] = 1;
            let c = self.encode(&m).expect("shape");
            for (pos, v) in c.into_iter().flatten().enumerate() {
                g.set(idx, pos, v);
            }
        }
        g
    }

    pub fn brute_force_min_distance(&self, budget: u64) -> Result<usize, ProductError> {
        Ok(min_weight_by_enumeration(&self.generator(), budget)?)
    }

    /// Iterative row/column erasure decoding until no line makes progress.
    pub fn peel_decode(&self, grid: &Grid) -> Result<(Grid, PeelStatus), ProductError> {
        if grid.len() != self.n0 || grid.iter().any(|r| r.len() != self.n0) {
            return Err(ProductError::Shape { want: self.n0 });
        }
        let r = self.n0 - self.k0;
        let mut g = grid.clone();
        let mut sweeps = 0;
        loop {
            let mut progress = false;
            for row in g.iter_mut() {
                let e = row.iter().filter(|s| s.is_none()).count();
                if e > 0 && e <= r {
                    *row = self.component.erasure_decode(row)?;
                    progress = true;
                }
            }
            for col in 0..self.n0 {
                let line: Vec<Option<u64>> = g.iter().map(|row| row[col]).collect();
                let e = line.iter().filter(|s| s.is_none()).count();
                if e > 0 && e <= r {
                    for (row, v) in self.component.erasure_decode(&line)?.into_iter().enumerate() {
                        g[row][col] = v;
                    }
                    progress = true;
                }
            }
            if !progress {
                break;
            }
            sweeps += 1;
        }
        let residual = g.iter().flatten().filter(|s| s.is_none()).count();
        Ok((g, PeelStatus { residual_erasures: residual, sweeps }))
    }
}

pub fn grid_from_ints(values: &[Vec<i64>]) -> Grid {
    values.iter().map(|r| r.iter().map(|&v| if v < 0 { None } else { Some(v as u64) }).collect()).collect()
}

pub fn grid_to_ints(grid: &Grid) -> Vec<Vec<i64>> {
    grid.iter().map(|r| r.iter().map(|s| s.map_or(-1, |v| v as i64)).collect()).collect()
}
