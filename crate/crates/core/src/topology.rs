//! Index sets of the block circulant topology `T[μ,λ,ω](ρ)`.
//!
//! Local codes and block columns are numbered from 1, positions from 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("mu={mu} is not a positive multiple of lambda={lambda}")]
    MuNotMultiple { mu: usize, lambda: usize },
    #[error("lambda must be at least 2 (got {0})")]
    LambdaTooSmall(usize),
    #[error("omega and rho must be at least 1")]
    ZeroWidth,
    #[error("position {pos} out of range for length {n}")]
    OutOfRange { pos: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologyParams {
    pub mu: usize,
    pub lambda: usize,
    pub omega: usize,
    pub rho: usize,
}

impl TopologyParams {
    pub fn new(mu: usize, lambda: usize, omega: usize, rho: usize) -> Result<Self, TopologyError> {
        let p = TopologyParams { mu, lambda, omega, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.lambda < 2 {
            return Err(TopologyError::LambdaTooSmall(self.lambda));
        }
        if self.omega == 0 || self.rho == 0 {
            return Err(TopologyError::ZeroWidth);
        }
        if self.mu == 0 || !self.mu.is_multiple_of(self.lambda) {
            return Err(TopologyError::MuNotMultiple { mu: self.mu, lambda: self.lambda });
        }
        Ok(())
    }

    pub fn nu(&self) -> usize {
        self.mu / self.lambda
    }

    pub fn n(&self) -> usize {
        self.mu * (self.rho + self.omega)
    }

    pub fn k(&self) -> usize {
        self.mu * self.omega
    }

    /// Length of one period of the locator sequence, `λ(ρ+ω)`.
    pub fn period(&self) -> usize {
        self.lambda * (self.rho + self.omega)
    }

    /// Length of each local code, `λω+ρ`.
    pub fn local_len(&self) -> usize {
        self.lambda * self.omega + self.rho
    }

    /// Position `j` maps to locator `α_{j mod λ(ρ+ω)}`.
    pub fn locator_index(&self, j: usize) -> Result<usize, TopologyError> {
        if j >= self.n() {
            return Err(TopologyError::OutOfRange { pos: j, n: self.n() });
        }
        Ok(j % self.period())
    }

    /// Positions of block column `ell` (1-based, taken modulo `2μ`): odd columns
    /// have width ω, even columns width ρ.
    pub fn block_column(&self, ell: usize) -> Vec<usize> {
        let ell = (ell - 1) % (2 * self.mu) + 1;
        let m = ell.div_ceil(2) - 1;
        let base = m * (self.rho + self.omega);
        if ell % 2 == 1 {
            (base..base + self.omega).collect()
        } else {
            (base + self.omega..base + self.omega + self.rho).collect()
        }
    }

    /// Block columns touched by block row `i`, in local-code column order:
    /// `2i−1, 2i, 2i+1, 2i+3, …, 2i+2λ−3` (wrapped modulo `2μ`).
    pub fn block_columns_of_row(&self, i: usize) -> Vec<usize> {
        let wrap = |c: usize| (c - 1) % (2 * self.mu) + 1;
        let mut cols = vec![wrap(2 * i - 1), wrap(2 * i)];
        cols.extend((1..self.lambda).map(|j| wrap(2 * i - 1 + 2 * j)));
        cols
    }

    /// Which of the λ distinct local codes `D^(t)` local code `i` uses.
    pub fn local_type(&self, i: usize) -> usize {
        (i - 1) % self.lambda + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologySets {
    params: TopologyParams,
    a: Vec<Vec<usize>>,
    b: Vec<Vec<Vec<usize>>>,
    // local codes containing each position, ascending
    owners: Vec<Vec<usize>>,
}

pub fn build_sets(p: TopologyParams) -> Result<TopologySets, TopologyError> {
    p.validate()?;
    let n = p.n();
    let w = p.rho + p.omega;
    let mut a = Vec::with_capacity(p.mu);
    let mut b = Vec::with_capacity(p.mu);
    for i in 1..=p.mu {
        let mut bi = Vec::with_capacity(p.lambda + 1);
        bi.push((i * p.omega + (i - 1) * p.rho..i * w).collect::<Vec<_>>());
        for j in 1..=p.lambda {
            let start = (i + j - 2) * w;
            bi.push((start..start + p.omega).map(|x| x % n).collect());
        }
        let mut ai = bi[1].clone();
        ai.extend(&bi[0]);
        for set in &bi[2..] {
            ai.extend(set);
        }
        a.push(ai);
        b.push(bi);
    }
    let mut owners = vec![Vec::new(); n];
    for (idx, ai) in a.iter().enumerate() {
        for &pos in ai {
            owners[pos].push(idx + 1);
        }
    }
    Ok(TopologySets { params: p, a, b, owners })
}

impl TopologySets {
    pub fn params(&self) -> TopologyParams {
        self.params
    }

    /// `A_i` as an ordered position list (1-based `i`).
    pub fn a(&self, i: usize) -> &[usize] {
        &self.a[i - 1]
    }

    /// `B_ij` for `j ∈ 0..=λ` (1-based `i`).
    pub fn b(&self, i: usize, j: usize) -> &[usize] {
        &self.b[i - 1][j]
    }

    pub fn all_a(&self) -> &[Vec<usize>] {
        &self.a
    }

    /// Local codes whose support contains `pos`, ascending.
    pub fn owners(&self, pos: usize) -> &[usize] {
        &self.owners[pos]
    }

    /// Parity positions `∪_i B_i0`, ascending.
    pub fn parity_positions(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.b.iter().flat_map(|bi| bi[0].iter().copied()).collect();
        v.sort_unstable();
        v
    }

    /// Information positions (all non-parity positions), ascending.
    pub fn info_positions(&self) -> Vec<usize> {
        let parity = self.parity_positions();
        (0..self.params.n()).filter(|p| parity.binary_search(p).is_err()).collect()
    }

    /// Local codes `i' ≠ i` whose support meets `A_i`.
    pub fn overlap_partners(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .a(i)
            .iter()
            .flat_map(|&pos| self.owners(pos).iter().copied())
            .filter(|&o| o != i)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `A_i ∩ A_{i'}` in ascending order.
    pub fn intersection(&self, i: usize, i2: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.a(i).iter().copied().filter(|p| self.owners(*p).contains(&i2)).collect();
        v.sort_unstable();
        v
    }
}
