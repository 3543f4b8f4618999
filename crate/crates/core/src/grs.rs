//! Generalized and basic Reed-Solomon codes.
//!
//! A GRS code of length `n₀` with `r` parities is described by its locators
//! `α_j`, generator multipliers `β'_j` and parity-check multipliers `β_j`.
//! Codewords are `(β'_0 f(α_0), …, β'_{n₀−1} f(α_{n₀−1}))` for `deg f < n₀ − r`,
//! and the parity-check matrix is `V_r(α) · diag(β)`. With every `β'_j = 1`
//! the code is a *basic* RS code.

use thiserror::Error;

use crate::field::{Field, FieldError};
use crate::matpoly::{interpolate, vandermonde, MatPolyError, Matrix, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrsError {
    #[error("locators must be distinct and nonzero")]
    BadLocators,
    #[error("parity count {r} exceeds length {n}")]
    TooManyParities { r: usize, n: usize },
    #[error("generator multipliers must be nonzero and match the locator count")]
    BadMultipliers,
    #[error("message polynomial degree {deg} exceeds {max}")]
    DegreeTooHigh { deg: usize, max: usize },
    #[error("word length {got} does not match code length {want}")]
    Length { got: usize, want: usize },
    #[error("input is not a codeword")]
    NotCodeword,
    #[error(transparent)]
    MatPoly(#[from] MatPolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrsSpec {
    field: Field,
    locators: Vec<u64>,
    pc_multipliers: Vec<u64>,
    gen_multipliers: Vec<u64>,
    r: usize,
}

/// `β_i = [∏_{j≠i} (α_i − α_j)]⁻¹`.
pub fn brs_multipliers(field: Field, locators: &[u64]) -> Result<Vec<u64>, GrsError> {
    locators
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            let prod = locators
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(1, |acc, (_, &aj)| field.mul(acc, field.sub(ai, aj)));
            field.inv(prod).map_err(|_| GrsError::BadLocators)
        })
        .collect()
}

fn check_locators(field: Field, locators: &[u64]) -> Result<(), GrsError> {
    let mut sorted = locators.to_vec();
    sorted.sort_unstable();
    if sorted.first() == Some(&0)
        || sorted.windows(2).any(|w| w[0] == w[1])
        || locators.iter().any(|&a| !field.contains(a))
    {
        return Err(GrsError::BadLocators);
    }
    Ok(())
}

impl GrsSpec {
    /// Basic RS code: all generator multipliers equal one.
    pub fn brs(field: Field, locators: Vec<u64>, r: usize) -> Result<GrsSpec, GrsError> {
        let ones = vec![1; locators.len()];
        GrsSpec::grs(field, locators, r, ones)
    }

    /// GRS code with the given generator multipliers `β'`; the parity-check
    /// multipliers follow as `β_i = [β'_i ∏_{j≠i}(α_i − α_j)]⁻¹`.
    pub fn grs(field: Field, locators: Vec<u64>, r: usize, gen_multipliers: Vec<u64>) -> Result<GrsSpec, GrsError> {
        check_locators(field, &locators)?;
        if r > locators.len() {
            return Err(GrsError::TooManyParities { r, n: locators.len() });
        }
        if gen_multipliers.len() != locators.len() || gen_multipliers.iter().any(|&b| b == 0 || !field.contains(b)) {
            return Err(GrsError::BadMultipliers);
        }
        let brs = brs_multipliers(field, &locators)?;
        let pc_multipliers = brs
            .iter()
            .zip(&gen_multipliers)
            .map(|(&b, &g)| field.mul(b, field.inv(g).expect("nonzero multiplier")))
            .collect();
        Ok(GrsSpec { field, locators, pc_multipliers, gen_multipliers, r })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn locators(&self) -> &[u64] {
        &self.locators
    }

    pub fn pc_multipliers(&self) -> &[u64] {
        &self.pc_multipliers
    }

    pub fn gen_multipliers(&self) -> &[u64] {
        &self.gen_multipliers
    }

    pub fn len(&self) -> usize {
        self.locators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locators.is_empty()
    }

    /// Number of parity symbols `r = n₀ − k₀`.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn dimension(&self) -> usize {
        self.len() - self.r
    }

    pub fn is_basic(&self) -> bool {
        self.gen_multipliers.iter().all(|&b| b == 1)
    }

    /// `V_r(α) · diag(β)`.
    pub fn pc_matrix(&self) -> Matrix {
        let mut h = vandermonde(self.field, self.r, &self.locators).expect("validated locators");
        for row in 0..h.rows() {
            for col in 0..h.cols() {
                h.set(row, col, self.field.mul(h.get(row, col), self.pc_multipliers[col]));
            }
        }
        h
    }

    pub fn encode_eval(&self, f: &Poly) -> Result<Vec<u64>, GrsError> {
        if let Some(deg) = f.degree() {
            if deg >= self.dimension() {
                return Err(GrsError::DegreeTooHigh { deg, max: self.dimension().saturating_sub(1) });
            }
        }
        Ok(self
            .locators
            .iter()
            .zip(&self.gen_multipliers)
            .map(|(&a, &b)| self.field.mul(b, f.eval(a)))
            .collect())
    }

    fn poly_from_points(&self, idx: &[usize], word: &[Option<u64>]) -> Result<Poly, GrsError> {
        if idx.is_empty() {
            return Ok(Poly::zero(self.field));
        }
        let pts: Vec<(u64, u64)> = idx
            .iter()
            .map(|&j| {
                let y = word[j].expect("unerased coordinate");
                let y = self.field.div(y, self.gen_multipliers[j]).expect("nonzero multiplier");
                (self.locators[j], y)
            })
            .collect();
        Ok(interpolate(self.field, &pts)?)
    }

    /// Fills erasures (`None`) if there are at most `r` of them; otherwise the
    /// input is returned unchanged.
    pub fn erasure_decode(&self, word: &[Option<u64>]) -> Result<Vec<Option<u64>>, GrsError> {
        if word.len() != self.len() {
            return Err(GrsError::Length { got: word.len(), want: self.len() });
        }
        let erased = word.iter().filter(|s| s.is_none()).count();
        if erased == 0 || erased > self.r {
            return Ok(word.to_vec());
        }
        let known: Vec<usize> = (0..word.len()).filter(|&j| word[j].is_some()).take(self.dimension()).collect();
        let f = self.poly_from_points(&known, word)?;
        Ok(word
            .iter()
            .enumerate()
            .map(|(j, s)| s.or_else(|| Some(self.field.mul(self.gen_multipliers[j], f.eval(self.locators[j])))))
            .collect())
    }

    /// Inverse of the evaluation map.
    pub fn to_poly(&self, codeword: &[u64]) -> Result<Poly, GrsError> {
        if codeword.len() != self.len() {
            return Err(GrsError::Length { got: codeword.len(), want: self.len() });
        }
        let word: Vec<Option<u64>> = codeword.iter().map(|&v| Some(v)).collect();
        let idx: Vec<usize> = (0..self.dimension()).collect();
        let f = self.poly_from_points(&idx, &word)?;
        if self.encode_eval(&f)? != codeword {
            return Err(GrsError::NotCodeword);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf11() -> Field {
        Field::prime(11).unwrap()
    }

    fn random_poly(f: Field, k: usize, rng: &mut ChaCha8Rng) -> Poly {
        Poly::new(f, (0..k).map(|_| rng.random_range(0..f.order())).collect())
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(brs_multipliers(gf11(), &[1, 2]).unwrap(), vec![10, 1]);
        assert_eq!(brs_multipliers(gf11(), &[7]).unwrap(), vec![1]);
        assert!(GrsSpec::brs(gf11(), vec![1, 1], 1).is_err());
    }

    #[test]
    fn pc_matrix_examples() {
        let spec = GrsSpec::brs(gf11(), vec![1, 2, 3], 0).unwrap();
        assert_eq!(spec.pc_matrix().rows(), 0);
        let spec = GrsSpec::brs(gf11(), vec![1, 2, 3, 4, 5, 6], 2).unwrap();
        assert_eq!(spec.pc_matrix().rank(), 2);
        let plain = GrsSpec::grs(gf11(), vec![1, 2, 3], 1, vec![1, 1, 1]).unwrap();
        // with pc multipliers forced to one, the single check row is all ones
        let h = vandermonde(gf11(), 1, plain.locators()).unwrap();
        assert_eq!(h.to_rows(), vec![vec![1, 1, 1]]);
    }

    #[test]
    fn codewords_satisfy_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for field in [gf11(), Field::binary(4).unwrap()] {
            let spec = GrsSpec::brs(field, (1..9).collect(), 3).unwrap();
            let h = spec.pc_matrix();
            for _ in 0..50 {
                let f = random_poly(field, spec.dimension(), &mut rng);
                let c = spec.encode_eval(&f).unwrap();
                assert!(h.mul_vec(&c).unwrap().iter().all(|&v| v == 0));
            }
        }
        let gens = vec![3, 5, 7, 2, 9, 4];
        let spec = GrsSpec::grs(gf11(), (1..7).collect(), 2, gens).unwrap();
        let f = random_poly(gf11(), 4, &mut rng);
        let c = spec.encode_eval(&f).unwrap();
        assert!(spec.pc_matrix().mul_vec(&c).unwrap().iter().all(|&v| v == 0));
        assert_eq!(spec.to_poly(&c).unwrap(), f);
    }

    #[test]
    fn encode_examples() {
        let spec = GrsSpec::brs(gf11(), (1..7).collect(), 2).unwrap();
        assert_eq!(spec.encode_eval(&Poly::zero(gf11())).unwrap(), vec![0; 6]);
        assert_eq!(spec.encode_eval(&Poly::new(gf11(), vec![1])).unwrap(), vec![1; 6]);
        assert!(spec.encode_eval(&Poly::new(gf11(), vec![0, 0, 0, 0, 1])).is_err());
    }

    #[test]
    fn erasure_decode_examples() {
        let spec = GrsSpec::brs(gf11(), (1..7).collect(), 2).unwrap();
        let f = Poly::new(gf11(), vec![3, 1, 4, 1]);
        let c = spec.encode_eval(&f).unwrap();
        let full: Vec<Option<u64>> = c.iter().map(|&v| Some(v)).collect();
        assert_eq!(spec.erasure_decode(&full).unwrap(), full);

        let mut two = full.clone();
        two[1] = None;
        two[4] = None;
        assert_eq!(spec.erasure_decode(&two).unwrap(), full);

        let mut three = two.clone();
        three[0] = None;
        assert_eq!(spec.erasure_decode(&three).unwrap(), three);
    }

    #[test]
    fn erasure_decode_exhaustive_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = GrsSpec::brs(gf11(), (1..11).collect(), 4).unwrap();
        let f = random_poly(gf11(), 6, &mut rng);
        let c: Vec<Option<u64>> = spec.encode_eval(&f).unwrap().into_iter().map(Some).collect();
        for mask in 0u32..(1 << 10) {
            if mask.count_ones() as usize > spec.r() {
                continue;
            }
            let w: Vec<Option<u64>> =
                c.iter().enumerate().map(|(j, &s)| if mask >> j & 1 == 1 { None } else { s }).collect();
            assert_eq!(spec.erasure_decode(&w).unwrap(), c);
        }
    }

    #[test]
    fn to_poly_examples() {
        let spec = GrsSpec::brs(gf11(), (1..7).collect(), 2).unwrap();
        assert!(spec.to_poly(&[0; 6]).unwrap().is_zero());
        let f = Poly::new(gf11(), vec![2, 0, 7]);
        assert_eq!(spec.to_poly(&spec.encode_eval(&f).unwrap()).unwrap(), f);
        assert_eq!(spec.to_poly(&[1, 0, 0, 0, 0, 0]), Err(GrsError::NotCodeword));
    }

    #[test]
    fn brs_min_distance_brute_force() {
        // [6,3,4] over GF(7): 7^3 codewords
        let f7 = Field::prime(7).unwrap();
        let spec = GrsSpec::brs(f7, (1..7).collect(), 3).unwrap();
        let mut best = usize::MAX;
        for m in 1..7u64.pow(3) {
            let coeffs = vec![m % 7, m / 7 % 7, m / 49];
            let c = spec.encode_eval(&Poly::new(f7, coeffs)).unwrap();
            best = best.min(c.iter().filter(|&&v| v != 0).count());
        }
        assert_eq!(best, spec.r() + 1);
    }
}
