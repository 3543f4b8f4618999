//! Block circulant codes `C_BC[μ,λ,ω,ρ]`.
//!
//! A code is fixed by its topology parameters, a field and `λ(ρ+ω)` distinct
//! nonzero locators. Position `j` is associated with locator
//! `α_{j mod λ(ρ+ω)}`, and local code `i` is the basic RS code with `ρ`
//! parities over the locators of `A_i`. Because the locator sequence repeats
//! with period `λ(ρ+ω)`, only `λ` distinct local codes `D^(1)…D^(λ)` exist, and
//! local code `i` uses `D^(t)` with `t = ((i−1) mod λ) + 1`.
//!
//! Messages are laid out on the information positions in ascending order;
//! every other position is a parity position belonging to exactly one local
//! code, which makes systematic encoding a per-local-code `ρ×ρ` solve.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldError, FieldKind};
use crate::grs::{GrsError, GrsSpec};
use crate::matpoly::{MatPolyError, Matrix};
use crate::topology::{build_sets, TopologyError, TopologyParams, TopologySets};

/// Default enumeration budget for [`BcCode::brute_force_min_distance`].
pub const DEFAULT_MINDIST_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BcError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("field of order {q} is too small: need q > {needed}")]
    FieldTooSmall { q: u64, needed: usize },
    #[error("expected {want} locators, got {got}")]
    LocatorCount { want: usize, got: usize },
    #[error("locators must be distinct nonzero field elements")]
    BadLocators,
    #[error("parity-check matrix is rank deficient ({rank} < {want})")]
    RankDeficient { rank: usize, want: usize },
    #[error("length mismatch: expected {want}, got {got}")]
    Length { want: usize, got: usize },
    #[error("value {0} is not a field element")]
    NotInField(u64),
    #[error("enumeration of {count} codewords exceeds the budget {budget}")]
    BudgetExceeded { count: String, budget: u64 },
    #[error("cannot shorten by {z}: dimension is {k}")]
    ShortenTooFar { z: usize, k: usize },
    #[error(transparent)]
    Grs(#[from] GrsError),
    #[error(transparent)]
    MatPoly(#[from] MatPolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `Λ_ℓ` for `ℓ = 1..=2λ`: ω locators for odd ℓ, ρ for even ℓ.
pub fn partition_locators(params: &TopologyParams, locators: &[u64]) -> Result<Vec<Vec<u64>>, BcError> {
    params.validate()?;
    check_locator_list(params, locators)?;
    Ok((1..=2 * params.lambda)
        .map(|ell| params.block_column(ell).into_iter().map(|j| locators[j]).collect())
        .collect())
}

fn check_locator_list(params: &TopologyParams, locators: &[u64]) -> Result<(), BcError> {
    if locators.len() != params.period() {
        return Err(BcError::LocatorCount { want: params.period(), got: locators.len() });
    }
    let mut sorted = locators.to_vec();
    sorted.sort_unstable();
    if sorted.first() == Some(&0) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(BcError::BadLocators);
    }
    Ok(())
}

/// The λ local codes `D^(t)` and their parity-check matrices `W_t`.
///
/// `D^(t)` has locators `Λ_{2t−1}, Λ_{2t}, Λ_{2t+1}, Λ_{2t+3}, …` (odd indices
/// wrapping modulo 2λ), which is the column order of `W_t`.
pub fn build_local_codes(
    params: &TopologyParams,
    field: Field,
    partition: &[Vec<u64>],
) -> Result<(Vec<GrsSpec>, Vec<Matrix>), BcError> {
    let mut specs = Vec::with_capacity(params.lambda);
    let mut ws = Vec::with_capacity(params.lambda);
    let wrap = |ell: usize| (ell - 1) % (2 * params.lambda) + 1;
    for t in 1..=params.lambda {
        let mut seq = partition[2 * t - 2].clone();
        seq.extend(&partition[2 * t - 1]);
        for j in 1..params.lambda {
            seq.extend(&partition[wrap(2 * t - 1 + 2 * j) - 1]);
        }
        let spec = GrsSpec::brs(field, seq, params.rho)?;
        ws.push(spec.pc_matrix());
        specs.push(spec);
    }
    Ok((specs, ws))
}

/// Places `W_t` on the block columns of every block row `i = sλ + t`.
pub fn build_pc_matrix(sets: &TopologySets, ws: &[Matrix]) -> Matrix {
    let p = sets.params();
    let field = ws[0].field();
    let mut h = Matrix::zeros(field, p.mu * p.rho, p.n());
    for i in 1..=p.mu {
        let w = &ws[p.local_type(i) - 1];
        for (col, &pos) in sets.a(i).iter().enumerate() {
            for r in 0..p.rho {
                h.set((i - 1) * p.rho + r, pos, w.get(r, col));
            }
        }
    }
    h
}

/// How shortened parameters are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ShortenConvention {
    /// `[n, k−z, d]`: block length kept.
    #[default]
    KeepLength,
    /// `[n−z, k−z, d]`: pinned symbols are not transmitted.
    DropPinned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedCodeParams {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub z: usize,
}

/// On-disk code description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeSpecFile {
    pub mu: usize,
    pub lambda: usize,
    pub omega: usize,
    pub rho: usize,
    pub field: Field,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locators: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct BcCode {
    params: TopologyParams,
    field: Field,
    locators: Vec<u64>,
    partition: Vec<Vec<u64>>,
    sets: TopologySets,
    local_specs: Vec<GrsSpec>,
    ws: Vec<Matrix>,
    h: Matrix,
    info: Vec<usize>,
    // per local type: -(W_par)^-1 W_rest, mapping the λω non-parity symbols of A_i to B_i0
    parity_maps: Vec<Matrix>,
}

impl BcCode {
    /// Builds the code with default locators `g⁰, g¹, …` for the primitive element `g`.
    pub fn new(params: TopologyParams, field: Field) -> Result<BcCode, BcError> {
        params.validate()?;
        check_field_size(&params, field)?;
        let locators = field.primitive_powers(params.period()).expect("field size checked");
        BcCode::with_locators(params, field, locators)
    }

    pub fn with_locators(params: TopologyParams, field: Field, locators: Vec<u64>) -> Result<BcCode, BcError> {
        params.validate()?;
        check_field_size(&params, field)?;
        if let Some(&bad) = locators.iter().find(|&&a| !field.contains(a)) {
            return Err(BcError::NotInField(bad));
        }
        let partition = partition_locators(&params, &locators)?;
        let sets = build_sets(params)?;
        let (local_specs, ws) = build_local_codes(&params, field, &partition)?;
        let h = build_pc_matrix(&sets, &ws);

        let rho = params.rho;
        let omega = params.omega;
        let local_len = params.local_len();
        let par_cols: Vec<usize> = (omega..omega + rho).collect();
        let rest_cols: Vec<usize> = (0..omega).chain(omega + rho..local_len).collect();
        let mut parity_maps = Vec::with_capacity(params.lambda);
        for w in &ws {
            let w_par = w.select_columns(&par_cols);
            let inv = w_par.invert().map_err(|_| BcError::RankDeficient { rank: w_par.rank() * params.mu, want: rho * params.mu })?;
            let mut m = inv.matmul(&w.select_columns(&rest_cols))?;
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    m.set(r, c, field.neg(m.get(r, c)));
                }
            }
            parity_maps.push(m);
        }
        let info = sets.info_positions();
        Ok(BcCode { params, field, locators, partition, sets, local_specs, ws, h, info, parity_maps })
    }

    pub fn from_spec_file(file: &CodeSpecFile) -> Result<BcCode, BcError> {
        let params = TopologyParams::new(file.mu, file.lambda, file.omega, file.rho)?;
        match &file.locators {
            Some(l) => BcCode::with_locators(params, file.field, l.clone()),
            None => BcCode::new(params, file.field),
        }
    }

    pub fn to_spec_file(&self) -> CodeSpecFile {
        CodeSpecFile {
            mu: self.params.mu,
            lambda: self.params.lambda,
            omega: self.params.omega,
            rho: self.params.rho,
            field: self.field,
            locators: Some(self.locators.clone()),
        }
    }

    pub fn params(&self) -> &TopologyParams {
        &self.params
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn locators(&self) -> &[u64] {
        &self.locators
    }

    /// `Λ_1 … Λ_{2λ}`.
    pub fn partition(&self) -> &[Vec<u64>] {
        &self.partition
    }

    pub fn sets(&self) -> &TopologySets {
        &self.sets
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn k(&self) -> usize {
        self.params.k()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// `D^(t)` for `t ∈ 1..=λ`.
    pub fn local_type_spec(&self, t: usize) -> &GrsSpec {
        &self.local_specs[t - 1]
    }

    /// Local code used on `A_i`.
    pub fn local_spec(&self, i: usize) -> &GrsSpec {
        self.local_type_spec(self.params.local_type(i))
    }

    /// `W_t` for `t ∈ 1..=λ`.
    pub fn w(&self, t: usize) -> &Matrix {
        &self.ws[t - 1]
    }

    pub fn pc_matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    /// `rank(H)`, computed from the block-diagonal restriction of `H` to the
    /// parity positions; equals `μρ` for any valid construction.
    pub fn pc_rank(&self) -> usize {
        let par_cols: Vec<usize> = (self.params.omega..self.params.omega + self.params.rho).collect();
        self.ws.iter().map(|w| w.select_columns(&par_cols).rank()).sum::<usize>() * self.params.nu()
    }

    /// Minimum distance guaranteed by the construction, when known:
    /// `2ρ+1` for λ=2, `λρ+1` when ν is a power of two over characteristic 2.
    pub fn designed_distance(&self) -> Option<usize> {
        designed_distance(&self.params, self.field)
    }

    pub fn encode(&self, message: &[u64]) -> Result<Vec<u64>, BcError> {
        if message.len() != self.k() {
            return Err(BcError::Length { want: self.k(), got: message.len() });
        }
        if let Some(&bad) = message.iter().find(|&&v| !self.field.contains(v)) {
            return Err(BcError::NotInField(bad));
        }
        let mut c = vec![0u64; self.n()];
        for (&pos, &v) in self.info.iter().zip(message) {
            c[pos] = v;
        }
        let (omega, rho) = (self.params.omega, self.params.rho);
        let mut rest = Vec::with_capacity(self.params.lambda * omega);
        for i in 1..=self.params.mu {
            let a = self.sets.a(i);
            rest.clear();
            rest.extend(a[..omega].iter().chain(&a[omega + rho..]).map(|&p| c[p]));
            let parity = self.parity_maps[self.params.local_type(i) - 1].mul_vec(&rest)?;
            for (&pos, v) in a[omega..omega + rho].iter().zip(parity) {
                c[pos] = v;
            }
        }
        Ok(c)
    }

    /// Systematic generator `G` (k × n, natural column order): identity on the
    /// information positions.
    pub fn systematic_generator(&self) -> Result<Matrix, BcError> {
        let mut g = Matrix::zeros(self.field, self.k(), self.n());
        let mut e = vec![0u64; self.k()];
        for row in 0..self.k() {
            e[row] = 1;
            let c = self.encode(&e)?;
            e[row] = 0;
            for (col, v) in c.into_iter().enumerate() {
                g.set(row, col, v);
            }
        }
        Ok(g)
    }

    pub fn syndrome(&self, word: &[u64]) -> Result<Vec<u64>, BcError> {
        if word.len() != self.n() {
            return Err(BcError::Length { want: self.n(), got: word.len() });
        }
        Ok(self.h.mul_vec(word)?)
    }

    pub fn is_codeword(&self, word: &[u64]) -> bool {
        self.syndrome(word).map(|s| s.iter().all(|&v| v == 0)).unwrap_or(false)
    }

    /// `c|_{A_i}` in the column order of `W_t`.
    pub fn local_codeword(&self, c: &[u64], i: usize) -> Vec<u64> {
        self.sets.a(i).iter().map(|&p| c[p]).collect()
    }

    /// Parameters after pinning the last `z` information symbols to zero.
    pub fn shorten(&self, z: usize, convention: ShortenConvention) -> Result<DerivedCodeParams, BcError> {
        if z >= self.k() {
            return Err(BcError::ShortenTooFar { z, k: self.k() });
        }
        let n = match convention {
            ShortenConvention::KeepLength => self.n(),
            ShortenConvention::DropPinned => self.n() - z,
        };
        Ok(DerivedCodeParams { n, k: self.k() - z, d: self.designed_distance(), z })
    }

    /// Encodes a message of the shortened code (`k − z` symbols).
    pub fn encode_shortened(&self, message: &[u64], z: usize) -> Result<Vec<u64>, BcError> {
        if z >= self.k() {
            return Err(BcError::ShortenTooFar { z, k: self.k() });
        }
        if message.len() != self.k() - z {
            return Err(BcError::Length { want: self.k() - z, got: message.len() });
        }
        let mut full = message.to_vec();
        full.resize(self.k(), 0);
        self.encode(&full)
    }

    /// Minimum Hamming weight over all nonzero codewords, by enumerating every
    /// message. Fails if `q^k` exceeds `budget`.
    pub fn brute_force_min_distance(&self, budget: u64) -> Result<usize, BcError> {
        let g = self.systematic_generator()?;
        min_weight_by_enumeration(&g, budget)
    }
}

pub fn designed_distance(params: &TopologyParams, field: Field) -> Option<usize> {
    if params.lambda == 2 {
        Some(2 * params.rho + 1)
    } else if params.nu().is_power_of_two() && field.is_characteristic_two() {
        Some(params.lambda * params.rho + 1)
    } else {
        None
    }
}

fn check_field_size(params: &TopologyParams, field: Field) -> Result<(), BcError> {
    if field.order() <= params.period() as u64 {
        return Err(BcError::FieldTooSmall { q: field.order(), needed: params.period() });
    }
    Ok(())
}

/// Smallest binary field GF(2^m) large enough for the given parameters.
pub fn default_field(params: &TopologyParams) -> Field {
    Field::smallest_above(FieldKind::Binary, params.period() as u64).expect("binary fields exist for every degree")
}

/// Minimum nonzero row-space weight of `g` by enumerating all `q^rows`
/// combinations; each step updates the running codeword by one row difference.
pub fn min_weight_by_enumeration(g: &Matrix, budget: u64) -> Result<usize, BcError> {
    let f = g.field();
    let q = f.order();
    let k = g.rows() as u32;
    let count = q.checked_pow(k);
    match count {
        Some(c) if c <= budget => {}
        _ => {
            return Err(BcError::BudgetExceeded {
                count: count.map_or(format!("{q}^{k}"), |c| c.to_string()),
                budget,
            })
        }
    }
    let n = g.cols();
    let mut digits = vec![0u64; g.rows()];
    let mut word = vec![0u64; n];
    let mut best = usize::MAX;
    'outer: loop {
        let mut j = 0;
        loop {
            if j == digits.len() {
                break 'outer;
            }
            let old = digits[j];
            let new = if old + 1 == q { 0 } else { old + 1 };
            digits[j] = new;
            let delta = f.sub(new, old);
            for (w, &gv) in word.iter_mut().zip(g.row(j)) {
                *w = f.add(*w, f.mul(delta, gv));
            }
            if new != 0 {
                break;
            }
            j += 1;
        }
        let weight = word.iter().filter(|&&v| v != 0).count();
        if weight < best {
            best = weight;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(mu: usize, lambda: usize, omega: usize, rho: usize, field: Field) -> BcCode {
        BcCode::new(TopologyParams::new(mu, lambda, omega, rho).unwrap(), field).unwrap()
    }

    fn small_code() -> BcCode {
        code(4, 2, 2, 2, Field::prime(11).unwrap())
    }

    fn random_message(c: &BcCode, rng: &mut ChaCha8Rng) -> Vec<u64> {
        (0..c.k()).map(|_| rng.random_range(0..c.field().order())).collect()
    }

    #[test]
    fn partition_examples() {
        let p = TopologyParams::new(4, 2, 2, 2).unwrap();
        let l: Vec<u64> = (1..=8).collect();
        let part = partition_locators(&p, &l).unwrap();
        assert_eq!(part, vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]]);
        let p = TopologyParams::new(2, 2, 1, 1).unwrap();
        let part = partition_locators(&p, &[1, 2, 3, 4]).unwrap();
        assert_eq!(part, vec![vec![1], vec![2], vec![3], vec![4]]);
        assert!(partition_locators(&p, &[1, 2, 3]).is_err());
        assert!(partition_locators(&p, &[1, 2, 3, 3]).is_err());
    }

    #[test]
    fn local_code_locators() {
        let c = small_code();
        let l = c.locators();
        assert_eq!(c.local_type_spec(1).locators(), &l[0..6]);
        let expected2: Vec<u64> = [4, 5, 6, 7, 0, 1].iter().map(|&j| l[j]).collect();
        assert_eq!(c.local_type_spec(2).locators(), expected2.as_slice());
        for t in 1..=2 {
            assert_eq!(c.w(t).rank(), 2);
        }
    }

    #[test]
    fn w_is_mds() {
        let c = code(6, 3, 2, 2, Field::binary(4).unwrap());
        for t in 1..=3 {
            let w = c.w(t);
            for a in 0..w.cols() {
                for b in a + 1..w.cols() {
                    assert_eq!(w.select_columns(&[a, b]).rank(), 2);
                }
            }
        }
    }

    #[test]
    fn pc_matrix_layout() {
        let c = small_code();
        let h = c.pc_matrix();
        // block row 2 (rows 2,3) holds W_2 at positions 4..10
        for pos in 0..16 {
            let nonzero = (2..4).any(|r| h.get(r, pos) != 0);
            assert_eq!(nonzero, (4..10).contains(&pos), "position {pos}");
        }
        let c2 = code(2, 2, 1, 1, Field::prime(5).unwrap());
        // row 2 wraps: W_21 lands on block column 1, position 0
        assert_ne!(c2.pc_matrix().get(1, 0), 0);
        for cc in [&c, &c2] {
            for i in 1..=cc.params().mu {
                let rows = (i - 1) * cc.params().rho..i * cc.params().rho;
                let mut support: Vec<usize> =
                    (0..cc.n()).filter(|&p| rows.clone().any(|r| cc.pc_matrix().get(r, p) != 0)).collect();
                let mut a = cc.sets().a(i).to_vec();
                support.sort_unstable();
                a.sort_unstable();
                assert_eq!(support, a);
            }
            assert_eq!(cc.pc_matrix().rank(), cc.pc_rank());
        }
    }

    #[test]
    fn generator_properties() {
        for c in [small_code(), code(6, 3, 1, 1, Field::binary(3).unwrap()), code(4, 2, 2, 3, Field::binary(4).unwrap())] {
            let g = c.systematic_generator().unwrap();
            let ght = g.matmul(&c.pc_matrix().transpose()).unwrap();
            assert!(ght.is_zero());
            assert_eq!(g.rank(), c.k());
            let p = c.params();
            let weight = g.row(0).iter().filter(|&&v| v != 0).count();
            assert_eq!(weight, p.lambda * p.rho + 1);
            // parity entries of every generator row are nonzero on the blocks it touches
            for r in 0..c.k() {
                let pos = c.info_positions()[r];
                for &i in c.sets().owners(pos) {
                    for &par in c.sets().b(i, 0) {
                        assert_ne!(g.get(r, par), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn encode_properties() {
        let c = small_code();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(c.encode(&[0; 8]).unwrap(), vec![0; 16]);
        let mut e1 = vec![0; 8];
        e1[0] = 1;
        let cw = c.encode(&e1).unwrap();
        assert_eq!(cw.iter().filter(|&&v| v != 0).count(), 5);
        for _ in 0..50 {
            let m = random_message(&c, &mut rng);
            let cw = c.encode(&m).unwrap();
            assert!(c.is_codeword(&cw));
            let info: Vec<u64> = c.info_positions().iter().map(|&p| cw[p]).collect();
            assert_eq!(info, m);
            for i in 1..=4 {
                let local = c.local_codeword(&cw, i);
                let s = c.local_spec(i).pc_matrix().mul_vec(&local).unwrap();
                assert!(s.iter().all(|&v| v == 0));
                c.local_spec(i).to_poly(&local).unwrap();
            }
        }
        assert!(c.encode(&[0; 3]).is_err());
        assert!(c.local_codeword(&[0; 16], 2).iter().all(|&v| v == 0));
    }

    #[test]
    fn shortening() {
        let p = TopologyParams::new(12, 2, 86, 32).unwrap();
        let c = BcCode::new(p, Field::binary(8).unwrap()).unwrap();
        assert_eq!((c.n(), c.k(), c.designed_distance()), (1416, 1032, Some(65)));
        let s = c.shorten(8, ShortenConvention::KeepLength).unwrap();
        assert_eq!((s.n, s.k, s.d), (1416, 1024, Some(65)));
        let s = c.shorten(8, ShortenConvention::DropPinned).unwrap();
        assert_eq!((s.n, s.k), (1408, 1024));
        let s0 = c.shorten(0, ShortenConvention::KeepLength).unwrap();
        assert_eq!((s0.n, s0.k), (1416, 1032));
        assert!(c.shorten(1032, ShortenConvention::KeepLength).is_err());

        let small = small_code();
        let cw = small.encode_shortened(&[1, 2, 3, 4, 5, 6], 2).unwrap();
        assert!(small.is_codeword(&cw));
    }

    #[test]
    fn min_distance_examples() {
        let c = code(2, 2, 1, 1, Field::prime(5).unwrap());
        assert_eq!(c.brute_force_min_distance(DEFAULT_MINDIST_BUDGET).unwrap(), 3);
        let c = code(3, 3, 1, 1, Field::binary(3).unwrap());
        assert_eq!(c.brute_force_min_distance(DEFAULT_MINDIST_BUDGET).unwrap(), 4);
        assert!(matches!(small_code().brute_force_min_distance(1000), Err(BcError::BudgetExceeded { .. })));
    }

    #[test]
    fn construction_errors() {
        let p = TopologyParams::new(4, 2, 2, 2).unwrap();
        assert!(matches!(BcCode::new(p, Field::prime(7).unwrap()), Err(BcError::FieldTooSmall { .. })));
        assert_eq!(default_field(&p).order(), 16);
    }

    #[test]
    fn spec_file_round_trip() {
        let c = small_code();
        let json = serde_json::to_string(&c.to_spec_file()).unwrap();
        let back: CodeSpecFile = serde_json::from_str(&json).unwrap();
        let c2 = BcCode::from_spec_file(&back).unwrap();
        assert_eq!(c2.pc_matrix(), c.pc_matrix());
        let bare: CodeSpecFile = serde_json::from_str(
            r#"{"mu":4,"lambda":2,"omega":2,"rho":2,"field":{"kind":"prime","p_or_m":11}}"#,
        )
        .unwrap();
        assert_eq!(BcCode::from_spec_file(&bare).unwrap().locators(), c.locators());
    }
}
