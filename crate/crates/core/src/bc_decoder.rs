//! Two-phase erasure decoder for block circulant codes with overlap factor 2.
//!
//! Phase 1 repeatedly decodes every local code holding between 1 and ρ
//! erasures, merging the recoveries of one round before the next round
//! inspects the word again. Phase 2 handles pairs of consecutive local codes
//! `(i, i+1)` whose union holds at most 2ρ erasures while both flanking
//! overlaps are clean. For such a pair the difference `s = m₁ − m₂` of the two
//! message polynomials is first recovered inside local code `i`; it links both
//! local codewords to codewords of the auxiliary `[2(ρ+ω), 2ω, 2ρ+1]` RS code
//! over `α_0 … α_{2(ρ+ω)−1}`, where each has at most 2ρ erasures.
//!
//! The decoder never writes a wrong symbol: every output symbol is either the
//! transmitted value or still erased.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bc_code::BcCode;
use crate::field::Field;
use crate::grs::{GrsError, GrsSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("the pair decoder supports overlap factor 2 only (got lambda={0})")]
    UnsupportedLambda(usize),
    #[error("word length {got} does not match code length {want}")]
    Length { got: usize, want: usize },
    #[error("symbol {0} is neither -1 nor a field element")]
    BadSymbol(i64),
    #[error("pair ({0},{1}) is not decodable in the current state")]
    PairNotDecodable(usize, usize),
    #[error("({0},{1}) is not a pair of consecutive local codes")]
    NotConsecutive(usize, usize),
    #[error(transparent)]
    Grs(#[from] GrsError),
}

/// A word over `F_q ∪ {E}`; `None` marks an erasure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReceivedWord {
    symbols: Vec<Option<u64>>,
}

impl ReceivedWord {
    pub fn new(symbols: Vec<Option<u64>>) -> Self {
        ReceivedWord { symbols }
    }

    pub fn from_codeword(c: &[u64]) -> Self {
        ReceivedWord { symbols: c.iter().map(|&v| Some(v)).collect() }
    }

    /// Copies `c` with the given positions erased.
    pub fn erased(c: &[u64], positions: &[usize]) -> Self {
        let mut w = ReceivedWord::from_codeword(c);
        for &p in positions {
            w.symbols[p] = None;
        }
        w
    }

    /// Integers with `-1` for an erasure.
    pub fn from_ints(values: &[i64], field: Field) -> Result<Self, DecodeError> {
        let symbols = values
            .iter()
            .map(|&v| match v {
                -1 => Ok(None),
                v if v >= 0 && field.contains(v as u64) => Ok(Some(v as u64)),
                v => Err(DecodeError::BadSymbol(v)),
            })
            .collect::<Result<_, _>>()?;
        Ok(ReceivedWord { symbols })
    }

    pub fn to_ints(&self) -> Vec<i64> {
        self.symbols.iter().map(|s| s.map_or(-1, |v| v as i64)).collect()
    }

    pub fn symbols(&self) -> &[Option<u64>] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<u64> {
        self.symbols[j]
    }

    pub fn is_erased(&self, j: usize) -> bool {
        self.symbols[j].is_none()
    }

    pub fn n_erasures(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_none()).count()
    }

    pub fn erasures(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.is_erased(j)).collect()
    }

    fn count_in(&self, positions: &[usize]) -> usize {
        positions.iter().filter(|&&p| self.is_erased(p)).count()
    }

    pub fn restrict(&self, positions: &[usize]) -> Vec<Option<u64>> {
        positions.iter().map(|&p| self.symbols[p]).collect()
    }

    /// The codeword, if nothing is erased.
    pub fn to_codeword(&self) -> Option<Vec<u64>> {
        self.symbols.iter().copied().collect()
    }
}

impl Serialize for ReceivedWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_ints().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReceivedWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ints = Vec::<i64>::deserialize(d)?;
        let symbols = ints
            .into_iter()
            .map(|v| match v {
                -1 => Ok(None),
                v if v >= 0 => Ok(Some(v as u64)),
                v => Err(serde::de::Error::custom(format!("invalid symbol {v}"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(ReceivedWord { symbols })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeStatus {
    FullyRecovered,
    UncorrectableRemainder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskKind {
    Local { code: usize },
    Pair { first: usize, second: usize },
}

/// One unit of decoding work: which symbols it reads and which erased
/// positions it fills in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    #[serde(flatten)]
    pub kind: TaskKind,
    pub reads: Vec<usize>,
    pub writes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub phase: u8,
    pub tasks: Vec<Task>,
}

/// Rounds run in order; tasks of one round may run concurrently.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodePlan {
    pub rounds: Vec<Round>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub word: ReceivedWord,
    pub status: DecodeStatus,
    /// Number of phase-1 iterations.
    pub rounds: usize,
    pub pairs_used: Vec<(usize, usize)>,
    /// True when the pair selection left an erased local code uncovered.
    pub flagged_uncorrectable: bool,
    pub plan: DecodePlan,
}

/// The auxiliary `[2(ρ+ω), 2ω, 2ρ+1]` RS code with locators `α_0 … α_{2(ρ+ω)−1}`.
pub fn aux_spec(code: &BcCode) -> Result<GrsSpec, DecodeError> {
    let p = code.params();
    Ok(GrsSpec::brs(code.field(), code.locators()[..2 * (p.rho + p.omega)].to_vec(), 2 * p.rho)?)
}

fn check_input(code: &BcCode, word: &ReceivedWord) -> Result<(), DecodeError> {
    if code.params().lambda != 2 {
        return Err(DecodeError::UnsupportedLambda(code.params().lambda));
    }
    if word.len() != code.n() {
        return Err(DecodeError::Length { got: word.len(), want: code.n() });
    }
    if let Some(&v) = word.symbols.iter().flatten().find(|&&v| !code.field().contains(v)) {
        return Err(DecodeError::BadSymbol(v as i64));
    }
    Ok(())
}

fn local_j1(code: &BcCode, word: &ReceivedWord) -> Vec<usize> {
    let rho = code.params().rho;
    (1..=code.params().mu)
        .filter(|&i| {
            let e = word.count_in(code.sets().a(i));
            e > 0 && e <= rho
        })
        .collect()
}

/// Decodes local code `i` from `word`; returns the filled `(position, value)` pairs.
fn local_recover(code: &BcCode, word: &ReceivedWord, i: usize) -> Result<Vec<(usize, u64)>, DecodeError> {
    let a = code.sets().a(i);
    let decoded = code.local_spec(i).erasure_decode(&word.restrict(a))?;
    Ok(a
        .iter()
        .zip(decoded)
        .filter(|(&p, _)| word.is_erased(p))
        .filter_map(|(&p, v)| v.map(|v| (p, v)))
        .collect())
}

fn next_code(code: &BcCode, i: usize) -> usize {
    i % code.params().mu + 1
}

fn prev_code(code: &BcCode, i: usize) -> usize {
    (i + code.params().mu - 2) % code.params().mu + 1
}

fn union_positions(code: &BcCode, i1: usize, i2: usize) -> Vec<usize> {
    let mut v: Vec<usize> = code.sets().a(i1).iter().chain(code.sets().a(i2)).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Phase 1: iterated local decoding. Returns the new word, the number of
/// iterations and the per-round tasks.
pub fn phase1_local(code: &BcCode, word: &ReceivedWord) -> Result<(ReceivedWord, usize, Vec<Round>), DecodeError> {
    check_input(code, word)?;
    let mut current = word.clone();
    let mut rounds = Vec::new();
    loop {
        let j1 = local_j1(code, &current);
        if j1.is_empty() {
            break;
        }
        let mut next = current.clone();
        let mut claimed = vec![false; code.n()];
        let mut tasks = Vec::with_capacity(j1.len());
        for &i in &j1 {
            let recovered = local_recover(code, &current, i)?;
            let mut writes = Vec::new();
            for (p, v) in recovered {
                if !claimed[p] {
                    claimed[p] = true;
                    next.symbols[p] = Some(v);
                    writes.push(p);
                }
            }
            let reads = code.sets().a(i).iter().copied().filter(|&p| !current.is_erased(p)).collect();
            tasks.push(Task { kind: TaskKind::Local { code: i }, reads, writes });
        }
        rounds.push(Round { phase: 1, tasks });
        current = next;
    }
    let n_rounds = rounds.len();
    Ok((current, n_rounds, rounds))
}

/// Pair selection after phase 1. Returns the pairs and whether some erased
/// local code is left uncovered.
pub fn compute_j2(code: &BcCode, word: &ReceivedWord) -> Result<(Vec<(usize, usize)>, bool), DecodeError> {
    check_input(code, word)?;
    let p = code.params();
    let total = word.n_erasures();
    if total == 0 {
        return Ok((Vec::new(), false));
    }
    let two_rho = 2 * p.rho;
    let mut j2 = Vec::new();
    if p.mu == 2 {
        if total <= two_rho {
            j2.push((1, 2));
        }
        return Ok((j2.clone(), j2.is_empty()));
    }
    let sets = code.sets();
    for i in 1..=p.mu {
        let i2 = next_code(code, i);
        let e = word.count_in(&union_positions(code, i, i2));
        if e == 0 || e > two_rho {
            continue;
        }
        if word.count_in(&sets.intersection(prev_code(code, i), i)) != 0 {
            continue;
        }
        if word.count_in(&sets.intersection(i2, next_code(code, i2))) != 0 {
            continue;
        }
        j2.push((i, i2));
    }
    let covered = |i: usize| j2.iter().any(|&(a, b)| a == i || b == i);
    let flagged = (1..=p.mu).any(|i| word.count_in(sets.a(i)) > 0 && !covered(i));
    Ok((j2, flagged))
}

/// Recovers the erasures in `A_{i1} ∪ A_{i2}` for consecutive local codes.
/// Returns the filled `(position, value)` pairs.
pub fn pair_recover(code: &BcCode, word: &ReceivedWord, i1: usize, i2: usize) -> Result<Vec<(usize, u64)>, DecodeError> {
    check_input(code, word)?;
    let p = code.params();
    if i1 == 0 || i1 > p.mu || i2 != next_code(code, i1) {
        return Err(DecodeError::NotConsecutive(i1, i2));
    }
    let union = union_positions(code, i1, i2);
    if word.count_in(&union) == 0 {
        return Ok(Vec::new());
    }
    let f = code.field();
    let sets = code.sets();
    let n = code.n();
    let half = 2 * (p.rho + p.omega);
    let locators = &code.locators()[..half];
    let not_decodable = DecodeError::PairNotDecodable(i1, i2);

    // difference polynomial s = m1 - m2, identically zero when the two codes cover everything
    let s_at: Vec<u64> = if p.mu == 2 {
        vec![0; half]
    } else {
        let mut s_hat: Vec<Option<u64>> = Vec::with_capacity(p.local_len());
        for &j in sets.b(i1, 1) {
            let other = (j + half) % n;
            s_hat.push(match (word.get(j), word.get(other)) {
                (Some(a), Some(b)) => Some(f.sub(a, b)),
                _ => None,
            });
        }
        s_hat.extend(std::iter::repeat_n(None, p.rho));
        s_hat.extend(std::iter::repeat_n(Some(0), p.omega));
        let local = code.local_spec(i1);
        let decoded = local.erasure_decode(&s_hat)?;
        let s_word: Option<Vec<u64>> = decoded.into_iter().collect();
        let s_poly = local.to_poly(&s_word.ok_or(not_decodable.clone())?)?;
        s_poly.eval_many(locators)
    };

    let aux = aux_spec(code)?;
    let build = |main: usize, extra: usize, sign_plus: bool| -> Result<Vec<u64>, DecodeError> {
        let mut u: Vec<Option<u64>> = vec![None; half];
        for &j in sets.a(main) {
            u[j % half] = word.get(j);
        }
        for &j in sets.b(extra, 0) {
            let idx = j % half;
            u[idx] = word.get(j).map(|v| if sign_plus { f.add(v, s_at[idx]) } else { f.sub(v, s_at[idx]) });
        }
        let decoded: Option<Vec<u64>> = aux.erasure_decode(&u)?.into_iter().collect();
        decoded.ok_or(not_decodable.clone())
    };
    let u1 = build(i1, i2, true)?;
    let u2 = build(i2, i1, false)?;

    let mut out = Vec::new();
    let mut seen = vec![false; n];
    for (main, u) in [(i1, &u1), (i2, &u2)] {
        for &j in sets.a(main) {
            if word.is_erased(j) && !seen[j] {
                seen[j] = true;
                out.push((j, u[j % half]));
            }
        }
    }
    Ok(out)
}

/// Applies [`pair_recover`] and returns the updated word.
pub fn pair_decode(code: &BcCode, word: &ReceivedWord, pair: (usize, usize)) -> Result<ReceivedWord, DecodeError> {
    let mut out = word.clone();
    for (p, v) in pair_recover(code, word, pair.0, pair.1)? {
        out.symbols[p] = Some(v);
    }
    Ok(out)
}

/// Full decoder: phase 1, pair selection, phase 2.
pub fn decode(code: &BcCode, word: &ReceivedWord) -> Result<DecodeOutcome, DecodeError> {
    let (mut current, n_rounds, mut rounds) = phase1_local(code, word)?;
    let (j2, flagged) = compute_j2(code, &current)?;
    if !j2.is_empty() {
        let snapshot = current.clone();
        let mut claimed = vec![false; code.n()];
        let mut tasks = Vec::with_capacity(j2.len());
        for &(i1, i2) in &j2 {
            let mut writes = Vec::new();
            for (p, v) in pair_recover(code, &snapshot, i1, i2)? {
                if !claimed[p] {
                    claimed[p] = true;
                    current.symbols[p] = Some(v);
                    writes.push(p);
                }
            }
            let reads = union_positions(code, i1, i2).into_iter().filter(|&p| !snapshot.is_erased(p)).collect();
            tasks.push(Task { kind: TaskKind::Pair { first: i1, second: i2 }, reads, writes });
        }
        rounds.push(Round { phase: 2, tasks });
    }
    let status =
        if current.n_erasures() == 0 { DecodeStatus::FullyRecovered } else { DecodeStatus::UncorrectableRemainder };
    Ok(DecodeOutcome {
        word: current,
        status,
        rounds: n_rounds,
        pairs_used: j2,
        flagged_uncorrectable: flagged,
        plan: DecodePlan { rounds },
    })
}

/// The round-indexed schedule that [`decode`] follows on this word.
pub fn distributed_plan(code: &BcCode, word: &ReceivedWord) -> Result<DecodePlan, DecodeError> {
    Ok(decode(code, word)?.plan)
}

/// Runs a plan round by round, executing the tasks of each round in parallel
/// against that round's snapshot. Each task only writes its declared positions.
pub fn execute_plan(code: &BcCode, word: &ReceivedWord, plan: &DecodePlan) -> Result<ReceivedWord, DecodeError> {
    check_input(code, word)?;
    let mut current = word.clone();
    for round in &plan.rounds {
        let results: Vec<Vec<(usize, u64)>> = round
            .tasks
            .par_iter()
            .map(|task| {
                let recovered = match task.kind {
                    TaskKind::Local { code: i } => local_recover(code, &current, i)?,
                    TaskKind::Pair { first, second } => pair_recover(code, &current, first, second)?,
                };
                Ok(recovered.into_iter().filter(|(p, _)| task.writes.contains(p)).collect())
            })
            .collect::<Result<_, DecodeError>>()?;
        for (p, v) in results.into_iter().flatten() {
            current.symbols[p] = Some(v);
        }
    }
    Ok(current)
}
