//! Analytic model of data availability sampling.
//!
//! A block is encoded with an `[n, k, d]` code and an adversary hides exactly
//! `d` chunks. Each of `c` light nodes samples `s` distinct chunks uniformly.
//!
//! * `p1(s)`: probability that one node hits a hidden chunk.
//! * `p_c(c₀, s) = Pr(Y > c₀)`, where `Y ~ Bin(c, p1)` counts rejecting nodes.
//! * `ĉ = max{c₀ : p_c(c₀, s) ≥ γ}`.
//! * `q_c(s) = Pr(Z ≥ n−d+1)`, where `Z` counts distinct chunks sampled by the
//!   `c` nodes when no chunk is hidden.
//! * `c̃ = min{c₀ : q_{c₀}(s) ≥ η}`.
//! * `s_min`: least `s` with `ĉ ≥ ĉ_T` and `c̃ ≤ c̃_T`.
//!
//! `q_c` is an alternating inclusion-exclusion sum whose terms exceed the
//! result by hundreds of orders of magnitude for small `c`, so it is evaluated
//! in binary floating point at a working precision derived from the largest
//! term. Binomial coefficients are exact big integers.

use std::str::FromStr;

use dashu_base::EstimatedLog2;
use dashu_float::{DBig, FBig};
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bc_code::designed_distance;
use crate::field::Field;
use crate::product_rs::ProductSpec;
use crate::topology::TopologyParams;

/// Binary floating point, rounding toward zero.
pub type Float = FBig;

pub const DEFAULT_DIGITS: usize = 120;
pub const MIN_DIGITS: usize = 50;
/// Absolute accuracy demanded from `q_c`, in decimal digits.
pub const DEFAULT_TOLERANCE_DIGITS: usize = 40;
pub const PRECISION_ENV: &str = "BC_PRECISION_DIGITS";

const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DasError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("sample count s={s} outside 0..={max}")]
    SampleOutOfRange { s: usize, max: usize },
    #[error("estimated cancellation error exceeds tolerance; at least {required_digits} digits are needed")]
    PrecisionLoss { required_digits: usize },
    #[error("precision must be at least {MIN_DIGITS} digits (got {0})")]
    PrecisionTooLow(usize),
    #[error("cannot parse {0} from {1:?}")]
    Env(&'static str, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMode {
    #[default]
    HighPrecisionFloat,
    ExactRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub digits: usize,
    pub mode: NumericMode,
    pub tolerance_digits: usize,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { digits: DEFAULT_DIGITS, mode: NumericMode::HighPrecisionFloat, tolerance_digits: DEFAULT_TOLERANCE_DIGITS }
    }
}

impl PrecisionConfig {
    pub fn with_digits(digits: usize) -> Result<Self, DasError> {
        if digits < MIN_DIGITS {
            return Err(DasError::PrecisionTooLow(digits));
        }
        Ok(PrecisionConfig { digits, ..Default::default() })
    }

    pub fn exact() -> Self {
        PrecisionConfig { mode: NumericMode::ExactRational, ..Default::default() }
    }

    /// Default configuration, with the digit count taken from `BC_PRECISION_DIGITS` when set.
    pub fn from_env() -> Result<Self, DasError> {
        match std::env::var(PRECISION_ENV) {
            Ok(v) => {
                let digits = v.trim().parse().map_err(|_| DasError::Env(PRECISION_ENV, v.clone()))?;
                PrecisionConfig::with_digits(digits)
            }
            Err(_) => Ok(PrecisionConfig::default()),
        }
    }

    pub fn bits(&self) -> usize {
        digits_to_bits(self.digits)
    }
}

fn digits_to_bits(digits: usize) -> usize {
    (digits as f64 * LOG2_10).ceil() as usize
}

fn bits_to_digits(bits: usize) -> usize {
    (bits as f64 / LOG2_10).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DasParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub c: usize,
    pub s: usize,
    pub gamma: f64,
    pub eta: f64,
    pub chat_target: usize,
    pub ctilde_target: usize,
}

impl DasParams {
    /// The operating point used throughout: `c = 1000`, `γ = η = 0.99`,
    /// targets `(900, 100)`.
    pub fn standard(n: usize, k: usize, d: usize) -> Self {
        DasParams { n, k, d, c: 1000, s: 1, gamma: 0.99, eta: 0.99, chat_target: 900, ctilde_target: 100 }
    }

    pub fn with_s(self, s: usize) -> Self {
        DasParams { s, ..self }
    }

    pub fn with_c(self, c: usize) -> Self {
        DasParams { c, ..self }
    }

    pub fn validate(&self) -> Result<(), DasError> {
        let bad = |m: &str| Err(DasError::InvalidParams(m.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.d == 0 || self.d > self.n {
            return bad("d must be in 1..=n");
        }
        if self.k == 0 || self.k > self.n {
            return bad("k must be in 1..=n");
        }
        if self.c == 0 {
            return bad("c must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) || !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("gamma and eta must lie strictly between 0 and 1");
        }
        if self.s > self.n {
            return Err(DasError::SampleOutOfRange { s: self.s, max: self.n });
        }
        Ok(())
    }

    /// Largest `s` for which `q_c` is defined: `n − d`.
    pub fn max_s(&self) -> usize {
        self.n - self.d
    }
}

pub fn binomial(n: usize, k: usize) -> UBig {
    if k > n {
        return UBig::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = UBig::ONE;
    for i in 0..k {
        acc = acc * UBig::from(n - i) / UBig::from(i + 1);
    }
    acc
}

fn float_of(x: &UBig, bits: usize) -> Float {
    Float::from(x.clone()).with_precision(bits).value()
}

fn float_ratio(num: &UBig, den: &UBig, bits: usize) -> Float {
    float_of(num, bits) / float_of(den, bits)
}

fn rational_to_float(r: &RBig, bits: usize) -> Float {
    let num = Float::from(r.numerator().clone()).with_precision(bits).value();
    num / float_of(r.denominator(), bits)
}

/// Exact conversion of a decimal threshold such as `0.99`, rounded to `bits`.
pub fn threshold(x: f64, bits: usize) -> Float {
    let dec = DBig::from_str(&format!("{x}")).expect("finite decimal");
    dec.with_base_and_precision::<2>(bits).value().with_rounding()
}

pub fn to_f64(x: &Float) -> f64 {
    x.to_f64().value()
}

/// `C(n−d, s) / C(n, s)`: probability that `s` distinct samples avoid all `d` hidden chunks.
fn miss_all_exact(n: usize, d: usize, s: usize) -> RBig {
    RBig::from_parts(IBig::from(binomial(n - d, s)), binomial(n, s))
}

fn check_s(params: &DasParams) -> Result<(), DasError> {
    params.validate()
}

/// `p1(s) = 1 − ∏_{i<s} (1 − d/(n−i))`.
pub fn p1(params: &DasParams, cfg: &PrecisionConfig) -> Result<Float, DasError> {
    check_s(params)?;
    Ok(rational_to_float(&p1_exact(params)?, cfg.bits()))
}

pub fn p1_exact(params: &DasParams) -> Result<RBig, DasError> {
    check_s(params)?;
    Ok(RBig::ONE - miss_all_exact(params.n, params.d, params.s))
}

/// `Pr(Y > c₀)` for every `c₀ ∈ 0..=c`, with `Y ~ Bin(c, p1)`.
fn tail_float(params: &DasParams, bits: usize) -> Vec<Float> {
    let c = params.c;
    let miss = miss_all_exact(params.n, params.d, params.s);
    let hit = RBig::ONE - &miss;
    let mut pmf = vec![Float::ZERO; c + 1];
    if miss == RBig::ZERO {
        pmf[c] = Float::ONE;
    } else if hit == RBig::ZERO {
        pmf[0] = Float::ONE;
    } else {
        let qf = rational_to_float(&miss, bits);
        let ratio = rational_to_float(&(hit / miss), bits);
        pmf[0] = qf.powi(IBig::from(c));
        for j in 0..c {
            pmf[j + 1] = &pmf[j] * &ratio * Float::from(c - j) / Float::from(j + 1);
        }
    }
    let mut tail = vec![Float::ZERO; c + 1];
    for c0 in (0..c).rev() {
        tail[c0] = &tail[c0 + 1] + &pmf[c0 + 1];
    }
    tail
}

fn tail_exact(params: &DasParams) -> Vec<RBig> {
    let c = params.c;
    let miss = miss_all_exact(params.n, params.d, params.s);
    let hit = RBig::ONE - &miss;
    let pmf: Vec<RBig> = (0..=c)
        .map(|j| RBig::from(binomial(c, j)) * hit.pow(j as isize) * miss.pow((c - j) as isize))
        .collect();
    let mut tail = vec![RBig::ZERO; c + 1];
    for c0 in (0..c).rev() {
        tail[c0] = &tail[c0 + 1] + &pmf[c0 + 1];
    }
    tail
}

/// `p_c(c₀, s) = Pr(Y > c₀)`.
pub fn p_c(c0: usize, params: &DasParams, cfg: &PrecisionConfig) -> Result<Float, DasError> {
    check_s(params)?;
    if c0 > params.c {
        return Err(DasError::InvalidParams(format!("c0={c0} exceeds c={}", params.c)));
    }
    Ok(match cfg.mode {
        NumericMode::HighPrecisionFloat => tail_float(params, cfg.bits()).swap_remove(c0),
        NumericMode::ExactRational => rational_to_float(&tail_exact(params)[c0], cfg.bits()),
    })
}

/// `ĉ(c, s, γ)`, or `None` when `p_c(1, s) < γ`.
pub fn c_hat(params: &DasParams, cfg: &PrecisionConfig) -> Result<Option<usize>, DasError> {
    check_s(params)?;
    let bits = cfg.bits();
    let gamma = threshold(params.gamma, bits);
    let tail: Vec<Float> = match cfg.mode {
        NumericMode::HighPrecisionFloat => tail_float(params, bits),
        NumericMode::ExactRational => tail_exact(params).iter().map(|r| rational_to_float(r, bits)).collect(),
    };
    // tail is nonincreasing in c0
    Ok((1..=params.c).take_while(|&c0| tail[c0] >= gamma).last())
}

/// Rounding residue of order `10^-tolerance` can push a probability just outside `[0, 1]`.
fn clamp_unit(x: Float) -> Float {
    if x < Float::ZERO {
        Float::ZERO
    } else if x > Float::ONE {
        Float::ONE
    } else {
        x
    }
}

/// Which sign convention to apply to the inclusion-exclusion sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QSign {
    /// `1 + Σ (−1)^i T_i`: the probability `Pr(Z ≥ n−d+1)`.
    Correct,
    /// `1 − Σ (−1)^i T_i`, which evaluates to `2 − Pr(Z ≥ n−d+1)`.
    AsPrinted,
}

/// Terms `T_i = C(d+i−2, d−1) · C(n, d+i−1) · [C(n−d+1−i, s) / C(n, s)]^c`
/// for `i = 1..=n−d+1−s`, kept as exact integers plus log2 estimates.
struct QTerms {
    a: Vec<UBig>,
    num: Vec<UBig>,
    den: UBig,
    log2_a: Vec<f64>,
    log2_r: Vec<f64>,
}

impl QTerms {
    fn new(n: usize, d: usize, s: usize) -> QTerms {
        let m = n - d + 1 - s;
        let den = binomial(n, s);
        let log2_den = den.log2_est() as f64;
        let mut a = Vec::with_capacity(m);
        let mut num = Vec::with_capacity(m);
        let mut choose_prefix = UBig::ONE; // C(d+i−2, d−1), starting at i = 1
        let mut choose_n = binomial(n, d); // C(n, d+i−1)
        let mut choose_rest = binomial(n - d, s); // C(n−d+1−i, s)
        for i in 1..=m {
            a.push(&choose_prefix * &choose_n);
            num.push(choose_rest.clone());
            // advance to i + 1
            choose_prefix = choose_prefix * UBig::from(d - 1 + i) / UBig::from(i);
            let top = d + i - 1;
            choose_n = choose_n * UBig::from(n - top) / UBig::from(top + 1);
            let rest_top = n - d + 1 - i;
            if rest_top > s {
                choose_rest = choose_rest * UBig::from(rest_top - s) / UBig::from(rest_top);
            } else {
                choose_rest = UBig::ZERO;
            }
        }
        let log2_a = a.iter().map(|x| x.log2_est() as f64).collect();
        let log2_r = num.iter().map(|x| x.log2_est() as f64 - log2_den).collect();
        QTerms { a, num, den, log2_a, log2_r }
    }

    fn len(&self) -> usize {
        self.a.len()
    }

    fn log2_term(&self, i: usize, c: usize) -> f64 {
        self.log2_a[i] + c as f64 * self.log2_r[i]
    }

    /// Terms below this log2 magnitude together change the sum by far less than the tolerance.
    fn negligible_below(&self, tolerance_digits: usize) -> f64 {
        -(tolerance_digits as f64 * LOG2_10) - (self.len().max(1) as f64).log2() - 20.0
    }

    /// Working precision (bits) that keeps the absolute error of the sum
    /// below `10^-tolerance_digits` for exponent `c` and `ops` roundings per term.
    fn required_bits(&self, c: usize, ops: usize, tolerance_digits: usize) -> usize {
        let max_log = (0..self.len()).map(|i| self.log2_term(i, c)).fold(0.0f64, f64::max);
        let sum_log = max_log + (self.len().max(1) as f64).log2();
        let error_factor = ((ops + self.len() + 16) as f64).log2();
        (sum_log + error_factor + tolerance_digits as f64 * LOG2_10 + 16.0).ceil() as usize
    }

    fn sum_float(&self, c: usize, bits: usize, sign: QSign, tolerance_digits: usize) -> Float {
        let skip = self.negligible_below(tolerance_digits);
        let exp = IBig::from(c);
        let mut sum = Float::ZERO.with_precision(bits).value();
        for i in 0..self.len() {
            if self.log2_term(i, c) < skip {
                continue;
            }
            let r = float_ratio(&self.num[i], &self.den, bits);
            let t = float_of(&self.a[i], bits) * r.powi(exp.clone());
            // (−1)^i with i counted from 1
            if i % 2 == 0 {
                sum -= t;
            } else {
                sum += t;
            }
        }
        match sign {
            QSign::Correct => clamp_unit(Float::ONE + sum),
            QSign::AsPrinted => Float::ONE - sum,
        }
    }

    fn sum_exact(&self, c: usize, sign: QSign) -> RBig {
        let mut sum = RBig::ZERO;
        for i in 0..self.len() {
            let r = RBig::from_parts(IBig::from(self.num[i].clone()), self.den.clone());
            let t = RBig::from(self.a[i].clone()) * r.pow(c as isize);
            if i % 2 == 0 {
                sum -= t;
            } else {
                sum += t;
            }
        }
        match sign {
            QSign::Correct => RBig::ONE + sum,
            QSign::AsPrinted => RBig::ONE - sum,
        }
    }
}

fn q_terms(params: &DasParams) -> Result<QTerms, DasError> {
    params.validate()?;
    if params.s > params.max_s() {
        return Err(DasError::SampleOutOfRange { s: params.s, max: params.max_s() });
    }
    Ok(QTerms::new(params.n, params.d, params.s))
}

fn pow_ops(c: usize) -> usize {
    2 * (usize::BITS - c.leading_zeros()) as usize + 4
}

fn q_eval(params: &DasParams, cfg: &PrecisionConfig, sign: QSign, adaptive: bool) -> Result<Float, DasError> {
    let terms = q_terms(params)?;
    match cfg.mode {
        NumericMode::ExactRational => Ok(rational_to_float(&terms.sum_exact(params.c, sign), cfg.bits())),
        NumericMode::HighPrecisionFloat => {
            let required = terms.required_bits(params.c, pow_ops(params.c), cfg.tolerance_digits);
            let bits = if adaptive {
                required.max(cfg.bits())
            } else if required > cfg.bits() {
                return Err(DasError::PrecisionLoss { required_digits: bits_to_digits(required) });
            } else {
                cfg.bits()
            };
            Ok(terms.sum_float(params.c, bits, sign, cfg.tolerance_digits))
        }
    }
}

/// `q_c(s) = Pr(Z ≥ n−d+1)` at the configured precision. Fails with
/// [`DasError::PrecisionLoss`] when cancellation would exceed the tolerance.
pub fn q_c(params: &DasParams, cfg: &PrecisionConfig) -> Result<Float, DasError> {
    q_eval(params, cfg, QSign::Correct, false)
}

/// As [`q_c`], raising the working precision as far as the terms require.
pub fn q_c_adaptive(params: &DasParams, cfg: &PrecisionConfig) -> Result<Float, DasError> {
    q_eval(params, cfg, QSign::Correct, true)
}

/// The alternating sum with the opposite overall sign, `1 − Σ(−1)^i T_i`.
pub fn q_c_as_printed(params: &DasParams, cfg: &PrecisionConfig) -> Result<Float, DasError> {
    q_eval(params, cfg, QSign::AsPrinted, true)
}

pub fn q_c_exact(params: &DasParams) -> Result<RBig, DasError> {
    Ok(q_terms(params)?.sum_exact(params.c, QSign::Correct))
}

/// `q_{c₀}(s)` for `c₀ = 1..=c_max`, by multiplying running powers. Stops
/// early once a value reaches `stop_at`.
fn q_scan(params: &DasParams, cfg: &PrecisionConfig, c_max: usize, stop_at: Option<&Float>) -> Result<Vec<Float>, DasError> {
    let terms = q_terms(params)?;
    if cfg.mode == NumericMode::ExactRational {
        let mut out = Vec::new();
        for c0 in 1..=c_max {
            let v = rational_to_float(&terms.sum_exact(c0, QSign::Correct), cfg.bits());
            let done = stop_at.is_some_and(|t| v >= *t);
            out.push(v);
            if done {
                break;
            }
        }
        return Ok(out);
    }
    let bits = terms.required_bits(1, c_max + 4, cfg.tolerance_digits).max(cfg.bits());
    let skip = terms.negligible_below(cfg.tolerance_digits);
    let ratios: Vec<Float> = (0..terms.len()).map(|i| float_ratio(&terms.num[i], &terms.den, bits)).collect();
    let mut powers = ratios.clone();
    let mut active: Vec<usize> = (0..terms.len()).collect();
    let a: Vec<Float> = terms.a.iter().map(|x| float_of(x, bits)).collect();
    let mut out = Vec::with_capacity(c_max);
    for c0 in 1..=c_max {
        if c0 > 1 {
            for &i in &active {
                powers[i] = &powers[i] * &ratios[i];
            }
        }
        active.retain(|&i| terms.log2_term(i, c0) >= skip);
        let mut sum = Float::ZERO.with_precision(bits).value();
        for &i in &active {
            let t = &a[i] * &powers[i];
            if i % 2 == 0 {
                sum -= t;
            } else {
                sum += t;
            }
        }
        let v = clamp_unit(Float::ONE + sum);
        let done = stop_at.is_some_and(|t| v >= *t);
        out.push(v);
        if done {
            break;
        }
    }
    Ok(out)
}

/// `q_{c₀}(s)` for `c₀ = 1..=c` (the liveness curve at fixed `s`).
pub fn q_curve(params: &DasParams, cfg: &PrecisionConfig) -> Result<Vec<Float>, DasError> {
    q_scan(params, cfg, params.c, None)
}

/// `c̃(c, s, η)`, or `None` when `q_c(s) < η`.
pub fn c_tilde(params: &DasParams, cfg: &PrecisionConfig) -> Result<Option<usize>, DasError> {
    let eta = threshold(params.eta, cfg.bits());
    let scan = q_scan(params, cfg, params.c, Some(&eta))?;
    Ok(match scan.last() {
        Some(v) if *v >= eta => Some(scan.len()),
        _ => None,
    })
}

/// Least `s ≤ n−d` meeting both targets, or `None`.
///
/// Since `q_{c₀}` grows with `c₀`, `c̃ ≤ c̃_T` is equivalent to `q_{c̃_T}(s) ≥ η`,
/// so each candidate `s` needs one `q` evaluation once `ĉ` passes.
pub fn s_min(params: &DasParams, cfg: &PrecisionConfig) -> Result<Option<usize>, DasError> {
    params.validate()?;
    let eta = threshold(params.eta, cfg.bits());
    let probe_c = params.ctilde_target.min(params.c);
    if probe_c == 0 {
        return Ok(None);
    }
    for s in 1..=params.max_s() {
        let at_s = params.with_s(s);
        let Some(chat) = c_hat(&at_s, cfg)? else { continue };
        if chat < params.chat_target {
            continue;
        }
        if q_c_adaptive(&at_s.with_c(probe_c), cfg)? >= eta {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Summary of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DasReport {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub c: usize,
    pub gamma: f64,
    pub eta: f64,
    pub chat_target: usize,
    pub ctilde_target: usize,
    pub s_min: Option<usize>,
    pub p1_at_s_min: Option<f64>,
    pub chat_at_s_min: Option<usize>,
    pub ctilde_at_s_min: Option<usize>,
    pub precision_digits: usize,
}

pub fn report(params: &DasParams, cfg: &PrecisionConfig) -> Result<DasReport, DasError> {
    let s = s_min(params, cfg)?;
    let (p1v, chat, ctilde) = match s {
        Some(s) => {
            let at = params.with_s(s);
            (Some(to_f64(&p1(&at, cfg)?)), c_hat(&at, cfg)?, c_tilde(&at, cfg)?)
        }
        None => (None, None, None),
    };
    Ok(DasReport {
        n: params.n,
        k: params.k,
        d: params.d,
        c: params.c,
        gamma: params.gamma,
        eta: params.eta,
        chat_target: params.chat_target,
        ctilde_target: params.ctilde_target,
        s_min: s,
        p1_at_s_min: p1v,
        chat_at_s_min: chat,
        ctilde_at_s_min: ctilde,
        precision_digits: cfg.digits,
    })
}

/// `(s, p1(s))` for `s = 0..=s_max`.
pub fn p1_curve(params: &DasParams, cfg: &PrecisionConfig, s_max: usize) -> Result<Vec<(usize, f64)>, DasError> {
    (0..=s_max.min(params.n)).map(|s| Ok((s, to_f64(&p1(&params.with_s(s), cfg)?)))).collect()
}

/// `(c', ĉ(c', s, γ))` for `c' = 1..=c` at the given `s`.
pub fn chat_curve(params: &DasParams, cfg: &PrecisionConfig) -> Result<Vec<(usize, Option<usize>)>, DasError> {
    (1..=params.c).map(|c| Ok((c, c_hat(&params.with_c(c), cfg)?))).collect()
}

pub fn p1_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("s,p1\n");
    for (s, p) in rows {
        out.push_str(&format!("{s},{p:.17e}\n"));
    }
    out
}

pub fn chat_csv(rows: &[(usize, Option<usize>)]) -> String {
    let mut out = String::from("c,chat\n");
    for (c, v) in rows {
        match v {
            Some(v) => out.push_str(&format!("{c},{v}\n")),
            None => out.push_str(&format!("{c},NA\n")),
        }
    }
    out
}

pub fn qc_csv(values: &[Float]) -> String {
    let mut out = String::from("c,qc\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{:.17e}\n", i + 1, to_f64(v)));
    }
    out
}

/// A code as seen by the protocol comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CodeDescriptor {
    /// Square product of an `[n0, k0]` RS code.
    #[serde(rename = "2drs")]
    Product {
        n0: usize,
        k0: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    /// `C_BC[μ,λ,ω,ρ]`, optionally shortened by `shorten` symbols.
    Bc {
        mu: usize,
        lambda: usize,
        omega: usize,
        rho: usize,
        #[serde(default)]
        shorten: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        field: Option<Field>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSummary {
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub n0: usize,
    pub k0: usize,
    pub d0: usize,
    /// Number of local codes.
    pub local_codes: usize,
}

impl CodeDescriptor {
    pub fn name(&self) -> String {
        match self {
            CodeDescriptor::Product { name: Some(n), .. } | CodeDescriptor::Bc { name: Some(n), .. } => n.clone(),
            CodeDescriptor::Product { k0, .. } => format!("2DRS[{k0}]"),
            CodeDescriptor::Bc { mu, lambda, omega, rho, shorten: 0, .. } => format!("BC[{mu},{lambda},{omega},{rho}]"),
            CodeDescriptor::Bc { mu, lambda, omega, rho, shorten, .. } => {
                format!("BC^({shorten})[{mu},{lambda},{omega},{rho}]")
            }
        }
    }

    pub fn summary(&self) -> Result<CodeSummary, DasError> {
        match *self {
            CodeDescriptor::Product { n0, k0, .. } => {
                if k0 == 0 || k0 > n0 {
                    return Err(DasError::InvalidParams(format!("2DRS needs 1 <= k0 <= n0 (got {n0},{k0})")));
                }
                let p = ProductSpec::params_for(n0, k0);
                Ok(CodeSummary { n: p.n, k: p.k, d: Some(p.d), n0, k0, d0: n0 - k0 + 1, local_codes: 2 * n0 })
            }
            CodeDescriptor::Bc { mu, lambda, omega, rho, shorten, field, .. } => {
                let params = TopologyParams::new(mu, lambda, omega, rho)
                    .map_err(|e| DasError::InvalidParams(e.to_string()))?;
                if shorten >= params.k() {
                    return Err(DasError::InvalidParams(format!("cannot shorten by {shorten}")));
                }
                let field = field.unwrap_or_else(|| crate::bc_code::default_field(&params));
                Ok(CodeSummary {
                    n: params.n(),
                    k: params.k() - shorten,
                    d: designed_distance(&params, field),
                    n0: params.local_len(),
                    k0: lambda * omega,
                    d0: rho + 1,
                    local_codes: mu,
                })
            }
        }
    }
}

/// One row of the protocol comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub n0: usize,
    pub k0: usize,
    pub d0: usize,
    pub overhead: f64,
    pub relative_distance: Option<f64>,
    pub s_min: Option<usize>,
    pub digests: usize,
    pub merkle_header: usize,
    pub cfp_size: usize,
    pub kzg_header: usize,
    /// Whether `kzg_header` reflects the homomorphic digest reduction.
    pub kzg_reduced: bool,
    pub chunks_per_node: usize,
}

/// Header size for the KZG protocol variant on the `[38,32]` 2D RS code,
/// where digests of 64 row and column codewords suffice to derive the rest.
pub const KZG_2DRS_38_32_HEADER: usize = 65;

/// Counting metrics for a code with `local_codes` local codes of dimension `k0`.
pub fn protocol_metrics(desc: &CodeDescriptor, s_min: Option<usize>) -> Result<MetricsRow, DasError> {
    let sum = desc.summary()?;
    let digests = sum.local_codes + 1;
    let (kzg_header, kzg_reduced) = match desc {
        CodeDescriptor::Product { n0: 38, k0: 32, .. } => (KZG_2DRS_38_32_HEADER, true),
        _ => (digests, false),
    };
    Ok(MetricsRow {
        name: desc.name(),
        n: sum.n,
        k: sum.k,
        d: sum.d,
        n0: sum.n0,
        k0: sum.k0,
        d0: sum.d0,
        overhead: sum.n as f64 / sum.k as f64,
        relative_distance: sum.d.map(|d| d as f64 / sum.n as f64),
        s_min,
        digests,
        merkle_header: digests,
        cfp_size: sum.k0,
        kzg_header,
        kzg_reduced,
        chunks_per_node: sum.k0,
    })
}

/// Metrics for every code, with `s_min` computed at the standard operating point
/// (or the one given).
pub fn compare(descs: &[CodeDescriptor], point: Option<&DasParams>, cfg: &PrecisionConfig) -> Result<Vec<MetricsRow>, DasError> {
    descs
        .iter()
        .map(|desc| {
            let sum = desc.summary()?;
            let s = match sum.d {
                Some(d) => {
                    let base = DasParams::standard(sum.n, sum.k, d);
                    let p = match point {
                        Some(pt) => DasParams { n: sum.n, k: sum.k, d, ..*pt },
                        None => base,
                    };
                    s_min(&p, cfg)?
                }
                None => None,
            };
            protocol_metrics(desc, s)
        })
        .collect()
}

pub fn format_overhead(row: &MetricsRow) -> String {
    format!("{:.1}x", row.overhead)
}

pub fn format_percent(x: Option<f64>) -> String {
    x.map_or("NA".to_string(), |x| format!("{:.2}%", 100.0 * x))
}

/// Plain-text table with the parameter and protocol columns.
pub fn format_table(rows: &[MetricsRow]) -> String {
    let opt = |x: Option<usize>| x.map_or("NA".to_string(), |v| v.to_string());
    let mut out = String::from("code\t[n,k,d]\t[n0,k0,d0]\tn/k\td/n\ts_min\tdigests\tmerkle_header\tcfp\tkzg_header\tchunks/node\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t[{},{},{}]\t[{},{},{}]\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.name,
            r.n,
            r.k,
            opt(r.d),
            r.n0,
            r.k0,
            r.d0,
            format_overhead(r),
            format_percent(r.relative_distance),
            opt(r.s_min),
            r.digests,
            r.merkle_header,
            r.cfp_size,
            r.kzg_header,
            r.chunks_per_node
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::default()
    }

    fn small(n: usize, d: usize, s: usize, c: usize) -> DasParams {
        DasParams { n, k: 1, d, c, s, gamma: 0.5, eta: 0.5, chat_target: 1, ctilde_target: c }
    }

    /// Exhaustive `Pr(Z ≥ n−d+1)` over all `C(n,s)^c` joint samples.
    fn brute_q(n: usize, d: usize, s: usize, c: usize) -> f64 {
        let subsets: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() as usize == s).collect();
        let total = subsets.len().pow(c as u32);
        let mut good = 0usize;
        let mut idx = vec![0usize; c];
        for _ in 0..total {
            let union = idx.iter().fold(0u32, |acc, &i| acc | subsets[i]);
            if union.count_ones() as usize > n - d {
                good += 1;
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < subsets.len() {
                    break;
                }
                *slot = 0;
            }
        }
        good as f64 / total as f64
    }

    #[test]
    fn p1_examples() {
        assert_eq!(to_f64(&p1(&small(10, 3, 0, 1), &cfg()).unwrap()), 0.0);
        assert_eq!(to_f64(&p1(&small(5, 5, 1, 1), &cfg()).unwrap()), 1.0);
        let v = to_f64(&p1(&small(10, 3, 2, 1), &cfg()).unwrap());
        assert!((v - (1.0 - 21.0 / 45.0)).abs() < 1e-15);
        // strictly increasing in s and in d
        let base = DasParams::standard(1444, 1024, 49);
        let mut last = -1.0;
        for s in 0..100 {
            let v = to_f64(&p1(&base.with_s(s), &cfg()).unwrap());
            assert!(v > last);
            last = v;
        }
        let a = to_f64(&p1(&DasParams::standard(1444, 1024, 49).with_s(10), &cfg()).unwrap());
        let b = to_f64(&p1(&DasParams::standard(1444, 1024, 50).with_s(10), &cfg()).unwrap());
        assert!(b > a);
    }

    #[test]
    fn p_c_examples() {
        let p = small(6, 6, 1, 5);
        for c0 in 0..5 {
            assert_eq!(to_f64(&p_c(c0, &p, &cfg()).unwrap()), 1.0);
        }
        assert_eq!(to_f64(&p_c(5, &p, &cfg()).unwrap()), 0.0);
        let p = small(10, 3, 2, 6);
        let f = p_c(2, &p, &cfg()).unwrap();
        let e = p_c(2, &p, &PrecisionConfig::exact()).unwrap();
        assert!((to_f64(&f) - to_f64(&e)).abs() < 1e-30);
    }

    #[test]
    fn q_matches_enumeration() {
        for (n, d, s, c) in [(8, 3, 2, 4), (6, 2, 2, 3), (7, 3, 3, 3)] {
            let p = small(n, d, s, c);
            let q = to_f64(&q_c(&p, &cfg()).unwrap());
            let brute = brute_q(n, d, s, c);
            assert!((q - brute).abs() < 1e-12, "{n},{d},{s},{c}: {q} vs {brute}");
            let printed = to_f64(&q_c_as_printed(&p, &cfg()).unwrap());
            assert!((printed - (2.0 - brute)).abs() < 1e-12);
            let exact = q_c_exact(&p).unwrap().to_f64().value();
            assert!((exact - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn q_is_monotone_in_c_and_bounded() {
        let p = small(30, 5, 4, 40);
        let curve = q_curve(&p, &cfg()).unwrap();
        let vals: Vec<f64> = curve.iter().map(to_f64).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-30);
        }
        assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)), "{vals:?}");
        for (i, v) in vals.iter().enumerate() {
            let direct = to_f64(&q_c_adaptive(&p.with_c(i + 1), &cfg()).unwrap());
            assert!((direct - v).abs() < 1e-25);
        }
    }

    #[test]
    fn precision_loss_is_reported() {
        let p = DasParams::standard(1444, 1024, 49).with_s(72).with_c(1);
        match q_c(&p, &cfg()) {
            Err(DasError::PrecisionLoss { required_digits }) => assert!(required_digits > 120),
            other => panic!("expected precision loss, got {other:?}"),
        }
        let v = to_f64(&q_c_adaptive(&p, &cfg()).unwrap());
        assert!(v.abs() < 1e-40, "{v}");
    }

    #[test]
    fn exact_and_float_agree() {
        for (n, d, s, c) in [(12, 4, 3, 5), (20, 6, 5, 8), (16, 5, 2, 10)] {
            let p = small(n, d, s, c);
            let exact = PrecisionConfig::exact();
            for c0 in 0..c {
                let a = to_f64(&p_c(c0, &p, &cfg()).unwrap());
                let b = to_f64(&p_c(c0, &p, &exact).unwrap());
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300));
            }
            let a = to_f64(&q_c(&p, &cfg()).unwrap());
            let b = to_f64(&q_c(&p, &exact).unwrap());
            assert!((a - b).abs() <= 1e-10 * b.abs());
        }
    }

    #[test]
    fn trivial_targets() {
        let p = DasParams { n: 10, k: 1, d: 9, c: 5, s: 1, gamma: 0.5, eta: 0.5, chat_target: 1, ctilde_target: 5 };
        assert_eq!(s_min(&p, &cfg()).unwrap(), Some(1));
    }

    #[test]
    fn chat_is_monotone_in_s() {
        let base = DasParams::standard(1416, 1024, 65);
        let mut last = 0;
        for s in (5..60).step_by(5) {
            let v = c_hat(&base.with_s(s), &cfg()).unwrap().unwrap_or(0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn metrics_rows() {
        let drs = CodeDescriptor::Product { n0: 38, k0: 32, name: None };
        let bc = CodeDescriptor::Bc { mu: 12, lambda: 2, omega: 86, rho: 32, shorten: 8, field: None, name: None };
        let r = protocol_metrics(&drs, Some(72)).unwrap();
        assert_eq!((r.n, r.k, r.d), (1444, 1024, Some(49)));
        assert_eq!((r.n0, r.k0, r.d0), (38, 32, 7));
        assert_eq!((r.digests, r.merkle_header, r.cfp_size, r.kzg_header, r.chunks_per_node), (77, 77, 32, 65, 32));
        assert_eq!(format_overhead(&r), "1.4x");
        assert_eq!(format_percent(r.relative_distance), "3.39%");
        let r = protocol_metrics(&bc, Some(53)).unwrap();
        assert_eq!((r.n, r.k, r.d), (1416, 1024, Some(65)));
        assert_eq!((r.n0, r.k0, r.d0), (204, 172, 33));
        assert_eq!((r.digests, r.merkle_header, r.cfp_size, r.kzg_header, r.chunks_per_node), (13, 13, 172, 13, 172));
        assert_eq!(format_overhead(&r), "1.4x");
        assert_eq!(format_percent(r.relative_distance), "4.59%");
        let tiny = CodeDescriptor::Bc { mu: 2, lambda: 2, omega: 1, rho: 1, shorten: 0, field: None, name: None };
        assert_eq!(protocol_metrics(&tiny, None).unwrap().digests, 3);
    }

    #[test]
    fn descriptor_json() {
        let json = r#"[{"family":"2drs","n0":38,"k0":32},{"family":"bc","mu":12,"lambda":2,"omega":86,"rho":32,"shorten":8}]"#;
        let descs: Vec<CodeDescriptor> = serde_json::from_str(json).unwrap();
        assert_eq!(descs[0].name(), "2DRS[32]");
        assert_eq!(descs[1].name(), "BC^(8)[12,2,86,32]");
    }

    #[test]
    fn threshold_is_exact_decimal() {
        let t = threshold(0.99, 400);
        let below = Float::from(99).with_precision(400).value() / Float::from(100).with_precision(400).value();
        assert!((to_f64(&(t - below))).abs() < 1e-100);
    }

    #[test]
    fn csv_headers() {
        assert!(p1_csv(&[(0, 0.0)]).starts_with("s,p1\n"));
        assert!(chat_csv(&[(1, None)]).starts_with("c,chat\n1,NA"));
        assert!(qc_csv(&[Float::ONE]).starts_with("c,qc\n1,"));
    }
}
