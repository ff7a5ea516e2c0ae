//! Exact dyadic numbers, distance-to-integer brackets, the approximation
//! property J_a, and the four lacunary constructions of τ = 1 + Σ 2^{-n_i}.
//!
//! Quantities that overflow binary64 (distances like 2^{-262144}, or
//! exponents like 2^{524306}) are carried on a log2 scale as fixed-point
//! big integers, see [`Log2Range`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default cap on the bit length of any exponent or materialized numerator.
pub const DEFAULT_BUDGET_BITS: u64 = 1_000_000;

const FRAC: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DioError {
    #[error("big-integer budget of {budget} bits exceeded while computing term {term} (needs {needed} bits)")]
    OverflowPolicy {
        budget: u64,
        needed: u64,
        term: usize,
    },
    #[error("J_a evidence requires an irrational τ")]
    IrrationalRequired,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

// ---------------------------------------------------------------------------
// log2-scale fixed point

/// A closed interval `[lo, hi]` of log2 values, stored as fixed-point big
/// integers with 32 fractional bits. Used for magnitudes far outside f64.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Log2Range {
    lo: BigInt,
    hi: BigInt,
}

fn fix_one() -> BigInt {
    BigInt::one() << FRAC
}

/// floor(n · c · 2^shift) for an f64 `c`, exactly.
fn mul_f64_floor(n: &BigInt, c: f64, shift: i64) -> BigInt {
    if c == 0.0 || n.is_zero() {
        return BigInt::zero();
    }
    let (mant, exp, sign) = Float::integer_decode(c);
    let mut v = n * BigInt::from(mant);
    if sign < 0 {
        v = -v;
    }
    let e = exp as i64 + shift;
    if e >= 0 {
        v << (e as usize)
    } else {
        v.div_floor(&(BigInt::one() << ((-e) as usize)))
    }
}

fn mul_f64_ceil(n: &BigInt, c: f64, shift: i64) -> BigInt {
    -mul_f64_floor(&(-n), c, shift)
}

fn f64_floor_fix(v: f64) -> BigInt {
    BigInt::from(v.floor() as i128).max(BigInt::from(i128::MIN))
}

impl Log2Range {
    /// The exact integer `n`.
    pub fn int(n: BigInt) -> Self {
        let raw = n << FRAC;
        Self {
            lo: raw.clone(),
            hi: raw,
        }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::int(BigInt::from(n))
    }

    /// `v ± err` for an ordinary f64 log2 value.
    pub fn from_f64(v: f64, err: f64) -> Self {
        assert!(v.is_finite() && err.is_finite());
        let scale = (1u64 << FRAC) as f64;
        let e = err.abs() + v.abs() * 4.0 * f64::EPSILON;
        let lo = f64_floor_fix((v - e) * scale) - 1;
        let hi = -f64_floor_fix(-(v + e) * scale) + 1;
        Self { lo, hi }
    }

    /// `[a, b]` with `a ≤ b` integers.
    pub fn int_span(a: BigInt, b: BigInt) -> Self {
        debug_assert!(a <= b);
        Self {
            lo: a << FRAC,
            hi: b << FRAC,
        }
    }

    /// log2 of a positive integer.
    pub fn log2_uint(x: &BigUint) -> Self {
        assert!(!x.is_zero(), "log2 of zero");
        let bits = x.bits();
        if bits <= 1000 {
            let f = x.to_f64().unwrap();
            return Self::from_f64(f.log2(), 1e-13);
        }
        let shift = bits - 64;
        let top = (x >> shift).to_u64().unwrap();
        let lo = (top as f64).log2() - 1e-12;
        let hi = ((top as f64) + 1.0).log2() + 1e-12;
        let base = Self::int(BigInt::from(shift));
        let frac = Self::from_f64((lo + hi) / 2.0, (hi - lo) / 2.0);
        base.add(&frac)
    }

    /// log2 of a positive rational.
    pub fn log2_rational(x: &BigRational) -> Self {
        assert!(x.is_positive(), "log2 of non-positive rational");
        let n = x.numer().to_biguint().unwrap();
        let d = x.denom().to_biguint().unwrap();
        Self::log2_uint(&n).sub(&Self::log2_uint(&d))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    /// Hull of two ranges.
    pub fn hull(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    /// log2 of (2^self + 2^o), using max ≤ sum ≤ 2·max.
    pub fn log2_sum(&self, o: &Self) -> Self {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = self.hi.clone().max(o.hi.clone()) + fix_one();
        Self { lo, hi }
    }

    /// `c · n` for an integer `n` and a real `c ∈ [c_lo, c_hi]`.
    pub fn scale_int(c_lo: f64, c_hi: f64, n: &BigInt) -> Self {
        debug_assert!(c_lo <= c_hi);
        let (a, b) = if n.is_negative() {
            (c_hi, c_lo)
        } else {
            (c_lo, c_hi)
        };
        Self {
            lo: mul_f64_floor(n, a, FRAC as i64),
            hi: mul_f64_ceil(n, b, FRAC as i64),
        }
    }

    /// `c · 2^e` for a real `c ∈ [c_lo, c_hi]`, `c_lo ≥ 0`.
    pub fn scale_pow2(c_lo: f64, c_hi: f64, e: &BigUint) -> Self {
        let e = e.to_u64().expect("exponent exceeds u64") as i64;
        let one = BigInt::one();
        Self {
            lo: mul_f64_floor(&one, c_lo, FRAC as i64 + e),
            hi: mul_f64_ceil(&one, c_hi, FRAC as i64 + e),
        }
    }

    /// `self · c` for a real `c ∈ [c_lo, c_hi]` with `c_lo > 0`.
    pub fn mul_pos(&self, c_lo: f64, c_hi: f64) -> Self {
        let lo_c = if self.lo.is_negative() { c_hi } else { c_lo };
        let hi_c = if self.hi.is_negative() { c_lo } else { c_hi };
        Self {
            lo: mul_f64_floor(&self.lo, lo_c, 0),
            hi: mul_f64_ceil(&self.hi, hi_c, 0),
        }
    }

    pub fn widen(&self, log2_err: f64) -> Self {
        self.add(&Self::from_f64(0.0, log2_err))
    }

    /// Whether `o` lies inside this range.
    pub fn contains(&self, o: &Self) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    /// Certainly strictly smaller than `o`.
    pub fn below(&self, o: &Self) -> bool {
        self.hi < o.lo
    }

    /// Midpoint as f64; ±∞ when outside the f64 range.
    pub fn approx(&self) -> f64 {
        let mid: BigInt = (&self.lo + &self.hi) / 2;
        let v = mid.to_f64().unwrap_or(if mid.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        v / (1u64 << FRAC) as f64
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NEG_INFINITY) / (1u64 << FRAC) as f64
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::INFINITY) / (1u64 << FRAC) as f64
    }

    /// Natural-log midpoint, convenient for moderate magnitudes.
    pub fn ln_approx(&self) -> f64 {
        self.approx() * std::f64::consts::LN_2
    }

    /// Integer part of the lower endpoint, exact.
    pub fn floor_lo(&self) -> BigInt {
        self.lo.div_floor(&fix_one())
    }

    /// Compact human-readable form: a decimal for ordinary values, otherwise
    /// the bit length of the integer part.
    pub fn describe(&self) -> String {
        let v = self.approx();
        if v.is_finite() {
            format!("{v:.6}")
        } else {
            let n = self.floor_lo();
            let s = if n.is_negative() { "-" } else { "" };
            format!("{s}~2^{}", n.abs().bits().saturating_sub(1))
        }
    }
}

impl fmt::Display for Log2Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log2 ∈ [{}, {}]", self.lo_f64(), self.hi_f64())
    }
}

// ---------------------------------------------------------------------------
// integer indices that may be astronomically large

/// A natural number that is either small, an exact power of two, or a
/// derived big integer described symbolically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Index {
    Small(u64),
    Pow2(BigUint),
    Big(BigUint),
}

impl Index {
    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Index::Small(v) => Some(*v),
            Index::Pow2(e) => e.to_u32().filter(|&e| e < 64).map(|e| 1u64 << e),
            Index::Big(b) => b.to_u64(),
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Small(v) => write!(f, "{v}"),
            Index::Pow2(e) => write!(f, "2^{e}"),
            Index::Big(b) if b.bits() <= 128 => write!(f, "{b}"),
            Index::Big(b) => write!(f, "<{}-bit integer>", b.bits()),
        }
    }
}

// ---------------------------------------------------------------------------
// dyadic streams

/// Which recurrence generates the gaps m_i of a [`DyadicStream`].
#[derive(Clone, Debug, PartialEq)]
pub enum Construction {
    /// m_1 = max(8, ν+1), m_{i+1} = max(⌈2^{n_i} c⌉ − n_i, n_i + 2), c = a₀/log 2.
    T711 { c: BigRational },
    /// m_1 = max(8, ν+1), m_{i+1} = n_i + max(⌈2^{n_i} c⌉, 2).
    T712 { c: BigRational },
    /// m_1 = max(8, 2ν), m_{i+1} = 2^{n_i/2}.
    T713,
    /// m_1 = max(8, ν+1), m_{i+1} = 2^{2 n_i}.
    T714,
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::T711 { .. } => "7.11",
            Construction::T712 { .. } => "7.12",
            Construction::T713 => "7.13",
            Construction::T714 => "7.14",
        }
    }
}

/// τ = 1 + Σ 2^{-n_i} held as its strictly increasing exponent list.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicStream {
    kind: Construction,
    nu: u64,
    exps: Vec<BigUint>,
    budget_bits: u64,
}

fn ceil_mul_pow2(c: &BigRational, n: u64) -> BigInt {
    let num = c.numer() << (n as usize);
    num.div_ceil(c.denom())
}

impl DyadicStream {
    fn new(kind: Construction, nu: u64, budget_bits: u64) -> Self {
        Self {
            kind,
            nu,
            exps: Vec::new(),
            budget_bits,
        }
    }

    pub fn construction(&self) -> &Construction {
        &self.kind
    }

    pub fn nu(&self) -> u64 {
        self.nu
    }

    pub fn budget_bits(&self) -> u64 {
        self.budget_bits
    }

    /// The exponents n_1 < n_2 < … computed so far.
    pub fn exponents(&self) -> &[BigUint] {
        &self.exps
    }

    pub fn terms(&self) -> usize {
        self.exps.len()
    }

    /// Gap m_i = n_i − n_{i−1} (1-based, n_0 = 0).
    pub fn gap(&self, i: usize) -> BigUint {
        assert!(i >= 1 && i <= self.exps.len());
        if i == 1 {
            self.exps[0].clone()
        } else {
            &self.exps[i - 1] - &self.exps[i - 2]
        }
    }

    fn check_bits(&self, needed: u64, term: usize) -> Result<(), DioError> {
        if needed > self.budget_bits {
            Err(DioError::OverflowPolicy {
                budget: self.budget_bits,
                needed,
                term,
            })
        } else {
            Ok(())
        }
    }

    fn n_as_u64(&self, i: usize, term: usize) -> Result<u64, DioError> {
        let n = &self.exps[i];
        match n.to_u64() {
            Some(v) if v <= self.budget_bits => Ok(v),
            _ => Err(DioError::OverflowPolicy {
                budget: self.budget_bits,
                needed: n.to_u64().unwrap_or(u64::MAX),
                term,
            }),
        }
    }

    fn next_gap(&self) -> Result<BigUint, DioError> {
        let term = self.exps.len() + 1;
        if self.exps.is_empty() {
            let m1 = match self.kind {
                Construction::T713 => 8.max(2 * self.nu),
                _ => 8.max(self.nu + 1),
            };
            return Ok(BigUint::from(m1));
        }
        let last = self.exps.len() - 1;
        let n_big = self.exps[last].clone();
        match &self.kind {
            Construction::T711 { c } => {
                let n = self.n_as_u64(last, term)?;
                let a = ceil_mul_pow2(c, n) - BigInt::from(n);
                let b = BigInt::from(n) + 2;
                let m = a.max(b);
                self.check_bits(m.bits(), term)?;
                Ok(m.to_biguint().unwrap())
            }
            Construction::T712 { c } => {
                let n = self.n_as_u64(last, term)?;
                let m = BigInt::from(n) + ceil_mul_pow2(c, n).max(BigInt::from(2));
                self.check_bits(m.bits(), term)?;
                Ok(m.to_biguint().unwrap())
            }
            Construction::T713 => {
                let half = &n_big >> 1u32;
                let e = half.to_u64().unwrap_or(u64::MAX);
                self.check_bits(e.saturating_add(1), term)?;
                Ok(BigUint::one() << (e as usize))
            }
            Construction::T714 => {
                let e = (&n_big << 1u32).to_u64().unwrap_or(u64::MAX);
                self.check_bits(e.saturating_add(1), term)?;
                Ok(BigUint::one() << (e as usize))
            }
        }
    }

    /// Extends the exponent list to `terms` entries.
    pub fn extend_to(&mut self, terms: usize) -> Result<(), DioError> {
        while self.exps.len() < terms {
            let m = self.next_gap()?;
            let n = match self.exps.last() {
                Some(prev) => prev + &m,
                None => m,
            };
            self.exps.push(n);
        }
        Ok(())
    }

    /// Number of leading truncations τ_i whose numerator fits the budget.
    pub fn materializable_terms(&self) -> usize {
        self.exps
            .iter()
            .take_while(|n| n.to_u64().is_some_and(|v| v <= self.budget_bits))
            .count()
    }

    /// Numerator N_i of τ_i = N_i / 2^{n_i}.
    pub fn truncation_numerator(&self, i: usize) -> Result<BigUint, DioError> {
        assert!(i >= 1 && i <= self.exps.len());
        let ni = self.n_as_u64(i - 1, i)?;
        let mut acc = BigUint::one() << (ni as usize);
        for n in &self.exps[..i] {
            let shift = ni - n.to_u64().unwrap();
            acc += BigUint::one() << (shift as usize);
        }
        Ok(acc)
    }

    /// Lower bound on n_{i+1}; exact when that term is known, otherwise the
    /// bound n_{i+1} ≥ 2 n_i + 2 shared by all four recurrences.
    pub fn next_exponent_lower(&self, i: usize) -> BigUint {
        if i < self.exps.len() {
            self.exps[i].clone()
        } else {
            (&self.exps[i - 1] << 1u32) + 2u32
        }
    }

    /// Binary64 approximation of τ.
    pub fn approx(&self) -> f64 {
        let mut v = 1.0f64;
        for n in &self.exps {
            if let Some(n) = n.to_i32() {
                if n < 1100 {
                    v += 2f64.powi(-n);
                }
            }
        }
        v
    }
}

fn default_terms(kind: &Construction) -> usize {
    match kind {
        Construction::T713 | Construction::T714 => 3,
        _ => 4,
    }
}

fn build(kind: Construction, nu: u64, terms: usize, budget: u64) -> Result<DyadicStream, DioError> {
    if terms == 0 {
        return Err(DioError::InvalidParameter(
            "terms must be at least 1".into(),
        ));
    }
    let mut s = DyadicStream::new(kind, nu, budget);
    s.extend_to(terms)?;
    Ok(s)
}

fn a0_ratio(a0: f64) -> Result<BigRational, DioError> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(DioError::InvalidParameter("a0 must be positive".into()));
    }
    BigRational::from_float(a0 / std::f64::consts::LN_2)
        .ok_or_else(|| DioError::InvalidParameter("a0 not representable".into()))
}

/// Stream for the J_{a₀}-but-no-smaller construction. `a0` enters through
/// the binary64 value of a₀ / log 2.
pub fn tau_7_11(a0: f64, nu: u64, terms: usize) -> Result<DyadicStream, DioError> {
    tau_7_11_exact(a0_ratio(a0)?, nu, terms, DEFAULT_BUDGET_BITS)
}

/// As [`tau_7_11`] with c = a₀ / log 2 given exactly.
pub fn tau_7_11_exact(
    c: BigRational,
    nu: u64,
    terms: usize,
    budget: u64,
) -> Result<DyadicStream, DioError> {
    build(Construction::T711 { c }, nu, terms, budget)
}

pub fn tau_7_12(a0: f64, nu: u64, terms: usize) -> Result<DyadicStream, DioError> {
    tau_7_12_exact(a0_ratio(a0)?, nu, terms, DEFAULT_BUDGET_BITS)
}

pub fn tau_7_12_exact(
    c: BigRational,
    nu: u64,
    terms: usize,
    budget: u64,
) -> Result<DyadicStream, DioError> {
    build(Construction::T712 { c }, nu, terms, budget)
}

pub fn tau_7_13(nu: u64, terms: usize) -> Result<DyadicStream, DioError> {
    build(Construction::T713, nu, terms, DEFAULT_BUDGET_BITS)
}

pub fn tau_7_14(nu: u64, terms: usize) -> Result<DyadicStream, DioError> {
    build(Construction::T714, nu, terms, DEFAULT_BUDGET_BITS)
}

/// Stream with an explicit term count, or with as many terms as the budget
/// allows up to the construction's default.
pub fn construct(
    kind: Construction,
    nu: u64,
    terms: Option<usize>,
    budget: u64,
) -> Result<DyadicStream, DioError> {
    if let Some(t) = terms {
        return build(kind, nu, t, budget);
    }
    let t = default_terms(&kind);
    let mut s = DyadicStream::new(kind, nu, budget);
    while s.terms() < t {
        match s.extend_to(s.terms() + 1) {
            Ok(()) => {}
            Err(e) if s.terms() < 2 => return Err(e),
            Err(_) => break,
        }
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// quadratic surds

/// τ = (a + b√d) / c with d > 0 not a perfect square, b ≠ 0, c > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSurd {
    pub a: BigInt,
    pub b: BigInt,
    pub d: BigUint,
    pub c: BigInt,
}

impl QuadraticSurd {
    pub fn new(a: i64, b: i64, d: u64, c: i64) -> Result<Self, DioError> {
        let r = (d as f64).sqrt().round() as u64;
        if b == 0 || c <= 0 || r * r == d {
            return Err(DioError::InvalidParameter(
                "surd must be irrational with c > 0".into(),
            ));
        }
        Ok(Self {
            a: a.into(),
            b: b.into(),
            d: d.into(),
            c: c.into(),
        })
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1, 2, 1).unwrap()
    }

    pub fn approx(&self) -> f64 {
        let d = self.d.to_f64().unwrap();
        (self.a.to_f64().unwrap() + self.b.to_f64().unwrap() * d.sqrt()) / self.c.to_f64().unwrap()
    }

    /// Nearest integer to jτ and log2 of the distance.
    fn nearest(&self, j: u64) -> (BigInt, Log2Range) {
        let jt = j as f64 * self.approx();
        let base = BigInt::from(jt.round() as i128);
        let d = self.d.to_f64().unwrap();
        let sd = d.sqrt();
        let mut best: Option<(BigInt, f64)> = None;
        for off in -1i32..=1 {
            let k = &base + off;
            // j τ − k = (P + Q √d) / c with P = j a − k c, Q = j b.
            let p = BigInt::from(j) * &self.a - &k * &self.c;
            let q = BigInt::from(j) * &self.b;
            let pf = p.to_f64().unwrap();
            let qf = q.to_f64().unwrap();
            let same_sign = (pf >= 0.0) == (qf >= 0.0);
            let mag = if same_sign || pf == 0.0 {
                (pf + qf * sd).abs()
            } else {
                let norm = (&p * &p - &q * &q * BigInt::from(self.d.clone())).abs();
                norm.to_f64().unwrap() / (pf - qf * sd).abs()
            };
            let v = mag / self.c.to_f64().unwrap();
            if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
                best = Some((k, v));
            }
        }
        let (k, v) = best.unwrap();
        (k, Log2Range::from_f64(v.log2(), 1e-12))
    }
}

// ---------------------------------------------------------------------------
// τ values

/// A parameter τ in one of the exact or declared-precision input kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum Tau {
    Rational(BigRational),
    Stream(DyadicStream),
    Surd(QuadraticSurd),
    /// A decimal known to lie in `[value − radius, value + radius]`;
    /// rationality is not decided.
    Decimal {
        value: BigRational,
        radius: BigRational,
    },
}

impl Tau {
    pub fn approx(&self) -> f64 {
        match self {
            Tau::Rational(r) => r.to_f64().unwrap(),
            Tau::Stream(s) => s.approx(),
            Tau::Surd(q) => q.approx(),
            Tau::Decimal { value, .. } => value.to_f64().unwrap(),
        }
    }

    /// `Some(true)` when τ is certainly irrational, `Some(false)` when
    /// rational, `None` for declared-precision decimals.
    pub fn is_irrational(&self) -> Option<bool> {
        match self {
            Tau::Rational(_) => Some(false),
            Tau::Stream(_) | Tau::Surd(_) => Some(true),
            Tau::Decimal { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Tau::Rational(r) => format!("{r}"),
            Tau::Stream(s) => format!("{}(nu={}, terms={})", s.kind.name(), s.nu, s.terms()),
            Tau::Surd(q) => format!("({} + {}·sqrt({}))/{}", q.a, q.b, q.d, q.c),
            Tau::Decimal { value, radius } => {
                format!(
                    "{} ± {:e}",
                    value.to_f64().unwrap(),
                    radius.to_f64().unwrap()
                )
            }
        }
    }

    /// Nearest integer K to jτ together with a bracket for |jτ − K|.
    /// Returns `None` when the bracket cannot exclude zero.
    pub fn nearest_integer(&self, j: u64) -> Option<(BigInt, Log2Range)> {
        assert!(j >= 1);
        match self {
            Tau::Rational(r) => {
                let jr = r * BigRational::from_integer(BigInt::from(j));
                let k = jr.round().to_integer();
                let d = (jr - BigRational::from_integer(k.clone())).abs();
                if d.is_zero() {
                    None
                } else {
                    Some((k, Log2Range::log2_rational(&d)))
                }
            }
            Tau::Surd(q) => Some(q.nearest(j)),
            Tau::Stream(s) => stream_nearest(s, &BigUint::from(j)),
            Tau::Decimal { value, radius } => {
                let jv = value * BigRational::from_integer(BigInt::from(j));
                let k = jv.round().to_integer();
                let d = (jv - BigRational::from_integer(k.clone())).abs();
                let slack = radius * BigRational::from_integer(BigInt::from(j));
                if d <= slack {
                    return None;
                }
                let lo = Log2Range::log2_rational(&(&d - &slack));
                let hi = Log2Range::log2_rational(&(&d + &slack));
                Some((k, lo.hull(&hi)))
            }
        }
    }
}

/// Nearest integer to jτ for a stream, using the deepest truncation that
/// fits the budget plus the geometric tail bound.
fn stream_nearest(s: &DyadicStream, j: &BigUint) -> Option<(BigInt, Log2Range)> {
    let i = s.materializable_terms();
    if i == 0 {
        return None;
    }
    let ni = s.exps[i - 1].to_u64().unwrap();
    let num = s.truncation_numerator(i).ok()?;
    let prod = j * &num;
    let floor = BigInt::from(&prod >> (ni as usize));
    let mask = (BigUint::one() << (ni as usize)) - 1u32;
    let frac = &prod & &mask;
    // τ − τ_i ∈ (2^{-n_{i+1}}, 2^{-n_{i+1}+1})
    let next = BigInt::from(s.next_exponent_lower(i));
    let log_j = Log2Range::log2_uint(j);
    let tail = log_j.add(&Log2Range::int_span(-&next, -&next + 1));
    if frac.is_zero() {
        // dist = j(τ − τ_i) only while that stays below 1/2
        if tail.hi_f64() >= -1.0 {
            return None;
        }
        return Some((floor, tail.widen(2f64.powi(-46))));
    }
    let half = BigUint::one() << ((ni - 1) as usize);
    let (k, dnum) = if frac < half {
        (floor, frac.clone())
    } else {
        (floor + 1, (BigUint::one() << (ni as usize)) - &frac)
    };
    // d = dnum / 2^{n_i}; the tail moves jτ upward by less than 2^{tail.hi}.
    let base = Log2Range::log2_uint(&dnum).sub(&Log2Range::from_i64(ni as i64));
    let gap = base.floor_lo() - (tail.hi.div_floor(&fix_one()) + 1);
    if gap < BigInt::from(48) {
        return None;
    }
    // relative perturbation below 2^{-47}
    Some((k, base.widen(2f64.powi(-46))))
}

/// Bracket for dist(jτ, ℤ).
#[derive(Clone, Debug, PartialEq)]
pub struct DistBracket {
    /// Exact value when τ is rational.
    pub exact: Option<BigRational>,
    /// log2 bracket; `None` when the distance may be zero.
    pub log2: Option<Log2Range>,
}

/// dist(jτ, ℤ), computed on the i-term truncation of a stream (or exactly
/// for rationals) and widened by the tail bound.
pub fn dist_to_integer(j: u64, tau: &Tau, terms: Option<usize>) -> DistBracket {
    assert!(j >= 1);
    match tau {
        Tau::Rational(r) => {
            let jr = r * BigRational::from_integer(BigInt::from(j));
            let d = (jr.clone() - jr.round()).abs();
            let log2 = if d.is_zero() {
                None
            } else {
                Some(Log2Range::log2_rational(&d))
            };
            DistBracket {
                exact: Some(d),
                log2,
            }
        }
        Tau::Stream(s) => {
            let t = terms.unwrap_or(s.terms()).clamp(1, s.terms());
            DistBracket {
                exact: None,
                log2: stream_nearest(&truncated_view(s, t), &BigUint::from(j)).map(|(_, l)| l),
            }
        }
        _ => DistBracket {
            exact: None,
            log2: tau.nearest_integer(j).map(|(_, l)| l),
        },
    }
}

/// The first `t` terms materialized, with term t+1 (when known) kept for
/// the tail bound only.
fn truncated_view(s: &DyadicStream, t: usize) -> DyadicStream {
    let mut v = s.clone();
    v.exps.truncate(t + 1);
    if let Some(nt) = v.exps[t - 1].to_u64() {
        v.budget_bits = v.budget_bits.min(nt);
    }
    v
}

/// Bracket for log2 |j_i τ − k_i| at the structured witness j_i = 2^{n_i}:
/// the interval (−m_{i+1}, −m_{i+1} + 1).
pub fn structured_offset(s: &DyadicStream, i: usize) -> Log2Range {
    assert!(i >= 1 && i <= s.terms());
    let ni = BigInt::from(s.exps[i - 1].clone());
    let next = BigInt::from(s.next_exponent_lower(i));
    let m = next - ni;
    Log2Range::int_span(-&m, -&m + 1)
}

/// Witness pair of the structured set: j_i = 2^{n_i} and k_i = j_i τ_i.
pub fn structured_witness(s: &DyadicStream, i: usize) -> Result<(BigUint, BigUint), DioError> {
    let ni = s.exps[i - 1]
        .to_u64()
        .filter(|&v| v <= s.budget_bits)
        .ok_or(DioError::OverflowPolicy {
            budget: s.budget_bits,
            needed: s.exps[i - 1].bits(),
            term: i,
        })?;
    let j = BigUint::one() << (ni as usize);
    let k = s.truncation_numerator(i)?;
    Ok((j, k))
}

// ---------------------------------------------------------------------------
// J_a evidence

/// Three-valued outcome of a bounded numeric scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evidence {
    For,
    Against,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JaWitness {
    pub j: Index,
    pub k: Index,
    /// log2 of q_j = j · e^{aj} · dist(jτ, ℤ).
    pub log2_q: Log2Range,
    pub structured: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JaReport {
    pub a: f64,
    pub j_max: u64,
    pub min_log2_q: Option<Log2Range>,
    /// Strictly decreasing record minima of q_j in scan order.
    pub witnesses: Vec<JaWitness>,
    pub unresolved: Vec<u64>,
    pub verdict: Evidence,
}

const LOG2_1PCT: f64 = 0.014355292977070041; // log2(1.01)

/// Scans q_j = j e^{aj} dist(jτ, ℤ) for j ≤ j_max, plus the structured
/// witnesses j = 2^{n_i} of constructed streams.
pub fn j_a_evidence(tau: &Tau, a: f64, j_max: u64) -> Result<JaReport, DioError> {
    if tau.is_irrational() == Some(false) {
        return Err(DioError::IrrationalRequired);
    }
    if !(a > 0.0) || j_max == 0 {
        return Err(DioError::InvalidParameter(
            "need a > 0 and j_max ≥ 1".into(),
        ));
    }
    let c = a / std::f64::consts::LN_2;
    let c_lo = c * (1.0 - 4.0 * f64::EPSILON);
    let c_hi = c * (1.0 + 4.0 * f64::EPSILON);
    let mut records: Vec<JaWitness> = Vec::new();
    let mut unresolved = Vec::new();
    let mut min_half: Option<Log2Range> = None;
    for j in 1..=j_max {
        let Some((k, ld)) = tau.nearest_integer(j) else {
            unresolved.push(j);
            continue;
        };
        let lq = Log2Range::log2_uint(&BigUint::from(j))
            .add(&Log2Range::scale_int(c_lo, c_hi, &BigInt::from(j)))
            .add(&ld);
        let is_record = records.last().map_or(true, |r| lq.below(&r.log2_q));
        if is_record {
            records.push(JaWitness {
                j: Index::Small(j),
                k: Index::Big(k.to_biguint().unwrap_or_default()),
                log2_q: lq,
                structured: false,
            });
        }
        if j == j_max / 2 {
            min_half = records.last().map(|r| r.log2_q.clone());
        }
    }
    let dense_len = records.len();
    if let Tau::Stream(s) = tau {
        for w in j_a_structured(s, a)? {
            if w.j.as_u64().is_some_and(|j| j <= j_max) {
                continue;
            }
            if records.last().map_or(true, |r| w.log2_q.below(&r.log2_q)) {
                records.push(w);
            }
        }
    }
    let min_final = records.last().map(|r| r.log2_q.clone());
    let late_drop = match (&min_half, &min_final) {
        (Some(h), Some(f)) => f.hi_f64() < h.lo_f64() - LOG2_1PCT,
        _ => false,
    };
    let late_records = records
        .iter()
        .enumerate()
        .filter(|(idx, r)| *idx >= dense_len || r.j.as_u64().is_some_and(|j| j > j_max / 2))
        .count();
    let verdict = if !unresolved.is_empty() {
        Evidence::Unknown
    } else if late_drop && records.len() >= 3 && late_records > 0 {
        Evidence::Against
    } else if late_records == 0 {
        Evidence::For
    } else {
        Evidence::Unknown
    };
    Ok(JaReport {
        a,
        j_max,
        min_log2_q: min_final,
        witnesses: records,
        unresolved,
        verdict,
    })
}

/// log2 of 2^{n_i}·e^{a·2^{n_i}}·|2^{n_i}τ − N_i| at every index whose
/// successor exponent is known, skipping exponents over the budget.
pub fn j_a_structured(s: &DyadicStream, a: f64) -> Result<Vec<JaWitness>, DioError> {
    if !(a > 0.0) {
        return Err(DioError::InvalidParameter("need a > 0".into()));
    }
    let c = a / std::f64::consts::LN_2;
    let (c_lo, c_hi) = (
        c * (1.0 - 4.0 * f64::EPSILON),
        c * (1.0 + 4.0 * f64::EPSILON),
    );
    let mut out = Vec::new();
    for i in 1..s.terms() {
        let ni = &s.exps[i - 1];
        if ni.to_u64().map_or(true, |n| n > s.budget_bits) {
            continue;
        }
        let log2_q = Log2Range::int(BigInt::from(ni.clone()))
            .add(&Log2Range::scale_pow2(c_lo, c_hi, ni))
            .add(&structured_offset(s, i));
        let k = structured_witness(s, i).map(|(_, k)| k).unwrap_or_default();
        let j = match ni.to_u64() {
            Some(n) if n < 64 => Index::Small(1u64 << n),
            _ => Index::Pow2(ni.clone()),
        };
        out.push(JaWitness {
            j,
            k: Index::Big(k),
            log2_q,
            structured: true,
        });
    }
    Ok(out)
}

/// Exact comparison helper used by tests: value of τ_i as a rational.
pub fn truncation_value(s: &DyadicStream, i: usize) -> Result<BigRational, DioError> {
    let num = s.truncation_numerator(i)?;
    let ni = s.exps[i - 1].to_u64().unwrap();
    Ok(BigRational::new(
        BigInt::from(num),
        BigInt::one() << (ni as usize),
    ))
}

impl PartialOrd for Log2Range {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if o.hi < self.lo {
            Some(Ordering::Greater)
        } else if self == o {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}
