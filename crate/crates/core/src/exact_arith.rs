//! Exact integers, rationals and sparse Laurent polynomials over the integers.
//!
//! A [`LaurentPolynomial`] stores its terms in a flat exponent buffer sorted by
//! the canonical monomial order: total degree first, then larger exponents of
//! earlier variables first. The canonical form is unique, so `==` is equality
//! of Laurent polynomials.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use crate::error::Error;

pub type Integer = BigInt;
pub type Rational = BigRational;

pub fn int(v: i64) -> Integer {
    Integer::from(v)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Integer::from(n), Integer::from(d))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(Integer::from(v))
}

/// Dense exponent vector of a Laurent monomial. Negative entries are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExponentVector(pub Vec<i64>);

impl ExponentVector {
    pub fn zero(nvars: usize) -> Self {
        ExponentVector(vec![0; nvars])
    }

    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut v = vec![0; nvars];
        v[i] = 1;
        ExponentVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Nonzero entries as (index, exponent) pairs.
    pub fn support(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.0.iter().copied().enumerate().filter(|&(_, e)| e != 0)
    }
}

impl From<Vec<i64>> for ExponentVector {
    fn from(v: Vec<i64>) -> Self {
        ExponentVector(v)
    }
}

/// The canonical monomial order.
pub fn cmp_monomial(a: &[i64], b: &[i64]) -> Ordering {
    let da: i64 = a.iter().sum();
    let db: i64 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

fn checked_add_exp(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("exponent overflow")
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPolynomial {
    nvars: usize,
    exps: Vec<i64>,
    coeffs: Vec<Integer>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivError {
    NotDivisible,
    DivisionByZero,
}

impl fmt::Display for DivError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivError::NotDivisible => write!(f, "not divisible"),
            DivError::DivisionByZero => write!(f, "division by the zero polynomial"),
        }
    }
}

impl std::error::Error for DivError {}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        LaurentPolynomial { nvars, exps: Vec::new(), coeffs: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Integer::one())
    }

    pub fn constant(nvars: usize, c: Integer) -> Self {
        Self::monomial(nvars, &vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable x{i} outside a universe of {nvars}");
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, &e, Integer::one())
    }

    pub fn monomial(nvars: usize, exps: &[i64], c: Integer) -> Self {
        assert_eq!(exps.len(), nvars);
        if c.is_zero() {
            return Self::zero(nvars);
        }
        LaurentPolynomial { nvars, exps: exps.to_vec(), coeffs: vec![c] }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<i64>, Integer)>,
    {
        let mut map: FxHashMap<Vec<i64>, Integer> = FxHashMap::default();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            *map.entry(e).or_default() += c;
        }
        let mut v: Vec<(Vec<i64>, Integer)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_by(|a, b| cmp_monomial(&a.0, &b.0));
        let mut p = Self::zero(nvars);
        for (e, c) in v {
            p.exps.extend_from_slice(&e);
            p.coeffs.push(c);
        }
        p
    }

    // Terms must already be sorted and nonzero.
    fn from_sorted(nvars: usize, exps: Vec<i64>, coeffs: Vec<Integer>) -> Self {
        debug_assert_eq!(exps.len(), nvars * coeffs.len());
        LaurentPolynomial { nvars, exps, coeffs }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.len() == 1 && self.coeffs[0].is_one() && self.exps.iter().all(|&e| e == 0)
    }

    pub fn is_monomial(&self) -> bool {
        self.len() == 1
    }

    pub fn exponent(&self, t: usize) -> &[i64] {
        &self.exps[t * self.nvars..(t + 1) * self.nvars]
    }

    pub fn coefficient(&self, t: usize) -> &Integer {
        &self.coeffs[t]
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], &Integer)> + '_ {
        (0..self.len()).map(move |t| (self.exponent(t), &self.coeffs[t]))
    }

    /// Coefficient of the given monomial (zero if absent).
    pub fn coeff_of(&self, e: &[i64]) -> Integer {
        let mut lo = 0;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match cmp_monomial(self.exponent(mid), e) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return self.coeffs[mid].clone(),
            }
        }
        Integer::zero()
    }

    /// Componentwise minimum exponent over all terms (zeros for the zero polynomial).
    pub fn min_exponents(&self) -> Vec<i64> {
        self.fold_exponents(i64::min)
    }

    pub fn max_exponents(&self) -> Vec<i64> {
        self.fold_exponents(i64::max)
    }

    fn fold_exponents(&self, f: fn(i64, i64) -> i64) -> Vec<i64> {
        if self.is_zero() {
            return vec![0; self.nvars];
        }
        let mut out = self.exponent(0).to_vec();
        for t in 1..self.len() {
            for (o, &e) in out.iter_mut().zip(self.exponent(t)) {
                *o = f(*o, e);
            }
        }
        out
    }

    fn check_universe(&self, other: &Self) -> Result<(), Error> {
        if self.nvars != other.nvars {
            return Err(Error::Contract(format!(
                "variable universe mismatch: {} vs {}",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, Error> {
        self.check_universe(other)?;
        Ok(self.merge(other, false))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, Error> {
        self.check_universe(other)?;
        Ok(self.merge(other, true))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_universe(other)?;
        Ok(self.mul_impl(other))
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let n = self.nvars;
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let mut coeffs = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let sign = |c: &Integer| if negate { -c } else { c.clone() };
        while i < self.len() || j < other.len() {
            let ord = if i == self.len() {
                Ordering::Greater
            } else if j == other.len() {
                Ordering::Less
            } else {
                cmp_monomial(self.exponent(i), other.exponent(j))
            };
            match ord {
                Ordering::Less => {
                    exps.extend_from_slice(self.exponent(i));
                    coeffs.push(self.coeffs[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    exps.extend_from_slice(other.exponent(j));
                    coeffs.push(sign(&other.coeffs[j]));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.coeffs[i] + sign(&other.coeffs[j]);
                    if !c.is_zero() {
                        exps.extend_from_slice(self.exponent(i));
                        coeffs.push(c);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        debug_assert_eq!(exps.len(), n * coeffs.len());
        Self::from_sorted(n, exps, coeffs)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let n = self.nvars;
        if self.is_zero() || other.is_zero() {
            return Self::zero(n);
        }
        if other.is_monomial() {
            return self.scale_shift(&other.coeffs[0], other.exponent(0));
        }
        if self.is_monomial() {
            return other.scale_shift(&self.coeffs[0], self.exponent(0));
        }
        let lo: Vec<i64> = self
            .min_exponents()
            .iter()
            .zip(other.min_exponents())
            .map(|(a, b)| checked_add_exp(*a, b))
            .collect();
        let hi: Vec<i64> = self
            .max_exponents()
            .iter()
            .zip(other.max_exponents())
            .map(|(a, b)| checked_add_exp(*a, b))
            .collect();
        match Packer::new(&lo, &hi) {
            Some(p) => {
                if let (Some(a), Some(b)) = (self.small_coeffs(), other.small_coeffs()) {
                    if let Some(r) = mul_packed::<i128>(self, other, &a, &b, &p) {
                        return r;
                    }
                }
                mul_packed::<Integer>(self, other, &self.coeffs, &other.coeffs, &p)
                    .expect("big integer arithmetic cannot overflow")
            }
            None => self.mul_generic(other),
        }
    }

    fn mul_generic(&self, other: &Self) -> Self {
        let n = self.nvars;
        let mut map: FxHashMap<Vec<i64>, Integer> = FxHashMap::default();
        let mut e = vec![0i64; n];
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                for k in 0..n {
                    e[k] = checked_add_exp(ea[k], eb[k]);
                }
                *map.entry(e.clone()).or_default() += ca * cb;
            }
        }
        Self::from_terms(n, map)
    }

    fn small_coeffs(&self) -> Option<Vec<i128>> {
        self.coeffs.iter().map(|c| c.to_i64().map(i128::from)).collect()
    }

    /// Multiplies by c·x^e.
    pub fn scale_shift(&self, c: &Integer, e: &[i64]) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut exps = self.exps.clone();
        for t in 0..self.len() {
            for k in 0..self.nvars {
                let x = &mut exps[t * self.nvars + k];
                *x = checked_add_exp(*x, e[k]);
            }
        }
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        // A monomial shift preserves the order.
        Self::from_sorted(self.nvars, exps, coeffs)
    }

    pub fn mul_monomial(&self, e: &[i64]) -> Self {
        self.scale_shift(&Integer::one(), e)
    }

    pub fn div_monomial(&self, e: &[i64]) -> Self {
        let neg: Vec<i64> = e.iter().map(|x| x.checked_neg().expect("exponent overflow")).collect();
        self.mul_monomial(&neg)
    }

    pub fn scale(&self, c: &Integer) -> Self {
        self.scale_shift(c, &vec![0; self.nvars])
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Power with a possibly negative exponent; only monomials have inverses.
    pub fn pow_signed(&self, k: i64) -> Option<Self> {
        if k >= 0 {
            return Some(self.pow(u32::try_from(k).ok()?));
        }
        if !self.is_monomial() || !self.coeffs[0].abs().is_one() {
            return None;
        }
        let c = &self.coeffs[0];
        let sign = if c.is_negative() && k % 2 != 0 { -Integer::one() } else { Integer::one() };
        let e: Vec<i64> = self.exponent(0).iter().map(|&x| x.checked_mul(k).expect("exponent overflow")).collect();
        Some(Self::monomial(self.nvars, &e, sign))
    }

    /// Splits `self = x^shift · p` where `p` is a polynomial not divisible by any variable.
    pub fn split_monomial_content(&self) -> (Vec<i64>, Self) {
        let m = self.min_exponents();
        (m.clone(), self.div_monomial(&m))
    }

    /// Exact quotient `self / b` in the Laurent polynomial ring.
    pub fn divide_exact(&self, b: &Self) -> Result<Self, DivError> {
        assert_eq!(self.nvars, b.nvars, "variable universe mismatch");
        if b.is_zero() {
            return Err(DivError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        if b.is_monomial() {
            let c = &b.coeffs[0];
            if self.coeffs.iter().any(|x| !x.is_multiple_of(c)) {
                return Err(DivError::NotDivisible);
            }
            let q = self.div_monomial(b.exponent(0));
            let coeffs = q.coeffs.iter().map(|x| x / c).collect();
            return Ok(Self::from_sorted(self.nvars, q.exps, coeffs));
        }
        let (sa, pa) = self.split_monomial_content();
        let (sb, pb) = b.split_monomial_content();
        let q = poly_divide(&pa, &pb)?;
        let shift: Vec<i64> = sa.iter().zip(&sb).map(|(x, y)| x - y).collect();
        Ok(q.mul_monomial(&shift))
    }

    /// Exact evaluation at a point with nonzero rational coordinates.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        if self.is_zero() {
            return Rational::zero();
        }
        let lo = self.min_exponents();
        let hi = self.max_exponents();
        // Multiply through by prod q_i^hi_i * p_i^-lo_i so every term is integral.
        let tables: Vec<(Vec<Integer>, Vec<Integer>)> = (0..self.nvars)
            .map(|i| {
                let range = (hi[i] - lo[i]) as usize;
                let p = point[i].numer();
                let q = point[i].denom();
                assert!(
                    !(p.is_zero() && range > 0) && !(p.is_zero() && lo[i] < 0),
                    "evaluation at a zero coordinate of a Laurent polynomial"
                );
                (power_table(p, range), power_table(q, range))
            })
            .collect();
        let mut total = Integer::zero();
        for (e, c) in self.terms() {
            let mut v = c.clone();
            for i in 0..self.nvars {
                let up = (e[i] - lo[i]) as usize;
                let down = (hi[i] - e[i]) as usize;
                if up > 0 {
                    v *= &tables[i].0[up];
                }
                if down > 0 {
                    v *= &tables[i].1[down];
                }
            }
            total += v;
        }
        let mut num = Rational::from_integer(total);
        for i in 0..self.nvars {
            let p = Rational::from_integer(point[i].numer().clone());
            let q = Rational::from_integer(point[i].denom().clone());
            num /= pow_rat(&q, hi[i]);
            num *= pow_rat(&p, lo[i]);
        }
        num
    }

    /// Evaluation modulo a prime, all coordinates nonzero mod p.
    pub fn eval_mod(&self, point: &[u64], p: u64) -> u64 {
        let inv: Vec<u64> = point.iter().map(|&x| pow_mod(x, p - 2, p)).collect();
        let mut total: u128 = 0;
        for (e, c) in self.terms() {
            let mut v = (c % Integer::from(p)).to_i128().unwrap().rem_euclid(p as i128) as u128;
            for i in 0..self.nvars {
                if e[i] > 0 {
                    v = v * pow_mod(point[i], e[i] as u64, p) as u128 % p as u128;
                } else if e[i] < 0 {
                    v = v * pow_mod(inv[i], (-e[i]) as u64, p) as u128 % p as u128;
                }
            }
            total = (total + v) % p as u128;
        }
        total as u64
    }

    /// Substitutes variable i ↦ images[i] (each image must be invertible when the
    /// exponent is negative, i.e. a signed monomial).
    pub fn substitute(&self, images: &[LaurentPolynomial]) -> Option<LaurentPolynomial> {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut total = LaurentPolynomial::zero(target);
        let mut cache: FxHashMap<(usize, i64), LaurentPolynomial> = FxHashMap::default();
        for (e, c) in self.terms() {
            let mut term = LaurentPolynomial::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let f = match cache.get(&(i, k)) {
                    Some(f) => f.clone(),
                    None => {
                        let f = images[i].pow_signed(k)?;
                        cache.insert((i, k), f.clone());
                        f
                    }
                };
                term = &term * &f;
            }
            total = &total + &term;
        }
        Some(total)
    }

    /// Signs of the coefficients: (positive count, negative count).
    /// True iff every stored coefficient is positive.
    pub fn is_coefficient_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_positive())
    }

    /// Numbers of (positive, negative) coefficients.
    pub fn sign_profile(&self) -> (usize, usize) {
        let pos = self.coeffs.iter().filter(|c| c.is_positive()).count();
        (pos, self.len() - pos)
    }

    /// Renders with custom variable names.
    pub fn display_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        self.render(|i| names[i].clone())
    }

    fn render(&self, name: impl Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (t, (e, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            if t == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let abs = c.abs();
            let mut factors: Vec<String> = Vec::new();
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(name(i)),
                    _ => factors.push(format!("{}^{}", name(i), k)),
                }
            }
            if factors.is_empty() || !abs.is_one() {
                factors.insert(0, abs.to_string());
            }
            out.push_str(&factors.join(" * "));
        }
        out
    }

    /// Parses the canonical text format over `x0 .. x{nvars-1}`.
    pub fn parse(text: &str, nvars: usize) -> Result<Self, Error> {
        parse_poly(text, nvars)
    }
}

fn power_table(b: &Integer, n: usize) -> Vec<Integer> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(Integer::one());
    for i in 0..n {
        let next = &v[i] * b;
        v.push(next);
    }
    v
}

pub fn pow_rat(b: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(b.clone(), e as usize)
    } else {
        num_traits::pow(b.recip(), (-e) as usize)
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut base = (b % p) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

/// Packs bounded exponent vectors into a `u128` whose numeric order is the
/// canonical monomial order.
struct Packer {
    hi: Vec<i64>,
    shifts: Vec<u32>,
    widths: Vec<u32>,
    deg_lo: i64,
    deg_shift: u32,
}

fn bits_for(range: u64) -> u32 {
    64 - range.leading_zeros()
}

impl Packer {
    fn new(lo: &[i64], hi: &[i64]) -> Option<Packer> {
        let n = lo.len();
        let widths: Vec<u32> = (0..n).map(|i| bits_for((hi[i] - lo[i]) as u64)).collect();
        let deg_lo: i64 = lo.iter().sum();
        let deg_hi: i64 = hi.iter().sum();
        let deg_bits = bits_for((deg_hi - deg_lo) as u64);
        let total: u32 = widths.iter().sum::<u32>() + deg_bits;
        if total > 128 {
            return None;
        }
        let mut shifts = vec![0u32; n];
        let mut acc = 0u32;
        for i in (0..n).rev() {
            shifts[i] = acc;
            acc += widths[i];
        }
        Some(Packer { hi: hi.to_vec(), shifts, widths, deg_lo, deg_shift: acc })
    }

    fn encode(&self, e: &[i64]) -> u128 {
        let mut key: u128 = ((e.iter().sum::<i64>() - self.deg_lo) as u128) << self.deg_shift;
        for i in 0..e.len() {
            key |= ((self.hi[i] - e[i]) as u128) << self.shifts[i];
        }
        key
    }

    fn partial_codes(&self, f: &LaurentPolynomial) -> Vec<u128> {
        let hi = f.max_exponents();
        let lo = f.min_exponents();
        let deg_lo: i64 = lo.iter().sum();
        (0..f.len())
            .map(|t| {
                let e = f.exponent(t);
                let mut key: u128 = ((e.iter().sum::<i64>() - deg_lo) as u128) << self.deg_shift;
                for i in 0..e.len() {
                    key += ((hi[i] - e[i]) as u128) << self.shifts[i];
                }
                key
            })
            .collect()
    }

    fn decode(&self, key: u128, out: &mut [i64]) {
        for i in 0..out.len() {
            let mask = if self.widths[i] == 0 { 0 } else { (1u128 << self.widths[i]) - 1 };
            out[i] = self.hi[i] - ((key >> self.shifts[i]) & mask) as i64;
        }
    }
}

/// Coefficient arithmetic used in the inner loops: checked `i128` first, big
/// integers when that overflows.
trait Coef: Clone + Sized {
    fn czero() -> Self;
    fn c_is_zero(&self) -> bool;
    fn add_prod(&mut self, a: &Self, b: &Self) -> Option<()>;
    fn sub_prod(&mut self, a: &Self, b: &Self) -> Option<()>;
    fn into_big(self) -> Integer;
    // Ok(None) means the division is not exact.
    fn div_exact(&self, d: &Self) -> Option<Option<Self>>;
}

impl Coef for i128 {
    fn czero() -> Self {
        0
    }
    fn c_is_zero(&self) -> bool {
        *self == 0
    }
    fn add_prod(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self = self.checked_add(a.checked_mul(*b)?)?;
        Some(())
    }
    fn sub_prod(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self = self.checked_sub(a.checked_mul(*b)?)?;
        Some(())
    }
    fn into_big(self) -> Integer {
        Integer::from(self)
    }
    fn div_exact(&self, d: &Self) -> Option<Option<Self>> {
        if self.checked_rem(*d)? != 0 {
            return Some(None);
        }
        Some(Some(self.checked_div(*d)?))
    }
}

impl Coef for Integer {
    fn czero() -> Self {
        Zero::zero()
    }
    fn c_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_prod(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self += a * b;
        Some(())
    }
    fn sub_prod(&mut self, a: &Self, b: &Self) -> Option<()> {
        *self -= a * b;
        Some(())
    }
    fn into_big(self) -> Integer {
        self
    }
    fn div_exact(&self, d: &Self) -> Option<Option<Self>> {
        let (q, r) = self.div_rem(d);
        Some(if Zero::is_zero(&r) { Some(q) } else { None })
    }
}

fn mul_packed<C: Coef>(
    a: &LaurentPolynomial,
    b: &LaurentPolynomial,
    ca: &[C],
    cb: &[C],
    p: &Packer,
) -> Option<LaurentPolynomial> {
    let n = a.nvars;
    // Every field of the packed code is affine in the exponents, so the code of
    // x+y is the sum of partial codes taken relative to each factor's own bounds.
    let ka = p.partial_codes(a);
    let kb = p.partial_codes(b);
    let mut map: FxHashMap<u128, C> = FxHashMap::default();
    map.reserve(a.len().max(b.len()) * 4);
    for (ta, &x) in ka.iter().enumerate() {
        for (tb, &y) in kb.iter().enumerate() {
            map.entry(x + y).or_insert_with(C::czero).add_prod(&ca[ta], &cb[tb])?;
        }
    }
    let mut keys: Vec<(u128, C)> = map.into_iter().filter(|(_, c)| !c.c_is_zero()).collect();
    keys.sort_unstable_by_key(|(k, _)| *k);
    let mut e = vec![0i64; n];
    let mut exps = Vec::with_capacity(keys.len() * n);
    let mut coeffs = Vec::with_capacity(keys.len());
    for (k, c) in keys {
        p.decode(k, &mut e);
        exps.extend_from_slice(&e);
        coeffs.push(c.into_big());
    }
    Some(LaurentPolynomial::from_sorted(n, exps, coeffs))
}

// Division of polynomials without monomial content; `b` has at least two terms.
fn poly_divide(a: &LaurentPolynomial, b: &LaurentPolynomial) -> Result<LaurentPolynomial, DivError> {
    let n = a.nvars;
    let max_a = a.max_exponents();
    let max_b = b.max_exponents();
    let max_q: Vec<i64> = max_a.iter().zip(&max_b).map(|(x, y)| x - y).collect();
    if max_q.iter().any(|&x| x < 0) {
        return Err(DivError::NotDivisible);
    }
    let zeros = vec![0i64; n];
    let Some(packer) = Packer::new(&zeros, &max_a) else {
        return poly_divide_generic(a, b);
    };
    if let (Some(ca), Some(cb)) = (a.small_coeffs(), b.small_coeffs()) {
        if let Some(r) = divide_packed::<i128>(a, b, &ca, &cb, &packer, &max_q) {
            return r;
        }
    }
    divide_packed::<Integer>(a, b, &a.coeffs, &b.coeffs, &packer, &max_q).expect("big integer arithmetic cannot overflow")
}

// Outer None: coefficient overflow, retry with big integers.
fn divide_packed<C: Coef>(
    a: &LaurentPolynomial,
    b: &LaurentPolynomial,
    ca: &[C],
    cb: &[C],
    p: &Packer,
    max_q: &[i64],
) -> Option<Result<LaurentPolynomial, DivError>> {
    let n = a.nvars;
    let max_b = b.max_exponents();
    let code_b: Vec<u128> = (0..b.len()).map(|t| partial_code(p, b.exponent(t), &max_b)).collect();
    let mut rem: BTreeMap<u128, C> = BTreeMap::new();
    for t in 0..a.len() {
        rem.insert(p.encode(a.exponent(t)), ca[t].clone());
    }
    let lead_b = b.len() - 1;
    let lead_e = b.exponent(lead_b).to_vec();
    let mut e = vec![0i64; n];
    let mut q_terms: Vec<(Vec<i64>, C)> = Vec::new();
    while let Some((&key, c)) = rem.iter().next_back() {
        let c = c.clone();
        p.decode(key, &mut e);
        let t: Vec<i64> = e.iter().zip(&lead_e).map(|(x, y)| x - y).collect();
        if t.iter().zip(max_q).any(|(&x, &m)| x < 0 || x > m) {
            return Some(Err(DivError::NotDivisible));
        }
        let Some(qc) = c.div_exact(&cb[lead_b])? else {
            return Some(Err(DivError::NotDivisible));
        };
        let code_t = partial_code(p, &t, max_q);
        for (tb, &kb) in code_b.iter().enumerate() {
            let k = code_t + kb;
            let entry = rem.entry(k).or_insert_with(C::czero);
            entry.sub_prod(&qc, &cb[tb])?;
            if entry.c_is_zero() {
                rem.remove(&k);
            }
        }
        q_terms.push((t, qc));
    }
    q_terms.reverse();
    let mut exps = Vec::with_capacity(q_terms.len() * n);
    let mut coeffs = Vec::with_capacity(q_terms.len());
    for (t, c) in q_terms {
        exps.extend_from_slice(&t);
        coeffs.push(c.into_big());
    }
    Some(Ok(LaurentPolynomial::from_sorted(n, exps, coeffs)))
}

// Code of a partial exponent relative to per-variable upper bounds `hi`, with
// all lower bounds zero.
fn partial_code(p: &Packer, e: &[i64], hi: &[i64]) -> u128 {
    let mut key: u128 = (e.iter().sum::<i64>() as u128) << p.deg_shift;
    for i in 0..e.len() {
        key += ((hi[i] - e[i]) as u128) << p.shifts[i];
    }
    key
}

fn poly_divide_generic(a: &LaurentPolynomial, b: &LaurentPolynomial) -> Result<LaurentPolynomial, DivError> {
    #[derive(PartialEq, Eq)]
    struct Key(Vec<i64>);
    impl PartialOrd for Key {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Key {
        fn cmp(&self, o: &Self) -> Ordering {
            cmp_monomial(&self.0, &o.0)
        }
    }
    let n = a.nvars;
    let max_q: Vec<i64> = a.max_exponents().iter().zip(b.max_exponents()).map(|(x, y)| x - y).collect();
    let mut rem: BTreeMap<Key, Integer> = a.terms().map(|(e, c)| (Key(e.to_vec()), c.clone())).collect();
    let lead = b.len() - 1;
    let mut q = Vec::new();
    while let Some((k, c)) = rem.iter().next_back() {
        let t: Vec<i64> = k.0.iter().zip(b.exponent(lead)).map(|(x, y)| x - y).collect();
        if t.iter().zip(&max_q).any(|(&x, &m)| x < 0 || x > m) {
            return Err(DivError::NotDivisible);
        }
        let (qc, r) = c.div_rem(&b.coeffs[lead]);
        if !r.is_zero() {
            return Err(DivError::NotDivisible);
        }
        for (eb, cb) in b.terms() {
            let key = Key(t.iter().zip(eb).map(|(x, y)| x + y).collect());
            let entry = rem.entry(key).or_default();
            *entry -= &qc * cb;
            if entry.is_zero() {
                let key = Key(t.iter().zip(eb).map(|(x, y)| x + y).collect());
                rem.remove(&key);
            }
        }
        q.push((t, qc));
    }
    Ok(LaurentPolynomial::from_terms(n, q))
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.s[start..self.pos]).unwrap())
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }
}

fn parse_poly(text: &str, nvars: usize) -> Result<LaurentPolynomial, Error> {
    let mut cur = Cursor { s: text.as_bytes(), pos: 0 };
    let mut terms = Vec::new();
    let mut negative = cur.eat(b'-');
    loop {
        let (e, mut c) = parse_term(&mut cur, nvars)?;
        if negative {
            c = -c;
        }
        terms.push((e, c));
        if cur.eat(b'+') {
            negative = false;
        } else if cur.eat(b'-') {
            negative = true;
        } else {
            break;
        }
    }
    if cur.peek().is_some() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(LaurentPolynomial::from_terms(nvars, terms))
}

fn parse_term(cur: &mut Cursor, nvars: usize) -> Result<(Vec<i64>, Integer), Error> {
    let mut e = vec![0i64; nvars];
    let mut c = Integer::one();
    loop {
        match cur.peek() {
            Some(b'x') => {
                cur.pos += 1;
                let idx: usize = cur
                    .digits()
                    .ok_or_else(|| cur.err("expected a variable index"))?
                    .parse()
                    .map_err(|_| cur.err("variable index too large"))?;
                if idx >= nvars {
                    return Err(cur.err(&format!("variable x{idx} outside a universe of {nvars}")));
                }
                let mut k = 1i64;
                if cur.eat(b'^') {
                    let neg = cur.eat(b'-');
                    k = cur
                        .digits()
                        .ok_or_else(|| cur.err("malformed exponent"))?
                        .parse()
                        .map_err(|_| cur.err("exponent too large"))?;
                    if neg {
                        k = -k;
                    }
                }
                e[idx] = checked_add_exp(e[idx], k);
            }
            Some(d) if d.is_ascii_digit() => {
                let v: Integer = cur.digits().unwrap().parse().unwrap();
                c *= v;
            }
            _ => return Err(cur.err("expected a coefficient or a variable")),
        }
        if !cur.eat(b'*') {
            return Ok((e, c));
        }
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|i| format!("x{i}")))
    }
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPolynomial[{}]({})", self.nvars, self)
    }
}

impl FromStr for LaurentPolynomial {
    type Err = Error;

    /// Infers the universe size from the largest variable index.
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut max = 0usize;
        let b = s.as_bytes();
        let mut i = 0;
        while i < b.len() {
            if b[i] == b'x' {
                let start = i + 1;
                let mut j = start;
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                if let Ok(v) = s[start..j].parse::<usize>() {
                    max = max.max(v + 1);
                }
                i = j;
            } else {
                i += 1;
            }
        }
        parse_poly(s, max)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&LaurentPolynomial> for &LaurentPolynomial {
            type Output = LaurentPolynomial;
            fn $method(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
                self.$imp(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<LaurentPolynomial> for LaurentPolynomial {
            type Output = LaurentPolynomial;
            fn $method(self, rhs: LaurentPolynomial) -> LaurentPolynomial {
                (&self).$imp(&rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        self.scale(&-Integer::one())
    }
}

impl Neg for LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        -&self
    }
}
