//! Exact real quadratic irrationals and their periodic continued fractions.
//!
//! A [`QuadSurd`] is stored as `(P + sqrt(D)) / Q` with the divisibility condition
//! `Q | D - P^2`. Under that normalization the classical continued-fraction step
//! `a = floor(x)`, `P' = aQ - P`, `Q' = (D - P'^2) / Q` stays integral, so an
//! expansion is periodic exactly when a `(P, Q)` state recurs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, exact_sqrt, isqrt, sgn, sign_of, square_part};
use crate::error::{Error, Result};

/// Trial-division cap used when pulling square factors out of a radicand for display.
const DISPLAY_FACTOR_LIMIT: u64 = 1_000_000;

/// A 2x2 integer matrix acting on the line by fractional linear transformations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl IntMatrix2 {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        IntMatrix2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    /// `T = (1 1; 0 1)`.
    pub fn t() -> Self {
        Self::new(1, 1, 0, 1)
    }

    pub fn t_inv() -> Self {
        Self::new(1, -1, 0, 1)
    }

    /// `S = (0 -1; 1 0)`.
    pub fn s() -> Self {
        Self::new(0, -1, 1, 0)
    }

    /// The continued-fraction digit matrix `(a 1; 1 0)`.
    pub fn digit(a: &BigInt) -> Self {
        IntMatrix2 {
            a: a.clone(),
            b: BigInt::one(),
            c: BigInt::one(),
            d: BigInt::zero(),
        }
    }

    /// The shift matrix `(0 1; 1 -a)`, sending `x` to `1 / (x - a)`.
    pub fn shift(a: &BigInt) -> Self {
        IntMatrix2 {
            a: BigInt::zero(),
            b: BigInt::one(),
            c: BigInt::one(),
            d: -a,
        }
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn mul(&self, rhs: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2 {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    /// Inverse of a unimodular matrix. Returns `None` when `det` is not `+-1`.
    pub fn inverse(&self) -> Option<IntMatrix2> {
        let det = self.det();
        if det.abs() != BigInt::one() {
            return None;
        }
        Some(IntMatrix2 {
            a: &det * &self.d,
            b: -(&det * &self.b),
            c: -(&det * &self.c),
            d: &det * &self.a,
        })
    }

    pub fn neg(&self) -> IntMatrix2 {
        IntMatrix2 {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    pub fn transpose(&self) -> IntMatrix2 {
        IntMatrix2 {
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
    }

    pub fn pow(&self, n: u32) -> IntMatrix2 {
        let mut out = IntMatrix2::identity();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Numerical action on a point `(x, y)` of the upper half plane.
    pub fn act_complex(&self, x: f64, y: f64) -> (f64, f64) {
        let (a, b, c, d) = self.to_f64();
        // (a z + b) / (c z + d)
        let nr = a * x + b;
        let ni = a * y;
        let dr = c * x + d;
        let di = c * y;
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }

    pub fn to_f64(&self) -> (f64, f64, f64, f64) {
        (
            self.a.to_f64().unwrap_or(f64::NAN),
            self.b.to_f64().unwrap_or(f64::NAN),
            self.c.to_f64().unwrap_or(f64::NAN),
            self.d.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {};{} {})", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for IntMatrix2 {
    type Err = Error;

    /// Accepts `(a b;c d)` or `a,b,c,d`.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .map(|ch| match ch {
                '(' | ')' | ';' | ',' => ' ',
                other => other,
            })
            .collect();
        let parts: Vec<&str> = cleaned.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected four matrix entries in {s:?}")));
        }
        let v = parts
            .iter()
            .map(|p| parse_int(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix2::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()))
    }
}

pub(crate) fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    BigInt::from_str(t).map_err(|_| Error::Parse(format!("malformed integer {s:?}")))
}

/// A real quadratic irrational `(P + sqrt(D)) / Q` with `Q | D - P^2`.
#[derive(Clone, Debug)]
pub struct QuadSurd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
}

impl QuadSurd {
    /// Builds `(P + sqrt(D)) / Q`, rescaling by `|Q|` when `Q` does not divide `D - P^2`.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        let (p, q, d) = (p.into(), q.into(), d.into());
        if !d.is_positive() || arith::is_square(&d) {
            return Err(Error::SquareDiscriminant(d.to_string()));
        }
        if q.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Self::normalized(p, q, d))
    }

    fn normalized(p: BigInt, q: BigInt, d: BigInt) -> Self {
        if ((&d - &p * &p) % &q).is_zero() {
            QuadSurd { p, q, d }
        } else {
            let m = q.abs();
            QuadSurd {
                p: &p * &m,
                q: &q * &m,
                d: &d * &m * &m,
            }
        }
    }

    /// The value `(x + y sqrt(k)) / z` with `y != 0`.
    pub fn from_parts(x: &BigInt, y: &BigInt, k: &BigInt, z: &BigInt) -> Result<Self> {
        if y.is_zero() {
            return Err(Error::Parse("rational value is not a quadratic irrational".into()));
        }
        let d = y * y * k;
        if y.is_positive() {
            Self::new(x.clone(), z.clone(), d)
        } else {
            Self::new(-x, -z, d)
        }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// `(P - sqrt(D)) / Q`.
    pub fn galois_conjugate(&self) -> QuadSurd {
        QuadSurd {
            p: -&self.p,
            q: -&self.q,
            d: self.d.clone(),
        }
    }

    pub fn floor(&self) -> BigInt {
        floor_of(&self.p, &self.q, &self.d)
    }

    /// Sign of `x - n`.
    pub fn cmp_int(&self, n: &BigInt) -> std::cmp::Ordering {
        let s = sign_of(&(&self.p - n * &self.q), &BigInt::one(), &self.d) * sgn(&self.q);
        s.cmp(&0)
    }

    /// `x > 1` and `-1 < conj(x) < 0`, decided by integer sign tests.
    pub fn is_reduced(&self) -> bool {
        let one = BigInt::one();
        let gt_one = self.cmp_int(&one).is_gt();
        let conj = self.galois_conjugate();
        gt_one && conj.cmp_int(&BigInt::zero()).is_lt() && conj.cmp_int(&-one).is_gt()
    }

    /// Fractional linear action `(a x + b) / (c x + d)`.
    pub fn mobius_apply(&self, g: &IntMatrix2) -> QuadSurd {
        let (p, q, d) = (&self.p, &self.q, &self.d);
        let cp_dq = &g.c * p + &g.d * q;
        let x = (&g.a * p + &g.b * q) * &cp_dq - &g.a * &g.c * d;
        let n = &cp_dq * &cp_dq - &g.c * &g.c * d;
        let k = g.det() * q;
        if !k.is_zero() && (&x % &k).is_zero() && (&n % &k).is_zero() {
            Self::normalized(x / &k, n / &k, d.clone())
        } else {
            // singular or non-unimodular g: fall back to the generic rescaled form
            Self::from_parts(&x, &k, d, &n).expect("image of an irrational is irrational")
        }
    }

    /// `1 / (x - floor(x))`.
    pub fn cf_shift(&self) -> QuadSurd {
        let a = self.floor();
        let p2 = &a * &self.q - &self.p;
        let q2 = (&self.d - &p2 * &p2) / &self.q;
        QuadSurd {
            p: p2,
            q: q2,
            d: self.d.clone(),
        }
    }

    /// Exact rational norm `x * conj(x) = (P^2 - D) / Q^2` as a reduced fraction.
    pub fn norm(&self) -> (BigInt, BigInt) {
        reduce_fraction(&self.p * &self.p - &self.d, &self.q * &self.q)
    }

    /// Exact rational trace `x + conj(x) = 2P / Q`.
    pub fn trace(&self) -> (BigInt, BigInt) {
        reduce_fraction(&self.p * 2, self.q.clone())
    }

    /// Product in the common quadratic field, or `None` if the fields differ or the
    /// product is rational.
    pub fn checked_mul(&self, other: &QuadSurd) -> Option<QuadSurd> {
        // express other's radical in terms of sqrt(self.d): sqrt(D2) = (m / D1) sqrt(D1)
        let m = exact_sqrt(&(&self.d * &other.d))?;
        let d1 = &self.d;
        // x1 = (P1 + 1 sqrt D1) / Q1,  x2 = (P2 D1 + m sqrt D1) / (Q2 D1)
        let (x1, y1, z1) = (self.p.clone(), BigInt::one(), self.q.clone());
        let (x2, y2, z2) = (&other.p * d1, m, &other.q * d1);
        let x = &x1 * &x2 + &y1 * &y2 * d1;
        let y = &x1 * &y2 + &y1 * &x2;
        let z = z1 * z2;
        Self::from_parts(&x, &y, d1, &z).ok()
    }

    pub fn square(&self) -> Option<QuadSurd> {
        self.checked_mul(self)
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        let root = self.d.to_f64().unwrap_or(f64::NAN).sqrt();
        if self.p.is_negative() {
            // avoid cancellation in P + sqrt(D)
            let diff = (&self.p * &self.p - &self.d).to_f64().unwrap_or(f64::NAN);
            diff / (p - root) / q
        } else {
            (p + root) / q
        }
    }

    /// Decimal expansion truncated toward zero after `digits` places, computed exactly.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let p = &self.p * &scale;
        let d = &self.d * &scale * &scale;
        let negative = self.cmp_int(&BigInt::zero()).is_lt();
        let m = if negative {
            -floor_of(&p, &-&self.q, &d)
        } else {
            floor_of(&p, &self.q, &d)
        };
        let (int_part, frac) = m.abs().div_rem(&scale);
        let sign = if negative { "-" } else { "" };
        if digits == 0 {
            return format!("{sign}{int_part}");
        }
        format!("{sign}{int_part}.{:0>width$}", frac.to_string(), width = digits as usize)
    }

    /// `(rational, coefficient, radicand, denominator)` with the radicand's square
    /// factors pulled out as far as trial division allows and a positive denominator.
    pub fn simplified(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let (f, k) = square_part(&self.d, DISPLAY_FACTOR_LIMIT);
        let (mut x, mut y, mut z) = (self.p.clone(), f, self.q.clone());
        let g = x.gcd(&y).gcd(&z);
        x /= &g;
        y /= &g;
        z /= &g;
        if z.is_negative() {
            x = -x;
            y = -y;
            z = -z;
        }
        (x, y, k, z)
    }
}

impl PartialEq for QuadSurd {
    fn eq(&self, other: &Self) -> bool {
        sgn(&self.q) == sgn(&other.q)
            && &self.p * &other.q == &other.p * &self.q
            && &self.d * &other.q * &other.q == &other.d * &self.q * &self.q
    }
}

impl Eq for QuadSurd {}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y, k, z) = self.simplified();
        let radical = if y.abs().is_one() {
            format!("sqrt({k})")
        } else {
            format!("{}*sqrt({k})", y.abs())
        };
        let num = if x.is_zero() {
            if y.is_negative() {
                format!("-{radical}")
            } else {
                radical
            }
        } else {
            let op = if y.is_negative() { '-' } else { '+' };
            format!("{x}{op}{radical}")
        };
        if z.is_one() {
            write!(f, "{num}")
        } else {
            write!(f, "({num})/{z}")
        }
    }
}

impl FromStr for QuadSurd {
    type Err = Error;

    /// Parses `(P+C*sqrt(D))/R` and its abbreviations (`sqrt(2)`, `1+sqrt(2)`,
    /// `(-7-2*sqrt(6))/5`). Whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (num, den) = match t.rfind(")/") {
            Some(pos) if t.starts_with('(') => (&t[1..pos], parse_int(&t[pos + 2..])?),
            _ => (t.as_str(), BigInt::one()),
        };
        let start = num
            .find("sqrt(")
            .ok_or_else(|| Error::Parse(format!("no sqrt term in {s:?}")))?;
        let close = num[start..]
            .find(')')
            .map(|i| i + start)
            .ok_or_else(|| Error::Parse(format!("unclosed sqrt in {s:?}")))?;
        let radicand = parse_int(&num[start + 5..close])?;
        let prefix = &num[..start];
        let suffix = &num[close + 1..];

        let (mut rational, coeff) = if let Some(pre) = prefix.strip_suffix('*') {
            // coefficient is the trailing signed integer of the prefix
            let split = pre.rfind(['+', '-']).unwrap_or(0);
            let (r, c) = pre.split_at(split);
            let r = if r.is_empty() { BigInt::zero() } else { parse_int(r)? };
            (r, parse_int(c)?)
        } else {
            match prefix.chars().last() {
                None => (BigInt::zero(), BigInt::one()),
                Some('+') | Some('-') => {
                    let neg = prefix.ends_with('-');
                    let r = &prefix[..prefix.len() - 1];
                    let r = if r.is_empty() { BigInt::zero() } else { parse_int(r)? };
                    (r, if neg { -BigInt::one() } else { BigInt::one() })
                }
                Some(_) => return Err(Error::Parse(format!("malformed surd {s:?}"))),
            }
        };
        if !suffix.is_empty() {
            if !rational.is_zero() {
                return Err(Error::Parse(format!("two rational parts in {s:?}")));
            }
            rational = parse_int(suffix)?;
        }
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        if coeff.is_zero() {
            return Err(Error::Parse(format!("zero coefficient in {s:?}")));
        }
        if !radicand.is_positive() || arith::is_square(&radicand) {
            return Err(Error::SquareDiscriminant(radicand.to_string()));
        }
        QuadSurd::from_parts(&rational, &coeff, &radicand, &den)
    }
}

fn reduce_fraction(n: BigInt, d: BigInt) -> (BigInt, BigInt) {
    let g = n.gcd(&d);
    let (mut n, mut d) = (n / &g, d / &g);
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    (n, d)
}

/// `floor((P + sqrt(D)) / Q)` for non-square `D > 0`, exact.
fn floor_of(p: &BigInt, q: &BigInt, d: &BigInt) -> BigInt {
    let s = isqrt(d);
    if q.is_positive() {
        (p + &s).div_floor(q)
    } else {
        // n <= (P + sqrt D)/Q  <=>  n|Q| <= -P - sqrt D  <=>  n|Q| <= -P - s - 1
        (-p - &s - 1u32).div_floor(&-q)
    }
}

/// An eventually periodic simple continued fraction `[pre; (period)]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CFExpansion {
    preperiod: Vec<BigInt>,
    period: Vec<BigInt>,
}

impl CFExpansion {
    /// Validates the digits and brings the expansion to minimal form: primitive
    /// period, shortest preperiod.
    pub fn new(preperiod: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidDigit("empty period".into()));
        }
        if let Some(bad) = period.iter().find(|a| !a.is_positive()) {
            return Err(Error::InvalidDigit(bad.to_string()));
        }
        if let Some(bad) = preperiod.iter().skip(1).find(|a| !a.is_positive()) {
            return Err(Error::InvalidDigit(bad.to_string()));
        }
        let mut period = primitive_root(&period).to_vec();
        let mut preperiod = preperiod;
        while let Some(last) = preperiod.last() {
            if last != period.last().unwrap() {
                break;
            }
            preperiod.pop();
            period.rotate_right(1);
        }
        Ok(CFExpansion { preperiod, period })
    }

    pub fn periodic(period: Vec<BigInt>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    pub fn preperiod(&self) -> &[BigInt] {
        &self.preperiod
    }

    pub fn period(&self) -> &[BigInt] {
        &self.period
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }

    /// First `n` partial quotients.
    pub fn digits(&self, n: usize) -> Vec<BigInt> {
        self.preperiod
            .iter()
            .chain(self.period.iter().cycle())
            .take(n)
            .cloned()
            .collect()
    }
}

impl fmt::Display for CFExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let per = join(&self.period);
        match self.preperiod.split_first() {
            None => write!(f, "[({per})]"),
            Some((a0, rest)) if rest.is_empty() => write!(f, "[{a0};({per})]"),
            Some((a0, rest)) => write!(f, "[{a0};{},({per})]", join(rest)),
        }
    }
}

fn join(v: &[BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl FromStr for CFExpansion {
    type Err = Error;

    /// Parses `[a0;a1,...,(p1,...,pk)]`; `[(p1,...,pk)]` for purely periodic values.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected [...] in {s:?}")))?;
        let open = inner
            .find('(')
            .ok_or_else(|| Error::Parse(format!("missing period in {s:?}")))?;
        let per_str = inner[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("unterminated period in {s:?}")))?;
        let pre_str = inner[..open].trim_end_matches(',');
        let pre = if pre_str.is_empty() {
            Vec::new()
        } else {
            pre_str
                .split([';', ','])
                .filter(|x| !x.is_empty())
                .map(parse_int)
                .collect::<Result<Vec<_>>>()?
        };
        let per = per_str.split(',').map(parse_int).collect::<Result<Vec<_>>>()?;
        CFExpansion::new(pre, per)
    }
}

/// Shortest word `u` with `w = u^k`.
pub fn primitive_root<T: PartialEq>(w: &[T]) -> &[T] {
    let n = w.len();
    for len in 1..n {
        if n.is_multiple_of(len) && (len..n).all(|i| w[i] == w[i - len]) {
            return &w[..len];
        }
    }
    w
}

/// Exact eventually periodic expansion; periodicity is detected when a `(P, Q)` state recurs.
pub fn cf_expand(x: &QuadSurd) -> CFExpansion {
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut cur = x.clone();
    loop {
        let key = (cur.p.clone(), cur.q.clone());
        if let Some(&start) = seen.get(&key) {
            let period = digits.split_off(start);
            // states determine tails, so the first recurrence is already minimal
            return CFExpansion {
                preperiod: digits,
                period,
            };
        }
        seen.insert(key, digits.len());
        digits.push(cur.floor());
        cur = cur.cf_shift();
    }
}

/// Product of the digit matrices `(a 1; 1 0)`; determinant `(-1)^len`.
pub fn cf_to_matrix(digits: &[BigInt]) -> IntMatrix2 {
    digits
        .iter()
        .fold(IntMatrix2::identity(), |m, a| m.mul(&IntMatrix2::digit(a)))
}

/// The unique surd with the given expansion.
pub fn cf_eval(e: &CFExpansion) -> QuadSurd {
    let m = cf_to_matrix(&e.period);
    // y = (p y + q) / (r y + s):  r y^2 + (s - p) y - q = 0, take the positive root
    let ps = &m.a - &m.d;
    let disc = &ps * &ps + BigInt::from(4) * &m.b * &m.c;
    let y = QuadSurd::new(ps, &m.c * 2, disc).expect("periodic expansion is irrational");
    y.mobius_apply(&cf_to_matrix(&e.preperiod))
}

/// Shifts `x` until it is reduced, using an even number of shifts so the recorded
/// transform has determinant 1. Returns `(gamma * x, gamma)`.
pub fn reduce_even(x: &QuadSurd) -> (QuadSurd, IntMatrix2) {
    let mut gamma = IntMatrix2::identity();
    let mut cur = x.clone();
    let mut steps = 0usize;
    while !cur.is_reduced() || steps % 2 == 1 {
        let a = cur.floor();
        gamma = IntMatrix2::shift(&a).mul(&gamma);
        cur = cur.cf_shift();
        steps += 1;
    }
    (cur, gamma)
}
