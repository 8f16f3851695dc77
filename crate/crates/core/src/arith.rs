//! Small integer helpers shared by the exact modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `floor(sqrt(n))` for `n >= 0`.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative number");
    n.sqrt()
}

/// Returns the square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

pub fn is_square(n: &BigInt) -> bool {
    exact_sqrt(n).is_some()
}

pub fn gcd3(a: &BigInt, b: &BigInt, c: &BigInt) -> BigInt {
    a.gcd(b).gcd(c)
}

/// Sign of `a + b*sqrt(d)` for `d > 0` non-square, decided with integers only.
pub fn sign_of(a: &BigInt, b: &BigInt, d: &BigInt) -> i32 {
    let sa = sgn(a);
    let sb = sgn(b);
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    // opposite signs: compare a^2 with b^2 d
    let lhs = a * a;
    let rhs = b * b * d;
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => sa,
        std::cmp::Ordering::Less => sb,
        // equality impossible for non-square d
        std::cmp::Ordering::Equal => 0,
    }
}

pub fn sgn(a: &BigInt) -> i32 {
    if a.is_positive() {
        1
    } else if a.is_negative() {
        -1
    } else {
        0
    }
}

/// Splits `n > 0` as `f^2 * k`, removing square factors found by trial division up to
/// `n^(1/3)` (capped at `limit`). When the cap is not hit the result is exact: the
/// cofactor left after trial division up to the cube root is 1, a prime, a product of
/// two distinct primes, or a prime square.
pub fn square_part(n: &BigInt, limit: u64) -> (BigInt, BigInt) {
    assert!(n.is_positive());
    let mut rest = n.clone();
    let mut kept = BigInt::one();
    let mut f = BigInt::one();
    let bound = rest.cbrt().to_u64().unwrap_or(u64::MAX).min(limit);
    let mut p: u64 = 2;
    while p <= bound {
        let bp = BigInt::from(p);
        if &bp * &bp * &bp > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        for _ in 0..e / 2 {
            f *= &bp;
        }
        if e % 2 == 1 {
            kept *= &bp;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if let Some(r) = exact_sqrt(&rest) {
        f *= r;
        rest = BigInt::one();
    }
    (f, kept * rest)
}

/// Prime factorisation of a machine integer by trial division.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree_u64(n: u64) -> bool {
    n > 0 && factor_u64(n).iter().all(|&(_, e)| e == 1)
}

pub fn is_squarefree(n: &BigInt) -> bool {
    if !n.is_positive() {
        return false;
    }
    match n.to_u64() {
        Some(v) => is_squarefree_u64(v),
        None => {
            let (f, _) = square_part(n, 10_000_000);
            f.is_one()
        }
    }
}

/// `floor(a / b)` for any nonzero `b`.
pub fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}
