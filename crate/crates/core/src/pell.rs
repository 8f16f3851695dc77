//! Least solutions of `T^2 - D S^2 = +-4` and the fundamental unit.
//!
//! The solutions are read off the continued-fraction period of the principal reduced
//! root `(b + sqrt D) / 2`: the period matrix `(p q; r s)` is an automorph of the
//! principal form, so its trace is `t` and its lower-left entry is `s`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, exact_sqrt, isqrt};
use crate::error::{Error, Result};
use crate::surd::{cf_expand, cf_to_matrix, QuadSurd};

/// Brute-force searches below this `s` are cheap enough to run as a cross-check.
pub const BRUTE_FORCE_LIMIT: u64 = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PellSolution {
    pub t: BigInt,
    pub s: BigInt,
    /// `+4` or `-4`.
    pub sign: i32,
    /// `(t + s sqrt D) / 2`.
    pub epsilon: QuadSurd,
}

fn check(d: &BigInt) -> Result<()> {
    let r = d.mod_floor(&BigInt::from(4));
    if !d.is_positive() || !(r.is_zero() || r.is_one()) || arith::is_square(d) {
        return Err(Error::BadDiscriminant(d.to_string()));
    }
    Ok(())
}

fn solution(d: &BigInt, t: BigInt, s: BigInt, sign: i32) -> PellSolution {
    let epsilon = QuadSurd::from_parts(&t, &s, d, &BigInt::from(2)).expect("s > 0");
    PellSolution { t, s, sign, epsilon }
}

/// `(t, s, period_len)` from the period of the principal reduced root.
fn period_solution(d: &BigInt) -> (BigInt, BigInt, usize) {
    let root = isqrt(d);
    // largest b < sqrt D with b = D (mod 2)
    let b = if (&root - d).is_even() { root } else { root - 1u32 };
    let x = QuadSurd::new(b, 2, d.clone()).expect("checked discriminant");
    let e = cf_expand(&x);
    debug_assert!(e.is_purely_periodic());
    let m = cf_to_matrix(e.period());
    (m.trace(), m.c, e.period().len())
}

/// Least positive `(t, s)` with `t^2 - D s^2 = 4`.
pub fn solve_pell4(d: &BigInt) -> Result<PellSolution> {
    check(d)?;
    let (t, s, len) = period_solution(d);
    let (t, s) = if len % 2 == 1 {
        // square of the -4 unit: trace t^2 + 2, lower-left t s
        (&t * &t + 2u32, &t * &s)
    } else {
        (t, s)
    };
    Ok(solution(d, t, s, 4))
}

/// Least positive `(t, s)` with `t^2 - D s^2 = -4`, if one exists.
pub fn solve_pell_neg4(d: &BigInt) -> Result<Option<PellSolution>> {
    check(d)?;
    let (t, s, len) = period_solution(d);
    Ok((len % 2 == 1).then(|| solution(d, t, s, -4)))
}

/// The fundamental unit `eps_D = (t + s sqrt D) / 2` of norm 1.
pub fn unit(d: &BigInt) -> Result<QuadSurd> {
    Ok(solve_pell4(d)?.epsilon)
}

/// Least `s` in `1..=s_max` with `D s^2 + sign` a perfect square `t^2`, by direct search.
pub fn pell_brute(d: &BigInt, sign: i32, s_max: u64) -> Option<(BigInt, BigInt)> {
    (1..=s_max).find_map(|s| {
        let s = BigInt::from(s);
        let t2 = d * &s * &s + BigInt::from(sign);
        exact_sqrt(&t2).filter(|t| t.is_positive()).map(|t| (t, s))
    })
}

/// Re-derives a solution by brute force when `s` is small enough, returning whether the
/// two routes agree (vacuously true for large `s`).
pub fn cross_check(d: &BigInt, sol: &PellSolution) -> bool {
    match sol.s.to_u64() {
        Some(s) if s < BRUTE_FORCE_LIMIT => {
            pell_brute(d, sol.sign, s) == Some((sol.t.clone(), sol.s.clone()))
        }
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn ts(p: &PellSolution) -> (BigInt, BigInt) {
        (p.t.clone(), p.s.clone())
    }

    #[test]
    fn plus_four() {
        assert_eq!(ts(&solve_pell4(&b(28)).unwrap()), (b(16), b(3)));
        assert_eq!(
            ts(&solve_pell4(&b(1337)).unwrap()),
            (b(2_734_863_294), b(74_794_544))
        );
        assert_eq!(ts(&solve_pell4(&b(5)).unwrap()), (b(3), b(1)));
        assert_eq!(pell_brute(&b(5), 4, 10), Some((b(3), b(1))));
        assert!(matches!(solve_pell4(&b(7)), Err(Error::BadDiscriminant(_))));
        assert!(matches!(solve_pell4(&b(16)), Err(Error::BadDiscriminant(_))));
        assert!(matches!(solve_pell4(&b(-20)), Err(Error::BadDiscriminant(_))));
    }

    #[test]
    fn minus_four() {
        let eta = solve_pell_neg4(&b(5)).unwrap().unwrap();
        assert_eq!(ts(&eta), (b(1), b(1)));
        assert_eq!(eta.epsilon, "(1+sqrt(5))/2".parse().unwrap());
        assert_eq!(pell_brute(&b(5), -4, 10), Some((b(1), b(1))));
        assert!(solve_pell_neg4(&b(28)).unwrap().is_none());
        assert_eq!(ts(&solve_pell_neg4(&b(8)).unwrap().unwrap()), (b(2), b(1)));
    }

    #[test]
    fn units() {
        assert_eq!(unit(&b(5)).unwrap(), "(3+sqrt(5))/2".parse().unwrap());
        assert_eq!(unit(&b(28)).unwrap(), "8+3*sqrt(7)".parse().unwrap());
        assert_eq!(unit(&b(21)).unwrap(), "(5+sqrt(21))/2".parse().unwrap());
        for t in 3i64..60 {
            let d = t * t - 4;
            assert_eq!(ts(&solve_pell4(&b(d)).unwrap()), (b(t), b(1)), "D={d}");
        }
    }

    #[test]
    fn brute_force_agreement_below_limit() {
        for d in (5i64..3000).filter(|d| d % 4 < 2) {
            let d = b(d);
            if arith::is_square(&d) {
                continue;
            }
            let sol = solve_pell4(&d).unwrap();
            assert!(cross_check(&d, &sol), "D={d}");
            if let Some(neg) = solve_pell_neg4(&d).unwrap() {
                assert!(cross_check(&d, &neg), "D={d}");
            } else {
                let bound = sol.s.to_u64().map_or(BRUTE_FORCE_LIMIT, |s| s.min(BRUTE_FORCE_LIMIT));
                assert_eq!(pell_brute(&d, -4, bound), None, "D={d}");
            }
        }
    }

    proptest! {
        #[test]
        fn solution_laws(k in 5i64..10_000) {
            let d = b(k);
            prop_assume!(check(&d).is_ok());
            let sol = solve_pell4(&d).unwrap();
            prop_assert_eq!(&sol.t * &sol.t - &d * &sol.s * &sol.s, b(4));
            // no smaller s solves the equation (searched up to 2 * 10^4)
            let below = sol.s.to_u64().map_or(20_000, |s| (s - 1).min(20_000));
            prop_assert!(pell_brute(&d, 4, below).is_none());
            prop_assert!(sol.epsilon.cmp_int(&BigInt::one()).is_gt());
            prop_assert_eq!(sol.epsilon.norm(), (b(1), b(1)));
            if let Some(neg) = solve_pell_neg4(&d).unwrap() {
                prop_assert_eq!(&neg.t * &neg.t - &d * &neg.s * &neg.s, b(-4));
                prop_assert_eq!(neg.epsilon.square().unwrap(), sol.epsilon.clone());
                prop_assert_eq!(neg.epsilon.norm(), (b(-1), b(1)));
            }
        }
    }
}
