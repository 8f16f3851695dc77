//! Integral binary quadratic forms `Ax^2 + Bxy + Cy^2`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{self, gcd3, isqrt};
use crate::error::{Error, Result};
use crate::surd::{cf_expand, parse_int, reduce_even, IntMatrix2, QuadSurd};

/// The form `Ax^2 + Bxy + Cy^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl Form {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Form {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    pub fn is_primitive(&self) -> bool {
        gcd3(&self.a, &self.b, &self.c).is_one()
    }

    /// `Q'(x, y) = Q(ax + by, cx + dy)` for `det g = 1`.
    pub fn apply_transform(&self, g: &IntMatrix2) -> Result<Form> {
        let det = g.det();
        if !det.is_one() {
            return Err(Error::NotProper(det.to_string()));
        }
        Ok(self.substitute(g))
    }

    /// The same substitution without the determinant check (extended equivalence).
    pub fn substitute(&self, g: &IntMatrix2) -> Form {
        let (a, b, c, d) = (&g.a, &g.b, &g.c, &g.d);
        let (fa, fb, fc) = (&self.a, &self.b, &self.c);
        Form {
            a: fa * a * a + fb * a * c + fc * c * c,
            b: BigInt::from(2) * fa * a * b + fb * (a * d + b * c) + BigInt::from(2) * fc * c * d,
            c: fa * b * b + fb * b * d + fc * d * d,
        }
    }

    /// `(-B + sqrt(D)) / (2A)`.
    pub fn root(&self) -> Result<QuadSurd> {
        if self.a.is_zero() {
            return Err(Error::LeadingZero);
        }
        let d = self.discriminant();
        if !d.is_positive() || arith::is_square(&d) {
            return Err(Error::SquareDiscriminant(d.to_string()));
        }
        QuadSurd::new(-&self.b, &self.a * 2, d)
    }

    /// The primitive form whose root (in the sense of [`Form::root`]) is `x`.
    pub fn from_root(x: &QuadSurd) -> Form {
        let (p, q, d) = (x.p(), x.q(), x.d());
        let a = q.clone();
        let b: BigInt = -(p * BigInt::from(2));
        let c = (p * p - d) / q;
        let g = gcd3(&a, &b, &c);
        Form {
            a: a / &g,
            b: b / &g,
            c: c / &g,
        }
    }

    /// `[A, -B, C]`, the image under `(x, y) -> (x, -y)`.
    pub fn reversed(&self) -> Form {
        Form::new(self.a.clone(), -&self.b, self.c.clone())
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected [A,B,C], got {s:?}")))?;
        let v = inner.split(',').map(parse_int).collect::<Result<Vec<_>>>()?;
        if v.len() != 3 {
            return Err(Error::Parse(format!("expected three coefficients in {s:?}")));
        }
        Ok(Form::new(v[0].clone(), v[1].clone(), v[2].clone()))
    }
}

pub fn discriminant(f: &Form) -> BigInt {
    f.discriminant()
}

fn check_discriminant(d: &BigInt) -> Result<()> {
    let r = d.mod_floor(&BigInt::from(4));
    if !(r.is_zero() || r.is_one()) || arith::is_square(d) {
        return Err(Error::BadDiscriminant(d.to_string()));
    }
    Ok(())
}

/// Fundamental: `D = 1 (mod 4)` squarefree, or `4 | D` with `D/4 = 2, 3 (mod 4)` squarefree.
pub fn is_fundamental(d: &BigInt) -> bool {
    if d.is_zero() || d.is_one() {
        return false;
    }
    let four = BigInt::from(4);
    let r = d.mod_floor(&four);
    if r.is_one() {
        return arith::is_squarefree(&d.abs());
    }
    if r.is_zero() {
        let m = d / &four;
        let rm = m.mod_floor(&four);
        return (rm == BigInt::from(2) || rm == BigInt::from(3)) && arith::is_squarefree(&m.abs());
    }
    false
}

/// Reduces a positive definite form to `|B| <= A <= C` (with `B >= 0` on the boundary).
/// Returns `(r, g)` with `r = f o g`.
pub fn reduce_definite(f: &Form) -> Result<(Form, IntMatrix2)> {
    let d = f.discriminant();
    if !d.is_negative() {
        return Err(Error::WrongSign(format!("discriminant {d} is not negative")));
    }
    if !f.a.is_positive() {
        return Err(Error::WrongSign(format!("{f} is negative definite")));
    }
    let mut cur = f.clone();
    let mut g = IntMatrix2::identity();
    loop {
        let two_a = &cur.a * 2;
        let k = (&cur.a - &cur.b).div_floor(&two_a);
        if !k.is_zero() {
            let t = IntMatrix2::new(1, k, 0, 1);
            cur = cur.substitute(&t);
            g = g.mul(&t);
        }
        if cur.a > cur.c || (cur.a == cur.c && cur.b.is_negative()) {
            cur = cur.substitute(&IntMatrix2::s());
            g = g.mul(&IntMatrix2::s());
        } else {
            return Ok((cur, g));
        }
    }
}

/// All primitive reduced forms of a positive non-square discriminant, in lexicographic
/// order of `(A, B, C)`.
pub fn enumerate_reduced_indefinite(d: &BigInt) -> Result<Vec<Form>> {
    check_discriminant(d)?;
    if !d.is_positive() {
        return Err(Error::BadDiscriminant(d.to_string()));
    }
    let dd = d
        .to_i128()
        .filter(|v| *v < 1i128 << 62)
        .ok_or_else(|| Error::BadDiscriminant(format!("{d} is too large to enumerate")))?;
    let s = isqrt(d).to_i128().unwrap();
    let mut out = Vec::new();
    // 0 < -B < sqrt D and sqrt D + B < 2A < sqrt D - B; with s = floor(sqrt D) these
    // become s + B < 2A <= s - B
    for nb in 1..=s {
        if (nb * nb - dd) % 4 != 0 {
            continue;
        }
        let b = -nb;
        let ac = (b * b - dd) / 4;
        let lo = (s + b) / 2 + 1;
        let hi = (s - b) / 2;
        for a in lo.max(1)..=hi {
            if ac % a != 0 {
                continue;
            }
            let f = Form::new(a, b, ac / a);
            if f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Positive definite reduced forms of a negative discriminant.
pub fn enumerate_reduced_definite(d: &BigInt) -> Result<Vec<Form>> {
    check_discriminant(d)?;
    if !d.is_negative() {
        return Err(Error::BadDiscriminant(d.to_string()));
    }
    let dd = d
        .to_i128()
        .filter(|v| -*v < 1i128 << 62)
        .ok_or_else(|| Error::BadDiscriminant(format!("{d} is too large to enumerate")))?;
    let amax = isqrt(&BigInt::from(-dd / 3)).to_i128().unwrap();
    let mut out = Vec::new();
    for a in 1..=amax {
        for b in (1 - a)..=a {
            let num = b * b - dd;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            let f = Form::new(a, b, c);
            if f.is_primitive() {
                out.push(f);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// One narrow equivalence class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormClass {
    /// Least reduced form of the class in `(A, B, C)` order.
    pub rep: Form,
    /// Reduced forms of the class, in cycle order starting from `rep`. A single form
    /// for negative discriminants.
    pub cycle: Vec<Form>,
    /// Period of the continued fraction of `rep.root()`; empty for negative discriminants.
    pub period: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGroupListing {
    pub discriminant: BigInt,
    pub classes: Vec<FormClass>,
    pub h: usize,
}

/// Reduced forms in the cycle of the reduced form `f`, following even shifts of the
/// root; every shift when the period is odd.
pub fn reduced_cycle(f: &Form) -> Result<Vec<Form>> {
    let root = f.root()?;
    if !root.is_reduced() {
        return Err(Error::Parse(format!("{f} is not reduced")));
    }
    let len = cf_expand(&root).period().len();
    let steps = if len.is_multiple_of(2) { len / 2 } else { len };
    let mut out = Vec::with_capacity(steps);
    let mut x = root;
    for _ in 0..steps {
        out.push(Form::from_root(&x));
        x = x.cf_shift().cf_shift();
    }
    Ok(out)
}

pub fn class_group(d: &BigInt) -> Result<ClassGroupListing> {
    check_discriminant(d)?;
    let classes = if d.is_negative() {
        enumerate_reduced_definite(d)?
            .into_iter()
            .map(|f| FormClass {
                rep: f.clone(),
                cycle: vec![f],
                period: Vec::new(),
            })
            .collect::<Vec<_>>()
    } else {
        let mut remaining: BTreeSet<Form> = enumerate_reduced_indefinite(d)?.into_iter().collect();
        let mut classes = Vec::new();
        // forms come out in lexicographic order, so the first unclaimed one is the rep
        while let Some(rep) = remaining.iter().next().cloned() {
            let cycle = reduced_cycle(&rep)?;
            for f in &cycle {
                remaining.remove(f);
            }
            let period = cf_expand(&rep.root()?).period().to_vec();
            classes.push(FormClass { rep, cycle, period });
        }
        classes
    };
    Ok(ClassGroupListing {
        discriminant: d.clone(),
        h: classes.len(),
        classes,
    })
}

/// A `det 1` transform `gamma` with `f1 = f2 o gamma`, if the forms are properly equivalent.
pub fn is_equivalent(f1: &Form, f2: &Form) -> Option<IntMatrix2> {
    let d = f1.discriminant();
    if d != f2.discriminant() || d.is_zero() || arith::is_square(&d) {
        return None;
    }
    let gamma = if d.is_negative() {
        if f1.a.is_positive() != f2.a.is_positive() {
            return None;
        }
        // negative definite forms reduce through their negatives
        let (p1, p2) = if f1.a.is_positive() {
            (f1.clone(), f2.clone())
        } else {
            (neg(f1), neg(f2))
        };
        let (r1, g1) = reduce_definite(&p1).ok()?;
        let (r2, g2) = reduce_definite(&p2).ok()?;
        if r1 != r2 {
            return None;
        }
        // f1 o g1 = f2 o g2
        g2.mul(&g1.inverse()?)
    } else {
        let (x1, h1) = reduce_even(&f1.root().ok()?);
        let (x2, h2) = reduce_even(&f2.root().ok()?);
        let len = cf_expand(&x2).period().len();
        let steps = if len.is_multiple_of(2) { len / 2 } else { len };
        let mut delta = IntMatrix2::identity();
        let mut y = x2;
        let mut found = false;
        for _ in 0..steps {
            if y == x1 {
                found = true;
                break;
            }
            let a0 = y.floor();
            y = y.cf_shift();
            let a1 = y.floor();
            y = y.cf_shift();
            delta = IntMatrix2::shift(&a1).mul(&IntMatrix2::shift(&a0)).mul(&delta);
        }
        if !found {
            return None;
        }
        // roots: x1 = h1 r1, x2 = h2 r2, x1 = delta x2, and root(f o g) = g^-1 root(f)
        h2.inverse()?.mul(&delta.inverse()?).mul(&h1)
    };
    debug_assert_eq!(f2.substitute(&gamma), *f1);
    Some(gamma)
}

/// Equivalence under `GL2(Z)` acting by `f -> det(g) * (f o g)`, so that a single
/// continued-fraction shift of the root is a symmetry. Returns `gamma` with
/// `f1 = det(gamma) * (f2 o gamma)`; forms that are not properly equivalent get a
/// determinant `-1` witness.
pub fn is_equivalent_gl2(f1: &Form, f2: &Form) -> Option<IntMatrix2> {
    if let Some(g) = is_equivalent(f1, f2) {
        return Some(g);
    }
    let r = IntMatrix2::new(1, 0, 0, -1);
    // -(f2 o r) = [-A, B, -C]; f1 = -(f2 o r) o g = -(f2 o (r g))
    is_equivalent(f1, &neg(&f2.reversed())).map(|g| r.mul(&g))
}

/// `det(g) * (f o g)`.
pub fn twisted_substitute(f: &Form, g: &IntMatrix2) -> Form {
    let h = f.substitute(g);
    if g.det().is_negative() {
        neg(&h)
    } else {
        h
    }
}

fn neg(f: &Form) -> Form {
    Form::new(-&f.a, -&f.b, -&f.c)
}

/// The least even rotation of a cyclic word (every rotation when the length is odd).
pub fn least_even_rotation<T: Ord + Clone>(w: &[T]) -> Vec<T> {
    let n = w.len();
    let step = if n.is_multiple_of(2) { 2 } else { 1 };
    (0..n)
        .step_by(step)
        .map(|k| {
            let mut r = w.to_vec();
            r.rotate_left(k);
            r
        })
        .min()
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surd::cf_eval;
    use crate::surd::CFExpansion;
    use proptest::prelude::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn f(a: i64, bb: i64, c: i64) -> Form {
        Form::new(a, bb, c)
    }

    #[test]
    fn discriminants() {
        assert_eq!(f(2, -2, -3).discriminant(), b(28));
        assert_eq!(f(1, 0, 5).discriminant(), b(-20));
        assert_eq!(f(4, -4, -5).discriminant(), b(96));
    }

    #[test]
    fn transforms() {
        let m = IntMatrix2::new(0, 1, 1, -1).mul(&IntMatrix2::new(0, 1, 1, -1));
        let q3 = f(2, -2, -3).apply_transform(&m.inverse().unwrap()).unwrap();
        assert_eq!(q3, f(1, -4, -3));
        assert_eq!(f(3, 5, -7).apply_transform(&IntMatrix2::identity()).unwrap(), f(3, 5, -7));
        let gamma = IntMatrix2::new(2, 5, -3, -7);
        assert_eq!(f(4, -4, -5).apply_transform(&gamma).unwrap(), f(-5, -14, -5));
        assert!(matches!(
            f(1, 0, 1).apply_transform(&IntMatrix2::new(0, 1, 1, 0)),
            Err(Error::NotProper(_))
        ));
    }

    #[test]
    fn roots() {
        let r = f(2, -2, -3).root().unwrap();
        assert_eq!(r, QuadSurd::new(2, 4, 28).unwrap());
        assert_eq!(cf_expand(&r).period(), [b(1), b(1), b(4), b(1)].as_slice());
        assert_eq!(f(1, 0, -2).root().unwrap(), "sqrt(2)".parse().unwrap());
        let w1: Vec<BigInt> = [8, 1, 17, 2, 1, 1, 3, 1, 35, 1, 3, 1, 1, 2, 17, 1, 8, 5].map(b).to_vec();
        let e = cf_expand(&f(4, -35, -7).root().unwrap());
        assert!(e.is_purely_periodic());
        assert_eq!(e.period(), w1.as_slice());
        let mut w2 = w1.clone();
        w2.rotate_right(1);
        let e = cf_expand(&f(7, -35, -4).root().unwrap());
        assert_eq!(e.period(), w2.as_slice());
        assert!(matches!(f(0, 1, 1).root(), Err(Error::LeadingZero)));
        assert!(matches!(f(1, 0, -4).root(), Err(Error::SquareDiscriminant(_))));
        assert_eq!(Form::from_root(&f(6, 10, -3).root().unwrap()), f(6, 10, -3));
    }

    #[test]
    fn definite_reduction() {
        let (r, g) = reduce_definite(&f(1, 0, 5)).unwrap();
        assert_eq!((r, g), (f(1, 0, 5), IntMatrix2::identity()));
        assert_eq!(reduce_definite(&f(2, 2, 3)).unwrap().0, f(2, 2, 3));
        assert_eq!(reduce_definite(&f(2, -2, 3)).unwrap().0, f(2, 2, 3));
        let (r, g) = reduce_definite(&f(5, 14, 10)).unwrap();
        assert_eq!(r, f(1, 0, 1));
        assert_eq!(f(5, 14, 10).apply_transform(&g).unwrap(), r);
        assert!(matches!(reduce_definite(&f(1, 3, 1)), Err(Error::WrongSign(_))));
    }

    #[test]
    fn brute_force_definite_oracle() {
        // [5,14,10] against the reduced form found by scanning small unimodular matrices
        let target = f(5, 14, 10);
        let mut best: Option<Form> = None;
        for a in -4i64..=4 {
            for bb in -4i64..=4 {
                for c in -4i64..=4 {
                    for d in -4i64..=4 {
                        if a * d - bb * c != 1 {
                            continue;
                        }
                        let g = target.substitute(&IntMatrix2::new(a, bb, c, d));
                        if g.b.abs() <= g.a && g.a <= g.c && (best.is_none() || Some(&g) < best.as_ref()) {
                            best = Some(g);
                        }
                    }
                }
            }
        }
        assert_eq!(best.unwrap(), reduce_definite(&target).unwrap().0);
    }

    #[test]
    fn reduced_indefinite_lists() {
        let got = enumerate_reduced_indefinite(&b(28)).unwrap();
        assert_eq!(got, vec![f(1, -4, -3), f(2, -2, -3), f(3, -4, -1), f(3, -2, -2)]);
        assert_eq!(enumerate_reduced_indefinite(&b(5)).unwrap(), vec![f(1, -1, -1)]);
        assert!(matches!(enumerate_reduced_indefinite(&b(7)), Err(Error::BadDiscriminant(_))));
        assert!(matches!(enumerate_reduced_indefinite(&b(36)), Err(Error::BadDiscriminant(_))));
    }

    #[test]
    fn reduced_scan_matches_root_oracle() {
        // independent oracle: scan every (A, B) window and test the root directly
        for d in (5i64..400).filter(|d| d % 4 == 0 || d % 4 == 1) {
            if arith::is_square(&b(d)) {
                continue;
            }
            let mut oracle = Vec::new();
            for a in 1..=d {
                for bb in -d..=d {
                    let num = bb * bb - d;
                    if num % (4 * a) != 0 {
                        continue;
                    }
                    let g = f(a, bb, num / (4 * a));
                    if g.is_primitive() && g.root().unwrap().is_reduced() {
                        oracle.push(g);
                    }
                }
            }
            oracle.sort();
            assert_eq!(enumerate_reduced_indefinite(&b(d)).unwrap(), oracle, "D={d}");
        }
    }

    #[test]
    fn class_numbers() {
        let g = class_group(&b(-20)).unwrap();
        assert_eq!(g.h, 2);
        let reps: Vec<Form> = g.classes.iter().map(|c| c.rep.clone()).collect();
        assert_eq!(reps, vec![f(1, 0, 5), f(2, 2, 3)]);

        let g = class_group(&b(28)).unwrap();
        assert_eq!(g.h, 2);
        let cls = |x: &Form| g.classes.iter().position(|c| c.cycle.contains(x)).unwrap();
        assert_eq!(cls(&f(2, -2, -3)), cls(&f(1, -4, -3)));
        assert_eq!(cls(&f(3, -2, -2)), cls(&f(3, -4, -1)));
        assert_ne!(cls(&f(2, -2, -3)), cls(&f(3, -2, -2)));

        let g = class_group(&b(1337)).unwrap();
        assert_eq!(g.h, 2);
        let cls = |x: &Form| g.classes.iter().position(|c| c.cycle.contains(x)).unwrap();
        assert_ne!(cls(&f(7, -35, -4)), cls(&f(4, -35, -7)));

        assert_eq!(class_group(&b(1365)).unwrap().h, 8);
        assert_eq!(class_group(&b(-3)).unwrap().h, 1);
        assert_eq!(class_group(&b(-4)).unwrap().h, 1);
        assert!(matches!(class_group(&b(-21)), Err(Error::BadDiscriminant(_))));
    }

    #[test]
    fn definite_class_numbers_match_table() {
        // classical values of h(D) for small fundamental D < 0
        for (d, h) in [(-3, 1), (-4, 1), (-7, 1), (-8, 1), (-15, 2), (-20, 2), (-23, 3), (-47, 5), (-71, 7), (-163, 1)] {
            assert_eq!(class_group(&b(d)).unwrap().h, h, "D={d}");
        }
    }

    #[test]
    fn equivalences() {
        let g = is_equivalent(&f(2, -2, -3), &f(1, -4, -3)).unwrap();
        assert!(g.det().is_one());
        assert_eq!(f(1, -4, -3).apply_transform(&g).unwrap(), f(2, -2, -3));
        assert!(is_equivalent(&f(2, -2, -3), &f(3, -2, -2)).is_none());
        assert_eq!(is_equivalent(&f(5, 3, -3), &f(5, 3, -3)).unwrap(), IntMatrix2::identity());
        let g = is_equivalent(&f(5, 14, 10), &f(1, 0, 1)).unwrap();
        assert_eq!(f(1, 0, 1).apply_transform(&g).unwrap(), f(5, 14, 10));
        assert!(is_equivalent(&f(1, 0, 5), &f(2, 2, 3)).is_none());
        // narrow classes of 1337 merge under GL2
        assert!(is_equivalent(&f(7, -35, -4), &f(4, -35, -7)).is_none());
        let g = is_equivalent_gl2(&f(7, -35, -4), &f(4, -35, -7)).unwrap();
        assert_eq!(g.det(), b(-1));
        assert_eq!(twisted_substitute(&f(4, -35, -7), &g), f(7, -35, -4));
        // the witness relates the roots by an odd number of shifts
        let x1 = f(7, -35, -4).root().unwrap();
        assert_eq!(x1.cf_shift(), f(4, -35, -7).root().unwrap());
    }

    #[test]
    fn fundamental_discriminants() {
        for d in [5, 8, 12, 13, -3, -4, -7, -8, -20, 28, 1337, 1365] {
            assert!(is_fundamental(&b(d)), "{d}");
        }
        for d in [9, 16, 20, 45, 96, -12, -16, 2, 3] {
            assert!(!is_fundamental(&b(d)), "{d}");
        }
    }

    #[test]
    fn text_round_trip() {
        assert_eq!("[ 7, -35, -4 ]".parse::<Form>().unwrap(), f(7, -35, -4));
        assert_eq!(f(7, -35, -4).to_string(), "[7,-35,-4]");
        assert!("[1,2]".parse::<Form>().is_err());
    }

    #[test]
    fn rotations() {
        assert_eq!(least_even_rotation(&[2, 1, 1, 3]), vec![1, 3, 2, 1]);
        assert_eq!(least_even_rotation(&[3, 1, 2]), vec![1, 2, 3]);
    }

    fn arb_unimodular() -> impl Strategy<Value = IntMatrix2> {
        proptest::collection::vec((0u8..3, 1i64..4), 0..6).prop_map(|steps| {
            steps.iter().fold(IntMatrix2::identity(), |m, &(kind, k)| {
                let g = match kind {
                    0 => IntMatrix2::new(1, k, 0, 1),
                    1 => IntMatrix2::new(1, -k, 0, 1),
                    _ => IntMatrix2::s(),
                };
                m.mul(&g)
            })
        })
    }

    fn arb_form() -> impl Strategy<Value = Form> {
        (-30i64..30, -30i64..30, -30i64..30)
            .prop_filter("usable", |(a, bb, c)| {
                let g = f(*a, *bb, *c);
                let d = g.discriminant();
                *a != 0 && g.is_primitive() && d.is_positive() && !arith::is_square(&d)
            })
            .prop_map(|(a, bb, c)| f(a, bb, c))
    }

    proptest! {
        #[test]
        fn transform_laws(q in arb_form(), g1 in arb_unimodular(), g2 in arb_unimodular()) {
            let q1 = q.apply_transform(&g1).unwrap();
            prop_assert_eq!(q1.discriminant(), q.discriminant());
            prop_assert_eq!(q1.apply_transform(&g2).unwrap(), q.apply_transform(&g1.mul(&g2)).unwrap());
            if !q1.a.is_zero() {
                prop_assert_eq!(q1.root().unwrap(), q.root().unwrap().mobius_apply(&g1.inverse().unwrap()));
            }
            let w = is_equivalent(&q1, &q).expect("a transform of q is equivalent to q");
            prop_assert_eq!(q.apply_transform(&w).unwrap(), q1);
        }

        #[test]
        fn reduced_membership(q in arb_form()) {
            let listed = enumerate_reduced_indefinite(&q.discriminant()).unwrap();
            prop_assert_eq!(listed.contains(&q), q.root().unwrap().is_reduced());
        }

        #[test]
        fn class_listing_partitions(k in 2i64..400) {
            let d = b(k);
            prop_assume!(check_discriminant(&d).is_ok());
            let g = class_group(&d).unwrap();
            prop_assert!(g.h >= 1);
            let all = enumerate_reduced_indefinite(&d).unwrap();
            let mut seen: Vec<Form> = g.classes.iter().flat_map(|c| c.cycle.clone()).collect();
            seen.sort();
            prop_assert_eq!(seen, all);
            let principal = if k % 4 == 0 { f(1, 0, -k / 4) } else { f(1, 1, -(k - 1) / 4) };
            prop_assert!(g.classes.iter().any(|c| is_equivalent(&c.rep, &principal).is_some()));
            for c in &g.classes {
                prop_assert_eq!(cf_eval(&CFExpansion::periodic(c.period.clone()).unwrap()), c.rep.root().unwrap());
            }
        }

        #[test]
        fn definite_bound(k in 3i64..2000) {
            let d = b(-k);
            prop_assume!(check_discriminant(&d).is_ok());
            for c in class_group(&d).unwrap().classes {
                prop_assert!(BigInt::from(k) >= BigInt::from(3) * &c.rep.a * &c.rep.a);
            }
        }
    }
}
