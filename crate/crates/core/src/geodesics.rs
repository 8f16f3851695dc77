//! Closed geodesics on the modular surface.
//!
//! Algebraic maps (eigenvalues, visual points, the matrix/form correspondence,
//! reduction) are exact. Frames, folding, cutting sequences and sampling use `f64`
//! for positions only: geodesic endpoints are carried as exact surds and moved by the
//! same integer words as the sample points, so rounding never accumulates along a path.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{class_group, least_even_rotation, ClassGroupListing, Form};
use crate::pell::{solve_pell4, unit};
use crate::surd::{cf_expand, cf_to_matrix, reduce_even, IntMatrix2, QuadSurd};

/// Distance from a corner of the fundamental domain (or from `i`) treated as a hit.
pub const CORNER_TOLERANCE: f64 = 1e-9;
/// Suggested displacement of the starting point after a corner hit.
pub const SUGGESTED_PERTURBATION: f64 = 1e-6;
/// Slack allowed on the walls of the fundamental domain when folding.
pub const FOLD_TOLERANCE: f64 = 1e-12;

/// An element of `SL2(Z)` with `|trace| > 2`, stored with positive trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolicMatrix(IntMatrix2);

impl HyperbolicMatrix {
    pub fn new(m: IntMatrix2) -> Result<Self> {
        if m.c.is_zero() && m.det().is_one() {
            return Err(Error::ParabolicAxis(m.to_string()));
        }
        let det = m.det();
        if !det.is_one() {
            return Err(Error::NotProper(det.to_string()));
        }
        let t = m.trace();
        if t.abs() <= BigInt::from(2) {
            return Err(Error::NotHyperbolic(m.to_string()));
        }
        Ok(HyperbolicMatrix(if t.is_negative() { m.neg() } else { m }))
    }

    pub fn matrix(&self) -> &IntMatrix2 {
        &self.0
    }

    pub fn trace(&self) -> BigInt {
        self.0.trace()
    }

    /// `tr^2 - 4`.
    pub fn trace_discriminant(&self) -> BigInt {
        let t = self.trace();
        &t * &t - 4u32
    }

    pub fn inverse(&self) -> HyperbolicMatrix {
        HyperbolicMatrix(self.0.inverse().expect("det 1"))
    }

    pub fn conjugate_by(&self, g: &IntMatrix2) -> Result<HyperbolicMatrix> {
        let gi = g.inverse().ok_or_else(|| Error::NotProper(g.det().to_string()))?;
        HyperbolicMatrix::new(g.mul(&self.0).mul(&gi))
    }
}

impl fmt::Display for HyperbolicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `lambda = (tr + sqrt(tr^2 - 4)) / 2 > 1`.
pub fn expanding_eigenvalue(m: &HyperbolicMatrix) -> QuadSurd {
    QuadSurd::new(m.trace(), 2, m.trace_discriminant()).expect("hyperbolic trace")
}

/// Geodesic length `2 log lambda`.
pub fn length(m: &HyperbolicMatrix) -> f64 {
    2.0 * expanding_eigenvalue(m).to_f64().ln()
}

/// The attracting fixed point `(a - d + sqrt(tr^2 - 4)) / (2c)`.
pub fn visual_point(m: &HyperbolicMatrix) -> Result<QuadSurd> {
    let g = m.matrix();
    if g.c.is_zero() {
        return Err(Error::ParabolicAxis(m.to_string()));
    }
    QuadSurd::new(&g.a - &g.d, &g.c * 2, m.trace_discriminant())
}

/// A real `SL2` frame moving `i` along the axis of `M`, with the base tangent data.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    /// Row-major `[[a, b], [c, d]]`.
    pub g: [[f64; 2]; 2],
    /// `g . i`.
    pub z: (f64, f64),
    /// The unit tangent vector `i / (c i + d)^2` at `z`.
    pub zeta: (f64, f64),
}

impl Frame {
    pub fn det(&self) -> f64 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }
}

pub fn frame(m: &HyperbolicMatrix) -> Frame {
    let (_, _, c, d) = m.matrix().to_f64();
    let lambda = expanding_eigenvalue(m).to_f64();
    let disc = m.trace_discriminant().to_f64().unwrap_or(f64::INFINITY);
    let k = (c * c * disc).powf(0.25);
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    let g = [
        [sign * (lambda - d) / k, (1.0 / lambda - d) / k],
        [sign * c / k, c / k],
    ];
    Frame {
        z: mobius_f64(&g, (0.0, 1.0)),
        zeta: tangent(&g),
        g,
    }
}

fn mobius_f64(g: &[[f64; 2]; 2], z: (f64, f64)) -> (f64, f64) {
    let (x, y) = z;
    let (nr, ni) = (g[0][0] * x + g[0][1], g[0][0] * y);
    let (dr, di) = (g[1][0] * x + g[1][1], g[1][0] * y);
    let den = dr * dr + di * di;
    ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
}

fn tangent(g: &[[f64; 2]; 2]) -> (f64, f64) {
    // i / (c i + d)^2
    let (c, d) = (g[1][0], g[1][1]);
    let (wr, wi) = (d * d - c * c, 2.0 * c * d);
    let den = wr * wr + wi * wi;
    (wi / den, wr / den)
}

/// `sgn(tr M) / s * [c, d - a, -b]` with `s = gcd(c, d - a, b)`.
pub fn matrix_to_form(m: &HyperbolicMatrix) -> Form {
    let g = m.matrix();
    let (a, b, c) = (g.c.clone(), &g.d - &g.a, -&g.b);
    let s = a.gcd(&b).gcd(&c);
    Form::new(a / &s, b / &s, c / &s)
}

fn check_indefinite(f: &Form) -> Result<BigInt> {
    let d = f.discriminant();
    if !d.is_positive() || crate::arith::is_square(&d) {
        return Err(Error::BadDiscriminant(d.to_string()));
    }
    if !f.is_primitive() {
        return Err(Error::Imprimitive(f.to_string()));
    }
    Ok(d)
}

/// The automorph `((t - Bs)/2, -Cs; As, (t + Bs)/2)` built from the least solution of
/// `t^2 - D s^2 = 4`.
pub fn form_to_matrix_pell(f: &Form) -> Result<HyperbolicMatrix> {
    let d = check_indefinite(f)?;
    let sol = solve_pell4(&d)?;
    let (t, s) = (&sol.t, &sol.s);
    let bs = &f.b * s;
    let m = IntMatrix2::new(
        (t - &bs) / 2u32,
        -(&f.c * s),
        &f.a * s,
        (t + &bs) / 2u32,
    );
    HyperbolicMatrix::new(m)
}

/// The same automorph from the digit product of the root's period, conjugated back from
/// the reduced root. Odd periods are doubled so the product has determinant 1.
pub fn form_to_matrix_cf(f: &Form) -> Result<HyperbolicMatrix> {
    check_indefinite(f)?;
    let (reduced, gamma) = reduce_even(&f.root()?);
    let mut word = cf_expand(&reduced).period().to_vec();
    if word.len() % 2 == 1 {
        word.extend_from_slice(&word.clone());
    }
    let m = HyperbolicMatrix::new(cf_to_matrix(&word))?;
    m.conjugate_by(&gamma.inverse().expect("det 1"))
}

/// Conjugates `M` so its visual point is reduced. Returns `(gamma M gamma^-1, gamma)`.
pub fn reduce_matrix(m: &HyperbolicMatrix) -> Result<(HyperbolicMatrix, IntMatrix2)> {
    let alpha = visual_point(m)?;
    let (_, gamma) = reduce_even(&alpha);
    Ok((m.conjugate_by(&gamma)?, gamma))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    T,
    TInv,
    S,
}

impl Letter {
    pub fn matrix(self) -> IntMatrix2 {
        match self {
            Letter::T => IntMatrix2::t(),
            Letter::TInv => IntMatrix2::t_inv(),
            Letter::S => IntMatrix2::s(),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::T => "T",
            Letter::TInv => "T-",
            Letter::S => "S",
        })
    }
}

/// A point moved into the closed fundamental domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Folded {
    pub z: (f64, f64),
    /// `z = matrix . z_in`.
    pub matrix: IntMatrix2,
    /// Letters in the order applied, run-length encoded.
    pub word: Vec<(Letter, u64)>,
}

/// Moves `z` into `|Re z| <= 1/2, |z| >= 1`.
pub fn fold(z: (f64, f64)) -> Folded {
    assert!(z.1 > 0.0, "fold needs a point of the upper half plane");
    let (mut x, mut y) = z;
    let mut matrix = IntMatrix2::identity();
    let mut word: Vec<(Letter, u64)> = Vec::new();
    let push = |word: &mut Vec<(Letter, u64)>, l: Letter, n: u64| match word.last_mut() {
        Some((last, k)) if *last == l => *k += n,
        _ => word.push((l, n)),
    };
    loop {
        if x.abs() > 0.5 + FOLD_TOLERANCE {
            let n = x.round();
            x -= n;
            let k = n.abs() as u64;
            let letter = if n > 0.0 { Letter::TInv } else { Letter::T };
            push(&mut word, letter, k);
            matrix = IntMatrix2::new(1, -(n as i64), 0, 1).mul(&matrix);
        }
        if x * x + y * y < 1.0 - FOLD_TOLERANCE {
            let r2 = x * x + y * y;
            x = -x / r2;
            y /= r2;
            push(&mut word, Letter::S, 1);
            matrix = IntMatrix2::s().mul(&matrix);
        } else {
            return Folded {
                z: (x, y),
                matrix,
                word,
            };
        }
    }
}

/// Letters of the geodesic flow and the lengths of its `T`/`T^-1` blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuttingSequence {
    pub letters: Vec<Letter>,
    pub runs: Vec<u64>,
}

impl CuttingSequence {
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        let runs = compress(&letters);
        CuttingSequence { letters, runs }
    }

    pub fn letters_string(&self) -> String {
        self.letters
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn compress(letters: &[Letter]) -> Vec<u64> {
    let mut runs = Vec::new();
    let mut cur: Option<(Letter, u64)> = None;
    for &l in letters {
        match (l, cur) {
            (Letter::S, Some((_, n))) => {
                runs.push(n);
                cur = None;
            }
            (Letter::S, None) => {}
            (l, Some((prev, n))) if prev == l => cur = Some((l, n + 1)),
            (l, Some((_, n))) => {
                runs.push(n);
                cur = Some((l, 1));
            }
            (l, None) => cur = Some((l, 1)),
        }
    }
    if let Some((_, n)) = cur {
        runs.push(n);
    }
    runs
}

/// An oriented geodesic with exact endpoints, traversed from `back` to `fwd`.
#[derive(Clone, Debug)]
struct Track {
    fwd: QuadSurd,
    back: QuadSurd,
}

impl Track {
    /// Center and signed radius `(fwd - back) / 2`.
    fn circle(&self) -> (f64, f64) {
        let (u, v) = (self.fwd.to_f64(), self.back.to_f64());
        ((u + v) / 2.0, (u - v) / 2.0)
    }

    fn apply(&mut self, g: &IntMatrix2) {
        self.fwd = self.fwd.mobius_apply(g);
        self.back = self.back.mobius_apply(g);
    }

    fn point(&self, s: f64) -> (f64, f64) {
        let (c, r) = self.circle();
        (c + r * s.tanh(), r.abs() / s.cosh())
    }

    fn param(&self, x: f64) -> f64 {
        let (c, r) = self.circle();
        ((x - c) / r).clamp(-1.0, 1.0).atanh()
    }
}

fn corner_name(x: f64, y: f64, tol: f64) -> Option<&'static str> {
    let h = 3f64.sqrt() / 2.0;
    [("rho", -0.5, h), ("rho+1", 0.5, h), ("i", 0.0, 1.0)]
        .into_iter()
        .find(|(_, cx, cy)| (x - cx).hypot(y - cy) < tol)
        .map(|(name, _, _)| name)
}

/// The first `n_letters` letters of the flow along the axis of `M`, started from the
/// folded base point of [`frame`]. The letters of the initial fold are not included.
pub fn cutting_sequence(m: &HyperbolicMatrix, n_letters: usize) -> Result<CuttingSequence> {
    cutting_sequence_with(m, n_letters, CORNER_TOLERANCE)
}

/// [`cutting_sequence`] with an explicit distance at which a wall crossing counts as a
/// hit on `i`, `rho` or `rho + 1`.
pub fn cutting_sequence_with(
    m: &HyperbolicMatrix,
    n_letters: usize,
    corner_tolerance: f64,
) -> Result<CuttingSequence> {
    let alpha = visual_point(m)?;
    let start = frame(m).z;
    let folded = fold(start);
    let mut track = Track {
        fwd: alpha.clone(),
        back: alpha.galois_conjugate(),
    };
    track.apply(&folded.matrix);
    let mut x = folded.z.0;
    let mut letters = Vec::with_capacity(n_letters);
    const AHEAD: f64 = 1e-11;
    while letters.len() < n_letters {
        let (c, r) = track.circle();
        let dir = r.signum();
        let (lo, hi) = (c - r.abs(), c + r.abs());
        let mut walls = vec![(-0.5, Letter::T), (0.5, Letter::TInv)];
        if c.abs() > 1e-300 {
            let xs = (c * c - r * r + 1.0) / (2.0 * c);
            if xs.abs() <= 0.5 + 1e-12 {
                walls.push((xs, Letter::S));
            }
        }
        let nearest = |min_dist: f64| {
            walls
                .iter()
                .filter(|(xc, _)| dir * (xc - x) > min_dist && *xc > lo && *xc < hi)
                .min_by(|p, q| (dir * (p.0 - x)).total_cmp(&(dir * (q.0 - x))))
                .copied()
        };
        // a start on a wall, heading out, crosses it at once
        let found = nearest(AHEAD).or_else(|| nearest(-AHEAD));
        let (xc, letter) = found.ok_or_else(|| Error::DegenerateHit {
            point: format!("no exit from the fundamental domain at x={x}"),
            letters: letters.len(),
            perturbation: SUGGESTED_PERTURBATION,
        })?;
        let yc = (r * r - (xc - c) * (xc - c)).max(0.0).sqrt();
        if let Some(name) = corner_name(xc, yc, corner_tolerance) {
            return Err(Error::DegenerateHit {
                point: name.to_string(),
                letters: letters.len(),
                perturbation: SUGGESTED_PERTURBATION,
            });
        }
        track.apply(&letter.matrix());
        x = match letter {
            Letter::T => 0.5,
            Letter::TInv => -0.5,
            Letter::S => -xc,
        };
        letters.push(letter);
    }
    Ok(CuttingSequence::from_letters(letters))
}

/// Points along one period of a closed geodesic, folded into the fundamental domain.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSample {
    pub points: Vec<(f64, f64)>,
    pub step: f64,
}

/// Samples the geodesic from `conj(alpha)` to `alpha` over arclength `ell`.
pub fn sample_geodesic(alpha: &QuadSurd, ell: f64, step: f64) -> GeodesicSample {
    let mut track = Track {
        fwd: alpha.clone(),
        back: alpha.galois_conjugate(),
    };
    let n = ((ell / step).round() as usize).max(1);
    let mut points = Vec::with_capacity(n);
    let mut s = 0.0;
    for _ in 0..n {
        let f = fold(track.point(s));
        if !f.matrix.is_identity() {
            track.apply(&f.matrix);
            s = track.param(f.z.0);
        }
        points.push(f.z);
        s += step;
    }
    GeodesicSample { points, step }
}

trait IsIdentity {
    fn is_identity(&self) -> bool;
}

impl IsIdentity for IntMatrix2 {
    fn is_identity(&self) -> bool {
        *self == IntMatrix2::identity()
    }
}

fn check_positive_discriminant(d: &BigInt) -> Result<()> {
    if !d.is_positive() {
        return Err(Error::BadDiscriminant(d.to_string()));
    }
    Ok(())
}

/// One sample per narrow class of discriminant `D`, in class-listing order.
pub fn sample_class(d: &BigInt, step: f64) -> Result<Vec<(Form, GeodesicSample)>> {
    check_positive_discriminant(d)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::BadGrid(format!("step {step} must be positive")));
    }
    let listing = class_group(d)?;
    let ell = 2.0 * unit(d)?.to_f64().ln();
    listing
        .classes
        .par_iter()
        .map(|c| Ok((c.rep.clone(), sample_geodesic(&c.rep.root()?, ell, step))))
        .collect()
}

/// For each class, the index of the class carrying the same geodesic with the opposite
/// orientation (its period read backwards, up to rotation).
pub fn orientation_partners(listing: &ClassGroupListing) -> Vec<Option<usize>> {
    let keys: Vec<Vec<BigInt>> = listing
        .classes
        .iter()
        .map(|c| least_even_rotation(&c.period))
        .collect();
    listing
        .classes
        .iter()
        .map(|c| {
            let mut rev = c.period.clone();
            rev.reverse();
            // reading backwards shifts parity by one, so also try the odd rotations
            let mut alt = rev.clone();
            alt.rotate_left(1);
            let targets = [least_even_rotation(&rev), least_even_rotation(&alt)];
            keys.iter().position(|k| targets.contains(k))
        })
        .collect()
}

/// Number of distinct geodesics once orientation is forgotten.
pub fn unoriented_count(listing: &ClassGroupListing) -> usize {
    let partners = orientation_partners(listing);
    (0..listing.classes.len())
        .filter(|&i| partners[i].is_none_or(|j| j >= i))
        .count()
}

/// An axis-parallel box `x0 < x < x1, y0 < y < y1`; `y1` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Region { x0, x1, y0, y1 }
    }

    pub fn contains(&self, z: (f64, f64)) -> bool {
        z.0 > self.x0 && z.0 < self.x1 && z.1 > self.y0 && z.1 < self.y1
    }

    /// Hyperbolic area of the part of the box inside the fundamental domain.
    pub fn area(&self) -> f64 {
        let (a, b) = (self.x0.max(-0.5), self.x1.min(0.5));
        if a >= b {
            return 0.0;
        }
        let top = if self.y1.is_finite() { 1.0 / self.y1 } else { 0.0 };
        let y0 = self.y0;
        simpson(a, b, 20_000, |x| {
            let floor = (1.0 - x * x).sqrt().max(y0);
            (1.0 / floor - top).max(0.0)
        })
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    /// `x0,x1,y0,y1`; `inf` is accepted for `y1`.
    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("region {s:?}: {e}")))?;
        if v.len() != 4 {
            return Err(Error::Parse(format!("region {s:?} needs x0,x1,y0,y1")));
        }
        Ok(Region::new(v[0], v[1], v[2], v[3]))
    }
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Hyperbolic area of the fundamental domain, by numerical integration of `dx dy / y^2`.
pub fn fundamental_domain_area() -> f64 {
    static AREA: OnceLock<f64> = OnceLock::new();
    *AREA.get_or_init(|| simpson(-0.5, 0.5, 200_000, |x| 1.0 / (1.0 - x * x).sqrt()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DukeReport {
    /// Average over classes of the fraction of sampled arclength in the region.
    pub statistic: f64,
    /// Hyperbolic area of the region over the area of the fundamental domain.
    pub expected: f64,
    pub h: usize,
    pub samples: usize,
}

impl DukeReport {
    pub fn ratio(&self) -> f64 {
        self.statistic / self.expected
    }
}

pub fn duke_statistic(d: &BigInt, region: &Region, step: f64) -> Result<DukeReport> {
    let samples = sample_class(d, step)?;
    Ok(duke_from_samples(&samples, region))
}

pub fn duke_from_samples(samples: &[(Form, GeodesicSample)], region: &Region) -> DukeReport {
    let h = samples.len();
    let total: f64 = samples
        .iter()
        .map(|(_, s)| s.points.iter().filter(|z| region.contains(**z)).count() as f64 / s.points.len() as f64)
        .sum();
    DukeReport {
        statistic: total / h as f64,
        expected: region.area() / fundamental_domain_area(),
        h,
        samples: samples.iter().map(|(_, s)| s.points.len()).sum(),
    }
}

/// Converts a geodesic endpoint to `f64` for display.
pub fn endpoints_f64(alpha: &QuadSurd) -> (f64, f64) {
    (alpha.to_f64(), alpha.galois_conjugate().to_f64())
}
