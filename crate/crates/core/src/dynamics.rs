//! The map f(x,y) = (xy + c, x), its inverse branch, special orbits and the
//! scalar helpers used by the region arguments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this magnitude the second coordinate is treated as zero when inverting.
pub const INVERSE_ZERO_GUARD: f64 = 1e-300;

/// Modulus tolerance for calling a multiplier indifferent.
pub const INDIFFERENT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error("parameter c = {0} is not finite")]
    NonFiniteParameter(f64),
    #[error("fixed points are not real for c = {0} > 1/4")]
    NonReal(f64),
    #[error("iterate left representable range")]
    Overflow,
    #[error("preimage is not unique: the whole line x = 0 maps to ({0}, 0)")]
    NonUniquePreimage(f64),
    #[error("point ({0}, 0) has no preimage")]
    NoPreimage(f64),
    #[error("root bracketing failed: {0}")]
    Bracketing(String),
    #[error("parameter c = {c} outside required range {range}")]
    OutOfRange { c: f64, range: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist_inf(&self, other: &Point) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// A validated map parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    c: f64,
}

impl Parameter {
    pub fn new(c: f64) -> Result<Self, DynError> {
        if c.is_finite() {
            Ok(Parameter { c })
        } else {
            Err(DynError::NonFiniteParameter(c))
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// True on the open interval (-1, 0) where the region lemmas hold.
    pub fn certified_regime(&self) -> bool {
        in_certified_regime(self.c)
    }

    pub fn has_real_fixed_points(&self) -> bool {
        self.c <= 0.25
    }
}

pub fn in_certified_regime(c: f64) -> bool {
    c > -1.0 && c < 0.0
}

#[inline]
pub fn apply_unchecked(z: Point, c: f64) -> Point {
    Point::new(z.x * z.y + c, z.x)
}

pub fn apply(z: Point, c: f64) -> Result<Point, DynError> {
    let w = apply_unchecked(z, c);
    if w.is_finite() {
        Ok(w)
    } else {
        Err(DynError::Overflow)
    }
}

/// The preimage (v, (u - c)/v) of (u, v).
pub fn apply_inverse(z: Point, c: f64) -> Result<Point, DynError> {
    let (u, v) = (z.x, z.y);
    if v.abs() < INVERSE_ZERO_GUARD {
        return if u == c {
            Err(DynError::NonUniquePreimage(u))
        } else {
            Err(DynError::NoPreimage(u))
        };
    }
    let w = Point::new(v, (u - c) / v);
    if w.is_finite() {
        Ok(w)
    } else {
        Err(DynError::Overflow)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub a1: f64,
    pub a2: f64,
    pub alpha: Point,
    pub theta: Point,
}

/// Roots of t^2 - t + c; alpha is the smaller one.
pub fn fixed_points(c: f64) -> Result<FixedPoints, DynError> {
    if !c.is_finite() {
        return Err(DynError::NonFiniteParameter(c));
    }
    if c > 0.25 {
        return Err(DynError::NonReal(c));
    }
    let s = (1.0 - 4.0 * c).sqrt();
    let a2 = 0.5 * (1.0 + s);
    // a1 = c / a2 avoids cancellation when c is small
    let a1 = if a2 != 0.0 { c / a2 } else { 0.5 * (1.0 - s) };
    Ok(FixedPoints {
        a1,
        a2,
        alpha: Point::new(a1, a1),
        theta: Point::new(a2, a2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeCycle {
    pub p: Point,
    pub fp: Point,
    pub f2p: Point,
}

impl ThreeCycle {
    pub fn points(&self) -> [Point; 3] {
        [self.p, self.fp, self.f2p]
    }

    pub fn min_dist(&self, z: &Point) -> f64 {
        self.points()
            .iter()
            .map(|q| q.dist_inf(z))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn three_cycle(c: f64) -> ThreeCycle {
    ThreeCycle {
        p: Point::new(-1.0, -1.0),
        fp: Point::new(1.0 + c, -1.0),
        f2p: Point::new(-1.0, 1.0 + c),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityTarget {
    Alpha,
    Theta,
    Cycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    Attracting,
    Repelling,
    Saddle,
    Indifferent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
}

/// Jacobian of f at (x, y), row major.
pub fn jacobian(z: Point) -> [[f64; 2]; 2] {
    [[z.y, z.x], [1.0, 0.0]]
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Eigenvalues of a 2x2 matrix from its trace and determinant.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = 0.5 * (tr + if tr >= 0.0 { s } else { -s });
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (l1, l2) = if big.abs() >= small.abs() {
            (big, small)
        } else {
            (small, big)
        };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(0.5 * tr, im), Complex64::new(0.5 * tr, -im)]
    }
}

pub fn classify_multipliers(eig: &[Complex64; 2], tol: f64) -> StabilityClass {
    let m = [eig[0].norm(), eig[1].norm()];
    if m.iter().any(|r| (r - 1.0).abs() <= tol) {
        StabilityClass::Indifferent
    } else if m.iter().all(|&r| r < 1.0) {
        StabilityClass::Attracting
    } else if m.iter().all(|&r| r > 1.0) {
        StabilityClass::Repelling
    } else {
        StabilityClass::Saddle
    }
}

pub fn stability(c: f64, target: StabilityTarget) -> Result<StabilityReport, DynError> {
    let m = match target {
        StabilityTarget::Alpha => jacobian(fixed_points(c)?.alpha),
        StabilityTarget::Theta => jacobian(fixed_points(c)?.theta),
        StabilityTarget::Cycle => {
            if !c.is_finite() {
                return Err(DynError::NonFiniteParameter(c));
            }
            let cy = three_cycle(c);
            mat_mul(
                jacobian(cy.f2p),
                mat_mul(jacobian(cy.fp), jacobian(cy.p)),
            )
        }
    };
    let eigenvalues = eigenvalues_2x2(m);
    Ok(StabilityReport {
        eigenvalues,
        class: classify_multipliers(&eigenvalues, INDIFFERENT_TOL),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarMap {
    /// g(x) = x(x^2 + c) + c
    G,
    /// the quadratic return map on the strip next to alpha
    H1,
}

pub fn g_map(x: f64, c: f64) -> f64 {
    x * (x * x + c) + c
}

pub fn h1_map(x: f64, a1: f64) -> f64 {
    let a2_ = a1 * a1;
    let a5 = a2_ * a2_ * a1;
    let a6 = a5 * a1;
    (a2_ - a5) * x * x + (2.0 * a2_ - a5 - a6) * x + a1 - a6
}

pub fn scalar_map(kind: ScalarMap, x: f64, c: f64) -> Result<f64, DynError> {
    match kind {
        ScalarMap::G => Ok(g_map(x, c)),
        ScalarMap::H1 => Ok(h1_map(x, fixed_points(c)?.a1)),
    }
}

fn require_certified(c: f64) -> Result<(), DynError> {
    if in_certified_regime(c) {
        Ok(())
    } else {
        Err(DynError::OutOfRange {
            c,
            range: "(-1, 0)",
        })
    }
}

/// Backward chain z0 = -sqrt(-c), g(z_{k+1}) = z_k, each root taken in [-1, -sqrt(-c)].
/// Returns z_0 ..= z_n.
pub fn g_inverse_chain(c: f64, n: usize) -> Result<Vec<f64>, DynError> {
    require_certified(c)?;
    let top = -(-c).sqrt();
    let mut out = Vec::with_capacity(n + 1);
    out.push(top);
    for _ in 0..n {
        let target = *out.last().unwrap();
        out.push(bisect_increasing(|t| g_map(t, c), -1.0, top, target, 1e-14)?);
    }
    Ok(out)
}

fn bisect_increasing(
    g: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
) -> Result<f64, DynError> {
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo <= target && target <= ghi) {
        return Err(DynError::Bracketing(format!(
            "target {target} not in [{glo}, {ghi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// c_0 = c, c_k = c_{k-1}^2 + c; returns c_0 ..= c_n.
pub fn c_sequence(c: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut v = c;
    out.push(v);
    for _ in 0..n {
        v = v * v + c;
        out.push(v);
    }
    out
}

/// b_1 ..= b_n of the backward envelope on L, started from w.
pub fn b_sequence(c: f64, w: f64, n: usize) -> Result<Vec<f64>, DynError> {
    let fp = fixed_points(c)?;
    let mut out = Vec::with_capacity(n);
    let mut b = w;
    for _ in 0..n {
        b = (b - c) / fp.a2;
        out.push(b);
    }
    Ok(out)
}

/// Smallest N >= 1 with (1+c)^{F_{N-1}} + c < 0, where F_0 = 1, F_1 = 2.
pub fn fib_escape(c: f64) -> Result<u64, DynError> {
    require_certified(c)?;
    let log_base = (1.0 + c).ln();
    let log_target = (-c).ln();
    // fib[0] = F_{n-1}, fib[1] = F_n
    let mut fib = [1.0_f64, 2.0_f64];
    let mut n: u64 = 1;
    while fib[0] * log_base >= log_target {
        fib = [fib[1], fib[0] + fib[1]];
        n += 1;
    }
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    Cn,
    Bn,
    FibEscape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SequenceOutput {
    Values(Vec<f64>),
    Count(u64),
}

/// Dispatch for the three sequences; `n` is the length, `w` the Bn start value.
pub fn sequences(
    kind: SequenceKind,
    c: f64,
    n: usize,
    w: Option<f64>,
) -> Result<SequenceOutput, DynError> {
    match kind {
        SequenceKind::Cn => Ok(SequenceOutput::Values(c_sequence(c, n))),
        SequenceKind::Bn => {
            let a2 = fixed_points(c)?.a2;
            Ok(SequenceOutput::Values(b_sequence(c, w.unwrap_or(a2), n)?))
        }
        SequenceKind::FibEscape => Ok(SequenceOutput::Count(fib_escape(c)?)),
    }
}
