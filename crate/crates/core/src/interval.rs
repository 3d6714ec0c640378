//! Outward-rounded interval arithmetic.
//!
//! Each endpoint operation computes the float result and its exact rounding
//! error (TwoSum for sums, FMA for products); the endpoint moves one ulp only
//! when the error points the wrong way. Exact results stay exact, so integer
//! coefficient arithmetic produces point intervals.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Below this magnitude an FMA residual may be lost to underflow.
const TINY: f64 = 1e-290;

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() && s > 0.0 { f64::MAX } else { s };
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    -add_down(-a, -b)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() && p > 0.0 { f64::MAX } else { p };
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    -mul_down(-a, b)
}

/// 1/x rounded down, x > 0.
fn recip_down(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    let q = 1.0 / x;
    if !q.is_finite() {
        return f64::MAX;
    }
    if q.mul_add(x, -1.0) > 0.0 || q < TINY {
        q.next_down()
    } else {
        q
    }
}

/// 1/x rounded up, x > 0.
fn recip_up(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    let q = 1.0 / x;
    if !q.is_finite() {
        return q;
    }
    if q.mul_add(x, -1.0) < 0.0 || q < TINY {
        q.next_up()
    } else {
        q
    }
}

fn pow_nonneg_down(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| mul_down(acc, x))
}

fn pow_nonneg_up(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| mul_up(acc, x))
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "reversed interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub const ZERO: Interval = Interval::point(0.0);
    pub const ONE: Interval = Interval::point(1.0);

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        if self.is_bounded() {
            let m = 0.5 * self.lo + 0.5 * self.hi;
            m.clamp(self.lo, self.hi)
        } else if self.lo.is_finite() {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Halves at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    /// Integer power; negative exponents need a positive interval.
    pub fn powi(&self, n: i32) -> Interval {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let n = n as u32;
        if n == 0 {
            return Interval::ONE;
        }
        if self.lo >= 0.0 {
            Interval::new(pow_nonneg_down(self.lo, n), pow_nonneg_up(self.hi, n))
        } else if self.hi <= 0.0 {
            let (a, b) = (-self.hi, -self.lo);
            if n % 2 == 0 {
                Interval::new(pow_nonneg_down(a, n), pow_nonneg_up(b, n))
            } else {
                Interval::new(-pow_nonneg_up(b, n), -pow_nonneg_down(a, n))
            }
        } else if n % 2 == 0 {
            Interval::new(0.0, pow_nonneg_up(self.mag(), n))
        } else {
            Interval::new(-pow_nonneg_up(-self.lo, n), pow_nonneg_up(self.hi, n))
        }
    }

    /// Reciprocal of a strictly positive interval.
    pub fn recip(&self) -> Interval {
        assert!(self.lo > 0.0, "reciprocal needs a positive interval");
        Interval::new(recip_down(self.hi), recip_up(self.lo))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(add_down(self.lo, o.lo), add_up(self.hi, o.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        self + (-o)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        if self.is_point() && o.is_point() {
            return Interval::new(mul_down(self.lo, o.lo), mul_up(self.lo, o.lo));
        }
        let pairs = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = pairs
            .iter()
            .map(|&(a, b)| mul_down(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = pairs
            .iter()
            .map(|&(a, b)| mul_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Self {
        Interval::point(v)
    }
}

/// Axis-aligned box of intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IBox {
    pub x: Interval,
    pub y: Interval,
}

impl IBox {
    pub fn new(x: Interval, y: Interval) -> Self {
        IBox { x, y }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }
}

/// Interval extension of f over a box and a parameter interval:
/// ([x][y] + [c], [x]).
pub fn f_image(b: IBox, c: Interval) -> IBox {
    IBox::new(b.x * b.y + c, b.x)
}
