//! Sparse polynomials in two box coordinates `p`, `q` and a positive
//! parameter `t` (Laurent in `t`), with interval coefficients.
//!
//! Coefficients built from small integers stay exact, so identities such as
//! t^2 - t + (t - t^2) = 0 cancel symbolically before any range evaluation.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::interval::{add_down, add_up, Interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    P = 0,
    Q = 1,
    T = 2,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::P, Var::Q, Var::T];
}

/// Exponents of (p, q, t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(pub [i16; 3]);

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    terms: Vec<(Mono, Interval)>,
}

fn is_exact_zero(c: &Interval) -> bool {
    c.lo == 0.0 && c.hi == 0.0
}

impl Poly {
    fn from_map(map: BTreeMap<Mono, Interval>) -> Self {
        Poly {
            terms: map.into_iter().filter(|(_, c)| !is_exact_zero(c)).collect(),
        }
    }

    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(v: f64) -> Self {
        Poly::term(Interval::point(v), [0, 0, 0])
    }

    pub fn term(coef: Interval, exps: [i16; 3]) -> Self {
        Poly::from_map(BTreeMap::from([(Mono(exps), coef)]))
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v as usize] = 1;
        Poly::term(Interval::ONE, e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Mono, Interval)] {
        &self.terms
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.terms.iter().any(|(m, _)| m.0[v as usize] != 0)
    }

    pub fn powi(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(1.0), |acc, _| &acc * self)
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let i = v as usize;
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = *m;
            m2.0[i] -= 1;
            let term = *c * Interval::point(e as f64);
            accumulate(&mut map, m2, term);
        }
        Poly::from_map(map)
    }

    /// Replaces variable `v` by the interval `val`.
    pub fn substitute(&self, v: Var, val: Interval) -> Poly {
        let i = v as usize;
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            let mut m2 = *m;
            m2.0[i] = 0;
            let factor = if e == 0 { Interval::ONE } else { val.powi(e as i32) };
            accumulate(&mut map, m2, *c * factor);
        }
        Poly::from_map(map)
    }

    /// Range enclosure over a box of variable intervals. A variable with an
    /// unbounded range is factored out first (Horner in that variable), so
    /// its coefficients are bounded before they meet infinity.
    pub fn eval(&self, dom: &[Interval; 3]) -> Interval {
        if let Some(v) = Var::ALL
            .into_iter()
            .find(|v| !dom[*v as usize].is_bounded() && self.depends_on(*v))
        {
            let i = v as usize;
            let mut groups: BTreeMap<i16, Vec<(Mono, Interval)>> = BTreeMap::new();
            for (m, c) in &self.terms {
                let mut m2 = *m;
                m2.0[i] = 0;
                groups.entry(m.0[i]).or_default().push((m2, *c));
            }
            return groups.into_iter().fold(Interval::ZERO, |acc, (e, terms)| {
                let coef = Poly { terms }.eval(dom);
                acc + coef * dom[i].powi(e as i32)
            });
        }
        self.eval_bounded(dom)
    }

    /// The tighter of the plain monomial evaluation and the evaluation
    /// re-expanded around the box centre.
    fn eval_bounded(&self, dom: &[Interval; 3]) -> Interval {
        let naive = eval_terms(self.terms.iter().copied(), dom, dom);
        let mut centre = [None; 3];
        let mut offset = *dom;
        for i in 0..3 {
            let d = dom[i];
            if d.is_bounded() && !d.is_point() {
                let m = d.mid();
                centre[i] = Some(m);
                offset[i] = Interval::new(add_down(d.lo, -m), add_up(d.hi, -m));
            }
        }
        if centre.iter().all(Option::is_none) {
            return naive;
        }
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut parts = vec![(*m, *c)];
            for (i, cen) in centre.iter().enumerate() {
                let (Some(cen), e) = (cen, m.0[i]) else { continue };
                if e <= 0 {
                    continue;
                }
                let mut next = Vec::with_capacity(parts.len() * (e as usize + 1));
                for (pm, pc) in &parts {
                    let mut binom = 1.0;
                    for k in 0..=e {
                        let mut km = *pm;
                        km.0[i] = k;
                        let f = Interval::point(binom) * Interval::point(*cen).powi((e - k) as i32);
                        next.push((km, *pc * f));
                        binom = binom * (e - k) as f64 / (k + 1) as f64;
                    }
                }
                parts = next;
            }
            for (pm, pc) in parts {
                accumulate(&mut map, pm, pc);
            }
        }
        // shifted monomials use the offsets, negative powers the original range
        let centred = eval_terms(map.into_iter(), &offset, dom);
        let lo = naive.lo.max(centred.lo);
        let hi = naive.hi.min(centred.hi);
        if lo <= hi {
            Interval::new(lo, hi)
        } else {
            naive
        }
    }

    /// Value at a point, for diagnostics and sampling.
    pub fn eval_f64(&self, p: f64, q: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                c.mid() * p.powi(m.0[0] as i32) * q.powi(m.0[1] as i32) * t.powi(m.0[2] as i32)
            })
            .sum()
    }
}

fn eval_terms(
    terms: impl Iterator<Item = (Mono, Interval)>,
    pos: &[Interval; 3],
    neg: &[Interval; 3],
) -> Interval {
    let mut acc = Interval::ZERO;
    for (m, c) in terms {
        let mut term = c;
        for i in 0..3 {
            let e = m.0[i];
            if e > 0 {
                term = term * pos[i].powi(e as i32);
            } else if e < 0 {
                term = term * neg[i].powi(e as i32);
            }
        }
        acc = acc + term;
    }
    acc
}

fn accumulate(map: &mut BTreeMap<Mono, Interval>, m: Mono, c: Interval) {
    map.entry(m).and_modify(|v| *v = *v + c).or_insert(c);
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut map: BTreeMap<Mono, Interval> = self.terms.iter().copied().collect();
        for (m, c) in &o.terms {
            accumulate(&mut map, *m, *c);
        }
        Poly::from_map(map)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -*c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut map = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = Mono([m1.0[0] + m2.0[0], m1.0[1] + m2.0[1], m1.0[2] + m2.0[2]]);
                accumulate(&mut map, m, *c1 * *c2);
            }
        }
        Poly::from_map(map)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, o: Poly) -> Poly {
                (&self).$f(&o)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, o: &Poly) -> Poly {
                (&self).$f(o)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $f(self, o: Poly) -> Poly {
                self.$f(&o)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Outcome of a sign test on a polynomial over a domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    /// poly >= -slack everywhere on the domain
    Holds,
    /// poly < -slack everywhere on the domain
    Fails,
    Unknown,
}

/// Tries to show `poly >= -slack` on `dom`. When the plain enclosure is
/// inconclusive and the polynomial is monotone in some variable (itself
/// shown by a sign test with a smaller budget), the test moves to the face
/// where the minimum sits; substituting 0 or 1 there is exact, which is what
/// resolves edge-tight inequalities.
pub fn nonneg(poly: &Poly, dom: &[Interval; 3], slack: f64, faces: u8) -> Sign {
    let e = poly.eval(dom);
    if e.lo >= -slack {
        return Sign::Holds;
    }
    if e.hi < -slack {
        return Sign::Fails;
    }
    if faces == 0 {
        return Sign::Unknown;
    }
    for v in Var::ALL {
        let iv = dom[v as usize];
        if iv.is_point() || !poly.depends_on(v) {
            continue;
        }
        let d = poly.derivative(v);
        let at = if nonneg(&d, dom, 0.0, faces - 1) == Sign::Holds {
            iv.lo
        } else if nonneg(&(-&d), dom, 0.0, faces - 1) == Sign::Holds {
            iv.hi
        } else {
            continue;
        };
        if !at.is_finite() {
            continue;
        }
        let face = poly.substitute(v, Interval::point(at));
        let mut fdom = *dom;
        fdom[v as usize] = Interval::point(at);
        if nonneg(&face, &fdom, slack, faces - 1) == Sign::Holds {
            return Sign::Holds;
        }
    }
    Sign::Unknown
}
