//! Named rectangles of the filtration, membership, and the one-step
//! transition tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dynamics::{apply_inverse, apply_unchecked, fixed_points, DynError, FixedPoints, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("no transition table entry for region {0}")]
    NoTableEntry(RegionId),
    #[error("unknown region tag '{0}'")]
    UnknownTag(String),
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionId {
    L,
    M,
    N,
    P,
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H1,
    H2,
    R0,
    R1,
    R2,
    R3,
    Y,
    QR,
    QS,
    QT,
    QU,
    Z0,
    Z1,
    Z2,
    Z3,
    Z4,
}

use RegionId::*;

impl RegionId {
    pub const ALL: [RegionId; 27] = [
        L, M, N, P, A, B, C, D, E, F, G, H1, H2, R0, R1, R2, R3, Y, QR, QS, QT, QU, Z0, Z1, Z2,
        Z3, Z4,
    ];

    /// Regions whose closed boxes cover the plane, overlapping only on edges.
    pub const PARTITION: [RegionId; 17] =
        [L, M, N, P, A, B, C, D, E, F, G, H1, H2, R0, R1, R2, R3];

    /// The outer cycle L, M, N, P.
    pub const S_PRIME: [RegionId; 4] = [L, M, N, P];

    pub fn as_str(&self) -> &'static str {
        match self {
            L => "L",
            M => "M",
            N => "N",
            P => "P",
            A => "A",
            B => "B",
            C => "C",
            D => "D",
            E => "E",
            F => "F",
            G => "G",
            H1 => "H1",
            H2 => "H2",
            R0 => "R0",
            R1 => "R1",
            R2 => "R2",
            R3 => "R3",
            Y => "Y",
            QR => "QR",
            QS => "QS",
            QT => "QT",
            QU => "QU",
            Z0 => "Z0",
            Z1 => "Z1",
            Z2 => "Z2",
            Z3 => "Z3",
            Z4 => "Z4",
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionId {
    type Err = RegionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegionId::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| RegionError::UnknownTag(s.to_string()))
    }
}

/// Endpoint formulas used by the catalog. Shared with the certifier, which
/// evaluates them symbolically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    NegInf,
    PosInf,
    MinusOne,
    Zero,
    C,
    OnePlusC,
    /// c^2 + c
    CSqPlusC,
    A1,
    A2,
    /// a1 + |a1|^2
    A1PlusAbs2,
    /// a1 - |a1|^2
    A1MinusAbs2,
    /// a1 + |a1|^3
    A1PlusAbs3,
    /// a1 - |a1|^3
    A1MinusAbs3,
}

impl Endpoint {
    pub fn eval(&self, c: f64, fp: &FixedPoints) -> f64 {
        let a1 = fp.a1;
        let m2 = a1 * a1;
        let m3 = m2 * a1.abs();
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::PosInf => f64::INFINITY,
            Endpoint::MinusOne => -1.0,
            Endpoint::Zero => 0.0,
            Endpoint::C => c,
            Endpoint::OnePlusC => 1.0 + c,
            Endpoint::CSqPlusC => c * c + c,
            Endpoint::A1 => a1,
            Endpoint::A2 => fp.a2,
            Endpoint::A1PlusAbs2 => a1 + m2,
            Endpoint::A1MinusAbs2 => a1 - m2,
            Endpoint::A1PlusAbs3 => a1 + m3,
            Endpoint::A1MinusAbs3 => a1 - m3,
        }
    }
}

/// Formula bounds of a region: (x_lo, x_hi, y_lo, y_hi).
pub fn region_endpoints(r: RegionId) -> [Endpoint; 4] {
    use Endpoint::*;
    match r {
        L => [A2, PosInf, A2, PosInf],
        M => [NegInf, MinusOne, OnePlusC, PosInf],
        N => [NegInf, MinusOne, NegInf, MinusOne],
        P => [OnePlusC, PosInf, NegInf, MinusOne],
        R0 => [Zero, OnePlusC, Zero, A2],
        R1 => [MinusOne, Zero, Zero, OnePlusC],
        R2 => [MinusOne, Zero, MinusOne, Zero],
        R3 => [Zero, OnePlusC, MinusOne, Zero],
        RegionId::A => [Zero, A2, A2, PosInf],
        RegionId::B => [MinusOne, Zero, OnePlusC, PosInf],
        RegionId::C => [NegInf, MinusOne, Zero, OnePlusC],
        D => [NegInf, MinusOne, MinusOne, Zero],
        E => [MinusOne, Zero, NegInf, MinusOne],
        F => [Zero, OnePlusC, NegInf, MinusOne],
        G => [OnePlusC, PosInf, MinusOne, Zero],
        H1 => [OnePlusC, A2, Zero, A2],
        H2 => [A2, PosInf, Zero, A2],
        RegionId::Y => [Endpoint::C, Zero, Endpoint::C, Zero],
        QR => [A1, Zero, Endpoint::C, A1],
        QS => [A1, Zero, A1, Zero],
        QT => [Endpoint::C, A1, A1, Zero],
        QU => [Endpoint::C, A1, Endpoint::C, A1],
        Z0 => [A1, A1PlusAbs3, A1MinusAbs3, A1],
        Z1 => [A1PlusAbs2, Zero, A1MinusAbs2, A1],
        Z2 => [A1PlusAbs3, A1PlusAbs2, A1MinusAbs2, A1MinusAbs3],
        Z3 => [A1, A1PlusAbs3, A1MinusAbs2, A1MinusAbs3],
        Z4 => [A1PlusAbs3, A1PlusAbs2, A1MinusAbs3, A1],
    }
}

/// Closed interval of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ExtInterval {
    /// Interval spanned by two endpoints in either order.
    pub fn between(a: f64, b: f64) -> Self {
        ExtInterval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Signed distance to the complement; positive inside.
    pub fn margin(&self, v: f64) -> f64 {
        (v - self.lo).min(self.hi - v)
    }
}

/// Which edges of a box are excluded from it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenEdges {
    pub x_lo: bool,
    pub x_hi: bool,
    pub y_lo: bool,
    pub y_hi: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionBox {
    pub x: ExtInterval,
    pub y: ExtInterval,
    pub open: OpenEdges,
}

impl RegionBox {
    /// Membership in the closed box.
    pub fn contains_closed(&self, z: Point) -> bool {
        self.x.contains(z.x) && self.y.contains(z.y)
    }

    /// Membership honoring open edges.
    pub fn contains(&self, z: Point) -> bool {
        self.contains_closed(z)
            && !(self.open.x_lo && z.x == self.x.lo)
            && !(self.open.x_hi && z.x == self.x.hi)
            && !(self.open.y_lo && z.y == self.y.lo)
            && !(self.open.y_hi && z.y == self.y.hi)
    }

    pub fn margin(&self, z: Point) -> f64 {
        self.x.margin(z.x).min(self.y.margin(z.y))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Catalog {
    pub c: f64,
    pub fixed: FixedPoints,
    boxes: Vec<RegionBox>,
}

impl Catalog {
    pub fn get(&self, r: RegionId) -> &RegionBox {
        &self.boxes[r as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (RegionId, &RegionBox)> {
        RegionId::ALL.iter().copied().zip(self.boxes.iter())
    }

    pub fn contains(&self, r: RegionId, z: Point) -> bool {
        self.get(r).contains(z)
    }

    pub fn in_any(&self, rs: &[RegionId], z: Point) -> bool {
        rs.iter().any(|&r| self.contains(r, z))
    }

    pub fn in_s_prime(&self, z: Point) -> bool {
        self.in_any(&RegionId::S_PRIME, z)
    }

    /// Every region containing z, in catalog order.
    pub fn region_of(&self, z: Point) -> Vec<RegionId> {
        self.iter()
            .filter(|(_, b)| b.contains(z))
            .map(|(r, _)| r)
            .collect()
    }

    /// One JSON object per region, infinite endpoints as "inf" / "-inf".
    pub fn to_json_lines(&self) -> Vec<Value> {
        fn end(v: f64) -> Value {
            if v == f64::INFINITY {
                json!("inf")
            } else if v == f64::NEG_INFINITY {
                json!("-inf")
            } else {
                let raw = crate::json::Num17(v);
                serde_json::to_value(raw).unwrap_or(Value::Null)
            }
        }
        self.iter()
            .map(|(r, b)| {
                json!({
                    "region": r.as_str(),
                    "x": [end(b.x.lo), end(b.x.hi)],
                    "y": [end(b.y.lo), end(b.y.hi)],
                })
            })
            .collect()
    }
}

/// Instantiates every named box at parameter c. Where a formula's endpoints
/// come out reversed (only possible for c outside (-1, 0)) the box spans them.
pub fn catalog(c: f64) -> Result<Catalog, DynError> {
    let fp = fixed_points(c)?;
    let boxes = RegionId::ALL
        .iter()
        .map(|&r| {
            let [xl, xh, yl, yh] = region_endpoints(r).map(|e| e.eval(c, &fp));
            RegionBox {
                x: ExtInterval::between(xl, xh),
                y: ExtInterval::between(yl, yh),
                open: if r == Z1 {
                    OpenEdges {
                        x_lo: true,
                        ..Default::default()
                    }
                } else {
                    OpenEdges::default()
                },
            }
        })
        .collect();
    Ok(Catalog { c, fixed: fp, boxes })
}

pub fn region_of(z: Point, c: f64) -> Result<Vec<RegionId>, DynError> {
    Ok(catalog(c)?.region_of(z))
}

pub fn forward_successors(r: RegionId) -> Result<&'static [RegionId], RegionError> {
    Ok(match r {
        L => &[L],
        M => &[N],
        N => &[P],
        P => &[M],
        R0 => &[R0, R1],
        R1 => &[R2],
        R2 => &[R2, R3],
        R3 => &[R1],
        QR => &[QS, QT],
        QS => &[QT],
        QT => &[QU, QR],
        QU => &[QR],
        RegionId::A => &[RegionId::B, R0, R1, H1, H2],
        RegionId::B => &[D, R2],
        RegionId::C => &[N, E],
        D => &[E, F, P],
        E => &[R2, R3, G],
        F => &[R1, RegionId::C],
        G => &[M, RegionId::B],
        H1 => &[RegionId::B, R0, H1],
        H2 => &[RegionId::B, RegionId::A, L],
        RegionId::Y => &[RegionId::Y],
        Z0 | Z1 | Z2 | Z3 | Z4 => return Err(RegionError::NoTableEntry(r)),
    })
}

pub fn inverse_successors(r: RegionId) -> Result<&'static [RegionId], RegionError> {
    Ok(match r {
        RegionId::A => &[H2],
        RegionId::B => &[RegionId::A, G, H1, H2],
        RegionId::C => &[F],
        D => &[RegionId::B],
        E => &[RegionId::C, D],
        F => &[D],
        G => &[E],
        H1 => &[RegionId::A, H1],
        H2 => &[RegionId::A],
        R0 => &[R0, RegionId::A, H1],
        R1 => &[R0, R3, RegionId::A, F],
        R2 => &[R1, R2, RegionId::B, E],
        R3 => &[R2, E],
        L => &[L, H2],
        M => &[P, G],
        N => &[M, RegionId::C],
        P => &[N, D],
        _ => return Err(RegionError::NoTableEntry(r)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// Infinite sides are cut at this absolute coordinate when sampling.
pub const SAMPLE_BOUND: f64 = 10.0;

/// Relative slack for boundary rounding when checking sampled images.
pub const SAMPLE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub source: RegionId,
    pub direction: Direction,
    pub targets: Vec<RegionId>,
    pub samples: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Smallest signed distance of an image to the target union (negative = outside).
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub c: f64,
    pub entries: Vec<EntryReport>,
}

impl ConformanceReport {
    pub fn violations(&self) -> usize {
        self.entries.iter().map(|e| e.violations).sum()
    }
}

/// Radical inverse in the given base.
fn halton(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Low-discrepancy points in a box, with infinite sides truncated at
/// [`SAMPLE_BOUND`]; `seed` shifts the sequence start.
pub fn halton_points(b: &RegionBox, n: usize, seed: u64) -> Vec<Point> {
    let cut = |iv: ExtInterval| {
        let lo = if iv.lo.is_finite() { iv.lo } else { -SAMPLE_BOUND.max(iv.hi.abs() + 1.0) };
        let hi = if iv.hi.is_finite() { iv.hi } else { SAMPLE_BOUND.max(iv.lo.abs() + 1.0) };
        (lo, hi)
    };
    let (x0, x1) = cut(b.x);
    let (y0, y1) = cut(b.y);
    let start = 1 + (seed % 1_000_003) * 7919;
    (0..n as u64)
        .map(|k| {
            let u = halton(start + k, 2);
            let v = halton(start + k, 3);
            Point::new(x0 + u * (x1 - x0), y0 + v * (y1 - y0))
        })
        .collect()
}

fn union_margin(cat: &Catalog, targets: &[RegionId], z: Point) -> f64 {
    targets
        .iter()
        .map(|&t| cat.get(t).margin(z))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Samples each table entry and checks the image lands in the target union.
pub fn sample_conformance(
    c: f64,
    samples_per_region: usize,
    seed: u64,
) -> Result<ConformanceReport, RegionError> {
    let cat = catalog(c)?;
    let mut entries = Vec::new();
    type Table = fn(RegionId) -> Result<&'static [RegionId], RegionError>;
    let tables: [(Direction, Table); 2] = [
        (Direction::Forward, forward_successors),
        (Direction::Backward, inverse_successors),
    ];
    for (direction, table) in tables {
        for r in RegionId::ALL {
            let Ok(targets) = table(r) else { continue };
            let mut rep = EntryReport {
                source: r,
                direction,
                targets: targets.to_vec(),
                samples: 0,
                skipped: 0,
                violations: 0,
                worst_margin: f64::INFINITY,
            };
            for z in halton_points(cat.get(r), samples_per_region, seed) {
                let w = match direction {
                    Direction::Forward => apply_unchecked(z, c),
                    Direction::Backward => match apply_inverse(z, c) {
                        Ok(w) => w,
                        Err(_) => {
                            rep.skipped += 1;
                            continue;
                        }
                    },
                };
                rep.samples += 1;
                let m = union_margin(&cat, targets, w);
                let slack = SAMPLE_SLACK * (1.0 + w.norm_inf());
                if m < -slack {
                    rep.violations += 1;
                }
                rep.worst_margin = rep.worst_margin.min(m);
            }
            entries.push(rep);
        }
    }
    Ok(ConformanceReport { c, entries })
}
