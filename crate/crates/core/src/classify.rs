//! Forward and backward orbit classification with region-based stopping rules.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    apply_inverse, apply_unchecked, eigenvalues_2x2, fixed_points, jacobian, in_certified_regime, three_cycle, DynError,
    FixedPoints, Parameter, Point, ThreeCycle,
};
use crate::json::fmt17;
use crate::regions::{catalog, Catalog, RegionId};
pub use crate::regions::Direction;

/// Distance at which a point counts as one of the special points.
pub const EXACT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_ITER: usize = 5000;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e6;
/// Below this a coordinate counts as collapsing to 0 in the backward blow-up.
pub const COLLAPSE_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error("point is not in region {0}")]
    NotInRegion(RegionId),
    #[error("point is not in Z0")]
    NotInZ0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ForwardClass {
    FixedAlpha,
    FixedTheta,
    ThreeCycleMember,
    AttractingBasin,
    ThetaStableCandidate,
    CycleStableCandidate,
    Escaping,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BackwardClass {
    FixedAlpha,
    ThetaUnstableCandidate,
    CycleUnstableCandidate,
    BackwardEscaping,
    PreimageFailure,
    Undecided,
}

/// Every verdict tag of either direction, with a stable numeric code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Tag {
    FixedAlpha = 0,
    FixedTheta,
    ThreeCycleMember,
    AttractingBasin,
    ThetaStableCandidate,
    CycleStableCandidate,
    Escaping,
    Undecided,
    ThetaUnstableCandidate,
    CycleUnstableCandidate,
    BackwardEscaping,
    PreimageFailure,
}

impl Tag {
    pub const ALL: [Tag; 12] = [
        Tag::FixedAlpha,
        Tag::FixedTheta,
        Tag::ThreeCycleMember,
        Tag::AttractingBasin,
        Tag::ThetaStableCandidate,
        Tag::CycleStableCandidate,
        Tag::Escaping,
        Tag::Undecided,
        Tag::ThetaUnstableCandidate,
        Tag::CycleUnstableCandidate,
        Tag::BackwardEscaping,
        Tag::PreimageFailure,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::FixedAlpha => "FixedAlpha",
            Tag::FixedTheta => "FixedTheta",
            Tag::ThreeCycleMember => "ThreeCycleMember",
            Tag::AttractingBasin => "AttractingBasin",
            Tag::ThetaStableCandidate => "ThetaStableCandidate",
            Tag::CycleStableCandidate => "CycleStableCandidate",
            Tag::Escaping => "Escaping",
            Tag::Undecided => "Undecided",
            Tag::ThetaUnstableCandidate => "ThetaUnstableCandidate",
            Tag::CycleUnstableCandidate => "CycleUnstableCandidate",
            Tag::BackwardEscaping => "BackwardEscaping",
            Tag::PreimageFailure => "PreimageFailure",
        }
    }

    pub fn code(&self) -> u8 {
        *self as u8
    }

    pub fn from_code(code: u8) -> Option<Tag> {
        Tag::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<ForwardClass> for Tag {
    fn from(c: ForwardClass) -> Tag {
        match c {
            ForwardClass::FixedAlpha => Tag::FixedAlpha,
            ForwardClass::FixedTheta => Tag::FixedTheta,
            ForwardClass::ThreeCycleMember => Tag::ThreeCycleMember,
            ForwardClass::AttractingBasin => Tag::AttractingBasin,
            ForwardClass::ThetaStableCandidate => Tag::ThetaStableCandidate,
            ForwardClass::CycleStableCandidate => Tag::CycleStableCandidate,
            ForwardClass::Escaping => Tag::Escaping,
            ForwardClass::Undecided => Tag::Undecided,
        }
    }
}

impl From<BackwardClass> for Tag {
    fn from(c: BackwardClass) -> Tag {
        match c {
            BackwardClass::FixedAlpha => Tag::FixedAlpha,
            BackwardClass::ThetaUnstableCandidate => Tag::ThetaUnstableCandidate,
            BackwardClass::CycleUnstableCandidate => Tag::CycleUnstableCandidate,
            BackwardClass::BackwardEscaping => Tag::BackwardEscaping,
            BackwardClass::PreimageFailure => Tag::PreimageFailure,
            BackwardClass::Undecided => Tag::Undecided,
        }
    }
}

impl fmt::Display for ForwardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(Tag::from(*self).as_str())
    }
}

impl fmt::Display for BackwardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(Tag::from(*self).as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ExactMatch,
    /// entered L, M, N or P away from theta and the cycle
    EnteredEscapeRegion,
    EnteredTrap,
    NormExceeded,
    Overflow,
    /// one coordinate near 0 while the other exceeds the escape radius
    ZeroInfinityPattern,
    PreimageFailure,
    ConvergedToAlpha,
    ConvergedToTheta,
    ConvergedToCycle,
    MaxIter,
    StepsDone,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ExactMatch => "ExactMatch",
            StopReason::EnteredEscapeRegion => "EnteredEscapeRegion",
            StopReason::EnteredTrap => "EnteredTrap",
            StopReason::NormExceeded => "NormExceeded",
            StopReason::Overflow => "Overflow",
            StopReason::ZeroInfinityPattern => "ZeroInfinityPattern",
            StopReason::PreimageFailure => "PreimageFailure",
            StopReason::ConvergedToAlpha => "ConvergedToAlpha",
            StopReason::ConvergedToTheta => "ConvergedToTheta",
            StopReason::ConvergedToCycle => "ConvergedToCycle",
            StopReason::MaxIter => "MaxIter",
            StopReason::StepsDone => "StepsDone",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// -1 < c < 0: region lemmas apply
    Certified,
    Uncertified,
}

impl Regime {
    pub fn of(c: f64) -> Regime {
        if in_certified_regime(c) {
            Regime::Certified
        } else {
            Regime::Uncertified
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Certified => "certified",
            Regime::Uncertified => "uncertified",
        }
    }
}

/// How CycleStableCandidate is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CycleMode {
    /// distance to the cycle only
    #[default]
    Metric,
    /// additionally require one pass through F, C, E, G, B, D in cyclic order
    Itinerary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub escape_radius: f64,
    pub mode: CycleMode,
    /// keep every iterate in the record (off for pixel sweeps)
    pub record_orbit: bool,
    pub trace_regions: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            mode: CycleMode::Metric,
            record_orbit: true,
            trace_regions: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub direction: Direction,
    pub points: Vec<Point>,
    pub stop_reason: StopReason,
    /// index of the last iterate examined
    pub iterations: usize,
    pub region_trace: Option<Vec<Vec<RegionId>>>,
    pub preimage_failure_step: Option<usize>,
}

impl OrbitRecord {
    fn new(direction: Direction, trace: bool) -> Self {
        OrbitRecord {
            direction,
            points: Vec::new(),
            stop_reason: StopReason::MaxIter,
            iterations: 0,
            region_trace: trace.then(Vec::new),
            preimage_failure_step: None,
        }
    }

    /// CSV with header `step,x,y,regions`; backward steps are negative and
    /// regions are joined by `|`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,x,y,regions\n");
        let sign = if self.direction == Direction::Backward { -1 } else { 1 };
        for (i, p) in self.points.iter().enumerate() {
            let regions = self
                .region_trace
                .as_ref()
                .and_then(|t| t.get(i))
                .map(|rs| rs.iter().map(|r| r.as_str()).collect::<Vec<_>>().join("|"))
                .unwrap_or_default();
            let step = sign * i as i64;
            let _ = writeln!(out, "{},{},{},{}", step, fmt17(p.x), fmt17(p.y), regions);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|p| format!("[{},{}]", fmt17(p.x), fmt17(p.y)))
            .collect();
        let mut s = format!(
            "{{\"direction\":\"{}\",\"points\":[{}],\"stop_reason\":\"{}\",\"iterations\":{}",
            match self.direction {
                Direction::Forward => "forward",
                Direction::Backward => "backward",
            },
            pts.join(","),
            self.stop_reason.as_str(),
            self.iterations
        );
        if let Some(step) = self.preimage_failure_step {
            let _ = write!(s, ",\"preimage_failure_step\":{step}");
        }
        if let Some(trace) = &self.region_trace {
            let rows: Vec<String> = trace
                .iter()
                .map(|rs| {
                    let names: Vec<String> = rs.iter().map(|r| format!("\"{}\"", r)).collect();
                    format!("[{}]", names.join(","))
                })
                .collect();
            let _ = write!(s, ",\"regions\":[{}]", rows.join(","));
        }
        s.push('}');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification<C> {
    pub class: C,
    pub regime: Regime,
    pub record: OrbitRecord,
}

impl<C: Copy + Into<Tag>> Classification<C> {
    pub fn tag(&self) -> Tag {
        self.class.into()
    }

    /// {"class", "iterations", "stop_reason", "regime"}
    pub fn verdict_json(&self) -> String {
        let mut s = format!(
            "{{\"class\":\"{}\",\"iterations\":{},\"stop_reason\":\"{}\",\"regime\":\"{}\"",
            self.tag(),
            self.record.iterations,
            self.record.stop_reason.as_str(),
            self.regime.as_str()
        );
        if let Some(step) = self.record.preimage_failure_step {
            let _ = write!(s, ",\"preimage_failure_step\":{step}");
        }
        s.push('}');
        s
    }
}

/// Per-parameter context reused across many points.
#[derive(Clone, Debug)]
pub struct Classifier {
    c: f64,
    regime: Regime,
    fixed: Option<FixedPoints>,
    cycle: ThreeCycle,
    catalog: Option<Catalog>,
    opts: ClassifyOptions,
}

const SIX_CYCLE: [RegionId; 6] = [
    RegionId::F,
    RegionId::C,
    RegionId::E,
    RegionId::G,
    RegionId::B,
    RegionId::D,
];

impl Classifier {
    pub fn new(c: Parameter, opts: ClassifyOptions) -> Self {
        let c = c.c();
        let regime = Regime::of(c);
        let fixed = fixed_points(c).ok();
        let catalog = if regime == Regime::Certified {
            catalog(c).ok()
        } else {
            None
        };
        Classifier {
            c,
            regime,
            fixed,
            cycle: three_cycle(c),
            catalog,
            opts,
        }
    }

    pub fn options(&self) -> &ClassifyOptions {
        &self.opts
    }

    fn regions(&self, z: Point) -> Vec<RegionId> {
        self.catalog.as_ref().map(|k| k.region_of(z)).unwrap_or_default()
    }

    fn push(&self, rec: &mut OrbitRecord, z: Point, first: bool) {
        if self.opts.record_orbit || first {
            rec.points.push(z);
        }
        if let Some(trace) = rec.region_trace.as_mut() {
            if self.opts.record_orbit || first {
                trace.push(self.regions(z));
            }
        }
    }

    fn finish<C>(&self, class: C, mut rec: OrbitRecord, reason: StopReason, n: usize, last: Point) -> Classification<C> {
        rec.stop_reason = reason;
        rec.iterations = n;
        if !self.opts.record_orbit && n > 0 {
            rec.points.push(last);
            if let Some(trace) = rec.region_trace.as_mut() {
                trace.push(self.regions(last));
            }
        }
        Classification {
            class,
            regime: self.regime,
            record: rec,
        }
    }

    fn exact_forward(&self, z: Point) -> Option<ForwardClass> {
        if let Some(fp) = &self.fixed {
            if z.dist_inf(&fp.alpha) <= EXACT_TOL {
                return Some(ForwardClass::FixedAlpha);
            }
            if z.dist_inf(&fp.theta) <= EXACT_TOL {
                return Some(ForwardClass::FixedTheta);
            }
        }
        (self.cycle.min_dist(&z) <= EXACT_TOL).then_some(ForwardClass::ThreeCycleMember)
    }

    fn near_theta_or_cycle(&self, z: Point) -> bool {
        let tol = self.opts.tol;
        self.fixed.is_some_and(|fp| z.dist_inf(&fp.theta) < tol) || self.cycle.min_dist(&z) < tol
    }

    pub fn forward(&self, z0: Point) -> Classification<ForwardClass> {
        use ForwardClass as F;
        let o = &self.opts;
        let mut rec = OrbitRecord::new(Direction::Forward, o.trace_regions);
        self.push(&mut rec, z0, true);
        if let Some(tag) = self.exact_forward(z0) {
            return self.finish(tag, rec, StopReason::ExactMatch, 0, z0);
        }
        let certified = self.catalog.is_some();
        let mut in_ah2 = certified;
        let mut monotone = true;
        let mut prev_even = f64::INFINITY;
        // min distance to the cycle over the last three iterates, per step
        let mut cyc_hist: Vec<f64> = Vec::new();
        let mut cyc_last = [f64::INFINITY; 3];
        let mut itinerary_seen = false;
        let mut recent: Vec<Vec<RegionId>> = Vec::new();
        let mut z = z0;
        for n in 0..=o.max_iter {
            if n > 0 {
                self.push(&mut rec, z, false);
            }
            if !z.is_finite() {
                return self.finish(F::Escaping, rec, StopReason::Overflow, n, z);
            }
            if let Some(cat) = &self.catalog {
                if cat.in_s_prime(z) && !self.near_theta_or_cycle(z) {
                    return self.finish(F::Escaping, rec, StopReason::EnteredEscapeRegion, n, z);
                }
                if cat.contains(RegionId::Y, z) {
                    return self.finish(F::AttractingBasin, rec, StopReason::EnteredTrap, n, z);
                }
                in_ah2 &= cat.in_any(&[RegionId::A, RegionId::H2], z);
                if o.mode == CycleMode::Itinerary && !itinerary_seen {
                    recent.push(cat.region_of(z));
                    if recent.len() > 6 {
                        recent.remove(0);
                    }
                    itinerary_seen = recent.len() == 6
                        && (0..6).any(|s| (0..6).all(|k| recent[k].contains(&SIX_CYCLE[(s + k) % 6])));
                }
            } else if let Some(fp) = &self.fixed {
                if z.dist_inf(&fp.alpha) < o.tol {
                    return self.finish(F::AttractingBasin, rec, StopReason::ConvergedToAlpha, n, z);
                }
            }
            if z.norm_inf() > o.escape_radius {
                return self.finish(F::Escaping, rec, StopReason::NormExceeded, n, z);
            }
            if let Some(fp) = &self.fixed {
                let d = z.dist_inf(&fp.theta);
                if n % 2 == 0 {
                    monotone &= d <= prev_even;
                    prev_even = d;
                }
                let theta_ok = if certified { in_ah2 && monotone } else { monotone };
                if d < o.tol && theta_ok {
                    return self.finish(F::ThetaStableCandidate, rec, StopReason::ConvergedToTheta, n, z);
                }
            }
            cyc_last = [cyc_last[1], cyc_last[2], self.cycle.min_dist(&z)];
            let m = cyc_last.iter().copied().fold(f64::INFINITY, f64::min);
            cyc_hist.push(m);
            if m < o.tol {
                let window = (n / 10).max(3).min(cyc_hist.len() - 1);
                let tail = &cyc_hist[cyc_hist.len() - 1 - window..];
                let settled = tail.windows(2).all(|w| w[1] <= w[0]);
                let route = o.mode == CycleMode::Metric || itinerary_seen;
                if settled && route {
                    return self.finish(F::CycleStableCandidate, rec, StopReason::ConvergedToCycle, n, z);
                }
            }
            if n == o.max_iter {
                break;
            }
            z = apply_unchecked(z, self.c);
        }
        let class = if in_ah2 && monotone {
            F::ThetaStableCandidate
        } else {
            F::Undecided
        };
        self.finish(class, rec, StopReason::MaxIter, o.max_iter, z)
    }

    pub fn backward(&self, z0: Point) -> Classification<BackwardClass> {
        use BackwardClass as B;
        let o = &self.opts;
        let mut rec = OrbitRecord::new(Direction::Backward, o.trace_regions);
        self.push(&mut rec, z0, true);
        if let Some(fp) = &self.fixed {
            if z0.dist_inf(&fp.alpha) <= EXACT_TOL {
                return self.finish(B::FixedAlpha, rec, StopReason::ExactMatch, 0, z0);
            }
            if z0.dist_inf(&fp.theta) <= EXACT_TOL {
                return self.finish(B::ThetaUnstableCandidate, rec, StopReason::ExactMatch, 0, z0);
            }
        }
        if self.cycle.min_dist(&z0) <= EXACT_TOL {
            return self.finish(B::CycleUnstableCandidate, rec, StopReason::ExactMatch, 0, z0);
        }
        let mut prev_theta = f64::INFINITY;
        let mut cyc: Vec<f64> = Vec::new();
        let mut z = z0;
        for n in 0..=o.max_iter {
            if n > 0 {
                self.push(&mut rec, z, false);
            }
            if z.norm_inf() > o.escape_radius {
                let reason = if z.x.abs().min(z.y.abs()) < COLLAPSE_TOL {
                    StopReason::ZeroInfinityPattern
                } else {
                    StopReason::NormExceeded
                };
                return self.finish(B::BackwardEscaping, rec, reason, n, z);
            }
            if let Some(fp) = &self.fixed {
                let d = z.dist_inf(&fp.theta);
                if d < o.tol && d < prev_theta {
                    return self.finish(B::ThetaUnstableCandidate, rec, StopReason::ConvergedToTheta, n, z);
                }
                prev_theta = d;
            }
            let d = self.cycle.min_dist(&z);
            cyc.push(d);
            if d < o.tol && n >= 3 && d < cyc[n - 3] {
                return self.finish(B::CycleUnstableCandidate, rec, StopReason::ConvergedToCycle, n, z);
            }
            if n == o.max_iter {
                break;
            }
            match apply_inverse(z, self.c) {
                Ok(w) => z = w,
                Err(DynError::Overflow) => {
                    return self.finish(B::BackwardEscaping, rec, StopReason::Overflow, n, z);
                }
                Err(_) => {
                    rec.preimage_failure_step = Some(n + 1);
                    return self.finish(B::PreimageFailure, rec, StopReason::PreimageFailure, n, z);
                }
            }
        }
        self.finish(B::Undecided, rec, StopReason::MaxIter, o.max_iter, z)
    }
}

fn matmul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

/// Unit eigenvector of the expanding real eigenvalue of m, with x >= 0.
fn expanding_direction(m: [[f64; 2]; 2]) -> Option<(f64, Point)> {
    let eig = eigenvalues_2x2(m);
    let lam = eig
        .iter()
        .filter(|l| l.im == 0.0 && l.re.abs() > 1.0)
        .map(|l| l.re)
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))?;
    let u = (m[0][1], lam - m[0][0]);
    let w = (lam - m[1][1], m[1][0]);
    let (vx, vy) = if u.0.hypot(u.1) >= w.0.hypot(w.1) { u } else { w };
    let n = vx.hypot(vy);
    if n == 0.0 {
        return None;
    }
    let s = if vx < 0.0 { -1.0 } else { 1.0 };
    Some((lam, Point::new(s * vx / n, s * vy / n)))
}

/// Expanding multiplier and unit direction at theta.
pub fn theta_unstable_direction(c: f64) -> Option<(f64, Point)> {
    let fp = fixed_points(c).ok()?;
    expanding_direction(jacobian(fp.theta))
}

/// Expanding multiplier of the cycle and its unit direction at p = (-1, -1).
pub fn cycle_unstable_direction(c: f64) -> Option<(f64, Point)> {
    let cy = three_cycle(c);
    let m = matmul(jacobian(cy.f2p), matmul(jacobian(cy.fp), jacobian(cy.p)));
    expanding_direction(m)
}

pub fn classify_forward(z: Point, c: Parameter, opts: &ClassifyOptions) -> Classification<ForwardClass> {
    Classifier::new(c, *opts).forward(z)
}

pub fn classify_backward(z: Point, c: Parameter, opts: &ClassifyOptions) -> Classification<BackwardClass> {
    Classifier::new(c, *opts).backward(z)
}

/// Raw iteration; stops early on a missing preimage or overflow.
pub fn orbit(z: Point, c: Parameter, steps: usize, direction: Direction, trace_regions: bool) -> OrbitRecord {
    let c = c.c();
    let cat = if trace_regions { catalog(c).ok() } else { None };
    let mut rec = OrbitRecord::new(direction, trace_regions);
    let push = |rec: &mut OrbitRecord, z: Point| {
        rec.points.push(z);
        if let Some(trace) = rec.region_trace.as_mut() {
            trace.push(cat.as_ref().map(|k| k.region_of(z)).unwrap_or_default());
        }
    };
    push(&mut rec, z);
    let mut z = z;
    for n in 0..steps {
        let next = match direction {
            Direction::Forward => {
                let w = apply_unchecked(z, c);
                if w.is_finite() {
                    Ok(w)
                } else {
                    Err(DynError::Overflow)
                }
            }
            Direction::Backward => apply_inverse(z, c),
        };
        match next {
            Ok(w) => {
                z = w;
                push(&mut rec, z);
            }
            Err(DynError::Overflow) => {
                rec.stop_reason = StopReason::Overflow;
                rec.iterations = n;
                return rec;
            }
            Err(_) => {
                rec.stop_reason = StopReason::PreimageFailure;
                rec.preimage_failure_step = Some(n + 1);
                rec.iterations = n;
                return rec;
            }
        }
    }
    rec.stop_reason = StopReason::StepsDone;
    rec.iterations = steps;
    rec
}

/// Rounding slack for box membership in return bookkeeping; alpha sits on a
/// corner of QR and its computed image drifts by an ulp.
pub const RETURN_SLACK: f64 = 8.0 * f64::EPSILON;

fn in_box_loose(b: &crate::regions::RegionBox, z: Point) -> bool {
    b.margin(z) >= -RETURN_SLACK
}

/// n_0 = 0 and the following times at which the forward orbit is in `region`
/// (closed box), up to `count` entries or `budget` iterations.
pub fn return_times(z: Point, c: f64, region: RegionId, count: usize, budget: usize) -> Result<Vec<usize>, ClassifyError> {
    let cat = catalog(c)?;
    if !in_box_loose(cat.get(region), z) {
        return Err(ClassifyError::NotInRegion(region));
    }
    let mut times = vec![0];
    let mut w = z;
    for n in 1..=budget {
        if times.len() >= count {
            break;
        }
        w = apply_unchecked(w, c);
        if !w.is_finite() {
            break;
        }
        if in_box_loose(cat.get(region), w) {
            times.push(n);
        }
    }
    Ok(times)
}

/// Budget of forward steps used by [`envelope_check`].
pub const ENVELOPE_BUDGET: usize = 10_000;

/// True iff the i-th return to QR (i = 1..=returns) lies in
/// [a1, a1 + |c|^i |a1|^3] x [a1 - |c|^i |a1|^3, a1].
pub fn envelope_check(z: Point, c: f64, returns: usize) -> Result<bool, ClassifyError> {
    if !in_certified_regime(c) {
        return Err(DynError::OutOfRange { c, range: "(-1, 0)" }.into());
    }
    let cat = catalog(c)?;
    if !in_box_loose(cat.get(RegionId::Z0), z) {
        return Err(ClassifyError::NotInZ0);
    }
    let a1 = cat.fixed.a1;
    let times = return_times(z, c, RegionId::QR, returns + 1, ENVELOPE_BUDGET)?;
    if times.len() < returns + 1 {
        return Ok(false);
    }
    let slack = RETURN_SLACK;
    let mut w = z;
    let mut step = 0;
    for (i, &n) in times.iter().enumerate().skip(1) {
        while step < n {
            w = apply_unchecked(w, c);
            step += 1;
        }
        let r = c.abs().powi(i as i32) * a1.abs().powi(3);
        let ok = w.x >= a1 - slack && w.x <= a1 + r + slack && w.y >= a1 - r - slack && w.y <= a1 + slack;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
