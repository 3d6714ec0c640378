//! Interval certification of region inclusions and disjointness over whole
//! intervals of c.
//!
//! Everything is parameterized by t = a2, which runs over a small interval
//! when c does: c = t - t^2, 1 + c = 1 + t - t^2, a1 = 1 - t, |a1| = t - 1.
//! Region endpoints then become exact polynomials in t and a point of a
//! source box is written as an affine function of two box coordinates p, q.
//! Image coordinates X' = XY + c and Y' = X are polynomials in (p, q, t),
//! and each leaf test is a sign test on such a polynomial.
//!
//! Unbounded sides are cut at `r_max`; the part beyond is its own job whose
//! box is never split along the infinite direction.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::interval::{IBox, Interval};
use crate::json::Num17;
use crate::poly::{nonneg, Poly, Sign, Var};
use crate::regions::{
    forward_successors, inverse_successors, region_endpoints, Endpoint, RegionError, RegionId,
};

pub const DEFAULT_R_MAX: f64 = 1e4;
pub const DEFAULT_MAX_DEPTH: u32 = 24;
/// Largest number of open boxes kept on one level.
pub const LEVEL_CAP: usize = 1 << 20;
/// Monotone face reductions tried per sign test.
const FACE_BUDGET: u8 = 3;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("c-interval [{lo}, {hi}] must lie strictly inside (-1, 0)")]
    OutOfRegime { lo: f64, hi: f64 },
    #[error("source box has no finite side along {0}")]
    DoublyInfinite(&'static str),
    #[error(transparent)]
    Region(#[from] RegionError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub r_max: f64,
    pub max_depth: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            r_max: DEFAULT_R_MAX,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Certified,
    Failed,
    DepthExceeded,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Certified => "Certified",
            Status::Failed => "Failed",
            Status::DepthExceeded => "DepthExceeded",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn tp() -> Poly {
    Poly::var(Var::T)
}

fn k(v: f64) -> Poly {
    Poly::constant(v)
}

/// c as a polynomial in t.
pub fn c_poly() -> Poly {
    tp() - &tp() * &tp()
}

/// One side of a symbolic box.
#[derive(Clone, Debug, PartialEq)]
pub enum End {
    NegInf,
    PosInf,
    At(Poly),
}

impl End {
    pub fn from_endpoint(e: Endpoint) -> End {
        let t = tp();
        let a1 = k(1.0) - &t;
        let abs = &t - k(1.0);
        let abs2 = &abs * &abs;
        let abs3 = &abs2 * &abs;
        let c = c_poly();
        End::At(match e {
            Endpoint::NegInf => return End::NegInf,
            Endpoint::PosInf => return End::PosInf,
            Endpoint::MinusOne => k(-1.0),
            Endpoint::Zero => Poly::zero(),
            Endpoint::C => c,
            Endpoint::OnePlusC => k(1.0) + &c,
            Endpoint::CSqPlusC => &(&c * &c) + &c,
            Endpoint::A1 => a1,
            Endpoint::A2 => t,
            Endpoint::A1PlusAbs2 => a1 + abs2,
            Endpoint::A1MinusAbs2 => a1 - abs2,
            Endpoint::A1PlusAbs3 => a1 + abs3,
            Endpoint::A1MinusAbs3 => a1 - abs3,
        })
    }

    pub fn poly(&self) -> Option<&Poly> {
        match self {
            End::At(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        match self {
            End::NegInf => f64::NEG_INFINITY,
            End::PosInf => f64::INFINITY,
            End::At(p) => p.eval_f64(0.0, 0.0, t),
        }
    }
}

/// Axis-aligned box whose sides are polynomials in t (or infinite).
#[derive(Clone, Debug, PartialEq)]
pub struct SymBox {
    pub x: [End; 2],
    pub y: [End; 2],
}

impl SymBox {
    pub fn region(r: RegionId) -> SymBox {
        let [xl, xh, yl, yh] = region_endpoints(r).map(End::from_endpoint);
        SymBox {
            x: [xl, xh],
            y: [yl, yh],
        }
    }

    pub fn finite(xlo: Poly, xhi: Poly, ylo: Poly, yhi: Poly) -> SymBox {
        SymBox {
            x: [End::At(xlo), End::At(xhi)],
            y: [End::At(ylo), End::At(yhi)],
        }
    }

    /// Numeric bounds [xlo, xhi, ylo, yhi] at a given t.
    pub fn at(&self, t: f64) -> [f64; 4] {
        [
            self.x[0].eval_f64(t),
            self.x[1].eval_f64(t),
            self.y[0].eval_f64(t),
            self.y[1].eval_f64(t),
        ]
    }
}

/// What a job has to show about the image of its source.
#[derive(Clone, Debug, PartialEq)]
pub enum Goal {
    /// image inside the union of these boxes
    Inside(Vec<SymBox>),
    /// image meets the box at most on its boundary
    Avoid(SymBox),
}

/// One claim of the corpus: a list of named sub-jobs that must all certify.
#[derive(Clone, Debug)]
pub struct Claim {
    pub id: String,
    pub statement: String,
    pub jobs: Vec<JobSpec>,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub name: String,
    pub source: SymBox,
    pub goal: Goal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartCertificate {
    pub name: String,
    pub status: Status,
    pub depth: u32,
    pub leaves: usize,
    pub counterexample: Option<IBox>,
    /// c-range of the counterexample leaf
    pub counterexample_c: Option<Interval>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub claim: String,
    pub statement: String,
    pub status: Status,
    pub max_depth_used: u32,
    pub counterexample: Option<IBox>,
    pub counterexample_c: Option<Interval>,
    pub c_interval: Interval,
    pub parts: Vec<PartCertificate>,
}

impl Certificate {
    fn from_parts(claim: &Claim, c: Interval, parts: Vec<PartCertificate>) -> Certificate {
        let status = if parts.iter().any(|p| p.status == Status::Failed) {
            Status::Failed
        } else if parts.iter().any(|p| p.status == Status::DepthExceeded) {
            Status::DepthExceeded
        } else {
            Status::Certified
        };
        let witness = parts.iter().find(|p| p.status == status && status != Status::Certified);
        Certificate {
            claim: claim.id.clone(),
            statement: claim.statement.clone(),
            status,
            max_depth_used: parts.iter().map(|p| p.depth).max().unwrap_or(0),
            counterexample: witness.and_then(|p| p.counterexample),
            counterexample_c: witness.and_then(|p| p.counterexample_c),
            c_interval: c,
            parts,
        }
    }

    /// One JSON line: {claim, status, depth, c, counterexample?}.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Witness {
            x: [Num17; 2],
            y: [Num17; 2],
            c: [Num17; 2],
        }
        #[derive(Serialize)]
        struct Line<'a> {
            claim: &'a str,
            status: &'a str,
            depth: u32,
            c: [Num17; 2],
            #[serde(skip_serializing_if = "Option::is_none")]
            counterexample: Option<Witness>,
        }
        let pair = |i: Interval| [Num17(i.lo), Num17(i.hi)];
        let line = Line {
            claim: &self.claim,
            status: self.status.as_str(),
            depth: self.max_depth_used,
            c: pair(self.c_interval),
            counterexample: self.counterexample.map(|b| Witness {
                x: pair(b.x),
                y: pair(b.y),
                c: pair(self.counterexample_c.unwrap_or(self.c_interval)),
            }),
        };
        serde_json::to_string(&line).expect("certificate line serializes")
    }
}

/// Enclosure of the t = a2 values belonging to a c-interval.
pub fn t_range(c: Interval) -> Result<Interval, CertifyError> {
    if !(c.lo > -1.0 && c.hi < 0.0 && c.lo <= c.hi) {
        return Err(CertifyError::OutOfRegime { lo: c.lo, hi: c.hi });
    }
    let t_of = |c: f64| 0.5 * (1.0 + (1.0 - 4.0 * c).sqrt());
    let c_of = |t: f64| {
        let ti = Interval::point(t);
        ti - ti * ti
    };
    // c decreases in t, so the upper end of c fixes the lower end of t
    let mut lo = t_of(c.hi);
    while c_of(lo).lo < c.hi {
        lo = lo.next_down();
    }
    let mut hi = t_of(c.lo);
    while c_of(hi).hi > c.lo {
        hi = hi.next_up();
    }
    Ok(Interval::new(lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Reach {
    Bounded,
    Core,
    Tail,
}

/// One coordinate of the source box as a function of a box variable.
struct Coord {
    expr: Poly,
    /// side length for bounded sides, used to compare widths
    len: Option<Poly>,
    root: Interval,
}

fn coord(side: &[End; 2], v: Var, reach: Reach, r_max: f64) -> Coord {
    let var = Poly::var(v);
    let span = match reach {
        Reach::Core => Interval::new(0.0, r_max),
        _ => Interval::new(r_max, f64::INFINITY),
    };
    match (side, reach) {
        ([End::At(lo), End::At(hi)], _) => {
            let len = hi - lo;
            Coord {
                expr: lo + &(&var * &len),
                len: Some(len),
                root: Interval::new(0.0, 1.0),
            }
        }
        ([End::At(lo), _], _) => Coord {
            expr: lo + &var,
            len: None,
            root: span,
        },
        ([_, End::At(hi)], _) => Coord {
            expr: hi - &var,
            len: None,
            root: span,
        },
        _ => unreachable!("checked by caller"),
    }
}

fn reaches(side: &[End; 2]) -> &'static [Reach] {
    match side {
        [End::At(_), End::At(_)] => &[Reach::Bounded],
        _ => &[Reach::Core, Reach::Tail],
    }
}

/// A sign condition g >= -slack.
struct Cond {
    g: Poly,
    slack: f64,
}

impl Cond {
    fn new(g: Poly, bound: &Poly, t: Interval) -> Cond {
        let mag = bound.eval(&[Interval::ZERO, Interval::ZERO, t]).mag();
        Cond {
            g,
            slack: f64::EPSILON * mag.max(1.0),
        }
    }

    fn test(&self, dom: &[Interval; 3]) -> Sign {
        nonneg(&self.g, dom, self.slack, FACE_BUDGET)
    }

    fn surely_fails(&self, dom: &[Interval; 3]) -> bool {
        self.g.eval(dom).hi < -self.slack
    }
}

/// Conditions for the image (xi, yi) to lie in a box; `None` for an infinite side.
fn inside_conds(b: &SymBox, xi: &Poly, yi: &Poly, t: Interval) -> Vec<Option<Cond>> {
    let mk = |e: &End, img: &Poly, upper: bool| {
        e.poly().map(|bp| {
            let g = if upper { bp - img } else { img - bp };
            Cond::new(g, bp, t)
        })
    };
    vec![
        mk(&b.x[0], xi, false),
        mk(&b.x[1], xi, true),
        mk(&b.y[0], yi, false),
        mk(&b.y[1], yi, true),
    ]
}

/// Separating conditions: any one of them keeps the image off the interior.
fn apart_conds(b: &SymBox, xi: &Poly, yi: &Poly, t: Interval) -> Vec<Option<Cond>> {
    let mk = |e: &End, img: &Poly, below: bool| {
        e.poly().map(|bp| {
            let g = if below { bp - img } else { img - bp };
            Cond::new(g, bp, t)
        })
    };
    vec![
        mk(&b.x[0], xi, true),
        mk(&b.x[1], xi, false),
        mk(&b.y[0], yi, true),
        mk(&b.y[1], yi, false),
    ]
}

fn all_hold(conds: &[Option<Cond>], dom: &[Interval; 3]) -> bool {
    conds
        .iter()
        .all(|c| c.as_ref().is_none_or(|c| c.test(dom) == Sign::Holds))
}

fn any_fails(conds: &[Option<Cond>], dom: &[Interval; 3]) -> bool {
    conds
        .iter()
        .any(|c| c.as_ref().is_some_and(|c| c.surely_fails(dom)))
}

/// Sorts symbolic breakpoints along one axis; `None` if the order cannot be
/// shown over the t-range.
fn ordered_breaks(ends: Vec<&End>, t: Interval) -> Option<Vec<End>> {
    let mut finite: Vec<Poly> = Vec::new();
    let (mut neg, mut pos) = (false, false);
    for e in ends {
        match e {
            End::NegInf => neg = true,
            End::PosInf => pos = true,
            End::At(p) => {
                if !finite.contains(p) {
                    finite.push(p.clone())
                }
            }
        }
    }
    let tm = t.mid();
    finite.sort_by(|a, b| a.eval_f64(0.0, 0.0, tm).total_cmp(&b.eval_f64(0.0, 0.0, tm)));
    let dom = [Interval::ZERO, Interval::ZERO, t];
    for w in finite.windows(2) {
        if nonneg(&(&w[1] - &w[0]), &dom, 0.0, FACE_BUDGET) != Sign::Holds {
            return None;
        }
    }
    let mut out = Vec::new();
    if neg {
        out.push(End::NegInf);
    }
    out.extend(finite.into_iter().map(End::At));
    if pos {
        out.push(End::PosInf);
    }
    Some(out)
}

/// Maximal rectangles inside the union of `targets`, valid for every t in
/// the range. `None` when the breakpoints cannot be ordered there.
fn cover_rects(targets: &[SymBox], t: Interval) -> Option<Vec<SymBox>> {
    let xs = ordered_breaks(targets.iter().flat_map(|b| b.x.iter()).collect(), t)?;
    let ys = ordered_breaks(targets.iter().flat_map(|b| b.y.iter()).collect(), t)?;
    let pos = |axis: &[End], e: &End| axis.iter().position(|a| a == e).expect("break listed");
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let mut covered = vec![vec![false; ny]; nx];
    for b in targets {
        let (x0, x1) = (pos(&xs, &b.x[0]), pos(&xs, &b.x[1]));
        let (y0, y1) = (pos(&ys, &b.y[0]), pos(&ys, &b.y[1]));
        for col in covered.iter_mut().take(x1).skip(x0) {
            for cell in col.iter_mut().take(y1).skip(y0) {
                *cell = true;
            }
        }
    }
    let mut rects: Vec<[usize; 4]> = Vec::new();
    for i0 in 0..nx {
        for i1 in i0..nx {
            let mut j = 0;
            while j < ny {
                if (i0..=i1).all(|i| covered[i][j]) {
                    let j0 = j;
                    while j < ny && (i0..=i1).all(|i| covered[i][j]) {
                        j += 1;
                    }
                    rects.push([i0, i1 + 1, j0, j]);
                } else {
                    j += 1;
                }
            }
        }
    }
    let inside = |a: &[usize; 4], b: &[usize; 4]| {
        b[0] <= a[0] && a[1] <= b[1] && b[2] <= a[2] && a[3] <= b[3]
    };
    let maximal: Vec<SymBox> = rects
        .iter()
        .enumerate()
        .filter(|(i, a)| {
            !rects
                .iter()
                .enumerate()
                .any(|(j, b)| j != *i && inside(a, b) && (a != &b || j < *i))
        })
        .map(|(_, r)| SymBox {
            x: [xs[r[0]].clone(), xs[r[1]].clone()],
            y: [ys[r[2]].clone(), ys[r[3]].clone()],
        })
        .collect();
    Some(maximal)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Leaf {
    Holds,
    Fails,
    Unknown,
}

enum Test {
    Inside {
        targets: Vec<SymBox>,
        target_conds: Vec<Vec<Option<Cond>>>,
        /// covers proven over the whole root t-range
        covers: Option<Vec<Vec<Option<Cond>>>>,
    },
    Avoid(Vec<Option<Cond>>),
}

/// Compiled job: image polynomials and the leaf test.
struct Job {
    x: Coord,
    y: Coord,
    xi: Poly,
    yi: Poly,
    root: [Interval; 3],
    test: Test,
}

impl Job {
    fn compile(source: &SymBox, goal: &Goal, reach: [Reach; 2], t: Interval, r_max: f64) -> Job {
        let x = coord(&source.x, Var::P, reach[0], r_max);
        let y = coord(&source.y, Var::Q, reach[1], r_max);
        let xi = &(&x.expr * &y.expr) + &c_poly();
        let yi = x.expr.clone();
        let test = match goal {
            Goal::Inside(targets) => Test::Inside {
                target_conds: targets.iter().map(|b| inside_conds(b, &xi, &yi, t)).collect(),
                covers: cover_rects(targets, t).map(|rs| {
                    rs.iter().map(|b| inside_conds(b, &xi, &yi, t)).collect()
                }),
                targets: targets.clone(),
            },
            Goal::Avoid(b) => Test::Avoid(apart_conds(b, &xi, &yi, t)),
        };
        let root = [x.root, y.root, t];
        Job {
            x,
            y,
            xi,
            yi,
            root,
            test,
        }
    }

    fn leaf(&self, dom: &[Interval; 3]) -> Leaf {
        match &self.test {
            Test::Inside {
                targets,
                target_conds,
                covers,
            } => {
                let local;
                let rects = match covers {
                    Some(c) => c,
                    None => match cover_rects(targets, dom[2]) {
                        Some(rs) => {
                            local = rs
                                .iter()
                                .map(|b| inside_conds(b, &self.xi, &self.yi, dom[2]))
                                .collect::<Vec<_>>();
                            &local
                        }
                        None => target_conds,
                    },
                };
                if rects.iter().any(|c| all_hold(c, dom)) {
                    Leaf::Holds
                } else if target_conds.iter().all(|c| any_fails(c, dom)) {
                    Leaf::Fails
                } else {
                    Leaf::Unknown
                }
            }
            Test::Avoid(conds) => {
                if conds
                    .iter()
                    .any(|c| c.as_ref().is_some_and(|c| c.test(dom) == Sign::Holds))
                {
                    Leaf::Holds
                } else if conds
                    .iter()
                    .all(|c| c.as_ref().is_none_or(|c| c.surely_fails(dom)))
                {
                    Leaf::Fails
                } else {
                    Leaf::Unknown
                }
            }
        }
    }

    /// Widths in source units; infinite directions are not split.
    fn split(&self, dom: &[Interval; 3]) -> Option<([Interval; 3], [Interval; 3])> {
        let side = |c: &Coord, iv: Interval| -> f64 {
            if !iv.is_bounded() {
                return 0.0;
            }
            match &c.len {
                Some(len) => iv.width() * len.eval(&[Interval::ZERO, Interval::ZERO, dom[2]]).mag(),
                None => iv.width(),
            }
        };
        let t = dom[2];
        let widths = [
            side(&self.x, dom[0]),
            side(&self.y, dom[1]),
            t.width() * (2.0 * t.hi - 1.0),
        ];
        let mut best = None;
        for (i, w) in widths.iter().enumerate() {
            let (lo, hi) = dom[i].bisect();
            // a width that no longer halves is exhausted
            if *w > 0.0 && lo.width() < dom[i].width() && hi.width() < dom[i].width() {
                if best.is_none_or(|(_, bw)| *w > bw) {
                    best = Some((i, *w));
                }
            }
        }
        let (i, _) = best?;
        let (lo, hi) = dom[i].bisect();
        let (mut a, mut b) = (*dom, *dom);
        a[i] = lo;
        b[i] = hi;
        Some((a, b))
    }

    fn witness(&self, dom: &[Interval; 3]) -> (IBox, Interval) {
        let bx = IBox::new(self.x.expr.eval(dom), self.y.expr.eval(dom));
        (bx, c_poly().eval(dom))
    }

    fn run(&self, name: String, max_depth: u32) -> PartCertificate {
        let mut level = vec![self.root];
        let mut leaves = 0usize;
        let mut depth = 0u32;
        loop {
            let verdicts: Vec<Leaf> = level.par_iter().map(|d| self.leaf(d)).collect();
            leaves += level.len();
            let done = |status, at: Option<&[Interval; 3]>| {
                let w = at.map(|d| self.witness(d));
                PartCertificate {
                    name: name.clone(),
                    status,
                    depth,
                    leaves,
                    counterexample: w.map(|w| w.0),
                    counterexample_c: w.map(|w| w.1),
                }
            };
            if let Some(i) = verdicts.iter().position(|v| *v == Leaf::Fails) {
                return done(Status::Failed, Some(&level[i]));
            }
            let open: Vec<[Interval; 3]> = level
                .iter()
                .zip(&verdicts)
                .filter(|(_, v)| **v == Leaf::Unknown)
                .map(|(d, _)| *d)
                .collect();
            if open.is_empty() {
                return done(Status::Certified, None);
            }
            if depth >= max_depth || open.len() * 2 > LEVEL_CAP {
                return done(Status::DepthExceeded, Some(&open[0]));
            }
            let halves: Vec<Option<([Interval; 3], [Interval; 3])>> =
                open.par_iter().map(|d| self.split(d)).collect();
            if let Some(i) = halves.iter().position(Option::is_none) {
                return done(Status::DepthExceeded, Some(&open[i]));
            }
            level = halves
                .into_iter()
                .flatten()
                .flat_map(|(a, b)| [a, b])
                .collect();
            depth += 1;
        }
    }
}

fn run_spec(spec: &JobSpec, t: Interval, opts: &CertifyOptions) -> Result<Vec<PartCertificate>, CertifyError> {
    let unbounded = |s: &[End; 2]| !matches!(s, [End::At(_), End::At(_)]);
    for (s, axis) in [(&spec.source.x, "x"), (&spec.source.y, "y")] {
        if matches!(s, [End::NegInf | End::PosInf, End::NegInf | End::PosInf]) {
            return Err(CertifyError::DoublyInfinite(axis));
        }
    }
    let tails = unbounded(&spec.source.x) || unbounded(&spec.source.y);
    let mut out = Vec::new();
    for &rx in reaches(&spec.source.x) {
        for &ry in reaches(&spec.source.y) {
            let suffix = match (rx == Reach::Tail, ry == Reach::Tail) {
                _ if !tails => String::new(),
                (false, false) => "/core".into(),
                (true, false) => "/tail-x".into(),
                (false, true) => "/tail-y".into(),
                (true, true) => "/tail-xy".into(),
            };
            let job = Job::compile(&spec.source, &spec.goal, [rx, ry], t, opts.r_max);
            out.push(job.run(format!("{}{}", spec.name, suffix), opts.max_depth));
        }
    }
    Ok(out)
}

/// Certifies every job of a claim over the c-interval.
pub fn certify_claim(claim: &Claim, c: Interval, opts: &CertifyOptions) -> Result<Certificate, CertifyError> {
    let t = t_range(c)?;
    let parts: Vec<Vec<PartCertificate>> = claim
        .jobs
        .par_iter()
        .map(|j| run_spec(j, t, opts))
        .collect::<Result<_, _>>()?;
    Ok(Certificate::from_parts(claim, c, parts.into_iter().flatten().collect()))
}

fn union_name(rs: &[RegionId]) -> String {
    rs.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(" ∪ ")
}

pub fn inclusion_claim(source: RegionId, targets: &[RegionId]) -> Claim {
    Claim {
        id: format!("inclusion/{}", source),
        statement: format!("f({}) ⊆ {}", source, union_name(targets)),
        jobs: vec![JobSpec {
            name: source.to_string(),
            source: SymBox::region(source),
            goal: Goal::Inside(targets.iter().map(|r| SymBox::region(*r)).collect()),
        }],
    }
}

pub fn disjoint_claim(source: RegionId, avoid: RegionId) -> Claim {
    Claim {
        id: format!("disjoint/{}/{}", source, avoid),
        statement: format!("f({}) ∩ int {} = ∅", source, avoid),
        jobs: vec![JobSpec {
            name: source.to_string(),
            source: SymBox::region(source),
            goal: Goal::Avoid(SymBox::region(avoid)),
        }],
    }
}

pub fn certify_inclusion(
    source: RegionId,
    targets: &[RegionId],
    c: Interval,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    certify_claim(&inclusion_claim(source, targets), c, opts)
}

pub fn certify_disjoint(
    source: RegionId,
    avoid: RegionId,
    c: Interval,
    opts: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    certify_claim(&disjoint_claim(source, avoid), c, opts)
}

/// Regions whose forward transitions belong to the corpus.
pub const FORWARD_ITEMS: [RegionId; 21] = {
    use RegionId::*;
    [L, M, N, P, R0, R1, R2, R3, QR, QS, QT, QU, A, B, C, D, E, F, G, H1, H2]
};

/// The full claim corpus.
pub fn suite_claims() -> Result<Vec<Claim>, CertifyError> {
    use RegionId::*;
    let mut claims = Vec::new();
    for r in FORWARD_ITEMS {
        let mut cl = inclusion_claim(r, forward_successors(r)?);
        cl.id = format!("forward/{}", r);
        claims.push(cl);
    }

    let c = c_poly();
    let y_box = SymBox::region(Y);
    let y_image = SymBox::finite(c.clone(), &(&c * &c) + &c, c.clone(), Poly::zero());
    claims.push(Claim {
        id: "trap/Y".into(),
        statement: "f(Y) ⊆ [c, c²+c] × [c, 0] ⊆ Y".into(),
        jobs: vec![
            JobSpec {
                name: "image".into(),
                source: y_box.clone(),
                goal: Goal::Inside(vec![y_image]),
            },
            JobSpec {
                name: "invariant".into(),
                source: y_box.clone(),
                goal: Goal::Inside(vec![y_box]),
            },
        ],
    });

    for t in RegionId::PARTITION {
        let pre = inverse_successors(t)?;
        claims.push(Claim {
            id: format!("inverse/{}", t),
            statement: format!("f⁻¹({}) ⊆ {}", t, union_name(pre)),
            jobs: RegionId::PARTITION
                .iter()
                .filter(|w| !pre.contains(w))
                .map(|w| JobSpec {
                    name: w.to_string(),
                    source: SymBox::region(*w),
                    goal: Goal::Avoid(SymBox::region(t)),
                })
                .collect(),
        });
    }

    let r3 = SymBox::region(R3);
    claims.push(Claim {
        id: "backward-r2/preimage-of-R3".into(),
        statement: "f⁻¹(R3) ∩ R2 ⊆ [-1, c] × [-1, c]".into(),
        jobs: vec![
            JobSpec {
                name: "x-strip".into(),
                source: SymBox::finite(c.clone(), Poly::zero(), k(-1.0), Poly::zero()),
                goal: Goal::Avoid(r3.clone()),
            },
            JobSpec {
                name: "y-strip".into(),
                source: SymBox::finite(k(-1.0), Poly::zero(), c.clone(), Poly::zero()),
                goal: Goal::Avoid(r3),
            },
        ],
    });
    let corner = SymBox::finite(k(-1.0), c.clone(), k(-1.0), c.clone());
    claims.push(Claim {
        id: "backward-r2/preimage-of-corner".into(),
        statement: "f⁻¹([-1, c] × [-1, c]) ∩ R ⊆ R1".into(),
        jobs: [R0, R2, R3]
            .iter()
            .map(|w| JobSpec {
                name: w.to_string(),
                source: SymBox::region(*w),
                goal: Goal::Avoid(corner.clone()),
            })
            .collect(),
    });
    Ok(claims)
}

pub fn certify_suite(c: Interval, opts: &CertifyOptions) -> Result<Vec<Certificate>, CertifyError> {
    t_range(c)?;
    let claims = suite_claims()?;
    claims.par_iter().map(|cl| certify_claim(cl, c, opts)).collect()
}

/// Lower bound on the x-coordinate of an R0 point whose next m iterates stay
/// in R0: beta_0 = 0, beta_{m+1} = (beta_m - c) / a2.
pub fn r0_chain_bound(m: u32) -> Poly {
    let inv_t = Poly::term(Interval::ONE, [0, 0, -1]);
    let c = c_poly();
    (0..m).fold(Poly::zero(), |b, _| &(&b - &c) * &inv_t)
}

/// Smallest n with beta_n > 1 + c over the whole c-interval, shown in
/// interval arithmetic; `None` if none up to `limit`.
pub fn r0_threshold(c: Interval, limit: u32) -> Result<Option<u32>, CertifyError> {
    let t = t_range(c)?;
    let one_c = k(1.0) + &c_poly();
    let dom = [Interval::ZERO, Interval::ZERO, t];
    Ok((1..=limit).find(|&n| {
        let gap = &r0_chain_bound(n) - &one_c;
        gap.eval(&dom).lo > 0.0
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct R0Exclusion {
    /// steps after which no R0 orbit can still be in R0
    pub threshold: u32,
    pub certificate: Certificate,
}

/// Certifies that no point of R0 has n consecutive iterates in R0, n being
/// the analytic threshold. Each step shows f([0, beta_{m+1}] × [0, a2])
/// avoids [beta_m, 1 + c] × [0, a2]; beta_n > 1 + c closes the chain.
pub fn r0_exclusion_claim(threshold: u32) -> Claim {
    let one_c = k(1.0) + &c_poly();
    Claim {
        id: "backward-r0/exclusion".into(),
        statement: format!("f⁻ⁿ(R0) ∩ R0 = ∅ for n ≥ {threshold}"),
        jobs: (0..threshold)
            .map(|m| JobSpec {
                name: format!("step-{m}"),
                source: SymBox::finite(Poly::zero(), r0_chain_bound(m + 1), Poly::zero(), tp()),
                goal: Goal::Avoid(SymBox::finite(r0_chain_bound(m), one_c.clone(), Poly::zero(), tp())),
            })
            .collect(),
    }
}

pub fn certify_r0_backward_exclusion(c: Interval, opts: &CertifyOptions) -> Result<Option<R0Exclusion>, CertifyError> {
    let Some(n) = r0_threshold(c, 256)? else {
        return Ok(None);
    };
    let certificate = certify_claim(&r0_exclusion_claim(n), c, opts)?;
    Ok(Some(R0Exclusion {
        threshold: n,
        certificate,
    }))
}

/// Splits [lo, hi] into `n` consecutive intervals sharing endpoints.
pub fn split_range(lo: f64, hi: f64, n: usize) -> Vec<Interval> {
    let at = |i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        }
    };
    (0..n).map(|i| Interval::new(at(i), at(i + 1))).collect()
}
