use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fxy::certify::{
    certify_claim, certify_disjoint, certify_inclusion, split_range, suite_claims, CertifyOptions, Goal, Status,
};
use fxy::classify::{
    classify_backward, classify_forward, theta_unstable_direction, BackwardClass, ClassifyOptions,
    CycleMode, Direction, ForwardClass, StopReason,
};
use fxy::dynamics::{apply, apply_inverse, apply_unchecked, fixed_points, three_cycle, Parameter, Point};
use fxy::interval::{f_image, IBox, Interval};
use fxy::poly::Poly;
use fxy::regions::{catalog, RegionId};
use fxy::render::{sweep, GridSpec};

fn q(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

fn par(c: f64) -> Parameter {
    Parameter::new(c).unwrap()
}

fn a2_of(c: f64) -> f64 {
    0.5 * (1.0 + (1.0 - 4.0 * c).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn inverse_round_trip(x in -10.0f64..10.0, y in -10.0f64..10.0, c in -1.0f64..0.25) {
        prop_assume!(x.abs() > 1e-3);
        let w = apply(Point::new(x, y), c).unwrap();
        let back = apply_inverse(w, c).unwrap();
        let scale = 1.0 + (x * y).abs() + c.abs();
        prop_assert_eq!(back.x, x);
        prop_assert!((back.y - y).abs() <= 8.0 * f64::EPSILON * scale / x.abs());
    }

    #[test]
    fn vieta(c in -10.0f64..0.25) {
        let fp = fixed_points(c).unwrap();
        let s = 1.0 + fp.a1.abs() + fp.a2.abs();
        prop_assert!((fp.a1 + fp.a2 - 1.0).abs() <= 4.0 * f64::EPSILON * s);
        prop_assert!((fp.a1 * fp.a2 - c).abs() <= 4.0 * f64::EPSILON * c.abs().max(1.0) * s);
        prop_assert!(fp.a1 <= fp.a2);
    }

    #[test]
    fn cycle_closes_exactly(c in -1.0f64..0.25) {
        // f^3(p) = p holds in exact rational arithmetic for any c
        let cq = q(c);
        let step = |(x, y): (BigRational, BigRational)| (&x * &y + &cq, x);
        let p = (q(-1.0), q(-1.0));
        let p3 = step(step(step(p.clone())));
        prop_assert_eq!(&p3, &p);
        let cy = three_cycle(c);
        let fz = apply(cy.p, c).unwrap();
        prop_assert!(fz.dist_inf(&cy.fp) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn image_enclosure(
        x0 in -5.0f64..5.0, wx in 0.0f64..2.0, y0 in -5.0f64..5.0, wy in 0.0f64..2.0,
        c0 in -1.0f64..0.0, wc in 0.0f64..0.1, u in 0.0f64..1.0, v in 0.0f64..1.0, s in 0.0f64..1.0,
    ) {
        let b = IBox::new(Interval::new(x0, x0 + wx), Interval::new(y0, y0 + wy));
        let ci = Interval::new(c0 - wc, c0);
        let im = f_image(b, ci);
        let (x, y, c) = (x0 + u * wx, y0 + v * wy, c0 - s * wc);
        prop_assume!(b.contains(x, y) && ci.contains(c));
        let exact = q(x) * q(y) + q(c);
        prop_assert!(q(im.x.lo) <= exact && exact <= q(im.x.hi));
        prop_assert!(im.y.contains(x));
    }

    #[test]
    fn poly_enclosure(
        coefs in proptest::collection::vec(-4i32..=4, 6),
        p0 in -2.0f64..2.0, pw in 0.0f64..1.0, q0 in -2.0f64..2.0, qw in 0.0f64..1.0,
        t0 in 1.0f64..1.6, tw in 0.0f64..0.02,
        u in 0.0f64..1.0, v in 0.0f64..1.0, w in 0.0f64..1.0,
    ) {
        let exps: [[i16; 3]; 6] = [[0, 0, 0], [1, 0, 1], [0, 2, 0], [1, 1, -1], [2, 0, 2], [0, 1, -2]];
        let poly = exps.iter().zip(&coefs).fold(Poly::zero(), |acc, (e, &k)| {
            &acc + &Poly::term(Interval::point(k as f64), *e)
        });
        let dom = [Interval::new(p0, p0 + pw), Interval::new(q0, q0 + qw), Interval::new(t0, t0 + tw)];
        let (pp, qq, tt) = (p0 + u * pw, q0 + v * qw, t0 + w * tw);
        prop_assume!(dom[0].contains(pp) && dom[1].contains(qq) && dom[2].contains(tt));
        let pw_q = |x: f64, e: i16| {
            let b = q(x);
            if e >= 0 { num_traits::pow(b, e as usize) } else { num_traits::pow(b.recip(), (-e) as usize) }
        };
        let exact = exps.iter().zip(&coefs).fold(q(0.0), |acc, (e, &k)| {
            acc + q(k as f64) * pw_q(pp, e[0]) * pw_q(qq, e[1]) * pw_q(tt, e[2])
        });
        let enc = poly.eval(&dom);
        prop_assert!(q(enc.lo) <= exact && exact <= q(enc.hi), "{:?} misses value", enc);
    }

    #[test]
    fn trap_is_forward_invariant(x in -3.0f64..3.0, y in -3.0f64..3.0, c in -0.99f64..-0.01) {
        let opts = ClassifyOptions::default();
        let v = classify_forward(Point::new(x, y), par(c), &opts);
        if v.record.stop_reason == StopReason::EnteredTrap {
            let mut z = *v.record.points.last().unwrap();
            for _ in 0..200 {
                z = apply_unchecked(z, c);
                prop_assert!(c <= z.x && z.x <= 0.0 && c <= z.y && z.y <= 0.0);
            }
        }
    }

    #[test]
    fn region_escape_agrees_with_norm(x in -4.0f64..4.0, y in -4.0f64..4.0, c in -0.99f64..-0.01) {
        let opts = ClassifyOptions::default();
        let v = classify_forward(Point::new(x, y), par(c), &opts);
        if v.record.stop_reason == StopReason::EnteredEscapeRegion {
            let mut z = *v.record.points.last().unwrap();
            let escaped = (0..200).any(|_| {
                z = apply_unchecked(z, c);
                !(z.norm_inf() <= 1e6)
            });
            prop_assert!(escaped);
        }
    }
}

/// Sampled check of every Certified corpus item: images of random source
/// points land where the certificate says.
#[test]
fn certificates_hold_on_samples() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let claims = suite_claims().unwrap();
    let opts = CertifyOptions::default();
    let mut samples = 0usize;
    let subs = split_range(-0.99, -0.01, 98);
    for k in [0usize, 17, 40, 49, 63, 97] {
        let ci = subs[k];
        for claim in &claims {
            let cert = certify_claim(claim, ci, &opts).unwrap();
            assert_eq!(cert.status, Status::Certified, "{}", claim.id);
            for job in &claim.jobs {
                for _ in 0..400 {
                    let c = r.gen_range(ci.lo..=ci.hi);
                    let t = a2_of(c);
                    let b = job.source.at(t).map(|v| v.clamp(-20.0, 20.0));
                    let z = Point::new(r.gen_range(b[0]..=b[1]), r.gen_range(b[2]..=b[3]));
                    let w = apply_unchecked(z, c);
                    let slack = 1e-12 * (1.0 + w.norm_inf());
                    let ok = match &job.goal {
                        Goal::Inside(ts) => ts.iter().any(|s| {
                            let [x0, x1, y0, y1] = s.at(t);
                            x0 - slack <= w.x && w.x <= x1 + slack && y0 - slack <= w.y && w.y <= y1 + slack
                        }),
                        Goal::Avoid(s) => {
                            let [x0, x1, y0, y1] = s.at(t);
                            !(x0 + slack < w.x && w.x < x1 - slack && y0 + slack < w.y && w.y < y1 - slack)
                        }
                    };
                    assert!(ok, "{} / {}: c={c}, z={z:?} -> {w:?}", claim.id, job.name);
                    samples += 1;
                }
            }
        }
    }
    assert!(samples >= 100_000, "{samples}");
}

#[test]
fn false_claims_fail_with_real_counterexamples() {
    let opts = CertifyOptions::default();
    let ci = Interval::new(-0.51, -0.5);
    // f(R0) reaches R1, so R0 alone is not a target
    let cert = certify_inclusion(RegionId::R0, &[RegionId::R0], ci, &opts).unwrap();
    assert_eq!(cert.status, Status::Failed);
    let b = cert.counterexample.expect("counterexample box");
    let cc = cert.counterexample_c.unwrap_or(ci);
    let c = cc.mid();
    let w = apply_unchecked(Point::new(b.x.mid(), b.y.mid()), c);
    let r0 = *catalog(c).unwrap().get(RegionId::R0);
    assert!(!r0.contains_closed(w), "{w:?} is inside R0");

    // f(Y) meets the interior of Y
    let cert = certify_disjoint(RegionId::Y, RegionId::Y, ci, &opts).unwrap();
    assert_eq!(cert.status, Status::Failed);
    let b = cert.counterexample.unwrap();
    let c = cert.counterexample_c.unwrap_or(ci).mid();
    let w = apply_unchecked(Point::new(b.x.mid(), b.y.mid()), c);
    let y = *catalog(c).unwrap().get(RegionId::Y);
    assert!(y.margin(w) > 0.0, "{w:?} not interior");
}

#[test]
fn certificates_survive_refinement() {
    let opts = CertifyOptions::default();
    let claims = suite_claims().unwrap();
    let whole = Interval::new(-0.7, -0.6);
    for half in split_range(whole.lo, whole.hi, 2) {
        for cl in &claims {
            assert_eq!(certify_claim(cl, half, &opts).unwrap().status, Status::Certified, "{}", cl.id);
        }
    }
}

#[test]
fn backward_forward_duality() {
    let c = -0.5;
    let fp = fixed_points(c).unwrap();
    let (lam, v) = theta_unstable_direction(c).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let s = 1e-9 * lam.powf(r.gen_range(0.0..1.0));
        let mut z = Point::new(fp.theta.x + s * v.x, fp.theta.y + s * v.y);
        for _ in 0..r.gen_range(10..40) {
            let next = apply_unchecked(z, c);
            if next.norm_inf() > 10.0 {
                break;
            }
            z = next;
        }
        let out = classify_backward(z, par(c), &ClassifyOptions::default());
        assert_eq!(out.class, BackwardClass::ThetaUnstableCandidate);
        let n = out.record.iterations;
        let mut w = out.record.points[n];
        for _ in 0..n {
            w = apply_unchecked(w, c);
        }
        // re-expanding from within 1e-9 of theta multiplies the rounding at
        // theta by about |z - theta| / 1e-9
        let scale = z.dist_inf(&fp.theta).max(1.0);
        assert!(w.dist_inf(&z) < 1e-6 * scale, "{z:?} vs {w:?}");
    }
}

/// Raw fate: true once the orbit enters Y, false once it exceeds 1e6.
fn reaches_trap(z: Point, c: f64) -> bool {
    let mut w = z;
    for _ in 0..5000 {
        if c <= w.x && w.x <= 0.0 && c <= w.y && w.y <= 0.0 {
            return true;
        }
        if !(w.norm_inf() <= 1e6) {
            return false;
        }
        w = apply_unchecked(w, c);
    }
    false
}

/// Bisects each fate change along a horizontal segment; returns both sides.
fn basin_boundary(c: f64, y: f64, x0: f64, x1: f64) -> Vec<Point> {
    let n = 400;
    let xs: Vec<f64> = (0..=n).map(|i| x0 + (x1 - x0) * i as f64 / n as f64).collect();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let flo = reaches_trap(Point::new(lo, y), c);
        if flo == reaches_trap(Point::new(hi, y), c) {
            continue;
        }
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if reaches_trap(Point::new(m, y), c) == flo {
                lo = m;
            } else {
                hi = m;
            }
        }
        out.push(Point::new(lo, y));
        out.push(Point::new(hi, y));
    }
    out
}

fn boundary_points_in_f(c: f64) -> Vec<Point> {
    [-1.2, -1.5, -2.0, -3.0]
        .iter()
        .flat_map(|&y| basin_boundary(c, y, 0.0, 1.0 + c))
        .collect()
}

#[test]
fn stable_theta_orbits_are_monotone() {
    // boundary points in A shadow the stable curve of theta; up to their
    // closest approach they stay in A u H2 with x_0 <= x_2 <= ... and
    // y_0 >= y_2 >= ...
    for c in [-0.2, -0.5, -0.8] {
        let cat = catalog(c).unwrap();
        let a2 = cat.fixed.a2;
        let mut checked = 0;
        for dy in [0.3, 1.0, 3.0] {
            for z in basin_boundary(c, a2 + dy, 0.0, a2) {
                let mut orbit = vec![z];
                for _ in 0..80 {
                    orbit.push(apply_unchecked(*orbit.last().unwrap(), c));
                }
                let d: Vec<f64> = orbit.iter().map(|p| p.dist_inf(&cat.fixed.theta)).collect();
                let closest = (0..d.len()).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
                if d[closest] > 1e-4 {
                    continue;
                }
                checked += 1;
                let run = &orbit[..=closest];
                assert!(run.iter().all(|p| cat.in_any(&[RegionId::A, RegionId::H2], *p)));
                for k in (2..run.len()).step_by(2) {
                    let (a, b) = (run[k - 2], run[k]);
                    assert!(a.x <= b.x && b.y <= a.y, "c={c}: {a:?} -> {b:?}");
                }
            }
        }
        assert!(checked > 0, "c={c}: no stable-curve points found");
    }
}

#[test]
fn six_cycle_itinerary() {
    use RegionId::*;
    let six = [F, RegionId::C, E, G, B, D];
    for c in [-0.3, -0.5, -0.7] {
        let pts = boundary_points_in_f(c);
        assert!(!pts.is_empty());
        let cat = catalog(c).unwrap();
        let mut seen = 0;
        for z in pts {
            for mode in [CycleMode::Metric, CycleMode::Itinerary] {
                let opts = ClassifyOptions {
                    mode,
                    ..ClassifyOptions::default()
                };
                let v = classify_forward(z, par(c), &opts);
                if v.class != ForwardClass::CycleStableCandidate {
                    continue;
                }
                seen += 1;
                // the orbit runs through F, C, E, G, B, D until it settles at the corners
                let pts = &v.record.points;
                for (k, p) in pts.iter().enumerate().take(pts.len().saturating_sub(12)) {
                    let want = six[k % 6];
                    assert!(cat.get(want).contains_closed(*p), "c={c} step {k}: {p:?} not in {want}");
                }
            }
        }
        assert!(seen > 0, "c={c}: no CycleStableCandidate found");
    }
}

#[test]
fn sweep_is_deterministic_and_stable_under_refinement() {
    let c = par(-0.8);
    let opts = ClassifyOptions::default();
    let g = GridSpec::new([-2.5, 2.5, -2.5, 2.5], 64, 64).unwrap();
    let (a, sa) = sweep(&g, c, Direction::Forward, &opts, Some(1)).unwrap();
    let (b, sb) = sweep(&g, c, Direction::Forward, &opts, Some(5)).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa.to_json(), sb.to_json());
    let g2 = GridSpec::new([-2.5, 2.5, -2.5, 2.5], 128, 128).unwrap();
    let (_, s2) = sweep(&g2, c, Direction::Forward, &opts, None).unwrap();
    for t in fxy::classify::Tag::ALL {
        let d = (sa.fraction(t) - s2.fraction(t)).abs();
        assert!(d < 0.02, "{t}: {} vs {}", sa.fraction(t), s2.fraction(t));
    }
}

#[test]
fn point_parameters_below_quarter_only() {
    assert!(fixed_points(0.26).is_err());
    let _ = Interval::ONE;
}
