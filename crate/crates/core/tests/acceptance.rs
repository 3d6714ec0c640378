//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fxy::certify::{
    certify_r0_backward_exclusion, certify_suite, r0_threshold, split_range, CertifyOptions, Status,
};
use fxy::classify::{
    classify_backward, classify_forward, cycle_unstable_direction, envelope_check, return_times,
    theta_unstable_direction, BackwardClass, ClassifyOptions, Direction, ForwardClass,
};
use fxy::dynamics::{
    apply, apply_inverse, apply_unchecked, c_sequence, fib_escape, fixed_points, g_inverse_chain,
    h1_map, sequences, stability, three_cycle, Parameter, Point, SequenceKind, SequenceOutput,
    StabilityClass, StabilityTarget,
};
use fxy::interval::Interval;
use fxy::regions::{catalog, RegionBox, RegionId};
use fxy::render::{ppm_bytes, sweep, sweep_sequential, GridSpec, Palette};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn par(c: f64) -> Parameter {
    Parameter::new(c).expect("valid parameter")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in a finite box.
fn in_box(r: &mut ChaCha8Rng, b: [f64; 4]) -> Point {
    Point::new(r.gen_range(b[0]..=b[1]), r.gen_range(b[2]..=b[3]))
}

/// Uniform point in a union of disjoint finite boxes.
fn in_union(r: &mut ChaCha8Rng, boxes: &[[f64; 4]]) -> Point {
    let areas: Vec<f64> = boxes.iter().map(|b| (b[1] - b[0]) * (b[3] - b[2])).collect();
    let mut u = r.gen_range(0.0..areas.iter().sum::<f64>());
    for (b, a) in boxes.iter().zip(&areas) {
        if u < *a {
            return in_box(r, *b);
        }
        u -= a;
    }
    in_box(r, *boxes.last().unwrap())
}

fn finite(b: &RegionBox, cut: f64) -> [f64; 4] {
    let f = |v: f64| v.clamp(-cut, cut);
    [f(b.x.lo), f(b.x.hi), f(b.y.lo), f(b.y.hi)]
}

fn c1_certification() -> Outcome {
    let opts = CertifyOptions::default();
    let start = Instant::now();
    let (mut items, mut worst) = (0usize, 0u32);
    let mut bad = Vec::new();
    for c in split_range(-0.99, -0.01, 98) {
        let certs = certify_suite(c, &opts).map_err(|e| e.to_string())?;
        for cert in certs {
            items += 1;
            worst = worst.max(cert.max_depth_used);
            if cert.status != Status::Certified {
                bad.push(format!("{} on [{}, {}]: {}", cert.claim, c.lo, c.hi, cert.status));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(bad.is_empty(), "{} items not certified, first: {}", bad.len(), bad[0]);
    ensure!(worst <= 24, "depth {worst} > 24");
    ensure!(secs < 300.0, "took {secs:.1}s");
    Ok(format!("{items} items over 98 subintervals certified, max depth {worst}, {secs:.1}s"))
}

fn c2_fixed_points() -> Outcome {
    let mut r = rng(2);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let c = -r.gen_range(f64::EPSILON..1.0);
        let fp = fixed_points(c).map_err(|e| e.to_string())?;
        let da = apply(fp.alpha, c).unwrap().dist_inf(&fp.alpha);
        let dt = apply(fp.theta, c).unwrap().dist_inf(&fp.theta);
        let p = three_cycle(c).p;
        let p3 = (0..3).fold(p, |z, _| apply(z, c).unwrap());
        let dp = p3.dist_inf(&p);
        worst = [worst[0].max(da), worst[1].max(dt), worst[2].max(dp)];
        ensure!(da <= 1e-12 && dt <= 1e-12 && dp <= 1e-13, "c={c}: residuals {da:e} {dt:e} {dp:e}");
        let st = stability(c, StabilityTarget::Theta).unwrap().class;
        let sa = stability(c, StabilityTarget::Alpha).unwrap().class;
        ensure!(st == StabilityClass::Saddle, "c={c}: theta is {st:?}");
        ensure!(sa == StabilityClass::Attracting, "c={c}: alpha is {sa:?}");
    }
    Ok(format!(
        "1000 samples, max residuals alpha {:.1e}, theta {:.1e}, cycle {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn c3_alpha_basin() -> Outcome {
    let mut r = rng(3);
    let mut slowest = 0;
    for k in 1..=9 {
        let c = -(k as f64) / 10.0;
        let cat = catalog(c).map_err(|e| e.to_string())?;
        let boxes: Vec<[f64; 4]> = [RegionId::R0, RegionId::R1, RegionId::R2, RegionId::R3]
            .iter()
            .map(|&id| finite(cat.get(id), 10.0))
            .collect();
        let budget = 200.max(3 * fib_escape(c).unwrap() as usize + 50);
        let opts = ClassifyOptions {
            max_iter: budget,
            record_orbit: false,
            ..ClassifyOptions::default()
        };
        let cyc = three_cycle(c);
        let mut done = 0;
        while done < 10_000 {
            let z = in_union(&mut r, &boxes);
            if cyc.min_dist(&z) < 1e-6 {
                continue;
            }
            done += 1;
            let v = classify_forward(z, par(c), &opts);
            ensure!(
                v.class == ForwardClass::AttractingBasin,
                "c={c}, z=({}, {}): {} after {}",
                z.x,
                z.y,
                v.class,
                v.record.iterations
            );
            slowest = slowest.max(v.record.iterations);
        }
    }
    Ok(format!("9 x 10^4 points reach Y, slowest {slowest} steps"))
}

fn c4_escape() -> Outcome {
    let mut r = rng(4);
    let mut slowest = 0;
    for c in [-0.2, -0.5, -0.8] {
        let cat = catalog(c).map_err(|e| e.to_string())?;
        let boxes: Vec<[f64; 4]> = RegionId::S_PRIME.iter().map(|&id| finite(cat.get(id), 10.0)).collect();
        let fp = fixed_points(c).unwrap();
        let cyc = three_cycle(c);
        let mut done = 0;
        while done < 10_000 {
            let z = in_union(&mut r, &boxes);
            if cyc.min_dist(&z) < 1e-6 || z.dist_inf(&fp.theta) < 1e-6 {
                continue;
            }
            done += 1;
            let mut w = z;
            let hit = (1..=500).find(|_| {
                w = apply_unchecked(w, c);
                !(w.norm_inf() <= 1e6)
            });
            match hit {
                Some(n) => slowest = slowest.max(n),
                None => return Err(format!("c={c}, z=({}, {}) bounded for 500 steps", z.x, z.y)),
            }
        }
    }
    Ok(format!("3 x 10^4 points exceed 1e6, slowest {slowest} steps"))
}

fn c5_envelope() -> Outcome {
    let mut r = rng(5);
    let mut gaps = std::collections::BTreeSet::new();
    for c in [-0.8, -0.9] {
        let cat = catalog(c).map_err(|e| e.to_string())?;
        let z0 = finite(cat.get(RegionId::Z0), 10.0);
        for _ in 0..1000 {
            let z = in_box(&mut r, z0);
            let ok = envelope_check(z, c, 10).map_err(|e| e.to_string())?;
            ensure!(ok, "c={c}, z=({}, {}) leaves the envelope", z.x, z.y);
            let t = return_times(z, c, RegionId::QR, 11, 10_000).map_err(|e| e.to_string())?;
            ensure!(t.len() == 11, "c={c}: only {} returns", t.len() - 1);
            gaps.extend(t.windows(2).map(|w| w[1] - w[0]));
        }
    }
    ensure!(gaps.iter().all(|g| (2..=4).contains(g)), "gap set {gaps:?}");
    Ok(format!("2000 points, 10 returns each, gap set {gaps:?}"))
}

/// Points on the unstable branch of theta inside L with norm <= 10.
fn theta_branch_points(c: f64, count: usize, r: &mut ChaCha8Rng) -> Vec<Point> {
    let fp = fixed_points(c).unwrap();
    let (lam, v) = theta_unstable_direction(c).expect("theta is a saddle");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // one fundamental domain of the linear branch, then forward images
        let s = 1e-9 * lam.powf(r.gen_range(0.0..1.0));
        let mut z = Point::new(fp.theta.x + s * v.x, fp.theta.y + s * v.y);
        let k = r.gen_range(0..60);
        for _ in 0..k {
            z = apply_unchecked(z, c);
        }
        if z.x > fp.a2 && z.y > fp.a2 && z.norm_inf() <= 10.0 {
            out.push(z);
        }
    }
    out
}

/// Points on the unstable branch of p inside N, within d of p.
fn cycle_branch_points(c: f64, count: usize, r: &mut ChaCha8Rng) -> Vec<Point> {
    let p = three_cycle(c).p;
    let (lam, v) = cycle_unstable_direction(c).expect("cycle is a saddle");
    let periods = 6;
    (0..count)
        .map(|_| {
            let d = 10f64.powf(r.gen_range(-7.0..-6.0));
            let s = d / lam.powi(periods);
            let mut z = Point::new(p.x - s * v.x, p.y - s * v.y);
            for _ in 0..3 * periods {
                z = apply_unchecked(z, c);
            }
            z
        })
        .collect()
}

fn c6_backward() -> Outcome {
    let mut r = rng(6);
    let c = -0.5;
    let opts = ClassifyOptions::default();
    let fp = fixed_points(c).unwrap();
    let tol = 1e-9;

    // (i) theta branch in L, dominated by the b_n envelope
    let mut steps_i = 0;
    for z in theta_branch_points(c, 1000, &mut r) {
        let v = classify_backward(z, par(c), &opts);
        ensure!(
            v.class == BackwardClass::ThetaUnstableCandidate,
            "(i) z=({}, {}): {} ({:?})",
            z.x,
            z.y,
            v.class,
            v.record.stop_reason
        );
        let pts = &v.record.points;
        steps_i = steps_i.max(pts.len() - 1);
        let w = z.norm_inf();
        let SequenceOutput::Values(b) = sequences(SequenceKind::Bn, c, pts.len() / 2 + 2, Some(w)).unwrap() else {
            unreachable!()
        };
        let bn = |n: usize| if n == 0 { w } else { b[n - 1] };
        for (j, q) in pts.iter().enumerate() {
            let n = j / 2;
            let (bx, by) = if j % 2 == 0 { (bn(n), bn(n)) } else { (bn(n), bn(n + 1)) };
            let inside = q.x >= fp.a2 - tol && q.x <= bx + tol && q.y >= fp.a2 - tol && q.y <= by + tol;
            ensure!(inside, "(i) z=({}, {}) step -{j}: ({}, {}) outside [a2,{bx}]x[a2,{by}]", z.x, z.y, q.x, q.y);
        }
    }

    // (ii) points of A blow up backward along (0, +inf)
    let a_box = [0.0, fp.a2, fp.a2, 10.0];
    let mut slowest = 0;
    for _ in 0..1000 {
        let z = in_box(&mut r, a_box);
        let mut w = z;
        let mut hit = None;
        for n in 1..=200 {
            match apply_inverse(w, c) {
                Ok(q) => w = q,
                Err(e) => return Err(format!("(ii) z=({}, {}): {e} at step {n}", z.x, z.y)),
            }
            if w.y > 1e6 && w.x.abs() < 1e-3 {
                hit = Some(n);
                break;
            }
        }
        let n = hit.ok_or_else(|| format!("(ii) z=({}, {}) no blow-up in 200 steps", z.x, z.y))?;
        slowest = slowest.max(n);
    }

    // (iii) cycle branch in N, monotone convergence of every third preimage
    let p = three_cycle(c).p;
    for z in cycle_branch_points(c, 1000, &mut r) {
        ensure!(z.x < -1.0 && z.y < -1.0, "(iii) constructed point ({}, {}) not in N", z.x, z.y);
        let v = classify_backward(z, par(c), &opts);
        ensure!(
            v.class == BackwardClass::CycleUnstableCandidate,
            "(iii) z=({}, {}): {} ({:?})",
            z.x,
            z.y,
            v.class,
            v.record.stop_reason
        );
        let thirds: Vec<&Point> = v.record.points.iter().step_by(3).collect();
        let mono = thirds.windows(2).all(|w| w[0].x <= w[1].x && w[0].y <= w[1].y);
        ensure!(mono, "(iii) z=({}, {}): f^-3n not monotone", z.x, z.y);
        // the stop can land on any phase; step -n sits near f^-n(p)
        let n = v.record.iterations;
        let cyc = three_cycle(c);
        let target = [cyc.p, cyc.f2p, cyc.fp][n % 3];
        let last = v.record.points[n];
        ensure!(last.dist_inf(&target) < tol, "(iii) step -{n} at ({}, {}) not near f^-{n}(p)", last.x, last.y);
        ensure!(thirds.last().unwrap().dist_inf(&p) < 1e-8, "(iii) every third preimage did not approach p");
    }
    Ok(format!(
        "(i) 1000 theta-branch points in L within envelope, <= {steps_i} steps; (ii) 1000 A points blow up by step {slowest}; (iii) 1000 N points converge to p"
    ))
}

fn analytic_threshold(c: f64) -> u32 {
    let a2 = fixed_points(c).unwrap().a2;
    (1..=256)
        .find(|&n| {
            let s: f64 = (0..n).map(|i| a2.powi(i as i32)).sum();
            -c / a2.powi(n as i32) * s > 1.0 + c
        })
        .unwrap()
}

fn c7_r0_exclusion() -> Outcome {
    let mut r = rng(7);
    let mut notes = Vec::new();
    for c in [-0.3, -0.6] {
        let ci = Interval::point(c);
        let n = r0_threshold(ci, 256)
            .map_err(|e| e.to_string())?
            .ok_or("no interval-verified threshold")?;
        ensure!(n == analytic_threshold(c), "c={c}: threshold {n} vs analytic {}", analytic_threshold(c));
        let ex = certify_r0_backward_exclusion(ci, &CertifyOptions::default())
            .map_err(|e| e.to_string())?
            .ok_or("no threshold")?;
        ensure!(
            ex.certificate.status == Status::Certified,
            "c={c}: {}",
            ex.certificate.status
        );
        let r0 = *catalog(c).unwrap().get(RegionId::R0);
        let b = finite(&r0, 10.0);
        for _ in 0..1000 {
            let z = in_box(&mut r, b);
            let mut w = z;
            for m in 1..=60u32 {
                match apply_inverse(w, c) {
                    Ok(q) if q.norm_inf() <= 1e6 => w = q,
                    _ => break,
                }
                if m >= n {
                    ensure!(r0.margin(w) <= 0.0, "c={c}: f^-{m}({}, {}) back in int R0", z.x, z.y);
                }
            }
        }
        notes.push(format!("c={c}: n={n} certified"));
    }
    Ok(format!("{}; 2000 sampled orbits conform", notes.join(", ")))
}

fn c8_sequences() -> Outcome {
    let mut r = rng(8);
    for _ in 0..1000 {
        let c = -r.gen_range(f64::EPSILON..0.75);
        let s = c_sequence(c, 3);
        let a1 = fixed_points(c).unwrap().a1;
        ensure!(s[0] < s[2] && s[2] < a1 && a1 < s[3] && s[3] < s[1], "c={c}: {s:?}, a1={a1}");
    }
    for _ in 0..100 {
        let c = -r.gen_range(0.75..1.0);
        let a1 = fixed_points(c).unwrap().a1;
        let (lo, hi) = (a1 * a1, a1.abs());
        for k in 0..1000 {
            let x = lo + (hi - lo) * k as f64 / 999.0;
            ensure!(h1_map(x, a1) - x < 0.0, "c={c}, x={x}: h1(x) >= x");
        }
    }
    let chain = g_inverse_chain(-0.5, 500).map_err(|e| e.to_string())?;
    let last = chain[500];
    ensure!((last + 1.0).abs() < 1e-6, "z_500 = {last}");
    Ok(format!("interleaving 1000 c, h1 below diagonal 100 c, |z_500 + 1| = {:.1e}", (last + 1.0).abs()))
}

fn c9_renderer() -> Outcome {
    let c = par(-0.8);
    let opts = ClassifyOptions::default();
    let g16 = GridSpec::new([-2.5, 2.5, -2.5, 2.5], 16, 16).unwrap();
    let (img, _) = sweep(&g16, c, Direction::Forward, &opts, Some(4)).map_err(|e| e.to_string())?;
    ensure!(img == sweep_sequential(&g16, c, Direction::Forward, &opts), "16x16 sweep differs from oracle");
    let gb = GridSpec::new([-3.0, 3.0, -3.0, 3.0], 16, 16).unwrap();
    let (imb, _) = sweep(&gb, c, Direction::Backward, &opts, Some(3)).map_err(|e| e.to_string())?;
    ensure!(imb == sweep_sequential(&gb, c, Direction::Backward, &opts), "backward 16x16 differs");

    let g = GridSpec::new([-2.5, 2.5, -2.5, 2.5], 256, 256).unwrap();
    let pal = Palette::default();
    let (one, _) = sweep(&g, c, Direction::Forward, &opts, Some(1)).map_err(|e| e.to_string())?;
    let (many, _) = sweep(&g, c, Direction::Forward, &opts, Some(8)).map_err(|e| e.to_string())?;
    let bytes = ppm_bytes(&one, &pal);
    ensure!(bytes == ppm_bytes(&many, &pal), "1 vs 8 workers differ");
    let reference = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/kplus_c-0.8_256.ppm");
    let want = std::fs::read(&reference).map_err(|e| format!("{}: {e}", reference.display()))?;
    ensure!(bytes == want, "256x256 image differs from {}", reference.display());
    Ok("16x16 oracle match, 1/8 workers identical, reference image reproduced".into())
}

fn c10_alpha_guard() -> Outcome {
    let mut r = rng(10);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = -r.gen_range(f64::EPSILON..1.0);
        let al = fixed_points(c).unwrap().alpha;
        let back = apply_inverse(al, c).map_err(|e| e.to_string())?;
        let d = back.dist_inf(&al);
        worst = worst.max(d);
        ensure!(d <= 1e-14, "c={c}: |f^-1(alpha) - alpha| = {d:e}");
    }
    let al = fixed_points(-0.5).unwrap().alpha;
    let v = classify_backward(al, par(-0.5), &ClassifyOptions::default());
    ensure!(v.class == BackwardClass::FixedAlpha, "alpha classified {}", v.class);
    Ok(format!("max |f^-1(alpha) - alpha| = {worst:.1e}; alpha is FixedAlpha"))
}

fn main() {
    // libtest-style flags are ignored; this target has no harness
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("lemma certification", c1_certification),
        ("fixed points and cycle", c2_fixed_points),
        ("alpha-basin totality", c3_alpha_basin),
        ("escape on S", c4_escape),
        ("contraction envelope", c5_envelope),
        ("backward behaviour", c6_backward),
        ("backward R0 exclusion", c7_r0_exclusion),
        ("sequence identities", c8_sequences),
        ("renderer", c9_renderer),
        ("alpha guard", c10_alpha_guard),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = run();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS criterion {:>2} {name} ({secs:.1}s): {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({secs:.1}s): {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
