//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits with status 1 when a criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use billiard_core::builtins::{hyperbolic_pentagon, regular_flat_polygon, sphere_triangle, square};
use billiard_core::collision::{collision_step, conjugated_vertices, verify_diagonal, BoundaryState, Collision};
use billiard_core::expansivity::{
    classify, divergence_survey, probe_pair, verify_witness, Budget, PairOutcome, Reason, Verdict, Witness,
};
use billiard_core::flow::{
    chart_forward, chart_inverse, closed_form_flow, extended_field_z, integrate_velocity_field, singularity_jacobian,
    CartesianChartState, ChartState, SingularPoint,
};
use billiard_core::geometry::{Curvature, Geodesic, Mat3, Point, Tangent, Vec3};
use billiard_core::ode::Dopri5;
use billiard_core::polygon::Polygon;
use billiard_core::topology::{growth_class, pi1_presentation, pi1_presentation_from_counts, GroupClass, Growth};
use billiard_core::unfolding::{
    find_periodic, geodesic_fit_residual, partial_holonomy, periodic_residual, spherical_periodicity_condition,
    straight_crossings, unfold, Holonomy,
};

const ALL: [Curvature; 3] = [Curvature::Hyperbolic, Curvature::Flat, Curvature::Spherical];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Model point at polar coordinates `(r, γ)` around the base point
/// `(0, 0, 1)`, with the unit direction making angle `β` with the outward
/// radial direction.
fn polar_tangent(k: Curvature, r: f64, gamma: f64, beta: f64) -> Tangent {
    let (sg, cg) = gamma.sin_cos();
    let (base, radial) = match k {
        Curvature::Flat => (Vec3::new(r * cg, r * sg, 1.0), Vec3::new(cg, sg, 0.0)),
        Curvature::Spherical => {
            (Vec3::new(r.sin() * cg, r.sin() * sg, r.cos()), Vec3::new(r.cos() * cg, r.cos() * sg, -r.sin()))
        }
        Curvature::Hyperbolic => {
            (Vec3::new(r.sinh() * cg, r.sinh() * sg, r.cosh()), Vec3::new(r.cosh() * cg, r.cosh() * sg, r.sinh()))
        }
    };
    let angular = Vec3::new(-sg, cg, 0.0);
    Tangent::new(Point(base), radial * beta.cos() + angular * beta.sin())
}

/// Polar coordinates of a model tangent, inverse of [`polar_tangent`].
fn polar_of(k: Curvature, t: &Tangent) -> (f64, f64, f64) {
    let p = t.base.0;
    let rho = p.x.hypot(p.y);
    let r = match k {
        Curvature::Flat => rho,
        Curvature::Spherical => rho.atan2(p.z),
        Curvature::Hyperbolic => rho.asinh(),
    };
    let gamma = p.y.atan2(p.x);
    let back = polar_tangent(k, r, gamma, 0.0);
    let radial = back.dir;
    let angular = Vec3::new(-gamma.sin(), gamma.cos(), 0.0);
    let beta = k.form(&t.dir, &angular).atan2(k.form(&t.dir, &radial));
    (r, gamma, beta)
}

fn random_chart_state(rng: &mut ChaCha8Rng, k: Curvature) -> ChartState {
    loop {
        let r_max = if k == Curvature::Spherical { 1.2 } else { 1.5 };
        let r = rng.gen_range(0.05..r_max);
        let beta = rng.gen_range(0.0..TAU);
        // stay away from the vertex along the whole segment
        if k.sin_k(r) * beta.sin().abs() > 0.05 {
            return ChartState::new(r, rng.gen_range(0.0..TAU), beta);
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let solver = Dopri5::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst, mut worst_geo, mut cases) = (0.0f64, 0.0f64, 0);
    for k in ALL {
        let mut done = 0;
        while done < 1000 {
            let s0 = random_chart_state(&mut rng, k);
            let t = rng.gen_range(0.05..1.0);
            let exact = closed_form_flow(&s0, t, k);
            let numeric = integrate_velocity_field(&s0, t, k, &solver);
            let (Ok(a), Ok(b)) = (exact, numeric) else {
                continue;
            };
            if a.r > 1.5 || (k == Curvature::Spherical && a.r > 1.45) {
                continue;
            }
            let rel = ((a.r - b.r).abs() / a.r)
                .max(wrap(a.gamma - b.gamma).abs() / a.gamma.abs().max(1.0))
                .max(wrap(a.beta - b.beta).abs() / a.beta.abs().max(1.0));
            worst = worst.max(rel);
            // independent oracle: the same motion as a model geodesic
            let g = Geodesic::new(polar_tangent(k, s0.r, s0.gamma, s0.beta));
            let (r, gamma, beta) = polar_of(k, &k.geodesic_at(&g, t));
            let geo = ((a.r - r).abs() / a.r).max(wrap(a.gamma - gamma).abs()).max(wrap(a.beta - beta).abs());
            worst_geo = worst_geo.max(geo);
            done += 1;
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-8 && worst_geo < 1e-8 && secs < 60.0,
        format!(
            "{cases} in-chart cases, integrated vs closed form max rel err {worst:.2e}, closed form vs model geodesic {worst_geo:.2e}, {secs:.1} s"
        ),
    )
}

fn fd_jacobian(c: &CartesianChartState, theta: f64, k: Curvature) -> Mat3 {
    let h = 1e-6;
    let mut m = Mat3::zeros();
    for j in 0..3 {
        let mut plus = [c.x, c.y, c.z];
        let mut minus = plus;
        plus[j] += h;
        minus[j] -= h;
        let fp = extended_field_z(&CartesianChartState::new(plus[0], plus[1], plus[2]), theta, k).unwrap().0;
        let fm = extended_field_z(&CartesianChartState::new(minus[0], minus[1], minus[2]), theta, k).unwrap().0;
        for i in 0..3 {
            m[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    m
}

fn sorted_eigen(m: &Mat3) -> Vec<(f64, f64)> {
    let mut e: Vec<(f64, f64)> = m.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
    e.sort_by(|a, b| a.0.total_cmp(&b.0));
    e
}

fn criterion_2() -> Outcome {
    let mut field_err = 0.0f64;
    let mut eig_err = 0.0f64;
    for theta in [PI / 6.0, FRAC_PI_2, 2.0] {
        for k in ALL {
            for i in 0..1000 {
                let z = TAU * i as f64 / 1000.0;
                let v = extended_field_z(&CartesianChartState::new(0.0, 0.0, z), theta, k).unwrap().0;
                field_err = field_err.max(v[0].abs()).max(v[1].abs()).max((v[2] + z.sin()).abs());
            }
            for (point, expected) in [(SingularPoint::Zero, [-1.0, 1.0, 1.0]), (SingularPoint::Pi, [-1.0, -1.0, 1.0])] {
                let fd = sorted_eigen(&fd_jacobian(&CartesianChartState::new(0.0, 0.0, point.z()), theta, k));
                let analytic = singularity_jacobian(point, theta, k).unwrap();
                let mut an: Vec<(f64, f64)> = analytic.eigenvalues.iter().map(|c| (c.re, c.im)).collect();
                an.sort_by(|a, b| a.0.total_cmp(&b.0));
                for i in 0..3 {
                    eig_err = eig_err
                        .max((fd[i].0 - expected[i]).abs())
                        .max(fd[i].1.abs())
                        .max((an[i].0 - expected[i]).abs())
                        .max(an[i].1.abs());
                }
            }
        }
    }
    outcome(
        field_err <= 1e-15 && eig_err < 1e-6,
        format!("Z(0,0,z) max deviation {field_err:.1e} on 3x3x1000 grid points, eigenvalue error {eig_err:.1e} (finite differences and analytic)"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut fwd_inv, mut inv_fwd) = (0.0f64, 0.0f64);
    for k in ALL {
        for _ in 0..1000 {
            let theta = rng.gen_range(0.1..6.0);
            let big_r = if k == Curvature::Spherical { rng.gen_range(0.0..0.95) } else { rng.gen_range(0.0..2.0) };
            let phi = rng.gen_range(0.0..TAU);
            let c = CartesianChartState::new(big_r * phi.cos(), big_r * phi.sin(), rng.gen_range(0.0..TAU));
            let back = chart_forward(&chart_inverse(&c, theta, k).unwrap(), theta, k).unwrap();
            fwd_inv = fwd_inv.max((back.x - c.x).abs()).max((back.y - c.y).abs()).max((back.z - c.z).abs());

            let r_max = if k == Curvature::Spherical { 1.2 } else { 1.5 };
            let s =
                ChartState::new(rng.gen_range(1e-3..r_max), rng.gen_range(0.0..2.0 * theta), rng.gen_range(0.0..TAU));
            let t = chart_inverse(&chart_forward(&s, theta, k).unwrap(), theta, k).unwrap();
            let dg = (t.gamma - s.gamma).abs().min(2.0 * theta - (t.gamma - s.gamma).abs());
            inv_fwd = inv_fwd.max((t.r - s.r).abs()).max(dg).max(wrap(t.beta - s.beta).abs());
        }
    }
    outcome(
        fwd_inv < 1e-12 && inv_fwd < 1e-12,
        format!("3000 states: forward after inverse {fwd_inv:.1e}, inverse after forward {inv_fwd:.1e}"),
    )
}

fn random_state(rng: &mut ChaCha8Rng, poly: &Polygon) -> BoundaryState {
    let side = rng.gen_range(0..poly.num_vertices());
    let len = poly.side(side).length;
    BoundaryState::new(side, rng.gen_range(0.01..0.99) * len, rng.gen_range(0.02..PI - 0.02))
}

/// Worst reflection and time-reversal residuals over `states × bounces`.
fn collision_laws(poly: &Polygon, states: usize, bounces: usize, seed: u64) -> (f64, f64, usize) {
    let k = poly.curvature();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut refl, mut rev, mut steps) = (0.0f64, 0.0f64, 0);
    for _ in 0..states {
        let mut cur = random_state(&mut rng, poly);
        for _ in 0..bounces {
            let Ok(Collision::Bounce { next, flight }) = collision_step(&cur, poly) else {
                break;
            };
            // incoming velocity from the geodesic itself, side frame from the table
            let incoming = k.geodesic_at(&Geodesic::new(cur.tangent(poly)), flight);
            let frame = poly.side_tangent(next.side, next.s);
            let normal = k.quarter_turn(&frame.base, &frame.dir);
            let out = next.tangent(poly).dir;
            refl = refl
                .max((k.form(&incoming.dir, &frame.dir) - k.form(&out, &frame.dir)).abs())
                .max((k.form(&incoming.dir, &normal) + k.form(&out, &normal)).abs())
                .max((incoming.base.0 - frame.base.0).norm());
            match collision_step(&next.reversed(), poly) {
                Ok(Collision::Bounce { next: back, .. }) => {
                    let r = cur.reversed();
                    let d = if back.side == r.side {
                        (back.s - r.s).abs().max((back.psi - r.psi).abs())
                    } else {
                        f64::INFINITY
                    };
                    rev = rev.max(d);
                }
                _ => rev = f64::INFINITY,
            }
            steps += 1;
            cur = next;
        }
    }
    (refl, rev, steps)
}

fn criterion_4() -> Outcome {
    let tables = [
        ("square", square()),
        ("hyperbolic pentagon", hyperbolic_pentagon()),
        ("sphere triangle", sphere_triangle(1.0).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, poly)) in tables.iter().enumerate() {
        let (refl, rev, steps) = collision_laws(poly, 1000, 50, 40 + i as u64);
        pass &= refl < 1e-9 && rev < 1e-9 && steps > 40_000;
        parts.push(format!("{name}: {steps} bounces, reflection {refl:.1e}, reversal {rev:.1e}"));
    }
    outcome(pass, parts.join("; "))
}

/// Collision-map orbit: the states and the sides hit.
fn orbit(b: &BoundaryState, poly: &Polygon, bounces: usize) -> (Vec<BoundaryState>, Vec<usize>, bool) {
    let mut states = vec![*b];
    let mut sides = Vec::new();
    let mut cur = *b;
    for _ in 0..bounces {
        match collision_step(&cur, poly) {
            Ok(Collision::Bounce { next, .. }) => {
                states.push(next);
                sides.push(next.side);
                cur = next;
            }
            _ => return (states, sides, true),
        }
    }
    (states, sides, false)
}

const WINDOW: usize = 10;

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, poly) in [("square", square()), ("regular hexagon", regular_flat_polygon(6).unwrap())] {
        let (mut mismatches, mut fit) = (0, 0.0f64);
        for _ in 0..1000 {
            let b = random_state(&mut rng, &poly);
            let (_, sides, hit) = orbit(&b, &poly, 50);
            let (crossed, vertex) = straight_crossings(&b, &poly, 50).unwrap();
            if crossed != sides || vertex != hit {
                mismatches += 1;
            }
            let u = unfold(&b, &poly, 50).unwrap();
            fit = fit.max(geodesic_fit_residual(Curvature::Flat, &u.points));
        }
        pass &= mismatches == 0 && fit < 1e-9;
        parts.push(format!("{name}: {mismatches}/1000 itinerary mismatches over 50 bounces, collinearity {fit:.1e}"));
    }

    // Hyperbolic orbits separate like e^t, so two independent f64 evaluations
    // of one orbit decorrelate after a few dozen bounces. Crossings are
    // compared in windows re-anchored at the collision state.
    let poly = hyperbolic_pentagon();
    let (mut window_mismatches, mut windows, mut fit, mut joint) = (0, 0, 0.0f64, 0.0f64);
    let mut raw_first: Vec<usize> = Vec::new();
    for _ in 0..1000 {
        let b = random_state(&mut rng, &poly);
        let (states, sides, _) = orbit(&b, &poly, 50);
        let mut w = 0;
        while w + WINDOW <= sides.len() {
            let (crossed, _) = straight_crossings(&states[w], &poly, WINDOW).unwrap();
            windows += 1;
            if crossed != sides[w..w + WINDOW] {
                window_mismatches += 1;
            }
            w += WINDOW;
        }
        let (crossed, _) = straight_crossings(&b, &poly, sides.len()).unwrap();
        raw_first.push(crossed.iter().zip(&sides).take_while(|(a, b)| a == b).count());
        let short = unfold(&b, &poly, 15).unwrap();
        fit = fit.max(geodesic_fit_residual(Curvature::Hyperbolic, &short.points));
        let long = unfold(&b, &poly, 50).unwrap();
        joint = long.joint_residuals.iter().fold(joint, |m, &r| m.max(r));
    }
    let full = raw_first.iter().filter(|&&n| n >= 50).count();
    let mean = raw_first.iter().sum::<usize>() as f64 / raw_first.len() as f64;
    pass &= window_mismatches == 0 && fit < 1e-8 && joint < 1e-12;
    parts.push(format!(
        "hyperbolic pentagon: {window_mismatches}/{windows} mismatched {WINDOW}-bounce windows, collinearity over 15 bounces {fit:.1e}, joint residual over 50 {joint:.1e}; unanchored agreement over all 50 in {full}/1000 (mean first divergence {mean:.1})"
    ));
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let theta = 1.0;
    let poly = sphere_triangle(theta).unwrap();
    let found = find_periodic(&poly, 50, 10_000, 0).unwrap();
    // only the integer nearest to 2nθ/π can satisfy 2nθ = kπ
    let mut any_true = false;
    let mut min_gap = f64::INFINITY;
    for n in 1..=1_000_000u64 {
        let x = 2.0 * n as f64 * theta / PI;
        let nearest = x.round() as i64;
        min_gap = min_gap.min((2.0 * n as f64 * theta - nearest as f64 * PI).abs());
        for k in [nearest - 1, nearest, nearest + 1] {
            if (1..=1_000_000).contains(&k) && spherical_periodicity_condition(theta, n, k).unwrap() {
                any_true = true;
            }
        }
    }

    let small = PI / 6.0;
    let poly6 = sphere_triangle(small).unwrap();
    let orbits = find_periodic(&poly6, 50, 10_000, 0).unwrap();
    let mut detail6 = "no periodic orbit found".to_string();
    let mut pass6 = false;
    if let Some(o) = orbits.first() {
        let u = unfold(&o.start, &poly6, o.period()).unwrap();
        let meridian: Vec<usize> = u.chain.crossed_sides().into_iter().filter(|&s| s != 1).collect();
        let n = meridian.len() as u64 / 2;
        let rotation = partial_holonomy(&u.chain, &poly6, &[0, 2]);
        let residual = periodic_residual(o, &poly6).unwrap_or(f64::INFINITY);
        if let Holonomy::Rotation { angle, .. } = rotation {
            let k = (2.0 * n as f64 * small / PI).round() as i64;
            let angle_ok = (angle - (2.0 * n as f64 * small).rem_euclid(TAU)).abs() < 1e-8 && (angle - PI).abs() < 1e-8;
            pass6 = (n, k) == (3, 1)
                && spherical_periodicity_condition(small, n, k).unwrap()
                && angle_ok
                && residual < 1e-8;
            detail6 = format!(
                "pi/6: period {} orbit, {} meridian reflections rotate by {angle:.12}, (n,k) = ({n},{k}), return residual {residual:.1e}",
                o.period(),
                meridian.len()
            );
        }
    }
    outcome(
        found.is_empty() && !any_true && pass6,
        format!(
            "theta 1: {} periodic orbits from 10^4 seeds x 50 bounces, periodicity condition false for n,k <= 10^6 (closest |2n theta - k pi| = {min_gap:.2e}); {detail6}",
            found.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let poly = sphere_triangle(1.0).unwrap();
    let k = Curvature::Spherical;
    let pairs = conjugated_vertices(&poly, 20, 4.0 * PI).unwrap();
    let Some(c) = pairs.iter().find(|c| c.vertices == (0, 0) && c.m == 1) else {
        return outcome(false, format!("no V1-V1 diagonal among {} conjugate pairs", pairs.len()));
    };
    let d = &c.diagonal;
    // analytic oracle: the meridian at angle a from V1 meets the equator at
    // a right angle after π/2 and returns to the pole after π
    let dir = Vec3::new(d.angle.cos(), d.angle.sin(), 0.0);
    let g = Geodesic::new(Tangent::new(Point(Vec3::z()), dir));
    let mid = k.geodesic_at(&g, FRAC_PI_2);
    let perpendicular = mid.base.0.z.abs().max((mid.dir + Vec3::z()).norm());
    let replay = verify_diagonal(&poly, d).unwrap_or(f64::INFINITY);
    let pass = (d.length - PI).abs() < 1e-8
        && d.residual < 1e-8
        && replay < 1e-8
        && perpendicular < 1e-12
        && d.angle > 0.0
        && d.angle < 1.0;
    outcome(
        pass,
        format!(
            "V1-V1 via side {:?}, length - pi = {:.1e}, residual {:.1e}, replay {replay:.1e}, meridian meets the equator at a right angle ({perpendicular:.1e})",
            d.bounces.iter().map(|s| s + 1).collect::<Vec<_>>(),
            d.length - PI,
            d.residual
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();

    let sphere = sphere_triangle(1.0).unwrap();
    let side = 2;
    let s = 0.5 * sphere.side(side).length;
    let a = BoundaryState::new(side, s, 1.0);
    let b = BoundaryState::new(side, s, 1.0 + 1e-5);
    let probe = probe_pair(&a, &b, &sphere, 1000).unwrap();
    let agree = probe.outcome == PairOutcome::Agree && !probe.truncated;
    pass &= agree;
    parts.push(format!("sphere pair from V1V3 (psi 1 and 1+1e-5): {:?} over 1000 bounces each way", probe.outcome));

    let v = classify(&sphere, &Budget::default()).unwrap();
    let teos = v.reasons.iter().any(|r| r.short_tag() == "teoS");
    let verified = v.witnesses.iter().all(|w| verify_witness(w, &sphere));
    pass &= v.verdict == Verdict::NotExpansive && teos && verified;
    parts.push(format!("sphere: {} citing {:?}", v.verdict, v.reasons.iter().map(|r| r.tag()).collect::<Vec<_>>()));

    let sq = square();
    let v = classify(&sq, &Budget::default()).unwrap();
    let periodic = v.witnesses.iter().find_map(|w| match w {
        Witness::Periodic(o) => Some((o.clone(), verify_witness(w, &sq))),
        _ => None,
    });
    let sq_ok = v.verdict == Verdict::NotExpansive
        && v.reasons.contains(&Reason::FlatPeriodic)
        && periodic.as_ref().is_some_and(|p| p.1);
    pass &= sq_ok;
    parts.push(format!(
        "square: {} with periodic witness of period {} (verified {})",
        v.verdict,
        periodic.as_ref().map_or(0, |p| p.0.period()),
        periodic.as_ref().is_some_and(|p| p.1)
    ));

    let pent = hyperbolic_pentagon();
    let v = classify(&pent, &Budget::default()).unwrap();
    let survey = divergence_survey(&pent, 10_000, 100, 8);
    let h_ok = v.verdict == Verdict::Expansive
        && v.reasons == [Reason::HyperbolicExpansive]
        && survey.undecided.is_empty()
        && survey.diverged == survey.pairs
        && survey.pairs + survey.rejected == 10_000
        && survey.max_index.abs() <= 100;
    pass &= h_ok;
    parts.push(format!(
        "pentagon: {} ({}), {}/{} sampled pairs diverge within 100 bounces (latest at index {}, {} rejected as one orbit or grazing)",
        v.verdict,
        v.reasons[0].short_tag(),
        survey.diverged,
        survey.pairs,
        survey.max_index,
        survey.rejected
    ));
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let tri = pi1_presentation(&regular_flat_polygon(3).unwrap()).unwrap();
    pass &= tri.classification == GroupClass::Trivial && tri.phase_space() == Some("S³");
    parts.push(format!("triangle: {}; phase space {}", tri.classification, tri.phase_space().unwrap_or("?")));

    let mut orders = Vec::new();
    for n in 4..=8 {
        let p = pi1_presentation(&regular_flat_polygon(n).unwrap()).unwrap();
        pass &=
            p.classification == GroupClass::FiniteCyclic(n as u64 - 2) && growth_class(&p) == Growth::NotExponential;
        orders.push(format!("{n}:{}", p.classification));
    }
    parts.push(format!("N-gons {}", orders.join(", ")));

    // Euler characteristic of the double from the turning angles alone:
    // Σ(π − αᵢ) = 2π χ(D) for a flat table, and χ(S) = 2χ(D).
    let annulus = billiard_core::io::load_table(&workspace().join("tables/annulus.toml")).unwrap();
    let turning: f64 = annulus.angles().iter().map(|a| PI - a).sum();
    let chi_s = (2.0 * turning / TAU).round() as i64;
    let p = pi1_presentation(&annulus).unwrap();
    let n = annulus.num_vertices() as i64;
    pass &= p.exponent == chi_s - n && p.exponent + n == p.euler();
    let four = pi1_presentation_from_counts(2, 4, true).unwrap();
    pass &= four.exponent == -4 && four.relations[0] == "[â1,b̂1] = γ_q^-4";
    parts.push(format!(
        "annulus: χ(S) = {chi_s} from angles, N = {n}, relation exponent {} (N=4 count: {})",
        p.exponent, four.relations[0]
    ));
    outcome(pass, parts.join("; "))
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_cli(args: &[&str], out: &Path) -> (Vec<u8>, Vec<(String, Vec<u8>)>) {
    let o = Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(args)
        .env("BILLIARD_OUTPUT_DIR", out)
        .current_dir(workspace())
        .output()
        .expect("binary runs");
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .map(|rd| {
            rd.flatten()
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    (o.stdout, files)
}

fn criterion_10() -> Outcome {
    let runs: [&[&str]; 8] = [
        &["simulate", "square", "--side", "1", "--s", "0.3", "--psi", "1.1", "--bounces", "200", "--direction", "both"],
        &["simulate", "square", "--vertex", "1", "--r", "0.2", "--gamma", "0.4", "--beta", "2.5", "--duration", "3"],
        &["unfold", "sphere-triangle", "--side", "3", "--s", "0.4", "--psi", "1.0", "--bounces", "30"],
        &["periodic", "square", "--samples", "500", "--bounces", "8", "--seed", "7", "--format", "json"],
        &["diagonals", "tables/l-shape.toml", "--depth", "4", "--length", "6"],
        &["expansivity", "sphere-triangle", "--samples", "1000", "--seed", "3", "--format", "json"],
        &["expansivity", "hyperbolic-pentagon", "--survey", "500", "--seed", "11"],
        &["topology", "tables/annulus.toml"],
    ];
    let base = std::env::temp_dir().join(format!("billiard-acceptance-{}", std::process::id()));
    let mut identical = 0;
    for (i, args) in runs.iter().enumerate() {
        let out = base.join(i.to_string());
        let first = run_cli(args, &out);
        let _ = std::fs::remove_dir_all(&out);
        let second = run_cli(args, &out);
        if first == second && !first.0.is_empty() {
            identical += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&base);
    outcome(
        identical == runs.len(),
        format!("{identical}/{} commands byte-identical across two runs (stdout and written files)", runs.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("flow oracle equivalence", criterion_1),
        ("extended field at the added circle", criterion_2),
        ("chart round trip", criterion_3),
        ("collision map laws", criterion_4),
        ("unfolding equivalence", criterion_5),
        ("periodic orbits of the spherical example", criterion_6),
        ("conjugated vertices", criterion_7),
        ("expansiveness witnesses", criterion_8),
        ("topology", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
