//! Unfolding by reflecting the table, holonomy, and periodic-orbit search.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::collision::{collision_step, BoundaryState, Collision, CollisionError, TOL_VERTEX};
use crate::geometry::{Curvature, Geodesic, Mat3, Point, Tangent, Vec3};
use crate::polygon::Polygon;

/// Return distance that makes a sample a periodic candidate.
pub const CANDIDATE_TOL: f64 = 1e-4;
/// Return distance a refined orbit must reach.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnfoldingError {
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error("search bounds must be positive")]
    BadBounds,
    #[error("angle must lie in (0, pi), got {0}")]
    BadAngle(f64),
    #[error("reflection count must be at least 1")]
    ZeroCount,
}

/// One reflected copy of the table: `iso` maps the base table onto it, and
/// `side` is the base side crossed to enter the next copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnfoldCopy {
    pub iso: Mat3,
    pub side: usize,
}

/// Copies visited by an unfolded trajectory. The copy after the last entry
/// has isometry [`UnfoldingChain::end_isometry`].
#[derive(Debug, Clone)]
pub struct UnfoldingChain {
    pub curvature: Curvature,
    pub copies: Vec<UnfoldCopy>,
}

impl UnfoldingChain {
    pub fn new(curvature: Curvature) -> Self {
        UnfoldingChain { curvature, copies: Vec::new() }
    }

    /// Composition of the reflections across the crossed sides.
    pub fn end_isometry(&self, poly: &Polygon) -> Mat3 {
        match self.copies.last() {
            None => Mat3::identity(),
            Some(c) => c.iso * reflection(poly, c.side),
        }
    }

    pub fn crossed_sides(&self) -> Vec<usize> {
        self.copies.iter().map(|c| c.side).collect()
    }

    /// Isometries of all copies including the final one.
    pub fn isometries(&self, poly: &Polygon) -> Vec<Mat3> {
        let mut v: Vec<Mat3> = self.copies.iter().map(|c| c.iso).collect();
        v.push(self.end_isometry(poly));
        v
    }
}

pub fn reflection(poly: &Polygon, side: usize) -> Mat3 {
    poly.curvature().reflection_matrix(&poly.side(side).geodesic)
}

/// Applies a model isometry to a point. For the plane the matrix acts on
/// `(x, y, 1)`.
pub fn apply_point(m: &Mat3, p: &Point) -> Point {
    Point(m * p.0)
}

pub fn apply_tangent(m: &Mat3, t: &Tangent) -> Tangent {
    Tangent { base: apply_point(m, &t.base), dir: m * t.dir }
}

/// An unfolded trajectory: the chain of copies and the hit points carried
/// into the unfolded picture, starting with the initial point.
#[derive(Debug, Clone)]
pub struct Unfolded {
    pub chain: UnfoldingChain,
    pub points: Vec<Point>,
    /// Collision-map labels, starting with the side of the initial state.
    pub labels: Vec<usize>,
    pub flights: Vec<f64>,
    /// At each bounce, distance between the outgoing velocity and the
    /// incoming one mirrored by the side's reflection matrix: zero exactly
    /// when the unfolded curve continues as one geodesic.
    pub joint_residuals: Vec<f64>,
    /// The trajectory ran into a vertex before the requested bounce count.
    pub truncated: bool,
}

/// Follows `bounces` collisions and maps every hit point into the copy the
/// straight trajectory is in: the i-th hit is carried by `R_{s₁}⋯R_{s_{i−1}}`.
pub fn unfold(b: &BoundaryState, poly: &Polygon, bounces: usize) -> Result<Unfolded, UnfoldingError> {
    b.validate(poly)?;
    let k = poly.curvature();
    let mut chain = UnfoldingChain::new(k);
    let mut iso = Mat3::identity();
    let mut out = Unfolded {
        chain: UnfoldingChain::new(k),
        points: vec![b.tangent(poly).base],
        labels: vec![b.label()],
        flights: Vec::new(),
        joint_residuals: Vec::new(),
        truncated: false,
    };
    let mut cur = *b;
    for _ in 0..bounces {
        match collision_step(&cur, poly)? {
            Collision::VertexHit { vertex, flight } => {
                out.flights.push(flight);
                out.points.push(apply_point(&iso, poly.vertex(vertex)));
                out.truncated = true;
                break;
            }
            Collision::Bounce { next, flight } => {
                let incoming = k.geodesic_at(&Geodesic::new(cur.tangent(poly)), flight);
                let mirrored = apply_tangent(&reflection(poly, next.side), &incoming);
                let outgoing = next.tangent(poly);
                out.joint_residuals
                    .push((mirrored.dir - outgoing.dir).norm().max((mirrored.base.0 - outgoing.base.0).norm()));
                let hit = outgoing.base;
                out.points.push(apply_point(&iso, &hit));
                out.labels.push(next.label());
                out.flights.push(flight);
                chain.copies.push(UnfoldCopy { iso, side: next.side });
                iso *= reflection(poly, next.side);
                cur = next;
            }
        }
    }
    out.chain = chain;
    Ok(out)
}

/// Sides crossed by the straight geodesic through successive reflected
/// copies of the table, computed without the collision map. Stops early at a
/// vertex.
///
/// Flat and spherical copies are placed in one global frame. Hyperbolic
/// copies are not: their coordinates grow like `e^t`, so the geodesic is
/// carried into the frame of each new copy instead.
pub fn straight_crossings(
    b: &BoundaryState,
    poly: &Polygon,
    crossings: usize,
) -> Result<(Vec<usize>, bool), UnfoldingError> {
    b.validate(poly)?;
    let k = poly.curvature();
    let mut iso = Mat3::identity();
    let mut at = b.tangent(poly);
    let mut entered = b.side;
    let mut sides = Vec::new();
    for _ in 0..crossings {
        let g = Geodesic::new(at);
        let mut best: Option<(f64, usize, f64)> = None;
        for (j, side) in poly.sides().iter().enumerate() {
            let t_min = if j == entered {
                if k != Curvature::Spherical {
                    continue;
                }
                1e-6
            } else {
                1e-12
            };
            let image = Geodesic::new(apply_tangent(&iso, &side.geodesic.start));
            if let Some((t, s)) = k.geodesic_side_intersection(&g, &image, side.length, t_min) {
                if best.is_none_or(|(bt, _, _)| t < bt) {
                    best = Some((t, j, s));
                }
            }
        }
        let Some((t, j, s)) = best else {
            return Err(CollisionError::NoIntersection.into());
        };
        if s < TOL_VERTEX || s > poly.side(j).length - TOL_VERTEX {
            return Ok((sides, true));
        }
        sides.push(j);
        at = k.geodesic_at(&g, t);
        if k == Curvature::Hyperbolic {
            at = k.project_tangent(&apply_tangent(&reflection(poly, j), &at));
        } else {
            iso *= reflection(poly, j);
        }
        entered = j;
    }
    Ok((sides, false))
}

/// Maximal distance of the points to the best-fitting geodesic of the model.
/// The fit is the plane through the origin closest to the points `(x, y, z)`
/// (for the plane, points are `(x, y, 1)`).
pub fn geodesic_fit_residual(k: Curvature, points: &[Point]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let scale = points.iter().map(|p| p.0.norm()).fold(0.0, f64::max);
    let mut rows = nalgebra::DMatrix::<f64>::zeros(points.len(), 3);
    for (i, p) in points.iter().enumerate() {
        let v = p.0 / scale;
        rows.set_row(i, &v.transpose());
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (imin, _) =
        svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &s)| if s < a.1 { (i, s) } else { a });
    let n = Vec3::new(vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)]);
    match k {
        Curvature::Flat => {
            let d = n.xy().norm();
            points.iter().map(|p| n.dot(&p.0).abs() / d).fold(0.0, f64::max)
        }
        _ => {
            // form-normal of the plane n·x = 0
            let nn = k.metric() * n;
            let nn = nn / k.norm(&nn);
            points
                .iter()
                .map(|p| {
                    let v = k.form(&p.0, &nn);
                    match k {
                        Curvature::Hyperbolic => v.asinh().abs(),
                        _ => v.clamp(-1.0, 1.0).asin().abs(),
                    }
                })
                .fold(0.0, f64::max)
        }
    }
}

/// Type of a composed isometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Holonomy {
    Identity,
    /// Flat translation or hyperbolic translation along an axis.
    Translation {
        distance: f64,
    },
    /// Rotation by `angle ∈ (0, π]`; `axis` is the fixed point of the model
    /// (for the sphere, the axis with the counterclockwise orientation).
    Rotation {
        angle: f64,
        axis: Vec3,
    },
    /// Hyperbolic parabolic motion.
    Parabolic,
    /// Orientation reversing.
    ReflectionType,
}

const HOLONOMY_TOL: f64 = 1e-9;

/// Classifies a model isometry.
pub fn classify_isometry(k: Curvature, m: &Mat3) -> Holonomy {
    if (m - Mat3::identity()).abs().max() < HOLONOMY_TOL {
        return Holonomy::Identity;
    }
    match k {
        Curvature::Flat => {
            let a = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let b = Vector2::new(m[(0, 2)], m[(1, 2)]);
            if a.determinant() < 0.0 {
                return Holonomy::ReflectionType;
            }
            if (a - Matrix2::identity()).abs().max() < HOLONOMY_TOL {
                return Holonomy::Translation { distance: b.norm() };
            }
            let angle = a[(1, 0)].atan2(a[(0, 0)]);
            let c = (Matrix2::identity() - a).try_inverse().map(|inv| inv * b).unwrap_or(Vector2::zeros());
            let (angle, sign) = if angle < 0.0 { (-angle, -1.0) } else { (angle, 1.0) };
            Holonomy::Rotation { angle, axis: Vec3::new(c.x, c.y, sign) }
        }
        Curvature::Spherical => {
            if m.determinant() < 0.0 {
                return Holonomy::ReflectionType;
            }
            let c = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
            let w = Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
            let s = 0.5 * w.norm();
            let angle = s.atan2(c);
            let axis = if s > 1e-6 {
                w.normalize()
            } else {
                // angle near π: axis from the symmetric part
                let sym = (m + Mat3::identity()) * 0.5;
                let col =
                    (0..3).map(|i| sym.column(i).into_owned()).max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
                col.normalize()
            };
            Holonomy::Rotation { angle, axis }
        }
        Curvature::Hyperbolic => {
            if m.determinant() < 0.0 || m[(2, 2)] < 0.0 {
                return Holonomy::ReflectionType;
            }
            let tr = m.trace();
            if tr > 3.0 + 1e-9 {
                Holonomy::Translation { distance: ((tr - 1.0) / 2.0).acosh() }
            } else if tr < 3.0 - 1e-9 {
                let angle = ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
                // fixed point: timelike eigenvector for eigenvalue 1
                let svd = (m - Mat3::identity()).svd(false, true);
                let vt = svd.v_t.unwrap();
                let (imin, _) =
                    svd.singular_values
                        .iter()
                        .enumerate()
                        .fold((0, f64::INFINITY), |a, (i, &s)| if s < a.1 { (i, s) } else { a });
                let mut p: Vec3 = vt.row(imin).transpose().into_owned();
                if p.z < 0.0 {
                    p = -p;
                }
                let q = -k.form(&p, &p);
                Holonomy::Rotation { angle, axis: if q > 0.0 { p / q.sqrt() } else { p } }
            } else {
                Holonomy::Parabolic
            }
        }
    }
}

pub fn holonomy(chain: &UnfoldingChain, poly: &Polygon) -> Holonomy {
    classify_isometry(chain.curvature, &chain.end_isometry(poly))
}

/// Product of the reflections across the given sides, in order.
pub fn reflection_product(poly: &Polygon, sides: &[usize]) -> Mat3 {
    sides.iter().fold(Mat3::identity(), |m, &s| m * reflection(poly, s))
}

/// Holonomy of the reflections across the crossed sides that belong to
/// `subset` only.
pub fn partial_holonomy(chain: &UnfoldingChain, poly: &Polygon, subset: &[usize]) -> Holonomy {
    let sides: Vec<usize> = chain.crossed_sides().into_iter().filter(|s| subset.contains(s)).collect();
    classify_isometry(chain.curvature, &reflection_product(poly, &sides))
}

/// For the polar triangle with apex angle `θ`: a trajectory meeting the two
/// apex sides `2n` times closes up after a full rotation iff `2nθ = kπ`.
pub fn spherical_periodicity_condition(theta: f64, n: u64, k: i64) -> Result<bool, UnfoldingError> {
    if !(theta > 0.0 && theta < PI) {
        return Err(UnfoldingError::BadAngle(theta));
    }
    if n == 0 {
        return Err(UnfoldingError::ZeroCount);
    }
    let lhs = 2.0 * n as f64 * theta;
    let rhs = k as f64 * PI;
    Ok((lhs - rhs).abs() <= 8.0 * f64::EPSILON * lhs.abs().max(rhs.abs()).max(1.0))
}

#[derive(Debug, Clone)]
pub struct PeriodicOrbitReport {
    pub start: BoundaryState,
    /// Sides hit, ending with a return to the start side (0-based).
    pub bounces: Vec<usize>,
    pub period_length: f64,
    pub holonomy: Holonomy,
    pub residual: f64,
}

impl PeriodicOrbitReport {
    pub fn period(&self) -> usize {
        self.bounces.len()
    }
}

/// State after `p` collisions, with the sides hit and the flown length.
fn iterate(b: &BoundaryState, poly: &Polygon, p: usize) -> Option<(BoundaryState, Vec<usize>, f64)> {
    let mut cur = *b;
    let mut sides = Vec::with_capacity(p);
    let mut len = 0.0;
    for _ in 0..p {
        match collision_step(&cur, poly).ok()? {
            Collision::Bounce { next, flight } => {
                sides.push(next.side);
                len += flight;
                cur = next;
            }
            Collision::VertexHit { .. } => return None,
        }
    }
    Some((cur, sides, len))
}

fn displacement(b: &BoundaryState, poly: &Polygon, p: usize, sides: &[usize]) -> Option<Vector2<f64>> {
    let (end, seq, _) = iterate(b, poly, p)?;
    (seq == sides).then(|| Vector2::new(end.s - b.s, end.psi - b.psi))
}

/// Levenberg–Marquardt on the return displacement with a finite-difference
/// Jacobian; the bounce sequence is held fixed.
fn refine(b: &BoundaryState, poly: &Polygon, p: usize, sides: &[usize]) -> Option<(BoundaryState, f64)> {
    let len = poly.side(b.side).length;
    let mut x = Vector2::new(b.s, b.psi);
    let mut f = displacement(b, poly, p, sides)?;
    let mut lambda = 1e-6;
    let h = 1e-7;
    for _ in 0..60 {
        if f.norm() < 1e-13 {
            break;
        }
        let mut jac = Matrix2::zeros();
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let sp = BoundaryState::new(b.side, xp[0].clamp(0.0, len), xp[1]);
            let sm = BoundaryState::new(b.side, xm[0].clamp(0.0, len), xm[1]);
            let (fp, fm) = (displacement(&sp, poly, p, sides)?, displacement(&sm, poly, p, sides)?);
            jac.set_column(c, &((fp - fm) / (2.0 * h)));
        }
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * f;
        let mut improved = false;
        for _ in 0..12 {
            let a = jtj + Matrix2::identity() * lambda * (1.0 + jtj.trace());
            let Some(step) = a.try_inverse().map(|inv| -(inv * g)) else { break };
            let xn = x + step;
            let cand = BoundaryState::new(b.side, xn[0], xn[1]);
            if cand.validate(poly).is_ok() {
                if let Some(fnew) = displacement(&cand, poly, p, sides) {
                    if fnew.norm() < f.norm() {
                        x = xn;
                        f = fnew;
                        lambda = (lambda * 0.1).max(1e-15);
                        improved = true;
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Some((BoundaryState::new(b.side, x[0], x[1]), f.norm()))
}

/// Key of a closed bounce sequence, independent of starting point and
/// direction, reduced to its primitive period.
fn canonical_cycle(seq: &[usize]) -> Vec<usize> {
    let n = seq.len();
    let p = (1..=n).find(|&p| n.is_multiple_of(p) && (0..n).all(|i| seq[i] == seq[(i + p) % n])).unwrap_or(n);
    canonical_primitive(&seq[..p])
}

fn canonical_primitive(seq: &[usize]) -> Vec<usize> {
    let n = seq.len();
    let mut best = seq.to_vec();
    for rev in [false, true] {
        let s: Vec<usize> = if rev { seq.iter().rev().copied().collect() } else { seq.to_vec() };
        for r in 0..n {
            let rot: Vec<usize> = s[r..].iter().chain(&s[..r]).copied().collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

/// Deterministic initial states: per side, a grid in `ψ` with an odd number
/// of rows (so `π/2` is a row) and jittered positions in `s`.
pub fn sample_states(poly: &Polygon, samples: usize, seed: u64) -> Vec<BoundaryState> {
    let n = poly.num_vertices();
    let per_side = samples.div_ceil(n);
    let mut rows = (per_side as f64).sqrt().ceil() as usize;
    if rows.is_multiple_of(2) {
        rows += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let side = i % n;
        let j = i / n;
        let (row, col) = (j % rows, j / rows);
        let cols = per_side.div_ceil(rows);
        let jitter: f64 = rng.gen_range(-0.5..0.5);
        let len = poly.side(side).length;
        let s = len * ((col as f64 + 0.5 + 0.9 * jitter) / cols as f64);
        let psi = PI * (row as f64 + 1.0) / (rows as f64 + 1.0);
        out.push(BoundaryState::new(side, s, psi));
    }
    out
}

/// Searches periodic orbits of period at most `max_bounces` among `samples`
/// seeded initial states. Each returned orbit re-simulates to within
/// [`VERIFY_TOL`].
pub fn find_periodic(
    poly: &Polygon,
    max_bounces: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<PeriodicOrbitReport>, UnfoldingError> {
    if max_bounces == 0 || samples == 0 {
        return Err(UnfoldingError::BadBounds);
    }
    let states = sample_states(poly, samples, seed);
    let found: Vec<Option<PeriodicOrbitReport>> = states
        .par_iter()
        .map(|b| {
            let mut cur = *b;
            let mut sides = Vec::new();
            for p in 1..=max_bounces {
                let Ok(Collision::Bounce { next, .. }) = collision_step(&cur, poly) else { return None };
                sides.push(next.side);
                cur = next;
                if next.distance(b) < CANDIDATE_TOL {
                    return verify(b, poly, p, &sides);
                }
            }
            None
        })
        .collect();
    let mut unique: BTreeMap<Vec<usize>, PeriodicOrbitReport> = BTreeMap::new();
    for r in found.into_iter().flatten() {
        unique.entry(canonical_cycle(&r.bounces)).or_insert(r);
    }
    Ok(unique.into_values().collect())
}

fn verify(b: &BoundaryState, poly: &Polygon, p: usize, sides: &[usize]) -> Option<PeriodicOrbitReport> {
    let (start, _) = refine(b, poly, p, sides)?;
    let (end, seq, len) = iterate(&start, poly, p)?;
    let residual = end.distance(&start);
    if seq != sides || residual >= VERIFY_TOL {
        return None;
    }
    let chain_iso = reflection_product(poly, &seq);
    let k = poly.curvature();
    if k == Curvature::Flat {
        // the linear part must fix the initial direction
        let d = start.tangent(poly).dir;
        if (chain_iso * d - d).norm() > 1e-6 {
            return None;
        }
    }
    Some(PeriodicOrbitReport {
        start,
        bounces: seq,
        period_length: len,
        holonomy: classify_isometry(k, &chain_iso),
        residual,
    })
}

/// Re-simulates a report and returns the return distance.
pub fn periodic_residual(report: &PeriodicOrbitReport, poly: &Polygon) -> Option<f64> {
    let (end, seq, _) = iterate(&report.start, poly, report.period())?;
    (seq == report.bounces).then(|| end.distance(&report.start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{hyperbolic_pentagon, sphere_triangle, square};
    use crate::collision::{itinerary, Direction};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn perpendicular_orbit_unfolds_vertically() {
        let sq = square();
        let u = unfold(&BoundaryState::from_label(1, 0.5, FRAC_PI_2), &sq, 4).unwrap();
        assert_eq!(u.points.len(), 5);
        for (i, p) in u.points.iter().enumerate() {
            assert_abs_diff_eq!(p.0.x, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(p.0.y, i as f64, epsilon = 1e-13);
        }
        assert_eq!(holonomy(&u.chain, &sq), Holonomy::Translation { distance: 4.0 });
    }

    #[test]
    fn diagonal_orbit_unfolds_to_a_line() {
        let sq = square();
        let u = unfold(&BoundaryState::from_label(1, 0.5, FRAC_PI_4), &sq, 50).unwrap();
        assert!(!u.truncated);
        assert!(geodesic_fit_residual(Curvature::Flat, &u.points) < 1e-9);
    }

    #[test]
    fn parallel_mirrors_translate() {
        let sq = square();
        let m = reflection_product(&sq, &[0, 2]);
        assert_eq!(classify_isometry(Curvature::Flat, &m), Holonomy::Translation { distance: 2.0 });
        assert_eq!(holonomy(&UnfoldingChain::new(Curvature::Flat), &sq), Holonomy::Identity);
        assert_eq!(classify_isometry(Curvature::Flat, &reflection(&sq, 1)), Holonomy::ReflectionType);
    }

    #[test]
    fn meridian_mirrors_rotate_about_the_pole() {
        let theta = 0.4;
        let tri = sphere_triangle(theta).unwrap();
        for n in 1..4 {
            let sides: Vec<usize> = (0..2 * n).map(|i| if i % 2 == 0 { 0 } else { 2 }).collect();
            match classify_isometry(Curvature::Spherical, &reflection_product(&tri, &sides)) {
                Holonomy::Rotation { angle, axis } => {
                    assert_abs_diff_eq!(angle, 2.0 * n as f64 * theta, epsilon = 1e-12);
                    assert_abs_diff_eq!(axis.z.abs(), 1.0, epsilon = 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn crossings_match_itinerary() {
        for (poly, n) in [(square(), 50), (hyperbolic_pentagon(), 25)] {
            let b = BoundaryState::new(1, 0.3 * poly.side(1).length, 1.234);
            let it = itinerary(&b, &poly, n + 1, Direction::Forward).unwrap();
            let (sides, hit) = straight_crossings(&b, &poly, n).unwrap();
            assert!(!hit);
            let labels: Vec<usize> = sides.iter().map(|s| s + 1).collect();
            assert_eq!(labels, it.labels[1..]);
        }
    }

    #[test]
    fn hyperbolic_unfolding_stays_on_one_geodesic() {
        let p = hyperbolic_pentagon();
        let u = unfold(&BoundaryState::new(0, 0.2, 1.0), &p, 15).unwrap();
        assert!(geodesic_fit_residual(Curvature::Hyperbolic, &u.points) < 1e-8);
        let long = unfold(&BoundaryState::new(0, 0.2, 1.0), &p, 50).unwrap();
        assert!(long.joint_residuals.iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn periodicity_condition() {
        assert!(spherical_periodicity_condition(FRAC_PI_4, 2, 1).unwrap());
        assert!(spherical_periodicity_condition(FRAC_PI_6, 3, 1).unwrap());
        assert!(!spherical_periodicity_condition(1.0, 3, 2).unwrap());
        assert_eq!(spherical_periodicity_condition(1.0, 0, 0), Err(UnfoldingError::ZeroCount));
        assert!(spherical_periodicity_condition(0.0, 1, 0).is_err());
    }

    #[test]
    fn square_has_perpendicular_family() {
        let sq = square();
        let found = find_periodic(&sq, 4, 400, 7).unwrap();
        let perp = found.iter().find(|r| canonical_cycle(&r.bounces) == vec![0, 2]).expect("period-2 orbit");
        assert_abs_diff_eq!(perp.period_length, 2.0, epsilon = 1e-8);
        assert!(periodic_residual(perp, &sq).unwrap() < VERIFY_TOL);
        assert!(matches!(perp.holonomy, Holonomy::Translation { .. }));
    }

    #[test]
    fn sampling_is_seeded() {
        let sq = square();
        assert_eq!(sample_states(&sq, 50, 3), sample_states(&sq, 50, 3));
        assert_ne!(sample_states(&sq, 50, 3), sample_states(&sq, 50, 4));
        assert!(sample_states(&sq, 200, 1).iter().any(|b| b.psi == FRAC_PI_2));
    }

    #[test]
    fn canonical_cycles() {
        assert_eq!(canonical_cycle(&[2, 0, 2, 0]), vec![0, 2]);
        assert_eq!(canonical_cycle(&[1, 2, 0]), vec![0, 1, 2]);
        assert_eq!(canonical_cycle(&[2, 1, 0]), vec![0, 1, 2]);
    }
}
