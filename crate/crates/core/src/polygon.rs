//! Geodesic polygons and the double billiard surface.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Curvature, Geodesic, GeometryError, Point, Tangent, Vec3};

/// Two vertices closer than this are considered repeated.
const VERTEX_MERGE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("loop {loop_index} has {count} vertices, at least 3 are required")]
    TooFewVertices { loop_index: usize, count: usize },
    #[error("vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
    #[error("side {side} has length {length}, spherical sides must be shorter than pi")]
    SideTooLong { side: usize, length: f64 },
    #[error("sides {0} and {1} intersect away from a shared vertex")]
    SelfIntersecting(usize, usize),
    #[error("degenerate (zero or full) angle at vertex {0}")]
    DegenerateAngle(usize),
    #[error("hole {0} is not inside the outer boundary or overlaps another hole")]
    NonSimpleRegion(usize),
    #[error("{model:?} coordinates cannot describe a table of curvature {curvature}")]
    ModelMismatch { model: Model, curvature: i32 },
    #[error("vertex {index}: expected {expected} coordinates, got {got}")]
    CoordinateArity { index: usize, expected: usize, got: usize },
    #[error("vertex {index}: {source}")]
    Coordinate { index: usize, source: GeometryError },
}

/// Coordinate convention used for vertex input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Plane,
    PoincareDisc,
    UnitSphere,
}

impl Model {
    pub fn curvature(self) -> Curvature {
        match self {
            Model::Plane => Curvature::Flat,
            Model::PoincareDisc => Curvature::Hyperbolic,
            Model::UnitSphere => Curvature::Spherical,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Model::UnitSphere => 3,
            _ => 2,
        }
    }

    pub fn point(self, index: usize, c: &[f64]) -> Result<Point, PolygonError> {
        if c.len() != self.arity() {
            return Err(PolygonError::CoordinateArity { index, expected: self.arity(), got: c.len() });
        }
        match self {
            Model::Plane => Ok(Point::plane(c[0], c[1])),
            Model::PoincareDisc => {
                Point::from_poincare(c[0], c[1]).map_err(|source| PolygonError::Coordinate { index, source })
            }
            Model::UnitSphere => {
                if c.iter().all(|x| *x == 0.0) {
                    return Err(PolygonError::Coordinate { index, source: GeometryError::DegenerateVector });
                }
                Ok(Point::sphere(c[0], c[1], c[2]))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side {
    pub geodesic: Geodesic,
    pub length: f64,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct Polygon {
    curvature: Curvature,
    vertices: Vec<Point>,
    loops: Vec<Range<usize>>,
    sides: Vec<Side>,
    angles: Vec<f64>,
    reoriented: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    Top,
    Bottom,
}

/// A point of the double surface: two copies of the table glued along the
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSurfacePoint {
    pub sheet: Sheet,
    pub pos: Point,
}

impl DoubleSurfacePoint {
    /// Boundary points are shared by both sheets.
    pub fn same_point(&self, other: &DoubleSurfacePoint, poly: &Polygon) -> bool {
        let k = poly.curvature();
        if k.distance(&self.pos, &other.pos) > VERTEX_MERGE_TOL {
            return false;
        }
        self.sheet == other.sheet || poly.on_boundary(&self.pos)
    }
}

impl Polygon {
    /// Simply connected table.
    pub fn new(k: Curvature, outer: Vec<Point>) -> Result<Self, PolygonError> {
        Self::with_holes(k, outer, Vec::new())
    }

    pub fn from_coords(
        model: Model,
        curvature: Curvature,
        outer: &[Vec<f64>],
        holes: &[Vec<Vec<f64>>],
    ) -> Result<Self, PolygonError> {
        if model.curvature() != curvature {
            return Err(PolygonError::ModelMismatch { model, curvature: curvature.as_int() });
        }
        let mut idx = 0;
        let mut convert = |coords: &[Vec<f64>]| -> Result<Vec<Point>, PolygonError> {
            coords
                .iter()
                .map(|c| {
                    let p = model.point(idx, c);
                    idx += 1;
                    p
                })
                .collect()
        };
        let outer = convert(outer)?;
        let holes = holes.iter().map(|h| convert(h)).collect::<Result<Vec<_>, _>>()?;
        Self::with_holes(curvature, outer, holes)
    }

    /// Outer loop plus holes. Orientation is normalized so the table lies to
    /// the left of every side (outer loop counterclockwise, holes clockwise).
    pub fn with_holes(k: Curvature, outer: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self, PolygonError> {
        let mut all_loops = vec![outer];
        all_loops.extend(holes);
        for (li, lp) in all_loops.iter().enumerate() {
            if lp.len() < 3 {
                return Err(PolygonError::TooFewVertices { loop_index: li, count: lp.len() });
            }
        }
        let mut reoriented = false;
        let mut loops = Vec::new();
        let mut vertices: Vec<Point> = Vec::new();
        for (li, lp) in all_loops.into_iter().enumerate() {
            let mut lp: Vec<Point> = lp.iter().map(|p| k.project_point(p)).collect();
            let offset = vertices.len();
            let sum = loop_angle_sum(k, &lp, offset)?;
            let n = lp.len() as f64;
            let wrong_way = if li == 0 { sum > n * PI } else { sum < n * PI };
            if wrong_way {
                lp.reverse();
                reoriented = true;
            }
            loops.push(offset..offset + lp.len());
            vertices.extend(lp);
        }

        let n = vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                if k.distance(&vertices[i], &vertices[j]) < VERTEX_MERGE_TOL {
                    return Err(PolygonError::RepeatedVertex(i, j));
                }
            }
        }

        let mut sides = Vec::with_capacity(n);
        for lp in &loops {
            for i in lp.clone() {
                let j = next_in_loop(lp, i);
                let (geodesic, length) = k
                    .segment(&vertices[i], &vertices[j])
                    .map_err(|_| PolygonError::SideTooLong { side: i, length: PI })?;
                if k == Curvature::Spherical && length >= PI - 1e-9 {
                    return Err(PolygonError::SideTooLong { side: i, length });
                }
                sides.push(Side { geodesic, length, start: i, end: j });
            }
        }

        let mut angles = vec![0.0; n];
        for lp in &loops {
            for i in lp.clone() {
                let prev = prev_in_loop(lp, i);
                angles[i] = interior_angle(k, &vertices[prev], &vertices[i], &sides[i].geodesic)
                    .ok_or(PolygonError::DegenerateAngle(i))?;
            }
        }

        let poly = Polygon { curvature: k, vertices, loops, sides, angles, reoriented };
        poly.check_crossings()?;
        poly.check_holes()?;
        Ok(poly)
    }

    fn check_crossings(&self) -> Result<(), PolygonError> {
        let k = self.curvature;
        let n = self.sides.len();
        for a in 0..n {
            for b in a + 1..n {
                let (sa, sb) = (&self.sides[a], &self.sides[b]);
                let adjacent = sa.end == sb.start || sb.end == sa.start;
                if adjacent {
                    continue;
                }
                // Crossing strictly inside side a, touching side b anywhere.
                let tol = 1e-12;
                if let Some((t, _)) = k.geodesic_side_intersection(&sa.geodesic, &sb.geodesic, sb.length, tol) {
                    if t < sa.length - tol {
                        return Err(PolygonError::SelfIntersecting(a + 1, b + 1));
                    }
                }
                for v in [sb.start, sb.end] {
                    if k.distance_to_segment(&sa.geodesic, sa.length, &self.vertices[v]) < VERTEX_MERGE_TOL {
                        return Err(PolygonError::SelfIntersecting(a + 1, b + 1));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_holes(&self) -> Result<(), PolygonError> {
        for (hi, lp) in self.loops.iter().enumerate().skip(1) {
            let probe = &self.vertices[lp.start];
            if self.winding(&self.loops[0], probe).map(f64::round) != Some(1.0) {
                return Err(PolygonError::NonSimpleRegion(hi));
            }
            for (oi, other) in self.loops.iter().enumerate().skip(1) {
                if oi != hi && self.winding(other, probe).map(f64::round) != Some(0.0) {
                    return Err(PolygonError::NonSimpleRegion(hi));
                }
            }
        }
        Ok(())
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn side(&self, i: usize) -> &Side {
        &self.sides[i]
    }

    /// Interior angle at each vertex, in `(0, 2π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn boundary_components(&self) -> usize {
        self.loops.len()
    }

    pub fn loops(&self) -> &[Range<usize>] {
        &self.loops
    }

    /// Set when the input loops had to be reversed.
    pub fn was_reoriented(&self) -> bool {
        self.reoriented
    }

    pub fn perimeter(&self) -> f64 {
        self.sides.iter().map(|s| s.length).sum()
    }

    /// Index of the side arriving at vertex `i`.
    pub fn incoming_side(&self, i: usize) -> usize {
        let lp = self.loop_of(i);
        prev_in_loop(lp, i)
    }

    fn loop_of(&self, i: usize) -> &Range<usize> {
        self.loops.iter().find(|l| l.contains(&i)).expect("vertex index out of range")
    }

    /// Point of side `i` at arc length `s`, with the side's forward direction.
    pub fn side_tangent(&self, i: usize, s: f64) -> Tangent {
        self.curvature.geodesic_at(&self.sides[i].geodesic, s)
    }

    pub fn on_boundary(&self, p: &Point) -> bool {
        let k = self.curvature;
        self.sides.iter().any(|s| k.distance_to_segment(&s.geodesic, s.length, p) < 1e-10)
    }

    /// Winding number of one loop around `p` (sides subdivided so each piece
    /// subtends less than a half turn). `None` when `p` is antipodal to a
    /// boundary point.
    fn winding(&self, lp: &Range<usize>, p: &Point) -> Option<f64> {
        let k = self.curvature;
        let mut total = 0.0;
        for i in lp.clone() {
            let side = &self.sides[i];
            let pieces = (side.length / (PI / 8.0)).ceil().max(1.0) as usize;
            let mut prev: Option<Tangent> = None;
            for j in 0..=pieces {
                let q = k.geodesic_at(&side.geodesic, side.length * j as f64 / pieces as f64).base;
                let d = k.direction_to(p, &q).ok()?;
                if let Some(pd) = prev {
                    total += k.signed_angle(&pd, &d).ok()?;
                }
                prev = Some(d);
            }
        }
        Some(total / (2.0 * PI))
    }

    fn total_winding(&self, p: &Point) -> Option<f64> {
        self.loops.iter().map(|lp| self.winding(lp, p)).sum()
    }

    /// True for points of the open interior; boundary points are excluded.
    pub fn interior_contains(&self, p: &Point) -> bool {
        let k = self.curvature;
        if k.point_residual(p) > 1e-8 || self.on_boundary(p) {
            return false;
        }
        if let Some(w) = self.total_winding(p) {
            return w.round() == 1.0;
        }
        // Antipodal to the boundary (sphere only): nudge off the great circle.
        [Vec3::x(), Vec3::y(), Vec3::z()]
            .iter()
            .filter_map(|e| {
                self.total_winding(&Point::sphere(p.0.x + 1e-7 * e.x, p.0.y + 1e-7 * e.y, p.0.z + 1e-7 * e.z))
            })
            .next()
            .is_some_and(|w| w.round() == 1.0)
    }

    /// Radius of the disc used for the chart at vertex `i`: half the minimum of
    /// the distance to non-incident sides and other vertices, and the
    /// shortest incident side.
    pub fn vertex_neighborhood_radius(&self, i: usize) -> f64 {
        let k = self.curvature;
        let p = &self.vertices[i];
        let inc = self.incoming_side(i);
        let mut m = self.sides[i].length.min(self.sides[inc].length);
        for (j, s) in self.sides.iter().enumerate() {
            if j != i && j != inc {
                m = m.min(k.distance_to_segment(&s.geodesic, s.length, p));
            }
        }
        for (j, q) in self.vertices.iter().enumerate() {
            if j != i {
                m = m.min(k.distance(p, q));
            }
        }
        0.5 * m
    }
}

fn next_in_loop(lp: &Range<usize>, i: usize) -> usize {
    if i + 1 == lp.end {
        lp.start
    } else {
        i + 1
    }
}

fn prev_in_loop(lp: &Range<usize>, i: usize) -> usize {
    if i == lp.start {
        lp.end - 1
    } else {
        i - 1
    }
}

/// Counterclockwise angle from the outgoing side to the incoming one, i.e.
/// the angle on the left of the boundary.
fn interior_angle(k: Curvature, prev: &Point, at: &Point, outgoing: &Geodesic) -> Option<f64> {
    let back = k.direction_to(at, prev).ok()?;
    let a = k.signed_angle(&outgoing.start, &back).ok()?.rem_euclid(2.0 * PI);
    if !(1e-12..=2.0 * PI - 1e-12).contains(&a) {
        None
    } else {
        Some(a)
    }
}

fn loop_angle_sum(k: Curvature, lp: &[Point], offset: usize) -> Result<f64, PolygonError> {
    let n = lp.len();
    let mut sum = 0.0;
    for i in 0..n {
        let prev = &lp[(i + n - 1) % n];
        let next = &lp[(i + 1) % n];
        let out = k.direction_to(&lp[i], next).map_err(|e| match e {
            GeometryError::Antipodal => PolygonError::SideTooLong { side: offset + i, length: PI },
            _ => PolygonError::RepeatedVertex(offset + i, offset + (i + 1) % n),
        })?;
        sum += interior_angle(k, prev, &lp[i], &Geodesic::new(out)).ok_or(PolygonError::DegenerateAngle(offset + i))?;
    }
    Ok(sum)
}
