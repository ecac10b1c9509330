//! SVG figures of unfolded trajectories.
//!
//! Conventions, shared by every figure:
//! - Flat tables are drawn in plane coordinates with the y axis pointing up.
//! - Hyperbolic tables are drawn in the Poincaré disc, whose boundary circle
//!   is included.
//! - Spherical tables are projected orthographically along a view direction.
//!   Only the visible hemisphere is drawn; curves are cut where they cross
//!   the horizon, whose circle is included.
//! - Strokes use `vector-effect="non-scaling-stroke"`: width 1 for table
//!   copies (`#808080`), 1.5 for the trajectory (`#c00000`), 0.5 for the
//!   disc or horizon circle (`#000000`).
//! - The viewBox is the bounding box of the drawn curves with a 5% margin
//!   (the unit disc with the same margin for curved tables). Coordinates
//!   are printed with 6 decimals.

use std::fmt::Write as _;

use crate::collision::{collision_step, BoundaryState, Collision};
use crate::geometry::{Curvature, Geodesic, Point, Vec3};
use crate::polygon::Polygon;
use crate::unfolding::{apply_tangent, reflection, UnfoldingError};

/// Samples per unit of geodesic length (at least 8 per curve).
const SAMPLES_PER_UNIT: f64 = 64.0;
const MARGIN: f64 = 0.05;

/// Projection from model points to the drawing plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Plane,
    PoincareDisc,
    /// Orthographic, looking at the sphere from `view`.
    Orthographic {
        view: Vec3,
    },
}

impl Projection {
    pub fn for_curvature(k: Curvature) -> Self {
        match k {
            Curvature::Flat => Projection::Plane,
            Curvature::Hyperbolic => Projection::PoincareDisc,
            Curvature::Spherical => Projection::Orthographic { view: Vec3::new(1.0, 1.0, 1.0).normalize() },
        }
    }

    /// Drawing coordinates with y up, or `None` on the hidden hemisphere.
    pub fn project(&self, p: &Point) -> Option<(f64, f64)> {
        match self {
            Projection::Plane => Some((p.0.x, p.0.y)),
            Projection::PoincareDisc => Some(p.to_poincare()),
            Projection::Orthographic { view } => {
                if p.0.dot(view) < 0.0 {
                    return None;
                }
                let (e1, e2) = screen_basis(view);
                Some((p.0.dot(&e1), p.0.dot(&e2)))
            }
        }
    }
}

/// Right and up vectors of the screen, with the z axis drawn upward
/// whenever the view is not along it.
fn screen_basis(view: &Vec3) -> (Vec3, Vec3) {
    let up = if view.z.abs() > 0.999 { Vec3::y() } else { Vec3::z() };
    let e1 = up.cross(view).normalize();
    let e2 = view.cross(&e1);
    (e1, e2)
}

/// Polylines of visible pieces of a sampled curve.
fn pieces(proj: &Projection, pts: &[Point]) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for p in pts {
        match proj.project(p) {
            Some(q) => cur.push(q),
            None => {
                if cur.len() > 1 {
                    out.push(std::mem::take(&mut cur));
                }
                cur.clear();
            }
        }
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out
}

fn sample_geodesic(k: Curvature, g: &Geodesic, length: f64) -> Vec<Point> {
    let n = ((length * SAMPLES_PER_UNIT).ceil() as usize).max(8);
    (0..=n).map(|i| k.geodesic_at(g, length * i as f64 / n as f64).base).collect()
}

/// A drawing under construction.
#[derive(Debug, Clone)]
pub struct Figure {
    projection: Projection,
    copies: Vec<Vec<(f64, f64)>>,
    trajectory: Vec<Vec<(f64, f64)>>,
}

impl Figure {
    pub fn new(projection: Projection) -> Self {
        Figure { projection, copies: Vec::new(), trajectory: Vec::new() }
    }

    /// Adds the image of the table under a model isometry.
    pub fn add_copy(&mut self, poly: &Polygon, iso: &crate::geometry::Mat3) {
        let k = poly.curvature();
        for side in poly.sides() {
            let g = Geodesic::new(apply_tangent(iso, &side.geodesic.start));
            let pts = sample_geodesic(k, &g, side.length);
            self.copies.extend(pieces(&self.projection, &pts));
        }
    }

    /// Adds a geodesic arc of the trajectory.
    pub fn add_arc(&mut self, k: Curvature, g: &Geodesic, length: f64) {
        let pts = sample_geodesic(k, g, length);
        self.trajectory.extend(pieces(&self.projection, &pts));
    }

    fn view_box(&self) -> (f64, f64, f64, f64) {
        if !matches!(self.projection, Projection::Plane) {
            return (-1.0 - MARGIN * 2.0, -1.0 - MARGIN * 2.0, 2.0 + MARGIN * 4.0, 2.0 + MARGIN * 4.0);
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in self.copies.iter().chain(&self.trajectory).flatten() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (-1.0, -1.0, 2.0, 2.0);
        }
        let pad = MARGIN * (x1 - x0).max(y1 - y0).max(1e-9);
        (x0 - pad, -(y1 + pad), x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad)
    }

    pub fn render(&self) -> String {
        let (x, y, w, h) = self.view_box();
        let mut s = String::new();
        let _ = writeln!(s, r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x:.6} {y:.6} {w:.6} {h:.6}">"##);
        if !matches!(self.projection, Projection::Plane) {
            let _ = writeln!(
                s,
                r##"<circle cx="0" cy="0" r="1" fill="none" stroke="#000000" stroke-width="0.5" vector-effect="non-scaling-stroke"/>"##
            );
        }
        let path = |s: &mut String, lines: &[Vec<(f64, f64)>], color: &str, width: f64| {
            for line in lines {
                let pts: Vec<String> = line.iter().map(|(x, y)| format!("{x:.6},{:.6}", -y)).collect();
                let _ = writeln!(
                    s,
                    r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}" vector-effect="non-scaling-stroke"/>"##,
                    pts.join(" ")
                );
            }
        };
        path(&mut s, &self.copies, "#808080", 1.0);
        path(&mut s, &self.trajectory, "#c00000", 1.5);
        s.push_str("</svg>\n");
        s
    }
}

/// Draws the copies of the table visited by `bounces` collisions from `b`
/// together with the straightened trajectory.
pub fn unfolded_svg(
    b: &BoundaryState,
    poly: &Polygon,
    bounces: usize,
    projection: Projection,
) -> Result<String, UnfoldingError> {
    b.validate(poly)?;
    let k = poly.curvature();
    let mut fig = Figure::new(projection);
    let mut iso = crate::geometry::Mat3::identity();
    fig.add_copy(poly, &iso);
    let mut cur = *b;
    for _ in 0..bounces {
        let start = Geodesic::new(apply_tangent(&iso, &cur.tangent(poly)));
        match collision_step(&cur, poly)? {
            Collision::VertexHit { flight, .. } => {
                fig.add_arc(k, &start, flight);
                break;
            }
            Collision::Bounce { next, flight } => {
                fig.add_arc(k, &start, flight);
                iso *= reflection(poly, next.side);
                fig.add_copy(poly, &iso);
                cur = next;
            }
        }
    }
    Ok(fig.render())
}
