//! Constant-curvature geometry in a single quadric model.
//!
//! Every point is a 3-vector:
//!
//! * `k = +1`: the unit sphere in Euclidean R³,
//! * `k = -1`: the upper sheet of `x² + y² - z² = -1` with the Minkowski form,
//! * `k =  0`: the affine plane `z = 1` (directions have `z = 0`).
//!
//! With the bilinear form `B(u, v) = u.x v.x + u.y v.y + k u.z v.z` a unit-speed
//! geodesic is `P cos_k(t) + D sin_k(t)` in all three cases, which keeps
//! every formula below closed-form.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance for "this point lies on that curve".
pub const ON_CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curvature must be -1, 0 or 1, got {0}")]
    BadCurvature(i32),
    #[error("zero or degenerate tangent vector")]
    DegenerateVector,
    #[error("tangent vectors are based at different points")]
    DifferentBase,
    #[error("point is off the reflecting geodesic by {0:.3e}")]
    NotOnSide(f64),
    #[error("points coincide, no direction between them")]
    CoincidentPoints,
    #[error("antipodal points, the joining geodesic is not unique")]
    Antipodal,
    #[error("poincare disc coordinates must have norm < 1, got {0}")]
    OutsideDisc(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Curvature {
    Hyperbolic,
    Flat,
    Spherical,
}

impl TryFrom<i32> for Curvature {
    type Error = GeometryError;

    fn try_from(k: i32) -> Result<Self, Self::Error> {
        match k {
            -1 => Ok(Curvature::Hyperbolic),
            0 => Ok(Curvature::Flat),
            1 => Ok(Curvature::Spherical),
            other => Err(GeometryError::BadCurvature(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(pub Vec3);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub base: Point,
    pub dir: Vec3,
}

/// Unit-speed geodesic starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    pub start: Tangent,
}

impl Point {
    pub fn plane(x: f64, y: f64) -> Self {
        Point(Vec3::new(x, y, 1.0))
    }

    /// Normalizes onto the unit sphere.
    pub fn sphere(x: f64, y: f64, z: f64) -> Self {
        Point(Vec3::new(x, y, z).normalize())
    }

    /// Lifts `(x, y)` to the hyperboloid sheet.
    pub fn hyperboloid(x: f64, y: f64) -> Self {
        Point(Vec3::new(x, y, (1.0 + x * x + y * y).sqrt()))
    }

    pub fn from_poincare(u: f64, v: f64) -> Result<Self, GeometryError> {
        let w2 = u * u + v * v;
        if w2 >= 1.0 {
            return Err(GeometryError::OutsideDisc(w2.sqrt()));
        }
        let d = 1.0 - w2;
        Ok(Point(Vec3::new(2.0 * u / d, 2.0 * v / d, (1.0 + w2) / d)))
    }

    pub fn to_poincare(&self) -> (f64, f64) {
        let p = self.0;
        (p.x / (1.0 + p.z), p.y / (1.0 + p.z))
    }
}

impl Tangent {
    pub fn new(base: Point, dir: Vec3) -> Self {
        Tangent { base, dir }
    }

    pub fn reversed(&self) -> Self {
        Tangent { base: self.base, dir: -self.dir }
    }
}

impl Geodesic {
    pub fn new(start: Tangent) -> Self {
        Geodesic { start }
    }

    pub fn reversed(&self) -> Self {
        Geodesic { start: self.start.reversed() }
    }
}

impl Curvature {
    pub fn k(self) -> f64 {
        match self {
            Curvature::Hyperbolic => -1.0,
            Curvature::Flat => 0.0,
            Curvature::Spherical => 1.0,
        }
    }

    pub fn as_int(self) -> i32 {
        self.k() as i32
    }

    /// `cosh`, `1` or `cos`.
    pub fn cos_k(self, t: f64) -> f64 {
        match self {
            Curvature::Hyperbolic => t.cosh(),
            Curvature::Flat => 1.0,
            Curvature::Spherical => t.cos(),
        }
    }

    /// `sinh`, identity or `sin`.
    pub fn sin_k(self, t: f64) -> f64 {
        match self {
            Curvature::Hyperbolic => t.sinh(),
            Curvature::Flat => t,
            Curvature::Spherical => t.sin(),
        }
    }

    /// The model form `diag(1, 1, k)`.
    pub fn metric(self) -> Mat3 {
        Mat3::from_diagonal(&Vec3::new(1.0, 1.0, self.k()))
    }

    pub fn form(self, u: &Vec3, v: &Vec3) -> f64 {
        u.x * v.x + u.y * v.y + self.k() * u.z * v.z
    }

    pub fn norm(self, u: &Vec3) -> f64 {
        self.form(u, u).max(0.0).sqrt()
    }

    /// Residual of the model constraint for a point.
    pub fn point_residual(self, p: &Point) -> f64 {
        match self {
            Curvature::Flat => (p.0.z - 1.0).abs(),
            Curvature::Spherical => (p.0.norm_squared() - 1.0).abs(),
            Curvature::Hyperbolic => {
                let r = (self.form(&p.0, &p.0) + 1.0).abs();
                if p.0.z > 0.0 {
                    r
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn project_point(self, p: &Point) -> Point {
        let v = p.0;
        match self {
            Curvature::Flat => Point(Vec3::new(v.x, v.y, 1.0)),
            Curvature::Spherical => Point(v.normalize()),
            Curvature::Hyperbolic => Point::hyperboloid(v.x, v.y),
        }
    }

    /// Snaps a tangent back onto the model: base on the quadric, direction
    /// orthogonal to it with unit length.
    pub fn project_tangent(self, t: &Tangent) -> Tangent {
        let base = self.project_point(&t.base);
        let mut d = t.dir;
        match self {
            Curvature::Flat => d.z = 0.0,
            _ => {
                let pp = self.form(&base.0, &base.0);
                d -= base.0 * (self.form(&d, &base.0) / pp);
            }
        }
        let n = self.norm(&d);
        Tangent { base, dir: d / n }
    }

    /// Counterclockwise quarter turn in the tangent plane at `base`.
    pub fn quarter_turn(self, base: &Point, u: &Vec3) -> Vec3 {
        self.metric() * base.0.cross(u)
    }

    pub fn rotate(self, t: &Tangent, angle: f64) -> Tangent {
        let j = self.quarter_turn(&t.base, &t.dir);
        Tangent { base: t.base, dir: t.dir * angle.cos() + j * angle.sin() }
    }

    pub fn distance(self, a: &Point, b: &Point) -> f64 {
        match self {
            Curvature::Flat => (a.0.xy() - b.0.xy()).norm(),
            Curvature::Spherical => 2.0 * (a.0 - b.0).norm().atan2((a.0 + b.0).norm()),
            Curvature::Hyperbolic => {
                let d = a.0 - b.0;
                2.0 * (0.5 * self.norm(&d)).asinh()
            }
        }
    }

    /// Point and velocity after arc length `t`.
    pub fn geodesic_at(self, g: &Geodesic, t: f64) -> Tangent {
        let p = g.start.base.0;
        let d = g.start.dir;
        let (c, s) = (self.cos_k(t), self.sin_k(t));
        let pos = match self {
            Curvature::Flat => p + d * t,
            _ => p * c + d * s,
        };
        let vel = d * c - p * (self.k() * s);
        Tangent { base: Point(pos), dir: vel }
    }

    /// Unit direction at `a` of the minimizing geodesic towards `b`.
    pub fn direction_to(self, a: &Point, b: &Point) -> Result<Tangent, GeometryError> {
        let raw = match self {
            Curvature::Flat => {
                let mut d = b.0 - a.0;
                d.z = 0.0;
                d
            }
            _ => b.0 - a.0 * (self.form(&a.0, &b.0) / self.k()),
        };
        let n = self.norm(&raw);
        if n < 1e-300 {
            return Err(if self == Curvature::Spherical && a.0.dot(&b.0) < 0.0 {
                GeometryError::Antipodal
            } else {
                GeometryError::CoincidentPoints
            });
        }
        Ok(Tangent { base: *a, dir: raw / n })
    }

    /// Geodesic from `a` towards `b` together with the arc length.
    pub fn segment(self, a: &Point, b: &Point) -> Result<(Geodesic, f64), GeometryError> {
        let t = self.direction_to(a, b)?;
        Ok((Geodesic::new(t), self.distance(a, b)))
    }

    /// Unsigned angle in `[0, π]`.
    pub fn angle_between(self, u: &Tangent, v: &Tangent) -> Result<f64, GeometryError> {
        Ok(self.signed_angle(u, v)?.abs())
    }

    /// Counterclockwise angle from `u` to `v` in `(-π, π]`.
    pub fn signed_angle(self, u: &Tangent, v: &Tangent) -> Result<f64, GeometryError> {
        if (u.base.0 - v.base.0).norm() > 1e-9 {
            return Err(GeometryError::DifferentBase);
        }
        if self.norm(&u.dir) < 1e-300 || self.norm(&v.dir) < 1e-300 {
            return Err(GeometryError::DegenerateVector);
        }
        let j = self.quarter_turn(&u.base, &u.dir);
        Ok(self.form(&j, &v.dir).atan2(self.form(&u.dir, &v.dir)))
    }

    /// Unit normal of a geodesic, pointing to its left. For `k ≠ 0` this is
    /// the form-normal of the plane through the origin containing it.
    pub fn left_normal(self, g: &Geodesic) -> Vec3 {
        self.quarter_turn(&g.start.base, &g.start.dir)
    }

    /// Signed offset of `p` from the full geodesic, positive on the left.
    /// This is `sin_k` of the signed distance.
    pub fn side_offset(self, g: &Geodesic, p: &Point) -> f64 {
        let n = self.left_normal(g);
        match self {
            Curvature::Flat => self.form(&(p.0 - g.start.base.0), &n),
            _ => self.form(&p.0, &n),
        }
    }

    /// Isometry of the model reflecting across the full geodesic. For the
    /// plane it acts affinely on `(x, y, 1)`.
    pub fn reflection_matrix(self, g: &Geodesic) -> Mat3 {
        let n = self.left_normal(g);
        let nn = self.form(&n, &n);
        let gn = self.metric() * n;
        let mut m = Mat3::identity() - (n * gn.transpose()) * (2.0 / nn);
        if self == Curvature::Flat {
            let c = self.form(&g.start.base.0, &n);
            m += (n * Vec3::z().transpose()) * (2.0 * c / nn);
        }
        m
    }

    /// Mirrors the tangent across `side`; its base must lie on the side.
    pub fn reflect(self, t: &Tangent, side: &Geodesic) -> Result<Tangent, GeometryError> {
        let off = self.side_offset(side, &t.base).abs();
        if off > ON_CURVE_TOL {
            return Err(GeometryError::NotOnSide(off));
        }
        let n = self.left_normal(side);
        let nn = self.form(&n, &n);
        let dir = t.dir - n * (2.0 * self.form(&t.dir, &n) / nn);
        Ok(Tangent { base: t.base, dir })
    }

    /// Arc-length parameter of the point of `side` nearest to `p`, without
    /// clamping (for the sphere in `(-π, π]`).
    pub fn side_parameter(self, side: &Geodesic, p: &Point) -> f64 {
        let q = side.start.base.0;
        let t = side.start.dir;
        match self {
            Curvature::Flat => self.form(&(p.0 - q), &t),
            Curvature::Spherical => self.form(&p.0, &t).atan2(self.form(&p.0, &q)),
            Curvature::Hyperbolic => {
                let a = -self.form(&p.0, &q);
                let b = self.form(&p.0, &t);
                (b / a).atanh()
            }
        }
    }

    /// Distance from `p` to the segment `side([0, len])`.
    pub fn distance_to_segment(self, side: &Geodesic, len: f64, p: &Point) -> f64 {
        let mut best = self.distance(p, &side.start.base).min(self.distance(p, &self.geodesic_at(side, len).base));
        let s = self.side_parameter(side, p);
        if s.is_finite() && s > 0.0 && s < len {
            best = best.min(self.distance(p, &self.geodesic_at(side, s).base));
        }
        best
    }

    /// First crossing of `g` with the segment `side([0, side_len])` at a
    /// parameter `t > t_min`. Returns `(t, s)`.
    pub fn geodesic_side_intersection(
        self,
        g: &Geodesic,
        side: &Geodesic,
        side_len: f64,
        t_min: f64,
    ) -> Option<(f64, f64)> {
        let n = self.left_normal(side);
        let p = g.start.base.0;
        let d = g.start.dir;
        let b = self.form(&d, &n);
        let mut roots: [f64; 4] = [f64::NAN; 4];
        match self {
            Curvature::Flat => {
                let a = self.form(&(p - side.start.base.0), &n);
                if b.abs() < 1e-300 {
                    return None;
                }
                roots[0] = -a / b;
            }
            Curvature::Hyperbolic => {
                let a = self.form(&p, &n);
                if a.abs() >= b.abs() {
                    return None;
                }
                roots[0] = (-a / b).atanh();
            }
            Curvature::Spherical => {
                let a = self.form(&p, &n);
                // a cos t + b sin t = R sin(t + φ)
                let phi = a.atan2(b);
                for (i, m) in (-1..=2).enumerate() {
                    roots[i] = -phi + m as f64 * PI;
                }
            }
        }
        let slack = 1e-12 * (1.0 + side_len);
        let mut best: Option<(f64, f64)> = None;
        for &t in roots.iter().filter(|t| t.is_finite()) {
            if t <= t_min || (self == Curvature::Spherical && t > 2.0 * PI + t_min) {
                continue;
            }
            if best.is_some_and(|(bt, _)| bt <= t) {
                continue;
            }
            let x = self.geodesic_at(g, t).base;
            let s = self.side_parameter(side, &x);
            if s >= -slack && s <= side_len + slack {
                best = Some((t, s.clamp(0.0, side_len)));
            }
        }
        best
    }
}
