//! Named tables used throughout the docs and tests.

use std::f64::consts::PI;

use crate::geometry::{Curvature, Point};
use crate::polygon::{Polygon, PolygonError};

/// The unit square `[0,1]²`. Side labels: 1 bottom, 2 right, 3 top, 4 left.
pub fn square() -> Polygon {
    let v = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    Polygon::new(Curvature::Flat, v.iter().map(|&(x, y)| Point::plane(x, y)).collect()).expect("unit square is valid")
}

/// Regular flat `n`-gon inscribed in the unit circle.
pub fn regular_flat_polygon(n: usize) -> Result<Polygon, PolygonError> {
    let pts = (0..n)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / n as f64;
            Point::plane(a.cos(), a.sin())
        })
        .collect();
    Polygon::new(Curvature::Flat, pts)
}

/// Circumradius of the regular hyperbolic pentagon with right angles:
/// `cosh ρ = cot(π/5)·cot(π/4)`.
pub fn right_pentagon_circumradius() -> f64 {
    (1.0 / (PI / 5.0).tan()).acosh()
}

/// Regular right-angled pentagon centred at the origin of the Poincaré disc.
pub fn hyperbolic_pentagon() -> Polygon {
    let rd = (0.5 * right_pentagon_circumradius()).tanh();
    let pts = (0..5)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / 5.0;
            Point::from_poincare(rd * a.cos(), rd * a.sin()).expect("inside the disc")
        })
        .collect();
    Polygon::new(Curvature::Hyperbolic, pts).expect("pentagon is valid")
}

/// Triangle with vertices `V₁` at the north pole and `V₂ = (1,0,0)`,
/// `V₃ = (cos θ, sin θ, 0)` on the equator. Angles `(θ, π/2, π/2)`; side 1 is
/// `V₁V₂`, side 2 the equatorial side `V₂V₃`, side 3 is `V₃V₁`.
pub fn sphere_triangle(theta: f64) -> Result<Polygon, PolygonError> {
    Polygon::new(
        Curvature::Spherical,
        vec![Point::sphere(0.0, 0.0, 1.0), Point::sphere(1.0, 0.0, 0.0), Point::sphere(theta.cos(), theta.sin(), 0.0)],
    )
}

/// Flat square annulus: outer square of half-width 2, inner of half-width 1.
pub fn square_annulus() -> Polygon {
    let sq = |h: f64| vec![Point::plane(-h, -h), Point::plane(h, -h), Point::plane(h, h), Point::plane(-h, h)];
    Polygon::with_holes(Curvature::Flat, sq(2.0), vec![sq(1.0)]).expect("annulus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn pentagon_has_right_angles() {
        let p = hyperbolic_pentagon();
        assert!(!p.was_reoriented());
        for a in p.angles() {
            assert_abs_diff_eq!(*a, FRAC_PI_2, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(right_pentagon_circumradius(), 0.842_482_081_462_007_5, epsilon = 1e-12);
    }

    #[test]
    fn sphere_triangle_labels() {
        let t = sphere_triangle(1.0).unwrap();
        assert!(!t.was_reoriented());
        assert_abs_diff_eq!(t.angles()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.side(1).length, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.side(0).length, FRAC_PI_2, epsilon = 1e-14);
    }

    #[test]
    fn annulus_has_two_components() {
        let a = square_annulus();
        assert_eq!(a.boundary_components(), 2);
        assert_eq!(a.num_vertices(), 8);
    }
}
