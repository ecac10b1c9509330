use std::f64::consts::{FRAC_PI_2, PI, TAU};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use billiard_core::builtins::{hyperbolic_pentagon, regular_flat_polygon, sphere_triangle, square};
use billiard_core::collision::{collision_step, itinerary, BoundaryState, Collision, Direction};
use billiard_core::flow::{chart_forward, chart_inverse, CartesianChartState, ChartState};
use billiard_core::geometry::{Curvature, Geodesic};
use billiard_core::polygon::Polygon;
use billiard_core::unfolding::{reflection, reflection_product};

fn curvature() -> impl Strategy<Value = Curvature> {
    prop_oneof![Just(Curvature::Hyperbolic), Just(Curvature::Flat), Just(Curvature::Spherical)]
}

fn table(i: usize) -> Polygon {
    match i {
        0 => square(),
        1 => hyperbolic_pentagon(),
        _ => sphere_triangle(1.0).unwrap(),
    }
}

fn state(poly: &Polygon, side: usize, u: f64, psi: f64) -> BoundaryState {
    let side = side % poly.num_vertices();
    BoundaryState::new(side, u * poly.side(side).length, psi)
}

proptest! {
    #[test]
    fn chart_round_trip(k in curvature(), theta in 0.1..6.0f64, r in 1e-3..1.2f64, g in 0.0..1.0f64, beta in 0.0..TAU) {
        let s = ChartState::new(r, g * 2.0 * theta, beta);
        let back = chart_inverse(&chart_forward(&s, theta, k).unwrap(), theta, k).unwrap();
        prop_assert!((back.r - s.r).abs() < 1e-12);
        let dg = (back.gamma - s.gamma).abs();
        prop_assert!(dg.min(2.0 * theta - dg) < 1e-12);
        let db = (back.beta - s.beta).abs();
        prop_assert!(db.min(TAU - db) < 1e-12);
    }

    #[test]
    fn cartesian_round_trip(k in curvature(), theta in 0.1..6.0f64, big_r in 0.0..0.95f64, phi in 0.0..TAU, z in 0.0..TAU) {
        let c = CartesianChartState::new(big_r * phi.cos(), big_r * phi.sin(), z);
        let back = chart_forward(&chart_inverse(&c, theta, k).unwrap(), theta, k).unwrap();
        prop_assert!((back.x - c.x).abs().max((back.y - c.y).abs()).max((back.z - c.z).abs()) < 1e-12);
    }

    #[test]
    fn angle_of_reflection(t in 0..3usize, side in 0..5usize, u in 0.01..0.99f64, psi in 0.02..(PI - 0.02)) {
        let poly = table(t);
        let k = poly.curvature();
        let b = state(&poly, side, u, psi);
        if let Ok(Collision::Bounce { next, flight }) = collision_step(&b, &poly) {
            let incoming = k.geodesic_at(&Geodesic::new(b.tangent(&poly)), flight);
            let frame = poly.side_tangent(next.side, next.s);
            let normal = k.quarter_turn(&frame.base, &frame.dir);
            let out = next.tangent(&poly).dir;
            prop_assert!((k.form(&incoming.dir, &frame.dir) - k.form(&out, &frame.dir)).abs() < 1e-9);
            prop_assert!((k.form(&incoming.dir, &normal) + k.form(&out, &normal)).abs() < 1e-9);
            prop_assert!(k.form(&out, &normal) > 0.0);
        }
    }

    #[test]
    fn time_reversal_is_an_involution(t in 0..3usize, side in 0..5usize, u in 0.01..0.99f64, psi in 0.02..(PI - 0.02)) {
        let poly = table(t);
        let b = state(&poly, side, u, psi);
        if let Ok(Collision::Bounce { next, .. }) = collision_step(&b, &poly) {
            if let Ok(Collision::Bounce { next: back, .. }) = collision_step(&next.reversed(), &poly) {
                prop_assert!(back.reversed().distance(&b) < 1e-9);
            }
        }
    }

    #[test]
    fn bidirectional_itinerary_contains_both_halves(t in 0..3usize, side in 0..5usize, u in 0.05..0.95f64, psi in 0.1..(PI - 0.1)) {
        let poly = table(t);
        let b = state(&poly, side, u, psi);
        let fwd = itinerary(&b, &poly, 12, Direction::Forward).unwrap();
        let bwd = itinerary(&b, &poly, 12, Direction::Backward).unwrap();
        let both = itinerary(&b, &poly, 12, Direction::Bidirectional).unwrap();
        prop_assert_eq!(both.first_index, bwd.first_index);
        let split = (-both.first_index) as usize;
        prop_assert_eq!(&both.labels[split..], &fwd.labels[..]);
        prop_assert_eq!(&both.labels[..=split], &bwd.labels[..]);
    }

    #[test]
    fn reflection_products_associate(t in 0..3usize, sides in proptest::collection::vec(0..5usize, 3..9)) {
        let poly = table(t);
        let n = poly.num_vertices();
        let sides: Vec<usize> = sides.into_iter().map(|s| s % n).collect();
        let mid = sides.len() / 2;
        let left = reflection_product(&poly, &sides[..mid]) * reflection_product(&poly, &sides[mid..]);
        let right = sides.iter().rev().fold(billiard_core::geometry::Mat3::identity(), |m, &s| reflection(&poly, s) * m);
        let whole = reflection_product(&poly, &sides);
        let scale = whole.abs().max().max(1.0);
        prop_assert!((left - whole).abs().max() / scale < 1e-10);
        prop_assert!((right - whole).abs().max() / scale < 1e-10);
    }

    #[test]
    fn sphere_triangle_angle_excess_is_its_area(theta in 0.05..3.0f64) {
        // the triangle with apex θ on the pole is a θ/2π share of a hemisphere
        let poly = sphere_triangle(theta).unwrap();
        let excess: f64 = poly.angles().iter().sum::<f64>() - PI;
        prop_assert!((excess - theta).abs() < 1e-12);
    }
}

#[test]
fn angle_sums() {
    for n in 3..=8 {
        let sum: f64 = regular_flat_polygon(n).unwrap().angles().iter().sum();
        assert_abs_diff_eq!(sum, (n as f64 - 2.0) * PI, epsilon = 1e-12);
    }
    for a in hyperbolic_pentagon().angles() {
        assert_abs_diff_eq!(*a, FRAC_PI_2, epsilon = 1e-12);
    }
    let tri = sphere_triangle(1.0).unwrap();
    assert_abs_diff_eq!(tri.angles()[0], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(tri.angles()[1], FRAC_PI_2, epsilon = 1e-12);
}
