use std::path::{Path, PathBuf};

use billiard_core::geometry::Curvature;
use billiard_core::io::load_table;
use billiard_core::topology::double_surface_invariants;

fn tables() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tables")
}

#[test]
fn sample_tables_load() {
    let cases = [
        ("triangle.toml", Curvature::Flat, 3, 0),
        ("square.toml", Curvature::Flat, 4, 0),
        ("l-shape.toml", Curvature::Flat, 6, 0),
        ("annulus.toml", Curvature::Flat, 8, 1),
        ("hyperbolic-triangle.toml", Curvature::Hyperbolic, 3, 0),
        ("sphere-octant.toml", Curvature::Spherical, 3, 0),
    ];
    for (name, k, n, genus) in cases {
        let poly = load_table(&tables().join(name)).unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(poly.curvature(), k, "{name}");
        assert_eq!(poly.num_vertices(), n, "{name}");
        assert_eq!(double_surface_invariants(&poly).genus, genus, "{name}");
    }
}

#[test]
fn sphere_octant_has_right_angles() {
    let poly = load_table(&tables().join("sphere-octant.toml")).unwrap();
    for a in poly.angles() {
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}

#[test]
fn l_shape_has_one_reflex_vertex() {
    let poly = load_table(&tables().join("l-shape.toml")).unwrap();
    let reflex = poly.angles().iter().filter(|a| **a > std::f64::consts::PI).count();
    assert_eq!(reflex, 1);
}
