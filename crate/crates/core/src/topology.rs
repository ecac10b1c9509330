//! Invariants of the double surface and the fundamental group of the
//! compactified phase space.
//!
//! Tables are planar regions with holes, so doubling a table with `b`
//! boundary components gives a closed orientable surface of genus `b − 1`.

use std::fmt;

use thiserror::Error;

use crate::polygon::Polygon;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("a table needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("a table needs at least one boundary component")]
    NoBoundary,
    #[error("nonorientable double surfaces are not supported")]
    Nonorientable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceInvariants {
    pub genus: u32,
    pub euler: i64,
}

pub fn surface_invariants_from_boundary(components: usize) -> Result<SurfaceInvariants, TopologyError> {
    if components == 0 {
        return Err(TopologyError::NoBoundary);
    }
    let genus = (components - 1) as u32;
    Ok(SurfaceInvariants { genus, euler: 2 - 2 * genus as i64 })
}

pub fn double_surface_invariants(poly: &Polygon) -> SurfaceInvariants {
    surface_invariants_from_boundary(poly.boundary_components()).expect("a polygon has an outer loop")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupClass {
    Trivial,
    FiniteCyclic(u64),
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relations: Vec<String>,
    pub genus: u32,
    pub vertices: usize,
    /// Power of the fiber class in the surface relation, `χ(S) − N`.
    pub exponent: i64,
    pub classification: GroupClass,
}

impl GroupPresentation {
    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    /// The phase space when it is identified: the 3-sphere for a triangle.
    pub fn phase_space(&self) -> Option<&'static str> {
        (self.classification == GroupClass::Trivial && self.genus == 0).then_some("S³")
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{} | {}⟩", self.generators.join(", "), self.relations.join(", "))
    }
}

impl fmt::Display for GroupClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupClass::Trivial => f.write_str("trivial"),
            GroupClass::FiniteCyclic(n) => write!(f, "cyclic of order {n}"),
            GroupClass::Other => f.write_str("infinite, not classified"),
        }
    }
}

fn power(base: &str, e: i64) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

/// Presentation of the fundamental group for a table with the given number
/// of boundary components and vertices.
pub fn pi1_presentation_from_counts(
    components: usize,
    vertices: usize,
    orientable: bool,
) -> Result<GroupPresentation, TopologyError> {
    if !orientable {
        return Err(TopologyError::Nonorientable);
    }
    if vertices < 3 {
        return Err(TopologyError::TooFewVertices(vertices));
    }
    let inv = surface_invariants_from_boundary(components)?;
    let exponent = inv.euler - vertices as i64;
    let g = inv.genus;
    let mut generators = Vec::new();
    let mut commutators = Vec::new();
    for i in 1..=g {
        generators.push(format!("â{i}"));
        generators.push(format!("b̂{i}"));
        commutators.push(format!("[â{i},b̂{i}]"));
    }
    generators.push("γ_q".to_string());
    let mut relations = Vec::new();
    let classification = if g == 0 {
        relations.push(format!("{} = 1", power("γ_q", exponent)));
        match exponent.unsigned_abs() {
            1 => GroupClass::Trivial,
            n => GroupClass::FiniteCyclic(n),
        }
    } else {
        relations.push(format!("{} = {}", commutators.join(""), power("γ_q", exponent)));
        for gen in &generators[..generators.len() - 1] {
            relations.push(format!("[{gen},γ_q] = 1"));
        }
        GroupClass::Other
    };
    Ok(GroupPresentation { generators, relations, genus: g, vertices, exponent, classification })
}

pub fn pi1_presentation(poly: &Polygon) -> Result<GroupPresentation, TopologyError> {
    pi1_presentation_from_counts(poly.boundary_components(), poly.num_vertices(), true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    NotExponential,
    Unknown,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Growth::NotExponential => "not_exponential",
            Growth::Unknown => "unknown",
        })
    }
}

/// Only finite and cyclic groups are certified.
pub fn growth_class(p: &GroupPresentation) -> Growth {
    match p.classification {
        GroupClass::Trivial | GroupClass::FiniteCyclic(_) => Growth::NotExponential,
        GroupClass::Other => Growth::Unknown,
    }
}
