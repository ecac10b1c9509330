//! The collision map on the boundary, itineraries, and generalized diagonals.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Curvature, Geodesic, Tangent};
use crate::polygon::Polygon;

/// Vertex-hit tolerance, in model length units.
pub const TOL_VERTEX: f64 = 1e-9;
/// States with `ψ` this close to `0` or `π` are rejected as grazing.
pub const TOL_GRAZING: f64 = 1e-9;
/// Length tolerance for `m·π` in the conjugated-vertex test.
pub const TOL_CONJUGATE: f64 = 1e-8;

// Minimum flight before the start side may be hit again (sphere only).
const MIN_RETURN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollisionError {
    #[error("side index {0} out of range")]
    BadSide(usize),
    #[error("parameter s = {s} outside side of length {len}")]
    ParameterOutOfRange { s: f64, len: f64 },
    #[error("grazing state: psi = {0}")]
    Grazing(f64),
    #[error("no boundary intersection found")]
    NoIntersection,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("degenerate state at itinerary index {index}: {source}")]
    DegenerateAt { index: i64, source: Box<CollisionError> },
    #[error("conjugated vertices are defined for spherical tables only (k = {0})")]
    NotSpherical(i32),
    #[error("search bounds must be positive")]
    BadBounds,
}

/// A point of the boundary with an outgoing direction. `side` is 0-based;
/// [`BoundaryState::label`] gives the 1-based side label. `ψ ∈ (0, π)` is
/// measured counterclockwise from the side's forward direction, so it points
/// into the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryState {
    pub side: usize,
    pub s: f64,
    pub psi: f64,
}

impl BoundaryState {
    pub fn new(side: usize, s: f64, psi: f64) -> Self {
        BoundaryState { side, s, psi }
    }

    /// Builds a state from a 1-based side label.
    pub fn from_label(label: usize, s: f64, psi: f64) -> Self {
        BoundaryState { side: label.wrapping_sub(1), s, psi }
    }

    pub fn label(&self) -> usize {
        self.side + 1
    }

    /// Time-reversal involution.
    pub fn reversed(&self) -> Self {
        BoundaryState { psi: PI - self.psi, ..*self }
    }

    pub fn validate(&self, poly: &Polygon) -> Result<(), CollisionError> {
        if self.side >= poly.num_vertices() {
            return Err(CollisionError::BadSide(self.side));
        }
        let len = poly.side(self.side).length;
        if !(self.s >= 0.0 && self.s <= len) {
            return Err(CollisionError::ParameterOutOfRange { s: self.s, len });
        }
        if !(self.psi > TOL_GRAZING && self.psi < PI - TOL_GRAZING) {
            return Err(CollisionError::Grazing(self.psi));
        }
        Ok(())
    }

    /// Base point and unit outgoing velocity in the model.
    pub fn tangent(&self, poly: &Polygon) -> Tangent {
        let t = poly.side_tangent(self.side, self.s);
        poly.curvature().rotate(&t, self.psi)
    }

    /// Distance in `(s, ψ)` to a state on the same side; infinite otherwise.
    pub fn distance(&self, other: &BoundaryState) -> f64 {
        if self.side != other.side {
            return f64::INFINITY;
        }
        (self.s - other.s).abs().max((self.psi - other.psi).abs())
    }
}

impl fmt::Display for BoundaryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(side {}, s {:.16e}, psi {:.16e})", self.label(), self.s, self.psi)
    }
}

/// First boundary hit of a geodesic shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hit {
    Side { side: usize, s: f64, flight: f64, velocity: Tangent },
    Vertex { vertex: usize, flight: f64, miss: f64 },
}

/// Shoots the geodesic `start` into the table. Sides in `origin` contain the
/// starting point and are skipped (on the sphere they may be hit again after
/// a positive flight).
pub fn shoot(poly: &Polygon, start: &Tangent, origin: &[usize]) -> Result<Hit, CollisionError> {
    let k = poly.curvature();
    let g = Geodesic::new(*start);
    let mut best: Option<(f64, usize, f64)> = None;
    for (j, side) in poly.sides().iter().enumerate() {
        let t_min = if origin.contains(&j) {
            if k != Curvature::Spherical {
                continue;
            }
            MIN_RETURN
        } else {
            1e-12
        };
        if let Some((t, s)) = k.geodesic_side_intersection(&g, &side.geodesic, side.length, t_min) {
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, j, s));
            }
        }
    }
    let (t, j, s) = best.ok_or(CollisionError::NoIntersection)?;
    let side = poly.side(j);
    let velocity = k.geodesic_at(&g, t);
    if s < TOL_VERTEX || s > side.length - TOL_VERTEX {
        let vertex = if s < 0.5 * side.length { side.start } else { side.end };
        let miss = k.distance(&velocity.base, poly.vertex(vertex));
        return Ok(Hit::Vertex { vertex, flight: t, miss });
    }
    Ok(Hit::Side { side: j, s, flight: t, velocity })
}

/// Outcome of one application of the collision map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Collision {
    Bounce {
        next: BoundaryState,
        flight: f64,
    },
    /// Trajectory ends in a vertex (0-based index).
    VertexHit {
        vertex: usize,
        flight: f64,
    },
}

/// Outgoing angle after the mirror reflection of `velocity` at side `j`.
fn reflected_angle(poly: &Polygon, j: usize, s: f64, velocity: &Tangent) -> f64 {
    let k = poly.curvature();
    let t = poly.side_tangent(j, s);
    let n = k.quarter_turn(&t.base, &t.dir);
    (-k.form(&n, &velocity.dir)).atan2(k.form(&t.dir, &velocity.dir))
}

/// The billiard collision map `f`.
pub fn collision_step(b: &BoundaryState, poly: &Polygon) -> Result<Collision, CollisionError> {
    b.validate(poly)?;
    match shoot(poly, &b.tangent(poly), &[b.side])? {
        Hit::Vertex { vertex, flight, .. } => Ok(Collision::VertexHit { vertex, flight }),
        Hit::Side { side, s, flight, velocity } => {
            let psi = reflected_angle(poly, side, s, &velocity);
            if !(psi > TOL_GRAZING && psi < PI - TOL_GRAZING) {
                return Err(CollisionError::Grazing(psi));
            }
            Ok(Collision::Bounce { next: BoundaryState { side, s, psi }, flight })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Termination {
    VertexHit,
    Horizon,
    Periodic,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::VertexHit => "vertex_hit",
            Termination::Horizon => "horizon",
            Termination::Periodic => "periodic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
    Bidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ItineraryOptions {
    /// Stop with [`Termination::Periodic`] once the state returns to the
    /// initial one within this distance.
    pub periodic_tol: Option<f64>,
}

/// Side labels hit by an orbit. `labels[i]` carries index `first_index + i`;
/// index 0 is the side of the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub labels: Vec<usize>,
    pub first_index: i64,
    /// How the forward end was reached.
    pub termination: Termination,
    /// How the backward end was reached (backward and bidirectional only).
    pub backward_termination: Option<Termination>,
    /// Forward states, starting with the initial one.
    pub states: Vec<BoundaryState>,
    pub flights: Vec<f64>,
}

impl Itinerary {
    pub fn last_index(&self) -> i64 {
        self.first_index + self.labels.len() as i64 - 1
    }

    /// Comma-separated labels followed by the termination tag.
    pub fn to_record(&self) -> String {
        let labels: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        format!("{}\n{}\n", labels.join(","), self.termination)
    }
}

struct Run {
    labels: Vec<usize>,
    states: Vec<BoundaryState>,
    flights: Vec<f64>,
    termination: Termination,
}

fn run_forward(
    b: &BoundaryState,
    poly: &Polygon,
    horizon: usize,
    opts: &ItineraryOptions,
    sign: i64,
) -> Result<Run, CollisionError> {
    let wrap = |index: usize, e: CollisionError| CollisionError::DegenerateAt {
        index: sign * index as i64,
        source: Box::new(e),
    };
    b.validate(poly).map_err(|e| wrap(0, e))?;
    let mut run =
        Run { labels: vec![b.label()], states: vec![*b], flights: Vec::new(), termination: Termination::Horizon };
    let mut cur = *b;
    while run.labels.len() < horizon {
        match collision_step(&cur, poly).map_err(|e| wrap(run.labels.len(), e))? {
            Collision::VertexHit { flight, .. } => {
                run.flights.push(flight);
                run.termination = Termination::VertexHit;
                return Ok(run);
            }
            Collision::Bounce { next, flight } => {
                run.labels.push(next.label());
                run.states.push(next);
                run.flights.push(flight);
                cur = next;
                if opts.periodic_tol.is_some_and(|tol| next.distance(b) < tol) {
                    run.termination = Termination::Periodic;
                    return Ok(run);
                }
            }
        }
    }
    Ok(run)
}

pub fn itinerary(
    b: &BoundaryState,
    poly: &Polygon,
    horizon: usize,
    direction: Direction,
) -> Result<Itinerary, CollisionError> {
    itinerary_with(b, poly, horizon, direction, &ItineraryOptions::default())
}

/// Itinerary of `b`. The horizon counts labels per time direction including
/// index 0; backward labels come from the forward orbit of the reversed state.
pub fn itinerary_with(
    b: &BoundaryState,
    poly: &Polygon,
    horizon: usize,
    direction: Direction,
    opts: &ItineraryOptions,
) -> Result<Itinerary, CollisionError> {
    if horizon == 0 {
        return Err(CollisionError::ZeroHorizon);
    }
    let fwd = match direction {
        Direction::Backward => None,
        _ => Some(run_forward(b, poly, horizon, opts, 1)?),
    };
    let bwd = match direction {
        Direction::Forward => None,
        _ => Some(run_forward(&b.reversed(), poly, horizon, opts, -1)?),
    };
    let mut labels = Vec::new();
    let mut first_index = 0;
    let mut backward_termination = None;
    if let Some(r) = &bwd {
        labels.extend(r.labels.iter().skip(1).rev());
        first_index = -(r.labels.len() as i64 - 1);
        backward_termination = Some(r.termination);
    }
    labels.push(b.label());
    let (termination, states, flights) = match fwd {
        Some(r) => {
            labels.extend(&r.labels[1..]);
            (r.termination, r.states, r.flights)
        }
        None => (backward_termination.unwrap(), vec![*b], Vec::new()),
    };
    Ok(Itinerary { labels, first_index, termination, backward_termination, states, flights })
}

/// A billiard trajectory joining two vertices (0-based), with the sides it
/// bounces off (0-based) in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal {
    pub start: usize,
    pub end: usize,
    pub bounces: Vec<usize>,
    pub length: f64,
    /// Shooting angle at `start`, counterclockwise from the outgoing side.
    pub angle: f64,
    /// Distance from the simulated endpoint to `end`.
    pub residual: f64,
}

impl Diagonal {
    fn key(&self) -> (usize, usize, Vec<usize>) {
        let fwd = (self.start, self.end, self.bounces.clone());
        let mut rb = self.bounces.clone();
        rb.reverse();
        let bwd = (self.end, self.start, rb);
        fwd.min(bwd)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ShotOutcome {
    Vertex { vertex: usize, length: f64, miss: f64 },
    Open,
}

/// Shoots from vertex `v` at angle `phi` and follows up to `max_bounces`
/// reflections or total length `max_length`.
fn shoot_from_vertex(
    poly: &Polygon,
    v: usize,
    phi: f64,
    max_bounces: usize,
    max_length: f64,
) -> (Vec<usize>, ShotOutcome) {
    let k = poly.curvature();
    let t0 = k.rotate(&poly.side_tangent(v, 0.0), phi);
    let origin = [v, poly.incoming_side(v)];
    let mut seq = Vec::new();
    let mut length = 0.0;
    let mut hit = shoot(poly, &t0, &origin);
    loop {
        match hit {
            Ok(Hit::Vertex { vertex, flight, miss }) => {
                length += flight;
                if length > max_length {
                    return (seq, ShotOutcome::Open);
                }
                return (seq, ShotOutcome::Vertex { vertex, length, miss });
            }
            Ok(Hit::Side { side, s, flight, velocity }) => {
                length += flight;
                seq.push(side);
                if length > max_length || seq.len() > max_bounces {
                    return (seq, ShotOutcome::Open);
                }
                let psi = reflected_angle(poly, side, s, &velocity);
                let next = BoundaryState { side, s, psi };
                if next.validate(poly).is_err() {
                    return (seq, ShotOutcome::Open);
                }
                hit = shoot(poly, &next.tangent(poly), &[side]);
            }
            Err(_) => return (seq, ShotOutcome::Open),
        }
    }
}

fn first_difference(a: &[usize], b: &[usize]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y)
}

/// Number of initial shooting angles per vertex.
pub const DIAGONAL_RESOLUTION: usize = 10_000;

/// Searches generalized diagonals with at most `max_bounces` reflections and
/// length at most `max_length`. Angles where the bounce sequence changes are
/// refined by bisection; the ray at the switch runs into a vertex.
pub fn generalized_diagonals(
    poly: &Polygon,
    max_bounces: usize,
    max_length: f64,
) -> Result<Vec<Diagonal>, CollisionError> {
    generalized_diagonals_with(poly, max_bounces, max_length, DIAGONAL_RESOLUTION)
}

pub fn generalized_diagonals_with(
    poly: &Polygon,
    max_bounces: usize,
    max_length: f64,
    resolution: usize,
) -> Result<Vec<Diagonal>, CollisionError> {
    if max_length.is_nan() || max_length <= 0.0 || resolution == 0 {
        return Err(CollisionError::BadBounds);
    }
    let n = poly.num_vertices();
    let found: Vec<Diagonal> = (0..n)
        .into_par_iter()
        .flat_map_iter(|v| {
            let theta = poly.angles()[v];
            let phis: Vec<f64> = (0..resolution).map(|j| theta * (j as f64 + 0.5) / resolution as f64).collect();
            let shots: Vec<(Vec<usize>, ShotOutcome)> =
                phis.iter().map(|&phi| shoot_from_vertex(poly, v, phi, max_bounces, max_length)).collect();
            let mut out = Vec::new();
            let mut record = |phi: f64, seq: Vec<usize>, o: ShotOutcome| {
                if let ShotOutcome::Vertex { vertex, length, miss } = o {
                    if miss < TOL_VERTEX && seq.len() <= max_bounces {
                        out.push(Diagonal { start: v, end: vertex, bounces: seq, length, angle: phi, residual: miss });
                    }
                }
            };
            for j in 0..resolution {
                let (seq, o) = &shots[j];
                record(phis[j], seq.clone(), o.clone());
                if j + 1 == resolution {
                    break;
                }
                let (seq2, _) = &shots[j + 1];
                let Some(m) = first_difference(seq, seq2).or_else(|| {
                    // one sequence is a strict prefix: the shorter one stopped early
                    (seq.len() != seq2.len()).then(|| seq.len().min(seq2.len()))
                }) else {
                    continue;
                };
                let prefix = |s: &[usize]| s.iter().take(m + 1).copied().collect::<Vec<_>>();
                let target = prefix(seq);
                let (mut lo, mut hi) = (phis[j], phis[j + 1]);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let (sm, om) = shoot_from_vertex(poly, v, mid, max_bounces, max_length);
                    if matches!(om, ShotOutcome::Vertex { .. }) && sm.len() <= m {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if prefix(&sm) == target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                for phi in [lo, hi] {
                    let (s, o) = shoot_from_vertex(poly, v, phi, max_bounces, max_length);
                    record(phi, s, o);
                }
            }
            out
        })
        .collect();
    let mut unique: BTreeMap<(usize, usize, Vec<usize>), Diagonal> = BTreeMap::new();
    for d in found {
        let key = d.key();
        match unique.get(&key) {
            Some(old) if old.residual <= d.residual => {}
            _ => {
                unique.insert(key, d);
            }
        }
    }
    Ok(unique.into_values().collect())
}

/// Re-simulates a diagonal and returns the distance from its endpoint to the
/// target vertex, or `None` when the bounce sequence is not reproduced.
pub fn verify_diagonal(poly: &Polygon, d: &Diagonal) -> Option<f64> {
    let (seq, o) = shoot_from_vertex(poly, d.start, d.angle, d.bounces.len(), f64::INFINITY);
    match o {
        ShotOutcome::Vertex { vertex, miss, .. } if vertex == d.end && seq == d.bounces => Some(miss),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePair {
    pub vertices: (usize, usize),
    pub diagonal: Diagonal,
    pub m: u32,
}

/// Diagonals whose length is a positive multiple of `π` (spherical tables).
pub fn conjugated_vertices(
    poly: &Polygon,
    max_bounces: usize,
    max_length: f64,
) -> Result<Vec<ConjugatePair>, CollisionError> {
    conjugated_vertices_with(poly, max_bounces, max_length, DIAGONAL_RESOLUTION)
}

pub fn conjugated_vertices_with(
    poly: &Polygon,
    max_bounces: usize,
    max_length: f64,
    resolution: usize,
) -> Result<Vec<ConjugatePair>, CollisionError> {
    if poly.curvature() != Curvature::Spherical {
        return Err(CollisionError::NotSpherical(poly.curvature().as_int()));
    }
    let diagonals = generalized_diagonals_with(poly, max_bounces, max_length, resolution)?;
    Ok(diagonals
        .into_iter()
        .filter_map(|d| {
            let m = (d.length / PI).round();
            (m >= 1.0 && (d.length - m * PI).abs() < TOL_CONJUGATE).then_some(ConjugatePair {
                vertices: (d.start, d.end),
                diagonal: d,
                m: m as u32,
            })
        })
        .collect())
}
