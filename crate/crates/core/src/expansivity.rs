//! Finite-horizon evidence about expansiveness of the billiard flow.
//!
//! Expansiveness cannot be decided by a finite computation. What can be
//! produced are witnesses that rule it out (a periodic orbit, two distinct
//! orbits with the same itinerary, conjugated vertices) and, for tables in
//! the hyperbolic plane, the unconditional theorem. Anything else is
//! reported as unknown.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::collision::{
    collision_step, conjugated_vertices_with, itinerary, BoundaryState, Collision, CollisionError, ConjugatePair,
    Direction, Itinerary, Termination, DIAGONAL_RESOLUTION,
};
use crate::geometry::Curvature;
use crate::polygon::Polygon;
use crate::unfolding::{find_periodic, periodic_residual, PeriodicOrbitReport, UnfoldingError};

/// States this close to each other's orbit count as the same orbit.
pub const SAME_ORBIT_TOL: f64 = 1e-6;
/// Number of collisions, each way, searched by the same-orbit test.
pub const SAME_ORBIT_WINDOW: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpansivityError {
    #[error("the two states lie on the same orbit")]
    SameOrbit,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("neighborhood check needs a flat table (k = {0})")]
    NotFlat(i32),
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOutcome {
    /// First index (smallest in absolute value, negative for the past) where
    /// the labels differ.
    Diverge {
        index: i64,
    },
    Agree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairProbe {
    pub a: BoundaryState,
    pub b: BoundaryState,
    pub horizon: usize,
    pub outcome: PairOutcome,
    /// A vertex hit cut one of the itineraries short; the comparison covers
    /// only the common range.
    pub truncated: bool,
}

/// Forward states of `b` over `n` collisions, then backward ones.
fn orbit_window(b: &BoundaryState, poly: &Polygon, n: usize) -> Vec<BoundaryState> {
    let mut out = vec![*b];
    for reversed in [false, true] {
        let mut cur = if reversed { b.reversed() } else { *b };
        for _ in 0..n {
            match collision_step(&cur, poly) {
                Ok(Collision::Bounce { next, .. }) => {
                    out.push(if reversed { next.reversed() } else { next });
                    cur = next;
                }
                _ => break,
            }
        }
    }
    out
}

/// True when `b` is within [`SAME_ORBIT_TOL`] of the orbit segment of `a` or
/// the other way round.
pub fn same_orbit(a: &BoundaryState, b: &BoundaryState, poly: &Polygon) -> bool {
    orbit_window(a, poly, SAME_ORBIT_WINDOW).iter().any(|x| x.distance(b) < SAME_ORBIT_TOL)
        || orbit_window(b, poly, SAME_ORBIT_WINDOW).iter().any(|x| x.distance(a) < SAME_ORBIT_TOL)
}

fn label_at(it: &Itinerary, index: i64) -> Option<usize> {
    let i = index - it.first_index;
    (i >= 0).then(|| it.labels.get(i as usize).copied()).flatten()
}

/// Compares the itineraries of `a` and `b` in both time directions.
pub fn probe_pair(
    a: &BoundaryState,
    b: &BoundaryState,
    poly: &Polygon,
    horizon: usize,
) -> Result<PairProbe, ExpansivityError> {
    if horizon == 0 {
        return Err(ExpansivityError::ZeroHorizon);
    }
    if same_orbit(a, b, poly) {
        return Err(ExpansivityError::SameOrbit);
    }
    let ia = itinerary(a, poly, horizon, Direction::Bidirectional)?;
    let ib = itinerary(b, poly, horizon, Direction::Bidirectional)?;
    let lo = ia.first_index.max(ib.first_index);
    let hi = ia.last_index().min(ib.last_index());
    let mut outcome = PairOutcome::Agree;
    for m in 0..=hi.max(-lo) {
        let diff = |i: i64| (lo..=hi).contains(&i) && label_at(&ia, i) != label_at(&ib, i);
        if diff(-m) {
            outcome = PairOutcome::Diverge { index: -m };
            break;
        }
        if diff(m) {
            outcome = PairOutcome::Diverge { index: m };
            break;
        }
    }
    let full = |it: &Itinerary| {
        it.termination == Termination::Horizon && it.backward_termination == Some(Termination::Horizon)
    };
    let truncated = outcome == PairOutcome::Agree && !(full(&ia) && full(&ib));
    Ok(PairProbe { a: *a, b: *b, horizon, outcome, truncated })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Expansive,
    NotExpansive,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Expansive => "expansive",
            Verdict::NotExpansive => "not_expansive",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Result invoked by a verdict. The tags name the statement for negative,
/// zero and positive curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    /// Tables in the hyperbolic plane have an expansive flow.
    HyperbolicExpansive,
    /// Flat tables: expansive iff there is no periodic orbit.
    FlatPeriodic,
    /// Spherical tables: a periodic orbit rules out expansiveness.
    SphericalPeriodic,
    /// Spherical tables: expansive implies injective itinerary map.
    SphericalSameItinerary,
    /// Conjugated vertices rule out expansiveness.
    ConjugatedVertices,
    /// No certificate either way within the budget.
    NoCertificate,
}

impl Reason {
    pub fn tag(self) -> &'static str {
        match self {
            Reason::HyperbolicExpansive => "teoH item 2",
            Reason::FlatPeriodic => "teoF 2<->3",
            Reason::SphericalPeriodic => "teoS item 1",
            Reason::SphericalSameItinerary => "teoS item 3 (contrapositive)",
            Reason::ConjugatedVertices => "conjugated vertices",
            Reason::NoCertificate => "no certificate within budget",
        }
    }

    pub fn short_tag(self) -> &'static str {
        match self {
            Reason::HyperbolicExpansive => "teoH",
            Reason::FlatPeriodic => "teoF",
            Reason::SphericalPeriodic | Reason::SphericalSameItinerary => "teoS",
            Reason::ConjugatedVertices => "conjugated",
            Reason::NoCertificate => "none",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Witness {
    Periodic(PeriodicOrbitReport),
    SameItinerary(PairProbe),
    Conjugated(ConjugatePair),
}

#[derive(Debug, Clone)]
pub struct ExpansivenessVerdict {
    pub verdict: Verdict,
    pub reasons: Vec<Reason>,
    pub witnesses: Vec<Witness>,
}

/// Search budget for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub horizon: usize,
    pub samples: usize,
    pub periodic_bounces: usize,
    pub diagonal_depth: usize,
    pub diagonal_length: f64,
    pub diagonal_resolution: usize,
    /// Direction offset of the same-itinerary candidates.
    pub pair_offset: f64,
    /// Directions tried per side for same-itinerary candidates.
    pub pair_directions: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            horizon: 1000,
            samples: 10_000,
            periodic_bounces: 50,
            diagonal_depth: 20,
            diagonal_length: 4.0 * PI,
            diagonal_resolution: DIAGONAL_RESOLUTION,
            pair_offset: 1e-5,
            pair_directions: 8,
            seed: 0,
        }
    }
}

/// Searches pairs `(s, ψ)`, `(s, ψ + δ)` from side midpoints whose
/// itineraries agree over the whole horizon.
pub fn find_same_itinerary_pair(poly: &Polygon, budget: &Budget) -> Option<PairProbe> {
    let n = poly.num_vertices();
    let candidates: Vec<(BoundaryState, BoundaryState)> = (0..n)
        .flat_map(|side| {
            let s = 0.5 * poly.side(side).length;
            (0..budget.pair_directions).map(move |j| {
                let psi = PI * (j as f64 + 0.5) / budget.pair_directions as f64;
                (BoundaryState::new(side, s, psi), BoundaryState::new(side, s, psi + budget.pair_offset))
            })
        })
        .collect();
    candidates
        .par_iter()
        .map(|(a, b)| probe_pair(a, b, poly, budget.horizon).ok())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .find(|p| p.outcome == PairOutcome::Agree && !p.truncated)
}

/// Witness logic keyed to the sign of the curvature.
pub fn classify(poly: &Polygon, budget: &Budget) -> Result<ExpansivenessVerdict, ExpansivityError> {
    let mut witnesses = Vec::new();
    let mut reasons = Vec::new();
    match poly.curvature() {
        Curvature::Hyperbolic => {
            return Ok(ExpansivenessVerdict {
                verdict: Verdict::Expansive,
                reasons: vec![Reason::HyperbolicExpansive],
                witnesses,
            });
        }
        Curvature::Flat => {
            if let Some(r) =
                find_periodic(poly, budget.periodic_bounces, budget.samples, budget.seed)?.into_iter().next()
            {
                witnesses.push(Witness::Periodic(r));
                reasons.push(Reason::FlatPeriodic);
            }
        }
        Curvature::Spherical => {
            if let Some(r) =
                find_periodic(poly, budget.periodic_bounces, budget.samples, budget.seed)?.into_iter().next()
            {
                witnesses.push(Witness::Periodic(r));
                reasons.push(Reason::SphericalPeriodic);
            }
            if let Some(p) = find_same_itinerary_pair(poly, budget) {
                witnesses.push(Witness::SameItinerary(p));
                reasons.push(Reason::SphericalSameItinerary);
            }
            let conj = conjugated_vertices_with(
                poly,
                budget.diagonal_depth,
                budget.diagonal_length,
                budget.diagonal_resolution,
            )?;
            if let Some(c) = conj.into_iter().next() {
                witnesses.push(Witness::Conjugated(c));
                reasons.push(Reason::ConjugatedVertices);
            }
        }
    }
    let verdict = if witnesses.is_empty() {
        reasons.push(Reason::NoCertificate);
        Verdict::Unknown
    } else {
        Verdict::NotExpansive
    };
    Ok(ExpansivenessVerdict { verdict, reasons, witnesses })
}

/// Re-checks a witness independently of the search that produced it.
pub fn verify_witness(w: &Witness, poly: &Polygon) -> bool {
    match w {
        Witness::Periodic(r) => periodic_residual(r, poly).is_some_and(|res| res < crate::unfolding::VERIFY_TOL),
        Witness::SameItinerary(p) => {
            probe_pair(&p.a, &p.b, poly, p.horizon).is_ok_and(|q| q.outcome == PairOutcome::Agree && !q.truncated)
        }
        Witness::Conjugated(c) => {
            crate::collision::verify_diagonal(poly, &c.diagonal).is_some_and(|miss| miss < crate::collision::TOL_VERTEX)
                && (c.diagonal.length - c.m as f64 * PI).abs() < crate::collision::TOL_CONJUGATE
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisplacementOutcome {
    Periodic {
        residual: f64,
    },
    /// Same bounce count but the orbit does not close or changes sides.
    NotPeriodic {
        residual: f64,
    },
    /// The displaced start leaves the side.
    OffSide,
    VertexHit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodCheck {
    pub results: Vec<(f64, DisplacementOutcome)>,
}

impl NeighborhoodCheck {
    pub fn holds(&self) -> bool {
        self.results.iter().all(|(_, o)| matches!(o, DisplacementOutcome::Periodic { .. }))
    }
}

pub const NEIGHBORHOOD_DISPLACEMENTS: [f64; 5] = [-1e-3, -5e-4, 2.5e-4, 5e-4, 1e-3];

/// Moves the start of a flat periodic orbit along its side keeping the
/// direction, and checks that the displaced orbit closes with the same
/// bounce sequence.
pub fn periodic_orbit_neighborhood_check(
    report: &PeriodicOrbitReport,
    poly: &Polygon,
    displacements: &[f64],
) -> Result<NeighborhoodCheck, ExpansivityError> {
    if poly.curvature() != Curvature::Flat {
        return Err(ExpansivityError::NotFlat(poly.curvature().as_int()));
    }
    let len = poly.side(report.start.side).length;
    let results = displacements
        .iter()
        .map(|&d| {
            let b = BoundaryState { s: report.start.s + d, ..report.start };
            if !(b.s > 0.0 && b.s < len) {
                return (d, DisplacementOutcome::OffSide);
            }
            let mut cur = b;
            for &side in &report.bounces {
                match collision_step(&cur, poly) {
                    Ok(Collision::Bounce { next, .. }) if next.side == side => cur = next,
                    Ok(Collision::VertexHit { .. }) => return (d, DisplacementOutcome::VertexHit),
                    Err(_) => return (d, DisplacementOutcome::VertexHit),
                    Ok(Collision::Bounce { .. }) => {
                        return (d, DisplacementOutcome::NotPeriodic { residual: f64::INFINITY })
                    }
                }
            }
            let residual = cur.distance(&b);
            if residual < crate::unfolding::VERIFY_TOL {
                (d, DisplacementOutcome::Periodic { residual })
            } else {
                (d, DisplacementOutcome::NotPeriodic { residual })
            }
        })
        .collect();
    Ok(NeighborhoodCheck { results })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSurvey {
    pub pairs: usize,
    /// Sampled pairs rejected by [`probe_pair`] (same orbit or grazing).
    pub rejected: usize,
    pub diverged: usize,
    /// Largest `|index|` at which a pair diverged.
    pub max_index: i64,
    /// Pairs that agreed over the horizon or were cut short by a vertex.
    pub undecided: Vec<PairProbe>,
}

/// Seeded random pairs with log-uniform separation in `[1e-5, 1e-2]`,
/// compared over `horizon` collisions each way.
pub fn divergence_survey(poly: &Polygon, pairs: usize, horizon: usize, seed: u64) -> DivergenceSurvey {
    let n = poly.num_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(pairs);
    while inputs.len() < pairs {
        let side = rng.gen_range(0..n);
        let len = poly.side(side).length;
        let a = BoundaryState::new(side, rng.gen_range(0.05..0.95) * len, rng.gen_range(0.05..PI - 0.05));
        let eps = 10f64.powf(rng.gen_range(-5.0..-2.0));
        let t: f64 = rng.gen_range(0.0..2.0 * PI);
        let b = BoundaryState::new(side, a.s + eps * len * t.cos(), a.psi + eps * t.sin());
        inputs.push((a, b));
    }
    let probes: Vec<Option<PairProbe>> = inputs.par_iter().map(|(a, b)| probe_pair(a, b, poly, horizon).ok()).collect();
    let mut survey = DivergenceSurvey { pairs: 0, rejected: 0, diverged: 0, max_index: 0, undecided: Vec::new() };
    for p in probes {
        let Some(p) = p else {
            survey.rejected += 1;
            continue;
        };
        survey.pairs += 1;
        match p.outcome {
            PairOutcome::Diverge { index } => {
                survey.diverged += 1;
                survey.max_index = survey.max_index.max(index.abs());
            }
            PairOutcome::Agree => survey.undecided.push(p),
        }
    }
    survey
}
