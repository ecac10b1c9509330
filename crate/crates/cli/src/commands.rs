//! One function per subcommand. Each returns a report; files go to the
//! output directory.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use billiard_core::collision::{
    conjugated_vertices_with, generalized_diagonals_with, itinerary_with, BoundaryState, Diagonal, Direction,
    ItineraryOptions,
};
use billiard_core::expansivity::{classify, divergence_survey, verify_witness, Budget, Witness};
use billiard_core::flow::{format_cartesian_records, format_polar_records, ChartState, VertexChart};
use billiard_core::geometry::{Curvature, Vec3};
use billiard_core::polygon::Polygon;
use billiard_core::svg::{unfolded_svg, Projection};
use billiard_core::topology::{double_surface_invariants, growth_class, pi1_presentation};
use billiard_core::unfolding::{
    find_periodic, geodesic_fit_residual, holonomy, straight_crossings, unfold as unfold_chain, Holonomy,
};

use crate::report::{labels, num, Report};
use crate::{run_error, CliError, DirectionArg, StartArgs, TableArg};

fn header(r: &mut Report, poly: &Polygon, table: &TableArg) {
    let name = match table.table.as_str() {
        "sphere-triangle" => format!("sphere-triangle (theta {})", table.theta),
        t => t.to_string(),
    };
    r.line(format!("table: {name}, curvature {}, {} vertices", poly.curvature().as_int(), poly.num_vertices()));
    r.field("table", name).field("curvature", poly.curvature().as_int()).field("vertices", poly.num_vertices());
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| run_error(&format!("cannot create {}", dir.display()), e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| run_error(&format!("cannot write {}", path.display()), e))?;
    Ok(path)
}

fn start_state(poly: &Polygon, start: &StartArgs) -> Result<BoundaryState, CliError> {
    let (Some(side), Some(s), Some(psi)) = (start.side, start.s, start.psi) else {
        return Err(CliError::Input("an initial collision needs --side, --s and --psi".into()));
    };
    if side == 0 || side > poly.num_vertices() {
        return Err(CliError::Input(format!("--side {side}: labels run from 1 to {}", poly.num_vertices())));
    }
    let b = BoundaryState::from_label(side, s, psi);
    b.validate(poly).map_err(|e| CliError::Input(format!("initial collision: {e}")))?;
    Ok(b)
}

fn state_json(b: &BoundaryState) -> Value {
    json!({ "side": b.label(), "s": b.s, "psi": b.psi })
}

pub fn simulate(
    poly: &Polygon,
    table: &TableArg,
    start: &StartArgs,
    bounces: usize,
    direction: DirectionArg,
    periodic_tol: Option<f64>,
    out: &Path,
) -> Result<Report, CliError> {
    let b = start_state(poly, start)?;
    let dir = match direction {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Backward => Direction::Backward,
        DirectionArg::Both => Direction::Bidirectional,
    };
    let it = itinerary_with(&b, poly, bounces, dir, &ItineraryOptions { periodic_tol })
        .map_err(|e| run_error("simulate", e))?;
    let mut records = String::new();
    let mut t = 0.0;
    for (i, st) in it.states.iter().enumerate() {
        let p = st.tangent(poly).base.0;
        let _ = writeln!(records, "{t:.16e} {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
        if let Some(f) = it.flights.get(i) {
            t += f;
        }
    }
    let itin_path = write_file(out, "itinerary.txt", &it.to_record())?;
    let traj_path = write_file(out, "trajectory.txt", &records)?;

    let mut r = Report::new("simulate");
    header(&mut r, poly, table);
    r.line(format!("start: {b}"))
        .line(format!("itinerary: {}", labels(&it.labels)))
        .line(format!("first index: {}", it.first_index))
        .line(format!("termination: {}", it.termination));
    if let Some(bt) = it.backward_termination {
        r.line(format!("backward termination: {bt}"));
    }
    r.line(format!("wrote {}", itin_path.display())).line(format!("wrote {}", traj_path.display()));
    r.field("start", state_json(&b))
        .field("labels", it.labels.clone())
        .field("first_index", it.first_index)
        .field("termination", it.termination.to_string())
        .field("backward_termination", it.backward_termination.map(|t| t.to_string()))
        .field("files", vec![itin_path.display().to_string(), traj_path.display().to_string()]);
    Ok(r)
}

pub fn simulate_chart(
    poly: &Polygon,
    table: &TableArg,
    vertex: usize,
    (rr, gamma, beta): (f64, f64, f64),
    duration: f64,
    out: &Path,
) -> Result<Report, CliError> {
    if vertex == 0 || vertex > poly.num_vertices() {
        return Err(CliError::Input(format!("--vertex {vertex}: labels run from 1 to {}", poly.num_vertices())));
    }
    let chart = VertexChart::for_vertex(poly, vertex - 1).map_err(|e| run_error("vertex chart", e))?;
    let s0 = ChartState::new(rr, gamma, beta);
    let c0 = chart.forward(&s0).map_err(|e| CliError::Input(format!("initial chart state: {e}")))?;
    let traj = chart.integrate(&c0, duration).map_err(|e| run_error("integration", e))?;
    let polar: Vec<(f64, ChartState)> =
        traj.samples.iter().filter_map(|s| chart.inverse(&s.state).ok().map(|p| (s.tau, p))).collect();
    let cart_path = write_file(out, "chart_trajectory.txt", &format_cartesian_records(&traj.samples))?;
    let polar_path = write_file(out, "chart_polar.txt", &format_polar_records(&polar))?;
    let last = traj.last();

    let mut r = Report::new("simulate");
    header(&mut r, poly, table);
    r.line(format!("chart: vertex {vertex}, angle {}, radius {}", num(chart.theta), num(chart.radius)))
        .line(format!("samples: {}", traj.samples.len()))
        .line(format!(
            "final: tau {}, geodesic time {}, (x, y, z) = ({}, {}, {})",
            num(last.tau),
            num(last.geodesic_time),
            num(last.state.x),
            num(last.state.y),
            num(last.state.z)
        ))
        .line(match traj.exit {
            Some(t) => format!("left the chart at tau {}", num(t)),
            None => "stayed in the chart".to_string(),
        })
        .line(format!("wrote {}", cart_path.display()))
        .line(format!("wrote {}", polar_path.display()));
    r.field("vertex", vertex)
        .field("samples", traj.samples.len())
        .field("final", json!({ "tau": last.tau, "geodesic_time": last.geodesic_time, "x": last.state.x, "y": last.state.y, "z": last.state.z }))
        .field("exit", traj.exit)
        .field("files", vec![cart_path.display().to_string(), polar_path.display().to_string()]);
    Ok(r)
}

fn holonomy_text(h: &Holonomy) -> String {
    match h {
        Holonomy::Identity => "identity".into(),
        Holonomy::Translation { distance } => format!("translation by {}", num(*distance)),
        Holonomy::Rotation { angle, .. } => format!("rotation by {}", num(*angle)),
        Holonomy::Parabolic => "parabolic".into(),
        Holonomy::ReflectionType => "orientation reversing".into(),
    }
}

fn holonomy_json(h: &Holonomy) -> Value {
    match h {
        Holonomy::Identity => json!({ "type": "identity" }),
        Holonomy::Translation { distance } => json!({ "type": "translation", "distance": distance }),
        Holonomy::Rotation { angle, axis } => {
            json!({ "type": "rotation", "angle": angle, "axis": [axis.x, axis.y, axis.z] })
        }
        Holonomy::Parabolic => json!({ "type": "parabolic" }),
        Holonomy::ReflectionType => json!({ "type": "reflection" }),
    }
}

pub fn unfold(
    poly: &Polygon,
    table: &TableArg,
    start: &StartArgs,
    bounces: usize,
    view: Option<&[f64]>,
    out: &Path,
) -> Result<Report, CliError> {
    let b = start_state(poly, start)?;
    let projection = match (poly.curvature(), view) {
        (Curvature::Spherical, Some(v)) => {
            let v = Vec3::new(v[0], v[1], v[2]);
            if v.norm() == 0.0 {
                return Err(CliError::Input("--view must be a nonzero vector".into()));
            }
            Projection::Orthographic { view: v.normalize() }
        }
        (k, _) => Projection::for_curvature(k),
    };
    let svg = unfolded_svg(&b, poly, bounces, projection).map_err(|e| run_error("unfold", e))?;
    let path = write_file(out, "unfold.svg", &svg)?;
    let u = unfold_chain(&b, poly, bounces).map_err(|e| run_error("unfold", e))?;
    let crossed = u.chain.crossed_sides();
    let (straight, _) = straight_crossings(&b, poly, crossed.len()).map_err(|e| run_error("unfold", e))?;
    let joint = u.joint_residuals.iter().cloned().fold(0.0, f64::max);
    let fit = (poly.curvature() != Curvature::Hyperbolic).then(|| geodesic_fit_residual(poly.curvature(), &u.points));
    let h = holonomy(&u.chain, poly);

    let mut r = Report::new("unfold");
    header(&mut r, poly, table);
    r.line(format!("start: {b}"))
        .line(format!("itinerary: {}", labels(&u.labels)))
        .line(format!("truncated at a vertex: {}", u.truncated))
        .line(format!("straight crossings agree: {}", straight == crossed))
        .line(format!("max joint residual: {:.3e}", joint));
    if let Some(f) = fit {
        r.line(format!("geodesic fit residual: {f:.3e}"));
    }
    r.line(format!("holonomy: {}", holonomy_text(&h))).line(format!("wrote {}", path.display()));
    r.field("start", state_json(&b))
        .field("labels", u.labels.clone())
        .field("truncated", u.truncated)
        .field("crossings_agree", straight == crossed)
        .field("joint_residual", joint)
        .field("fit_residual", fit)
        .field("holonomy", holonomy_json(&h))
        .field("files", vec![path.display().to_string()]);
    Ok(r)
}

fn side_labels(sides: &[usize]) -> Vec<usize> {
    sides.iter().map(|s| s + 1).collect()
}

pub fn periodic(
    poly: &Polygon,
    table: &TableArg,
    samples: usize,
    bounces: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let found = find_periodic(poly, bounces, samples, seed).map_err(|e| run_error("periodic", e))?;
    let budget = format!("budget: {samples} samples, {bounces} bounces, seed {seed}");
    let mut r = Report::new("periodic");
    header(&mut r, poly, table);
    if found.is_empty() {
        r.line(format!("periodic orbits: none found ({budget})"));
    } else {
        r.line(format!("periodic orbits: {} found ({budget})", found.len()));
    }
    let mut orbits = Vec::new();
    for o in &found {
        r.line(format!(
            "  period {}: sides {} | start {} | length {} | holonomy {} | residual {:.3e}",
            o.period(),
            labels(&side_labels(&o.bounces)),
            o.start,
            num(o.period_length),
            holonomy_text(&o.holonomy),
            o.residual
        ));
        orbits.push(json!({
            "period": o.period(),
            "sides": side_labels(&o.bounces),
            "start": state_json(&o.start),
            "length": o.period_length,
            "holonomy": holonomy_json(&o.holonomy),
            "residual": o.residual,
        }));
    }
    r.field("budget", json!({ "samples": samples, "bounces": bounces, "seed": seed })).field("orbits", orbits);
    Ok(r)
}

fn diagonal_text(d: &Diagonal) -> String {
    format!(
        "V{} -> V{} | bounces [{}] | length {} | angle {} | residual {:.3e}",
        d.start + 1,
        d.end + 1,
        labels(&side_labels(&d.bounces)),
        num(d.length),
        num(d.angle),
        d.residual
    )
}

fn diagonal_json(d: &Diagonal) -> Value {
    json!({
        "start": d.start + 1,
        "end": d.end + 1,
        "bounces": side_labels(&d.bounces),
        "length": d.length,
        "angle": d.angle,
        "residual": d.residual,
    })
}

pub fn diagonals(
    poly: &Polygon,
    table: &TableArg,
    depth: usize,
    length: Option<f64>,
    resolution: usize,
    conjugate: bool,
) -> Result<Report, CliError> {
    let max_length = length.unwrap_or(4.0 * PI);
    let budget = format!("budget: {depth} bounces, length {}, resolution {resolution}", num(max_length));
    let mut r = Report::new(if conjugate { "conjugate" } else { "diagonals" });
    header(&mut r, poly, table);
    r.field("budget", json!({ "depth": depth, "length": max_length, "resolution": resolution }));
    if conjugate {
        let pairs =
            conjugated_vertices_with(poly, depth, max_length, resolution).map_err(|e| run_error("conjugate", e))?;
        if pairs.is_empty() {
            r.line(format!("conjugated vertices: none found ({budget})"));
        } else {
            r.line(format!("conjugated vertices: {} diagonals ({budget})", pairs.len()));
        }
        let mut items = Vec::new();
        for p in &pairs {
            r.line(format!(
                "  V{}-V{}, m = {}: {}",
                p.vertices.0 + 1,
                p.vertices.1 + 1,
                p.m,
                diagonal_text(&p.diagonal)
            ));
            let mut v = diagonal_json(&p.diagonal);
            v["m"] = p.m.into();
            items.push(v);
        }
        r.field("conjugated", items);
    } else {
        let ds =
            generalized_diagonals_with(poly, depth, max_length, resolution).map_err(|e| run_error("diagonals", e))?;
        r.line(format!("generalized diagonals: {} ({budget})", ds.len()));
        for d in &ds {
            r.line(format!("  {}", diagonal_text(d)));
        }
        r.field("diagonals", ds.iter().map(diagonal_json).collect::<Vec<_>>());
    }
    Ok(r)
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Periodic(o) => format!(
            "periodic orbit: period {}, sides {}, start {}, length {}, residual {:.3e}",
            o.period(),
            labels(&side_labels(&o.bounces)),
            o.start,
            num(o.period_length),
            o.residual
        ),
        Witness::SameItinerary(p) => {
            format!("same itinerary over {} bounces each way: {} and {}", p.horizon, p.a, p.b)
        }
        Witness::Conjugated(c) => format!(
            "conjugated vertices V{}-V{}: length {} = {} pi",
            c.vertices.0 + 1,
            c.vertices.1 + 1,
            num(c.diagonal.length),
            c.m
        ),
    }
}

fn witness_json(w: &Witness, verified: bool) -> Value {
    match w {
        Witness::Periodic(o) => json!({
            "kind": "periodic",
            "sides": side_labels(&o.bounces),
            "start": state_json(&o.start),
            "length": o.period_length,
            "residual": o.residual,
            "verified": verified,
        }),
        Witness::SameItinerary(p) => json!({
            "kind": "same_itinerary",
            "a": state_json(&p.a),
            "b": state_json(&p.b),
            "horizon": p.horizon,
            "verified": verified,
        }),
        Witness::Conjugated(c) => json!({
            "kind": "conjugated",
            "diagonal": diagonal_json(&c.diagonal),
            "m": c.m,
            "verified": verified,
        }),
    }
}

pub fn expansivity(
    poly: &Polygon,
    table: &TableArg,
    budget: &Budget,
    survey: usize,
    survey_horizon: usize,
) -> Result<Report, CliError> {
    let v = classify(poly, budget).map_err(|e| run_error("expansivity", e))?;
    let mut tags: Vec<&str> = Vec::new();
    for t in v.reasons.iter().map(|r| r.short_tag()) {
        if !tags.contains(&t) {
            tags.push(t);
        }
    }
    let mut r = Report::new("expansivity");
    header(&mut r, poly, table);
    r.line(format!("verdict: {} ({})", v.verdict, tags.join(", ")));
    for reason in &v.reasons {
        r.line(format!("reason: {}", reason.tag()));
    }
    let mut witnesses = Vec::new();
    for w in &v.witnesses {
        let ok = verify_witness(w, poly);
        r.line(format!("witness: {} [{}]", witness_text(w), if ok { "verified" } else { "not verified" }));
        witnesses.push(witness_json(w, ok));
    }
    r.field("verdict", v.verdict.to_string())
        .field("tags", tags.clone())
        .field("reasons", v.reasons.iter().map(|x| x.tag()).collect::<Vec<_>>())
        .field("witnesses", witnesses)
        .field(
            "budget",
            json!({
                "horizon": budget.horizon,
                "samples": budget.samples,
                "periodic_bounces": budget.periodic_bounces,
                "diagonal_depth": budget.diagonal_depth,
                "diagonal_length": budget.diagonal_length,
                "pair_offset": budget.pair_offset,
                "pair_directions": budget.pair_directions,
                "seed": budget.seed,
            }),
        );
    if survey > 0 {
        let s = divergence_survey(poly, survey, survey_horizon, budget.seed);
        r.line(format!(
            "survey: {} pairs over {} bounces, {} diverged (latest at index {}), {} undecided, {} rejected",
            s.pairs,
            survey_horizon,
            s.diverged,
            s.max_index,
            s.undecided.len(),
            s.rejected
        ));
        r.field(
            "survey",
            json!({
                "pairs": s.pairs,
                "horizon": survey_horizon,
                "diverged": s.diverged,
                "max_index": s.max_index,
                "undecided": s.undecided.len(),
                "rejected": s.rejected,
            }),
        );
    }
    Ok(r)
}

pub fn topology(poly: &Polygon, table: &TableArg) -> Result<Report, CliError> {
    let inv = double_surface_invariants(poly);
    let p = pi1_presentation(poly).map_err(|e| run_error("topology", e))?;
    let growth = growth_class(&p);
    let group = match p.phase_space() {
        Some(m) => format!("{}; phase space: {m}", p.classification),
        None => p.classification.to_string(),
    };
    let mut r = Report::new("topology");
    header(&mut r, poly, table);
    r.line(format!(
        "double surface: genus {}, Euler characteristic {}, {} boundary components",
        inv.genus,
        inv.euler,
        poly.boundary_components()
    ))
    .line(format!("fundamental group: {p}"))
    .line(format!("fiber exponent: {} (Euler characteristic minus vertex count)", p.exponent))
    .line(format!("group: {group}"))
    .line(format!("growth: {growth}"));
    r.field("genus", inv.genus)
        .field("euler", inv.euler)
        .field("boundary_components", poly.boundary_components())
        .field("presentation", p.to_string())
        .field("generators", p.generators.clone())
        .field("relations", p.relations.clone())
        .field("exponent", p.exponent)
        .field("group", p.classification.to_string())
        .field("phase_space", p.phase_space())
        .field("growth", growth.to_string());
    Ok(r)
}
