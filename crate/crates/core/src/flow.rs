//! The billiard flow near a vertex.
//!
//! Polar coordinates `(r, γ, β)` around a vertex of interior angle `θ`:
//! `r` is the distance to the vertex, `γ ∈ R/2θZ` the angular position
//! measured from the outgoing side, `β ∈ R/2πZ` the direction measured
//! counterclockwise from the radial direction. The chart sends these to
//! `(x, y, z) = (R cos(γπ/θ), R sin(γπ/θ), β)` with `R = sin_k(r)`, and the
//! circle `r = 0` is glued in as `{(0, 0)} × S¹`. In these coordinates the
//! time-changed flow `ρ·X` becomes the smooth field
//!
//! ```text
//! Z(x, y, z) = (f x cos z − (π/θ) y sin z,  f y cos z + (π/θ) x sin z,  −f sin z),
//! f = (1 − k(x² + y²))^{1/2}
//! ```
//!
//! which has exactly two zeros on the added circle, `(0, 0, 0)` and `(0, 0, π)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use nalgebra::Complex;
use thiserror::Error;

use crate::geometry::{Curvature, Mat3};
use crate::ode::{Dopri5, Stop};
use crate::polygon::Polygon;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("vertex angle must be positive, got {0}")]
    BadAngle(f64),
    #[error("chart radius {0} is not admissible")]
    BadRadius(f64),
    #[error("velocity field is singular at r = 0, use the extended field")]
    Singular,
    #[error("state outside the chart domain (R = {0})")]
    OutsideDomain(f64),
    #[error("trajectory runs into the vertex at t = {time}")]
    VertexHit { time: f64 },
    #[error("trajectory leaves the chart at t = {time}")]
    ExitedChart { time: f64, state: ChartState },
    #[error("integration failed after {0} samples")]
    IntegrationFailed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartState {
    pub r: f64,
    pub gamma: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianChartState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Components of a vector field at one point, in the coordinates of the
/// state it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue(pub [f64; 3]);

impl ChartState {
    pub fn new(r: f64, gamma: f64, beta: f64) -> Self {
        ChartState { r, gamma, beta }
    }

    /// Reduces `γ` mod `2θ` and `β` mod `2π`.
    pub fn normalized(&self, theta: f64) -> Self {
        ChartState { r: self.r, gamma: self.gamma.rem_euclid(2.0 * theta), beta: self.beta.rem_euclid(TAU) }
    }
}

impl CartesianChartState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        CartesianChartState { x, y, z }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

fn check_angle(theta: f64) -> Result<(), FlowError> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(FlowError::BadAngle(theta))
    }
}

fn asin_k(k: Curvature, v: f64) -> f64 {
    match k {
        Curvature::Hyperbolic => v.asinh(),
        Curvature::Flat => v,
        Curvature::Spherical => v.asin(),
    }
}

pub fn chart_forward(s: &ChartState, theta: f64, k: Curvature) -> Result<CartesianChartState, FlowError> {
    check_angle(theta)?;
    if s.r < 0.0 || (k == Curvature::Spherical && s.r >= FRAC_PI_2) {
        return Err(FlowError::OutsideDomain(s.r));
    }
    let big_r = k.sin_k(s.r);
    let phi = s.gamma * PI / theta;
    Ok(CartesianChartState { x: big_r * phi.cos(), y: big_r * phi.sin(), z: s.beta.rem_euclid(TAU) })
}

/// Inverse chart; `γ` is returned in `[0, 2θ)` and `β` in `[0, 2π)`. On the
/// added circle `γ` is undefined and reported as 0.
pub fn chart_inverse(c: &CartesianChartState, theta: f64, k: Curvature) -> Result<ChartState, FlowError> {
    check_angle(theta)?;
    let big_r = c.radius();
    if k == Curvature::Spherical && big_r >= 1.0 {
        return Err(FlowError::OutsideDomain(big_r));
    }
    let gamma = if big_r == 0.0 { 0.0 } else { (c.y.atan2(c.x) * theta / PI).rem_euclid(2.0 * theta) };
    Ok(ChartState { r: asin_k(k, big_r), gamma, beta: c.z.rem_euclid(TAU) })
}

/// Unit-speed geodesic flow in polar coordinates.
pub fn velocity_field_x(s: &ChartState, k: Curvature) -> Result<FieldValue, FlowError> {
    if s.r <= 0.0 {
        return Err(FlowError::Singular);
    }
    let (sb, cb) = s.beta.sin_cos();
    let sr = k.sin_k(s.r);
    Ok(FieldValue([cb, sb / sr, -k.cos_k(s.r) * sb / sr]))
}

/// Exact solution of the geodesic flow in polar coordinates after time `t`.
///
/// With `A = sin_k(r_t) cos β_t` and `B = sin_k(r_t) sin β_t` the trigonometric
/// relations of each geometry are solved in the well-conditioned form
/// `A = cos_k(r₀) sin_k(t) + sin_k(r₀) cos_k(t) cos β₀`, `B = sin_k(r₀) sin β₀`
/// (flat: `A = r₀ cos β₀ + t`). `γ` is unwrapped, not reduced.
pub fn closed_form_flow(s0: &ChartState, t: f64, k: Curvature) -> Result<ChartState, FlowError> {
    if s0.r <= 0.0 {
        return Err(FlowError::Singular);
    }
    if k == Curvature::Spherical && t.abs() > FRAC_PI_2 {
        let chunks = (t.abs() / FRAC_PI_2).ceil();
        let dt = t / chunks;
        let mut s = *s0;
        for i in 0..chunks as usize {
            s = closed_form_step(&s, dt, k).map_err(|e| match e {
                FlowError::VertexHit { time } => FlowError::VertexHit { time: time + dt * i as f64 },
                other => other,
            })?;
        }
        return Ok(s);
    }
    closed_form_step(s0, t, k)
}

fn closed_form_step(s0: &ChartState, t: f64, k: Curvature) -> Result<ChartState, FlowError> {
    let (sb0, cb0) = s0.beta.sin_cos();
    let (sr0, cr0) = (k.sin_k(s0.r), k.cos_k(s0.r));
    let (st, ct) = (k.sin_k(t), k.cos_k(t));
    let a = match k {
        Curvature::Flat => s0.r * cb0 + t,
        _ => cr0 * st + sr0 * ct * cb0,
    };
    let b = sr0 * sb0;
    let h = a.hypot(b);
    if h < 1e-14 * (1.0 + s0.r) {
        // radial approach; the hit time is r₀ along the incoming ray
        return Err(FlowError::VertexHit { time: s0.r });
    }
    let r = match k {
        Curvature::Flat => h,
        Curvature::Hyperbolic => h.asinh(),
        Curvature::Spherical => h.atan2(cr0 * ct - sr0 * st * cb0),
    };
    let beta = b.atan2(a).rem_euclid(TAU);
    let dgamma = match k {
        // γ + β is conserved
        Curvature::Flat => {
            let b0 = s0.beta.rem_euclid(TAU);
            b0 - beta
        }
        Curvature::Hyperbolic => (sb0 * sr0 * st).atan2(cr0 * r.cosh() - ct),
        Curvature::Spherical => (sb0 * sr0 * st).atan2(ct - cr0 * r.cos()),
    };
    let beta = beta + (s0.beta - s0.beta.rem_euclid(TAU));
    Ok(ChartState { r, gamma: s0.gamma + dgamma, beta })
}

/// Time at which the exact flow from `s0` first reaches `r = radius`, if it
/// does within `t_max` (forward when `t_max > 0`).
pub fn exit_time(s0: &ChartState, t_max: f64, k: Curvature, radius: f64) -> Option<f64> {
    let r_at = |t: f64| closed_form_flow(s0, t, k).map(|s| s.r).unwrap_or(0.0);
    let n = ((t_max.abs() / (radius / 8.0)).ceil() as usize).max(8);
    let dt = t_max / n as f64;
    for i in 0..n {
        let (lo, hi) = (dt * i as f64, dt * (i + 1) as f64);
        if r_at(hi) >= radius {
            let (mut lo, mut hi) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if r_at(mid) >= radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if (hi - lo).abs() < 1e-15 * (1.0 + hi.abs()) {
                    break;
                }
            }
            return Some(hi);
        }
    }
    None
}

/// Exact flow restricted to the chart of the given radius.
pub fn closed_form_flow_in_chart(s0: &ChartState, t: f64, k: Curvature, radius: f64) -> Result<ChartState, FlowError> {
    if let Some(time) = exit_time(s0, t, k, radius) {
        let state = closed_form_flow(s0, time, k)?;
        return Err(FlowError::ExitedChart { time, state });
    }
    closed_form_flow(s0, t, k)
}

/// The extended field in Cartesian chart coordinates.
pub fn extended_field_z(c: &CartesianChartState, theta: f64, k: Curvature) -> Result<FieldValue, FlowError> {
    check_angle(theta)?;
    let rr = c.x * c.x + c.y * c.y;
    let arg = 1.0 - k.k() * rr;
    if arg <= 0.0 {
        return Err(FlowError::OutsideDomain(rr.sqrt()));
    }
    let f = arg.sqrt();
    let w = PI / theta;
    let (sz, cz) = c.z.sin_cos();
    Ok(FieldValue([f * c.x * cz - w * c.y * sz, f * c.y * cz + w * c.x * sz, -f * sz]))
}

/// Analytic derivative of the extended field.
pub fn jacobian_z(c: &CartesianChartState, theta: f64, k: Curvature) -> Result<Mat3, FlowError> {
    check_angle(theta)?;
    let (x, y) = (c.x, c.y);
    let arg = 1.0 - k.k() * (x * x + y * y);
    if arg <= 0.0 {
        return Err(FlowError::OutsideDomain((x * x + y * y).sqrt()));
    }
    let f = arg.sqrt();
    let (fx, fy) = (-k.k() * x / f, -k.k() * y / f);
    let w = PI / theta;
    let (sz, cz) = c.z.sin_cos();
    Ok(Mat3::new(
        f * cz + x * cz * fx,
        x * cz * fy - w * sz,
        -f * x * sz - w * y * cz,
        y * cz * fx + w * sz,
        f * cz + y * cz * fy,
        -f * y * sz + w * x * cz,
        -sz * fx,
        -sz * fy,
        -f * cz,
    ))
}

/// The two zeros of the extended field on the added circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPoint {
    /// `z = 0`: two-dimensional unstable manifold.
    Zero,
    /// `z = π`: two-dimensional stable manifold.
    Pi,
}

impl SingularPoint {
    pub fn z(self) -> f64 {
        match self {
            SingularPoint::Zero => 0.0,
            SingularPoint::Pi => PI,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SingularityAnalysis {
    pub jacobian: Mat3,
    /// Sorted by decreasing real part.
    pub eigenvalues: Vec<Complex<f64>>,
    pub unstable_dim: usize,
    pub stable_dim: usize,
}

pub fn singularity_jacobian(point: SingularPoint, theta: f64, k: Curvature) -> Result<SingularityAnalysis, FlowError> {
    let jacobian = jacobian_z(&CartesianChartState::new(0.0, 0.0, point.z()), theta, k)?;
    let mut eigenvalues: Vec<Complex<f64>> = jacobian.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re));
    let unstable_dim = eigenvalues.iter().filter(|e| e.re > 0.0).count();
    let stable_dim = eigenvalues.iter().filter(|e| e.re < 0.0).count();
    Ok(SingularityAnalysis { jacobian, eigenvalues, unstable_dim, stable_dim })
}

/// C∞ step: 1 on `(-∞, 0]`, 0 on `[1, ∞)`.
fn smooth_step_down(u: f64) -> f64 {
    let e = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let (a, b) = (e(1.0 - u), e(u));
    a / (a + b)
}

/// Time change near a vertex: `sin_k(r)` on `[0, ε/2]`, blended to the
/// constant 1 on `[ε/2, ε]`, equal to 1 beyond.
pub fn reparameterization_rho(r: f64, k: Curvature, radius: f64) -> f64 {
    let half = 0.5 * radius;
    if r <= half {
        return k.sin_k(r);
    }
    if r >= radius {
        return 1.0;
    }
    let w = smooth_step_down((r - half) / half);
    w * k.sin_k(r) + (1.0 - w)
}

/// Chart around one vertex of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexChart {
    pub theta: f64,
    pub curvature: Curvature,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartSample {
    /// Time of the extended flow.
    pub tau: f64,
    /// Elapsed geodesic (arc-length) time.
    pub geodesic_time: f64,
    pub state: CartesianChartState,
}

#[derive(Debug, Clone)]
pub struct ChartTrajectory {
    pub samples: Vec<ChartSample>,
    /// Extended-flow time at which the chart was left, if it was.
    pub exit: Option<f64>,
}

impl ChartTrajectory {
    pub fn last(&self) -> &ChartSample {
        self.samples.last().unwrap()
    }
}

impl VertexChart {
    pub fn new(theta: f64, curvature: Curvature, radius: f64) -> Result<Self, FlowError> {
        check_angle(theta)?;
        let max = if curvature == Curvature::Spherical { FRAC_PI_2 } else { f64::INFINITY };
        if !(radius > 0.0 && radius < max) {
            return Err(FlowError::BadRadius(radius));
        }
        Ok(VertexChart { theta, curvature, radius })
    }

    /// Chart at vertex `i`, radius from the vertex neighborhood rule.
    pub fn for_vertex(poly: &Polygon, i: usize) -> Result<Self, FlowError> {
        let k = poly.curvature();
        let mut radius = poly.vertex_neighborhood_radius(i);
        if k == Curvature::Spherical {
            radius = radius.min(FRAC_PI_2 * 0.99);
        }
        Self::new(poly.angles()[i], k, radius)
    }

    pub fn forward(&self, s: &ChartState) -> Result<CartesianChartState, FlowError> {
        chart_forward(s, self.theta, self.curvature)
    }

    pub fn inverse(&self, c: &CartesianChartState) -> Result<ChartState, FlowError> {
        chart_inverse(c, self.theta, self.curvature)
    }

    pub fn field(&self, c: &CartesianChartState) -> Result<FieldValue, FlowError> {
        extended_field_z(c, self.theta, self.curvature)
    }

    pub fn rho(&self, r: f64) -> f64 {
        reparameterization_rho(r, self.curvature, self.radius)
    }

    fn bound(&self) -> f64 {
        self.curvature.sin_k(self.radius)
    }

    /// Extended field with the blended time change: equal to `Z` on the
    /// inner half of the chart, `ρ·X` pushed forward elsewhere.
    fn blended(&self, y: &[f64; 4]) -> [f64; 4] {
        let c = CartesianChartState::new(y[0], y[1], y[2]);
        let big_r = c.radius();
        let k = self.curvature;
        let arg = (1.0 - k.k() * big_r * big_r).max(0.0);
        let f = arg.sqrt();
        let w = PI / self.theta;
        let (sz, cz) = c.z.sin_cos();
        let z = [f * c.x * cz - w * c.y * sz, f * c.y * cz + w * c.x * sz, -f * sz];
        let r = asin_k(k, big_r.min(if k == Curvature::Spherical { 1.0 } else { f64::INFINITY }));
        let rho = self.rho(r);
        let scale = if r <= 0.5 * self.radius { 1.0 } else { rho / k.sin_k(r) };
        [z[0] * scale, z[1] * scale, z[2] * scale, rho]
    }

    /// Integrates the extended flow for time `duration` from `c0`, stopping
    /// where the state leaves the chart.
    pub fn integrate(&self, c0: &CartesianChartState, duration: f64) -> Result<ChartTrajectory, FlowError> {
        self.integrate_with(c0, duration, &Dopri5::default())
    }

    pub fn integrate_with(
        &self,
        c0: &CartesianChartState,
        duration: f64,
        solver: &Dopri5,
    ) -> Result<ChartTrajectory, FlowError> {
        let bound = self.bound();
        if c0.radius() >= bound {
            return Err(FlowError::OutsideDomain(c0.radius()));
        }
        let sol = solver.solve_with_event(
            |_, y: &[f64; 4]| self.blended(y),
            0.0,
            [c0.x, c0.y, c0.z, 0.0],
            duration,
            |y| y[0].hypot(y[1]) - bound,
        );
        if sol.stop == Stop::Failed {
            return Err(FlowError::IntegrationFailed(sol.t.len()));
        }
        let samples = sol
            .t
            .iter()
            .zip(&sol.y)
            .map(|(&tau, y)| ChartSample {
                tau,
                geodesic_time: y[3],
                state: CartesianChartState::new(y[0], y[1], y[2]),
            })
            .collect();
        let exit = (sol.stop == Stop::Event).then(|| *sol.t.last().unwrap());
        Ok(ChartTrajectory { samples, exit })
    }
}

/// Integrates the unreparameterized field `X` in polar coordinates.
pub fn integrate_velocity_field(
    s0: &ChartState,
    t: f64,
    k: Curvature,
    solver: &Dopri5,
) -> Result<ChartState, FlowError> {
    if s0.r <= 0.0 {
        return Err(FlowError::Singular);
    }
    let sol = solver.solve(
        |_, y: &[f64; 3]| {
            let s = ChartState::new(y[0], y[1], y[2]);
            velocity_field_x(&s, k).map(|v| v.0).unwrap_or([f64::NAN; 3])
        },
        0.0,
        [s0.r, s0.gamma, s0.beta],
        t,
    );
    let (_, y) = sol.last();
    if sol.stop == Stop::Failed || y.iter().any(|v| !v.is_finite()) {
        return Err(FlowError::IntegrationFailed(sol.t.len()));
    }
    Ok(ChartState::new(y[0], y[1], y[2]))
}

/// Line-delimited `(t, x, y, z)` records, 17 significant digits.
pub fn format_cartesian_records(samples: &[ChartSample]) -> String {
    let mut out = String::new();
    for s in samples {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e}", s.tau, s.state.x, s.state.y, s.state.z);
    }
    out
}

/// Line-delimited `(t, r, γ, β)` records, 17 significant digits.
pub fn format_polar_records(records: &[(f64, ChartState)]) -> String {
    let mut out = String::new();
    for (t, s) in records {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e}", t, s.r, s.gamma, s.beta);
    }
    out
}
