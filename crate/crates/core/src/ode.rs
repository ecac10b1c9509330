//! Dormand–Prince 5(4) with step-size control and a terminal event.

/// Integrator settings. Defaults: atol 1e-12, rtol 1e-10.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { atol: 1e-12, rtol: 1e-10, h_init: 1e-3, h_max: 0.1, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Reached the requested end time.
    Finished,
    /// The event function crossed zero from below.
    Event,
    /// Step budget exhausted or step size underflow.
    Failed,
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub stop: Stop,
    pub rejected: usize,
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

impl Dopri5 {
    /// One step; returns the new state, the derivative there and the
    /// normalized error.
    fn step<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
    ) -> ([f64; N], [f64; N], f64)
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        (y_new, k7, (err / N as f64).sqrt())
    }

    pub fn solve<const N: usize, F>(&self, f: F, t0: f64, y0: [f64; N], t_end: f64) -> Solution<N>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        self.solve_with_event(f, t0, y0, t_end, |_: &[f64; N]| -1.0)
    }

    /// Integrates until `t_end` or until `event(y)` becomes non-negative; the
    /// crossing is located by bisecting the last step.
    pub fn solve_with_event<const N: usize, F, G>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        event: G,
    ) -> Solution<N>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        G: Fn(&[f64; N]) -> f64,
    {
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut sol = Solution { t: vec![t0], y: vec![y0], stop: Stop::Finished, rejected: 0 };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.h_init.min((t_end - t0).abs()).max(f64::MIN_POSITIVE);
        let mut steps = 0;
        while dir * (t_end - t) > 0.0 {
            if steps >= self.max_steps || h < 1e-15 * (1.0 + t.abs()) {
                sol.stop = Stop::Failed;
                return sol;
            }
            steps += 1;
            let last = h >= (t_end - t).abs();
            let hs = if last { t_end - t } else { dir * h };
            let (y_new, k_new, err) = self.step(&mut f, t, &y, &k1, hs);
            if err <= 1.0 {
                if event(&y_new) >= 0.0 {
                    let (te, ye) = self.locate(&mut f, t, &y, &k1, hs, &event);
                    sol.t.push(te);
                    sol.y.push(ye);
                    sol.stop = Stop::Event;
                    return sol;
                }
                t = if last { t_end } else { t + hs };
                y = y_new;
                k1 = k_new;
                sol.t.push(t);
                sol.y.push(y);
            } else {
                sol.rejected += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(self.h_max);
        }
        sol
    }

    fn locate<const N: usize, F, G>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
        event: &G,
    ) -> (f64, [f64; N])
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        G: Fn(&[f64; N]) -> f64,
    {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = self.step(f, t, y, k1, h).0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (ym, _, _) = self.step(f, t, y, k1, mid * h);
            if event(&ym) >= 0.0 {
                hi = mid;
                best = ym;
            } else {
                lo = mid;
            }
            if (hi - lo) * h.abs() < 1e-14 {
                break;
            }
        }
        (t + hi * h, best)
    }
}
