//! Dormand–Prince 5(4) integration with Hairer's continuous extension,
//! and section-crossing events on the plane `g = x + a y = 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{fixed_points, vector_field, Params, State3};
use crate::section::{project, SectionPoint};

pub const BLOW_UP_NORM: f64 = 1e8;
pub const MIN_STEP: f64 = 1e-14;
/// Radius of the ball around an equilibrium where an orbit is declared captured.
pub const FIXED_POINT_BALL: f64 = 1e-6;
/// Crossings this close to `l_p` are flagged near-boundary.
pub const NEAR_BOUNDARY: f64 = 1e-9;
/// Interior dense-output probes per step when scanning for sign changes of `g`.
const EVENT_PROBES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            max_time: 1000.0,
            event_tol: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.rel_tol,
            self.abs_tol,
            self.max_step,
            self.max_time,
            self.event_tol,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "integrator settings must be positive: {self:?}"
            )));
        }
        if self.rel_tol < 1e-14 {
            return Err(Error::InvalidArgument(
                "rel_tol must be at least 1e-14".into(),
            ));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = max_time;
        self
    }
}

/// Transversality floor `1e-6 (1 + |s|)` for `|d(x + a y)/dt|` at a crossing.
pub fn transversality_floor(s: State3) -> f64 {
    1e-6 * (1.0 + s.norm())
}

// Dormand–Prince tableau (the field is autonomous, so the nodes are not needed).
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stages {
    y1: State3,
    k: [State3; 7],
}

fn dopri_stages(p: &Params, y: State3, k1: State3, h: f64) -> Stages {
    let f = |s| vector_field(p, s);
    let k2 = f(y + k1 * (h * A21));
    let k3 = f(y + (k1 * A31 + k2 * A32) * h);
    let k4 = f(y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
    let k5 = f(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
    let k6 = f(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
    let y1 = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
    let k7 = f(y1);
    Stages {
        y1,
        k: [k1, k2, k3, k4, k5, k6, k7],
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [State3; 5],
}

impl DenseStep {
    fn new(t0: f64, h: f64, y0: State3, st: &Stages) -> Self {
        let [k1, _, k3, k4, k5, k6, k7] = st.k;
        let r2 = st.y1 - y0;
        let r3 = k1 * h - r2;
        let r4 = r2 - k7 * h - r3;
        let r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
        Self {
            t0,
            h,
            rcont: [y0, r2, r3, r4, r5],
        }
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_theta(&self, theta: f64) -> State3 {
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.rcont;
        r1 + (r2 + (r3 + (r4 + r5 * th1) * theta) * th1) * theta
    }

    pub fn eval(&self, t: f64) -> State3 {
        self.eval_theta((t - self.t0) / self.h)
    }

    pub fn start(&self) -> State3 {
        self.rcont[0]
    }

    pub fn end(&self) -> State3 {
        self.rcont[0] + self.rcont[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Section,
    NearTangent,
    FixedPointLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub t: f64,
    pub state: State3,
    pub kind: EventKind,
}

/// Integrated orbit: samples at accepted steps (time strictly monotone in the
/// integration direction) together with the dense output of every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<(f64, State3)>,
    steps: Vec<DenseStep>,
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    fn start(t0: f64, s0: State3) -> Self {
        Self {
            samples: vec![(t0, s0)],
            steps: Vec::new(),
            events: Vec::new(),
        }
    }

    fn push(&mut self, step: DenseStep) {
        self.samples.push((step.t1(), step.end()));
        self.steps.push(step);
    }

    pub fn samples(&self) -> &[(f64, State3)] {
        &self.samples
    }

    pub fn steps(&self) -> &[DenseStep] {
        &self.steps
    }

    pub fn first(&self) -> (f64, State3) {
        self.samples[0]
    }

    pub fn last(&self) -> (f64, State3) {
        *self
            .samples
            .last()
            .expect("trajectory has an initial sample")
    }

    pub fn is_backward(&self) -> bool {
        self.steps.first().is_some_and(|s| s.h < 0.0)
    }

    /// Dense-output state at `t`, or `None` outside the covered interval.
    pub fn eval(&self, t: f64) -> Option<State3> {
        let (t0, s0) = self.first();
        if self.steps.is_empty() {
            return (t == t0).then_some(s0);
        }
        let dir = if self.is_backward() { -1.0 } else { 1.0 };
        let t_end = self.last().0;
        if dir * (t - t0) < 0.0 || dir * (t - t_end) > 0.0 {
            return None;
        }
        let idx = self.steps.partition_point(|st| dir * (t - st.t0) >= 0.0);
        let step = &self.steps[idx.saturating_sub(1)];
        Some(step.eval(t))
    }

    /// Arclength of the sample polyline.
    pub fn arclength(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].1.dist(w[1].1)).sum()
    }

    /// CSV `t,x,y,z,tag` with samples tagged `sample` and events by kind.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(f64, State3, &str)> = self
            .samples
            .iter()
            .map(|&(t, s)| (t, s, "sample"))
            .collect();
        for e in &self.events {
            let tag = match e.kind {
                EventKind::Section => "section",
                EventKind::NearTangent => "near_tangent",
                EventKind::FixedPointLimit => "fixed_point_limit",
            };
            rows.push((e.t, e.state, tag));
        }
        let dir = if self.is_backward() { -1.0 } else { 1.0 };
        rows.sort_by(|a, b| (dir * a.0).total_cmp(&(dir * b.0)));
        let mut out = String::from("t,x,y,z,tag\n");
        for (t, s, tag) in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{tag}",
                crate::fmt17(t),
                crate::fmt17(s.x),
                crate::fmt17(s.y),
                crate::fmt17(s.z)
            );
        }
        out
    }
}

/// Adaptive stepper producing one accepted step at a time.
pub struct Stepper<'a> {
    p: &'a Params,
    cfg: IntegratorConfig,
    t: f64,
    y: State3,
    k1: State3,
    h: f64,
    dir: f64,
}

fn scaled_norm(v: State3, y0: State3, y1: State3, cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let sk = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (v[i] / sk).powi(2);
    }
    (acc / 3.0).sqrt()
}

impl<'a> Stepper<'a> {
    pub fn new(p: &'a Params, t0: f64, y0: State3, cfg: IntegratorConfig, dir: f64) -> Self {
        let k1 = vector_field(p, y0);
        let mut st = Self {
            p,
            cfg,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            dir: dir.signum(),
        };
        st.h = st.initial_step();
        st
    }

    /// Starting step size after Hairer and Wanner's heuristic.
    fn initial_step(&self) -> f64 {
        let cfg = &self.cfg;
        let sc = |v: State3| scaled_norm(v, self.y, self.y, cfg);
        let d0 = sc(self.y);
        let d1 = sc(self.k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(cfg.max_step);
        let y1 = self.y + self.k1 * (self.dir * h0);
        let f1 = vector_field(self.p, y1);
        let d2 = sc(f1 - self.k1) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(cfg.max_step)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> State3 {
        self.y
    }

    /// Advance by one accepted step, not going past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<DenseStep> {
        let mut reject = false;
        loop {
            let remaining = (t_end - self.t) * self.dir;
            let mut h = self.h.min(self.cfg.max_step);
            if h >= remaining {
                h = remaining;
            }
            if h < MIN_STEP * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            let hs = h * self.dir;
            let st = dopri_stages(self.p, self.y, self.k1, hs);
            let [k1, _, k3, k4, k5, k6, k7] = st.k;
            let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs;
            let err = scaled_norm(err_vec, self.y, st.y1, &self.cfg);
            if !err.is_finite() || !st.y1.is_finite() {
                self.h = h * 0.2;
                reject = true;
                continue;
            }
            let fac = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            if err <= 1.0 {
                let step = DenseStep::new(self.t, hs, self.y, &st);
                self.t = if h == remaining { t_end } else { self.t + hs };
                self.y = st.y1;
                self.k1 = k7;
                self.h = if reject { h * fac.min(1.0) } else { h * fac };
                let norm = self.y.norm();
                if norm > BLOW_UP_NORM {
                    return Err(Error::BlowUp { t: self.t, norm });
                }
                return Ok(step);
            }
            self.h = h * fac;
            reject = true;
        }
    }
}

/// Why a controlled integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Reached,
    Stopped,
    BlowUp { t: f64, norm: f64 },
}

/// Integrate from `(t0, s0)` towards `t_end` (either direction), calling
/// `on_step` after each accepted step; returning `true` stops the run.
/// Blow-up ends the run with the trajectory so far.
pub fn integrate_controlled<F>(
    p: &Params,
    s0: State3,
    cfg: &IntegratorConfig,
    t0: f64,
    t_end: f64,
    mut on_step: F,
) -> Result<(Trajectory, Termination)>
where
    F: FnMut(&DenseStep, &mut Trajectory) -> bool,
{
    cfg.validate()?;
    if !s0.is_finite() || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidArgument(
            "initial state and time span must be finite".into(),
        ));
    }
    let mut traj = Trajectory::start(t0, s0);
    if t_end == t0 {
        return Ok((traj, Termination::Reached));
    }
    let dir = (t_end - t0).signum();
    let mut stepper = Stepper::new(p, t0, s0, *cfg, dir);
    while stepper.time() != t_end {
        match stepper.step(t_end) {
            Ok(step) => {
                traj.push(step);
                if on_step(&step, &mut traj) {
                    return Ok((traj, Termination::Stopped));
                }
            }
            Err(Error::BlowUp { t, norm }) => return Ok((traj, Termination::BlowUp { t, norm })),
            Err(e) => return Err(e),
        }
    }
    Ok((traj, Termination::Reached))
}

/// Integrate over `[t0, t1]`; `t1 < t0` runs the inverse flow.
pub fn integrate(
    p: &Params,
    s0: State3,
    cfg: &IntegratorConfig,
    t0: f64,
    t1: f64,
) -> Result<Trajectory> {
    let (traj, term) = integrate_controlled(p, s0, cfg, t0, t1, |_, _| false)?;
    match term {
        Termination::BlowUp { t, norm } => Err(Error::BlowUp { t, norm }),
        _ => Ok(traj),
    }
}

/// Final state of `n` fixed steps of the 5th-order Dormand–Prince solution.
pub fn integrate_fixed(p: &Params, s0: State3, t_span: f64, n: usize) -> State3 {
    let h = t_span / n as f64;
    let mut y = s0;
    let mut k1 = vector_field(p, y);
    for _ in 0..n {
        let st = dopri_stages(p, y, k1, h);
        y = st.y1;
        k1 = st.k[6];
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionFilter {
    Up,
    Down,
    Any,
}

impl DirectionFilter {
    fn admits(self, d: Direction) -> bool {
        matches!(
            (self, d),
            (DirectionFilter::Any, _)
                | (DirectionFilter::Up, Direction::Up)
                | (DirectionFilter::Down, Direction::Down)
        )
    }
}

/// A crossing of the plane `x + a y = 0` on the open half `z > x/a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub t: f64,
    pub point: SectionPoint,
    pub state: State3,
    pub direction: Direction,
    /// `d(x + a y)/dt` at the crossing.
    pub ydot_rate: f64,
    pub near_boundary: bool,
}

impl CrossingEvent {
    pub fn is_transverse(&self) -> bool {
        self.ydot_rate.abs() > transversality_floor(self.state)
    }
}

/// Crossing of the full plane `x + a y = 0`, either half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneCrossing {
    pub t: f64,
    pub state: State3,
    pub ydot_rate: f64,
}

impl PlaneCrossing {
    /// Height `z - x/a` above `l_p`; positive on `H_p`.
    pub fn height(&self, p: &Params) -> f64 {
        self.state.z - self.state.x / p.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equilibrium {
    PIn,
    POut,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CrossingOutcome {
    Crossing(CrossingEvent),
    /// Crossing whose rate is under the transversality floor.
    NearTangent(CrossingEvent),
    FixedPointLimit {
        t: f64,
        state: State3,
        which: Equilibrium,
    },
    BlowUp {
        t: f64,
        norm: f64,
    },
}

/// `d(x + a y)/dt` along the field.
pub fn ydot_rate(p: &Params, s: State3) -> f64 {
    let f = vector_field(p, s);
    f.x + p.a * f.y
}

fn g_of(p: &Params, s: State3) -> f64 {
    s.x + p.a * s.y
}

/// Brent's method for a bracketed root of `f` on `[a, b]`, to absolute `tol`.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut pp, mut q);
            if a == c {
                pp = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                pp = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if pp > 0.0 {
                q = -q;
            }
            pp = pp.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * pp < min1.min(min2) {
                e = d;
                d = pp / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    b
}

/// All sign changes of `x + a y` within one step, in integration order.
/// Between probes an extremum of `g` (a sign change of its rate) is located
/// as well, so that shallow grazing double crossings are not lost.
pub fn step_plane_crossings(p: &Params, step: &DenseStep, event_tol: f64) -> Vec<PlaneCrossing> {
    let g_at = |t: f64| g_of(p, step.eval(t));
    let rate_at = |t: f64| ydot_rate(p, step.eval(t));
    let mut out = Vec::new();
    let mut root = |a: f64, b: f64| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let tc = brent(g_at, lo, hi, event_tol);
        let state = step.eval(tc);
        out.push(PlaneCrossing {
            t: tc,
            state,
            ydot_rate: ydot_rate(p, state),
        });
    };
    let mut prev_t = step.t0;
    let mut prev_g = g_at(prev_t);
    let mut prev_r = rate_at(prev_t);
    for k in 1..=EVENT_PROBES + 1 {
        let t = if k == EVENT_PROBES + 1 {
            step.t1()
        } else {
            step.t0 + step.h * k as f64 / (EVENT_PROBES + 1) as f64
        };
        let g = g_at(t);
        let r = rate_at(t);
        if prev_g != 0.0 && (g == 0.0 || g.signum() != prev_g.signum()) {
            root(prev_t, t);
        } else if prev_g != 0.0 && prev_r.signum() != r.signum() {
            // g turns around inside the interval; dip through zero and back?
            let (lo, hi) = if prev_t < t { (prev_t, t) } else { (t, prev_t) };
            let tm = brent(rate_at, lo, hi, event_tol);
            let gm = g_at(tm);
            if gm.signum() != prev_g.signum() {
                root(prev_t, tm);
                root(tm, t);
            }
        }
        prev_t = t;
        prev_g = g;
        prev_r = r;
    }
    out
}

/// Every crossing of the plane `x + a y = 0` along a finished trajectory.
pub fn plane_crossings(p: &Params, traj: &Trajectory, event_tol: f64) -> Vec<PlaneCrossing> {
    let mut out: Vec<PlaneCrossing> = Vec::new();
    for step in traj.steps() {
        for c in step_plane_crossings(p, step, event_tol) {
            // A root exactly at a step boundary shows up in both neighbours.
            if out.last().is_some_and(|l| (l.t - c.t).abs() <= event_tol) {
                continue;
            }
            out.push(c);
        }
    }
    out
}

fn classify_plane_crossing(p: &Params, c: &PlaneCrossing) -> Option<CrossingEvent> {
    let height = c.height(p);
    if height <= 0.0 {
        return None;
    }
    let point = project(p, c.state).unwrap_or(SectionPoint::new(c.state.x, c.state.z));
    Some(CrossingEvent {
        t: c.t,
        point,
        state: c.state,
        direction: if c.ydot_rate > 0.0 {
            Direction::Up
        } else {
            Direction::Down
        },
        ydot_rate: c.ydot_rate,
        near_boundary: height < NEAR_BOUNDARY,
    })
}

/// Open-half crossings (`z > x/a`) along a finished trajectory.
pub fn section_crossings(p: &Params, traj: &Trajectory, event_tol: f64) -> Vec<CrossingEvent> {
    plane_crossings(p, traj, event_tol)
        .iter()
        .filter_map(|c| classify_plane_crossing(p, c))
        .collect()
}

/// Integrate forward from `s0` to the next crossing of the open section with
/// an admissible direction. Crossings at `t = 0` are not reported.
pub fn next_section_crossing(
    p: &Params,
    s0: State3,
    cfg: &IntegratorConfig,
    filter: DirectionFilter,
) -> Result<CrossingOutcome> {
    let fps = fixed_points(p).ok();
    let captured = |s: State3| -> Option<Equilibrium> {
        let fps = fps.as_ref()?;
        for (which, fp) in [(Equilibrium::PIn, fps.p_in), (Equilibrium::POut, fps.p_out)] {
            let d = s - fp;
            if d.norm() < FIXED_POINT_BALL && vector_field(p, s).dot(d) <= 0.0 {
                return Some(which);
            }
        }
        None
    };
    if let Some(which) = captured(s0) {
        return Ok(CrossingOutcome::FixedPointLimit {
            t: 0.0,
            state: s0,
            which,
        });
    }
    let mut found: Option<CrossingOutcome> = None;
    let (_, term) = integrate_controlled(p, s0, cfg, 0.0, cfg.max_time, |step, _| {
        for c in step_plane_crossings(p, step, cfg.event_tol) {
            if c.t <= 0.0 {
                continue;
            }
            let Some(ev) = classify_plane_crossing(p, &c) else {
                continue;
            };
            if !filter.admits(ev.direction) {
                continue;
            }
            found = Some(if ev.is_transverse() {
                CrossingOutcome::Crossing(ev)
            } else {
                CrossingOutcome::NearTangent(ev)
            });
            return true;
        }
        let end = step.end();
        if let Some(which) = captured(end) {
            found = Some(CrossingOutcome::FixedPointLimit {
                t: step.t1(),
                state: end,
                which,
            });
            return true;
        }
        false
    })?;
    if let Some(out) = found {
        return Ok(out);
    }
    match term {
        Termination::BlowUp { t, norm } => Ok(CrossingOutcome::BlowUp { t, norm }),
        _ => Err(Error::NoCrossing(format!(
            "no section crossing within t = {}",
            cfg.max_time
        ))),
    }
}
