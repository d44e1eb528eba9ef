//! One-dimensional separatrices of the two saddle-foci, the heteroclinic
//! mismatch, the search for trefoil parameters and their certificate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{fixed_points, jacobian, Params, State3};
use crate::integrator::{
    integrate_controlled, plane_crossings, transversality_floor, DenseStep, IntegratorConfig,
    PlaneCrossing, Termination, Trajectory,
};
use crate::knot::{knot_polynomial, AlexPoly};
use crate::section::{project, trapping_violation, SectionPoint};
use crate::spectral::{complex_eigenplane, real_eigenvector, saddle_report};

/// Distance to the opposite fixed point at which a trace counts as captured.
pub const CAPTURE_RADIUS: f64 = 1e-3;
/// Norm beyond which a branch is treated as escaping to infinity.
pub const ESCAPE_RADIUS: f64 = 100.0;
/// Mismatch below which a parameter counts as heteroclinic.
pub const HETERO_TOL: f64 = 1e-3;
/// Radius of the local two-dimensional manifold discs.
pub const DISC_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparatrixSource {
    /// `W^s_In`, traced in backward time.
    PInStable,
    /// `W^u_Out`, traced in forward time.
    POutUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeparatrixEnd {
    ArclengthCap,
    TimeCap,
    Escaped { t: f64, norm: f64 },
    Captured { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separatrix {
    pub source: SeparatrixSource,
    pub branch: Branch,
    pub seed_offset: f64,
    pub eigenvector: State3,
    pub curve: Trajectory,
    pub end: SeparatrixEnd,
    /// First time the trace dips below `z = -b`, if ever.
    pub trapping_fault: Option<f64>,
}

impl Separatrix {
    pub fn is_bounded(&self) -> bool {
        !matches!(self.end, SeparatrixEnd::Escaped { .. })
    }

    /// Crossings of the whole plane `x + a y = 0`, ordered along the trace.
    pub fn plane_crossings(&self, p: &Params, event_tol: f64) -> Vec<PlaneCrossing> {
        plane_crossings(p, &self.curve, event_tol)
    }
}

/// Unit real eigenvector of the saddle-focus, oriented with `z >= 0`.
pub fn separatrix_direction(p: &Params, source: SeparatrixSource) -> Result<(State3, State3)> {
    let rep = saddle_report(p)?;
    let fp = fixed_points(p)?;
    let (base, gamma) = match source {
        SeparatrixSource::PInStable => (fp.p_in, rep.spectrum_in.gamma),
        SeparatrixSource::POutUnstable => (fp.p_out, rep.spectrum_out.gamma),
    };
    let v = real_eigenvector(&jacobian(p, base), gamma);
    let v = if v.z < 0.0 || (v.z == 0.0 && v.y < 0.0) {
        -v
    } else {
        v
    };
    Ok((base, v))
}

pub fn default_seed_offset(fixed_point: State3) -> f64 {
    1e-7 * (1.0 + fixed_point.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceLimits {
    pub arclength_cap: f64,
    pub time_cap: f64,
    pub escape_radius: f64,
    pub capture_radius: f64,
}

impl Default for TraceLimits {
    fn default() -> Self {
        Self {
            arclength_cap: f64::INFINITY,
            time_cap: 100.0,
            escape_radius: ESCAPE_RADIUS,
            capture_radius: CAPTURE_RADIUS,
        }
    }
}

pub fn trace_separatrix(
    p: &Params,
    which: SeparatrixSource,
    branch: Branch,
    cfg: &IntegratorConfig,
    arclength_cap: f64,
) -> Result<Separatrix> {
    let limits = TraceLimits {
        arclength_cap,
        ..TraceLimits::default()
    };
    trace_separatrix_with(p, which, branch, cfg, &limits, None)
}

/// Traces one branch from `fixed point + sign * offset * eigenvector` until
/// the arclength or time cap, escape, or capture by the other fixed point.
pub fn trace_separatrix_with(
    p: &Params,
    which: SeparatrixSource,
    branch: Branch,
    cfg: &IntegratorConfig,
    limits: &TraceLimits,
    seed_offset: Option<f64>,
) -> Result<Separatrix> {
    let (base, v) = separatrix_direction(p, which)?;
    let offset = seed_offset.unwrap_or_else(|| default_seed_offset(base));
    if !(offset > 0.0) {
        return Err(Error::InvalidArgument(
            "seed offset must be positive".into(),
        ));
    }
    let fp = fixed_points(p)?;
    let target = match which {
        SeparatrixSource::PInStable => fp.p_out,
        SeparatrixSource::POutUnstable => fp.p_in,
    };
    let t_end = match which {
        SeparatrixSource::PInStable => -limits.time_cap,
        SeparatrixSource::POutUnstable => limits.time_cap,
    };
    let seed = base + v * (branch.sign() * offset);
    let mut length = 0.0;
    let mut end = SeparatrixEnd::TimeCap;
    let (curve, term) = integrate_controlled(p, seed, cfg, 0.0, t_end, |step: &DenseStep, _| {
        let s = step.end();
        length += step.start().dist(s);
        if s.norm() > limits.escape_radius {
            end = SeparatrixEnd::Escaped {
                t: step.t1(),
                norm: s.norm(),
            };
            return true;
        }
        if s.dist(target) < limits.capture_radius {
            end = SeparatrixEnd::Captured { t: step.t1() };
            return true;
        }
        if length >= limits.arclength_cap {
            end = SeparatrixEnd::ArclengthCap;
            return true;
        }
        false
    })?;
    if let Termination::BlowUp { t, norm } = term {
        end = SeparatrixEnd::Escaped { t, norm };
    }
    let trapping_fault = trapping_violation(p, &curve);
    Ok(Separatrix {
        source: which,
        branch,
        seed_offset: offset,
        eigenvector: v,
        curve,
        end,
        trapping_fault,
    })
}

/// One section crossing of each separatrix, matched in the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchWitness {
    pub unstable_branch: Branch,
    pub stable_branch: Branch,
    pub unstable: PlaneCrossing,
    pub stable: PlaneCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroMismatch {
    pub value: f64,
    pub witness: MatchWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroConfig {
    pub integrator: IntegratorConfig,
    /// Forward time budget for `W^u_Out`.
    pub unstable_time: f64,
    /// Backward time budget for `W^s_In`.
    pub stable_time: f64,
}

impl Default for HeteroConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            unstable_time: 80.0,
            stable_time: 20.0,
        }
    }
}

fn chart(s: State3) -> SectionPoint {
    SectionPoint::new(s.x, s.z)
}

/// Chart distance of two crossings on the same half of the plane.
fn crossing_distance(p: &Params, a: &PlaneCrossing, b: &PlaneCrossing) -> Option<f64> {
    (a.height(p) * b.height(p) > 0.0).then(|| chart(a.state).dist(chart(b.state)))
}

fn traced_branches(
    p: &Params,
    which: SeparatrixSource,
    cfg: &HeteroConfig,
) -> Result<Vec<Separatrix>> {
    let limits = TraceLimits {
        time_cap: match which {
            SeparatrixSource::PInStable => cfg.stable_time,
            SeparatrixSource::POutUnstable => cfg.unstable_time,
        },
        ..TraceLimits::default()
    };
    [Branch::Plus, Branch::Minus]
        .par_iter()
        .map(|&b| trace_separatrix_with(p, which, b, &cfg.integrator, &limits, None))
        .collect()
}

/// The `W^u_Out` branches that stay bounded, paired with their crossings.
fn bounded_unstable(
    p: &Params,
    cfg: &HeteroConfig,
) -> Result<Vec<(Separatrix, Vec<PlaneCrossing>)>> {
    let out: Vec<_> = traced_branches(p, SeparatrixSource::POutUnstable, cfg)?
        .into_iter()
        .filter(|s| s.is_bounded())
        .map(|s| {
            let c = s.plane_crossings(p, cfg.integrator.event_tol);
            (s, c)
        })
        .filter(|(_, c)| !c.is_empty())
        .collect();
    if out.is_empty() {
        return Err(Error::NoCrossing(
            "no bounded branch of W^u_Out crosses the section".into(),
        ));
    }
    Ok(out)
}

/// Smallest chart distance between a section crossing of a bounded
/// `W^u_Out` branch and one of `W^s_In` on the same half of the plane.
pub fn hetero_mismatch(p: &Params, cfg: &HeteroConfig) -> Result<HeteroMismatch> {
    let unstable = bounded_unstable(p, cfg)?;
    let stable = traced_branches(p, SeparatrixSource::PInStable, cfg)?;
    let mut best: Option<HeteroMismatch> = None;
    let mut stable_crossings = 0;
    for s in &stable {
        let sc = s.plane_crossings(p, cfg.integrator.event_tol);
        stable_crossings += sc.len();
        for (u, uc) in &unstable {
            for a in uc {
                for b in &sc {
                    let Some(d) = crossing_distance(p, a, b) else {
                        continue;
                    };
                    if best.is_none_or(|m| d < m.value) {
                        best = Some(HeteroMismatch {
                            value: d,
                            witness: MatchWitness {
                                unstable_branch: u.branch,
                                stable_branch: s.branch,
                                unstable: *a,
                                stable: *b,
                            },
                        });
                    }
                }
            }
        }
    }
    best.ok_or_else(|| {
        if stable_crossings == 0 {
            Error::NoCrossing(format!(
                "W^s_In has no section crossing within backward time {}",
                cfg.stable_time
            ))
        } else {
            Error::NoCrossing(
                "no crossings of the two separatrices on a common half of the plane".into(),
            )
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamAxis {
    A,
    B,
    C,
}

impl ParamAxis {
    pub fn get(self, p: &Params) -> f64 {
        match self {
            ParamAxis::A => p.a,
            ParamAxis::B => p.b,
            ParamAxis::C => p.c,
        }
    }

    pub fn set(self, p: Params, v: f64) -> Params {
        match self {
            ParamAxis::A => Params { a: v, ..p },
            ParamAxis::B => Params { b: v, ..p },
            ParamAxis::C => Params { c: v, ..p },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Half-width of the box around the seed, in both free coordinates.
    pub half_width: f64,
    /// Edge of the initial simplex.
    pub initial_step: f64,
    pub max_iter: usize,
    pub x_tol: f64,
    pub f_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            half_width: 0.05,
            initial_step: 0.01,
            max_iter: 200,
            x_tol: 1e-7,
            f_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub iteration: usize,
    pub point: [f64; 2],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub found: bool,
    pub params: Params,
    pub mismatch: f64,
    pub seed_mismatch: f64,
    pub evaluations: usize,
    /// Best vertex after every iteration.
    pub trace: Vec<SearchStep>,
}

impl SearchReport {
    /// Best value never increased from one iteration to the next.
    pub fn is_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].value <= w[0].value)
    }
}

/// Nelder–Mead over two free coordinates of `seed`, restricted to a box.
pub fn trefoil_search(
    seed: Params,
    free: (ParamAxis, ParamAxis),
    opts: &SearchOptions,
    cfg: &HeteroConfig,
) -> Result<SearchReport> {
    if free.0 == free.1 {
        return Err(Error::InvalidArgument(
            "the two free parameters must differ".into(),
        ));
    }
    if !(opts.half_width > 0.0 && opts.initial_step > 0.0) {
        return Err(Error::InvalidArgument(
            "search box and initial step must be positive".into(),
        ));
    }
    let x0 = [free.0.get(&seed), free.1.get(&seed)];
    let to_params = |x: [f64; 2]| free.1.set(free.0.set(seed, x[0]), x[1]);
    let objective = |x: [f64; 2]| -> f64 {
        if (0..2).any(|i| (x[i] - x0[i]).abs() > opts.half_width) {
            return f64::INFINITY;
        }
        let q = to_params(x);
        match Params::new(q.a, q.b, q.c).and_then(|q| hetero_mismatch(&q, cfg)) {
            Ok(m) => m.value,
            Err(_) => f64::INFINITY,
        }
    };
    let nm = nelder_mead(objective, x0, opts);
    let params = to_params(nm.best.0);
    Ok(SearchReport {
        found: nm.best.1 < HETERO_TOL,
        params,
        mismatch: nm.best.1,
        seed_mismatch: nm.seed_value,
        evaluations: nm.evaluations,
        trace: nm.trace,
    })
}

struct NmResult {
    best: ([f64; 2], f64),
    seed_value: f64,
    evaluations: usize,
    trace: Vec<SearchStep>,
}

fn nelder_mead<F: Fn([f64; 2]) -> f64 + Sync>(
    f: F,
    x0: [f64; 2],
    opts: &SearchOptions,
) -> NmResult {
    let lerp =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let init = [
        x0,
        [x0[0] + opts.initial_step, x0[1]],
        [x0[0], x0[1] + opts.initial_step],
    ];
    let vals: Vec<f64> = init.par_iter().map(|&x| f(x)).collect();
    let seed_value = vals[0];
    let mut simplex: Vec<([f64; 2], f64)> = init.into_iter().zip(vals).collect();
    let mut evaluations = 3;
    let mut trace = Vec::new();
    for iteration in 0..opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(SearchStep {
            iteration,
            point: simplex[0].0,
            value: simplex[0].1,
        });
        let spread_x = simplex[1..]
            .iter()
            .map(|v| {
                (v.0[0] - simplex[0].0[0])
                    .abs()
                    .max((v.0[1] - simplex[0].0[1]).abs())
            })
            .fold(0.0, f64::max);
        let spread_f = simplex[1..]
            .iter()
            .map(|v| (v.1 - simplex[0].1).abs())
            .fold(0.0, f64::max);
        if spread_x <= opts.x_tol && spread_f <= opts.f_tol {
            break;
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];
        let xr = lerp(centroid, worst.0, -1.0);
        let fr = f(xr);
        evaluations += 1;
        if fr < simplex[0].1 {
            let xe = lerp(centroid, worst.0, -2.0);
            let fe = f(xe);
            evaluations += 1;
            simplex[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = lerp(centroid, xr, 0.5);
            (xc, f(xc))
        } else {
            let xc = lerp(centroid, worst.0, 0.5);
            (xc, f(xc))
        };
        evaluations += 1;
        if fc < fr.min(worst.1) {
            simplex[2] = (xc, fc);
            continue;
        }
        let best = simplex[0].0;
        let shrunk: Vec<[f64; 2]> = simplex[1..].iter().map(|v| lerp(best, v.0, 0.5)).collect();
        let sv: Vec<f64> = shrunk.par_iter().map(|&x| f(x)).collect();
        evaluations += 2;
        for (k, (x, v)) in shrunk.into_iter().zip(sv).enumerate() {
            simplex[k + 1] = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if trace.last().is_none_or(|t| t.value > simplex[0].1) {
        trace.push(SearchStep {
            iteration: trace.len(),
            point: simplex[0].0,
            value: simplex[0].1,
        });
    }
    NmResult {
        best: simplex[0],
        seed_value,
        evaluations,
        trace,
    }
}

/// Crossing of the heteroclinic loop with the closed section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopCrossing {
    pub point: SectionPoint,
    pub state: State3,
    pub ydot_rate: f64,
    pub transverse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrefoilCertificate {
    pub params: Params,
    pub mismatch: f64,
    pub p0: Option<SectionPoint>,
    pub crossings: Vec<LoopCrossing>,
    pub crossing_count_on_section: usize,
    pub transverse: bool,
    /// `Θ` from `P_Out` to `P_In`, then the closure, ending at `P_Out`.
    #[serde(skip)]
    pub theta_curve: Vec<State3>,
    pub theta_len: usize,
    pub closure: String,
    pub closure_clearance: f64,
    pub knot_poly: Vec<i64>,
    pub knot_poly_text: String,
    /// Every condition that failed; empty for a valid certificate.
    pub refutation: Vec<String>,
}

impl TrefoilCertificate {
    pub fn is_valid(&self) -> bool {
        self.refutation.is_empty()
    }
}

const DENSE_SUBSTEPS: usize = 4;

/// Dense-output samples between `t0` and `t1` (either order along the trace).
fn dense_samples(traj: &Trajectory, t0: f64, t1: f64) -> Vec<State3> {
    let dir = if traj.is_backward() { -1.0 } else { 1.0 };
    let (lo, hi) = if dir * (t1 - t0) >= 0.0 {
        (t0, t1)
    } else {
        (t1, t0)
    };
    let mut ts = vec![lo];
    for st in traj.steps() {
        for k in 1..=DENSE_SUBSTEPS {
            let t = st.t0 + st.h * k as f64 / DENSE_SUBSTEPS as f64;
            if dir * (t - lo) > 0.0 && dir * (hi - t) > 0.0 {
                ts.push(t);
            }
        }
    }
    ts.push(hi);
    let mut out: Vec<State3> = ts.iter().filter_map(|&t| traj.eval(t)).collect();
    if dir * (t1 - t0) < 0.0 {
        out.reverse();
    }
    out
}

/// The branch opposite to the one carrying the connection; it must escape.
fn unbounded_branch(
    p: &Params,
    which: SeparatrixSource,
    bounded: Branch,
    cfg: &IntegratorConfig,
) -> Result<Separatrix> {
    let other = match bounded {
        Branch::Plus => Branch::Minus,
        Branch::Minus => Branch::Plus,
    };
    let limits = TraceLimits {
        time_cap: 200.0,
        ..TraceLimits::default()
    };
    let s = trace_separatrix_with(p, which, other, cfg, &limits, None)?;
    if s.is_bounded() {
        return Err(Error::NoCrossing(format!(
            "{which:?} {other:?} does not escape past |s| = {ESCAPE_RADIUS}"
        )));
    }
    Ok(s)
}

fn great_circle(a: State3, b: State3, radius: f64, n: usize) -> Vec<State3> {
    let (ua, ub) = (a.normalized(), b.normalized());
    let om = ua.dot(ub).clamp(-1.0, 1.0).acos();
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            let v = if om < 1e-9 {
                ua
            } else {
                (ua * ((1.0 - s) * om).sin() + ub * (s * om).sin()) * (1.0 / om.sin())
            };
            v * radius
        })
        .collect()
}

fn min_distance(a: &[State3], b: &[State3]) -> f64 {
    a.par_iter()
        .map(|x| b.iter().map(|y| x.dist(*y)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Checks that `p` carries a heteroclinic loop crossing the closed section
/// once, transversely, whose closure is a trefoil. The loop is closed
/// through infinity by the unbounded branches of both separatrices joined
/// along an arc of radius `1.5 * ESCAPE_RADIUS`.
pub fn certify_trefoil(p: &Params, cfg: &HeteroConfig) -> Result<TrefoilCertificate> {
    let m = hetero_mismatch(p, cfg)?;
    let mut refutation = Vec::new();
    if m.value >= HETERO_TOL {
        refutation.push(format!(
            "mismatch {:e} is not below {HETERO_TOL:e}",
            m.value
        ));
    }
    let w = m.witness;
    let limits = TraceLimits {
        time_cap: cfg.unstable_time,
        ..TraceLimits::default()
    };
    let up = trace_separatrix_with(
        p,
        SeparatrixSource::POutUnstable,
        w.unstable_branch,
        &cfg.integrator,
        &limits,
        None,
    )?;
    let limits = TraceLimits {
        time_cap: cfg.stable_time,
        ..limits
    };
    let down = trace_separatrix_with(
        p,
        SeparatrixSource::PInStable,
        w.stable_branch,
        &cfg.integrator,
        &limits,
        None,
    )?;
    let fp = fixed_points(p)?;

    let tol = 10.0 * cfg.integrator.event_tol;
    let mut on_loop: Vec<PlaneCrossing> = up
        .plane_crossings(p, cfg.integrator.event_tol)
        .into_iter()
        .filter(|c| c.t < w.unstable.t - tol)
        .collect();
    on_loop.push(w.unstable);
    on_loop.extend(
        down.plane_crossings(p, cfg.integrator.event_tol)
            .into_iter()
            .filter(|c| c.t > w.stable.t + tol),
    );
    let crossings: Vec<LoopCrossing> = on_loop
        .iter()
        .filter(|c| c.height(p) >= 0.0)
        .map(|c| LoopCrossing {
            point: project(p, c.state).unwrap_or(chart(c.state)),
            state: c.state,
            ydot_rate: c.ydot_rate,
            transverse: c.ydot_rate.abs() > transversality_floor(c.state),
        })
        .collect();
    let count = crossings.len();
    if count != 1 {
        refutation.push(if count == 0 {
            "no section crossing".to_string()
        } else {
            format!("multiple section crossings ({count})")
        });
    }
    let transverse = count == 1 && crossings[0].transverse;
    if count == 1 && !transverse {
        refutation.push("section crossing is not transverse".into());
    }
    let p0 = (count == 1).then(|| crossings[0].point);

    let mut theta = vec![fp.p_out];
    theta.extend(dense_samples(&up.curve, 0.0, w.unstable.t));
    // The stable piece starts at the matched point, a mismatch away from the
    // end of the unstable piece.
    theta.extend(
        dense_samples(&down.curve, w.stable.t, 0.0)
            .into_iter()
            .skip(1),
    );
    theta.push(fp.p_in);

    let gs = unbounded_branch(
        p,
        SeparatrixSource::PInStable,
        w.stable_branch,
        &cfg.integrator,
    )?;
    let gu = unbounded_branch(
        p,
        SeparatrixSource::POutUnstable,
        w.unstable_branch,
        &cfg.integrator,
    )?;
    let out_in = dense_samples(&gs.curve, 0.0, gs.curve.last().0);
    let mut in_out = dense_samples(&gu.curve, 0.0, gu.curve.last().0);
    in_out.reverse();
    let arc = great_circle(
        *out_in.last().expect("nonempty trace"),
        in_out[0],
        1.5 * ESCAPE_RADIUS,
        200,
    );
    let clearance = min_distance(&arc, &theta);
    let mut curve = theta.clone();
    curve.extend(&out_in);
    curve.extend(&arc);
    curve.extend(&in_out);
    curve.push(curve[0]);
    let theta_len = theta.len();

    let poly = match knot_polynomial(&curve, State3::new(0.137, 0.291, 0.947)) {
        Ok((poly, _)) => poly,
        Err(e) => {
            refutation.push(format!("knot polynomial unavailable: {e}"));
            AlexPoly { coeffs: Vec::new() }
        }
    };
    if !poly.coeffs.is_empty() && poly.coeffs != [1, -1, 1] {
        refutation.push(format!(
            "closed loop has Alexander polynomial {poly}, not t^2 - t + 1"
        ));
    }
    Ok(TrefoilCertificate {
        params: *p,
        mismatch: m.value,
        p0,
        crossings,
        crossing_count_on_section: count,
        transverse,
        theta_curve: curve,
        theta_len,
        closure: format!(
            "unbounded branches of W^s_In and W^u_Out joined at radius {}",
            1.5 * ESCAPE_RADIUS
        ),
        closure_clearance: clearance,
        knot_poly_text: poly.to_string(),
        knot_poly: poly.coeffs,
        refutation,
    })
}

/// Local two-dimensional manifold disc: `P + r (cos θ vr + sin θ vi)`.
pub fn local_disc(p: &Params, at: SeparatrixSource, n: usize) -> Result<Vec<State3>> {
    let rep = saddle_report(p)?;
    let fp = fixed_points(p)?;
    let (base, sp) = match at {
        SeparatrixSource::PInStable => (fp.p_in, rep.spectrum_in),
        SeparatrixSource::POutUnstable => (fp.p_out, rep.spectrum_out),
    };
    let (vr, vi) = complex_eigenplane(&jacobian(p, base), sp.rho, sp.omega);
    Ok((0..n)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / n as f64;
            base + (vr * th.cos() + vi * th.sin()) * DISC_RADIUS
        })
        .collect())
}

/// CSV `branch,t,x,y,z` of traced separatrices.
pub fn separatrix_csv(curves: &[&Separatrix]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("branch,t,x,y,z\n");
    for s in curves {
        let label = format!(
            "{}_{}",
            match s.source {
                SeparatrixSource::PInStable => "ws_in",
                SeparatrixSource::POutUnstable => "wu_out",
            },
            match s.branch {
                Branch::Plus => "plus",
                Branch::Minus => "minus",
            }
        );
        for &(t, x) in s.curve.samples() {
            let _ = writeln!(
                out,
                "{label},{},{},{},{}",
                crate::fmt17(t),
                crate::fmt17(x.x),
                crate::fmt17(x.y),
                crate::fmt17(x.z)
            );
        }
    }
    out
}
