//! Periodic points of the return map: damped Newton on `f^k(x) - x`,
//! minimal-period certification, fixed-point indices from winding numbers,
//! and symbol words.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Params, State3};
use crate::integrator::{integrate, transversality_floor, ydot_rate, IntegratorConfig};
use crate::knot::cyclic_period;
use crate::return_map::{
    first_return, map_k, map_k_timed, Partition2, ReturnResult, MIN_TIME_JUMP,
};
use crate::section::{embed, SectionPoint};

pub const ACCEPT_RESIDUAL: f64 = 1e-9;
pub const DIVISOR_TOL: f64 = 1e-4;
pub const DEDUPE_TOL: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-6;
/// Smallest height above `l_p` for an orbit point.
pub const MIN_HEIGHT: f64 = 1e-6;
const MAX_NEWTON: usize = 60;
const CURVE_SUBSTEPS: usize = 8;

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub params: Params,
    pub k: usize,
    pub points: Vec<SectionPoint>,
    pub flight_times: Vec<f64>,
    pub residual: f64,
    /// Finite-difference Jacobian of `f^k` at `points[0]`.
    pub jacobian: Mat2,
    /// `det` of that Jacobian.
    pub floquet_ratio: f64,
    pub word: Option<Vec<u8>>,
    /// Largest gap between consecutive return arcs of `curve3d`.
    pub closure_gap: f64,
    #[serde(skip)]
    pub curve3d: Vec<State3>,
}

impl PeriodicOrbit {
    pub fn period_time(&self) -> f64 {
        self.flight_times.iter().sum()
    }

    /// `sign det(Df^k - I)`, the index of an isolated nondegenerate fixed point.
    pub fn linear_index(&self) -> i32 {
        let j = self.jacobian;
        let d = (j[0][0] - 1.0) * (j[1][1] - 1.0) - j[0][1] * j[1][0];
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Eigenvalues of the Jacobian as `(re, im)` pairs.
    pub fn multipliers(&self) -> [(f64, f64); 2] {
        let j = self.jacobian;
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = tr * tr / 4.0 - det;
        if disc >= 0.0 {
            let r = disc.sqrt();
            // Avoid cancellation in the small root.
            let big = tr / 2.0 + r.copysign(tr);
            let small = if big != 0.0 {
                det / big
            } else {
                tr / 2.0 - r.copysign(tr)
            };
            [(big, 0.0), (small, 0.0)]
        } else {
            [(tr / 2.0, (-disc).sqrt()), (tr / 2.0, -(-disc).sqrt())]
        }
    }

    /// Smallest distance between the points of two orbits over all cyclic shifts.
    fn same_orbit(&self, other: &PeriodicOrbit) -> bool {
        self.k == other.k
            && (0..self.k).any(|s| {
                (0..self.k)
                    .all(|i| self.points[i].dist(other.points[(i + s) % self.k]) < DEDUPE_TOL)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: SectionPoint,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSearch {
    pub k: usize,
    pub orbits: Vec<PeriodicOrbit>,
    pub failures: Vec<SeedFailure>,
}

/// Displacement `f^k(x) - x`.
fn displacement(p: &Params, x: SectionPoint, k: usize, cfg: &IntegratorConfig) -> Option<[f64; 2]> {
    if x.height(p) <= 0.0 {
        return None;
    }
    let y = map_k(p, x, k, cfg)?;
    Some([y.u - x.u, y.v - x.v])
}

fn norm2(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

/// Central-difference Jacobian of `f^k`.
pub fn jacobian_k(p: &Params, x: SectionPoint, k: usize, cfg: &IntegratorConfig) -> Option<Mat2> {
    let h = FD_STEP;
    let cols: Vec<Option<[f64; 2]>> = [(h, 0.0), (0.0, h)]
        .iter()
        .map(|&(du, dv)| {
            let fp = map_k(p, SectionPoint::new(x.u + du, x.v + dv), k, cfg)?;
            let fm = map_k(p, SectionPoint::new(x.u - du, x.v - dv), k, cfg)?;
            Some([(fp.u - fm.u) / (2.0 * h), (fp.v - fm.v) / (2.0 * h)])
        })
        .collect();
    let (c0, c1) = (cols[0]?, cols[1]?);
    Some([[c0[0], c1[0]], [c0[1], c1[1]]])
}

fn solve2(m: Mat2, r: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if !(det.abs() > 1e-14 * scale * scale) {
        return None;
    }
    Some([
        (r[0] * m[1][1] - r[1] * m[0][1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ])
}

/// Residual history of one Newton solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    pub point: SectionPoint,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

/// Damped Newton on `g(x) = f^k(x) - x`.
pub fn newton(
    p: &Params,
    seed: SectionPoint,
    k: usize,
    cfg: &IntegratorConfig,
) -> std::result::Result<NewtonTrace, String> {
    let mut x = seed;
    let mut g = displacement(p, x, k, cfg).ok_or("return map undefined at the seed")?;
    let mut residuals = vec![norm2(g)];
    for _ in 0..MAX_NEWTON {
        if norm2(g) <= ACCEPT_RESIDUAL {
            return Ok(NewtonTrace {
                point: x,
                residuals,
                converged: true,
            });
        }
        let mut j = jacobian_k(p, x, k, cfg).ok_or("Jacobian stencil leaves the domain")?;
        j[0][0] -= 1.0;
        j[1][1] -= 1.0;
        let dx = solve2(j, g).ok_or("singular Newton matrix")?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial = SectionPoint::new(x.u - lambda * dx[0], x.v - lambda * dx[1]);
            if let Some(gt) = displacement(p, trial, k, cfg) {
                if norm2(gt) < norm2(g) {
                    accepted = Some((trial, gt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((nx, ng)) = accepted else {
            return Ok(NewtonTrace {
                point: x,
                residuals,
                converged: false,
            });
        };
        x = nx;
        g = ng;
        residuals.push(norm2(g));
    }
    let converged = norm2(g) <= ACCEPT_RESIDUAL;
    Ok(NewtonTrace {
        point: x,
        residuals,
        converged,
    })
}

fn divisors_below(k: usize) -> Vec<usize> {
    (1..k).filter(|d| k.is_multiple_of(*d)).collect()
}

/// Builds the orbit through a converged point, or explains the rejection.
fn certify(
    p: &Params,
    x0: SectionPoint,
    k: usize,
    cfg: &IntegratorConfig,
) -> std::result::Result<PeriodicOrbit, String> {
    let mut points = vec![x0];
    let mut flight_times = Vec::with_capacity(k);
    let mut cur = x0;
    for _ in 0..k {
        match first_return(p, cur, cfg).map_err(|e| e.to_string())? {
            ReturnResult::Returned { point, flight_time } => {
                flight_times.push(flight_time);
                cur = point;
                points.push(point);
            }
            other => return Err(format!("orbit return is {other:?}")),
        }
    }
    let end = points.pop().expect("k >= 1");
    let residual = end.dist(x0);
    if residual > ACCEPT_RESIDUAL {
        return Err(format!("residual {residual:e}"));
    }
    for d in divisors_below(k) {
        let gap = points[d].dist(x0);
        if gap < DIVISOR_TOL {
            return Err(format!("period divides {d} (|f^{d}(x) - x| = {gap:e})"));
        }
    }
    if let Some(i) = points.iter().position(|q| q.height(p) < MIN_HEIGHT) {
        return Err(format!("orbit point {i} lies on l_p"));
    }
    if let Some(i) = points
        .iter()
        .position(|&q| ydot_rate(p, embed(p, q)).abs() <= transversality_floor(embed(p, q)))
    {
        return Err(format!("orbit point {i} is not a transverse crossing"));
    }
    // Start at the point of smallest u so equal orbits print identically.
    let start = (0..k)
        .min_by(|&i, &j| points[i].u.total_cmp(&points[j].u))
        .expect("k >= 1");
    points.rotate_left(start);
    flight_times.rotate_left(start);
    let jac = jacobian_k(p, points[0], k, cfg).ok_or("Jacobian stencil leaves the domain")?;
    let residual = map_k(p, points[0], k, cfg)
        .ok_or("rotated orbit does not return")?
        .dist(points[0]);
    let (curve3d, closure_gap) =
        orbit_curve(p, &points, &flight_times, cfg).map_err(|e| e.to_string())?;
    Ok(PeriodicOrbit {
        params: *p,
        k,
        points,
        flight_times,
        residual,
        floquet_ratio: jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0],
        jacobian: jac,
        word: None,
        closure_gap,
        curve3d,
    })
}

/// Closed 3D polyline through the orbit, built return by return.
fn orbit_curve(
    p: &Params,
    points: &[SectionPoint],
    flight_times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<State3>, f64)> {
    let k = points.len();
    let mut curve = Vec::new();
    let mut gap: f64 = 0.0;
    for i in 0..k {
        let traj = integrate(p, embed(p, points[i]), cfg, 0.0, flight_times[i])?;
        for st in traj.steps() {
            for m in 0..CURVE_SUBSTEPS {
                curve.push(st.eval(st.t0 + st.h * m as f64 / CURVE_SUBSTEPS as f64));
            }
        }
        gap = gap.max(traj.last().1.dist(embed(p, points[(i + 1) % k])));
    }
    curve.push(curve[0]);
    Ok((curve, gap))
}

/// Newton from every seed; converged orbits are certified and merged.
pub fn find_periodic(
    p: &Params,
    k: usize,
    seeds: &[SectionPoint],
    cfg: &IntegratorConfig,
) -> Result<PeriodicSearch> {
    if k == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    let results: Vec<std::result::Result<PeriodicOrbit, SeedFailure>> = seeds
        .par_iter()
        .map(|&seed| {
            let fail = |reason: String| SeedFailure { seed, reason };
            let tr = newton(p, seed, k, cfg).map_err(|r| fail(r.to_string()))?;
            if !tr.converged {
                return Err(fail(format!(
                    "no convergence (residual {:e})",
                    tr.residuals.last().copied().unwrap_or(f64::NAN)
                )));
            }
            certify(p, tr.point, k, cfg).map_err(fail)
        })
        .collect();
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(o) => {
                if !orbits.iter().any(|q| q.same_orbit(&o)) {
                    orbits.push(o);
                }
            }
            Err(f) => failures.push(f),
        }
    }
    orbits.sort_by(|a, b| {
        a.points[0]
            .u
            .total_cmp(&b.points[0].u)
            .then(a.points[0].v.total_cmp(&b.points[0].v))
    });
    Ok(PeriodicSearch {
        k,
        orbits,
        failures,
    })
}

/// Seeds from near-recurrences of a long return-map run: the points `x_i`
/// with the smallest `|x_{i+k} - x_i|`.
pub fn recurrence_seeds(
    p: &Params,
    start: SectionPoint,
    n_iter: usize,
    k: usize,
    max_seeds: usize,
    cfg: &IntegratorConfig,
) -> Vec<SectionPoint> {
    let mut run = vec![start];
    let mut cur = start;
    for _ in 0..n_iter {
        match map_k(p, cur, 1, cfg) {
            Some(next) => {
                run.push(next);
                cur = next;
            }
            None => break,
        }
    }
    let mut cand: Vec<(f64, SectionPoint)> = (0..run.len().saturating_sub(k))
        .map(|i| (run[i].dist(run[i + k]), run[i]))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<SectionPoint> = Vec::new();
    for (_, x) in cand {
        if out.len() >= max_seeds {
            break;
        }
        if out.iter().all(|y| y.dist(x) > 1e-3) {
            out.push(x);
        }
    }
    out
}

/// The points of a return-map run started at `start`, after `skip` transients.
pub fn attractor_trace(
    p: &Params,
    start: SectionPoint,
    skip: usize,
    n: usize,
    cfg: &IntegratorConfig,
) -> Vec<SectionPoint> {
    let mut out = Vec::with_capacity(n);
    let mut cur = start;
    for i in 0..skip + n {
        match map_k(p, cur, 1, cfg) {
            Some(next) => cur = next,
            None => break,
        }
        if i >= skip {
            out.push(cur);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub center: SectionPoint,
    pub k: usize,
    pub loop_radius: f64,
    pub n_loop: usize,
    pub winding: i32,
    pub min_displacement: f64,
}

/// Degree of `x -> f^k(x) - x` along the closed curve `loop_at(s)`,
/// `s` in `[0, 1)`, sampled at `n_loop` points and refined by doubling up to
/// 4096 points until every angle increment is below `pi`.
pub fn loop_winding<L>(
    p: &Params,
    k: usize,
    loop_at: L,
    n_loop: usize,
    cfg: &IntegratorConfig,
) -> Result<(i32, usize, f64)>
where
    L: Fn(f64) -> SectionPoint + Sync,
{
    const MAX_LOOP: usize = 4096;
    let mut n = n_loop.max(8);
    loop {
        let samples: Vec<Option<(SectionPoint, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = loop_at(i as f64 / n as f64);
                if x.height(p) <= 0.0 {
                    return None;
                }
                map_k_timed(p, x, k, cfg).map(|(y, t)| (SectionPoint::new(y.u - x.u, y.v - x.v), t))
            })
            .collect();
        if let Some(index) = samples.iter().position(|s| s.is_none()) {
            return Err(Error::LoopHitsDiscontinuity { index });
        }
        let samples: Vec<(SectionPoint, f64)> =
            samples.into_iter().map(|s| s.expect("checked")).collect();
        for i in 0..n {
            if (samples[i].1 - samples[(i + 1) % n].1).abs() > MIN_TIME_JUMP {
                return Err(Error::LoopHitsDiscontinuity { index: i });
            }
        }
        let min_displacement = samples
            .iter()
            .map(|s| s.0.u.hypot(s.0.v))
            .fold(f64::INFINITY, f64::min);
        if min_displacement <= 10.0 * ACCEPT_RESIDUAL {
            return Err(Error::LoopNotIsolating { min_displacement });
        }
        let angles: Vec<f64> = samples.iter().map(|s| s.0.v.atan2(s.0.u)).collect();
        let mut total = 0.0;
        let mut coarse = false;
        for i in 0..n {
            let mut d = angles[(i + 1) % n] - angles[i];
            d -= TAU * (d / TAU).round();
            if d.abs() >= std::f64::consts::PI * 0.999 {
                coarse = true;
                break;
            }
            total += d;
        }
        if !coarse {
            return Ok(((total / TAU).round() as i32, n, min_displacement));
        }
        if n >= MAX_LOOP {
            return Err(Error::LoopTooCoarse { n_loop: n });
        }
        n *= 2;
    }
}

pub fn circle(center: SectionPoint, radius: f64) -> impl Fn(f64) -> SectionPoint + Sync {
    move |s| {
        let th = TAU * s;
        SectionPoint::new(center.u + radius * th.cos(), center.v + radius * th.sin())
    }
}

/// Axis-aligned ellipse with semi-axes `ru`, `rv`.
pub fn ellipse(center: SectionPoint, ru: f64, rv: f64) -> impl Fn(f64) -> SectionPoint + Sync {
    move |s| {
        let th = TAU * s;
        SectionPoint::new(center.u + ru * th.cos(), center.v + rv * th.sin())
    }
}

/// Winding of `f^k - id` on a circle around `points[0]` of the orbit.
pub fn fixed_point_index(
    p: &Params,
    orbit: &PeriodicOrbit,
    loop_radius: f64,
    n_loop: usize,
    cfg: &IntegratorConfig,
) -> Result<IndexReport> {
    if !(loop_radius > 0.0) {
        return Err(Error::InvalidArgument(
            "loop radius must be positive".into(),
        ));
    }
    let center = orbit.points[0];
    let (winding, n, min_displacement) =
        loop_winding(p, orbit.k, circle(center, loop_radius), n_loop, cfg)?;
    Ok(IndexReport {
        center,
        k: orbit.k,
        loop_radius,
        n_loop: n,
        winding,
        min_displacement,
    })
}

/// Symbols of the orbit points under the partition.
pub fn attach_word(orbit: &PeriodicOrbit, part: &Partition2) -> Result<Vec<u8>> {
    orbit
        .points
        .iter()
        .enumerate()
        .map(|(index, &x)| {
            part.classify(x)
                .digit()
                .ok_or(Error::UndecidedPoint { index })
        })
        .collect()
}

/// Whether the word can stand for an orbit of minimal period `k`.
pub fn word_has_period(word: &[u8], k: usize) -> bool {
    word.len() == k && cyclic_period(word) == k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub params: Params,
    pub k: usize,
    pub points: Vec<[f64; 2]>,
    pub residual: f64,
    pub floquet_ratio: f64,
    pub multipliers: [(f64, f64); 2],
    pub word: Option<String>,
    pub index: Option<i32>,
    pub period_time: f64,
}

impl OrbitRecord {
    pub fn new(o: &PeriodicOrbit, index: Option<i32>) -> Self {
        Self {
            params: o.params,
            k: o.k,
            points: o.points.iter().map(|q| [q.u, q.v]).collect(),
            residual: o.residual,
            floquet_ratio: o.floquet_ratio,
            multipliers: o.multipliers(),
            word: o
                .word
                .as_ref()
                .map(|w| w.iter().map(|d| char::from(b'0' + d)).collect()),
            index,
            period_time: o.period_time(),
        }
    }
}

/// CSV `orbit,x,y,z` of the closed curves.
pub fn curves_csv(orbits: &[PeriodicOrbit]) -> String {
    let mut out = String::from("orbit,x,y,z\n");
    for (i, o) in orbits.iter().enumerate() {
        for s in &o.curve3d {
            let _ = writeln!(
                out,
                "{i},{},{},{}",
                crate::fmt17(s.x),
                crate::fmt17(s.y),
                crate::fmt17(s.z)
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_divisors() {
        let x = solve2([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve2([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
        assert_eq!(divisors_below(12), vec![1, 2, 3, 4, 6]);
        assert!(divisors_below(1).is_empty());
    }

    #[test]
    fn word_periods() {
        assert!(word_has_period(&[1, 2], 2));
        assert!(!word_has_period(&[1, 2, 1, 2], 4));
        assert!(word_has_period(&[2], 1));
    }
}
