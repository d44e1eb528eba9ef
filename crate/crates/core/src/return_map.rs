//! First-return map `f_p` on `H_p`, its discontinuity curves and the two-piece
//! symbolic partition.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{fixed_points, Params};
use crate::integrator::{
    next_section_crossing, CrossingOutcome, DirectionFilter, IntegratorConfig,
};
use crate::section::{embed, SectionPoint};

/// Image heights `|v - u/a|` below this count as landing on `l_p`.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Points this close to `l_p` are never coded.
pub const CODING_BOUNDARY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReturnResult {
    Returned {
        point: SectionPoint,
        flight_time: f64,
    },
    FixedPointLimit,
    BlowUp,
    NearTangent {
        point: SectionPoint,
        flight_time: f64,
    },
}

impl ReturnResult {
    pub fn point(&self) -> Option<SectionPoint> {
        match *self {
            ReturnResult::Returned { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn flight_time(&self) -> Option<f64> {
        match *self {
            ReturnResult::Returned { flight_time, .. }
            | ReturnResult::NearTangent { flight_time, .. } => Some(flight_time),
            _ => None,
        }
    }
}

pub fn first_return(p: &Params, sp: SectionPoint, cfg: &IntegratorConfig) -> Result<ReturnResult> {
    if !sp.in_closed_section(p, CODING_BOUNDARY) {
        return Err(Error::InvalidArgument(format!(
            "({}, {}) is below l_p",
            sp.u, sp.v
        )));
    }
    Ok(
        match next_section_crossing(p, embed(p, sp), cfg, DirectionFilter::Down)? {
            CrossingOutcome::Crossing(ev) => ReturnResult::Returned {
                point: ev.point,
                flight_time: ev.t,
            },
            CrossingOutcome::NearTangent(ev) => ReturnResult::NearTangent {
                point: ev.point,
                flight_time: ev.t,
            },
            CrossingOutcome::FixedPointLimit { .. } => ReturnResult::FixedPointLimit,
            CrossingOutcome::BlowUp { .. } => ReturnResult::BlowUp,
        },
    )
}

/// `k` successive returns, stopping at the first outcome that is not `Returned`.
pub fn iterate(
    p: &Params,
    sp: SectionPoint,
    k: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<ReturnResult>> {
    if k == 0 {
        return Err(Error::InvalidArgument("iterate needs k >= 1".into()));
    }
    let mut out = Vec::with_capacity(k);
    let mut cur = sp;
    for _ in 0..k {
        let r = first_return(p, cur, cfg)?;
        out.push(r);
        match r.point() {
            Some(next) => cur = next,
            None => break,
        }
    }
    Ok(out)
}

/// `f^k(sp)`, or `None` when some return is not a clean transverse crossing.
pub fn map_k(
    p: &Params,
    sp: SectionPoint,
    k: usize,
    cfg: &IntegratorConfig,
) -> Option<SectionPoint> {
    let mut cur = sp;
    for _ in 0..k {
        cur = first_return(p, cur, cfg).ok()?.point()?;
    }
    Some(cur)
}

/// `f^k(sp)` with the total flight time; every return must be transverse.
pub fn map_k_timed(
    p: &Params,
    sp: SectionPoint,
    k: usize,
    cfg: &IntegratorConfig,
) -> Option<(SectionPoint, f64)> {
    let mut cur = sp;
    let mut total = 0.0;
    for _ in 0..k {
        match first_return(p, cur, cfg).ok()? {
            ReturnResult::Returned { point, flight_time } => {
                cur = point;
                total += flight_time;
            }
            _ => return None,
        }
    }
    Some((cur, total))
}

/// Rectangular window of the chart scanned along rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub spacing: f64,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > self.u_min && self.v_max > self.v_min && self.spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "empty scan window {self:?}"
            )));
        }
        Ok(())
    }

    fn counts(&self) -> (usize, usize) {
        let nu = ((self.u_max - self.u_min) / self.spacing).round() as usize + 1;
        let nv = ((self.v_max - self.v_min) / self.spacing).round() as usize + 1;
        (nu.max(2), nv.max(2))
    }

    fn u(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.spacing
    }

    fn v(&self, j: usize) -> f64 {
        self.v_min + j as f64 * self.spacing
    }

    /// Scan lines: rows at fixed `v` then columns at fixed `u`.
    fn lines(&self) -> Vec<Vec<SectionPoint>> {
        let (nu, nv) = self.counts();
        let mut out = Vec::with_capacity(nu + nv);
        for j in 0..nv {
            out.push(
                (0..nu)
                    .map(|i| SectionPoint::new(self.u(i), self.v(j)))
                    .collect(),
            );
        }
        for i in 0..nu {
            out.push(
                (0..nv)
                    .map(|j| SectionPoint::new(self.u(i), self.v(j)))
                    .collect(),
            );
        }
        out
    }

    fn near_edge(&self, sp: SectionPoint, margin: f64) -> bool {
        sp.u < self.u_min + margin
            || sp.u > self.u_max - margin
            || sp.v < self.v_min + margin
            || sp.v > self.v_max - margin
    }
}

/// Smallest flight-time jump treated as a skipped or gained crossing.
pub const MIN_TIME_JUMP: f64 = 0.5;

/// `f^k(sp)` with the total flight time; the last return may be near-tangent.
fn image_k(
    p: &Params,
    sp: SectionPoint,
    k: usize,
    cfg: &IntegratorConfig,
) -> Option<(SectionPoint, f64)> {
    let mut cur = sp;
    let mut total = 0.0;
    for i in 0..k {
        match first_return(p, cur, cfg).ok()? {
            ReturnResult::Returned { point, flight_time } => {
                cur = point;
                total += flight_time;
            }
            ReturnResult::NearTangent { point, flight_time } if i + 1 == k => {
                cur = point;
                total += flight_time;
            }
            _ => return None,
        }
    }
    Some((cur, total))
}

type Sample = (SectionPoint, Option<(SectionPoint, f64)>);

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

/// Adjacent sample pairs whose images or flight times jump by more than ten
/// times the line median.
fn jump_pairs(samples: &[Sample]) -> Vec<usize> {
    let pairs: Vec<(usize, f64, f64)> = samples
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| match (w[0].1, w[1].1) {
            (Some(a), Some(b)) => Some((i, a.0.dist(b.0), (a.1 - b.1).abs())),
            _ => None,
        })
        .collect();
    let (Some(md), Some(mt)) = (
        median(pairs.iter().map(|x| x.1).collect()),
        median(pairs.iter().map(|x| x.2).collect()),
    ) else {
        return Vec::new();
    };
    pairs
        .iter()
        .filter(|&&(_, d, dt)| d > 10.0 * md || dt > (10.0 * mt).max(MIN_TIME_JUMP))
        .map(|&(i, _, _)| i)
        .collect()
}

/// Bisect a jump of `f^k` until the image of the midpoint lies within
/// `BOUNDARY_TOL` of `l_p`. The half keeping the larger flight-time gap (or,
/// failing that, the larger image gap) is retained.
fn refine_jump(
    p: &Params,
    k: usize,
    mut lo: (SectionPoint, (SectionPoint, f64)),
    mut hi: (SectionPoint, (SectionPoint, f64)),
    cfg: &IntegratorConfig,
) -> Option<SectionPoint> {
    for _ in 0..80 {
        let mid = lo.0.lerp(hi.0, 0.5);
        if mid == lo.0 || mid == hi.0 {
            break;
        }
        let img = image_k(p, mid, k, cfg)?;
        if img.0.height(p).abs() < BOUNDARY_TOL {
            return Some(mid);
        }
        let (dt_lo, dt_hi) = ((img.1 - lo.1 .1).abs(), (img.1 - hi.1 .1).abs());
        let keep_lo = if (dt_lo - dt_hi).abs() > MIN_TIME_JUMP {
            dt_lo > dt_hi
        } else {
            img.0.dist(lo.1 .0) > img.0.dist(hi.1 .0)
        };
        if keep_lo {
            hi = (mid, img);
        } else {
            lo = (mid, img);
        }
    }
    None
}

/// Points where `f^k` jumps, refined until their `k`-th image sits on `l_p`.
fn scan_jumps(p: &Params, grid: &ScanGrid, k: usize, cfg: &IntegratorConfig) -> Vec<SectionPoint> {
    let lines = grid.lines();
    let per_line: Vec<Vec<SectionPoint>> = lines
        .par_iter()
        .map(|line| {
            let samples: Vec<Sample> = line
                .iter()
                .map(|&sp| {
                    let img = if sp.height(p) > grid.spacing * 1e-3 {
                        image_k(p, sp, k, cfg)
                    } else {
                        None
                    };
                    (sp, img)
                })
                .collect();
            jump_pairs(&samples)
                .into_iter()
                .filter_map(|i| {
                    let lo = (samples[i].0, samples[i].1?);
                    let hi = (samples[i + 1].0, samples[i + 1].1?);
                    refine_jump(p, k, lo, hi, cfg)
                })
                .collect()
        })
        .collect();
    per_line.into_iter().flatten().collect()
}

/// Groups points into chains joined by gaps no longer than `cap`, each
/// ordered as a polyline by nearest-neighbour walk from an extreme point.
pub fn chain_polylines(points: &[SectionPoint], cap: f64) -> Vec<Vec<SectionPoint>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].dist(points[j]) <= cap {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
        .into_iter()
        .map(|g| {
            let pts: Vec<SectionPoint> = g.iter().map(|&i| points[i]).collect();
            order_polyline(&pts)
        })
        .collect()
}

fn order_polyline(pts: &[SectionPoint]) -> Vec<SectionPoint> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let far = |from: SectionPoint| {
        (0..pts.len())
            .max_by(|&i, &j| from.dist(pts[i]).total_cmp(&from.dist(pts[j])))
            .unwrap_or(0)
    };
    let start = far(pts[far(pts[0])]);
    let start = far(pts[start]);
    let mut used = vec![false; pts.len()];
    let mut out = Vec::with_capacity(pts.len());
    let mut cur = start;
    used[cur] = true;
    out.push(pts[cur]);
    for _ in 1..pts.len() {
        let next = (0..pts.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| pts[cur].dist(pts[i]).total_cmp(&pts[cur].dist(pts[j])))
            .expect("unused point remains");
        used[next] = true;
        out.push(pts[next]);
        cur = next;
    }
    out
}

/// Distance from `q` to a polyline, with the index of the nearest segment and
/// the signed side (positive on the left of the traversal direction).
pub fn polyline_distance(poly: &[SectionPoint], q: SectionPoint) -> Option<(f64, usize, f64)> {
    if poly.len() == 1 {
        return Some((poly[0].dist(q), 0, 0.0));
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for (i, w) in poly.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let (dx, dy) = (b.u - a.u, b.v - a.v);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((q.u - a.u) * dx + (q.v - a.v) * dy) / len2).clamp(0.0, 1.0)
        };
        let foot = a.lerp(b, t);
        let d = foot.dist(q);
        let side = dx * (q.v - a.v) - dy * (q.u - a.u);
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, i, side));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityStructure {
    /// `delta`, ordered from its boundary end towards `P0`.
    pub delta_polyline: Vec<SectionPoint>,
    /// Foot on `l_p` of the boundary end of `delta`.
    pub delta0: SectionPoint,
    /// Interior endpoint of `delta`, when the scan resolves one.
    pub delta_tip: Option<SectionPoint>,
    /// Point of `delta` whose image is closest to `P_In`.
    pub p0_estimate: SectionPoint,
    pub rho_polyline: Vec<SectionPoint>,
    pub resolution: f64,
    /// Every chained component of the discontinuity set of `f`.
    pub components: Vec<Vec<SectionPoint>>,
    /// Every chained component of `f^{-1}(delta)` found by the second scan.
    pub rho_candidates: Vec<Vec<SectionPoint>>,
}

fn boundary_distance(p: &Params, sp: SectionPoint) -> f64 {
    sp.height(p).abs() / (1.0 + 1.0 / (p.a * p.a)).sqrt()
}

/// Foot of the perpendicular from `sp` onto `l_p`.
fn onto_boundary(p: &Params, sp: SectionPoint) -> SectionPoint {
    let (nu, nv) = (-1.0 / p.a, 1.0);
    let n2 = nu * nu + nv * nv;
    let h = sp.height(p);
    SectionPoint::new(sp.u - h * nu / n2, sp.v - h * nv / n2)
}

fn interior_ends(p: &Params, grid: &ScanGrid, poly: &[SectionPoint]) -> (bool, bool) {
    let margin = 3.0 * grid.spacing;
    let interior =
        |sp: SectionPoint| boundary_distance(p, sp) > margin && !grid.near_edge(sp, margin);
    (interior(poly[0]), interior(*poly.last().expect("nonempty")))
}

/// Smallest distance from the images of `poly` to `target`, with the point attaining it.
fn closest_image(
    p: &Params,
    poly: &[SectionPoint],
    target: SectionPoint,
    cfg: &IntegratorConfig,
) -> Option<(f64, SectionPoint)> {
    poly.iter()
        .filter_map(|&sp| image_k(p, sp, 1, cfg).map(|(img, _)| (img.dist(target), sp)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Scans `grid` for discontinuities of `f` and picks out `delta`: the
/// chained component with exactly one interior endpoint or, when the scan
/// resolves no such endpoint, the component whose images come closest to
/// `P_In`. A second scan of `f^2` yields the preimage curves of `delta`;
/// `rho` is the one separating the `P_In` side of `l_p` from `P0` that lies
/// nearest to `P_In`.
pub fn find_discontinuities(
    p: &Params,
    grid: &ScanGrid,
    cfg: &IntegratorConfig,
) -> Result<DiscontinuityStructure> {
    grid.validate()?;
    let cap = 5.0 * grid.spacing;
    let jumps = scan_jumps(p, grid, 1, cfg);
    if jumps.is_empty() {
        return Err(Error::NoDiscontinuityFound);
    }
    let components = chain_polylines(&jumps, cap);
    let p_in = fixed_points(p)
        .map(|f| SectionPoint::new(f.p_in.x, f.p_in.z))
        .unwrap_or_default();

    let mut with_tip: Option<(Vec<SectionPoint>, SectionPoint)> = None;
    for comp in components.iter().filter(|c| c.len() >= 3) {
        let (first, last) = interior_ends(p, grid, comp);
        if first == last {
            continue;
        }
        if with_tip.as_ref().is_none_or(|(d, _)| comp.len() > d.len()) {
            let mut poly = comp.clone();
            if first {
                poly.reverse();
            }
            let tip = *poly.last().expect("nonempty");
            with_tip = Some((poly, tip));
        }
    }
    let (delta_polyline, delta_tip) = match with_tip {
        Some((poly, tip)) => (poly, Some(tip)),
        None => {
            let best = components
                .iter()
                .filter(|c| c.len() >= 3)
                .filter_map(|c| closest_image(p, c, p_in, cfg).map(|(d, _)| (d, c)))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let Some((_, comp)) = best else {
                return Err(Error::NoDiscontinuityFound);
            };
            let mut poly = comp.clone();
            if boundary_distance(p, poly[0]) > boundary_distance(p, *poly.last().expect("nonempty"))
            {
                poly.reverse();
            }
            (poly, None)
        }
    };
    let delta0 = onto_boundary(p, delta_polyline[0]);
    let p0_estimate = match delta_tip {
        Some(tip) => tip,
        None => closest_image(p, &delta_polyline, p_in, cfg)
            .map(|x| x.1)
            .unwrap_or(delta_polyline[0]),
    };

    let near_delta = 2.0 * grid.spacing;
    let second: Vec<SectionPoint> = scan_jumps(p, grid, 2, cfg)
        .into_par_iter()
        .filter(|&sp| {
            let Some(img) = map_k(p, sp, 1, cfg) else {
                return false;
            };
            img.height(p).abs() > BOUNDARY_TOL
                && polyline_distance(&delta_polyline, img).is_some_and(|(d, _, _)| d < near_delta)
        })
        .collect();
    let rho_candidates: Vec<Vec<SectionPoint>> = chain_polylines(&second, cap)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .collect();
    let p_in_ref = p_in_reference(p, grid.spacing);
    let rho_polyline = rho_candidates
        .iter()
        .filter(|c| separates(c, p_in_ref, p0_estimate, grid.spacing))
        .min_by(|a, b| {
            let da = polyline_distance(a, p_in_ref)
                .map(|x| x.0)
                .unwrap_or(f64::INFINITY);
            let db = polyline_distance(b, p_in_ref)
                .map(|x| x.0)
                .unwrap_or(f64::INFINITY);
            da.total_cmp(&db)
        })
        .cloned()
        .unwrap_or_default();
    Ok(DiscontinuityStructure {
        delta_polyline,
        delta0,
        delta_tip,
        p0_estimate,
        rho_polyline,
        resolution: grid.spacing,
        components,
        rho_candidates,
    })
}

/// A point just inside `H_p` next to `P_In`, along the inward normal of `l_p`.
pub fn p_in_reference(p: &Params, eps: f64) -> SectionPoint {
    let fp = fixed_points(p).map(|f| f.p_in).unwrap_or_default();
    let (nu, nv) = (-1.0 / p.a, 1.0);
    let n = (nu * nu + nv * nv).sqrt();
    SectionPoint::new(fp.x + 3.0 * eps * nu / n, fp.z + 3.0 * eps * nv / n)
}

fn side_of(poly: &[SectionPoint], q: SectionPoint) -> f64 {
    polyline_distance(poly, q).map(|(_, _, s)| s).unwrap_or(0.0)
}

fn separates(poly: &[SectionPoint], a: SectionPoint, b: SectionPoint, band: f64) -> bool {
    let da = polyline_distance(poly, a).map(|x| x.0).unwrap_or(0.0);
    let db = polyline_distance(poly, b).map(|x| x.0).unwrap_or(0.0);
    da > band && db > band && side_of(poly, a).signum() != side_of(poly, b).signum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symbol {
    One,
    Two,
    Undecided,
}

impl Symbol {
    pub fn digit(self) -> Option<u8> {
        match self {
            Symbol::One => Some(1),
            Symbol::Two => Some(2),
            Symbol::Undecided => None,
        }
    }
}

/// `D_1`/`D_2` coding by the side of the `rho` polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition2 {
    pub params: Params,
    pub rho_polyline: Vec<SectionPoint>,
    pub resolution: f64,
    pub p_in_reference: SectionPoint,
    pub p0: SectionPoint,
    /// Sign of the side test that corresponds to symbol 1.
    one_side: f64,
}

impl Partition2 {
    pub fn new(
        p: &Params,
        rho_polyline: Vec<SectionPoint>,
        resolution: f64,
        p0: SectionPoint,
    ) -> Result<Self> {
        if rho_polyline.len() < 2 {
            return Err(Error::InvalidArgument(
                "rho polyline needs at least two points".into(),
            ));
        }
        let p_in_ref = p_in_reference(p, resolution);
        if !separates(&rho_polyline, p_in_ref, p0, resolution) {
            return Err(Error::InvalidArgument(
                "rho polyline does not separate P_In from P0".into(),
            ));
        }
        Ok(Self {
            params: *p,
            one_side: side_of(&rho_polyline, p_in_ref).signum(),
            rho_polyline,
            resolution,
            p_in_reference: p_in_ref,
            p0,
        })
    }

    pub fn from_structure(
        p: &Params,
        ds: &DiscontinuityStructure,
        p0: SectionPoint,
    ) -> Result<Self> {
        Self::new(p, ds.rho_polyline.clone(), ds.resolution, p0)
    }

    pub fn classify(&self, sp: SectionPoint) -> Symbol {
        if sp.height(&self.params) < CODING_BOUNDARY {
            return Symbol::Undecided;
        }
        match polyline_distance(&self.rho_polyline, sp) {
            Some((d, _, side)) if d > self.resolution => {
                if side.signum() == self.one_side {
                    Symbol::One
                } else {
                    Symbol::Two
                }
            }
            _ => Symbol::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicItinerary {
    pub word: Vec<u8>,
    pub start: SectionPoint,
    pub valid_length: usize,
}

pub fn itinerary(
    p: &Params,
    part: &Partition2,
    sp: SectionPoint,
    length: usize,
    cfg: &IntegratorConfig,
) -> SymbolicItinerary {
    let mut word = Vec::with_capacity(length);
    let mut cur = sp;
    for i in 0..length {
        let Some(d) = part.classify(cur).digit() else {
            break;
        };
        word.push(d);
        if i + 1 == length {
            break;
        }
        match map_k(p, cur, 1, cfg) {
            Some(next) => cur = next,
            None => break,
        }
    }
    SymbolicItinerary {
        valid_length: word.len(),
        word,
        start: sp,
    }
}

/// Return-map samples as CSV `u,v,u1,v1,flight_time,symbol`.
pub fn samples_csv(
    p: &Params,
    points: &[SectionPoint],
    part: Option<&Partition2>,
    cfg: &IntegratorConfig,
) -> Result<String> {
    let rows: Vec<Option<(SectionPoint, f64)>> = points
        .par_iter()
        .map(|&sp| match first_return(p, sp, cfg) {
            Ok(ReturnResult::Returned { point, flight_time }) => Some((point, flight_time)),
            _ => None,
        })
        .collect();
    let mut out = String::from("u,v,u1,v1,flight_time,symbol\n");
    for (sp, row) in points.iter().zip(rows) {
        let Some((img, t)) = row else { continue };
        let sym = part
            .and_then(|pt| pt.classify(*sp).digit())
            .map(|d| d.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{sym}",
            crate::fmt17(sp.u),
            crate::fmt17(sp.v),
            crate::fmt17(img.u),
            crate::fmt17(img.v),
            crate::fmt17(t)
        );
    }
    Ok(out)
}

/// Polylines as CSV `curve_id,u,v`.
pub fn polylines_csv(curves: &[(&str, &[SectionPoint])]) -> String {
    let mut out = String::from("curve_id,u,v\n");
    for (id, pts) in curves {
        for sp in *pts {
            let _ = writeln!(out, "{id},{},{}", crate::fmt17(sp.u), crate::fmt17(sp.v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chaining_splits_at_gaps() {
        let mut pts: Vec<SectionPoint> = (0..10)
            .map(|i| SectionPoint::new(i as f64 * 0.1, 0.0))
            .collect();
        pts.extend((0..5).map(|i| SectionPoint::new(5.0 + i as f64 * 0.1, 1.0)));
        pts.swap(2, 7);
        let chains = chain_polylines(&pts, 0.15);
        assert_eq!(chains.len(), 2);
        let long = chains.iter().find(|c| c.len() == 10).unwrap();
        for w in long.windows(2) {
            assert!((w[0].dist(w[1]) - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn polyline_side_and_distance() {
        let poly = [SectionPoint::new(0.0, 0.0), SectionPoint::new(1.0, 0.0)];
        let (d, i, s) = polyline_distance(&poly, SectionPoint::new(0.5, 2.0)).unwrap();
        assert_eq!((d, i), (2.0, 0));
        assert!(s > 0.0);
        assert!(
            polyline_distance(&poly, SectionPoint::new(0.5, -1.0))
                .unwrap()
                .2
                < 0.0
        );
    }

    #[test]
    fn partition_needs_separation() {
        let p = Params::new(0.468, 0.3, 4.615).unwrap();
        let rho = vec![SectionPoint::new(-0.5, -1.0), SectionPoint::new(-0.5, 1.0)];
        let part = Partition2::new(&p, rho.clone(), 0.01, SectionPoint::new(-1.5, 0.0)).unwrap();
        assert_eq!(part.classify(SectionPoint::new(-0.1, 0.0)), Symbol::One);
        assert_eq!(part.classify(SectionPoint::new(-1.5, 0.0)), Symbol::Two);
        assert_eq!(
            part.classify(SectionPoint::new(-0.505, 0.0)),
            Symbol::Undecided
        );
        assert!(Partition2::new(&p, rho, 0.01, SectionPoint::new(-0.2, 0.0)).is_err());
    }

    #[test]
    fn empty_grid_is_rejected() {
        let grid = ScanGrid {
            u_min: 1.0,
            u_max: 1.0,
            v_min: 0.0,
            v_max: 1.0,
            spacing: 0.1,
        };
        assert!(grid.validate().is_err());
    }
}
