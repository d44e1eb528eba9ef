//! Knot typing of closed polylines: Gauss codes, Alexander polynomials,
//! torus-knot matching, and orbits of the two-strip `L(0,1)` template.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::State3;

/// Largest number of segments examined for crossings.
pub const MAX_SEGMENTS: usize = 20_000;
/// Endpoint gap below which a polyline counts as closed.
pub const CLOSURE_TOL: f64 = 1e-6;
const MIN_CROSSING_SIN: f64 = 1e-3;
const MIN_DEPTH_GAP: f64 = 1e-9;
const VERTEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussEntry {
    pub crossing: usize,
    pub over: bool,
    pub sign: i8,
}

/// Signed over/under crossing labels in traversal order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussCode {
    pub entries: Vec<GaussEntry>,
}

impl GaussCode {
    pub fn crossing_count(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.crossing_count();
        if !self.entries.len().is_multiple_of(2) {
            return Err(Error::DegenerateDiagram(
                "odd number of crossing visits".into(),
            ));
        }
        let mut seen = vec![(0u8, 0u8, 0i8); n];
        for e in &self.entries {
            let Some(slot) = seen.get_mut(e.crossing) else {
                return Err(Error::DegenerateDiagram(format!(
                    "crossing id {} out of range",
                    e.crossing
                )));
            };
            if e.over {
                slot.0 += 1;
            } else {
                slot.1 += 1;
            }
            if slot.2 != 0 && slot.2 != e.sign {
                return Err(Error::DegenerateDiagram(format!(
                    "inconsistent sign at crossing {}",
                    e.crossing
                )));
            }
            slot.2 = e.sign;
        }
        if let Some(id) = seen
            .iter()
            .position(|s| s.0 != 1 || s.1 != 1 || s.2.abs() != 1)
        {
            return Err(Error::DegenerateDiagram(format!(
                "crossing {id} is not visited once over and once under"
            )));
        }
        Ok(())
    }

    /// Removes crossings whose two visits are consecutive (Reidemeister I
    /// kinks) until none remain, relabelling the rest densely.
    pub fn reduce(&self) -> GaussCode {
        let mut e = self.entries.clone();
        loop {
            let n = e.len();
            if n == 0 {
                break;
            }
            let kink = (0..n).find(|&i| e[i].crossing == e[(i + 1) % n].crossing);
            let Some(i) = kink else { break };
            let id = e[i].crossing;
            e.retain(|x| x.crossing != id);
        }
        let mut map = std::collections::HashMap::new();
        for x in &mut e {
            let next = map.len();
            x.crossing = *map.entry(x.crossing).or_insert(next);
        }
        GaussCode { entries: e }
    }

    pub fn mirror(&self) -> GaussCode {
        GaussCode {
            entries: self
                .entries
                .iter()
                .map(|e| GaussEntry {
                    crossing: e.crossing,
                    over: !e.over,
                    sign: -e.sign,
                })
                .collect(),
        }
    }
}

/// Integer polynomial in `t`, lowest degree 0 and positive leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlexPoly {
    pub coeffs: Vec<i64>,
}

impl AlexPoly {
    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// Normalizes by stripping powers of `t` and fixing the sign.
    pub fn from_coeffs(mut c: Vec<i64>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        let lead = c.iter().position(|&x| x != 0).unwrap_or(c.len());
        c.drain(..lead);
        if c.last().is_some_and(|&x| x < 0) {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn at_one(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }

    /// Palindromic with `Δ(1) = ±1`.
    pub fn is_admissible(&self) -> bool {
        self.is_palindromic() && self.at_one().abs() == 1
    }
}

impl fmt::Display for AlexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let m = c.unsigned_abs();
            match (d, m) {
                (0, _) => write!(f, "{m}")?,
                (1, 1) => write!(f, "t")?,
                (1, _) => write!(f, "{m}t")?,
                (_, 1) => write!(f, "t^{d}")?,
                _ => write!(f, "{m}t^{d}")?,
            }
            first = false;
        }
        Ok(())
    }
}

fn basis(d: State3) -> (State3, State3, State3) {
    let d = d.normalized();
    let trial = if d.x.abs() < 0.9 {
        State3::new(1.0, 0.0, 0.0)
    } else {
        State3::new(0.0, 1.0, 0.0)
    };
    let u = d.cross(trial).normalized();
    let w = d.cross(u);
    (u, w, d)
}

/// Closes the polyline if needed and thins it to at most `MAX_SEGMENTS`.
fn prepared(curve: &[State3]) -> Result<Vec<State3>> {
    if curve.len() < 4 {
        return Err(Error::InvalidArgument(
            "curve needs at least four vertices".into(),
        ));
    }
    let gap = curve[0].dist(*curve.last().expect("nonempty"));
    if gap >= CLOSURE_TOL {
        return Err(Error::InvalidArgument(format!(
            "curve is not closed (gap {gap:e})"
        )));
    }
    let scale = curve.iter().map(|s| s.max_abs()).fold(1.0, f64::max);
    let mut pts: Vec<State3> = Vec::with_capacity(curve.len());
    for &s in &curve[..curve.len() - 1] {
        if pts.last().is_none_or(|l: &State3| l.dist(s) > 1e-9 * scale) {
            pts.push(s);
        }
    }
    while pts.len() > 1 && pts[0].dist(*pts.last().expect("nonempty")) <= 1e-9 * scale {
        pts.pop();
    }
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(
            "curve has fewer than three distinct vertices".into(),
        ));
    }
    if pts.len() > MAX_SEGMENTS {
        let n = pts.len();
        pts = (0..MAX_SEGMENTS)
            .map(|i| pts[i * n / MAX_SEGMENTS])
            .collect();
    }
    Ok(pts)
}

struct Passage {
    pos: f64,
    crossing: usize,
    over: bool,
}

/// Diagram of a closed polyline (first vertex repeated at the end) seen
/// from `+projection`.
pub fn gauss_code(curve: &[State3], projection: State3) -> Result<GaussCode> {
    if !(projection.norm() > 0.0) {
        return Err(Error::InvalidArgument(
            "projection direction must be nonzero".into(),
        ));
    }
    let pts = prepared(curve)?;
    let n = pts.len();
    let (u, w, d) = basis(projection);
    let q: Vec<(f64, f64, f64)> = pts.iter().map(|s| (s.dot(u), s.dot(w), s.dot(d))).collect();
    let seg = |i: usize| (q[i], q[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| seg(i).0 .0.min(seg(i).1 .0);
    let xmax = |i: usize| seg(i).0 .0.max(seg(i).1 .0);
    order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)));

    let mut passages = Vec::new();
    let mut signs = Vec::new();
    for (oi, &i) in order.iter().enumerate() {
        let (a0, a1) = seg(i);
        let top = xmax(i);
        for &j in &order[oi + 1..] {
            if xmin(j) > top {
                break;
            }
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b0, b1) = seg(j);
            let r = (a1.0 - a0.0, a1.1 - a0.1);
            let s = (b1.0 - b0.0, b1.1 - b0.1);
            let rxs = r.0 * s.1 - r.1 * s.0;
            let qp = (b0.0 - a0.0, b0.1 - a0.1);
            if rxs == 0.0 {
                continue;
            }
            let ta = (qp.0 * s.1 - qp.1 * s.0) / rxs;
            let tb = (qp.0 * r.1 - qp.1 * r.0) / rxs;
            if !(0.0..=1.0).contains(&ta) || !(0.0..=1.0).contains(&tb) {
                continue;
            }
            if ta.min(1.0 - ta) < VERTEX_TOL || tb.min(1.0 - tb) < VERTEX_TOL {
                return Err(Error::NonGenericProjection(format!(
                    "crossing at a vertex of segments {i} and {j}"
                )));
            }
            let sin = rxs / ((r.0 * r.0 + r.1 * r.1).sqrt() * (s.0 * s.0 + s.1 * s.1).sqrt());
            if sin.abs() < MIN_CROSSING_SIN {
                return Err(Error::NonGenericProjection(format!(
                    "near-parallel crossing of segments {i} and {j}"
                )));
            }
            let ha = a0.2 + ta * (a1.2 - a0.2);
            let hb = b0.2 + tb * (b1.2 - b0.2);
            if (ha - hb).abs() < MIN_DEPTH_GAP {
                return Err(Error::NonGenericProjection(format!(
                    "segments {i} and {j} meet in space"
                )));
            }
            let a_over = ha > hb;
            let id = signs.len();
            // (over x under) . d, with (u, w, d) right-handed
            let sign = if a_over { rxs.signum() } else { -rxs.signum() } as i8;
            signs.push(sign);
            passages.push(Passage {
                pos: i as f64 + ta,
                crossing: id,
                over: a_over,
            });
            passages.push(Passage {
                pos: j as f64 + tb,
                crossing: id,
                over: !a_over,
            });
        }
    }
    passages.sort_by(|a, b| a.pos.total_cmp(&b.pos));
    let mut relabel = vec![usize::MAX; signs.len()];
    let mut next = 0;
    let entries = passages
        .iter()
        .map(|p| {
            if relabel[p.crossing] == usize::MAX {
                relabel[p.crossing] = next;
                next += 1;
            }
            GaussEntry {
                crossing: relabel[p.crossing],
                over: p.over,
                sign: signs[p.crossing],
            }
        })
        .collect();
    Ok(GaussCode { entries })
}

const PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, PRIME - 2)
}

fn from_mod(x: u64) -> i64 {
    if x > PRIME / 2 {
        x as i64 - PRIME as i64
    } else {
        x as i64
    }
}

fn det_mod(mut m: Vec<Vec<u64>>) -> u64 {
    let n = m.len();
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            m.swap(piv, col);
            det = (PRIME - det) % PRIME;
        }
        det = mul_mod(det, m[col][col]);
        let inv = inv_mod(m[col][col]);
        for r in col + 1..n {
            if m[r][col] == 0 {
                continue;
            }
            let f = mul_mod(m[r][col], inv);
            for c in col..n {
                let sub = mul_mod(f, m[col][c]);
                m[r][c] = (m[r][c] + PRIME - sub) % PRIME;
            }
        }
    }
    det
}

/// Coefficients of the polynomial of degree `< xs.len()` through the points.
fn interpolate(xs: &[u64], ys: &[u64]) -> Vec<u64> {
    let n = xs.len();
    let mut m: Vec<Vec<u64>> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let mut row: Vec<u64> = (0..n as u64).map(|k| pow_mod(x, k)).collect();
            row.push(y);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| m[r][col] != 0)
            .expect("Vandermonde rows are independent");
        m.swap(piv, col);
        let inv = inv_mod(m[col][col]);
        for c in col..=n {
            m[col][c] = mul_mod(m[col][c], inv);
        }
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let f = m[r][col];
                for c in col..=n {
                    let sub = mul_mod(f, m[col][c]);
                    m[r][c] = (m[r][c] + PRIME - sub) % PRIME;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n]).collect()
}

/// Alexander polynomial from the crossing/arc matrix of the reduced diagram.
pub fn alexander(code: &GaussCode) -> Result<AlexPoly> {
    code.validate()?;
    let code = code.reduce();
    let n = code.crossing_count();
    if n == 0 {
        return Ok(AlexPoly::one());
    }
    // Arc r runs from the r-th under-visit to the next one.
    let mut arc_of_entry = vec![0usize; code.entries.len()];
    let mut under_rank = vec![0usize; n];
    let first_under = code.entries.iter().position(|e| !e.over).expect("n > 0");
    let len = code.entries.len();
    let mut arc = n - 1;
    let mut r = 0;
    for k in 0..len {
        let idx = (first_under + k) % len;
        let e = code.entries[idx];
        if !e.over {
            under_rank[e.crossing] = r;
            arc = r;
            r += 1;
        }
        arc_of_entry[idx] = arc;
    }
    // Per crossing (by under rank): over arc, incoming arc, outgoing arc, sign.
    let mut rows = vec![(0usize, 0usize, 0usize, 0i8); n];
    for (idx, e) in code.entries.iter().enumerate() {
        if e.over {
            let rank = under_rank[e.crossing];
            rows[rank] = (arc_of_entry[idx], (rank + n - 1) % n, rank, e.sign);
        }
    }
    let size = n - 1;
    let xs: Vec<u64> = (2..2 + n as u64).collect();
    let ys: Vec<u64> = xs
        .iter()
        .map(|&t| {
            let one_minus_t = (1 + PRIME - t) % PRIME;
            let mut m = vec![vec![0u64; n]; n];
            for (row, &(over, inc, out, sign)) in rows.iter().enumerate() {
                let (a_in, a_out) = if sign > 0 {
                    (t, PRIME - 1)
                } else {
                    (PRIME - 1, t)
                };
                m[row][over] = (m[row][over] + one_minus_t) % PRIME;
                m[row][inc] = (m[row][inc] + a_in) % PRIME;
                m[row][out] = (m[row][out] + a_out) % PRIME;
            }
            let minor: Vec<Vec<u64>> = m[1..].iter().map(|row| row[1..].to_vec()).collect();
            debug_assert_eq!(minor.len(), size);
            det_mod(minor)
        })
        .collect();
    let coeffs: Vec<i64> = interpolate(&xs, &ys).into_iter().map(from_mod).collect();
    let poly = AlexPoly::from_coeffs(coeffs);
    if !poly.is_admissible() {
        return Err(Error::DegenerateDiagram(format!(
            "matrix minor gives {poly}, not an Alexander polynomial"
        )));
    }
    Ok(poly)
}

/// Alexander polynomial of a closed polyline, retrying nearby directions
/// when the projection is not generic.
pub fn knot_polynomial(curve: &[State3], projection: State3) -> Result<(AlexPoly, GaussCode)> {
    let (u, w, d) = basis(projection);
    let mut last = None;
    for k in 0..12 {
        let ang = 0.0137 * k as f64;
        let dir = d + u * (ang * (1.7 * k as f64).cos()) + w * (ang * (1.7 * k as f64).sin());
        match gauss_code(curve, dir) {
            Ok(code) => return Ok((alexander(&code)?, code)),
            Err(e @ Error::NonGenericProjection(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division, `None` when a remainder is left.
fn poly_div(num: &[i64], den: &[i64]) -> Option<Vec<i64>> {
    let mut r = num.to_vec();
    let dl = *den.last()?;
    if den.len() > r.len() {
        return None;
    }
    let mut q = vec![0; r.len() - den.len() + 1];
    for k in (0..q.len()).rev() {
        let c = r[k + den.len() - 1];
        if c % dl != 0 {
            return None;
        }
        q[k] = c / dl;
        for (j, &dj) in den.iter().enumerate() {
            r[k + j] -= q[k] * dj;
        }
    }
    r.iter().all(|&x| x == 0).then_some(q)
}

fn t_pow_minus_one(k: usize) -> Vec<i64> {
    let mut v = vec![0; k + 1];
    v[0] = -1;
    v[k] = 1;
    v
}

/// `(t^{pq} - 1)(t - 1) / ((t^p - 1)(t^q - 1))`.
pub fn torus_polynomial(p: usize, q: usize) -> AlexPoly {
    let num = poly_mul(&t_pow_minus_one(p * q), &t_pow_minus_one(1));
    let den = poly_mul(&t_pow_minus_one(p), &t_pow_minus_one(q));
    AlexPoly::from_coeffs(poly_div(&num, &den).expect("torus quotient is exact"))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The unique coprime `2 <= p < q <= max_pq` whose torus knot has this
/// polynomial.
pub fn torus_knot_id(poly: &AlexPoly, max_pq: usize) -> Option<(usize, usize)> {
    let mut found = None;
    for p in 2..=max_pq {
        for q in p + 1..=max_pq {
            if gcd(p, q) != 1 || (p - 1) * (q - 1) != poly.degree() {
                continue;
            }
            if torus_polynomial(p, q) == *poly {
                if found.is_some() {
                    return None;
                }
                found = Some((p, q));
            }
        }
    }
    found
}

/// Cyclic word over `{1, 2}` kept in its lexicographically least rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemplateWord {
    symbols: Vec<u8>,
}

fn least_rotation(w: &[u8]) -> Vec<u8> {
    (0..w.len())
        .map(|k| w[k..].iter().chain(&w[..k]).copied().collect::<Vec<u8>>())
        .min()
        .unwrap_or_default()
}

/// Smallest `d` with `w` invariant under rotation by `d`.
pub fn cyclic_period(w: &[u8]) -> usize {
    let n = w.len();
    (1..=n)
        .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| w[i] == w[(i + d) % n]))
        .unwrap_or(n)
}

impl TemplateWord {
    pub fn new(symbols: &[u8]) -> Result<Self> {
        if symbols.is_empty() || symbols.iter().any(|&s| s != 1 && s != 2) {
            return Err(Error::InvalidArgument(format!(
                "template word must be a nonempty word over 1, 2: {symbols:?}"
            )));
        }
        Ok(Self {
            symbols: least_rotation(symbols),
        })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_primitive(&self) -> bool {
        cyclic_period(&self.symbols) == self.symbols.len()
    }
}

impl fmt::Display for TemplateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for TemplateWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::InvalidArgument(format!(
                    "bad symbol {c:?} in word {s:?}"
                ))),
            })
            .collect::<Result<_>>()?;
        TemplateWord::new(&symbols)
    }
}

/// Primitive cyclic words up to rotation, shortest first.
pub fn enumerate_words(max_len: usize) -> Vec<TemplateWord> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for bits in 0u64..(1 << len) {
            let w: Vec<u8> = (0..len)
                .map(|i| if bits >> (len - 1 - i) & 1 == 1 { 2 } else { 1 })
                .collect();
            if least_rotation(&w) == w && cyclic_period(&w) == len {
                out.push(TemplateWord { symbols: w });
            }
        }
    }
    out
}

/// Branch-line positions in `[0, 1]` of the orbit with this word: symbol 1
/// covers `[0, 1/2]` and maps by `x -> 2x`, symbol 2 covers `[1/2, 1]` and
/// maps by `x -> 2 - 2x`.
pub fn template_orbit(word: &TemplateWord) -> Vec<f64> {
    let w = word.symbols();
    let n = w.len();
    // Fixed point of the composed inverse branches, a contraction by 2^-n.
    let mut x = 0.5;
    for _ in 0..(60 / n + 2) * n {
        for &s in w.iter().rev() {
            x = if s == 1 { x / 2.0 } else { 1.0 - x / 2.0 };
        }
    }
    let mut pts = Vec::with_capacity(n);
    for &s in w {
        pts.push(x);
        x = if s == 1 { 2.0 * x } else { 2.0 - 2.0 * x };
    }
    pts
}

const STRAND_SAMPLES: usize = 96;
const STRIP_LIFT: f64 = 0.6;
const TWIST_DEPTH: f64 = 0.8;

/// Point at flow parameter `s` in `[0, 1]` on the strip of symbol `sym`,
/// for the strand leaving the branch line at `x`.
fn strip_point(sym: u8, x: f64, s: f64) -> State3 {
    let bump = (std::f64::consts::PI * s).sin();
    if sym == 1 {
        let r = 0.5 + x * (1.0 + s);
        let th = std::f64::consts::TAU * s;
        State3::new(-0.5 + r * th.cos(), r * th.sin(), STRIP_LIFT * bump)
    } else {
        let r = (1.0 - s) * (1.5 - x) + s * (2.0 * x - 0.5);
        let th = std::f64::consts::PI * (1.0 + 2.0 * s);
        let z = bump * (-STRIP_LIFT + TWIST_DEPTH * (x - 0.75) * 0.5);
        State3::new(1.5 + r * th.cos(), r * th.sin(), z)
    }
}

/// Closed polyline of the template orbit of `word`. The branch line is the
/// segment `[0, 1]` of the x-axis; strip 1 circles `(-1/2, 0)` untwisted
/// above the plane, strip 2 circles `(3/2, 0)` below it with a half twist.
pub fn template_embed(word: &TemplateWord) -> Vec<State3> {
    let xs = template_orbit(word);
    let mut out = Vec::with_capacity(xs.len() * STRAND_SAMPLES + 1);
    for (&x, &sym) in xs.iter().zip(word.symbols()) {
        for k in 0..STRAND_SAMPLES {
            out.push(strip_point(sym, x, k as f64 / STRAND_SAMPLES as f64));
        }
    }
    out.push(out[0]);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotReport {
    pub word: String,
    pub crossing_count: usize,
    pub reduced_crossing_count: usize,
    pub polynomial: Vec<i64>,
    pub polynomial_text: String,
    pub torus: Option<(usize, usize)>,
}

pub fn knot_report(
    label: &str,
    curve: &[State3],
    projection: State3,
    max_pq: usize,
) -> Result<KnotReport> {
    let (poly, code) = knot_polynomial(curve, projection)?;
    Ok(KnotReport {
        word: label.to_string(),
        crossing_count: code.crossing_count(),
        reduced_crossing_count: code.reduce().crossing_count(),
        torus: torus_knot_id(&poly, max_pq),
        polynomial_text: poly.to_string(),
        polynomial: poly.coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trefoil(n: usize) -> Vec<State3> {
        (0..=n)
            .map(|i| {
                let t = std::f64::consts::TAU * (i % n) as f64 / n as f64;
                let r = 2.0 + (3.0 * t).cos();
                State3::new(r * (2.0 * t).cos(), r * (2.0 * t).sin(), (3.0 * t).sin())
            })
            .collect()
    }

    #[test]
    fn torus_formula() {
        assert_eq!(torus_polynomial(2, 3).coeffs, vec![1, -1, 1]);
        assert_eq!(torus_polynomial(2, 5).coeffs, vec![1, -1, 1, -1, 1]);
        assert_eq!(torus_polynomial(3, 4).coeffs, vec![1, -1, 0, 1, 0, -1, 1]);
    }

    #[test]
    fn kinks_reduce_away() {
        let e = |c, over, sign| GaussEntry {
            crossing: c,
            over,
            sign,
        };
        let code = GaussCode {
            entries: vec![e(0, true, 1), e(0, false, 1)],
        };
        assert_eq!(code.reduce().crossing_count(), 0);
        assert_eq!(alexander(&code).unwrap(), AlexPoly::one());
    }

    #[test]
    fn trefoil_code_is_alternating() {
        let code = gauss_code(&trefoil(600), State3::new(0.1, 0.2, 1.0)).unwrap();
        code.validate().unwrap();
        let overs: Vec<bool> = code.reduce().entries.iter().map(|e| e.over).collect();
        assert!(overs.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn display() {
        assert_eq!(
            AlexPoly::from_coeffs(vec![0, -1, 3, -1]).to_string(),
            "t^2 - 3t + 1"
        );
        assert_eq!(AlexPoly::one().to_string(), "1");
    }

    #[test]
    fn word_normalization() {
        let w: TemplateWord = "211".parse().unwrap();
        assert_eq!(w.to_string(), "112");
        assert!(!"1212".parse::<TemplateWord>().unwrap().is_primitive());
        assert!("13".parse::<TemplateWord>().is_err());
    }
}
