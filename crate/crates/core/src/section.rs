//! The half-plane cross-section `H_p` inside `{y' = 0} = {x + a y = 0}` and the
//! tangency geometry of the planes `{x' = 0}`, `{y' = 0}`, `{z' = 0}`.
//!
//! The plane is charted globally by `(u, v) = (x, z)`; the open section is the
//! part above the tangency line `l_p`, i.e. `v > u / a`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{vector_field, Params, State3};
use crate::integrator::Trajectory;

/// Sign values with magnitude below this are reported as zero.
pub const SIGN_ZERO: f64 = 1e-10;
/// Relative tolerance for accepting a state as lying on the section plane.
pub const ON_PLANE_TOL: f64 = 1e-8;
/// Margin below `z = -b` that counts as entering the trapped-out region.
pub const TRAPPING_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionPoint {
    pub u: f64,
    pub v: f64,
}

impl SectionPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn dist(self, o: SectionPoint) -> f64 {
        (self.u - o.u).hypot(self.v - o.v)
    }

    /// Signed height above the tangency line: `v - u/a`. Positive inside `H_p`.
    pub fn height(self, p: &Params) -> f64 {
        self.v - self.u / p.a
    }

    pub fn in_open_section(self, p: &Params) -> bool {
        self.height(p) > 0.0
    }

    pub fn in_closed_section(self, p: &Params, tol: f64) -> bool {
        self.height(p) >= -tol
    }

    pub fn lerp(self, o: SectionPoint, t: f64) -> SectionPoint {
        SectionPoint::new(self.u + (o.u - self.u) * t, self.v + (o.v - self.v) * t)
    }
}

pub fn embed(p: &Params, sp: SectionPoint) -> State3 {
    State3::new(sp.u, -sp.u / p.a, sp.v)
}

pub fn project(p: &Params, s: State3) -> Result<SectionPoint> {
    let residual = s.x + p.a * s.y;
    if residual.abs() > ON_PLANE_TOL * (1.0 + s.norm()) {
        return Err(Error::OffSection { residual });
    }
    Ok(SectionPoint::new(s.x, s.z))
}

/// The tangency curves of the flow with the three coordinate-derivative planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyCurves {
    pub params: Params,
}

pub fn tangency_curves(p: &Params) -> TangencyCurves {
    TangencyCurves { params: *p }
}

impl TangencyCurves {
    /// `sigma(x) = (x, -x(b+1)/(a+c-x), x(b+1)/(a+c-x))`, the tangency of the flow with `{x' = 0}`.
    pub fn sigma(&self, x: f64) -> Result<State3> {
        let p = &self.params;
        let den = p.a + p.c - x;
        if den == 0.0 {
            return Err(Error::UndefinedAtPole);
        }
        let w = x * (p.b + 1.0) / den;
        Ok(State3::new(x, -w, w))
    }

    /// `l_p(x) = (x, -x/a, x/a) = {x' = 0} ∩ {y' = 0}`, the boundary of the section.
    pub fn l_p(&self, x: f64) -> State3 {
        let a = self.params.a;
        State3::new(x, -x / a, x / a)
    }

    /// `Delta(x) = (x, bx/(x-c), bx/(c-x)) = {x' = 0} ∩ {z' = 0}`.
    pub fn delta(&self, x: f64) -> Result<State3> {
        let p = &self.params;
        if x == p.c {
            return Err(Error::InvalidArgument("Delta is undefined at x = c".into()));
        }
        Ok(State3::new(x, p.b * x / (x - p.c), p.b * x / (p.c - x)))
    }

    /// Closed form of `y'` on `sigma(x)`: `(-x^2 + c x - a b x) / (a + c - x)`.
    pub fn sigma_ydot(&self, x: f64) -> f64 {
        let p = &self.params;
        (-x * x + p.c * x - p.a * p.b * x) / (p.a + p.c - x)
    }

    /// Closed form of `z'` on `l_p(x)`: `b x + x^2/a - c x/a`.
    pub fn l_p_zdot(&self, x: f64) -> f64 {
        let p = &self.params;
        p.b * x + x * x / p.a - p.c * x / p.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedEnd {
    PIn,
    POut,
}

/// Pieces of `sigma` minus the two equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaArc {
    /// `x < 0`: from `P_In` to infinity.
    Sigma1,
    /// `c - ab < x < a + c`: from `P_Out` to infinity.
    Sigma2,
    /// `0 < x < c - ab`: between the equilibria.
    Sigma3,
    /// `x > a + c`.
    Sigma4,
    Endpoint(FixedEnd),
}

pub fn sigma_subarc(p: &Params, x: f64) -> Result<SigmaArc> {
    let pole = p.a + p.c;
    let x_out = p.c - p.a * p.b;
    if x == pole {
        return Err(Error::UndefinedAtPole);
    }
    Ok(if x == 0.0 {
        SigmaArc::Endpoint(FixedEnd::PIn)
    } else if x == x_out {
        SigmaArc::Endpoint(FixedEnd::POut)
    } else if x < 0.0 {
        SigmaArc::Sigma1
    } else if x < x_out {
        SigmaArc::Sigma3
    } else if x < pole {
        SigmaArc::Sigma2
    } else {
        SigmaArc::Sigma4
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v.abs() < SIGN_ZERO {
            Sign::Zero
        } else if v > 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignChamber {
    pub sx: Sign,
    pub sy: Sign,
    pub sz: Sign,
}

pub fn sign_chamber(p: &Params, s: State3) -> SignChamber {
    let f = vector_field(p, s);
    SignChamber {
        sx: Sign::of(f.x),
        sy: Sign::of(f.y),
        sz: Sign::of(f.z),
    }
}

/// First time the trajectory is found below `z = -b - 1e-6`, scanning every
/// step at its samples and at interior points of the dense output.
pub fn trapping_violation(p: &Params, traj: &Trajectory) -> Option<f64> {
    let floor = -p.b - TRAPPING_MARGIN;
    let below = |t: f64| traj.eval(t).map(|s| s.z < floor).unwrap_or(false);
    let samples = traj.samples();
    if let Some(first) = samples.first() {
        if first.1.z < floor {
            return Some(first.0);
        }
    }
    for w in samples.windows(2) {
        let (t0, t1) = (w[0].0, w[1].0);
        const INTERIOR: usize = 8;
        let mut prev = t0;
        for k in 1..=INTERIOR {
            let t = t0 + (t1 - t0) * k as f64 / INTERIOR as f64;
            if below(t) {
                // Bisect between the last good time and the first bad one.
                let (mut lo, mut hi) = (prev, t);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if below(mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            prev = t;
        }
    }
    None
}

/// CSV (`curve,x,y,z`) of the three tangency curves sampled at `xs`.
/// Points at the poles of `sigma` or `Delta` are skipped.
pub fn curves_csv(p: &Params, xs: &[f64]) -> String {
    let tc = tangency_curves(p);
    let mut out = String::from("curve,x,y,z\n");
    let mut row = |name: &str, s: State3| {
        let _ = writeln!(
            out,
            "{name},{},{},{}",
            crate::fmt17(s.x),
            crate::fmt17(s.y),
            crate::fmt17(s.z)
        );
    };
    for &x in xs {
        if let Ok(s) = tc.sigma(x) {
            row("sigma", s);
        }
    }
    for &x in xs {
        row("l_p", tc.l_p(x));
    }
    for &x in xs {
        if let Ok(s) = tc.delta(x) {
            row("delta", s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::fixed_points;

    fn reference_point() -> Params {
        Params::new(0.468, 0.3, 4.615).unwrap()
    }

    #[test]
    fn chart_examples() {
        let p = reference_point();
        assert_eq!(
            embed(&p, SectionPoint::new(0.0, 1.0)),
            State3::new(0.0, 0.0, 1.0)
        );
        let sp = project(&p, State3::new(1.0, -1.0 / 0.468, 3.0)).unwrap();
        assert_eq!(sp, SectionPoint::new(1.0, 3.0));
        assert!(sp.in_open_section(&p));
        assert!(matches!(
            project(&p, State3::new(1.0, 0.0, 3.0)),
            Err(Error::OffSection { .. })
        ));
    }

    #[test]
    fn sigma_hits_both_equilibria() {
        let p = reference_point();
        let tc = tangency_curves(&p);
        assert_eq!(tc.sigma(0.0).unwrap(), State3::ZERO);
        let fp = fixed_points(&p).unwrap();
        let s = tc.sigma(p.c - p.a * p.b).unwrap();
        assert!((s - fp.p_out).max_abs() < 1e-12, "{s:?}");
        assert!(matches!(tc.sigma(p.a + p.c), Err(Error::UndefinedAtPole)));
    }

    #[test]
    fn l_p_field_closed_form() {
        let p = reference_point();
        let tc = tangency_curves(&p);
        for x in [-3.0, 0.0, 1.0, p.c - p.a * p.b, 7.5] {
            let f = vector_field(&p, tc.l_p(x));
            assert!(f.x.abs() < 1e-12 && f.y.abs() < 1e-12);
            assert!((f.z - tc.l_p_zdot(x)).abs() < 1e-10);
        }
        assert!(tc.l_p_zdot(0.0).abs() < 1e-15);
        assert!(tc.l_p_zdot(p.c - p.a * p.b).abs() < 1e-12);
    }

    #[test]
    fn delta_is_on_both_planes() {
        let p = reference_point();
        let tc = tangency_curves(&p);
        for x in [-2.0, 0.5, 3.0, 6.0] {
            let f = vector_field(&p, tc.delta(x).unwrap());
            assert!(f.x.abs() < 1e-12 && f.z.abs() < 1e-12, "{f:?}");
        }
        assert!(tc.delta(p.c).is_err());
    }

    #[test]
    fn subarc_labels() {
        let p = reference_point();
        assert_eq!(sigma_subarc(&p, -1.0).unwrap(), SigmaArc::Sigma1);
        let mid = (p.c - p.a * p.b + p.a + p.c) / 2.0;
        assert_eq!(sigma_subarc(&p, mid).unwrap(), SigmaArc::Sigma2);
        assert_eq!(sigma_subarc(&p, 1.0).unwrap(), SigmaArc::Sigma3);
        assert_eq!(sigma_subarc(&p, 10.0).unwrap(), SigmaArc::Sigma4);
        assert_eq!(
            sigma_subarc(&p, 0.0).unwrap(),
            SigmaArc::Endpoint(FixedEnd::PIn)
        );
        assert!(sigma_subarc(&p, p.a + p.c).is_err());
    }

    #[test]
    fn sign_chamber_examples() {
        let p = reference_point();
        let tc = tangency_curves(&p);
        assert_eq!(sign_chamber(&p, tc.l_p(1.0)).sz, Sign::Neg);
        let zero = sign_chamber(&p, State3::ZERO);
        assert_eq!(
            (zero.sx, zero.sy, zero.sz),
            (Sign::Zero, Sign::Zero, Sign::Zero)
        );
        let ch = sign_chamber(&p, State3::new(0.0, -1.0, 1.0));
        assert_eq!(ch.sx, Sign::Zero);
        assert_eq!(ch.sy, Sign::Neg);
    }

    #[test]
    fn curves_csv_header_and_rows() {
        let p = reference_point();
        let csv = curves_csv(&p, &[-1.0, 0.0, 1.0]);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "curve,x,y,z");
        assert_eq!(lines.len(), 1 + 9);
        assert!(lines[1].starts_with("sigma,"));
    }
}
