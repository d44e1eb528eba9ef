//! The Rössler vector field in the shifted coordinates
//!
//! ```text
//! x' = -y - z
//! y' =  x + a y
//! z' =  b x + z (x - c)
//! ```
//!
//! together with its Jacobian, divergence, the two closed-form equilibria and
//! the coordinate change from the classic form `Z' = B + Z (X - C)`.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this gap `|c - ab|` the two equilibria are treated as coincident.
pub const DEGENERATE_GAP: f64 = 1e-10;

pub type Mat3 = [[f64; 3]; 3];

/// Parameter point `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Params {
    /// Rejects non-finite values and `a == 0`. The admissible range
    /// (`a, b` in (0,1), `c > 1`) is checked by `spectral::check_assumptions`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite ({a}, {b}, {c})")));
        }
        if a == 0.0 {
            return Err(Error::InvalidParams("a must be non-zero".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }
}

/// Parameters `(A, B, C)` of the classic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State3 {
    pub const ZERO: State3 = State3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: State3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: State3) -> State3 {
        State3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> State3 {
        self * (1.0 / self.norm())
    }

    pub fn dist(self, o: State3) -> f64 {
        (self - o).norm()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for State3 {
    type Output = State3;
    fn add(self, o: State3) -> State3 {
        State3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for State3 {
    fn add_assign(&mut self, o: State3) {
        *self = *self + o;
    }
}

impl Sub for State3 {
    type Output = State3;
    fn sub(self, o: State3) -> State3 {
        State3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for State3 {
    type Output = State3;
    fn mul(self, k: f64) -> State3 {
        State3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for State3 {
    type Output = State3;
    fn neg(self) -> State3 {
        State3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for State3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("State3 index {i} out of range"),
        }
    }
}

pub fn mat_vec(m: &Mat3, v: State3) -> State3 {
    State3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn trace3(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Solves `m x = rhs` by Cramer's rule; `None` when `m` is numerically singular.
pub fn solve3(m: &Mat3, rhs: State3) -> Option<State3> {
    let d = det3(m);
    let scale = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if d.abs() <= 1e-14 * scale.powi(3).max(f64::MIN_POSITIVE) {
        return None;
    }
    let col = |j: usize| {
        let mut mm = *m;
        for (i, r) in [rhs.x, rhs.y, rhs.z].into_iter().enumerate() {
            mm[i][j] = r;
        }
        det3(&mm) / d
    };
    Some(State3::new(col(0), col(1), col(2)))
}

pub fn vector_field(p: &Params, s: State3) -> State3 {
    State3::new(-s.y - s.z, s.x + p.a * s.y, p.b * s.x + s.z * (s.x - p.c))
}

pub fn jacobian(p: &Params, s: State3) -> Mat3 {
    [
        [0.0, -1.0, -1.0],
        [1.0, p.a, 0.0],
        [p.b + s.z, 0.0, s.x - p.c],
    ]
}

/// Trace of the Jacobian, written out as the same expression.
pub fn divergence(p: &Params, s: State3) -> f64 {
    0.0 + p.a + (s.x - p.c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub p_in: State3,
    pub p_out: State3,
}

pub fn fixed_points(p: &Params) -> Result<FixedPoints> {
    if p.a == 0.0 {
        return Err(Error::InvalidParams("a must be non-zero".into()));
    }
    let gap = p.c - p.a * p.b;
    if gap.abs() < DEGENERATE_GAP {
        return Err(Error::DegenerateFixedPoints { gap: gap.abs() });
    }
    let closed = State3::new(gap, p.b - p.c / p.a, p.c / p.a - p.b);
    Ok(FixedPoints {
        p_in: State3::ZERO,
        p_out: newton_polish(p, closed),
    })
}

fn newton_polish(p: &Params, s: State3) -> State3 {
    let f = vector_field(p, s);
    match solve3(&jacobian(p, s), -f) {
        Some(dx) if dx.is_finite() => {
            let polished = s + dx;
            if vector_field(p, polished).norm() <= f.norm() {
                polished
            } else {
                s
            }
        }
        _ => s,
    }
}

/// Shift `p1 = (-C + sqrt(C^2 - 4AB)) / (2A)` relating the two forms.
pub fn classic_shift(cp: &ClassicParams) -> Result<f64> {
    let disc = cp.c * cp.c - 4.0 * cp.a * cp.b;
    if !(disc > 0.0) {
        return Err(Error::ConversionUndefined { discriminant: disc });
    }
    if cp.a == 0.0 {
        return Err(Error::InvalidParams("A must be non-zero".into()));
    }
    // Written to avoid cancellation when 4AB << C^2.
    let root = disc.sqrt();
    let p1 = if cp.c > 0.0 {
        -2.0 * cp.b / (cp.c + root)
    } else {
        (-cp.c + root) / (2.0 * cp.a)
    };
    Ok(p1)
}

/// Parameters of the shifted form equivalent to the classic parameters:
/// `a = A`, `b = -p1`, `c = C + A p1`.
pub fn classic_to_shifted_params(cp: &ClassicParams) -> Result<Params> {
    let p1 = classic_shift(cp)?;
    Params::new(cp.a, -p1, cp.c + cp.a * p1)
}

/// Maps a classic-form state `(X, Y, Z)` to `(x, y, z) = (X + A p1, Y - p1, Z + p1)`.
pub fn classic_to_shifted(cp: &ClassicParams, classic: State3) -> Result<State3> {
    let p1 = classic_shift(cp)?;
    Ok(State3::new(
        classic.x + cp.a * p1,
        classic.y - p1,
        classic.z + p1,
    ))
}

/// Inverse of [`classic_to_shifted`]: `(X, Y, Z) = (x - A p1, y + p1, z - p1)`.
pub fn shifted_to_classic(cp: &ClassicParams, s: State3) -> Result<State3> {
    let p1 = classic_shift(cp)?;
    Ok(State3::new(s.x - cp.a * p1, s.y + p1, s.z - p1))
}

pub fn classic_vector_field(cp: &ClassicParams, s: State3) -> State3 {
    State3::new(-s.y - s.z, s.x + cp.a * s.y, cp.b + s.z * (s.x - cp.c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_point() -> Params {
        Params::new(0.468, 0.3, 4.615).unwrap()
    }

    #[test]
    fn field_vanishes_at_equilibria() {
        let p = reference_point();
        assert_eq!(vector_field(&p, State3::ZERO), State3::ZERO);
        let fp = fixed_points(&p).unwrap();
        let f = vector_field(&p, fp.p_out);
        assert!(f.max_abs() <= 1e-12, "{f:?}");
    }

    #[test]
    fn hand_evaluated_field() {
        let p = Params::new(0.2, 0.2, 5.7).unwrap();
        let f = vector_field(&p, State3::new(1.0, 1.0, 1.0));
        assert!((f.x + 2.0).abs() < 1e-15);
        assert!((f.y - 1.2).abs() < 1e-15);
        assert!((f.z + 4.5).abs() < 1e-15);
    }

    #[test]
    fn jacobian_third_row() {
        let p = reference_point();
        let j = jacobian(&p, State3::new(1.5, -2.0, 0.7));
        assert_eq!(j[2], [0.3 + 0.7, 0.0, 1.5 - 4.615]);
        let zero = jacobian(&p, State3::new(p.c, 3.0, -p.b));
        assert_eq!(zero[2], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn divergence_values() {
        let p = reference_point();
        assert!(divergence(&p, State3::new(p.c - p.a, 1.0, 2.0)).abs() < 1e-15);
        let q = Params::new(0.2, 0.2, 5.7).unwrap();
        assert!((divergence(&q, State3::ZERO) + 5.5).abs() < 1e-15);
    }

    #[test]
    fn outer_fixed_point_closed_form() {
        let p = reference_point();
        let fp = fixed_points(&p).unwrap();
        assert!((fp.p_out.x - 4.4746).abs() < 1e-12);
        // c/a = 4.615 / 0.468 = 9.861111..., so b - c/a = -9.561111...
        assert!((fp.p_out.y + 9.561_111_111_111).abs() < 1e-10);
        assert!((fp.p_out.z - 9.561_111_111_111).abs() < 1e-10);
        assert_eq!(
            fixed_points(&Params::new(0.2, 0.2, 5.7).unwrap())
                .unwrap()
                .p_in,
            State3::ZERO
        );
    }

    #[test]
    fn degenerate_on_transcritical_surface() {
        let p = Params::new(0.5, 0.4, 0.2).unwrap();
        assert!(matches!(
            fixed_points(&p),
            Err(Error::DegenerateFixedPoints { .. })
        ));
        let near = Params::new(0.5, 0.4, 0.2 + 5e-11).unwrap();
        assert!(fixed_points(&near).is_err());
        let off = Params::new(0.5, 0.4, 0.2 + 1e-6).unwrap();
        assert!(fixed_points(&off).is_ok());
    }

    #[test]
    fn rejects_zero_a() {
        assert!(Params::new(0.0, 0.3, 4.0).is_err());
        assert!(Params::new(f64::NAN, 0.3, 4.0).is_err());
    }

    #[test]
    fn conversion_domain() {
        // A = B: defined iff C > 2A (for A > 0, C > 0).
        let ok = ClassicParams {
            a: 0.3,
            b: 0.3,
            c: 0.61,
        };
        let bad = ClassicParams {
            a: 0.3,
            b: 0.3,
            c: 0.59,
        };
        assert!(classic_shift(&ok).is_ok());
        assert!(matches!(
            classic_shift(&bad),
            Err(Error::ConversionUndefined { .. })
        ));
        let p1 = classic_shift(&ok).unwrap();
        let expected = (-0.61 + (0.61f64 * 0.61 - 4.0 * 0.09).sqrt()) / 0.6;
        assert!((p1 - expected).abs() < 1e-14);
    }

    #[test]
    fn zero_shift_is_identity() {
        let cp = ClassicParams {
            a: 0.2,
            b: 0.0,
            c: 5.7,
        };
        assert_eq!(classic_shift(&cp).unwrap(), 0.0);
        let s = State3::new(1.25, -3.5, 0.75);
        assert_eq!(classic_to_shifted(&cp, s).unwrap(), s);
    }

    #[test]
    fn conversion_conjugates_the_fields() {
        // d/dt of the mapped state must equal the shifted field at the mapped state.
        let cp = ClassicParams {
            a: 0.2,
            b: 0.2,
            c: 5.7,
        };
        let p = classic_to_shifted_params(&cp).unwrap();
        for s in [
            State3::new(0.3, -1.0, 2.0),
            State3::new(-4.0, 2.5, 0.01),
            State3::new(7.0, 1.0, -0.5),
        ] {
            let lhs = classic_vector_field(&cp, s);
            let rhs = vector_field(&p, classic_to_shifted(&cp, s).unwrap());
            assert!((lhs - rhs).max_abs() < 1e-12, "{lhs:?} vs {rhs:?}");
        }
    }
}
