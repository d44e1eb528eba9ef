//! Eigen-analysis of 3x3 Jacobians at the equilibria.
//!
//! Eigenvalues come from the characteristic cubic, solved in closed form
//! (Cardano for one real root, the trigonometric form for three) and then
//! polished by a Newton step on the cubic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{det3, fixed_points, jacobian, trace3, Mat3, Params, State3};

/// Relative width of the band around a zero discriminant reported as borderline.
pub const BORDERLINE_DISCRIMINANT: f64 = 1e-12;

/// One real eigenvalue and a complex-conjugate pair `rho ± i omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub gamma: f64,
    pub rho: f64,
    pub omega: f64,
    pub is_complex_pair: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Roots {
    ComplexPair(Spectrum),
    ThreeReal([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigen3 {
    pub roots: Roots,
    /// `-4p^3 - 27q^2` of the depressed cubic; negative means a complex pair.
    pub discriminant: f64,
    /// Discriminant within the roundoff band; the classification above is not trustworthy.
    pub borderline: bool,
}

impl Eigen3 {
    pub fn spectrum(&self) -> Option<Spectrum> {
        match self.roots {
            Roots::ComplexPair(s) => Some(s),
            Roots::ThreeReal(_) => None,
        }
    }
}

/// Coefficients of `lambda^3 + c2 lambda^2 + c1 lambda + c0`.
fn char_poly(m: &Mat3) -> [f64; 3] {
    let tr = trace3(m);
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    [-det3(m), minors, -tr]
}

fn cubic_at(c: &[f64; 3], x: f64) -> f64 {
    ((x + c[2]) * x + c[1]) * x + c[0]
}

fn polish_real(c: &[f64; 3], x: f64) -> f64 {
    let d = (3.0 * x + 2.0 * c[2]) * x + c[1];
    if d == 0.0 {
        return x;
    }
    let next = x - cubic_at(c, x) / d;
    if next.is_finite() && cubic_at(c, next).abs() <= cubic_at(c, x).abs() {
        next
    } else {
        x
    }
}

pub fn eigen3(m: &Mat3) -> Eigen3 {
    let c = char_poly(m);
    let shift = -c[2] / 3.0;
    let p = c[1] - c[2] * c[2] / 3.0;
    let q = 2.0 * c[2].powi(3) / 27.0 - c[2] * c[1] / 3.0 + c[0];
    let discriminant = -4.0 * p.powi(3) - 27.0 * q * q;
    let norm2 = m.iter().flatten().map(|v| v * v).sum::<f64>();
    let scale = 1.0 + norm2;
    let borderline = discriminant.abs() <= BORDERLINE_DISCRIMINANT * scale.powi(3);

    if discriminant < 0.0 {
        let sd = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
        let t1 = (-q / 2.0 + sd).cbrt() + (-q / 2.0 - sd).cbrt();
        let gamma = polish_real(&c, t1 + shift);
        // Remaining quadratic after deflating the real root.
        let b1 = c[2] + gamma;
        let b0 = c[1] + gamma * b1;
        let rho = -b1 / 2.0;
        let omega = (b0 - rho * rho).max(0.0).sqrt();
        Eigen3 {
            roots: Roots::ComplexPair(Spectrum {
                gamma,
                rho,
                omega,
                is_complex_pair: true,
            }),
            discriminant,
            borderline,
        }
    } else {
        let mut roots = if p.abs() < f64::EPSILON * scale {
            [shift; 3]
        } else {
            let r = 2.0 * (-p / 3.0).max(0.0).sqrt();
            let arg = if r == 0.0 {
                0.0
            } else {
                (3.0 * q / (p * r)).clamp(-1.0, 1.0)
            };
            let phi = arg.acos() / 3.0;
            let tau = 2.0 * std::f64::consts::PI / 3.0;
            [0.0, 1.0, 2.0].map(|k| r * (phi - tau * k).cos() + shift)
        };
        for x in roots.iter_mut() {
            *x = polish_real(&c, *x);
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        Eigen3 {
            roots: Roots::ThreeReal(roots),
            discriminant,
            borderline,
        }
    }
}

/// Characteristic polynomial residual at a real point.
pub fn char_residual(m: &Mat3, lambda: f64) -> f64 {
    cubic_at(&char_poly(m), lambda)
}

/// Complex residual `|chi(rho + i omega)|`.
pub fn char_residual_complex(m: &Mat3, rho: f64, omega: f64) -> f64 {
    let c = char_poly(m);
    let z = (rho, omega);
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let z2 = mul(z, z);
    let z3 = mul(z2, z);
    let re = z3.0 + c[2] * z2.0 + c[1] * z.0 + c[0];
    let im = z3.1 + c[2] * z2.1 + c[1] * z.1;
    re.hypot(im)
}

/// Unit null vector of `m - lambda I`, taken as the largest cross product of row pairs.
pub fn real_eigenvector(m: &Mat3, lambda: f64) -> State3 {
    let rows: Vec<State3> = (0..3)
        .map(|i| {
            let mut r = m[i];
            r[i] -= lambda;
            State3::from_array(r)
        })
        .collect();
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| rows[i].cross(rows[j]))
        .max_by(|u, v| u.norm().total_cmp(&v.norm()))
        .unwrap();
    best.normalized()
}

/// Real and imaginary parts `(vr, vi)` of an eigenvector for `rho + i omega`.
///
/// `span{vr, vi}` is the real invariant plane; in the basis `(vr, vi)` the
/// linearized flow acts as `[[rho, omega], [-omega, rho]]`.
pub fn complex_eigenplane(m: &Mat3, rho: f64, omega: f64) -> (State3, State3) {
    type C = (f64, f64);
    let sub = |a: C, b: C| (a.0 - b.0, a.1 - b.1);
    let mul = |a: C, b: C| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let rows: Vec<[C; 3]> = (0..3)
        .map(|i| {
            let mut r = [(m[i][0], 0.0), (m[i][1], 0.0), (m[i][2], 0.0)];
            r[i] = sub(r[i], (rho, omega));
            r
        })
        .collect();
    let cross = |u: &[C; 3], v: &[C; 3]| {
        [
            sub(mul(u[1], v[2]), mul(u[2], v[1])),
            sub(mul(u[2], v[0]), mul(u[0], v[2])),
            sub(mul(u[0], v[1]), mul(u[1], v[0])),
        ]
    };
    let cnorm = |v: &[C; 3]| v.iter().map(|c| c.0 * c.0 + c.1 * c.1).sum::<f64>().sqrt();
    let v = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(&rows[i], &rows[j]))
        .max_by(|u, v| cnorm(u).total_cmp(&cnorm(v)))
        .unwrap();
    let k = 1.0 / cnorm(&v);
    (
        State3::new(v[0].0, v[1].0, v[2].0) * k,
        State3::new(v[0].1, v[1].1, v[2].1) * k,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleFocusReport {
    pub spectrum_in: Spectrum,
    pub spectrum_out: Spectrum,
    pub nu_in: f64,
    pub nu_out: f64,
    pub shilnikov_in: bool,
    pub shilnikov_out: bool,
}

fn saddle_index(s: &Spectrum) -> f64 {
    (s.rho / s.gamma).abs()
}

fn spectrum_at(p: &Params, s: State3, label: &str) -> Result<Spectrum> {
    let e = eigen3(&jacobian(p, s));
    match e.roots {
        Roots::ComplexPair(sp) if !e.borderline => Ok(sp),
        Roots::ComplexPair(_) => Err(Error::NotSaddleFocus(format!(
            "{label}: discriminant {:e} is borderline",
            e.discriminant
        ))),
        Roots::ThreeReal(r) => Err(Error::NotSaddleFocus(format!(
            "{label}: three real eigenvalues {r:?}"
        ))),
    }
}

pub fn saddle_report(p: &Params) -> Result<SaddleFocusReport> {
    let fp = fixed_points(p)?;
    let spectrum_in = spectrum_at(p, fp.p_in, "P_In")?;
    let spectrum_out = spectrum_at(p, fp.p_out, "P_Out")?;
    if !(spectrum_in.gamma < 0.0 && spectrum_in.rho > 0.0) {
        return Err(Error::NotSaddleFocus(format!(
            "P_In needs gamma < 0 < rho, got gamma = {}, rho = {}",
            spectrum_in.gamma, spectrum_in.rho
        )));
    }
    if !(spectrum_out.gamma > 0.0 && spectrum_out.rho < 0.0) {
        return Err(Error::NotSaddleFocus(format!(
            "P_Out needs rho < 0 < gamma, got gamma = {}, rho = {}",
            spectrum_out.gamma, spectrum_out.rho
        )));
    }
    let nu_in = saddle_index(&spectrum_in);
    let nu_out = saddle_index(&spectrum_out);
    Ok(SaddleFocusReport {
        spectrum_in,
        spectrum_out,
        nu_in,
        nu_out,
        shilnikov_in: nu_in < 1.0,
        shilnikov_out: nu_out < 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub reason: String,
}

impl Check {
    fn new(pass: bool, reason: impl Into<String>) -> Self {
        Self {
            pass,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionStatus {
    pub a1: Check,
    pub a2: Check,
    pub a3: Check,
    pub a4: Check,
    pub nu_in: Option<f64>,
    pub nu_out: Option<f64>,
    pub notes: Vec<String>,
}

impl AssumptionStatus {
    pub fn all_pass(&self) -> bool {
        self.a1.pass && self.a2.pass && self.a3.pass && self.a4.pass
    }
}

const A3_TEXT_NOTE: &str = "assumption 3 is checked by manifold dimensions: at P_Out the complex \
pair must have rho < 0 (2-dimensional stable manifold); the printed 'rho_Out > 0' is read as a typo";

pub fn check_assumptions(p: &Params) -> AssumptionStatus {
    let a1_ok = p.a > 0.0 && p.a < 1.0 && p.b > 0.0 && p.b < 1.0 && p.c > 1.0;
    let a1 = Check::new(
        a1_ok,
        if a1_ok {
            "a, b in (0,1) and c > 1".to_string()
        } else {
            format!(
                "need a, b in (0,1) and c > 1; got ({}, {}, {})",
                p.a, p.b, p.c
            )
        },
    );

    let spectra = fixed_points(p).map(|fp| {
        (
            spectrum_at(p, fp.p_in, "P_In"),
            spectrum_at(p, fp.p_out, "P_Out"),
        )
    });

    let (a2, a3, a4, nu_in, nu_out) = match spectra {
        Err(e) => {
            let reason = e.to_string();
            (
                Check::new(false, reason.clone()),
                Check::new(false, reason.clone()),
                Check::new(false, reason),
                None,
                None,
            )
        }
        Ok((sin, sout)) => {
            let a2 = match (&sin, &sout) {
                (Ok(_), Ok(_)) => Check::new(true, "two distinct fixed points, both saddle-foci"),
                (Err(e), _) | (_, Err(e)) => Check::new(false, e.to_string()),
            };
            let a3 = match (&sin, &sout) {
                (Ok(i), Ok(o)) => {
                    let ok = i.gamma < 0.0 && i.rho > 0.0 && o.gamma > 0.0 && o.rho < 0.0;
                    Check::new(
                        ok,
                        format!(
                            "P_In: gamma {:.6} rho {:.6}; P_Out: gamma {:.6} rho {:.6}",
                            i.gamma, i.rho, o.gamma, o.rho
                        ),
                    )
                }
                _ => Check::new(false, "requires both complex pairs"),
            };
            let nin = sin.as_ref().ok().map(saddle_index);
            let nout = sout.as_ref().ok().map(saddle_index);
            let a4 = match (nin, nout) {
                (Some(i), Some(o)) => {
                    Check::new(i.min(o) < 1.0, format!("nu_in = {i:.6}, nu_out = {o:.6}"))
                }
                _ => Check::new(false, "saddle indices undefined without complex pairs"),
            };
            (a2, a3, a4, nin, nout)
        }
    };

    AssumptionStatus {
        a1,
        a2,
        a3,
        a4,
        nu_in,
        nu_out,
        notes: vec![A3_TEXT_NOTE.to_string()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_point() -> Params {
        Params::new(0.468, 0.3, 4.615).unwrap()
    }

    #[test]
    fn identity_has_triple_root() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        match eigen3(&id).roots {
            Roots::ThreeReal(r) => {
                for x in r {
                    assert!((x - 1.0).abs() < 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagonal_three_real() {
        let m = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.5]];
        let Roots::ThreeReal(r) = eigen3(&m).roots else {
            panic!()
        };
        assert!(
            (r[0] + 1.0).abs() < 1e-12 && (r[1] - 0.5).abs() < 1e-12 && (r[2] - 3.0).abs() < 1e-12
        );
    }

    #[test]
    fn spectrum_at_inner_point() {
        let p = reference_point();
        let s = eigen3(&jacobian(&p, State3::ZERO)).spectrum().unwrap();
        // gamma + 2 rho = a - c pins gamma once rho is known.
        assert!((s.gamma + 2.0 * s.rho - (p.a - p.c)).abs() < 1e-12);
        assert!((s.rho - 0.202428).abs() < 1e-5);
        assert!((s.omega - 0.970593).abs() < 1e-5);
        assert!((s.gamma + 4.551856).abs() < 1e-5);
    }

    #[test]
    fn spectrum_at_outer_point() {
        let p = reference_point();
        let fp = fixed_points(&p).unwrap();
        let s = eigen3(&jacobian(&p, fp.p_out)).spectrum().unwrap();
        assert!((s.gamma - 0.413139).abs() < 1e-5);
        assert!((s.rho + 0.0427694).abs() < 1e-6);
        assert!((s.omega - 3.29073).abs() < 1e-5);
    }

    #[test]
    fn saddle_indices_at_reference_point() {
        let r = saddle_report(&reference_point()).unwrap();
        assert!((r.nu_in - 0.202428 / 4.551856).abs() < 1e-5);
        assert!((r.nu_out - 0.0427694 / 0.413139).abs() < 1e-5);
        assert!(r.shilnikov_in && r.shilnikov_out);
    }

    #[test]
    fn three_real_at_origin_is_not_saddle_focus() {
        // Large a makes the origin's Jacobian have three real eigenvalues.
        let p = Params::new(3.0, 0.3, 4.615).unwrap();
        assert!(matches!(
            eigen3(&jacobian(&p, State3::ZERO)).roots,
            Roots::ThreeReal(_)
        ));
        assert!(matches!(saddle_report(&p), Err(Error::NotSaddleFocus(_))));
    }

    #[test]
    fn assumptions_at_reference_point() {
        let st = check_assumptions(&reference_point());
        assert!(st.all_pass(), "{st:?}");
    }

    #[test]
    fn assumption_one_range() {
        let st = check_assumptions(&Params::new(0.5, 0.5, 0.2).unwrap());
        assert!(!st.a1.pass);
    }

    #[test]
    fn classic_attractor_parameters_are_reported() {
        let st = check_assumptions(&Params::new(0.2, 0.2, 5.7).unwrap());
        assert!(st.a1.pass);
        assert_eq!(st.a4.pass, st.nu_in.unwrap().min(st.nu_out.unwrap()) < 1.0);
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let p = reference_point();
        let fp = fixed_points(&p).unwrap();
        for s in [fp.p_in, fp.p_out] {
            let m = jacobian(&p, s);
            let sp = eigen3(&m).spectrum().unwrap();
            let v = real_eigenvector(&m, sp.gamma);
            let r = crate::flow::mat_vec(&m, v) - v * sp.gamma;
            assert!(r.norm() < 1e-10, "{r:?}");
            let (vr, vi) = complex_eigenplane(&m, sp.rho, sp.omega);
            // J vr = rho vr - omega vi, J vi = omega vr + rho vi
            let r1 = crate::flow::mat_vec(&m, vr) - (vr * sp.rho - vi * sp.omega);
            let r2 = crate::flow::mat_vec(&m, vi) - (vr * sp.omega + vi * sp.rho);
            assert!(r1.norm() < 1e-10 && r2.norm() < 1e-10, "{r1:?} {r2:?}");
        }
    }
}
