use rossler_core::flow::{fixed_points, jacobian, Params, State3};
use rossler_core::integrator::{
    integrate, integrate_fixed, next_section_crossing, CrossingOutcome, DirectionFilter,
    Equilibrium, IntegratorConfig,
};
use rossler_core::section::trapping_violation;
use rossler_core::spectral::{eigen3, real_eigenvector, Roots};

fn simple() -> Params {
    Params::new(0.2, 0.2, 5.7).unwrap()
}

fn candidate() -> Params {
    Params::new(0.46740942, 0.3, 4.63151228).unwrap()
}

#[test]
fn equilibrium_stays_put() {
    let p = Params::new(0.468, 0.3, 4.615).unwrap();
    let traj = integrate(&p, State3::ZERO, &IntegratorConfig::default(), 0.0, 100.0).unwrap();
    assert!(traj.samples().iter().all(|(_, s)| s.norm() < 1e-9));
}

#[test]
fn richardson_order_on_simple_attractor() {
    let p = simple();
    let s0 = State3::new(1.0, 1.0, 0.0);
    let cfg = IntegratorConfig::default().with_rel_tol(1e-13);
    let reference = integrate(
        &p,
        s0,
        &IntegratorConfig {
            abs_tol: 1e-15,
            ..cfg
        },
        0.0,
        10.0,
    )
    .unwrap()
    .last()
    .1;
    let e1 = (integrate_fixed(&p, s0, 10.0, 200) - reference).norm();
    let e2 = (integrate_fixed(&p, s0, 10.0, 400) - reference).norm();
    let order = (e1 / e2).log2();
    assert!(order >= 4.5, "order {order} from errors {e1:e}, {e2:e}");
}

fn round_trip(p: &Params, s0: State3, t: f64, cfg: &IntegratorConfig) -> f64 {
    let fwd = integrate(p, s0, cfg, 0.0, t).unwrap().last().1;
    let back = integrate(p, fwd, cfg, t, 0.0).unwrap().last().1;
    (back - s0).norm()
}

#[test]
fn short_round_trip_and_tolerance_scaling() {
    let p = simple();
    let s0 = State3::new(1.0, 1.0, 0.0);
    let loose = round_trip(&p, s0, 2.0, &IntegratorConfig::default().with_rel_tol(1e-8));
    let tight = round_trip(
        &p,
        s0,
        2.0,
        &IntegratorConfig::default().with_rel_tol(1e-10),
    );
    assert!(tight < 1e-6, "{tight:e}");
    assert!(tight * 10.0 <= loose, "loose {loose:e}, tight {tight:e}");
}

#[test]
fn crossing_near_attractor_is_on_open_section() {
    let p = simple();
    let cfg = IntegratorConfig::default();
    let warm = integrate(&p, State3::new(1.0, 1.0, 0.0), &cfg, 0.0, 100.0)
        .unwrap()
        .last()
        .1;
    match next_section_crossing(&p, warm, &cfg, DirectionFilter::Down).unwrap() {
        CrossingOutcome::Crossing(ev) => {
            assert!(ev.t > 0.0);
            assert!((ev.state.x + p.a * ev.state.y).abs() <= 1e-12);
            assert!(ev.point.v > ev.point.u / p.a);
            assert!(ev.is_transverse());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn crossing_from_the_section_excludes_time_zero() {
    let p = simple();
    let cfg = IntegratorConfig::default();
    let s = State3::new(-5.0, 25.0, 0.02);
    let CrossingOutcome::Crossing(ev) =
        next_section_crossing(&p, s, &cfg, DirectionFilter::Down).unwrap()
    else {
        panic!()
    };
    assert!(ev.t > 1.0, "{}", ev.t);
}

#[test]
fn stable_manifold_seed_is_captured() {
    let p = candidate();
    let j = jacobian(&p, fixed_points(&p).unwrap().p_in);
    let Roots::ComplexPair(sp) = eigen3(&j).roots else {
        panic!()
    };
    let v = real_eigenvector(&j, sp.gamma);
    let out = next_section_crossing(
        &p,
        v * 1e-4,
        &IntegratorConfig::default(),
        DirectionFilter::Down,
    )
    .unwrap();
    assert!(
        matches!(
            out,
            CrossingOutcome::FixedPointLimit {
                which: Equilibrium::PIn,
                ..
            }
        ),
        "{out:?}"
    );
}

#[test]
fn no_trapping_violations_on_long_run() {
    let p = simple();
    let traj = integrate(
        &p,
        State3::new(1.0, 1.0, 0.0),
        &IntegratorConfig::default(),
        0.0,
        500.0,
    )
    .unwrap();
    assert_eq!(trapping_violation(&p, &traj), None);
}

#[test]
fn trapping_sentinel_fires_below_the_floor() {
    let p = simple();
    let traj = integrate(
        &p,
        State3::new(0.0, 0.0, -1.0),
        &IntegratorConfig::default(),
        0.0,
        1.0,
    )
    .unwrap();
    assert_eq!(trapping_violation(&p, &traj), Some(0.0));
}
