use proptest::prelude::*;
use rossler_core::flow::Params;
use rossler_core::integrator::IntegratorConfig;
use rossler_core::return_map::{
    find_discontinuities, first_return, iterate, map_k, map_k_timed, polyline_distance,
    samples_csv, Partition2, ReturnResult, ScanGrid, Symbol,
};
use rossler_core::section::SectionPoint;

fn simple() -> Params {
    Params::new(0.2, 0.2, 5.7).unwrap()
}

fn candidate() -> Params {
    Params::new(0.4674094238964985, 0.3, 4.631512274927214).unwrap()
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default().with_max_time(200.0)
}

#[test]
fn points_below_the_boundary_are_rejected() {
    let p = simple();
    assert!(first_return(&p, SectionPoint::new(1.0, 0.0), &cfg()).is_err());
    assert!(iterate(&p, SectionPoint::new(-1.0, 0.0), 0, &cfg()).is_err());
}

#[test]
fn returns_land_in_the_open_section() {
    let p = simple();
    let run = iterate(&p, SectionPoint::new(-1.0, 0.0), 200, &cfg()).unwrap();
    assert_eq!(run.len(), 200);
    for r in &run {
        let ReturnResult::Returned { point, flight_time } = r else {
            panic!("unexpected {r:?}");
        };
        assert!(point.in_open_section(&p));
        assert!(*flight_time > 1.0 && *flight_time < 20.0);
    }
}

#[test]
fn timed_composition_matches_iteration() {
    let p = candidate();
    let x = SectionPoint::new(-1.0, 0.0);
    let run = iterate(&p, x, 3, &cfg()).unwrap();
    let (y, t) = map_k_timed(&p, x, 3, &cfg()).unwrap();
    assert_eq!(Some(y), run[2].point());
    let total: f64 = run.iter().map(|r| r.flight_time().unwrap()).sum();
    assert!((t - total).abs() < 1e-12);
}

#[test]
fn samples_use_seventeen_digits() {
    let p = simple();
    let csv = samples_csv(&p, &[SectionPoint::new(-1.0, 0.0)], None, &cfg()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("u,v,u1,v1,flight_time,symbol"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    let u1: f64 = row[2].parse().unwrap();
    assert_eq!(
        u1.to_bits(),
        map_k(&p, SectionPoint::new(-1.0, 0.0), 1, &cfg())
            .unwrap()
            .u
            .to_bits()
    );
}

#[test]
fn discontinuity_structure_at_the_trefoil_candidate() {
    let p = candidate();
    let grid = ScanGrid {
        u_min: -2.4,
        u_max: 0.3,
        v_min: -0.6,
        v_max: 0.6,
        spacing: 0.03,
    };
    let ds = find_discontinuities(&p, &grid, &cfg()).unwrap();
    assert!(!ds.components.is_empty());
    assert!(ds.delta_polyline.len() >= 2);
    assert!(ds.rho_polyline.len() >= 2);
    let part = Partition2::from_structure(&p, &ds, ds.p0_estimate).unwrap();
    assert_eq!(part.classify(part.p_in_reference), Symbol::One);
    assert_eq!(part.classify(ds.p0_estimate), Symbol::Two);
    let (d, _, _) = polyline_distance(&ds.rho_polyline, ds.rho_polyline[0]).unwrap();
    assert!(d < 1e-12);
    assert_eq!(
        part.classify(ds.rho_polyline[ds.rho_polyline.len() / 2]),
        Symbol::Undecided
    );
    // The return time jumps across delta.
    let mid = ds.delta_polyline[ds.delta_polyline.len() / 2];
    let left = first_return(&p, SectionPoint::new(mid.u - 0.02, mid.v), &cfg()).unwrap();
    let right = first_return(&p, SectionPoint::new(mid.u + 0.02, mid.v), &cfg()).unwrap();
    let (tl, tr) = (left.flight_time().unwrap(), right.flight_time().unwrap());
    assert!((tl - tr).abs() > 0.5, "{tl} vs {tr}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn map_k_composes(u in -2.0f64..-0.5, v in -0.1f64..0.1, k1 in 1usize..3, k2 in 1usize..3) {
        let p = simple();
        let x = SectionPoint::new(u, v);
        let whole = map_k(&p, x, k1 + k2, &cfg());
        let split = map_k(&p, x, k1, &cfg()).and_then(|y| map_k(&p, y, k2, &cfg()));
        prop_assert_eq!(whole, split);
    }
}
