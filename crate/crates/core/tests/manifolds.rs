use rossler_core::flow::{fixed_points, jacobian, mat_vec, Params};
use rossler_core::integrator::IntegratorConfig;
use rossler_core::manifolds::{
    certify_trefoil, hetero_mismatch, separatrix_direction, trace_separatrix, trefoil_search,
    Branch, HeteroConfig, ParamAxis, SearchOptions, SeparatrixEnd, SeparatrixSource, HETERO_TOL,
};
use rossler_core::spectral::saddle_report;

fn reference_point() -> Params {
    Params::new(0.468, 0.3, 4.615).unwrap()
}

fn candidate() -> Params {
    Params::new(0.4674094238964985, 0.3, 4.631512274927214).unwrap()
}

#[test]
fn separatrix_directions_are_real_eigenvectors() {
    let p = reference_point();
    let rep = saddle_report(&p).unwrap();
    for (src, gamma) in [
        (SeparatrixSource::PInStable, rep.spectrum_in.gamma),
        (SeparatrixSource::POutUnstable, rep.spectrum_out.gamma),
    ] {
        let (base, v) = separatrix_direction(&p, src).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(v.z >= 0.0);
        let r = mat_vec(&jacobian(&p, base), v) - v * gamma;
        assert!(r.norm() < 1e-9, "{src:?}: {:e}", r.norm());
    }
}

#[test]
fn stable_branches_start_at_p_in() {
    let p = reference_point();
    let cfg = IntegratorConfig::default();
    for b in [Branch::Plus, Branch::Minus] {
        let s = trace_separatrix(&p, SeparatrixSource::PInStable, b, &cfg, 50.0).unwrap();
        assert!(s.curve.is_backward());
        assert!(s.curve.first().1.norm() < 1e-6);
        assert!(matches!(
            s.end,
            SeparatrixEnd::ArclengthCap | SeparatrixEnd::TimeCap | SeparatrixEnd::Escaped { .. }
        ));
    }
}

#[test]
fn one_unstable_branch_of_p_out_stays_bounded() {
    let p = reference_point();
    let cfg = IntegratorConfig::default();
    let fp = fixed_points(&p).unwrap();
    let ends: Vec<bool> = [Branch::Plus, Branch::Minus]
        .iter()
        .map(|&b| {
            let s = trace_separatrix(&p, SeparatrixSource::POutUnstable, b, &cfg, 400.0).unwrap();
            assert!(s.curve.first().1.dist(fp.p_out) < 1e-5);
            s.is_bounded()
        })
        .collect();
    assert!(ends.iter().any(|&b| b), "{ends:?}");
}

#[test]
fn candidate_has_a_smaller_mismatch_than_the_reference_point() {
    let hc = HeteroConfig::default();
    let at_reference = hetero_mismatch(&reference_point(), &hc).unwrap().value;
    let at_candidate = hetero_mismatch(&candidate(), &hc).unwrap().value;
    assert!(at_candidate < HETERO_TOL, "{at_candidate:e}");
    assert!(at_candidate < at_reference);
}

#[test]
fn search_trace_is_monotone() {
    let opts = SearchOptions {
        max_iter: 40,
        ..SearchOptions::default()
    };
    let r = trefoil_search(
        reference_point(),
        (ParamAxis::A, ParamAxis::C),
        &opts,
        &HeteroConfig::default(),
    )
    .unwrap();
    assert!(r.is_monotone());
    assert!(r.mismatch <= r.seed_mismatch);
    assert!((r.params.b - 0.3).abs() == 0.0);
    assert!((r.params.a - 0.468).abs() <= 0.05 && (r.params.c - 4.615).abs() <= 0.05);
}

#[test]
fn degenerate_search_arguments_are_rejected() {
    let hc = HeteroConfig::default();
    let same = trefoil_search(
        reference_point(),
        (ParamAxis::A, ParamAxis::A),
        &SearchOptions::default(),
        &hc,
    );
    assert!(same.is_err());
    let empty = SearchOptions {
        half_width: 0.0,
        ..SearchOptions::default()
    };
    assert!(trefoil_search(reference_point(), (ParamAxis::A, ParamAxis::C), &empty, &hc).is_err());
}

#[test]
fn certificate_at_the_candidate() {
    let cert = certify_trefoil(&candidate(), &HeteroConfig::default()).unwrap();
    assert!(cert.is_valid(), "{:?}", cert.refutation);
    assert_eq!(cert.crossing_count_on_section, 1);
    assert!(cert.transverse);
    assert_eq!(cert.knot_poly, vec![1, -1, 1]);
    let p0 = cert.p0.unwrap();
    assert!(
        (p0.u + 1.549).abs() < 0.01 && (p0.v + 0.046).abs() < 0.01,
        "{p0:?}"
    );
}

#[test]
fn certificate_at_the_reference_point_is_refuted() {
    let cert = certify_trefoil(&reference_point(), &HeteroConfig::default()).unwrap();
    assert!(!cert.is_valid());
    assert!(cert.mismatch > HETERO_TOL);
}
