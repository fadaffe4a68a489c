//! End-to-end checks across parsing, Newton data, fibers and connectivity.

use milnor::connectivity::{
    component_report, cyclic_cover_components, gcd_predict, join_points, sample_fiber, ConnectOptions, FactoredGerm,
};
use milnor::fiber::{
    deform_path_to_fiber, flow_monodromy, project_to_tube, rotation_number, FibrationConfig, SampledPath,
};
use milnor::newton::{newton_data, nondegeneracy_survey, Verdict, DEFAULT_SEARCH_TOL};
use milnor::{parse_mixed_expression, MixedPolynomial};
use num_complex::Complex64;

fn p(s: &str) -> MixedPolynomial {
    parse_mixed_expression(s).unwrap()
}

fn cfg() -> FibrationConfig {
    FibrationConfig { delta: 1e-3, ..FibrationConfig::default() }
}

#[test]
fn convenient_nondegenerate_germ_has_connected_fiber() {
    let f = p("z1^2 + z2^3");
    let data = newton_data(&f).unwrap();
    assert!(data.convenient);
    assert!(data.vanishing_subspaces.is_empty());
    let survey = nondegeneracy_survey(&f, 5, 300, 0, DEFAULT_SEARCH_TOL).unwrap();
    assert!(survey.iter().all(|r| r.verdict == Verdict::NoWitness));
    let r = component_report(&f, &cfg(), 60, 30, 0, &ConnectOptions::default()).unwrap();
    assert_eq!(r.component_count, 1);
    assert!(r.validate(&f, &cfg(), 1e-8));
}

#[test]
fn mixed_germ_with_conjugates_is_connected() {
    // Holomorphic in z2, anti-holomorphic leading term in z1; regular near the origin.
    let f = p("zb1^2 + z2^3 + 0.1*z1*zb1*z2");
    let r = component_report(&f, &cfg(), 60, 30, 1, &ConnectOptions::default()).unwrap();
    assert_eq!(r.component_count, 1);
}

#[test]
fn sampled_count_never_undercuts_gcd() {
    for (m, count, seed) in [([2u32, 4u32], 40, 3u64), ([3, 3], 24, 4)] {
        let germ = FactoredGerm::new(vec![p("z1").with_arity(2), p("z2")], m.to_vec()).unwrap();
        let f = germ.product();
        let r = component_report(&f, &cfg(), count, 10, seed, &ConnectOptions::default()).unwrap();
        assert!(r.component_count >= gcd_predict(&germ) as usize, "{m:?}: {}", r.component_count);
        assert_eq!(cyclic_cover_components(&m).unwrap(), gcd_predict(&germ) as usize);
        assert_eq!(r.recount(), r.component_count);
    }
}

#[test]
fn reports_are_deterministic() {
    let f = p("z1^2*z2^3");
    let a = component_report(&f, &cfg(), 40, 20, 11, &ConnectOptions::default()).unwrap();
    let b = component_report(&f, &cfg(), 40, 20, 11, &ConnectOptions::default()).unwrap();
    assert_eq!(a, b);
    let c = sample_fiber(&f, &cfg(), 40, 12, &ConnectOptions::default()).unwrap();
    assert_ne!(a.points, c);
}

#[test]
fn edges_carry_valid_evidence() {
    let f = p("z1*z2^2");
    let pts = sample_fiber(&f, &cfg(), 30, 5, &ConnectOptions::default()).unwrap();
    let r = join_points(&f, &cfg(), pts, 10, 5, &ConnectOptions::default());
    assert!(!r.edges.is_empty());
    for e in &r.edges {
        let path = &r.paths[e.path];
        assert!(path.angle_spread(&f).unwrap() <= 1e-6);
        assert!(path.max_gap() <= 0.02 + 1e-12);
    }
    let mut sizes = r.component_sizes.clone();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(sizes, r.component_sizes);
    assert_eq!(sizes.iter().sum::<usize>(), r.points.len());
}

#[test]
fn tube_loop_deforms_after_correction() {
    // Ambient loop on the tube winding once; closing it with the flow through −2π
    // and deforming yields a path in the fiber through the start.
    let f = p("z1*z2");
    let c = cfg();
    let z0 = vec![Complex64::new(0.1, 0.0), Complex64::new(0.01, 0.0)];
    let nodes: Vec<Vec<Complex64>> = (0..=400)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 400.0;
            let z = vec![z0[0] * Complex64::from_polar(1.0, t), z0[1]];
            project_to_tube(&f, &z, &c).unwrap().z
        })
        .collect();
    let sigma = SampledPath::from_nodes(&f, nodes).unwrap();
    assert_eq!(rotation_number(&f, &sigma).unwrap(), 1);
    let end = milnor::fiber::FiberPoint::new(&f, sigma.last().to_vec(), Complex64::new(c.delta, 0.0)).unwrap();
    let omega = milnor::fiber::correcting_loop(&f, &end, 1, &c).unwrap();
    let closed = sigma.concat(&f, &omega).unwrap();
    assert_eq!(rotation_number(&f, &closed).unwrap(), 0);
    let hat = deform_path_to_fiber(&f, &closed, &c).unwrap();
    assert!(hat.angle_spread(&f).unwrap() <= 1e-6);
    let back = flow_monodromy(&f, &end, -std::f64::consts::TAU, &c).unwrap();
    let gap: f64 = hat.last().iter().zip(&back.z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(gap < 1e-8);
}

#[test]
fn json_forms() {
    let f = p("z1*zb1 + (2-1i)*z2");
    let json = serde_json::to_value(&f).unwrap();
    assert_eq!(json["n"], 2);
    let back: MixedPolynomial = serde_json::from_value(json).unwrap();
    assert_eq!(back, f);
    let path = SampledPath::constant(&f, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    let v = serde_json::to_value(&path).unwrap();
    assert_eq!(v["nodes"], serde_json::json!([[1.0, 0.0, 0.0, 0.0]]));
    assert_eq!(v["psi"], serde_json::json!([0.0]));
}
