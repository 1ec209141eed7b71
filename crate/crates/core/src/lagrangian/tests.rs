use rand::Rng;

use super::*;
use crate::source_fields::intensity_minimal;

fn square(half: f64) -> Vec<(f64, f64)> {
    vec![(-half, half); 2]
}

#[test]
fn half_square_norm_is_totally_geodesic() {
    let graph = PotentialGraph::from_expr("0.5*(x1^2 + x2^2)", square(1.0)).unwrap();
    let r = graph_geometry_at(&graph, &[0.3, -0.2]).unwrap();
    assert_eq!(r.induced, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    assert_eq!(r.b_max(), 0.0);
    assert_eq!(r.minimal_residual, 0.0);
    assert!(r.hminimal_residual < 1e-10);
    assert_eq!(r.totally_geodesic_residual, 0.0);
}

#[test]
fn quartic_in_one_dimension() {
    let graph = PotentialGraph::from_expr("x1^4", vec![(0.5, 1.5)]).unwrap();
    let r = graph_geometry_at(&graph, &[1.0]).unwrap();
    assert!((r.det_hess - 12.0).abs() < 1e-12);
    assert!(r.minimal_residual > 0.1);
    let chart = flat_chart(&graph).unwrap();
    assert!(oracle_gap_at(&graph, &chart, &[1.0]).unwrap() < 1e-9);
}

#[test]
fn quartic_laplacian_matches_hand_value() {
    // u = x⁴/12: g = 2x², L = 2 log x, Δ_g L = −2/x⁴.
    let graph = PotentialGraph::from_expr("x1^4/12", vec![(0.5, 1.5)]).unwrap();
    for x in [0.8, 1.0, 1.3] {
        let lap = graph.laplacian_log_det(&[x]).unwrap();
        assert!((lap + 2.0 / x.powi(4)).abs() < 1e-6, "{x}: {lap}");
    }
}

#[test]
fn radial_laplacian_matches_symbolic_value() {
    // H = (5 + e^R(R − 1))^{1/2} in the plane; value from a symbolic computation.
    let p = crate::source_fields::intensity_hminimal(2, 1.0, 1.0, 5.0).unwrap();
    let lap = p.graph().laplacian_log_det(&[0.9, 0.7]).unwrap();
    assert!((lap + 0.112604623515891).abs() < 1e-7, "{lap}");
}

#[test]
fn saddle_is_split_signature_and_flat() {
    let graph = PotentialGraph::from_expr("x1*x2", square(1.0)).unwrap();
    let r = graph_geometry_at(&graph, &[0.1, 0.4]).unwrap();
    assert_eq!(r.induced, vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
    assert!((r.det_hess + 1.0).abs() < 1e-15);
    assert_eq!(r.b_max(), 0.0);
}

fn random_potential<R: Rng>(rng: &mut R) -> String {
    let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.4..0.4)).collect();
    format!(
        "x1^2 + 0.8*x2^2 + ({})*x1*x2 + ({})*x1^3 + ({})*x2^3 + ({})*exp({}*(x1 + x2))",
        c[0], c[1], c[2], c[3], c[4]
    )
}

#[test]
fn closed_form_agrees_with_immersion_oracle() {
    let mut rng = sampling::rng(7);
    let mut checked = 0;
    while checked < 32 {
        let graph = PotentialGraph::from_expr(&random_potential(&mut rng), square(0.5)).unwrap();
        let chart = flat_chart(&graph).unwrap();
        let x = sampling::point_in_box(&mut rng, &square(0.5), 0.05);
        match oracle_gap_at(&graph, &chart, &x) {
            Ok(gap) => assert!(gap < 1e-6, "gap {gap} at {x:?}"),
            Err(Error::Degenerate { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
        checked += 1;
    }
    let source = intensity_minimal(3, 1.0, 1.0).unwrap().graph();
    let chart = flat_chart(&source).unwrap();
    for x in source.region().sample(4, 3) {
        assert!(oracle_gap_at(&source, &chart, &x).unwrap() < 1e-6);
    }
}

#[test]
fn jacobi_formula_for_matrix_paths() {
    let mut rng = sampling::rng(11);
    let mut done = 0;
    while done < 20 {
        let n = rng.gen_range(2..5);
        let sym = |rng: &mut rand_chacha::ChaCha8Rng| {
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            &m + m.transpose()
        };
        let shift = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i % 2 == 0 {
                    3.0
                } else {
                    -3.0
                }
            } else {
                0.0
            }
        });
        let (a, b, c) = (sym(&mut rng) + shift, sym(&mut rng), sym(&mut rng));
        let path = |t: f64| &a + t * &b + t * t * &c;
        let Some(inv) = path(0.0).try_inverse() else { continue };
        if path(0.0).determinant().abs() < 1e-2 {
            continue;
        }
        // g'(0) = b
        let trace: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| inv[(j, i)] * b[(i, j)])
            .sum();
        let log_det = |t: f64| path(t).determinant().abs().ln();
        let central = |h: f64| (log_det(h) - log_det(-h)) / (2.0 * h);
        let fd = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
        assert!((trace - fd).abs() < 1e-8 * trace.abs().max(1.0), "{trace} vs {fd}");
        done += 1;
    }
}

#[test]
fn jh_is_gradient_of_log_det_to_the_minus_half() {
    let mut rng = sampling::rng(13);
    for _ in 0..8 {
        let graph = PotentialGraph::from_expr(&random_potential(&mut rng), square(0.5)).unwrap();
        let x = sampling::point_in_box(&mut rng, &square(0.5), 0.05);
        let r = graph_geometry_at(&graph, &x).unwrap();
        assert!(r.gradient_identity_residual < 1e-8, "{}", r.gradient_identity_residual);
        // The exponent −2 differs by a factor of four whenever J𝗛 ≠ 0.
        let jh = r.jh_tangential.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if jh > 1e-3 {
            assert!(r.gradient_identity_residual_exp2 > jh);
        }
    }
}

#[test]
fn quadratics_classify_as_totally_geodesic() {
    let graph = PotentialGraph::from_expr("1.5*x1^2 + 0.5*x1*x2 + x2^2", square(1.0)).unwrap();
    let c = classify(&graph, 16, 1).unwrap();
    // Hess = [[3, 0.5], [0.5, 2]]
    assert!((c.fitted_c0 - 5.75).abs() < 1e-12);
    assert!(c.minimal_residual_stat < 1e-10);
    assert!(c.hminimal_residual_stat < 1e-10);
    assert!(c.totally_geodesic_residual_stat < 1e-10);
    assert!(gauss_flatness_check(&graph, 8, 1).unwrap() < 1e-10);
}

#[test]
fn cubic_perturbation_breaks_minimality() {
    let source = intensity_minimal(3, 1.0, 1.0).unwrap().graph();
    let base = classify(&source, 16, 5).unwrap();
    assert!(base.minimal_residual_stat < 1e-6);
    let bumped = source.perturbed(Potential::parse("0.1*x1^3", 3).unwrap()).unwrap();
    assert!(classify(&bumped, 16, 5).unwrap().minimal_residual_stat > 1e-3);
}

#[test]
fn curved_hessian_metric() {
    // R₁₂₁₂ = −0.6127 at (1, 1), computed symbolically.
    let graph = PotentialGraph::from_expr("exp(x1) + x2^4 + x1*x2^3", vec![(0.5, 1.5); 2]).unwrap();
    let chart = induced_chart(&graph).unwrap();
    let r = chart.curvature_at(&[1.0, 1.0]).unwrap().riemann_lower;
    assert!(
        (r[[0, 1, 0, 1]].abs() - 0.612699836780283).abs() < 1e-9,
        "{}",
        r[[0, 1, 0, 1]]
    );
    assert!(gauss_flatness_check(&graph, 8, 2).unwrap() > 1e-2);
}

#[test]
fn homogeneous_quartic_hessian_metric_is_flat() {
    let graph = PotentialGraph::from_expr("x1^4 + x2^4 + x1^2*x2^2", vec![(0.5, 1.5); 2]).unwrap();
    assert!(gauss_flatness_check(&graph, 8, 2).unwrap() < 1e-8);
}

#[test]
fn functionally_related_potential_is_flat() {
    let graph = PotentialGraph::from_expr("exp(x1 + 2*x2) + 0.5*(x1^2 + x2^2)", square(1.0)).unwrap();
    assert!(gauss_flatness_check(&graph, 8, 2).unwrap() < 1e-5);
}

#[test]
fn rank_one_hessian_is_degenerate() {
    let graph = PotentialGraph::from_expr("exp(x1 + 2*x2)", square(1.0)).unwrap();
    assert!(matches!(
        gauss_flatness_check(&graph, 4, 2),
        Err(Error::Degenerate { .. })
    ));
    let graph = PotentialGraph::from_expr("x1^4", square(1.0)).unwrap();
    match classify(&graph, 4, 2) {
        Err(Error::Degenerate { what, location, .. }) => {
            assert_eq!(what, "Hessian");
            assert_eq!(location.len(), 2);
        }
        other => panic!("expected degeneracy, got {other:?}"),
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let p = Potential::parse("x1 + x2", 2).unwrap();
    assert!(PotentialGraph::new(p, Region::Box(vec![(0.0, 1.0)])).is_err());
}
