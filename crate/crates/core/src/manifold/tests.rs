use super::*;
use crate::fd;

fn flat(t: &Tensor) -> Vec<f64> {
    t.data().to_vec()
}

/// Christoffels from finite differences of the metric values only.
fn fd_gamma(chart: &RiemannianChart, x: &[f64]) -> Tensor {
    let n = chart.dim();
    let jac = fd::jacobian(|y| Ok(chart.metric_at(y)?.iter().copied().collect()), x, 1e-3, true).unwrap();
    let g = chart.metric_at(x).unwrap();
    let gi = g.clone().try_inverse().unwrap();
    // nalgebra storage is column-major: entry (a,b) at b*n + a
    let dg = |a: usize, b: usize, p: usize| jac[p][b * n + a];
    Tensor::from_fn(n, 3, |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        (0..n)
            .map(|l| 0.5 * gi[(k, l)] * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l)))
            .sum()
    })
}

fn fd_riemann(chart: &RiemannianChart, x: &[f64]) -> Tensor {
    let n = chart.dim();
    let jac = fd::jacobian(|y| Ok(flat(&chart.connection_at(y)?.gamma)), x, 1e-3, true).unwrap();
    let gamma = chart.connection_at(x).unwrap().gamma;
    let dgam = |k: usize, i: usize, j: usize, m: usize| jac[m][(k * n + i) * n + j];
    Tensor::from_fn(n, 4, |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut s = dgam(l, j, k, i) - dgam(l, i, k, j);
        for m in 0..n {
            s += gamma[[l, i, m]] * gamma[[m, j, k]] - gamma[[l, j, m]] * gamma[[m, i, k]];
        }
        s
    })
}

fn fd_cov_riemann(chart: &RiemannianChart, x: &[f64]) -> Tensor {
    let n = chart.dim();
    let jac = fd::jacobian(|y| Ok(flat(&chart.curvature_at(y)?.riemann_mixed)), x, 1e-3, true).unwrap();
    let geo = chart.curvature_at(x).unwrap();
    let (gm, r) = (&geo.gamma, &geo.riemann_mixed);
    Tensor::from_fn(n, 5, |ix| {
        let (l, i, j, k, m) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        let mut s = jac[m][((l * n + i) * n + j) * n + k];
        for a in 0..n {
            s += gm[[l, m, a]] * r[[a, i, j, k]]
                - gm[[a, m, i]] * r[[l, a, j, k]]
                - gm[[a, m, j]] * r[[l, i, a, k]]
                - gm[[a, m, k]] * r[[l, i, j, a]];
        }
        s
    })
}

/// FD oracles lose accuracy near coordinate poles, so they sample a
/// smaller box.
fn oracle_points(chart: &RiemannianChart, count: usize, seed: u64) -> Vec<Vec<f64>> {
    crate::sampling::sample_box(chart.domain(), count, seed, 0.3)
}

fn all_builtins() -> Vec<RiemannianChart> {
    [
        Builtin::Euclidean(3),
        Builtin::Sphere2 { radius: 1.0 },
        Builtin::Sphere2 { radius: 2.0 },
        Builtin::Hyperbolic2,
        Builtin::Sphere3,
        Builtin::Warped2,
        Builtin::Warped3,
    ]
    .into_iter()
    .map(|b| make_builtin(b).unwrap())
    .collect()
}

#[test]
fn christoffels_match_finite_differences() {
    for chart in all_builtins() {
        for x in oracle_points(&chart, 8, 7) {
            let exact = chart.connection_at(&x).unwrap().gamma;
            let oracle = fd_gamma(&chart, &x);
            let err = exact.max_abs_diff(&oracle);
            assert!(err < 1e-7 * (1.0 + oracle.max_abs()), "{}: {err}", chart.name());
        }
    }
}

#[test]
fn riemann_matches_finite_differences() {
    for chart in all_builtins() {
        for x in oracle_points(&chart, 6, 11) {
            let exact = chart.curvature_at(&x).unwrap().riemann_mixed;
            let oracle = fd_riemann(&chart, &x);
            let err = exact.max_abs_diff(&oracle);
            assert!(err < 1e-6 * (1.0 + oracle.max_abs()), "{}: {err}", chart.name());
        }
    }
}

#[test]
fn covariant_riemann_matches_finite_differences() {
    for chart in all_builtins() {
        for x in oracle_points(&chart, 4, 13) {
            let exact = chart.geometry_at(&x).unwrap().cov_riemann.unwrap();
            let oracle = fd_cov_riemann(&chart, &x);
            let err = exact.max_abs_diff(&oracle);
            assert!(err < 1e-6 * (1.0 + oracle.max_abs()), "{}: {err}", chart.name());
        }
    }
}

#[test]
fn scalar_curvature_of_model_spaces() {
    let cases = [
        (Builtin::Sphere2 { radius: 1.0 }, 2.0),
        (Builtin::Sphere2 { radius: 2.0 }, 0.5),
        (Builtin::Hyperbolic2, -2.0),
        (Builtin::Sphere3, 6.0),
        (Builtin::Euclidean(4), 0.0),
    ];
    for (b, s) in cases {
        let chart = make_builtin(b).unwrap();
        for x in chart.sample_points(16, 3) {
            let geo = chart.curvature_at(&x).unwrap();
            assert!((geo.scalar - s).abs() < 1e-10, "{}: {}", chart.name(), geo.scalar);
        }
    }
}

#[test]
fn symmetries_and_first_bianchi() {
    for chart in all_builtins() {
        let n = chart.dim();
        for x in chart.sample_points(6, 5) {
            let rm = chart.curvature_at(&x).unwrap().riemann_lower;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = rm[[i, j, k, l]];
                            assert!((v + rm[[j, i, k, l]]).abs() < 1e-10);
                            assert!((v + rm[[i, j, l, k]]).abs() < 1e-10);
                            assert!((v - rm[[k, l, i, j]]).abs() < 1e-10);
                            let b = v + rm[[j, k, i, l]] + rm[[k, i, j, l]];
                            assert!(b.abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn second_bianchi_identity() {
    for chart in all_builtins() {
        let n = chart.dim();
        for x in chart.sample_points(4, 9) {
            let c = chart.geometry_at(&x).unwrap().cov_riemann.unwrap();
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for m in 0..n {
                                let s = c[[l, k, i, j, m]] + c[[l, i, m, j, k]] + c[[l, m, k, j, i]];
                                assert!(s.abs() < 1e-9, "{}: {s}", chart.name());
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn connection_is_metric() {
    for chart in all_builtins() {
        let n = chart.dim();
        for x in chart.sample_points(6, 21) {
            let conn = chart.connection_at(&x).unwrap();
            let jac = fd::jacobian(|y| Ok(chart.metric_at(y)?.iter().copied().collect()), &x, 1e-3, true).unwrap();
            for m in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut s = jac[m][j * n + i];
                        for a in 0..n {
                            s -= conn.gamma[[a, m, i]] * conn.g[(a, j)] + conn.gamma[[a, m, j]] * conn.g[(i, a)];
                        }
                        assert!(s.abs() < 1e-7, "{}: {s}", chart.name());
                    }
                }
            }
        }
    }
}

#[test]
fn constant_curvature_has_parallel_riemann() {
    for b in [Builtin::Sphere2 { radius: 1.0 }, Builtin::Hyperbolic2, Builtin::Sphere3] {
        let chart = make_builtin(b).unwrap();
        for x in chart.sample_points(8, 2) {
            let c = chart.geometry_at(&x).unwrap().cov_riemann.unwrap();
            assert!(c.max_abs() < 1e-9, "{}: {}", chart.name(), c.max_abs());
        }
    }
}

#[test]
fn warped_surface_has_nonparallel_riemann() {
    let chart = make_builtin(Builtin::Warped2).unwrap();
    let x = [0.3, 0.1];
    let d = chart.dv_riemann(&x, &[1.0, 0.0]).unwrap();
    assert!(d.max_abs() > 1e-2);
    // On a surface R^l_ijk = K (δ^l_i g_jk − δ^l_j g_ik); D_v R = v(K) (…).
    let geo = chart.curvature_at(&x).unwrap();
    let k = geo.scalar / 2.0;
    let eps = 1e-5;
    let kp = chart.curvature_at(&[x[0] + eps, x[1]]).unwrap().scalar / 2.0;
    let km = chart.curvature_at(&[x[0] - eps, x[1]]).unwrap().scalar / 2.0;
    let dk = (kp - km) / (2.0 * eps);
    assert!(k.abs() > 1e-3);
    let expect = dk * geo.g[(1, 1)];
    assert!(
        (d[[0, 0, 1, 1]] - expect).abs() < 1e-7,
        "{} vs {expect}",
        d[[0, 0, 1, 1]]
    );
}

#[test]
fn sphere_curvature_values() {
    let chart = make_builtin(Builtin::Sphere2 { radius: 1.0 }).unwrap();
    let th: f64 = 0.7;
    let geo = chart.curvature_at(&[th, 1.0]).unwrap();
    assert!((geo.gamma[[0, 1, 1]] + th.sin() * th.cos()).abs() < 1e-14);
    assert!((geo.gamma[[1, 0, 1]] - th.cos() / th.sin()).abs() < 1e-14);
    // Rm(∂θ,∂φ,∂φ,∂θ) = K (g_θθ g_φφ) = sin²θ
    assert!((geo.riemann_lower[[0, 1, 1, 0]] - th.sin().powi(2)).abs() < 1e-13);
    assert!((geo.ricci[(0, 0)] - 1.0).abs() < 1e-13);
}

#[test]
fn degenerate_and_outside_points() {
    let chart = RiemannianChart::from_strings(
        "cone",
        default_vars(2),
        vec![(-1.0, 1.0), (-1.0, 1.0)],
        &[vec!["1".into(), "0".into()], vec!["0".into(), "x1^2".into()]],
    )
    .unwrap();
    match chart.curvature_at(&[0.0, 0.2]) {
        Err(Error::Degenerate { det, location, .. }) => {
            assert_eq!(location, vec![0.0, 0.2]);
            assert!(det < DET_EPS);
        }
        other => panic!("expected degenerate error, got {other:?}"),
    }
    assert!(matches!(chart.metric_at(&[2.0, 0.0]), Err(Error::OutsideDomain(_))));
}

#[test]
fn json_definition_round_trip() {
    let text = r#"{"name":"h2","n":2,"domain":[[-1,1],[0.5,2]],"metric":[["1/x2^2","0"],["0","1/x2^2"]]}"#;
    let chart = RiemannianChart::from_json(text).unwrap();
    assert_eq!(chart.variables(), &["x1".to_string(), "x2".to_string()]);
    let s = chart.curvature_at(&[0.0, 1.0]).unwrap().scalar;
    assert!((s + 2.0).abs() < 1e-12);
    let asym = r#"{"name":"b","n":2,"domain":[[-1,1],[-1,1]],"metric":[["1","x1"],["0","1"]]}"#;
    assert!(matches!(RiemannianChart::from_json(asym), Err(Error::Definition(_))));
    assert!(matches!(RiemannianChart::from_json("{"), Err(Error::Definition(_))));
}

#[test]
fn builtin_names() {
    assert_eq!(Builtin::parse("euclidean3").unwrap(), Builtin::Euclidean(3));
    assert_eq!(Builtin::parse("Sphere2").unwrap(), Builtin::Sphere2 { radius: 1.0 });
    assert!(Builtin::parse("torus").is_err());
}
