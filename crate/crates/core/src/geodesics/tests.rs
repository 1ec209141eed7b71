use super::*;
use crate::manifold::{make_builtin, Builtin};
use std::f64::consts::FRAC_PI_2;

fn chart(b: Builtin) -> RiemannianChart {
    make_builtin(b).unwrap()
}

#[test]
fn euclidean_paths_are_affine() {
    let c = chart(Builtin::Euclidean(2));
    let p = BundlePoint::new(vec![0.1, -0.2], vec![1.0, 0.5]);
    let v = BundleVector::new(vec![0.3, 0.4], vec![-0.2, 0.1]);
    let a = integrate_split(&c, &p, &v, 1.0, 100).unwrap();
    let b = integrate_direct(&c, &p, &v, 1.0, 100).unwrap();
    for (t, q) in a.times.iter().zip(&a.points) {
        let expect = [0.1 + 0.3 * t, -0.2 + 0.4 * t, 1.0 - 0.2 * t, 0.5 + 0.1 * t];
        for (x, y) in q.iter().zip(expect) {
            assert!((x - y).abs() < 1e-13);
        }
    }
    assert!(path_gap(&a, &b) < 1e-12);
}

#[test]
fn equatorial_jacobi_field() {
    let c = chart(Builtin::Sphere2 { radius: 1.0 });
    let p = BundlePoint::new(vec![FRAC_PI_2, 1.0], vec![0.0, 0.0]);
    // on the equator Γ vanishes, so v̇ is already D_{ẋ}V
    let v = BundleVector::new(vec![0.0, 1.0], vec![1.0, 0.0]);
    let path = integrate_split(&c, &p, &v, 2.0, 2000).unwrap();
    for (t, q) in path.times.iter().zip(&path.points) {
        let g = c.metric_at(&q[..2]).unwrap();
        let norm = (g[(0, 0)] * q[2] * q[2] + g[(1, 1)] * q[3] * q[3]).sqrt();
        assert!((norm - t.sin().abs()).abs() < 1e-5, "t={t}: {norm}");
    }
}

#[test]
fn tangential_parallel_field_stays_tangent() {
    let c = chart(Builtin::Sphere2 { radius: 1.0 });
    let p = BundlePoint::new(vec![FRAC_PI_2, 1.0], vec![0.0, 1.0]);
    let v = BundleVector::new(vec![0.0, 1.0], vec![0.0, 0.0]);
    let path = integrate_split(&c, &p, &v, 1.0, 1000).unwrap();
    for (q, w) in path.points.iter().zip(&path.velocities) {
        assert!((q[2] - w[0]).abs() < 1e-10 && (q[3] - w[1]).abs() < 1e-10);
    }
}

#[test]
fn split_solution_satisfies_geodesic_and_jacobi_equations() {
    let c = chart(Builtin::Warped2);
    let p = BundlePoint::new(vec![0.2, 0.3], vec![0.5, -0.4]);
    let v = BundleVector::new(vec![0.4, -0.3], vec![0.2, 0.1]);
    let path = integrate_split(&c, &p, &v, 1.0, 1000).unwrap();
    let dt = path.times[1] - path.times[0];
    let n = 2;
    for i in (1..path.len() - 1).step_by(97) {
        let geo = c.curvature_at(&path.points[i][..n]).unwrap();
        let xd = &path.velocities[i][..n];
        let v = &path.points[i][n..];
        // D_{ẋ}V along the path, by differences of V and ẋ
        let dd =
            |j: usize, k: usize| (path.points[j + 1][k] - 2.0 * path.points[j][k] + path.points[j - 1][k]) / (dt * dt);
        for k in 0..n {
            let mut geo_res = dd(i, k);
            for a in 0..n {
                for b in 0..n {
                    geo_res += geo.gamma[[k, a, b]] * xd[a] * xd[b];
                }
            }
            assert!(geo_res.abs() < 1e-6, "geodesic residual {geo_res}");
        }
        let w_at = |j: usize| -> Vec<f64> {
            let g = c.connection_at(&path.points[j][..n]).unwrap();
            let (xd, v, vd) = (&path.velocities[j][..n], &path.points[j][n..], &path.velocities[j][n..]);
            (0..n)
                .map(|k| {
                    vd[k]
                        + (0..n)
                            .flat_map(|a| (0..n).map(move |b| (a, b)))
                            .map(|(a, b)| g.gamma[[k, a, b]] * xd[a] * v[b])
                            .sum::<f64>()
                })
                .collect()
        };
        let (wp, wm, w0) = (w_at(i + 1), w_at(i - 1), w_at(i));
        let r = geo.r_apply(v, xd, xd);
        for k in 0..n {
            let mut jac = (wp[k] - wm[k]) / (2.0 * dt) + r[k];
            for a in 0..n {
                for b in 0..n {
                    jac += geo.gamma[[k, a, b]] * xd[a] * w0[b];
                }
            }
            assert!(jac.abs() < 1e-6, "Jacobi residual {jac}");
        }
    }
}

#[test]
fn split_and_direct_agree() {
    for b in [Builtin::Sphere2 { radius: 1.0 }, Builtin::Hyperbolic2, Builtin::Warped3] {
        let c = chart(b);
        for (p, v) in sample_initial_conditions(&c, 2, 6, 1.0) {
            let gap = compare_geodesics(&c, &p, &v, 1.0, 1000).unwrap();
            assert!(gap < 1e-6, "{}: {gap}", c.name());
        }
    }
}

#[test]
fn energy_is_conserved() {
    let c = chart(Builtin::Sphere2 { radius: 1.0 });
    for (p, v) in sample_initial_conditions(&c, 2, 7, 1.0) {
        let a = integrate_split(&c, &p, &v, 1.0, 1000).unwrap();
        let b = integrate_direct(&c, &p, &v, 1.0, 1000).unwrap();
        assert!(energy_drift(&c, &a).unwrap() < 1e-5);
        assert!(energy_drift(&c, &b).unwrap() < 1e-5);
    }
}

#[test]
fn null_data_stays_null() {
    let c = chart(Builtin::Hyperbolic2);
    let p = BundlePoint::new(vec![0.0, 1.5], vec![0.3, 0.2]);
    // purely vertical initial velocity is null for G
    let v = BundleVector::new(vec![0.0, 0.0], vec![0.4, -0.3]);
    let path = integrate_split(&c, &p, &v, 1.0, 1000).unwrap();
    let e = energies(&c, &path).unwrap();
    assert!(e.iter().all(|x| x.abs() < 1e-5));
}

#[test]
fn fourth_order_convergence() {
    let c = chart(Builtin::Sphere2 { radius: 1.0 });
    let (p, v) = sample_initial_conditions(&c, 1, 3, 1.0).remove(0);
    let r = convergence_ratio(&c, &p, &v, 1.0, 50).unwrap();
    assert!((12.0..20.0).contains(&r), "{r}");
}

#[test]
fn time_reversal() {
    let c = chart(Builtin::Warped2);
    let p = BundlePoint::new(vec![0.2, 0.3], vec![0.5, -0.4]);
    let v = BundleVector::new(vec![0.4, -0.3], vec![0.2, 0.1]);
    let fwd = integrate_split(&c, &p, &v, 1.0, 1000).unwrap();
    let end = BundlePoint::from_coords(fwd.points.last().unwrap());
    let back_v: Vec<f64> = fwd.velocities.last().unwrap().iter().map(|x| -x).collect();
    let back = integrate_split(&c, &end, &BundleVector::from_coords(&back_v), 1.0, 1000).unwrap();
    let gap = fwd
        .points
        .iter()
        .rev()
        .zip(&back.points)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    assert!(gap < 1e-8, "{gap}");
}

#[test]
fn leaving_the_chart_is_flagged() {
    let c = chart(Builtin::Hyperbolic2);
    let p = BundlePoint::new(vec![0.0, 1.0], vec![0.0, 0.0]);
    let v = BundleVector::new(vec![0.0, -2.0], vec![0.0, 0.0]);
    let path = integrate_split(&c, &p, &v, 1.0, 100).unwrap();
    assert!(path.exited_at.is_some());
    assert!(matches!(
        compare_geodesics(&c, &p, &v, 1.0, 100),
        Err(Error::ExitedDomain { .. })
    ));
}

#[test]
fn csv_layout() {
    let c = chart(Builtin::Euclidean(2));
    let p = BundlePoint::new(vec![0.0, 0.0], vec![0.0, 0.0]);
    let v = BundleVector::new(vec![1.0, 0.0], vec![0.0, 0.0]);
    let csv = integrate_split(&c, &p, &v, 1.0, 2).unwrap().to_csv();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "t,x1,x2,v1,v2");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3], "1,1,0,0,0");
}
