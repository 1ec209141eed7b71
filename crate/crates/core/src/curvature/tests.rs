use super::*;
use crate::manifold::{make_builtin, Builtin};
use crate::tangent_bundle::sample_bundle_points;

fn chart(b: Builtin) -> RiemannianChart {
    make_builtin(b).unwrap()
}

#[test]
fn flat_base_has_flat_bundle() {
    let c = chart(Builtin::Euclidean(2));
    for p in sample_bundle_points(&c, 4, 1) {
        let cf = ClosedForm::new(&c, &p).unwrap();
        assert_eq!(cf.rm_tensor().max_abs(), 0.0);
        assert!(curvature_oracle_at(&c, &p).unwrap().max_abs() < 1e-8);
        let rep = invariants_report(&c, &p, ReportOptions::default()).unwrap();
        assert_eq!(rep.einstein_residual, 0.0);
    }
}

#[test]
fn horizontal_lifts_on_sphere() {
    let c = chart(Builtin::Sphere2 { radius: 1.0 });
    for p in sample_bundle_points(&c, 8, 2) {
        let cf = ClosedForm::new(&c, &p).unwrap();
        let e = |i: usize| {
            let mut v = vec![0.0; 2];
            v[i] = 1.0;
            v
        };
        let h: Vec<_> = (0..2).map(|i| cf.frame.horizontal_lift(&e(i))).collect();
        let v: Vec<_> = (0..2).map(|i| cf.frame.vertical_lift(&e(i))).collect();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        assert!(cf.rm(&h[a], &h[b], &h[cc], &h[d]).abs() < 1e-10);
                        let base = cf.base.riemann_lower[[a, b, cc, d]];
                        assert!((cf.rm(&h[a], &h[b], &h[cc], &v[d]) - base).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn closed_form_symmetries() {
    let c = chart(Builtin::Warped3);
    for p in sample_bundle_points(&c, 4, 3) {
        let rm = ClosedForm::new(&c, &p).unwrap().rm_tensor();
        let d = rm.dim();
        for a in 0..d {
            for b in 0..d {
                for cc in 0..d {
                    for e in 0..d {
                        let v = rm[[a, b, cc, e]];
                        assert!((v + rm[[b, a, cc, e]]).abs() < 1e-10);
                        assert!((v + rm[[a, b, e, cc]]).abs() < 1e-10);
                        assert!((v - rm[[cc, e, a, b]]).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn closed_form_matches_oracle() {
    for b in [
        Builtin::Sphere2 { radius: 1.0 },
        Builtin::Hyperbolic2,
        Builtin::Warped2,
        Builtin::Warped3,
    ] {
        let c = chart(b);
        for p in sample_bundle_points(&c, 6, 4) {
            let rep = invariants_report(
                &c,
                &p,
                ReportOptions {
                    oracle: true,
                    covariant: false,
                },
            )
            .unwrap();
            assert!(rep.oracle_gap < 1e-4, "{}: {} at {:?}", c.name(), rep.oracle_gap, p);
        }
    }
}

#[test]
fn scalar_flat_and_ricci_structure() {
    for b in [
        Builtin::Sphere2 { radius: 1.0 },
        Builtin::Hyperbolic2,
        Builtin::Warped3,
        Builtin::Sphere3,
    ] {
        let c = chart(b);
        for p in sample_bundle_points(&c, 16, 5) {
            let inv = closed_invariants(&ClosedForm::new(&c, &p).unwrap());
            assert!(inv.scalar.abs() < 1e-8, "{}", inv.scalar);
            assert!(inv.ricci_structure_residual < 1e-8);
            assert!(inv.einstein_residual > 1e-3);
        }
    }
}

#[test]
fn weyl_of_constant_curvature_vanishes() {
    let c = chart(Builtin::Hyperbolic2);
    let p = BundlePoint::new(vec![0.1, 1.3], vec![0.5, -1.0]);
    let rep = invariants_report(
        &c,
        &p,
        ReportOptions {
            oracle: true,
            covariant: false,
        },
    )
    .unwrap();
    assert!(rep.weyl_max < 1e-5, "{}", rep.weyl_max);
    let w = chart(Builtin::Warped3);
    let p = BundlePoint::new(vec![0.4, 0.2, -0.3], vec![0.5, -1.0, 0.7]);
    let rep = invariants_report(
        &w,
        &p,
        ReportOptions {
            oracle: true,
            covariant: false,
        },
    )
    .unwrap();
    assert!(rep.weyl_max > 1e-2, "{}", rep.weyl_max);
}

#[test]
fn weyl_of_a_model_is_zero() {
    // A constant-curvature 4-dimensional tensor is pure trace.
    let g = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 + i as f64 } else { 0.1 });
    let gi = g.clone().try_inverse().unwrap();
    let rm = Tensor::from_fn(4, 4, |ix| {
        0.7 * (g[(ix[1], ix[2])] * g[(ix[0], ix[3])] - g[(ix[0], ix[2])] * g[(ix[1], ix[3])])
    });
    assert!(weyl_from(&rm, &g, &gi).max_abs() < 1e-12);
    let s = scalar_from(&ricci_from(&rm, &gi), &gi);
    assert!((s - 0.7 * 12.0).abs() < 1e-12);
}

#[test]
fn local_symmetry_dichotomy() {
    let s = chart(Builtin::Sphere2 { radius: 1.0 });
    let p = BundlePoint::new(vec![1.0, 2.0], vec![0.3, -0.8]);
    let r = oracle_covariant_riemann(&s, &p).unwrap().max_abs();
    assert!(r < 1e-4, "{r}");
    let w = chart(Builtin::Warped3);
    let p = BundlePoint::new(vec![0.2, 0.1, 0.3], vec![0.3, -0.8, 0.5]);
    let r = oracle_covariant_riemann(&w, &p).unwrap().max_abs();
    assert!(r > 1e-2, "{r}");
}

#[test]
fn weyl_of_a_nonconstant_surface_is_nonzero() {
    // Value from a symbolic computation of the 4-dimensional Weyl tensor.
    let c = chart(Builtin::Warped2);
    let p = BundlePoint::new(vec![0.4, 0.2], vec![0.5, -0.7]);
    let rep = invariants_report(
        &c,
        &p,
        ReportOptions {
            oracle: true,
            covariant: false,
        },
    )
    .unwrap();
    assert!((rep.weyl_max - 0.921060994002885).abs() < 1e-6, "{}", rep.weyl_max);
}
