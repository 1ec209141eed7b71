use super::*;
use crate::manifold::{make_builtin, Builtin};
use crate::tangent_bundle::sample_bundle_points;

fn points() -> Vec<LinePoint> {
    sample_line_points(64, 8, 42)
}

#[test]
fn embedding_of_simple_points() {
    let pt = LinePoint::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
    let e = embed(&pt);
    assert_eq!(e.x, vec![0.0, 0.0, 1.0]);
    assert_eq!(e.v, vec![0.0, -1.0, 0.0]);
    let zero = LinePoint::new([0.6, 0.0, 0.8], [0.0; 3]).unwrap();
    assert!(embed(&zero).v.iter().all(|c| *c == 0.0));
}

#[test]
fn derivative_of_first_frame_vector() {
    let pt = LinePoint::new([0.0, 0.6, 0.8], [1.5, 0.0, 0.0]).unwrap();
    let e1 = frame(&pt)[0];
    let want = [1.5, 0.0, 0.0, 1.5, 0.0, 0.0];
    assert!(max_gap(&embed_tangent(&e1).coords(), &want) < 1e-15);
    assert!(max_gap(&numeric_df(&e1), &want) < 1e-15);
}

#[test]
fn constraint_violations_are_rejected() {
    assert!(matches!(
        LinePoint::new([0.0, 0.0, 1.1], [1.0, 0.0, 0.0]),
        Err(Error::Constraint(_))
    ));
    assert!(matches!(
        LinePoint::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.1]),
        Err(Error::Constraint(_))
    ));
    let pt = LinePoint::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap();
    assert!(LineTangent::new(pt, [0.0, 0.0, 1.0], [0.0; 3]).is_err());
    // <p,v̇> + <ẋ,V> must vanish.
    assert!(LineTangent::new(pt, [1.0, 0.0, 0.0], [0.0; 3]).is_err());
    assert!(LineTangent::new(pt, [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]).is_ok());
}

#[test]
fn sampled_points_satisfy_constraints() {
    let pts = points();
    assert_eq!(pts.iter().filter(|p| p.v() == [0.0; 3]).count(), 8);
    for pt in &pts {
        assert!((norm(&pt.p()) - 1.0).abs() < 1e-12);
        assert!(dot(&pt.p(), &pt.v()).abs() < 1e-12);
        for x in pt.tangent_basis() {
            assert!(LineTangent::new(*pt, x.xdot(), x.vdot()).is_ok());
        }
    }
}

#[test]
fn embedding_is_isometric() {
    for pt in points() {
        let r = linespace_report(&pt).unwrap();
        assert!(r.isometry_residual < 1e-10, "{pt:?}: {}", r.isometry_residual);
        assert!(r.derivative_residual < 1e-12);
    }
}

#[test]
fn frame_norms_and_orthogonality() {
    for pt in points() {
        let f = linespace_report(&pt).unwrap().frame;
        assert!(f.norm_residual < 1e-10, "{:?}", f.norms);
        assert!(f.orthogonality_residual < 1e-10);
        assert!(f.df_display_gap < 1e-12);
    }
}

#[test]
fn mean_curvature_routes_agree() {
    for pt in points() {
        let r = linespace_report(&pt).unwrap();
        assert!(r.frame_vs_oracle < 1e-6, "{pt:?}: {}", r.frame_vs_oracle);
    }
}

#[test]
fn mean_curvature_is_minus_four_p_in_the_fiber() {
    // Confirmed by a third, symbolic route in spherical coordinates.
    for pt in points() {
        let r = linespace_report(&pt).unwrap();
        let p = pt.p();
        let want = [0.0, 0.0, 0.0, -4.0 * p[0], -4.0 * p[1], -4.0 * p[2]];
        assert!(max_gap(&r.h, &want) < 1e-8, "{pt:?}: {:?}", r.h);
        assert!(ambient_metric(&r.h, &r.h).abs() < 1e-12);
    }
}

#[test]
fn frame_second_fundamental_form_is_normal() {
    for pt in points().into_iter().step_by(7) {
        let r = linespace_report(&pt).unwrap();
        for h in &r.frame.h {
            for x in pt.tangent_basis() {
                assert!(ambient_metric(h, &numeric_df(&x)).abs() < 1e-10);
            }
        }
        // Normal space is spanned by (0, p) and (p, −p×V).
        let p = pt.p();
        let n2 = concat(&p, &scaled(-1.0, &cross(&p, &pt.v())));
        let n1 = concat(&[0.0; 3], &p);
        for h in &r.frame.h {
            let alpha = dot(&[h[0], h[1], h[2]], &p);
            let beta = (0..3).map(|i| (h[3 + i] - alpha * n2[3 + i]) * p[i]).sum::<f64>();
            let rebuilt: Vec<f64> = (0..6).map(|c| alpha * n2[c] + beta * n1[c]).collect();
            assert!(max_gap(h, &rebuilt) < 1e-10);
        }
    }
}

#[test]
fn kahler_map_is_isometric() {
    for pt in points() {
        assert!(kahler_isometry_residual(&pt) < 1e-10);
        let scaled_pt = LinePoint::new(pt.p(), scaled(3.5, &pt.v())).unwrap();
        assert!(kahler_isometry_residual(&scaled_pt) < 1e-10);
    }
    let zero = LinePoint::new([0.0, 0.0, 1.0], [0.0; 3]).unwrap();
    assert_eq!(kahler_isometry_residual(&zero), 0.0);
}

#[test]
fn ambient_metric_matches_sphere_chart() {
    let chart = make_builtin(Builtin::Sphere2 { radius: 1.0 }).unwrap();
    for bp in sample_bundle_points(&chart, 16, 3) {
        let gap = chart_consistency(&chart, &bp.x, &bp.v).unwrap();
        assert!(gap < 1e-8, "{bp:?}: {gap}");
    }
}
