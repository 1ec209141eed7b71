//! The space of oriented lines in ℝ³, modelled as `TS²` in ambient
//! coordinates, and its embedding `(p, V) ↦ (p, −p×V)` into `Tℝ³`.
//!
//! Tangent vectors are stored as ambient pairs `(ẋ, v̇)`; the split used by
//! the metrics is `ΠX = ẋ`, `KX = v̇ + ⟨V, ẋ⟩p`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::scalar::{seed2, Scalar, D1};
use crate::manifold::RiemannianChart;
use crate::sampling;
use crate::submanifold::{immersion_geometry_at, Immersion};
use crate::tangent_bundle::{BundleFrame, BundlePoint, BundleVector};

/// Input constraints are enforced to this tolerance.
pub const CONSTRAINT_TOL: f64 = 1e-9;

type V3 = [f64; 3];

fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn lin<T: Scalar>(a: T, x: &[T; 3], b: T, y: &[T; 3]) -> [T; 3] {
    [a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]]
}

fn lift<T: Scalar>(v: &V3) -> [T; 3] {
    v.map(T::cst)
}

fn norm(v: &V3) -> f64 {
    dot(v, v).sqrt()
}

fn scaled(s: f64, v: &V3) -> V3 {
    v.map(|c| s * c)
}

fn concat(a: &V3, b: &V3) -> Vec<f64> {
    a.iter().chain(b).copied().collect()
}

/// Orthonormal `(e₁, e₂)` spanning `T_pS²`, with `e₂ = p × e₁`.
pub fn tangent_frame(p: &V3) -> (V3, V3) {
    let axis = (0..3).min_by(|&i, &j| p[i].abs().total_cmp(&p[j].abs())).unwrap();
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let t = lin(1.0, &a, -dot(&a, p), p);
    let e1 = scaled(1.0 / norm(&t), &t);
    (e1, cross(p, &e1))
}

/// An oriented line: unit direction `p` and `V ⊥ p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePoint {
    p: V3,
    v: V3,
}

impl LinePoint {
    pub fn new(p: V3, v: V3) -> Result<Self> {
        if (norm(&p) - 1.0).abs() > CONSTRAINT_TOL {
            return Err(Error::Constraint(format!("|p| = {} is not 1", norm(&p))));
        }
        if dot(&p, &v).abs() > CONSTRAINT_TOL {
            return Err(Error::Constraint(format!("<p, V> = {} is not 0", dot(&p, &v))));
        }
        Ok(Self { p, v })
    }

    pub fn p(&self) -> V3 {
        self.p
    }

    pub fn v(&self) -> V3 {
        self.v
    }

    /// Tangent vectors `(e₁,0), (e₂,0), (0,e₁), (0,e₂)` in `(Π, K)` form.
    pub fn tangent_basis(&self) -> [LineTangent; 4] {
        let (e1, e2) = tangent_frame(&self.p);
        let z = [0.0; 3];
        [(e1, z), (e2, z), (z, e1), (z, e2)].map(|(pi, k)| LineTangent::from_split(*self, pi, k))
    }
}

/// `X ∈ T_{(p,V)}TS²` as ambient derivatives `(ẋ, v̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineTangent {
    at: LinePoint,
    xdot: V3,
    vdot: V3,
}

impl LineTangent {
    pub fn new(at: LinePoint, xdot: V3, vdot: V3) -> Result<Self> {
        let c1 = dot(&at.p, &xdot);
        let c2 = dot(&at.p, &vdot) + dot(&xdot, &at.v);
        if c1.abs() > CONSTRAINT_TOL || c2.abs() > CONSTRAINT_TOL {
            return Err(Error::Constraint(format!(
                "tangent constraints <p,ẋ> = {c1:e}, <p,v̇> + <ẋ,V> = {c2:e}"
            )));
        }
        Ok(Self { at, xdot, vdot })
    }

    /// The vector with `ΠX = pi` and `KX = k`, both tangent to the sphere at `p`.
    pub fn from_split(at: LinePoint, pi: V3, k: V3) -> Self {
        let vdot = lin(1.0, &k, -dot(&at.v, &pi), &at.p);
        Self { at, xdot: pi, vdot }
    }

    pub fn at(&self) -> LinePoint {
        self.at
    }

    pub fn xdot(&self) -> V3 {
        self.xdot
    }

    pub fn vdot(&self) -> V3 {
        self.vdot
    }

    pub fn pi(&self) -> V3 {
        self.xdot
    }

    pub fn k(&self) -> V3 {
        lin(1.0, &self.vdot, dot(&self.at.v, &self.xdot), &self.at.p)
    }

    /// A curve through `at` with velocity `self`: a great circle for `p`
    /// and `V` carried by the same rotation.
    fn curve<T: Scalar>(&self, t: T) -> ([T; 3], [T; 3]) {
        let (p, v) = (self.at.p, self.at.v);
        let a = self.pi();
        let speed = norm(&a);
        let moved = lin(T::cst(1.0), &lift(&v), t, &lift(&self.k()));
        if speed == 0.0 {
            return (lift(&p), moved);
        }
        let ahat = scaled(1.0 / speed, &a);
        let axis: [T; 3] = lift(&cross(&p, &ahat));
        let theta = t * T::cst(speed);
        let (c, s) = (theta.cos(), theta.sin());
        let pt = lin(c, &lift(&p), s, &lift(&ahat));
        // Rodrigues rotation about `axis`, which maps p to pt.
        let k_dot = dot(&axis, &moved);
        let rotated = lin(c, &moved, s, &cross(&axis, &moved));
        let vt = lin(T::cst(1.0), &rotated, k_dot * (T::cst(1.0) - c), &axis);
        (pt, vt)
    }
}

/// `f(p, V) = (p, −p×V)` in `Tℝ³` coordinates.
pub fn embed(pt: &LinePoint) -> BundlePoint {
    BundlePoint::new(pt.p.to_vec(), scaled(-1.0, &cross(&pt.p, &pt.v)).to_vec())
}

/// `Π df X = ΠX`, `K df X = −ΠX×V − p×KX`.
pub fn embed_tangent(x: &LineTangent) -> BundleVector {
    let (p, v) = (x.at.p, x.at.v);
    let k = lin(-1.0, &cross(&x.pi(), &v), -1.0, &cross(&p, &x.k()));
    BundleVector::new(x.pi().to_vec(), k.to_vec())
}

/// `𝔾(X, Y) = ⟨KX, p×ΠY⟩ − ⟨ΠX, p×KY⟩`.
pub fn line_metric(x: &LineTangent, y: &LineTangent) -> f64 {
    let p = x.at.p;
    dot(&x.k(), &cross(&p, &y.pi())) - dot(&x.pi(), &cross(&p, &y.k()))
}

/// The neutral metric of `TS²`: `⟨ΠX, KY⟩ + ⟨KX, ΠY⟩`.
pub fn neutral_metric(x: &LineTangent, y: &LineTangent) -> f64 {
    dot(&x.pi(), &y.k()) + dot(&x.k(), &y.pi())
}

/// The flat neutral metric of `Tℝ³` on `(ẋ, v̇)` pairs.
fn ambient_metric(a: &[f64], b: &[f64]) -> f64 {
    (0..3).map(|i| a[i] * b[3 + i] + a[3 + i] * b[i]).sum()
}

fn embedded_curve<T: Scalar>(x: &LineTangent, t: T) -> Vec<T> {
    let (p, v) = x.curve(t);
    let w = cross(&p, &v);
    vec![p[0], p[1], p[2], -w[0], -w[1], -w[2]]
}

/// First derivative of `f` along `X`, by dual numbers.
pub fn numeric_df(x: &LineTangent) -> Vec<f64> {
    embedded_curve(x, D1::new(0.0, 1.0)).iter().map(|d| d.eps).collect()
}

/// Second derivative of `f ∘ c` at 0 for the curve of `X`.
fn numeric_acceleration(x: &LineTangent) -> Vec<f64> {
    embedded_curve(x, seed2(0.0, 0, 0, 0))
        .iter()
        .map(|d| d.eps.eps)
        .collect()
}

/// Component of `w` normal to the embedded tangent space, under `G`.
fn normal_part(pt: &LinePoint, w: &[f64]) -> Vec<f64> {
    let tangents: Vec<Vec<f64>> = pt.tangent_basis().iter().map(numeric_df).collect();
    let gram = DMatrix::from_fn(4, 4, |a, b| ambient_metric(&tangents[a], &tangents[b]));
    let rhs = DMatrix::from_fn(4, 1, |a, _| ambient_metric(&tangents[a], w));
    let coeff = gram.lu().solve(&rhs).expect("induced metric is nondegenerate");
    let mut out = w.to_vec();
    for a in 0..4 {
        for c in 0..6 {
            out[c] -= coeff[a] * tangents[a][c];
        }
    }
    out
}

/// `h(df X, df X)` as the normal part of the acceleration of `f ∘ c`.
pub fn second_fundamental_form(x: &LineTangent) -> Vec<f64> {
    normal_part(&x.at, &numeric_acceleration(x))
}

/// The orthogonal frame `E₁..E₄` built on `V` (or on a unit `ξ ⊥ p` when `V = 0`).
pub fn frame(pt: &LinePoint) -> [LineTangent; 4] {
    let u = if norm(&pt.v) > 0.0 {
        pt.v
    } else {
        tangent_frame(&pt.p).0
    };
    let pu = cross(&pt.p, &u);
    let neg = |a: V3| scaled(-1.0, &a);
    [(u, pu), (pu, u), (u, neg(pu)), (neg(pu), u)].map(|(pi, k)| LineTangent::from_split(*pt, pi, k))
}

/// Local parametrization `(s, t) ↦ (p(s), V(s, t))` of `TS²` followed by `f`:
/// gnomonic in `p`, linear in the fiber.
#[derive(Debug, Clone)]
pub struct LinePatch {
    pt: LinePoint,
    e1: V3,
    e2: V3,
}

impl LinePatch {
    pub fn new(pt: LinePoint) -> Self {
        let (e1, e2) = tangent_frame(&pt.p);
        Self { pt, e1, e2 }
    }
}

impl Immersion for LinePatch {
    fn param_dim(&self) -> usize {
        4
    }

    fn base_dim(&self) -> usize {
        3
    }

    fn eval<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>> {
        let (e1, e2) = (lift(&self.e1), lift(&self.e2));
        let raw = lin(T::cst(1.0), &lift(&self.pt.p), T::cst(1.0), &lin(q[0], &e1, q[1], &e2));
        let p = lin(T::cst(1.0) / dot(&raw, &raw).sqrt(), &raw, T::cst(0.0), &raw);
        let w = lin(T::cst(1.0), &lift(&self.pt.v), T::cst(1.0), &lin(q[2], &e1, q[3], &e2));
        let v = lin(T::cst(1.0), &w, -dot(&w, &p), &p);
        let pv = cross(&p, &v);
        Ok(vec![p[0], p[1], p[2], -pv[0], -pv[1], -pv[2]])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameChecks {
    /// `𝔾(Eᵢ, Eᵢ)`.
    pub norms: [f64; 4],
    /// `max |𝔾(Eᵢ,Eᵢ) − (2, −2, −2, 2)·|V|²|` (`|ξ|² = 1` when `V = 0`).
    pub norm_residual: f64,
    pub orthogonality_residual: f64,
    /// `max |df Eᵢ − displayed value|`.
    pub df_display_gap: f64,
    /// `h(df Eᵢ, df Eᵢ)` in `(Π, K)` form.
    pub h: Vec<Vec<f64>>,
    /// `max |h(df Eᵢ, df Eᵢ) − displayed value|`.
    pub h_display_gap: f64,
    /// `Σ εᵢ h(Eᵢ, Eᵢ) / |Eᵢ|²`.
    pub frame_mean_curvature: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LineSpaceReport {
    pub point: LinePoint,
    /// `max |G(df X, df Y) − 𝔾(X, Y)|` over a tangent basis.
    pub isometry_residual: f64,
    /// `max |closed-form df X − numerical df X|` over the basis.
    pub derivative_residual: f64,
    /// Mean curvature from the generic immersion oracle.
    pub h: Vec<f64>,
    pub h_max: f64,
    /// `max |frame mean curvature − oracle mean curvature|`.
    pub frame_vs_oracle: f64,
    pub frame: FrameChecks,
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn frame_checks(pt: &LinePoint) -> FrameChecks {
    let (p, v) = (pt.p, pt.v);
    let e = frame(pt);
    let v2 = dot(&v, &v);
    let scale = if v2 > 0.0 { v2 } else { 1.0 };
    let signs = [1.0, -1.0, -1.0, 1.0];
    let norms = [0, 1, 2, 3].map(|i| line_metric(&e[i], &e[i]));
    let norm_residual = (0..4).fold(0.0f64, |m, i| m.max((norms[i] - 2.0 * signs[i] * scale).abs()));
    let mut orthogonality_residual: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            orthogonality_residual = orthogonality_residual.max(line_metric(&e[i], &e[j]).abs());
        }
    }

    let u = if v2 > 0.0 { v } else { tangent_frame(&p).0 };
    let pu = cross(&p, &u);
    let neg = |a: V3| scaled(-1.0, &a);
    let displayed_df = if v2 > 0.0 {
        [
            concat(&v, &v),
            concat(&pu, &lin(v2, &p, -1.0, &pu)),
            concat(&v, &neg(v)),
            concat(&neg(pu), &lin(-v2, &p, -1.0, &pu)),
        ]
    } else {
        [
            concat(&u, &u),
            concat(&pu, &neg(pu)),
            concat(&u, &neg(u)),
            concat(&neg(pu), &neg(pu)),
        ]
    };
    let df_display_gap = (0..4).fold(0.0f64, |m, i| m.max(max_gap(&numeric_df(&e[i]), &displayed_df[i])));

    let h: Vec<Vec<f64>> = e.iter().map(second_fundamental_form).collect();
    let displayed_h = if v2 > 0.0 {
        let a = concat(&scaled(v2, &p), &scaled(-v2, &pu));
        let b = concat(&scaled(v2, &p), &lin(-v2, &pu, -2.0, &v));
        [a.clone(), b.clone(), a, b]
    } else {
        let a = concat(&p, &[0.0; 3]);
        [a.clone(), a.clone(), a.clone(), a]
    };
    let h_display_gap = (0..4).fold(0.0f64, |m, i| m.max(max_gap(&h[i], &displayed_h[i])));
    let frame_mean_curvature = (0..6).map(|c| (0..4).map(|i| h[i][c] / norms[i]).sum()).collect();
    FrameChecks {
        norms,
        norm_residual,
        orthogonality_residual,
        df_display_gap,
        h,
        h_display_gap,
        frame_mean_curvature,
    }
}

/// Flat chart on ℝ³ used as the ambient base for the immersion oracle.
fn ambient_chart() -> Result<RiemannianChart> {
    let one = |i: usize, j: usize| if i == j { "1".to_string() } else { "0".to_string() };
    let metric: Vec<Vec<String>> = (0..3).map(|i| (0..3).map(|j| one(i, j)).collect()).collect();
    RiemannianChart::from_strings(
        "flat3",
        vec!["x".into(), "y".into(), "z".into()],
        vec![(-2.0, 2.0); 3],
        &metric,
    )
}

pub fn linespace_report(pt: &LinePoint) -> Result<LineSpaceReport> {
    let basis = pt.tangent_basis();
    let mut isometry_residual: f64 = 0.0;
    let mut derivative_residual: f64 = 0.0;
    for x in &basis {
        let dfx = numeric_df(x);
        derivative_residual = derivative_residual.max(max_gap(&dfx, &embed_tangent(x).coords()));
        for y in &basis {
            let pulled = ambient_metric(&dfx, &numeric_df(y));
            isometry_residual = isometry_residual.max((pulled - line_metric(x, y)).abs());
        }
    }
    let chart = ambient_chart()?;
    let patch = LinePatch::new(*pt);
    let oracle = immersion_geometry_at(&chart, &patch.jet(&[0.0; 4])?)?;
    let frame = frame_checks(pt);
    Ok(LineSpaceReport {
        point: *pt,
        isometry_residual,
        derivative_residual,
        h_max: oracle.h_max(),
        frame_vs_oracle: max_gap(&frame.frame_mean_curvature, &oracle.h),
        h: oracle.h,
        frame,
    })
}

/// Gap between `F*G` and `𝔾` for the self-map `F(p, V) = (p, −p×V)` of `TS²`.
pub fn kahler_isometry_residual(pt: &LinePoint) -> f64 {
    let basis = pt.tangent_basis();
    let image = LinePoint {
        p: pt.p,
        v: scaled(-1.0, &cross(&pt.p, &pt.v)),
    };
    let pushed: Vec<LineTangent> = basis
        .iter()
        .map(|x| {
            let d = numeric_df(x);
            LineTangent {
                at: image,
                xdot: [d[0], d[1], d[2]],
                vdot: [d[3], d[4], d[5]],
            }
        })
        .collect();
    let mut gap: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            gap = gap.max((neutral_metric(&pushed[i], &pushed[j]) - line_metric(&basis[i], &basis[j])).abs());
        }
    }
    gap
}

/// `θ, φ ↦ (sin θ cos φ, sin θ sin φ, cos θ)`.
fn sphere_map<T: Scalar>(th: T, ph: T) -> [T; 3] {
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
}

/// Pushes a chart vector of `TS²` in `(θ, φ)` coordinates to ambient form.
pub fn from_sphere_chart(x: &[f64], v: &[f64], w: &BundleVector) -> Result<LineTangent> {
    let curve = |t: D1| -> ([D1; 3], [D1; 3]) {
        let th = D1::new(x[0], 0.0) + t * D1::cst(w.xdot[0]);
        let ph = D1::new(x[1], 0.0) + t * D1::cst(w.xdot[1]);
        let a = D1::cst(v[0]) + t * D1::cst(w.vdot[0]);
        let b = D1::cst(v[1]) + t * D1::cst(w.vdot[1]);
        // V = a ∂θP + b ∂φP
        let d_th = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
        let d_ph = [-th.sin() * ph.sin(), th.sin() * ph.cos(), D1::cst(0.0)];
        (sphere_map(th, ph), lin(a, &d_th, b, &d_ph))
    };
    let (p, vv) = curve(D1::new(0.0, 1.0));
    let at = LinePoint::new(p.map(|c| c.re), vv.map(|c| c.re))?;
    LineTangent::new(at, p.map(|c| c.eps), vv.map(|c| c.eps))
}

/// `max |G_chart(X, Y) − G_ambient(X, Y)|` over the coordinate basis of the
/// sphere2 chart at `(x, v)`.
pub fn chart_consistency(chart: &RiemannianChart, x: &[f64], v: &[f64]) -> Result<f64> {
    if chart.dim() != 2 {
        return Err(Error::InvalidParams("expected the unit sphere chart in (θ, φ)".into()));
    }
    let frame = BundleFrame::new(chart, &BundlePoint::new(x.to_vec(), v.to_vec()))?;
    let basis: Vec<BundleVector> = (0..4).map(|a| BundleVector::basis(2, a)).collect();
    let ambient = basis
        .iter()
        .map(|w| from_sphere_chart(x, v, w))
        .collect::<Result<Vec<_>>>()?;
    let mut gap: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            gap = gap.max((frame.metric_apply(&basis[i], &basis[j]) - neutral_metric(&ambient[i], &ambient[j])).abs());
        }
    }
    Ok(gap)
}

/// `count − zeros` random points with `|V| ∈ [0.2, 2]`, then `zeros` points with `V = 0`.
pub fn sample_line_points(count: usize, zeros: usize, seed: u64) -> Vec<LinePoint> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|i| {
            let p: V3 = sampling::unit_vector(&mut rng, 3).try_into().unwrap();
            if i >= count.saturating_sub(zeros) {
                return LinePoint { p, v: [0.0; 3] };
            }
            let (e1, e2) = tangent_frame(&p);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let len = rng.gen_range(0.2..2.0);
            LinePoint {
                p,
                v: lin(len * angle.cos(), &e1, len * angle.sin(), &e2),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
