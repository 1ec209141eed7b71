//! Induced-coordinate model of the tangent bundle.
//!
//! A point of `TN` is `(x, V)`; a tangent vector is `(ẋ, v̇)`. Every
//! `2n`-dimensional matrix below acts on the stacked coordinates
//! `(ẋ¹…ẋⁿ, v̇¹…v̇ⁿ)`. The connection map splits a vector into
//! `Π = ẋ` and `K = v̇ + Γ(ẋ, V)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::manifold::{BaseGeometry, Connection, RiemannianChart};
use crate::ode;
use crate::sampling;
use crate::tensor::Tensor;

/// Fiber samples draw each component from `[-FIBER_RANGE, FIBER_RANGE]`.
pub const FIBER_RANGE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BundlePoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl BundlePoint {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(x.len(), v.len(), "base and fiber dimensions differ");
        Self { x, v }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> Vec<f64> {
        [self.x.as_slice(), self.v.as_slice()].concat()
    }

    pub fn from_coords(y: &[f64]) -> Self {
        let n = y.len() / 2;
        Self::new(y[..n].to_vec(), y[n..].to_vec())
    }
}

/// Tangent vector to `TN`; the foot point is carried by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleVector {
    pub xdot: Vec<f64>,
    pub vdot: Vec<f64>,
}

impl BundleVector {
    pub fn new(xdot: Vec<f64>, vdot: Vec<f64>) -> Self {
        assert_eq!(xdot.len(), vdot.len());
        Self { xdot, vdot }
    }

    pub fn coords(&self) -> Vec<f64> {
        [self.xdot.as_slice(), self.vdot.as_slice()].concat()
    }

    pub fn from_coords(y: &[f64]) -> Self {
        let n = y.len() / 2;
        Self::new(y[..n].to_vec(), y[n..].to_vec())
    }

    /// Coordinate basis vector `∂/∂yᵃ` of the `2n`-chart.
    pub fn basis(n: usize, a: usize) -> Self {
        let mut y = vec![0.0; 2 * n];
        y[a] = 1.0;
        Self::from_coords(&y)
    }
}

/// Interior base samples paired with fiber vectors in `[-2, 2]ⁿ`.
pub fn sample_bundle_points(chart: &RiemannianChart, count: usize, seed: u64) -> Vec<BundlePoint> {
    let mut rng = sampling::rng(seed);
    let n = chart.dim();
    (0..count)
        .map(|_| {
            let x = sampling::point_in_box(&mut rng, chart.domain(), sampling::BOUNDARY_MARGIN);
            let v = (0..n).map(|_| rng.gen_range(-FIBER_RANGE..FIBER_RANGE)).collect();
            BundlePoint::new(x, v)
        })
        .collect()
}

/// The metrics, symplectic form and para-quaternionic trio at a point.
#[derive(Debug, Clone)]
pub struct BundleStructures {
    /// The neutral metric `G = G₁`.
    pub g: DMatrix<f64>,
    pub g0: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub j0: DMatrix<f64>,
    pub j1: DMatrix<f64>,
    pub j2: DMatrix<f64>,
}

impl BundleStructures {
    /// `Ω(·, J·)` as a matrix.
    pub fn omega_with(&self, j: &DMatrix<f64>) -> DMatrix<f64> {
        &self.omega * j
    }

    /// The Riemannian Sasaki metric `g(ΠX,ΠY) + g(KX,KY)`, which is `−G₂`.
    pub fn sasaki(&self) -> DMatrix<f64> {
        -&self.g2
    }
}

/// Base connection data frozen at a bundle point, used to split vectors.
#[derive(Debug, Clone)]
pub struct BundleFrame {
    pub point: BundlePoint,
    pub conn: Connection,
    /// `C^k_i = Γ^k_il V^l`, so that `K = v̇ + C ẋ`.
    pub c: DMatrix<f64>,
    /// `A = g C`.
    pub a: DMatrix<f64>,
}

impl BundleFrame {
    pub fn new(chart: &RiemannianChart, p: &BundlePoint) -> Result<Self> {
        assert_eq!(p.dim(), chart.dim(), "bundle point dimension mismatch");
        Ok(Self::from_connection(chart.connection_at(&p.x)?, p.v.clone()))
    }

    pub fn from_connection(conn: Connection, v: Vec<f64>) -> Self {
        let n = conn.g.nrows();
        let c = DMatrix::from_fn(n, n, |k, i| (0..n).map(|l| conn.gamma[[k, i, l]] * v[l]).sum());
        let a = &conn.g * &c;
        let point = BundlePoint::new(conn.x.clone(), v);
        Self { point, conn, c, a }
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn split(&self, w: &BundleVector) -> (Vec<f64>, Vec<f64>) {
        let xd = DVector::from_column_slice(&w.xdot);
        let k = DVector::from_column_slice(&w.vdot) + &self.c * &xd;
        (w.xdot.clone(), k.as_slice().to_vec())
    }

    /// Inverse of [`split`](Self::split).
    pub fn from_split(&self, pi: &[f64], k: &[f64]) -> BundleVector {
        let vdot = DVector::from_column_slice(k) - &self.c * DVector::from_column_slice(pi);
        BundleVector::new(pi.to_vec(), vdot.as_slice().to_vec())
    }

    pub fn horizontal_lift(&self, x: &[f64]) -> BundleVector {
        self.from_split(x, &vec![0.0; self.dim()])
    }

    pub fn vertical_lift(&self, x: &[f64]) -> BundleVector {
        self.from_split(&vec![0.0; self.dim()], x)
    }

    fn g_bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.conn.g[(i, j)] * a[i] * b[j];
            }
        }
        s
    }

    /// `G(X,Y) = g(ΠX,KY) + g(KX,ΠY)`, evaluated through the split.
    pub fn metric_apply(&self, x: &BundleVector, y: &BundleVector) -> f64 {
        let (px, kx) = self.split(x);
        let (py, ky) = self.split(y);
        self.g_bilinear(&px, &ky) + self.g_bilinear(&kx, &py)
    }

    /// `Ω(X,Y) = g(KX,ΠY) − g(ΠX,KY)`.
    pub fn omega_apply(&self, x: &BundleVector, y: &BundleVector) -> f64 {
        let (px, kx) = self.split(x);
        let (py, ky) = self.split(y);
        self.g_bilinear(&kx, &py) - self.g_bilinear(&px, &ky)
    }

    /// `G = [[A+Aᵀ, g], [g, 0]]`.
    pub fn metric(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(&self.a + self.a.transpose()));
        m.view_mut((0, n), (n, n)).copy_from(&self.conn.g);
        m.view_mut((n, 0), (n, n)).copy_from(&self.conn.g);
        m
    }

    /// Closed-form `G⁻¹ = [[0, g⁻¹], [g⁻¹, −g⁻¹(A+Aᵀ)g⁻¹]]`.
    pub fn metric_inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let gi = &self.conn.g_inv;
        let corner = -(gi * (&self.a + self.a.transpose()) * gi);
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(gi);
        m.view_mut((n, 0), (n, n)).copy_from(gi);
        m.view_mut((n, n), (n, n)).copy_from(&corner);
        m
    }

    /// `Ω = [[Aᵀ − A, −g], [g, 0]]`.
    pub fn omega(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(self.a.transpose() - &self.a));
        m.view_mut((0, n), (n, n)).copy_from(&(-&self.conn.g));
        m.view_mut((n, 0), (n, n)).copy_from(&self.conn.g);
        m
    }

    /// `S` maps `(ẋ, v̇)` to `(Π, K)`.
    fn split_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut s = DMatrix::identity(2 * n, 2 * n);
        s.view_mut((n, 0), (n, n)).copy_from(&self.c);
        s
    }

    fn split_matrix_inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut s = DMatrix::identity(2 * n, 2 * n);
        s.view_mut((n, 0), (n, n)).copy_from(&(-&self.c));
        s
    }

    /// Conjugate a matrix written in `(Π, K)` components into coordinates.
    fn operator_from_blocks(&self, blocks: [[DMatrix<f64>; 2]; 2]) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (r, row) in blocks.iter().enumerate() {
            for (c, b) in row.iter().enumerate() {
                m.view_mut((r * n, c * n), (n, n)).copy_from(b);
            }
        }
        self.split_matrix_inverse() * m * self.split_matrix()
    }

    /// Bilinear form given by blocks in `(Π, K)` components, pulled back to
    /// coordinates: `Sᵀ M S`.
    fn form_from_split_blocks(&self, blocks: [[DMatrix<f64>; 2]; 2]) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (r, row) in blocks.iter().enumerate() {
            for (c, b) in row.iter().enumerate() {
                m.view_mut((r * n, c * n), (n, n)).copy_from(b);
            }
        }
        let s = self.split_matrix();
        s.transpose() * m * s
    }

    pub fn structures(&self) -> BundleStructures {
        let n = self.dim();
        let id = DMatrix::<f64>::identity(n, n);
        let z = DMatrix::<f64>::zeros(n, n);
        let g = self.conn.g.clone();
        let j0 = self.operator_from_blocks([[z.clone(), id.clone()], [id.clone(), z.clone()]]);
        let j1 = self.operator_from_blocks([[id.clone(), z.clone()], [z.clone(), -&id]]);
        let j2 = self.operator_from_blocks([[z.clone(), -&id], [id.clone(), z.clone()]]);
        // G₀(X,Y) = g(KX,KY) − g(ΠX,ΠY); G₂(X,Y) = −g(KX,KY) − g(ΠX,ΠY)
        let g0 = self.form_from_split_blocks([[-&g, z.clone()], [z.clone(), g.clone()]]);
        let g2 = self.form_from_split_blocks([[-&g, z.clone()], [z.clone(), -&g]]);
        BundleStructures {
            g: self.metric(),
            g0,
            g2,
            omega: self.omega(),
            j0,
            j1,
            j2,
        }
    }
}

pub fn structures_at(chart: &RiemannianChart, p: &BundlePoint) -> Result<BundleStructures> {
    Ok(BundleFrame::new(chart, p)?.structures())
}

pub fn split_vector(chart: &RiemannianChart, p: &BundlePoint, w: &BundleVector) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok(BundleFrame::new(chart, p)?.split(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Horizontal,
    Vertical,
}

pub fn lift(chart: &RiemannianChart, p: &BundlePoint, x: &[f64], kind: LiftKind) -> Result<BundleVector> {
    let frame = BundleFrame::new(chart, p)?;
    Ok(match kind {
        LiftKind::Horizontal => frame.horizontal_lift(x),
        LiftKind::Vertical => frame.vertical_lift(x),
    })
}

/// Christoffel symbols of `G` in induced coordinates from base data:
/// `out[[c, a, b]] = Γ̄^c_ab` over the `2n` coordinates `(x, v)`.
pub fn connection_coeffs_from(geo: &BaseGeometry, v: &[f64]) -> Tensor {
    let n = geo.n();
    let gm = &geo.gamma;
    let c = |k: usize, i: usize| -> f64 { (0..n).map(|l| gm[[k, i, l]] * v[l]).sum() };
    let mut out = Tensor::zeros(2 * n, 3);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[[k, i, j]] = gm[[k, i, j]];
                let mut s = 0.0;
                for l in 0..n {
                    s += geo.dgamma[[k, j, l, i]] * v[l];
                    s += v[l] * geo.riemann_mixed[[k, l, i, j]];
                    for m in 0..n {
                        s += gm[[k, i, m]] * gm[[m, j, l]] * v[l];
                    }
                }
                for m in 0..n {
                    s -= c(k, m) * gm[[m, i, j]];
                }
                out[[n + k, i, j]] = s;
                out[[n + k, i, n + j]] = gm[[k, i, j]];
                out[[n + k, n + j, i]] = gm[[k, i, j]];
            }
        }
    }
    out
}

pub fn connection_g_coeffs(chart: &RiemannianChart, p: &BundlePoint) -> Result<Tensor> {
    let geo = chart.curvature_at(&p.x)?;
    Ok(connection_coeffs_from(&geo, &p.v))
}

/// `∇_X Y` for a vector field `Y` known through its value and its
/// coordinate directional derivative `dY = X(Y)` at the point.
pub fn covariant_derivative(coeffs: &Tensor, x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
    let d = coeffs.dim();
    (0..d)
        .map(|c| {
            let mut s = dy[c];
            for a in 0..d {
                for b in 0..d {
                    s += coeffs[[c, a, b]] * x[a] * y[b];
                }
            }
            s
        })
        .collect()
}

/// One sample of the null-lift scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullLiftSample {
    pub t: f64,
    /// `G(f', f')` for the lift `f = (p, W(p))`.
    pub g_norm: f64,
    /// `d/dt g(W, W)` along the integral curve.
    pub d_speed2: f64,
}

fn check_field(chart: &RiemannianChart, field: &[Expression]) -> Result<()> {
    if field.len() != chart.dim() {
        return Err(Error::InvalidParams(format!(
            "vector field has {} components for n = {}",
            field.len(),
            chart.dim()
        )));
    }
    if field.iter().any(|e| e.variables() != chart.variables()) {
        return Err(Error::InvalidParams(
            "vector field variables differ from the chart's".into(),
        ));
    }
    Ok(())
}

fn eval_field(field: &[Expression], x: &[f64]) -> Result<Vec<f64>> {
    field.iter().map(|e| e.eval(x)).collect()
}

/// Integrate `p' = W(p)` from `p0` over `[0, t_end]` and compare `G(f',f')`
/// of the lift `f(t) = (p(t), W(p(t)))` with `d/dt |W|²` at every step.
pub fn null_lift_scan(
    chart: &RiemannianChart,
    field: &[Expression],
    p0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<Vec<NullLiftSample>> {
    check_field(chart, field)?;
    chart.check_point(p0)?;
    if steps == 0 || !(t_end > 0.0) {
        return Err(Error::InvalidParams("null-lift scan needs steps ≥ 1 and T > 0".into()));
    }
    let traj = ode::integrate(
        |_, x| {
            chart.check_point(x)?;
            eval_field(field, x)
        },
        p0,
        0.0,
        t_end,
        steps,
        |x| chart.contains(x),
    )?;
    if let Some(time) = traj.exited_at {
        return Err(Error::ExitedDomain { time });
    }
    let n = chart.dim();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| {
            let jets = field.iter().map(|e| e.jet(x, 1)).collect::<Result<Vec<_>>>()?;
            let w: Vec<f64> = jets.iter().map(|j| j.value).collect();
            // W' = (∂_k W^j) W^k along the curve
            let dw: Vec<f64> = jets.iter().map(|j| (0..n).map(|k| j.grad[k] * w[k]).sum()).collect();
            let frame = BundleFrame::new(chart, &BundlePoint::new(x.clone(), w.clone()))?;
            let fp = BundleVector::new(w.clone(), dw.clone());
            let g_norm = frame.metric_apply(&fp, &fp);
            let mj = chart.metric_jet(x, 1)?;
            let mut d_speed2 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        d_speed2 += mj.dg[[i, j, k]] * w[k] * w[i] * w[j];
                    }
                    d_speed2 += 2.0 * mj.g[(i, j)] * w[i] * dw[j];
                }
            }
            Ok(NullLiftSample { t, g_norm, d_speed2 })
        })
        .collect()
}
