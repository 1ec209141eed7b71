//! Immersed submanifolds of `(TN, G)`: induced metric, second fundamental
//! form, mean curvature and the Maslov form of Lagrangian immersions.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::{closed_invariants, ClosedForm};
use crate::error::{Error, Result};
use crate::expr::scalar::{seed2, Scalar, D2};
use crate::expr::Expression;
use crate::manifold::RiemannianChart;
use crate::tangent_bundle::{connection_coeffs_from, BundleFrame, BundlePoint};

/// Smallest |det| of the induced metric treated as non-degenerate.
pub const PULLBACK_DET_EPS: f64 = 1e-10;
/// Parameter step for the exterior derivative of the Maslov form.
pub const MASLOV_STEP: f64 = 1e-4;
/// Largest `|f*Ω|` accepted as Lagrangian.
pub const LAGRANGIAN_TOL: f64 = 1e-8;

/// A parametrized map `q ↦ (x, V)` into induced coordinates.
pub trait Immersion {
    fn param_dim(&self) -> usize;
    /// Dimension `n` of the base; the image lives in `2n` coordinates.
    fn base_dim(&self) -> usize;
    fn eval<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>>;

    /// Point, first and second parameter derivatives, by nested duals.
    fn jet(&self, q: &[f64]) -> Result<ImmersionJet> {
        let m = self.param_dim();
        assert_eq!(q.len(), m, "parameter count mismatch");
        let d = 2 * self.base_dim();
        let point: Vec<f64> = self.eval(q)?;
        let mut first = vec![vec![0.0; d]; m];
        let mut second = vec![vec![vec![0.0; d]; m]; m];
        for a in 0..m {
            for b in a..m {
                let args: Vec<D2> = (0..m).map(|k| seed2(q[k], k, a, b)).collect();
                let y = self.eval(&args)?;
                for c in 0..d {
                    first[a][c] = y[c].eps.re;
                    first[b][c] = y[c].re.eps;
                    second[a][b][c] = y[c].eps.eps;
                    second[b][a][c] = y[c].eps.eps;
                }
            }
        }
        Ok(ImmersionJet {
            q: q.to_vec(),
            point,
            first,
            second,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ImmersionJet {
    pub q: Vec<f64>,
    /// Image point in induced coordinates `(x, V)`.
    pub point: Vec<f64>,
    /// `first[a] = ∂φ/∂qᵃ`.
    pub first: Vec<Vec<f64>>,
    /// `second[a][b] = ∂²φ/∂qᵃ∂qᵇ`.
    pub second: Vec<Vec<Vec<f64>>>,
}

impl ImmersionJet {
    pub fn param_dim(&self) -> usize {
        self.first.len()
    }
}

/// Graph `p ↦ (p, V(p))` of a vector field given by expressions over the
/// chart variables.
#[derive(Debug, Clone)]
pub struct GraphImmersion {
    field: Vec<Expression>,
}

impl GraphImmersion {
    pub fn new(field: Vec<Expression>) -> Result<Self> {
        let Some(first) = field.first() else {
            return Err(Error::InvalidParams("vector field has no components".into()));
        };
        if field.len() != first.arity() || field.iter().any(|e| e.variables() != first.variables()) {
            return Err(Error::InvalidParams(
                "vector field needs n components over the same n variables".into(),
            ));
        }
        Ok(Self { field })
    }

    /// Graph of the coordinate gradient `(∂₁u, …, ∂ₙu)`.
    pub fn gradient(u: &Expression) -> Result<Self> {
        Self::new((0..u.arity()).map(|i| u.partial(i)).collect())
    }

    pub fn field(&self) -> &[Expression] {
        &self.field
    }
}

impl Immersion for GraphImmersion {
    fn param_dim(&self) -> usize {
        self.field.len()
    }

    fn base_dim(&self) -> usize {
        self.field.len()
    }

    fn eval<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>> {
        let mut out = q.to_vec();
        for e in &self.field {
            out.push(e.eval_with(q)?);
        }
        Ok(out)
    }
}

/// Graph of the metric gradient `Du = g⁻¹ du` of a potential on a chart.
#[derive(Debug, Clone)]
pub struct GradientGraph<'a> {
    chart: &'a RiemannianChart,
    du: Vec<Expression>,
}

impl<'a> GradientGraph<'a> {
    pub fn new(chart: &'a RiemannianChart, u: &Expression) -> Result<Self> {
        if u.variables() != chart.variables() {
            return Err(Error::InvalidParams(
                "potential variables differ from the chart's".into(),
            ));
        }
        Ok(Self {
            chart,
            du: (0..u.arity()).map(|i| u.partial(i)).collect(),
        })
    }
}

impl Immersion for GradientGraph<'_> {
    fn param_dim(&self) -> usize {
        self.du.len()
    }

    fn base_dim(&self) -> usize {
        self.du.len()
    }

    fn eval<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>> {
        let n = self.du.len();
        let mut g = vec![vec![T::cst(0.0); n]; n];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.chart.component(i, j).eval_with(q)?;
            }
        }
        let rhs = self.du.iter().map(|e| e.eval_with(q)).collect::<Result<Vec<T>>>()?;
        let v = solve(g, rhs).ok_or_else(|| Error::Degenerate {
            what: "metric",
            location: q.iter().map(|t| t.re()).collect(),
            det: 0.0,
        })?;
        let mut out = q.to_vec();
        out.extend(v);
        Ok(out)
    }
}

/// Gaussian elimination with partial pivoting on the real parts.
fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].re().abs().total_cmp(&a[j][col].re().abs()))?;
        if a[piv][col].re().abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let t = a[col][c];
                a[r][c] = a[r][c] - f * t;
            }
            let t = b[col];
            b[r] = b[r] - f * t;
        }
    }
    let mut x = vec![T::cst(0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s = s - a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmanifoldReport {
    pub pullback: Vec<Vec<f64>>,
    pub pullback_det: f64,
    /// `b[a][b]` is the normal vector `B(∂a, ∂b)` in induced coordinates.
    pub b: Vec<Vec<Vec<f64>>>,
    pub h: Vec<f64>,
    pub omega_pullback_max: f64,
    /// `max |G(B(a,b), φ_c)|`.
    pub normality_residual: f64,
}

impl SubmanifoldReport {
    pub fn h_max(&self) -> f64 {
        self.h.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn b_max(&self) -> f64 {
        self.b.iter().flatten().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }
}

fn bilinear(m: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    DVector::from_column_slice(x).dot(&(m * DVector::from_column_slice(y)))
}

/// Ambient point and structures at an immersion jet.
fn ambient(chart: &RiemannianChart, jet: &ImmersionJet) -> Result<(BundleFrame, DMatrix<f64>)> {
    let n = chart.dim();
    if jet.point.len() != 2 * n {
        return Err(Error::InvalidParams(format!(
            "immersion image has {} coordinates, expected {}",
            jet.point.len(),
            2 * n
        )));
    }
    let p = BundlePoint::from_coords(&jet.point);
    let frame = BundleFrame::new(chart, &p)?;
    let g = frame.metric();
    Ok((frame, g))
}

pub fn immersion_geometry_at(chart: &RiemannianChart, jet: &ImmersionJet) -> Result<SubmanifoldReport> {
    let (frame, g) = ambient(chart, jet)?;
    let p = &frame.point;
    let geo = chart.curvature_at(&p.x)?;
    let coeffs = connection_coeffs_from(&geo, &p.v);
    let m = jet.param_dim();
    let d = g.nrows();
    let phi = &jet.first;

    let pull = DMatrix::from_fn(m, m, |a, b| bilinear(&g, &phi[a], &phi[b]));
    let det = pull.determinant();
    if !(det.abs() > PULLBACK_DET_EPS) {
        return Err(Error::Degenerate {
            what: "induced metric",
            location: jet.q.clone(),
            det: det.abs(),
        });
    }
    let lu = pull.clone().lu();
    let pull_inv = lu.try_inverse().ok_or(Error::Degenerate {
        what: "induced metric",
        location: jet.q.clone(),
        det: det.abs(),
    })?;

    let omega = frame.omega();
    let mut omega_max = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            omega_max = omega_max.max(bilinear(&omega, &phi[a], &phi[b]).abs());
        }
    }

    let mut bform = vec![vec![vec![0.0; d]; m]; m];
    for a in 0..m {
        for b in a..m {
            // ∇_{φa} φb = φab + Γ̄(φa, φb)
            let mut cov = jet.second[a][b].clone();
            for (c, out) in cov.iter_mut().enumerate() {
                for i in 0..d {
                    if phi[a][i] == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        *out += coeffs[[c, i, j]] * phi[a][i] * phi[b][j];
                    }
                }
            }
            let rhs = DVector::from_fn(m, |c, _| bilinear(&g, &cov, &phi[c]));
            let coef = pull_inv.clone() * rhs;
            for (c, coef_c) in coef.iter().enumerate() {
                for i in 0..d {
                    cov[i] -= coef_c * phi[c][i];
                }
            }
            bform[a][b] = cov.clone();
            bform[b][a] = cov;
        }
    }
    let mut h = vec![0.0; d];
    for a in 0..m {
        for b in 0..m {
            for i in 0..d {
                h[i] += pull_inv[(a, b)] * bform[a][b][i];
            }
        }
    }
    let mut normality = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                normality = normality.max(bilinear(&g, &bform[a][b], &phi[c]).abs());
            }
        }
    }
    Ok(SubmanifoldReport {
        pullback: (0..m).map(|a| (0..m).map(|b| pull[(a, b)]).collect()).collect(),
        pullback_det: det,
        b: bform,
        h,
        omega_pullback_max: omega_max,
        normality_residual: normality,
    })
}

/// `max |Ω(φa, φb)|`, zero exactly when the immersion is Lagrangian.
pub fn lagrangian_residual(chart: &RiemannianChart, jet: &ImmersionJet) -> Result<f64> {
    let (frame, _) = ambient(chart, jet)?;
    let omega = frame.omega();
    let m = jet.param_dim();
    let mut r = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            r = r.max(bilinear(&omega, &jet.first[a], &jet.first[b]).abs());
        }
    }
    Ok(r)
}

/// `η(∂a) = G(J₁H, φa)`.
pub fn maslov_form<I: Immersion>(chart: &RiemannianChart, imm: &I, q: &[f64]) -> Result<Vec<f64>> {
    let jet = imm.jet(q)?;
    let report = immersion_geometry_at(chart, &jet)?;
    let (frame, g) = ambient(chart, &jet)?;
    let j1 = frame.structures().j1;
    let jh = (j1 * DVector::from_column_slice(&report.h)).as_slice().to_vec();
    Ok(jet.first.iter().map(|phi| bilinear(&g, &jh, phi)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct MaslovReport {
    pub maslov: Vec<f64>,
    /// `dη(∂a, ∂b) = ∂a η_b − ∂b η_a`.
    pub d_eta: Vec<Vec<f64>>,
    /// `½ Ric̄(J₁φa, φb)`.
    pub ricci_term: Vec<Vec<f64>>,
    /// `max_{a≠b} |dη(∂a,∂b) − ½Ric̄(J₁φa, φb)|`.
    pub identity_residual: f64,
    /// The same maximum including `a = b`, where `dη` vanishes identically.
    pub diagonal_residual: f64,
    pub closedness: f64,
}

pub fn maslov_residuals<I: Immersion>(chart: &RiemannianChart, imm: &I, q: &[f64]) -> Result<MaslovReport> {
    let jet = imm.jet(q)?;
    let lag = lagrangian_residual(chart, &jet)?;
    if lag > LAGRANGIAN_TOL {
        return Err(Error::NotLagrangian(lag));
    }
    let m = imm.param_dim();
    let eta = maslov_form(chart, imm, q)?;
    // deta[a][b] = ∂a η_b
    let mut deta = vec![vec![0.0; m]; m];
    for a in 0..m {
        let (mut qp, mut qm) = (q.to_vec(), q.to_vec());
        qp[a] += MASLOV_STEP;
        qm[a] -= MASLOV_STEP;
        let (ep, em) = (maslov_form(chart, imm, &qp)?, maslov_form(chart, imm, &qm)?);
        for b in 0..m {
            deta[a][b] = (ep[b] - em[b]) / (2.0 * MASLOV_STEP);
        }
    }
    let d_eta: Vec<Vec<f64>> = (0..m)
        .map(|a| (0..m).map(|b| deta[a][b] - deta[b][a]).collect())
        .collect();

    let cf = ClosedForm::new(chart, &BundlePoint::from_coords(&jet.point))?;
    let ric = closed_invariants(&cf).ricci;
    let j1 = cf.frame.structures().j1;
    let ricci_term: Vec<Vec<f64>> = (0..m)
        .map(|a| {
            let jphi = (&j1 * DVector::from_column_slice(&jet.first[a])).as_slice().to_vec();
            (0..m).map(|b| 0.5 * bilinear(&ric, &jphi, &jet.first[b])).collect()
        })
        .collect();
    let mut identity = 0.0f64;
    let mut diagonal = 0.0f64;
    let mut closed = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let r = (d_eta[a][b] - ricci_term[a][b]).abs();
            diagonal = diagonal.max(r);
            if a != b {
                identity = identity.max(r);
            }
            closed = closed.max(d_eta[a][b].abs());
        }
    }
    Ok(MaslovReport {
        maslov: eta,
        d_eta,
        ricci_term,
        identity_residual: identity,
        diagonal_residual: diagonal,
        closedness: closed,
    })
}
