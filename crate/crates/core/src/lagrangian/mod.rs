//! Lagrangian graphs `f(x) = (x, ∇u(x))` in `Tℝⁿ`, in closed form.
//!
//! With `g = 2 Hess u` the induced metric and `w_{ij} = (u_{ijl})_l`, the
//! second fundamental form is `B(fᵢ, fⱼ) = (−g⁻¹w_{ij}, ½w_{ij})`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::scalar::{Dual, Scalar};
use crate::expr::{Expression, Node};
use crate::fd;
use crate::manifold::{default_vars, RiemannianChart, DET_EPS};
use crate::sampling::{self, BOUNDARY_MARGIN};
use crate::source_fields::IntensityProfile;
use crate::submanifold::{immersion_geometry_at, Immersion};
use crate::tensor::Tensor;

/// Step for the divergence in the Laplace–Beltrami residual.
pub const LAPLACIAN_STEP: f64 = 1e-3;
/// Step for the finite-difference gradient of `log|det Hess u|`.
pub const GRADIENT_STEP: f64 = 1e-3;

/// Gradient, Hessian and third derivatives of a potential at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialJet {
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub third: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Expr(Expression),
    /// Radial potential of a source field.
    Source(IntensityProfile),
    Sum(Vec<Potential>),
}

impl Potential {
    /// Expression over `x1..xn`.
    pub fn parse(source: &str, n: usize) -> Result<Self> {
        Ok(Potential::Expr(Expression::parse_owned(source, default_vars(n))?))
    }

    pub fn sum(parts: Vec<Potential>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidParams("empty sum of potentials".into()));
        };
        let n = first.dim();
        if parts.iter().any(|p| p.dim() != n) {
            return Err(Error::InvalidParams("summands live in different dimensions".into()));
        }
        Ok(Potential::Sum(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Potential::Expr(e) => e.arity(),
            Potential::Source(p) => p.n(),
            Potential::Sum(parts) => parts[0].dim(),
        }
    }

    pub fn jet(&self, x: &[f64]) -> Result<PotentialJet> {
        match self {
            Potential::Expr(e) => {
                let j = e.jet3(x)?;
                Ok(PotentialJet {
                    grad: j.grad,
                    hess: j.hess,
                    third: j.third,
                })
            }
            Potential::Source(p) => p.potential_jet(x),
            Potential::Sum(parts) => {
                let mut acc = parts[0].jet(x)?;
                for p in &parts[1..] {
                    let j = p.jet(x)?;
                    acc.grad.iter_mut().zip(&j.grad).for_each(|(a, b)| *a += b);
                    acc.hess += j.hess;
                    acc.third.axpy(1.0, &j.third);
                }
                Ok(acc)
            }
        }
    }

    /// `∇u` for any scalar type.
    pub fn gradient<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        match self {
            Potential::Expr(e) => (0..x.len())
                .map(|a| {
                    let args: Vec<Dual<T>> = x
                        .iter()
                        .enumerate()
                        .map(|(m, &c)| Dual::new(c, T::cst(if m == a { 1.0 } else { 0.0 })))
                        .collect();
                    Ok(e.eval_with(&args)?.eps)
                })
                .collect(),
            Potential::Source(p) => p.gradient(x),
            Potential::Sum(parts) => {
                let mut acc = parts[0].gradient(x)?;
                for p in &parts[1..] {
                    acc.iter_mut().zip(p.gradient(x)?).for_each(|(a, b)| *a = *a + b);
                }
                Ok(acc)
            }
        }
    }
}

/// Where a potential is sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Region {
    Box(Vec<(f64, f64)>),
    /// `lo <= |x| <= hi` in `ℝⁿ`.
    Shell {
        n: usize,
        lo: f64,
        hi: f64,
    },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Box(d) => d.len(),
            Region::Shell { n, .. } => *n,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box(d) => x.len() == d.len() && x.iter().zip(d).all(|(c, &(lo, hi))| *c >= lo && *c <= hi),
            Region::Shell { n, lo, hi } => {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                x.len() == *n && r >= *lo && r <= *hi
            }
        }
    }

    /// Deterministic samples kept `BOUNDARY_MARGIN` away from the boundary.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        match self {
            Region::Box(d) => sampling::sample_box(d, count, seed, BOUNDARY_MARGIN),
            Region::Shell { n, lo, hi } => {
                let mut rng = sampling::rng(seed);
                (0..count)
                    .map(|_| {
                        let dir = sampling::unit_vector(&mut rng, *n);
                        let r = rand::Rng::gen_range(&mut rng, lo + BOUNDARY_MARGIN..hi - BOUNDARY_MARGIN);
                        dir.into_iter().map(|c| r * c).collect()
                    })
                    .collect()
            }
        }
    }

    /// A box containing the region.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            Region::Box(d) => d.clone(),
            Region::Shell { n, hi, .. } => vec![(-hi, *hi); *n],
        }
    }
}

/// The Lagrangian graph of a potential over a sampling region.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGraph {
    potential: Potential,
    region: Region,
}

impl PotentialGraph {
    pub fn new(potential: Potential, region: Region) -> Result<Self> {
        if potential.dim() != region.dim() {
            return Err(Error::InvalidParams(format!(
                "potential has {} variables but the region is {}-dimensional",
                potential.dim(),
                region.dim()
            )));
        }
        if let Region::Box(d) = &region {
            if d.iter().any(|&(lo, hi)| !(hi - lo > 2.0 * BOUNDARY_MARGIN)) {
                return Err(Error::InvalidParams(format!("sampling box {d:?} is empty")));
            }
        }
        if let Region::Shell { lo, hi, .. } = region {
            if !(lo > 0.0 && hi - lo > 2.0 * BOUNDARY_MARGIN) {
                return Err(Error::InvalidParams(format!(
                    "shell [{lo}, {hi}] is empty or contains the origin"
                )));
            }
        }
        Ok(Self { potential, region })
    }

    /// Graph of an expression over `x1..xn` on a box.
    pub fn from_expr(source: &str, domain: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Potential::parse(source, domain.len())?, Region::Box(domain))
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn n(&self) -> usize {
        self.potential.dim()
    }

    /// Same region, potential replaced by `u + extra`.
    pub fn perturbed(&self, extra: Potential) -> Result<Self> {
        Self::new(
            Potential::sum(vec![self.potential.clone(), extra])?,
            self.region.clone(),
        )
    }

    fn checked_jet(&self, x: &[f64]) -> Result<(PotentialJet, f64)> {
        if !self.region.contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        let jet = self.potential.jet(x)?;
        let det = jet.hess.determinant();
        if !(det.abs() > DET_EPS) {
            return Err(Error::Degenerate {
                what: "Hessian",
                location: x.to_vec(),
                det,
            });
        }
        Ok((jet, det))
    }

    /// `∂ₗ log|det Hess u| = Σ Hess^{ab} u_{abl}` (Jacobi's formula).
    fn dlog_det(jet: &PotentialJet, hess_inv: &DMatrix<f64>) -> Vec<f64> {
        let n = jet.hess.nrows();
        (0..n)
            .map(|l| {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += hess_inv[(a, b)] * jet.third[[a, b, l]];
                    }
                }
                s
            })
            .collect()
    }

    /// `log|det Hess u|` at `x`, used by the finite-difference oracle.
    pub fn log_det_hess(&self, x: &[f64]) -> Result<f64> {
        let (_, det) = self.checked_jet(x)?;
        Ok(det.abs().ln())
    }

    /// `Δ_g log|det Hess u|` in divergence form with `√|det g|`.
    pub fn laplacian_log_det(&self, x: &[f64]) -> Result<f64> {
        let flux = |y: &[f64]| -> Result<Vec<f64>> {
            let (jet, _) = self.checked_jet(y)?;
            let g = 2.0 * &jet.hess;
            let g_inv = g.clone().try_inverse().expect("nondegenerate Hessian");
            let hess_inv = 2.0 * &g_inv;
            let dl = DVector::from_vec(Self::dlog_det(&jet, &hess_inv));
            let vol = g.determinant().abs().sqrt();
            Ok((vol * g_inv * dl).iter().copied().collect())
        };
        let jac = fd::jacobian(flux, x, LAPLACIAN_STEP, true)?;
        let div: f64 = (0..x.len()).map(|i| jac[i][i]).sum();
        let (jet, _) = self.checked_jet(x)?;
        Ok(div / (2.0 * &jet.hess).determinant().abs().sqrt())
    }
}

impl Immersion for PotentialGraph {
    fn param_dim(&self) -> usize {
        self.n()
    }

    fn base_dim(&self) -> usize {
        self.n()
    }

    fn eval<T: Scalar>(&self, q: &[T]) -> Result<Vec<T>> {
        let mut out = q.to_vec();
        out.extend(self.potential.gradient(q)?);
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphReport {
    pub x: Vec<f64>,
    /// `2 Hess u`.
    pub induced: Vec<Vec<f64>>,
    pub det_hess: f64,
    /// `b[i][j] = B(fᵢ, fⱼ)` in induced coordinates.
    pub b: Vec<Vec<Vec<f64>>>,
    pub h: Vec<f64>,
    /// Coefficients of `J𝗛` in the frame `fₖ`.
    pub jh_tangential: Vec<f64>,
    /// `max |𝗛|`.
    pub minimal_residual: f64,
    /// `|Δ_g log|det Hess u||`.
    pub hminimal_residual: f64,
    /// `max |u_{ijl}|`.
    pub totally_geodesic_residual: f64,
    /// `max |J𝗛 − g⁻¹∇ log|det Hess u|^{−1/2}|` with the gradient by finite differences.
    pub gradient_identity_residual: f64,
    /// Same comparison with the exponent `−2`.
    pub gradient_identity_residual_exp2: f64,
}

impl GraphReport {
    pub fn b_max(&self) -> f64 {
        self.b.iter().flatten().flatten().fold(0.0, |a, b| a.max(b.abs()))
    }
}

pub fn graph_geometry_at(graph: &PotentialGraph, x: &[f64]) -> Result<GraphReport> {
    let n = graph.n();
    let (jet, det_hess) = graph.checked_jet(x)?;
    let g = 2.0 * &jet.hess;
    let g_inv = g.clone().try_inverse().ok_or_else(|| Error::Degenerate {
        what: "Hessian",
        location: x.to_vec(),
        det: det_hess,
    })?;
    let w = |i: usize, j: usize| DVector::from_fn(n, |l, _| jet.third[[i, j, l]]);
    let mut b = vec![vec![vec![0.0; 2 * n]; n]; n];
    let mut h = vec![0.0; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let wij = w(i, j);
            let tangential = &g_inv * &wij;
            for l in 0..n {
                b[i][j][l] = -tangential[l];
                b[i][j][n + l] = 0.5 * wij[l];
            }
            for c in 0..2 * n {
                h[c] += g_inv[(i, j)] * b[i][j][c];
            }
        }
    }
    // J₁(a, b) = (a, −b); J𝗛 = Σ cₖ fₖ with c the horizontal part of 𝗛.
    let jh_tangential = h[..n].to_vec();

    let grad_log = fd::jacobian(|y| Ok(vec![graph.log_det_hess(y)?]), x, GRADIENT_STEP, true)?;
    let grad_log = DVector::from_fn(n, |l, _| grad_log[l][0]);
    let c = DVector::from_column_slice(&jh_tangential);
    let gradient_identity_residual = (&c - &g_inv * (-0.5 * &grad_log)).amax();
    let gradient_identity_residual_exp2 = (&c - &g_inv * (-2.0 * &grad_log)).amax();

    Ok(GraphReport {
        x: x.to_vec(),
        induced: (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect(),
        det_hess,
        b,
        minimal_residual: h.iter().fold(0.0, |a, v| a.max(v.abs())),
        h,
        jh_tangential,
        hminimal_residual: graph.laplacian_log_det(x)?.abs(),
        totally_geodesic_residual: jet.third.max_abs(),
        gradient_identity_residual,
        gradient_identity_residual_exp2,
    })
}

/// The flat chart `ℝⁿ` over a box containing the graph's region.
pub fn flat_chart(graph: &PotentialGraph) -> Result<RiemannianChart> {
    let n = graph.n();
    let domain = graph
        .region()
        .bounding_box()
        .into_iter()
        .map(|(lo, hi)| (lo - 0.1, hi + 0.1))
        .collect();
    let metric: Vec<Vec<String>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { "1".to_string() } else { "0".to_string() })
                .collect()
        })
        .collect();
    RiemannianChart::from_strings("flat", default_vars(n), domain, &metric)
}

/// `max(|Δ𝗛|, |ΔB|)` between the closed form and the generic immersion oracle.
pub fn oracle_gap_at(graph: &PotentialGraph, chart: &RiemannianChart, x: &[f64]) -> Result<f64> {
    let closed = graph_geometry_at(graph, x)?;
    let generic = immersion_geometry_at(chart, &graph.jet(x)?)?;
    let dh = closed
        .h
        .iter()
        .zip(&generic.h)
        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    let db = closed
        .b
        .iter()
        .flatten()
        .flatten()
        .zip(generic.b.iter().flatten().flatten())
        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    Ok(dh.max(db))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub samples: usize,
    pub fitted_c0: f64,
    pub minimal_residual_stat: f64,
    pub hminimal_residual_stat: f64,
    pub totally_geodesic_residual_stat: f64,
    pub max_mean_curvature: f64,
    pub gradient_identity_max: f64,
}

/// Per-sample reports, in sample order; the first failing sample's error wins.
pub fn graph_reports(graph: &PotentialGraph, samples: usize, seed: u64) -> Result<Vec<GraphReport>> {
    if samples == 0 {
        return Err(Error::InvalidParams("sample count must be at least 1".into()));
    }
    let points = graph.region().sample(samples, seed);
    let results: Vec<Result<GraphReport>> = points.par_iter().map(|x| graph_geometry_at(graph, x)).collect();
    results.into_iter().collect()
}

pub fn classify(graph: &PotentialGraph, samples: usize, seed: u64) -> Result<ClassifyReport> {
    let reports = graph_reports(graph, samples, seed)?;
    let fitted_c0 = reports.iter().map(|r| r.det_hess).sum::<f64>() / reports.len() as f64;
    let max = |f: &dyn Fn(&GraphReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
    Ok(ClassifyReport {
        samples,
        fitted_c0,
        minimal_residual_stat: max(&|r| (r.det_hess - fitted_c0).abs()),
        hminimal_residual_stat: max(&|r| r.hminimal_residual),
        totally_geodesic_residual_stat: max(&|r| r.totally_geodesic_residual),
        max_mean_curvature: max(&|r| r.minimal_residual),
        gradient_identity_max: max(&|r| r.gradient_identity_residual),
    })
}

/// The induced metric `2 Hess u` as a chart over the graph's box.
pub fn induced_chart(graph: &PotentialGraph) -> Result<RiemannianChart> {
    let (Potential::Expr(u), Region::Box(domain)) = (graph.potential(), graph.region()) else {
        return Err(Error::InvalidParams(
            "the induced chart needs an expression potential on a box".into(),
        ));
    };
    let n = u.arity();
    let metric = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let second = u.partial(i).partial(j).root().clone();
                    Expression::from_node(
                        Node::Mul(Box::new(Node::Const(2.0)), Box::new(second)),
                        u.variables().to_vec(),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RiemannianChart::new("induced", u.variables().to_vec(), domain.clone(), metric)
}

/// Largest component of the curvature tensor of `2 Hess u` over the samples.
pub fn gauss_flatness_check(graph: &PotentialGraph, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParams("sample count must be at least 1".into()));
    }
    let chart = induced_chart(graph)?;
    let points = graph.region().sample(samples, seed);
    let results: Vec<Result<f64>> = points
        .par_iter()
        .map(|x| {
            graph.checked_jet(x)?;
            Ok(chart.curvature_at(x)?.riemann_lower.max_abs())
        })
        .collect();
    results.into_iter().try_fold(0.0, |acc, r| Ok(f64::max(acc, r?)))
}

#[cfg(test)]
mod tests;
