//! Curvature of the neutral metric `G` on `TN`.
//!
//! The closed form is assembled from base curvature data. The oracle
//! differentiates the `2n×2n` matrix field `G(x, V)` numerically and never
//! touches the closed-form connection, so the two routes are independent.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::manifold::{BaseGeometry, RiemannianChart};
use crate::tangent_bundle::{BundleFrame, BundlePoint, BundleVector};
use crate::tensor::Tensor;

/// Step of the central differences on the `2n`-chart.
pub const ORACLE_STEP: f64 = 1e-3;

/// Base data needed for the closed-form curvature at one bundle point.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub frame: BundleFrame,
    pub base: BaseGeometry,
    /// `g((D_V R)(∂i,∂j)∂k, ∂l)` as `[[i, j, k, l]]`.
    pub dv_rm: Tensor,
}

impl ClosedForm {
    pub fn new(chart: &RiemannianChart, p: &BundlePoint) -> Result<Self> {
        let base = chart.geometry_at(&p.x)?;
        let frame = BundleFrame::from_connection(base.connection(), p.v.clone());
        let dv_rm = base.dv_riemann_lower(&p.v);
        Ok(Self { frame, base, dv_rm })
    }

    pub fn dim(&self) -> usize {
        self.base.n()
    }

    /// `R̄m(X,Y,Z,W)` from the split components of the four vectors.
    pub fn rm(&self, x: &BundleVector, y: &BundleVector, z: &BundleVector, w: &BundleVector) -> f64 {
        let (px, kx) = self.frame.split(x);
        let (py, ky) = self.frame.split(y);
        let (pz, kz) = self.frame.split(z);
        let (pw, kw) = self.frame.split(w);
        let rm = &self.base.riemann_lower;
        rm.eval4(&kx, &py, &pz, &pw)
            + rm.eval4(&px, &ky, &pz, &pw)
            + rm.eval4(&px, &py, &kz, &pw)
            + rm.eval4(&px, &py, &pz, &kw)
            + self.dv_rm.eval4(&px, &py, &pz, &pw)
    }

    /// All coordinate components `R̄m(∂a,∂b,∂c,∂d)` over the `2n`-chart.
    pub fn rm_tensor(&self) -> Tensor {
        let n = self.dim();
        let basis: Vec<BundleVector> = (0..2 * n).map(|a| BundleVector::basis(n, a)).collect();
        Tensor::from_fn(2 * n, 4, |ix| {
            self.rm(&basis[ix[0]], &basis[ix[1]], &basis[ix[2]], &basis[ix[3]])
        })
    }

    /// `2 Ric(ΠX, ΠY)`.
    pub fn ricci_predicted(&self, x: &BundleVector, y: &BundleVector) -> f64 {
        let ric = &self.base.ricci;
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += ric[(i, j)] * x.xdot[i] * y.xdot[j];
            }
        }
        2.0 * s
    }
}

/// `R̄m(X,Y,Z,W)` at `p`.
pub fn riemann_g_closed(
    chart: &RiemannianChart,
    p: &BundlePoint,
    x: &BundleVector,
    y: &BundleVector,
    z: &BundleVector,
    w: &BundleVector,
) -> Result<f64> {
    Ok(ClosedForm::new(chart, p)?.rm(x, y, z, w))
}

/// `Ric_bc = G^{ad} Rm_abcd` for a lowered curvature tensor.
pub fn ricci_from(rm: &Tensor, g_inv: &DMatrix<f64>) -> DMatrix<f64> {
    let d = rm.dim();
    DMatrix::from_fn(d, d, |b, c| {
        let mut s = 0.0;
        for a in 0..d {
            for e in 0..d {
                s += g_inv[(a, e)] * rm[[a, b, c, e]];
            }
        }
        s
    })
}

pub fn scalar_from(ricci: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> f64 {
    g_inv.component_mul(ricci).sum()
}

/// Weyl tensor of a lowered curvature tensor in dimension `N ≥ 3`.
pub fn weyl_from(rm: &Tensor, g: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> Tensor {
    let d = rm.dim();
    assert!(d >= 3, "the Weyl tensor needs dimension at least 3");
    let ric = ricci_from(rm, g_inv);
    let s = scalar_from(&ric, g_inv);
    let nn = d as f64;
    Tensor::from_fn(d, 4, |ix| {
        let (a, b, c, e) = (ix[0], ix[1], ix[2], ix[3]);
        let schouten = (ric[(b, c)] * g[(a, e)] - ric[(a, c)] * g[(b, e)] + ric[(a, e)] * g[(b, c)]
            - ric[(b, e)] * g[(a, c)])
            / (nn - 2.0);
        let scal = s / ((nn - 1.0) * (nn - 2.0)) * (g[(a, e)] * g[(b, c)] - g[(a, c)] * g[(b, e)]);
        rm[[a, b, c, e]] - schouten + scal
    })
}

fn metric_matrix(chart: &RiemannianChart, y: &[f64]) -> Result<DMatrix<f64>> {
    Ok(BundleFrame::new(chart, &BundlePoint::from_coords(y))?.metric())
}

fn invert(m: &DMatrix<f64>, y: &[f64]) -> Result<DMatrix<f64>> {
    let det = m.determinant();
    m.clone()
        .try_inverse()
        .filter(|_| det.abs() > 1e-14)
        .ok_or(Error::Degenerate {
            what: "bundle metric",
            location: y.to_vec(),
            det: det.abs(),
        })
}

/// Christoffel symbols of `G` by central differences (Richardson) of the
/// matrix field, with a numerically inverted metric.
pub fn oracle_christoffels(chart: &RiemannianChart, y: &[f64]) -> Result<Tensor> {
    let d = y.len();
    let jac = fd::jacobian(
        |q| Ok(metric_matrix(chart, q)?.iter().copied().collect()),
        y,
        ORACLE_STEP,
        true,
    )?;
    let gi = invert(&metric_matrix(chart, y)?, y)?;
    // column-major storage: entry (a, b) sits at b*d + a
    let dg = |a: usize, b: usize, c: usize| jac[c][b * d + a];
    Ok(Tensor::from_fn(d, 3, |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        (0..d)
            .map(|l| 0.5 * gi[(k, l)] * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l)))
            .sum()
    }))
}

/// `R̄^l_ijk` from differences of [`oracle_christoffels`].
pub fn oracle_riemann_mixed(chart: &RiemannianChart, y: &[f64]) -> Result<Tensor> {
    let d = y.len();
    let jac = fd::jacobian(
        |q| Ok(oracle_christoffels(chart, q)?.data().to_vec()),
        y,
        ORACLE_STEP,
        true,
    )?;
    let gm = oracle_christoffels(chart, y)?;
    let dgam = |k: usize, i: usize, j: usize, m: usize| jac[m][(k * d + i) * d + j];
    Ok(Tensor::from_fn(d, 4, |ix| {
        let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut s = dgam(l, j, k, i) - dgam(l, i, k, j);
        for m in 0..d {
            s += gm[[l, i, m]] * gm[[m, j, k]] - gm[[l, j, m]] * gm[[m, i, k]];
        }
        s
    }))
}

/// Brute-force lowered curvature `R̄m(∂a,∂b,∂c,∂d)` of `G` at `p`.
pub fn curvature_oracle_at(chart: &RiemannianChart, p: &BundlePoint) -> Result<Tensor> {
    let y = p.coords();
    let mixed = oracle_riemann_mixed(chart, &y)?;
    let g = metric_matrix(chart, &y)?;
    Ok(crate::manifold::lower_last(&mixed, &g))
}

/// Brute-force `∇R̄` as `[[l, i, j, k, m]]`, the derivative in slot `m`.
pub fn oracle_covariant_riemann(chart: &RiemannianChart, p: &BundlePoint) -> Result<Tensor> {
    let y = p.coords();
    let d = y.len();
    let jac = fd::jacobian(
        |q| Ok(oracle_riemann_mixed(chart, q)?.data().to_vec()),
        &y,
        ORACLE_STEP,
        true,
    )?;
    let r = oracle_riemann_mixed(chart, &y)?;
    let gm = oracle_christoffels(chart, &y)?;
    Ok(Tensor::from_fn(d, 5, |ix| {
        let (l, i, j, k, m) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        let mut s = jac[m][((l * d + i) * d + j) * d + k];
        for a in 0..d {
            s += gm[[l, m, a]] * r[[a, i, j, k]]
                - gm[[a, m, i]] * r[[l, a, j, k]]
                - gm[[a, m, j]] * r[[l, i, a, k]]
                - gm[[a, m, k]] * r[[l, i, j, a]];
        }
        s
    }))
}

/// Curvature invariants of `G` at one bundle point.
#[derive(Debug, Clone, Serialize)]
pub struct BundleCurvatureReport {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub scalar_g: f64,
    pub ricci_g: Vec<Vec<f64>>,
    /// `max |Ric̄(∂a,∂b) − 2 Ric(Π∂a, Π∂b)|`.
    pub ricci_structure_residual: f64,
    pub weyl_max: f64,
    pub einstein_residual: f64,
    pub locally_symmetric_residual: f64,
    pub oracle_gap: f64,
}

/// Which of the expensive brute-force pieces to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub oracle: bool,
    pub covariant: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            oracle: true,
            covariant: true,
        }
    }
}

/// Scalar, Ricci and Einstein data from the closed form.
pub struct ClosedInvariants {
    pub rm: Tensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub ricci_structure_residual: f64,
    pub einstein_residual: f64,
}

pub fn closed_invariants(cf: &ClosedForm) -> ClosedInvariants {
    let rm = cf.rm_tensor();
    let gi = cf.frame.metric_inverse();
    let g = cf.frame.metric();
    let ricci = ricci_from(&rm, &gi);
    let scalar = scalar_from(&ricci, &gi);
    let n = cf.dim();
    let mut structure = 0.0f64;
    for a in 0..2 * n {
        for b in 0..2 * n {
            let pred = cf.ricci_predicted(&BundleVector::basis(n, a), &BundleVector::basis(n, b));
            structure = structure.max((ricci[(a, b)] - pred).abs());
        }
    }
    let einstein = (&ricci - &g * (scalar / (2 * n) as f64)).abs().max();
    ClosedInvariants {
        rm,
        ricci,
        scalar,
        ricci_structure_residual: structure,
        einstein_residual: einstein,
    }
}

pub fn invariants_report(
    chart: &RiemannianChart,
    p: &BundlePoint,
    opts: ReportOptions,
) -> Result<BundleCurvatureReport> {
    let cf = ClosedForm::new(chart, p)?;
    let inv = closed_invariants(&cf);
    let g = cf.frame.metric();
    let (weyl_max, oracle_gap) = if opts.oracle {
        let oracle = curvature_oracle_at(chart, p)?;
        let gi = invert(&g, &p.coords())?;
        (weyl_from(&oracle, &g, &gi).max_abs(), oracle.max_abs_diff(&inv.rm))
    } else {
        (f64::NAN, f64::NAN)
    };
    let locally_symmetric_residual = if opts.covariant {
        oracle_covariant_riemann(chart, p)?.max_abs()
    } else {
        f64::NAN
    };
    let d = 2 * cf.dim();
    Ok(BundleCurvatureReport {
        x: p.x.clone(),
        v: p.v.clone(),
        scalar_g: inv.scalar,
        ricci_g: (0..d).map(|a| (0..d).map(|b| inv.ricci[(a, b)]).collect()).collect(),
        ricci_structure_residual: inv.ricci_structure_residual,
        weyl_max,
        einstein_residual: inv.einstein_residual,
        locally_symmetric_residual,
        oracle_gap,
    })
}

#[cfg(test)]
mod tests;
