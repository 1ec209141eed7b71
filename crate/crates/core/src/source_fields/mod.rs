//! Spherically symmetric source fields `V = H(R) ∂/∂R` on `ℝⁿ∖{0}` and the
//! Lagrangian graphs of their potentials.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::scalar::{seed3, Scalar};
use crate::expr::Expression;
use crate::lagrangian::{classify, ClassifyReport, Potential, PotentialGraph, PotentialJet, Region};
use crate::ode;
use crate::tensor::Tensor;

/// Radii used when no interval is requested.
pub const DEFAULT_INTERVAL: (f64, f64) = (0.5, 3.0);
/// Smallest admissible radius.
pub const MIN_RADIUS: f64 = 0.1;
/// Points at which the constructors probe positivity and monotonicity.
const GUARD_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub enum IntensityKind {
    /// `H = (c₀Rⁿ + c₁)^{1/n}`.
    Minimal { c0: f64, c1: f64 },
    /// `H = (c₂ + c₁e^{c₀R} Σₖ k!(−1)ᵏ/c₀ᵏ C(n−1,k) R^{n−1−k})^{1/n}`.
    HMinimal { c0: f64, c1: f64, c2: f64 },
    /// Any expression in the single variable `R`.
    Custom(Expression),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    n: usize,
    kind: IntensityKind,
    interval: (f64, f64),
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub fn intensity_minimal(n: usize, c0: f64, c1: f64) -> Result<IntensityProfile> {
    if !(c0 > 0.0) || !c1.is_finite() {
        return Err(Error::InvalidParams(format!(
            "minimal family needs c0 > 0 and finite c1, got ({c0}, {c1})"
        )));
    }
    IntensityProfile::build(n, IntensityKind::Minimal { c0, c1 }, DEFAULT_INTERVAL)
}

pub fn intensity_hminimal(n: usize, c0: f64, c1: f64, c2: f64) -> Result<IntensityProfile> {
    if c0 == 0.0 || !c0.is_finite() || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::InvalidParams(format!(
            "Hamiltonian-minimal family needs c0 != 0 and finite constants, got ({c0}, {c1}, {c2})"
        )));
    }
    IntensityProfile::build(n, IntensityKind::HMinimal { c0, c1, c2 }, DEFAULT_INTERVAL)
}

/// Profile from an expression in `R`, e.g. `"R^2"`.
pub fn intensity_custom(n: usize, source: &str) -> Result<IntensityProfile> {
    let expr = Expression::parse(source, &["R"])?;
    IntensityProfile::build(n, IntensityKind::Custom(expr), DEFAULT_INTERVAL)
}

impl IntensityProfile {
    fn build(n: usize, kind: IntensityKind, interval: (f64, f64)) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        let profile = Self { n, kind, interval };
        profile.validate()?;
        Ok(profile)
    }

    /// Same family on another radius interval.
    pub fn with_interval(&self, lo: f64, hi: f64) -> Result<Self> {
        Self::build(self.n, self.kind.clone(), (lo, hi))
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(lo >= MIN_RADIUS && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "radius interval [{lo}, {hi}] must satisfy {MIN_RADIUS} <= lo < hi"
            )));
        }
        let mut sign = 0.0;
        for k in 0..=GUARD_SAMPLES {
            let r = lo + (hi - lo) * k as f64 / GUARD_SAMPLES as f64;
            let [h, dh, ..] = self
                .derivatives(r)
                .map_err(|e| Error::InvalidParams(format!("intensity undefined at R = {r}: {e}")))?;
            if !h.is_finite() || !dh.is_finite() {
                return Err(Error::InvalidParams(format!("intensity not finite at R = {r}")));
            }
            if dh == 0.0 || (sign != 0.0 && dh.signum() != sign) {
                return Err(Error::InvalidParams(format!(
                    "intensity is not strictly monotone near R = {r}"
                )));
            }
            sign = dh.signum();
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &IntensityKind {
        &self.kind
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// `Hⁿ` for the closed families; `None` for custom profiles.
    fn radicand<T: Scalar>(&self, r: T) -> Option<T> {
        let n = self.n;
        match self.kind {
            IntensityKind::Minimal { c0, c1 } => Some(T::cst(c0) * r.powi(n as i64) + T::cst(c1)),
            IntensityKind::HMinimal { c0, c1, c2 } => {
                let mut sum = T::cst(0.0);
                for k in 0..n {
                    let coeff = factorial(k) * (-1f64).powi(k as i32) / c0.powi(k as i32) * binomial(n - 1, k);
                    sum = sum + T::cst(coeff) * r.powi((n - 1 - k) as i64);
                }
                Some(T::cst(c2) + T::cst(c1) * (T::cst(c0) * r).exp() * sum)
            }
            IntensityKind::Custom(_) => None,
        }
    }

    /// `H(R)` for any scalar type.
    pub fn eval<T: Scalar>(&self, r: T) -> Result<T> {
        if let IntensityKind::Custom(e) = &self.kind {
            return e.eval_with(&[r]);
        }
        let rad = self.radicand(r).expect("closed family");
        if !(rad.re() > 0.0) {
            return Err(Error::Domain {
                node: "intensity".into(),
                reason: format!("radicand {} is not positive at R = {}", rad.re(), r.re()),
            });
        }
        if self.n == 1 {
            return Ok(rad);
        }
        Ok(rad.powf(T::cst(1.0 / self.n as f64)))
    }

    /// `[H, H′, H″, H‴]` at `r`.
    pub fn derivatives(&self, r: f64) -> Result<[f64; 4]> {
        let y = self.eval(seed3(r, 0, 0, 0, 0))?;
        Ok([y.re.re.re, y.re.re.eps, y.re.eps.eps, y.eps.eps.eps])
    }

    /// `Φ = H^{n−1}H′/R^{n−1}`, which equals det Hess u.
    pub fn phi(&self, r: f64) -> Result<f64> {
        let [h, dh, ..] = self.derivatives(r)?;
        Ok(h.powi(self.n as i32 - 1) * dh / r.powi(self.n as i32 - 1))
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.interval.0 && r <= self.interval.1
    }

    /// Gradient of the radial potential, `uᵢ = h(R) xᵢ` with `h = H/R`.
    pub fn gradient<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        let r = x.iter().fold(T::cst(0.0), |acc, &c| acc + c * c).sqrt();
        let h = self.eval(r)? / r;
        Ok(x.iter().map(|&c| h * c).collect())
    }

    /// Second and third derivatives of the potential from `H, …, H‴`.
    pub fn potential_jet(&self, x: &[f64]) -> Result<PotentialJet> {
        let n = self.n;
        if x.len() != n {
            return Err(Error::InvalidParams(format!(
                "point has {} coordinates, expected {n}",
                x.len()
            )));
        }
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !self.contains(r) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        let [hh, d1, d2, _] = self.derivatives(r)?;
        let (r2, r3) = (r * r, r * r * r);
        let h = hh / r;
        let dh = d1 / r - hh / r2;
        let ddh = d2 / r - 2.0 * d1 / r2 + 2.0 * hh / r3;
        // ∂ₖh = q xₖ and ∂ₖq = (q′/R) xₖ.
        let q = dh / r;
        let dq = ddh / r - dh / r2;
        let grad = x.iter().map(|c| h * c).collect();
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let hess = DMatrix::from_fn(n, n, |i, j| delta(i, j) * h + q * x[i] * x[j]);
        let third = Tensor::from_fn(n, 3, |ix: &[usize]| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            q * (x[k] * delta(i, j) + x[j] * delta(i, k) + x[i] * delta(j, k)) + dq / r * x[i] * x[j] * x[k]
        });
        Ok(PotentialJet { grad, hess, third })
    }

    /// `g^{ij}` of the induced metric `2 Hess u` written through `H`.
    pub fn inverse_metric_closed(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let [h, dh, ..] = self.derivatives(r)?;
        // d/dR log(H/R)
        let dlog = dh / h - 1.0 / r;
        let n = self.n;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (1.0 + (r * r - x[i] * x[i]) / r * dlog) / (2.0 * dh)
            } else {
                -x[i] * x[j] / (2.0 * r * dh) * dlog
            }
        }))
    }

    /// `det Hess u` through the eigenvalues of `A = x xᵀ`: the Hessian is
    /// `h I + q A`, so its eigenvalues are `h + q λ` for `λ ∈ spec A`.
    pub fn det_via_eigenvalues(&self, x: &[f64]) -> Result<f64> {
        let n = self.n;
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let [hh, d1, ..] = self.derivatives(r)?;
        let h = hh / r;
        let q = (d1 / r - hh / (r * r)) / r;
        let a = DMatrix::from_fn(n, n, |i, j| x[i] * x[j]);
        Ok(a.symmetric_eigenvalues().iter().map(|l| h + q * l).product())
    }

    /// Graph of the potential over the shell `lo <= |x| <= hi`.
    pub fn graph(&self) -> PotentialGraph {
        PotentialGraph::new(
            Potential::Source(self.clone()),
            Region::Shell {
                n: self.n,
                lo: self.interval.0,
                hi: self.interval.1,
            },
        )
        .expect("source potential matches its shell")
    }
}

/// Integrates `Φ′ = c₀Φ`, `(Hⁿ)′ = nR^{n−1}Φ` from the left end of the
/// interval and returns `|H_formula(r_end) − H_ode(r_end)|`.
pub fn hminimal_ode_gap(profile: &IntensityProfile, r_end: f64, steps: usize) -> Result<f64> {
    let IntensityKind::HMinimal { c0, .. } = profile.kind else {
        return Err(Error::InvalidParams(
            "ODE check applies to the Hamiltonian-minimal family".into(),
        ));
    };
    let n = profile.n as i32;
    let r0 = profile.interval.0;
    let y0 = vec![profile.eval(r0)?.powi(n), profile.phi(r0)?];
    let rhs = |r: f64, y: &[f64]| -> Result<Vec<f64>> { Ok(vec![n as f64 * r.powi(n - 1) * y[1], c0 * y[1]]) };
    let traj = ode::integrate(rhs, &y0, r0, r_end, steps, |_| true)?;
    let y = traj.last();
    let h_ode = if n == 1 { y[0] } else { y[0].powf(1.0 / n as f64) };
    Ok((profile.eval(r_end)? - h_ode).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceReport {
    pub classify: ClassifyReport,
    /// `max |det Hess u − H^{n−1}H′/R^{n−1}|`.
    pub det_formula_residual: f64,
    /// `max |closed-form g^{ij} − inverse of 2 Hess u|`.
    pub inverse_metric_residual: f64,
    /// `max |det Hess u − Π(h + qλ)|`.
    pub eigenvalue_residual: f64,
}

pub fn source_graph_report(profile: &IntensityProfile, samples: usize, seed: u64) -> Result<SourceReport> {
    let graph = profile.graph();
    let classify = classify(&graph, samples, seed)?;
    let mut det_formula_residual: f64 = 0.0;
    let mut inverse_metric_residual: f64 = 0.0;
    let mut eigenvalue_residual: f64 = 0.0;
    for x in graph.region().sample(samples, seed) {
        let jet = profile.potential_jet(&x)?;
        let det = jet.hess.determinant();
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        det_formula_residual = det_formula_residual.max((det - profile.phi(r)?).abs());
        eigenvalue_residual = eigenvalue_residual.max((det - profile.det_via_eigenvalues(&x)?).abs());
        let inv = (2.0 * &jet.hess).try_inverse().ok_or_else(|| Error::Degenerate {
            what: "Hessian",
            location: x.clone(),
            det,
        })?;
        inverse_metric_residual = inverse_metric_residual.max((inv - profile.inverse_metric_closed(&x)?).amax());
    }
    Ok(SourceReport {
        classify,
        det_formula_residual,
        inverse_metric_residual,
        eigenvalue_residual,
    })
}
