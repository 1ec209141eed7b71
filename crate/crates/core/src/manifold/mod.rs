//! Single-chart Riemannian manifolds and their connection and curvature.
//!
//! Index conventions used by every tensor in this module:
//!
//! * `gamma[[k, i, j]]` is `Γ^k_ij`;
//! * `riemann_mixed[[l, i, j, k]]` is `R^l_ijk` with
//!   `R(∂i,∂j)∂k = ∇i∇j∂k − ∇j∇i∂k = R^l_ijk ∂l`;
//! * `riemann_lower[[i, j, k, l]] = Rm(∂i,∂j,∂k,∂l) = g(R(∂i,∂j)∂k, ∂l)`;
//! * `ricci[(j, k)] = R^i_ijk`, positive on the round sphere;
//! * `cov_riemann[[l, i, j, k, m]] = (D_m R)^l_ijk`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::sampling;
use crate::tensor::Tensor;

/// Smallest |det g| accepted as non-degenerate.
pub const DET_EPS: f64 = 1e-10;
/// Pole / boundary margin used by the built-in charts.
pub const CHART_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct RiemannianChart {
    name: String,
    vars: Vec<String>,
    domain: Vec<(f64, f64)>,
    /// Row-major n×n; `metric[i*n+j]` and `metric[j*n+i]` are equal trees.
    metric: Vec<Expression>,
    riemannian: bool,
}

/// Built-in fixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Euclidean(usize),
    /// Round sphere of the given radius in (θ, φ).
    Sphere2 {
        radius: f64,
    },
    /// Upper half-plane with `g = x₂⁻² I`.
    Hyperbolic2,
    /// Unit 3-sphere in hyperspherical coordinates (χ, θ, φ).
    Sphere3,
    /// `diag(1, (2 + sin x₁)²)`: non-constant curvature surface.
    Warped2,
    /// `diag(1, 1, (1 + ½ sin x₁)²)`.
    Warped3,
}

impl Builtin {
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let kind = match lower.as_str() {
            "sphere2" => Builtin::Sphere2 { radius: 1.0 },
            "hyperbolic2" => Builtin::Hyperbolic2,
            "sphere3" => Builtin::Sphere3,
            "warped2" => Builtin::Warped2,
            "warped3" | "warped-n3" => Builtin::Warped3,
            s if s.starts_with("euclidean") => {
                let digits = s.trim_start_matches("euclidean").trim_matches(|c| c == '(' || c == ')');
                let n = digits
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParams(format!("bad euclidean dimension in `{name}`")))?;
                Builtin::Euclidean(n)
            }
            _ => return Err(Error::InvalidParams(format!("unknown built-in manifold `{name}`"))),
        };
        Ok(kind)
    }
}

/// On-disk manifold definition (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldFile {
    pub name: String,
    pub n: usize,
    pub domain: Vec<[f64; 2]>,
    pub metric: Vec<Vec<String>>,
    /// Defaults to `x1 … xn`.
    #[serde(default)]
    pub variables: Option<Vec<String>>,
}

pub fn default_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

pub fn make_builtin(kind: Builtin) -> Result<RiemannianChart> {
    let pi = std::f64::consts::PI;
    let d = CHART_MARGIN;
    let diag = |entries: &[&str]| -> Vec<Vec<String>> {
        let n = entries.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { entries[i].to_string() } else { "0".into() })
                    .collect()
            })
            .collect()
    };
    let (name, vars, domain, metric) = match kind {
        Builtin::Euclidean(n) => {
            if n == 0 {
                return Err(Error::InvalidParams("euclidean dimension must be >= 1".into()));
            }
            let ones = vec!["1"; n];
            (
                format!("euclidean{n}"),
                default_vars(n),
                vec![(-3.0, 3.0); n],
                diag(&ones),
            )
        }
        Builtin::Sphere2 { radius } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "sphere radius must be positive, got {radius}"
                )));
            }
            let r2 = radius * radius;
            let g11 = format!("{r2}");
            let g22 = format!("{r2}*sin(th)^2");
            (
                "sphere2".to_string(),
                vec!["th".into(), "ph".into()],
                vec![(d, pi - d), (0.0, 2.0 * pi)],
                diag(&[&g11, &g22]),
            )
        }
        Builtin::Hyperbolic2 => (
            "hyperbolic2".to_string(),
            default_vars(2),
            vec![(-2.0, 2.0), (0.5, 4.0)],
            diag(&["1/x2^2", "1/x2^2"]),
        ),
        Builtin::Sphere3 => (
            "sphere3".to_string(),
            vec!["ch".into(), "th".into(), "ph".into()],
            vec![(d, pi - d), (d, pi - d), (0.0, 2.0 * pi)],
            diag(&["1", "sin(ch)^2", "sin(ch)^2*sin(th)^2"]),
        ),
        Builtin::Warped2 => (
            "warped2".to_string(),
            default_vars(2),
            vec![(-3.0, 3.0), (-3.0, 3.0)],
            diag(&["1", "(2 + sin(x1))^2"]),
        ),
        Builtin::Warped3 => (
            "warped3".to_string(),
            default_vars(3),
            vec![(-3.0, 3.0); 3],
            diag(&["1", "1", "(1 + 0.5*sin(x1))^2"]),
        ),
    };
    let mut chart = RiemannianChart::from_strings(&name, vars, domain, &metric)?;
    chart.riemannian = true;
    Ok(chart)
}

/// Metric components and their coordinate derivatives at one point.
/// `dg[[a, b, p]] = ∂_p g_ab`, and so on for higher orders.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Tensor,
    pub d2g: Tensor,
    pub d3g: Tensor,
}

/// Metric, inverse and Christoffel symbols.
#[derive(Debug, Clone)]
pub struct Connection {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub gamma: Tensor,
}

/// Everything through the curvature and its covariant derivative.
#[derive(Debug, Clone)]
pub struct BaseGeometry {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub gamma: Tensor,
    /// `dgamma[[k, i, j, m]] = ∂_m Γ^k_ij`.
    pub dgamma: Tensor,
    pub riemann_mixed: Tensor,
    pub riemann_lower: Tensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    /// Present only when third metric derivatives were computed.
    pub cov_riemann: Option<Tensor>,
}

impl BaseGeometry {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn connection(&self) -> Connection {
        Connection {
            x: self.x.clone(),
            g: self.g.clone(),
            g_inv: self.g_inv.clone(),
            gamma: self.gamma.clone(),
        }
    }

    /// `R(a,b)c` as a vector.
    pub fn r_apply(&self, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (l, o) in out.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let ab = a[i] * b[j];
                    if ab == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        *o += self.riemann_mixed[[l, i, j, k]] * ab * c[k];
                    }
                }
            }
        }
        out
    }

    /// `(D_v R)^l_ijk`, the covariant derivative contracted in its
    /// derivative slot. Requires `cov_riemann`.
    pub fn dv_riemann(&self, v: &[f64]) -> Tensor {
        self.cov_riemann
            .as_ref()
            .expect("geometry computed without third derivatives")
            .contract_last(v)
    }

    /// `g((D_v R)(∂i,∂j)∂k, ∂l)` as `[[i, j, k, l]]`.
    pub fn dv_riemann_lower(&self, v: &[f64]) -> Tensor {
        let mixed = self.dv_riemann(v);
        lower_last(&mixed, &self.g)
    }
}

/// Lower the upper index of a mixed `[[l, i, j, k]]` tensor into the
/// last slot: `out[[i, j, k, l]] = Σ_m T[[m, i, j, k]] g_ml`.
pub fn lower_last(mixed: &Tensor, g: &DMatrix<f64>) -> Tensor {
    let n = g.nrows();
    Tensor::from_fn(n, 4, |ix| {
        (0..n).map(|m| mixed[[m, ix[0], ix[1], ix[2]]] * g[(m, ix[3])]).sum()
    })
}

impl RiemannianChart {
    pub fn new(name: &str, vars: Vec<String>, domain: Vec<(f64, f64)>, metric: Vec<Vec<Expression>>) -> Result<Self> {
        let n = vars.len();
        if n == 0 {
            return Err(Error::Definition("dimension must be at least 1".into()));
        }
        if domain.len() != n {
            return Err(Error::Definition(format!(
                "domain has {} intervals for n = {n}",
                domain.len()
            )));
        }
        for (i, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Definition(format!(
                    "interval {i} is empty or unbounded: [{lo}, {hi}]"
                )));
            }
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return Err(Error::Definition(format!("metric must be {n}×{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if metric[i][j].variables() != vars.as_slice() {
                    return Err(Error::Definition(format!("metric[{i}][{j}] has mismatched variables")));
                }
                if j > i && metric[i][j] != metric[j][i] {
                    return Err(Error::Definition(format!("metric is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            vars,
            domain,
            metric: metric.into_iter().flatten().collect(),
            riemannian: false,
        })
    }

    pub fn from_strings(
        name: &str,
        vars: Vec<String>,
        domain: Vec<(f64, f64)>,
        metric: &[Vec<String>],
    ) -> Result<Self> {
        let parsed = metric
            .iter()
            .map(|row| {
                row.iter()
                    .map(|src| Expression::parse_owned(src, vars.clone()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, vars, domain, parsed)
    }

    pub fn from_file_spec(spec: &ManifoldFile) -> Result<Self> {
        let vars = spec.variables.clone().unwrap_or_else(|| default_vars(spec.n));
        if vars.len() != spec.n {
            return Err(Error::Definition(format!(
                "{} variable names for n = {}",
                vars.len(),
                spec.n
            )));
        }
        let domain = spec.domain.iter().map(|[a, b]| (*a, *b)).collect();
        Self::from_strings(&spec.name, vars, domain, &spec.metric)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ManifoldFile = serde_json::from_str(text).map_err(|e| Error::Definition(e.to_string()))?;
        Self::from_file_spec(&spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// True for the built-in charts, whose metrics are positive definite.
    pub fn is_riemannian(&self) -> bool {
        self.riemannian
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.metric[i * self.dim() + j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, (lo, hi))| *lo < *v && *v < *hi)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(x.to_vec()))
        }
    }

    /// Deterministic interior samples (boundary margin 1e-2).
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        sampling::sample_box(&self.domain, count, seed, sampling::BOUNDARY_MARGIN)
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.component(i, j).eval(x)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    pub fn metric_jet(&self, x: &[f64], order: usize) -> Result<MetricJet> {
        self.check_point(x)?;
        let n = self.dim();
        let mut jet = MetricJet {
            g: DMatrix::zeros(n, n),
            dg: Tensor::zeros(n, 3),
            d2g: Tensor::zeros(n, 4),
            d3g: Tensor::zeros(n, 5),
        };
        for a in 0..n {
            for b in a..n {
                let e = self.component(a, b);
                let j = if e.is_constant() {
                    e.jet(x, 0)?
                } else {
                    e.jet(x, order)?
                };
                for (s, t) in [(a, b), (b, a)] {
                    jet.g[(s, t)] = j.value;
                    for p in 0..n {
                        jet.dg[[s, t, p]] = j.grad[p];
                        if order >= 2 {
                            for q in 0..n {
                                jet.d2g[[s, t, p, q]] = j.hess[(p, q)];
                                if order >= 3 {
                                    for r in 0..n {
                                        jet.d3g[[s, t, p, q, r]] = j.third[[p, q, r]];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(jet)
    }

    fn invert(&self, g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
        let det = g.determinant();
        if !(det.abs() > DET_EPS) {
            return Err(Error::Degenerate {
                what: "metric",
                location: x.to_vec(),
                det: det.abs(),
            });
        }
        g.clone().try_inverse().ok_or(Error::Degenerate {
            what: "metric",
            location: x.to_vec(),
            det: det.abs(),
        })
    }

    /// Metric, inverse and Christoffel symbols (first metric derivatives only).
    pub fn connection_at(&self, x: &[f64]) -> Result<Connection> {
        let jet = self.metric_jet(x, 1)?;
        let g_inv = self.invert(&jet.g, x)?;
        let c1 = christoffel_first_kind(&jet.dg);
        let n = self.dim();
        let gamma = Tensor::from_fn(n, 3, |ix| {
            (0..n).map(|l| g_inv[(ix[0], l)] * c1[[ix[1], ix[2], l]]).sum()
        });
        Ok(Connection {
            x: x.to_vec(),
            g: jet.g,
            g_inv,
            gamma,
        })
    }

    /// Connection and curvature (second metric derivatives).
    pub fn curvature_at(&self, x: &[f64]) -> Result<BaseGeometry> {
        self.compute(x, false)
    }

    /// Full geometry including the covariant derivative of curvature.
    pub fn geometry_at(&self, x: &[f64]) -> Result<BaseGeometry> {
        self.compute(x, true)
    }

    /// `(D_v R)^l_ijk` at `x`.
    pub fn dv_riemann(&self, x: &[f64], v: &[f64]) -> Result<Tensor> {
        assert_eq!(v.len(), self.dim());
        Ok(self.geometry_at(x)?.dv_riemann(v))
    }

    fn compute(&self, x: &[f64], with_cov: bool) -> Result<BaseGeometry> {
        let n = self.dim();
        let jet = self.metric_jet(x, if with_cov { 3 } else { 2 })?;
        let g = jet.g.clone();
        let gi = self.invert(&g, x)?;

        let c1 = christoffel_first_kind(&jet.dg);
        // ∂_p of the first-kind symbols
        let dc1 = Tensor::from_fn(n, 4, |ix| {
            let (i, j, l, p) = (ix[0], ix[1], ix[2], ix[3]);
            0.5 * (jet.d2g[[j, l, i, p]] + jet.d2g[[i, l, j, p]] - jet.d2g[[i, j, l, p]])
        });
        let dgi = Tensor::from_fn(n, 3, |ix| {
            let (k, l, p) = (ix[0], ix[1], ix[2]);
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s -= gi[(k, a)] * jet.dg[[a, b, p]] * gi[(b, l)];
                }
            }
            s
        });

        let gamma = Tensor::from_fn(n, 3, |ix| (0..n).map(|l| gi[(ix[0], l)] * c1[[ix[1], ix[2], l]]).sum());
        let dgamma = Tensor::from_fn(n, 4, |ix| {
            let (k, i, j, p) = (ix[0], ix[1], ix[2], ix[3]);
            (0..n)
                .map(|l| dgi[[k, l, p]] * c1[[i, j, l]] + gi[(k, l)] * dc1[[i, j, l, p]])
                .sum()
        });

        let riemann_mixed = Tensor::from_fn(n, 4, |ix| {
            let (l, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
            let mut s = dgamma[[l, j, k, i]] - dgamma[[l, i, k, j]];
            for m in 0..n {
                s += gamma[[l, i, m]] * gamma[[m, j, k]] - gamma[[l, j, m]] * gamma[[m, i, k]];
            }
            s
        });
        let riemann_lower = lower_last(&riemann_mixed, &g);
        let ricci = DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| riemann_mixed[[i, i, j, k]]).sum());
        let scalar = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| gi[(j, k)] * ricci[(j, k)])
            .sum();

        let cov_riemann = if with_cov {
            Some(covariant_riemann(
                &jet,
                &gi,
                &dgi,
                &c1,
                &dc1,
                &gamma,
                &dgamma,
                &riemann_mixed,
            ))
        } else {
            None
        };

        Ok(BaseGeometry {
            x: x.to_vec(),
            g,
            g_inv: gi,
            gamma,
            dgamma,
            riemann_mixed,
            riemann_lower,
            ricci,
            scalar,
            cov_riemann,
        })
    }
}

/// `c1[[i, j, l]] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
fn christoffel_first_kind(dg: &Tensor) -> Tensor {
    Tensor::from_fn(dg.dim(), 3, |ix| {
        let (i, j, l) = (ix[0], ix[1], ix[2]);
        0.5 * (dg[[j, l, i]] + dg[[i, l, j]] - dg[[i, j, l]])
    })
}

#[allow(clippy::too_many_arguments)]
fn covariant_riemann(
    jet: &MetricJet,
    gi: &DMatrix<f64>,
    dgi: &Tensor,
    c1: &Tensor,
    dc1: &Tensor,
    gamma: &Tensor,
    dgamma: &Tensor,
    riem: &Tensor,
) -> Tensor {
    let n = gi.nrows();
    let d2c1 = Tensor::from_fn(n, 5, |ix| {
        let (i, j, l, p, q) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        0.5 * (jet.d3g[[j, l, i, p, q]] + jet.d3g[[i, l, j, p, q]] - jet.d3g[[i, j, l, p, q]])
    });
    // ∂_q ∂_p g^{kl}
    let d2gi = Tensor::from_fn(n, 4, |ix| {
        let (k, l, p, q) = (ix[0], ix[1], ix[2], ix[3]);
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s -= dgi[[k, a, q]] * jet.dg[[a, b, p]] * gi[(b, l)]
                    + gi[(k, a)] * jet.d2g[[a, b, p, q]] * gi[(b, l)]
                    + gi[(k, a)] * jet.dg[[a, b, p]] * dgi[[b, l, q]];
            }
        }
        s
    });
    let d2gamma = Tensor::from_fn(n, 5, |ix| {
        let (k, i, j, p, q) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        (0..n)
            .map(|l| {
                d2gi[[k, l, p, q]] * c1[[i, j, l]]
                    + dgi[[k, l, p]] * dc1[[i, j, l, q]]
                    + dgi[[k, l, q]] * dc1[[i, j, l, p]]
                    + gi[(k, l)] * d2c1[[i, j, l, p, q]]
            })
            .sum()
    });
    // ∂_p R^l_ijk
    let driem = Tensor::from_fn(n, 5, |ix| {
        let (l, i, j, k, p) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        let mut s = d2gamma[[l, j, k, i, p]] - d2gamma[[l, i, k, j, p]];
        for m in 0..n {
            s += dgamma[[l, i, m, p]] * gamma[[m, j, k]] + gamma[[l, i, m]] * dgamma[[m, j, k, p]]
                - dgamma[[l, j, m, p]] * gamma[[m, i, k]]
                - gamma[[l, j, m]] * dgamma[[m, i, k, p]];
        }
        s
    });
    Tensor::from_fn(n, 5, |ix| {
        let (l, i, j, k, m) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        let mut s = driem[[l, i, j, k, m]];
        for a in 0..n {
            s += gamma[[l, m, a]] * riem[[a, i, j, k]]
                - gamma[[a, m, i]] * riem[[l, a, j, k]]
                - gamma[[a, m, j]] * riem[[l, i, a, k]]
                - gamma[[a, m, k]] * riem[[l, i, j, a]];
        }
        s
    })
}

#[cfg(test)]
mod tests;
