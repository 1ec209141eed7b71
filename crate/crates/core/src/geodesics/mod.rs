//! Geodesics of `G`, integrated two independent ways.
//!
//! The split system follows a base geodesic `x` together with a Jacobi
//! field `V` along it; the direct system integrates the raw geodesic
//! equation on the `2n`-chart with finite-difference Christoffel symbols.

use rand::Rng;
use serde::Serialize;

use crate::curvature::oracle_christoffels;
use crate::error::{Error, Result};
use crate::manifold::RiemannianChart;
use crate::ode;
use crate::sampling;
use crate::tangent_bundle::{BundleFrame, BundlePoint, BundleVector};

/// Default resolution: steps per unit time.
pub const STEPS_PER_UNIT: usize = 1000;

#[derive(Debug, Clone, Serialize)]
pub struct BundlePath {
    pub times: Vec<f64>,
    /// Induced coordinates `(x, V)` at each time.
    pub points: Vec<Vec<f64>>,
    /// `(ẋ, V̇)` at each time.
    pub velocities: Vec<Vec<f64>>,
    /// Set when the path left the chart before the final time.
    pub exited_at: Option<f64>,
}

impl BundlePath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn complete(&self) -> Result<&Self> {
        match self.exited_at {
            Some(time) => Err(Error::ExitedDomain { time }),
            None => Ok(self),
        }
    }

    /// CSV with columns `t, x1..xn, v1..vn`.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.len() / 2);
        let mut out = String::from("t");
        for i in 1..=n {
            out += &format!(",x{i}");
        }
        for i in 1..=n {
            out += &format!(",v{i}");
        }
        out.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            out += &t.to_string();
            for c in p {
                out.push(',');
                out += &c.to_string();
            }
            out.push('\n');
        }
        out
    }
}

fn check_initial(chart: &RiemannianChart, p0: &BundlePoint, v0: &BundleVector, steps: usize, t_end: f64) -> Result<()> {
    chart.check_point(&p0.x)?;
    if p0.dim() != chart.dim() || v0.xdot.len() != chart.dim() {
        return Err(Error::InvalidParams(
            "initial data dimension differs from the chart".into(),
        ));
    }
    if steps == 0 || !t_end.is_finite() || t_end == 0.0 {
        return Err(Error::InvalidParams("need steps ≥ 1 and a finite nonzero time".into()));
    }
    Ok(())
}

/// Right-hand side of the split system in `(x, ẋ, V, W)`, `W = D_{ẋ}V`.
fn split_rhs(chart: &RiemannianChart, s: &[f64]) -> Result<Vec<f64>> {
    let n = chart.dim();
    let (x, xd, v, w) = (&s[..n], &s[n..2 * n], &s[2 * n..3 * n], &s[3 * n..]);
    let geo = chart.curvature_at(x)?;
    let gm = &geo.gamma;
    let mut out = vec![0.0; 4 * n];
    for k in 0..n {
        out[k] = xd[k];
        let mut acc = 0.0;
        let mut vd = w[k];
        let mut wd = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc -= gm[[k, i, j]] * xd[i] * xd[j];
                vd -= gm[[k, i, j]] * xd[i] * v[j];
                wd -= gm[[k, i, j]] * xd[i] * w[j];
            }
        }
        // D_{ẋ}W = −R(V, ẋ)ẋ
        let r = geo.r_apply(v, xd, xd);
        out[n + k] = acc;
        out[2 * n + k] = vd;
        out[3 * n + k] = wd - r[k];
    }
    Ok(out)
}

pub fn integrate_split(
    chart: &RiemannianChart,
    p0: &BundlePoint,
    v0: &BundleVector,
    t_end: f64,
    steps: usize,
) -> Result<BundlePath> {
    check_initial(chart, p0, v0, steps, t_end)?;
    let n = chart.dim();
    let frame = BundleFrame::new(chart, p0)?;
    let (_, w0) = frame.split(v0);
    let s0 = [p0.x.as_slice(), &v0.xdot, &p0.v, &w0].concat();
    let traj = ode::integrate(
        |_, s| split_rhs(chart, s),
        &s0,
        0.0,
        t_end,
        steps,
        |s| chart.contains(&s[..n]),
    )?;
    let mut path = BundlePath {
        times: traj.times,
        points: Vec::new(),
        velocities: Vec::new(),
        exited_at: traj.exited_at,
    };
    for s in &traj.states {
        let d = split_rhs(chart, s)?;
        path.points.push([&s[..n], &s[2 * n..3 * n]].concat());
        path.velocities.push([&s[n..2 * n], &d[2 * n..3 * n]].concat());
    }
    Ok(path)
}

fn direct_rhs(chart: &RiemannianChart, s: &[f64]) -> Result<Vec<f64>> {
    let d = s.len() / 2;
    let (y, yd) = (&s[..d], &s[d..]);
    let gm = oracle_christoffels(chart, y)?;
    let mut out = vec![0.0; 2 * d];
    out[..d].copy_from_slice(yd);
    for c in 0..d {
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc -= gm[[c, a, b]] * yd[a] * yd[b];
            }
        }
        out[d + c] = acc;
    }
    Ok(out)
}

pub fn integrate_direct(
    chart: &RiemannianChart,
    p0: &BundlePoint,
    v0: &BundleVector,
    t_end: f64,
    steps: usize,
) -> Result<BundlePath> {
    check_initial(chart, p0, v0, steps, t_end)?;
    let n = chart.dim();
    let s0 = [p0.coords(), v0.coords()].concat();
    let traj = ode::integrate(
        |_, s| direct_rhs(chart, s),
        &s0,
        0.0,
        t_end,
        steps,
        |s| chart.contains(&s[..n]),
    )?;
    Ok(BundlePath {
        times: traj.times,
        points: traj.states.iter().map(|s| s[..2 * n].to_vec()).collect(),
        velocities: traj.states.iter().map(|s| s[2 * n..].to_vec()).collect(),
        exited_at: traj.exited_at,
    })
}

/// Sup over the common grid of the coordinate distance between two paths.
pub fn path_gap(a: &BundlePath, b: &BundlePath) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

pub fn compare_geodesics(
    chart: &RiemannianChart,
    p0: &BundlePoint,
    v0: &BundleVector,
    t_end: f64,
    steps: usize,
) -> Result<f64> {
    let a = integrate_split(chart, p0, v0, t_end, steps)?;
    let b = integrate_direct(chart, p0, v0, t_end, steps)?;
    Ok(path_gap(a.complete()?, b.complete()?))
}

/// `G(γ', γ')` along a path.
pub fn energies(chart: &RiemannianChart, path: &BundlePath) -> Result<Vec<f64>> {
    path.points
        .iter()
        .zip(&path.velocities)
        .map(|(p, v)| {
            let frame = BundleFrame::new(chart, &BundlePoint::from_coords(p))?;
            let w = BundleVector::from_coords(v);
            Ok(frame.metric_apply(&w, &w))
        })
        .collect()
}

/// `max |E(t) − E(0)| / max(1, |E(0)|)`.
pub fn energy_drift(chart: &RiemannianChart, path: &BundlePath) -> Result<f64> {
    let e = energies(chart, path)?;
    let e0 = e[0];
    Ok(e.iter().map(|v| (v - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1.0))
}

/// Ratio of endpoint errors of the split integrator at `coarse` and
/// `2·coarse` steps, both measured against a run with `16·coarse` steps.
/// Fourth-order convergence gives a ratio near 16.
pub fn convergence_ratio(
    chart: &RiemannianChart,
    p0: &BundlePoint,
    v0: &BundleVector,
    t_end: f64,
    coarse: usize,
) -> Result<f64> {
    let endpoint = |steps| -> Result<Vec<f64>> {
        let path = integrate_split(chart, p0, v0, t_end, steps)?;
        path.complete()?;
        Ok(path.points.last().unwrap().clone())
    };
    let reference = endpoint(16 * coarse)?;
    let err = |p: Vec<f64>| p.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(err(endpoint(coarse)?) / err(endpoint(2 * coarse)?))
}

/// Deterministic initial data whose split path stays in the chart over
/// `[0, t_end]`. Base points are drawn from the central half of the domain,
/// `ẋ` and `v̇` componentwise from `[-0.5, 0.5]`, `V` from `[-1, 1]`.
pub fn sample_initial_conditions(
    chart: &RiemannianChart,
    count: usize,
    seed: u64,
    t_end: f64,
) -> Vec<(BundlePoint, BundleVector)> {
    let n = chart.dim();
    let mut rng = sampling::rng(seed);
    let inner: Vec<(f64, f64)> = chart
        .domain()
        .iter()
        .map(|&(lo, hi)| {
            let q = 0.25 * (hi - lo);
            (lo + q, hi - q)
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count {
        attempts += 1;
        let x = sampling::point_in_box(&mut rng, &inner, 0.0);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xd: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let vd: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let p = BundlePoint::new(x, v);
        let w = BundleVector::new(xd, vd);
        let stays = integrate_split(chart, &p, &w, t_end, 100)
            .map(|path| path.exited_at.is_none())
            .unwrap_or(false);
        if stays {
            out.push((p, w));
        }
    }
    out
}

#[cfg(test)]
mod tests;
