//! Fixed-step classical Runge–Kutta.

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Time of the first step whose state failed the `inside` predicate.
    /// The offending state is not stored.
    pub exited_at: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one state")
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

pub fn rk4_step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, v)| v + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrate from `t0` to `t1` in `steps` equal steps. Errors raised by `f`
/// inside an intermediate stage that left the domain are reported as an exit.
pub fn integrate<F, P>(f: F, y0: &[f64], t0: f64, t1: f64, steps: usize, inside: P) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    P: Fn(&[f64]) -> bool,
{
    assert!(steps > 0, "at least one step is required");
    let h = (t1 - t0) / steps as f64;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        exited_at: None,
    };
    let mut y = y0.to_vec();
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let t_next = t0 + (s + 1) as f64 * h;
        let next = match rk4_step(&f, t, &y, h) {
            Ok(v) => v,
            Err(e) if e.is_geometric() => {
                traj.exited_at = Some(t_next);
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        if !inside(&next) || next.iter().any(|v| !v.is_finite()) {
            traj.exited_at = Some(t_next);
            return Ok(traj);
        }
        y = next;
        traj.times.push(t_next);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let tr = integrate(|_, y| Ok(vec![y[0]]), &[1.0], 0.0, 1.0, 100, |_| true).unwrap();
        assert!((tr.last()[0] - 1f64.exp()).abs() < 1e-9);
        assert_eq!(tr.times.len(), 101);
    }

    #[test]
    fn fourth_order() {
        let err = |steps| {
            let tr = integrate(|_, y| Ok(vec![y[1], -y[0]]), &[0.0, 1.0], 0.0, 2.0, steps, |_| true).unwrap();
            (tr.last()[0] - 2f64.sin()).abs()
        };
        let ratio = err(20) / err(40);
        assert!((14.0..18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn reports_exit() {
        let tr = integrate(|_, _| Ok(vec![1.0]), &[0.0], 0.0, 2.0, 20, |y| y[0] < 1.05).unwrap();
        assert_eq!(tr.exited_at, Some(1.1));
        assert_eq!(tr.states.len(), 11);
    }
}
