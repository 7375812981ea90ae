//! Fixed-step explicit integrators over `[f64; N]` states.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

impl std::str::FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "euler" => Ok(Self::Euler),
            other => Err(format!(
                "unknown integrator `{other}` (expected rk4 or euler)"
            )),
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// Advances `y` by `h`, given the slope `k1 = f(t, y)` already evaluated by
/// the caller.
pub fn step_with_slope<const N: usize, E>(
    method: Integrator,
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
    k1: &[f64; N],
) -> Result<[f64; N], E> {
    match method {
        Integrator::Euler => Ok(axpy(y, h, k1)),
        Integrator::Rk4 => {
            let half = 0.5 * h;
            let k2 = f(t + half, &axpy(y, half, k1))?;
            let k3 = f(t + half, &axpy(y, half, &k2))?;
            let k4 = f(t + h, &axpy(y, h, &k3))?;
            Ok(std::array::from_fn(|i| {
                y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            }))
        }
    }
}

pub fn step<const N: usize, E>(
    method: Integrator,
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E> {
    let k1 = f(t, y)?;
    step_with_slope(method, f, t, y, h, &k1)
}
