//! Nelder–Mead simplex search inside a box.
//!
//! Every trial point is projected onto the box before it is evaluated, so
//! the objective is never called outside the bounds. Work happens in
//! normalized coordinates `u ∈ [0, 1]ᴺ`. Projection can flatten the simplex
//! against a face, so a converged search is restarted from its best vertex
//! with a fresh simplex until a restart brings no improvement.

use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Initial edge length as a fraction of the box width.
    pub initial_scale: f64,
    /// Stop once every vertex lies within this fraction of the box width
    /// of the best vertex.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_scale: 0.1,
            tolerance: 1e-6,
            max_evaluations: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Boxed<'a, const N: usize, F> {
    f: &'a F,
    lower: [f64; N],
    width: [f64; N],
    evaluations: usize,
}

impl<const N: usize, F: Fn(&[f64; N]) -> f64 + Sync> Boxed<'_, N, F> {
    fn to_point(&self, u: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| self.lower[i] + u[i] * self.width[i])
    }

    fn value(&self, u: &[f64; N]) -> f64 {
        let v = (self.f)(&self.to_point(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn eval(&mut self, u: &[f64; N]) -> f64 {
        self.evaluations += 1;
        self.value(u)
    }

    fn eval_many(&mut self, us: &[[f64; N]]) -> Vec<f64> {
        self.evaluations += us.len();
        us.par_iter().map(|u| self.value(u)).collect()
    }
}

fn project<const N: usize>(u: [f64; N]) -> [f64; N] {
    u.map(|x| x.clamp(0.0, 1.0))
}

fn lerp<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

/// Minimizes `f` over `[lower, upper]`, starting from the box midpoint.
pub fn minimize_in_box<const N: usize, F>(
    f: &F,
    lower: [f64; N],
    upper: [f64; N],
    options: &SimplexOptions,
) -> SimplexResult<N>
where
    F: Fn(&[f64; N]) -> f64 + Sync,
{
    let mut obj = Boxed {
        f,
        lower,
        width: std::array::from_fn(|i| upper[i] - lower[i]),
        evaluations: 0,
    };
    let budget = options.max_evaluations.max(N + 1);

    let mut start = ([0.5; N], None);
    let mut best: Option<([f64; N], f64)> = None;
    let converged = loop {
        let (point, value, converged) = search(&mut obj, start, options, budget);
        let improved = best.is_none_or(|(_, b)| value < b);
        if improved {
            best = Some((point, value));
        }
        if !converged {
            break false;
        }
        if !improved || best.is_some_and(|(p, _)| start.1.is_some() && p == start.0) {
            break true;
        }
        start = (point, Some(value));
    };

    let (point, value) = best.expect("at least one search ran");
    SimplexResult {
        point: obj.to_point(&point),
        value,
        evaluations: obj.evaluations,
        converged,
    }
}

/// One simplex search from `start`. Returns the best vertex, its value and
/// whether the tolerance was reached within the budget.
fn search<const N: usize, F>(
    obj: &mut Boxed<'_, N, F>,
    start: ([f64; N], Option<f64>),
    options: &SimplexOptions,
    budget: usize,
) -> ([f64; N], f64, bool)
where
    F: Fn(&[f64; N]) -> f64 + Sync,
{
    let (origin, known) = start;
    let mut vertices: Vec<[f64; N]> = Vec::with_capacity(N + 1);
    if known.is_none() {
        vertices.push(origin);
    }
    for i in 0..N {
        let mut v = origin;
        // Step inward when the start sits near the upper face.
        if v[i] + options.initial_scale <= 1.0 {
            v[i] += options.initial_scale;
        } else {
            v[i] -= options.initial_scale;
        }
        vertices.push(project(v));
    }
    if obj.evaluations + vertices.len() > budget {
        let value = known.unwrap_or(f64::INFINITY);
        return (origin, value, false);
    }
    let values = obj.eval_many(&vertices);
    let mut simplex: Vec<([f64; N], f64)> = vertices.into_iter().zip(values).collect();
    if let Some(v) = known {
        simplex.insert(0, (origin, v));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0;
        let diameter = simplex
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < options.tolerance {
            return (simplex[0].0, simplex[0].1, true);
        }
        // An iteration costs at most N + 2 evaluations.
        if obj.evaluations + N + 2 > budget {
            return (simplex[0].0, simplex[0].1, false);
        }

        let worst = simplex[N];
        let centroid: [f64; N] =
            std::array::from_fn(|i| simplex[..N].iter().map(|(v, _)| v[i]).sum::<f64>() / N as f64);

        let reflected = project(lerp(&centroid, &worst.0, -REFLECT));
        let fr = obj.eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = project(lerp(&centroid, &worst.0, -EXPAND));
            let fe = obj.eval(&expanded);
            simplex[N] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
            continue;
        }
        let contracted = if fr < worst.1 {
            project(lerp(&centroid, &reflected, CONTRACT))
        } else {
            lerp(&centroid, &worst.0, CONTRACT)
        };
        let fc = obj.eval(&contracted);
        if fc < worst.1.min(fr) {
            simplex[N] = (contracted, fc);
            continue;
        }
        let shrunk: Vec<[f64; N]> = simplex[1..]
            .iter()
            .map(|(v, _)| lerp(&best, v, SHRINK))
            .collect();
        let values = obj.eval_many(&shrunk);
        for (slot, (v, fv)) in simplex[1..].iter_mut().zip(shrunk.into_iter().zip(values)) {
            *slot = (v, fv);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum_of_quadratic() {
        let f = |x: &[f64; 3]| {
            (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2) + 0.5 * (x[2] - 0.9).powi(2)
        };
        let r = minimize_in_box(&f, [-1.0; 3], [1.0; 3], &SimplexOptions::default());
        assert!(r.converged);
        for (got, want) in r.point.iter().zip([0.3, -0.2, 0.9]) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn minimum_outside_box_lands_on_boundary() {
        let f = |x: &[f64; 2]| (x[0] - 5.0).powi(2) + (x[1] + 0.5).powi(2);
        let r = minimize_in_box(&f, [0.0, -1.0], [1.0, 1.0], &SimplexOptions::default());
        assert!((r.point[0] - 1.0).abs() < 1e-6);
        assert!((r.point[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn never_leaves_the_box() {
        let f = |x: &[f64; 2]| {
            assert!((-1.0..=0.0).contains(&x[0]) && (2.0..=3.0).contains(&x[1]));
            -x[0] * x[0] - x[1]
        };
        let r = minimize_in_box(&f, [-1.0, 2.0], [0.0, 3.0], &SimplexOptions::default());
        assert_eq!(r.point, [-1.0, 3.0]);
    }

    #[test]
    fn budget_is_respected() {
        let f = |x: &[f64; 2]| (x[0] * 10.0).sin() + x[1] * x[1];
        let opts = SimplexOptions {
            max_evaluations: 15,
            tolerance: 1e-14,
            ..SimplexOptions::default()
        };
        let r = minimize_in_box(&f, [-1.0; 2], [1.0; 2], &opts);
        assert!(!r.converged);
        assert!(r.evaluations <= 15, "{}", r.evaluations);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64; 3]| x.iter().map(|v| (v - 0.1).powi(4)).sum::<f64>();
        let a = minimize_in_box(&f, [-1.0; 3], [1.0; 3], &SimplexOptions::default());
        let b = minimize_in_box(&f, [-1.0; 3], [1.0; 3], &SimplexOptions::default());
        assert_eq!(a, b);
    }
}
