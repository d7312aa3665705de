//! Projected gradient descent on the unit sphere of `C^d`.
//!
//! Steps follow the tangent-projected gradient, are retracted by
//! normalization, and are accepted only under the Armijo condition, so the
//! objective never increases. The trial step length is the Barzilai–Borwein
//! estimate from the previous iterate, halved until accepted.

use crate::linalg::{inner_unchecked, C64};

/// A smooth function of a state vector.
///
/// `value_grad` returns the value and writes the ambient real gradient,
/// packed as a complex vector: `grad[i] = ∂f/∂Re v_i + i ∂f/∂Im v_i`.
pub(crate) trait SphereObjective: Sync {
    fn value(&self, v: &[C64]) -> f64;
    fn value_grad(&self, v: &[C64], grad: &mut [C64]) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalOptions {
    pub max_iterations: usize,
    pub grad_tol: f64,
    /// Stop once the value drops to this level.
    pub target: f64,
    pub record_history: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct LocalResult {
    pub point: Vec<C64>,
    pub value: f64,
    /// Stopped on gradient, target or a line search that cannot decrease
    /// the value further, rather than on the iteration cap.
    pub converged: bool,
    /// Objective value before each iteration and at exit.
    pub history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e6;

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

/// Removes the radial component `Re⟨v, g⟩ v` from `g`.
pub(crate) fn project_tangent(v: &[C64], g: &mut [C64]) {
    let radial = inner_unchecked(v, g).re;
    for (gi, vi) in g.iter_mut().zip(v) {
        *gi -= vi * radial;
    }
}

pub(crate) fn minimize_on_sphere<O: SphereObjective + ?Sized>(
    obj: &O,
    start: Vec<C64>,
    opts: &LocalOptions,
) -> LocalResult {
    let d = start.len();
    let mut v = start;
    normalize(&mut v);
    let mut g = vec![C64::new(0.0, 0.0); d];
    let mut f = obj.value_grad(&v, &mut g);
    project_tangent(&v, &mut g);

    let mut history = Vec::new();
    let mut prev: Option<(Vec<C64>, Vec<C64>)> = None;
    let mut step = 1.0;
    let mut trial = vec![C64::new(0.0, 0.0); d];
    let mut g_trial = vec![C64::new(0.0, 0.0); d];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        if opts.record_history {
            history.push(f);
        }
        let g2 = real_dot(&g, &g);
        if g2.sqrt() <= opts.grad_tol || f <= opts.target {
            converged = true;
            break;
        }
        if let Some((pv, pg)) = &prev {
            let s: Vec<C64> = v.iter().zip(pv).map(|(a, b)| a - b).collect();
            let y: Vec<C64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy = real_dot(&s, &y).abs();
            let ss = real_dot(&s, &s);
            step = if sy > 0.0 && ss > 0.0 { ss / sy } else { step * 2.0 };
        } else {
            step = 1.0 / g2.sqrt().max(1e-300);
        }
        step = step.clamp(STEP_MIN, STEP_MAX);

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for ((t, vi), gi) in trial.iter_mut().zip(&v).zip(&g) {
                *t = vi - gi * step;
            }
            normalize(&mut trial);
            let f_trial = obj.value(&trial);
            if f_trial <= f - ARMIJO * step * g2 {
                accepted = Some(f_trial);
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if accepted.is_none() {
            // no representable decrease left along the gradient
            converged = true;
            break;
        }
        let f_new = obj.value_grad(&trial, &mut g_trial);
        project_tangent(&trial, &mut g_trial);
        prev = Some((v.clone(), g.clone()));
        std::mem::swap(&mut v, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        f = f_new;
    }
    if opts.record_history {
        history.push(f);
    }
    LocalResult { point: v, value: f, converged, history }
}
