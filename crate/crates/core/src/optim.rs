//! Box-constrained quasi-Newton minimization of pulse costs.
//!
//! Projected L-BFGS: the two-loop recursion runs on the free variables,
//! every trial point is clamped back into the box, and a backtracking
//! Armijo search picks the step. One iteration is one accepted step.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulsemodel::{cost_and_gradient, ControlAnsatz, CostSpec, HamiltonianModel, PulseVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub max_iter: usize,
    /// Stop when the projected gradient's infinity norm falls below this.
    pub grad_tol: f64,
    /// Relative per-step improvement counted as stalled.
    pub cost_rel_tol: f64,
    /// Consecutive stalled steps before stopping.
    pub stall_window: usize,
    /// L-BFGS memory length.
    pub memory: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_iter: 50,
            grad_tol: 1e-8,
            cost_rel_tol: 1e-9,
            stall_window: 5,
            memory: 10,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.stall_window == 0 || self.memory == 0 {
            return Err(Error::InvalidConfig(
                "max_iter, stall_window and memory must be >= 1".into(),
            ));
        }
        if !(self.grad_tol > 0.0 && self.cost_rel_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedBy {
    GradTol,
    Stall,
    MaxIter,
}

/// Outcome of a generic [`minimize`] run.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeReport {
    pub iterations: usize,
    /// Objective evaluations including line-search probes.
    pub evaluations: usize,
    pub final_cost: f64,
    pub converged_by: ConvergedBy,
}

/// Outcome of a pulse optimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptReport {
    pub iterations: usize,
    pub evaluations: usize,
    pub final_cost: f64,
    pub final_infidelity: f64,
    pub converged_by: ConvergedBy,
}

/// Box `[lower, upper]` applied to every coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn symmetric(max: f64) -> Self {
        Self {
            lower: -max,
            upper: max,
        }
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `objective` over the box. The objective returns the cost and
/// its gradient at a point.
pub fn minimize<F>(mut objective: F, init: &[f64], bounds: Bounds, cfg: &OptConfig) -> Result<(Vec<f64>, MinimizeReport)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    cfg.validate()?;
    let n = init.len();
    let width = bounds.upper - bounds.lower;
    if !(width >= 0.0) {
        return Err(Error::InvalidConfig("empty bounds".into()));
    }
    for (index, &value) in init.iter().enumerate() {
        let slack = 1e-12 * width.max(1.0);
        if !(value >= bounds.lower - slack && value <= bounds.upper + slack) {
            return Err(Error::AmplitudeOutOfBounds {
                index,
                value,
                bound: bounds.upper,
            });
        }
    }
    let mut x: Vec<f64> = init.iter().map(|&v| bounds.clamp(v)).collect();
    let (mut f, mut g) = objective(&x)?;
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(None));
    }

    // (s, y, 1 / s·y), newest at the back.
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut iterations = 0;
    let mut stalled = 0;
    // Never move any coordinate further than half the box in one step.
    let max_step = 0.5 * width;

    let converged_by = loop {
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= bounds.lower && g[i] > 0.0) || (x[i] >= bounds.upper && g[i] < 0.0)))
            .collect();
        let pg: Vec<f64> = (0..n).map(|i| if free[i] { g[i] } else { 0.0 }).collect();
        if inf_norm(&pg) < cfg.grad_tol {
            break ConvergedBy::GradTol;
        }
        if iterations >= cfg.max_iter {
            break ConvergedBy::MaxIter;
        }

        let mut dir = two_loop(&pg, &memory, &free);
        if dot(&dir, &pg) >= 0.0 {
            memory.clear();
            dir = pg.iter().map(|v| -v).collect();
        }
        let mut step = 1.0;
        let dmax = inf_norm(&dir);
        if memory.is_empty() {
            // No curvature yet: make the first probe a modest move.
            step = (0.1 * width / dmax).min(1.0);
        }
        if step * dmax > max_step {
            step = max_step / dmax;
        }

        let steepest = memory.is_empty();
        let mut probe = |step: f64, evaluations: &mut usize| -> Result<Option<(Vec<f64>, f64, Vec<f64>)>> {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| bounds.clamp(xi + step * di)).collect();
            if trial == x {
                return Ok(None);
            }
            let (ft, gt) = objective(&trial)?;
            *evaluations += 1;
            let decrease: f64 = g.iter().zip(trial.iter().zip(&x)).map(|(gi, (t, xi))| gi * (t - xi)).sum();
            let ok = ft.is_finite() && gt.iter().all(|v| v.is_finite()) && ft <= f + 1e-4 * decrease && ft <= f;
            Ok(ok.then_some((trial, ft, gt)))
        };

        let mut accepted = None;
        let mut backtracked = false;
        for _ in 0..40 {
            if let Some(hit) = probe(step, &mut evaluations)? {
                accepted = Some(hit);
                break;
            }
            backtracked = true;
            step *= 0.5;
        }
        // Without curvature information the first step length is a guess;
        // on flat stretches keep doubling it while the cost keeps dropping.
        if steepest && !backtracked {
            while let Some((_, fa, _)) = &accepted {
                let longer = 2.0 * step;
                if longer * dmax > max_step {
                    break;
                }
                match probe(longer, &mut evaluations)? {
                    Some(hit) if hit.1 < *fa => {
                        accepted = Some(hit);
                        step = longer;
                    }
                    _ => break,
                }
            }
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if memory.is_empty() {
                break ConvergedBy::Stall;
            }
            memory.clear();
            continue;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if memory.len() == cfg.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }

        let rel = (f - f_new) / f.abs().max(f64::MIN_POSITIVE);
        stalled = if rel < cfg.cost_rel_tol { stalled + 1 } else { 0 };
        iterations += 1;
        x = x_new;
        f = f_new;
        g = g_new;
        if stalled >= cfg.stall_window {
            break ConvergedBy::Stall;
        }
    };

    Ok((
        x,
        MinimizeReport {
            iterations,
            evaluations,
            final_cost: f,
            converged_by,
        },
    ))
}

/// L-BFGS direction `-H q` restricted to the free coordinates.
fn two_loop(q: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, free: &[bool]) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(free).map(|(x, &f)| if f { *x } else { 0.0 }).collect() };
    let mut r = q.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let s = mask(s);
        let a = rho * dot(&s, &r);
        for (ri, yi) in r.iter_mut().zip(mask(y)) {
            *ri -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        r.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(&mask(y), &r);
        for (ri, si) in r.iter_mut().zip(mask(s)) {
            *ri += (a - b) * si;
        }
    }
    mask(&r).into_iter().map(|v| -v).collect()
}

/// Minimizes the pulse cost from `init`.
pub fn optimize_pulse(
    spec: &CostSpec,
    model: &HamiltonianModel,
    ansatz: &ControlAnsatz,
    init: &PulseVector,
    cfg: &OptConfig,
) -> Result<(PulseVector, OptReport)> {
    init.check_bounds(ansatz)?;
    let objective = |x: &[f64]| {
        let (value, grad) = cost_and_gradient(spec, model, ansatz, &PulseVector(x.to_vec()))?;
        Ok((value.total(), grad))
    };
    let (x, report) = minimize(objective, init.as_slice(), Bounds::symmetric(ansatz.alpha_max), cfg)?;
    let alpha = PulseVector(x);
    let final_infidelity = crate::qcore::gate_infidelity(
        &spec.target,
        &crate::pulsemodel::evolve(model, ansatz, &alpha)?,
        model.dim(),
    )?;
    Ok((
        alpha,
        OptReport {
            iterations: report.iterations,
            evaluations: report.evaluations,
            final_cost: report.final_cost,
            final_infidelity,
            converged_by: report.converged_by,
        },
    ))
}

/// I.i.d. uniform amplitudes in `[-scale, scale]`, reproducible from `seed`.
/// `scale` is capped at the ansatz bound.
pub fn seeded_init(ansatz: &ControlAnsatz, seed: u64, scale: f64) -> PulseVector {
    let scale = scale.abs().min(ansatz.alpha_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PulseVector(
        (0..ansatz.n_params())
            .map(|_| if scale > 0.0 { rng.random_range(-scale..=scale) } else { 0.0 })
            .collect(),
    )
}
