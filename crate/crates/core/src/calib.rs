//! Landscape calibration: an independent optimization of every reference
//! pulse, followed by rounds that pull each pulse toward the average of its
//! mesh neighbours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatefam::{GateFamily, Granularity, ParamPoint};
use crate::mesh::{build_mesh, SimplicialMesh};
use crate::optim::{optimize_pulse, seeded_init, OptConfig, OptReport};
use crate::pulsemodel::{evolve, tikhonov_weight, ControlAnsatz, CostSpec, HamiltonianModel, PulseVector};
use crate::qcore::gate_infidelity;

pub const DEFAULT_LAMBDA: f64 = 1e-2;
pub const DEFAULT_INIT_SCALE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePulse {
    pub point: ParamPoint,
    pub alpha: PulseVector,
    pub infidelity: f64,
    /// Optimizer iterations spent on this point over all rounds.
    pub cumulative_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub iterations: usize,
    pub cumulative_iterations: usize,
    pub mean_infidelity: f64,
    pub max_infidelity: f64,
    pub mean_penalty: f64,
}

#[derive(Clone, Debug)]
pub struct Landscape {
    pub family: GateFamily,
    pub granularity: Granularity,
    pub ansatz: ControlAnsatz,
    pub lambda: f64,
    pub seed: u64,
    pub references: Vec<ReferencePulse>,
    pub mesh: SimplicialMesh,
    pub log: Vec<RoundLog>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibConfig {
    pub family: GateFamily,
    pub granularity: Granularity,
    pub rounds: usize,
    pub lambda: f64,
    pub ansatz: ControlAnsatz,
    pub opt: OptConfig,
    pub seed: u64,
    /// Half-width of the uniform random initial guesses.
    pub init_scale: f64,
}

impl CalibConfig {
    pub fn new(family: GateFamily, granularity: Granularity) -> Self {
        Self {
            family,
            granularity,
            rounds: 0,
            lambda: DEFAULT_LAMBDA,
            ansatz: ControlAnsatz::standard(HamiltonianModel::for_family(family).n_controls()),
            opt: OptConfig::default(),
            seed: 0,
            init_scale: DEFAULT_INIT_SCALE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        self.opt.validate()?;
        let n_controls = HamiltonianModel::for_family(self.family).n_controls();
        if self.ansatz.n_controls != n_controls {
            return Err(Error::InvalidConfig(format!(
                "{} has {n_controls} controls, ansatz declares {}",
                self.family, self.ansatz.n_controls
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("init scale must be finite and >= 0, got {}", self.init_scale)));
        }
        Ok(())
    }
}

impl Landscape {
    pub fn model(&self) -> HamiltonianModel {
        HamiltonianModel::for_family(self.family)
    }

    pub fn total_iterations(&self) -> usize {
        self.log.last().map_or(0, |l| l.cumulative_iterations)
    }

    pub fn pulses(&self) -> Vec<Vec<f64>> {
        self.references.iter().map(|r| r.alpha.0.clone()).collect()
    }

    /// Infidelity of reference `i`'s pulse, evaluated from scratch.
    pub fn recompute_infidelity(&self, i: usize) -> Result<f64> {
        let r = self.reference(i)?;
        let model = self.model();
        let u = evolve(&model, &self.ansatz, &r.alpha)?;
        gate_infidelity(&self.family.target(&r.point)?, &u, model.dim())
    }

    fn reference(&self, i: usize) -> Result<&ReferencePulse> {
        self.references
            .get(i)
            .ok_or(Error::VertexOutOfRange { index: i, len: self.references.len() })
    }

    fn round_log(&self, round: usize, iterations: usize) -> Result<RoundLog> {
        let n = self.references.len() as f64;
        let penalties: Vec<f64> = (0..self.references.len())
            .map(|i| neighbor_penalty(self, i))
            .collect::<Result<_>>()?;
        Ok(RoundLog {
            round,
            iterations,
            cumulative_iterations: self.total_iterations() + iterations,
            mean_infidelity: self.references.iter().map(|r| r.infidelity).sum::<f64>() / n,
            max_infidelity: self.references.iter().map(|r| r.infidelity).fold(0.0, f64::max),
            mean_penalty: penalties.iter().sum::<f64>() / n,
        })
    }
}

fn optimize_at(
    family: GateFamily,
    model: &HamiltonianModel,
    ansatz: &ControlAnsatz,
    lambda: f64,
    point: &ParamPoint,
    init: &PulseVector,
    alpha0: PulseVector,
    opt: &OptConfig,
) -> Result<(PulseVector, OptReport)> {
    let spec = CostSpec { target: family.target(point)?, lambda, alpha0 };
    optimize_pulse(&spec, model, ansatz, init, opt).map_err(|e| match e {
        Error::NonFinite(None) => Error::NonFinite(Some(point.0.clone())),
        e => e,
    })
}

/// Optimize every reference point from a seeded random guess toward `α₀ = 0`,
/// then mesh the points.
pub fn initial_round(cfg: &CalibConfig) -> Result<Landscape> {
    cfg.validate()?;
    let points = cfg.family.reference_points(cfg.granularity);
    let mesh = build_mesh(&points)?;
    let model = HamiltonianModel::for_family(cfg.family);
    let zero = PulseVector::zeros(cfg.ansatz.n_params());

    let solve = |(i, point): (usize, &ParamPoint)| -> Result<ReferencePulse> {
        let init = seeded_init(&cfg.ansatz, cfg.seed ^ i as u64, cfg.init_scale);
        let (alpha, report) = optimize_at(cfg.family, &model, &cfg.ansatz, cfg.lambda, point, &init, zero.clone(), &cfg.opt)?;
        Ok(ReferencePulse {
            point: point.clone(),
            alpha,
            infidelity: report.final_infidelity,
            cumulative_iterations: report.iterations,
        })
    };
    #[cfg(feature = "parallel")]
    let references: Vec<ReferencePulse> = {
        use rayon::prelude::*;
        points.par_iter().enumerate().map(solve).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let references: Vec<ReferencePulse> = points.iter().enumerate().map(solve).collect::<Result<_>>()?;

    let mut landscape = Landscape {
        family: cfg.family,
        granularity: cfg.granularity,
        ansatz: cfg.ansatz,
        lambda: cfg.lambda,
        seed: cfg.seed,
        references,
        mesh,
        log: Vec::new(),
    };
    let iterations = landscape.references.iter().map(|r| r.cumulative_iterations).sum();
    let entry = landscape.round_log(0, iterations)?;
    landscape.log.push(entry);
    Ok(landscape)
}

/// Entrywise mean of the current pulses at the mesh neighbours of `i`.
pub fn neighbor_average(landscape: &Landscape, i: usize) -> Result<PulseVector> {
    let nbrs = landscape.mesh.neighbors(i)?;
    if nbrs.is_empty() {
        return Err(Error::IsolatedVertex(i));
    }
    let mut mean = vec![0.0; landscape.ansatz.n_params()];
    for &j in nbrs {
        for (m, a) in mean.iter_mut().zip(&landscape.references[j].alpha.0) {
            *m += a;
        }
    }
    let n = nbrs.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(PulseVector(mean))
}

/// Tikhonov penalty between the pulse at `i` and its neighbour average.
pub fn neighbor_penalty(landscape: &Landscape, i: usize) -> Result<f64> {
    let avg = neighbor_average(landscape, i)?;
    let alpha = &landscape.reference(i)?.alpha;
    Ok(tikhonov_weight(landscape.lambda, &landscape.ansatz) * alpha.squared_distance(&avg))
}

/// Indices sorted by descending penalty, ties by ascending index.
pub fn visiting_order(penalties: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..penalties.len()).collect();
    order.sort_by(|&a, &b| penalties[b].total_cmp(&penalties[a]).then(a.cmp(&b)));
    order
}

/// One pass over all points, highest neighbour penalty first, re-optimizing
/// each from its freshly computed neighbour average with the same average as
/// the regularization target.
pub fn reoptimization_round(mut landscape: Landscape, opt: &OptConfig) -> Result<Landscape> {
    opt.validate()?;
    let penalties: Vec<f64> = (0..landscape.references.len())
        .map(|i| neighbor_penalty(&landscape, i))
        .collect::<Result<_>>()?;
    let model = landscape.model();
    let mut iterations = 0;
    for i in visiting_order(&penalties) {
        let avg = neighbor_average(&landscape, i)?;
        let point = landscape.references[i].point.clone();
        let (alpha, report) = optimize_at(
            landscape.family,
            &model,
            &landscape.ansatz,
            landscape.lambda,
            &point,
            &avg,
            avg.clone(),
            opt,
        )?;
        let r = &mut landscape.references[i];
        r.alpha = alpha;
        r.infidelity = report.final_infidelity;
        r.cumulative_iterations += report.iterations;
        iterations += report.iterations;
    }
    let round = landscape.log.len();
    let entry = landscape.round_log(round, iterations)?;
    landscape.log.push(entry);
    Ok(landscape)
}

/// Initial round followed by `cfg.rounds` re-optimization rounds.
pub fn calibrate(cfg: &CalibConfig) -> Result<Landscape> {
    let mut landscape = initial_round(cfg)?;
    for _ in 0..cfg.rounds {
        landscape = reoptimization_round(landscape, &cfg.opt)?;
    }
    Ok(landscape)
}
