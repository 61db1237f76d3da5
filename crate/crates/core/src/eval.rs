//! Interpolated pulses and their quality over test grids.

use serde::{Deserialize, Serialize};

use crate::calib::{initial_round, reoptimization_round, CalibConfig, Landscape};
use crate::error::Result;
use crate::gatefam::{Granularity, ParamPoint};
use crate::mesh::BarycentricLocation;
use crate::pulsemodel::{evolve, PulseVector};
use crate::qcore::gate_infidelity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub point: ParamPoint,
    pub infidelity: f64,
    pub simplex: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub max: f64,
    pub count: usize,
    pub cumulative_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub granularity: Granularity,
    pub round: usize,
    pub summary: EvalSummary,
}

/// Barycentric blend of the reference pulses around `p`.
pub fn interpolate(landscape: &Landscape, p: &ParamPoint) -> Result<PulseVector> {
    interpolate_located(landscape, p).map(|(alpha, _)| alpha)
}

/// Like [`interpolate`], also returning where `p` was found in the mesh.
pub fn interpolate_located(landscape: &Landscape, p: &ParamPoint) -> Result<(PulseVector, BarycentricLocation)> {
    landscape.family.check_domain(p)?;
    let loc = landscape.mesh.locate(p)?;
    let verts = &landscape.mesh.simplices()[loc.simplex];
    let mut alpha = vec![0.0; landscape.ansatz.n_params()];
    for (&v, &b) in verts.iter().zip(&loc.coords) {
        if b == 0.0 {
            continue;
        }
        for (a, x) in alpha.iter_mut().zip(&landscape.references[v].alpha.0) {
            *a += b * x;
        }
    }
    // Rounding in the blend can overshoot the bound by an ulp.
    let max = landscape.ansatz.alpha_max;
    alpha.iter_mut().for_each(|a| *a = a.clamp(-max, max));
    Ok((PulseVector(alpha), loc))
}

/// Interpolate at `p` and score the pulse against the family target.
pub fn evaluate_point(landscape: &Landscape, p: &ParamPoint) -> Result<EvalRecord> {
    let (alpha, loc) = interpolate_located(landscape, p)?;
    let model = landscape.model();
    let u = evolve(&model, &landscape.ansatz, &alpha)?;
    Ok(EvalRecord {
        point: p.clone(),
        infidelity: gate_infidelity(&landscape.family.target(p)?, &u, model.dim())?,
        simplex: loc.simplex,
    })
}

pub fn summarize(records: &[EvalRecord], cumulative_iterations: usize) -> EvalSummary {
    let n = records.len();
    let (mean, std, max) = if n == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let mean = records.iter().map(|r| r.infidelity).sum::<f64>() / n as f64;
        let var = records.iter().map(|r| (r.infidelity - mean).powi(2)).sum::<f64>() / n as f64;
        let max = records.iter().map(|r| r.infidelity).fold(0.0, f64::max);
        (mean, var.sqrt(), max)
    };
    EvalSummary { mean, std, max, count: n, cumulative_iterations }
}

/// Interpolation infidelity at every point of the family's test lattice.
pub fn evaluate_grid(landscape: &Landscape, test: Granularity) -> Result<(Vec<EvalRecord>, EvalSummary)> {
    let points = landscape.family.grid_points(test);
    #[cfg(feature = "parallel")]
    let records: Vec<EvalRecord> = {
        use rayon::prelude::*;
        points.par_iter().map(|p| evaluate_point(landscape, p)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<EvalRecord> = points.iter().map(|p| evaluate_point(landscape, p)).collect::<Result<_>>()?;
    let summary = summarize(&records, landscape.total_iterations());
    Ok((records, summary))
}

/// For each reference granularity, calibrate incrementally and evaluate on
/// the `test` lattice after the initial round and after each of `max_rounds`
/// re-optimization rounds. `cfg.granularity` and `cfg.rounds` are ignored.
pub fn sweep(cfg: &CalibConfig, granularities: &[Granularity], max_rounds: usize, test: Granularity) -> Result<Vec<SweepRow>> {
    let run = |&g: &Granularity| -> Result<Vec<SweepRow>> {
        let cfg = CalibConfig { granularity: g, rounds: 0, ..cfg.clone() };
        let mut landscape = initial_round(&cfg)?;
        let mut rows = Vec::with_capacity(max_rounds + 1);
        for round in 0..=max_rounds {
            if round > 0 {
                landscape = reoptimization_round(landscape, &cfg.opt)?;
            }
            let (_, summary) = evaluate_grid(&landscape, test)?;
            rows.push(SweepRow { granularity: g, round, summary });
        }
        Ok(rows)
    };
    #[cfg(feature = "parallel")]
    let per_granularity: Vec<Vec<SweepRow>> = {
        use rayon::prelude::*;
        granularities.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_granularity: Vec<Vec<SweepRow>> = granularities.iter().map(run).collect::<Result<_>>()?;
    Ok(per_granularity.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calib::calibrate;
    use crate::error::Error;
    use crate::gatefam::GateFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: u32) -> Granularity {
        Granularity::reciprocal(n).unwrap()
    }

    fn chamber(rounds: usize) -> Landscape {
        let mut cfg = CalibConfig::new(GateFamily::WeylChamber, g(2));
        cfg.rounds = rounds;
        cfg.seed = 5;
        calibrate(&cfg).unwrap()
    }

    #[test]
    fn vertex_identity_and_edge_midpoint() {
        let l = chamber(1);
        for r in &l.references {
            assert_eq!(interpolate(&l, &r.point).unwrap(), r.alpha);
        }
        for &(a, b) in &[(0usize, 1usize), (0, 2)] {
            let (pa, pb) = (&l.references[a], &l.references[b]);
            if !l.mesh.neighbors(a).unwrap().contains(&b) {
                continue;
            }
            let mid = ParamPoint::new(pa.point.0.iter().zip(&pb.point.0).map(|(x, y)| (x + y) / 2.0).collect::<Vec<_>>());
            let alpha = interpolate(&l, &mid).unwrap();
            for ((x, ya), yb) in alpha.0.iter().zip(&pa.alpha.0).zip(&pb.alpha.0) {
                assert!((x - (ya + yb) / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_grid_reproduces_stored_infidelities() {
        let l = chamber(0);
        let (records, summary) = evaluate_grid(&l, g(2)).unwrap();
        assert_eq!(records.len(), l.references.len());
        for (rec, r) in records.iter().zip(&l.references) {
            assert_eq!(rec.point, r.point);
            assert!((rec.infidelity - r.infidelity).abs() < 1e-12);
        }
        assert_eq!(summary.count, 5);
        assert!(summary.mean <= summary.max);
    }

    #[test]
    fn interpolated_pulses_stay_in_bounds_and_off_domain_fails() {
        let l = chamber(0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut n = 0;
        while n < 200 {
            let p = ParamPoint::new(vec![rng.random::<f64>(), rng.random::<f64>() * 0.5, rng.random::<f64>() * 0.5]);
            if GateFamily::WeylChamber.contains(&p) {
                interpolate(&l, &p).unwrap().check_bounds(&l.ansatz).unwrap();
                n += 1;
            }
        }
        let err = interpolate(&l, &ParamPoint::new(vec![0.8, 0.5, 0.1])).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
    }

    #[test]
    fn summary_statistics() {
        let rec = |x: f64| EvalRecord { point: ParamPoint::new(vec![0.0]), infidelity: x, simplex: 0 };
        let s = summarize(&[rec(1.0), rec(3.0)], 7);
        assert_eq!((s.mean, s.std, s.max, s.count, s.cumulative_iterations), (2.0, 1.0, 3.0, 2, 7));
        let s = summarize(&[], 0);
        assert_eq!(s.count, 0);
    }

    #[test]
    fn test_grid_counts() {
        assert_eq!(GateFamily::WeylChamber.grid_points(g(24)).len(), 819);
        assert_eq!(GateFamily::SingleQubit.grid_points(g(12)).len(), 2197);
    }

    #[test]
    fn sweep_shapes() {
        let cfg = CalibConfig::new(GateFamily::WeylChamber, g(2));
        let rows = sweep(&cfg, &[g(2)], 0, g(4)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].summary.count, 14);

        let rows = sweep(&cfg, &[g(2), g(3)], 2, g(4)).unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2).filter(|w| w[0].granularity == w[1].granularity) {
            assert_eq!(w[1].round, w[0].round + 1);
            assert!(w[1].summary.cumulative_iterations >= w[0].summary.cumulative_iterations);
        }
    }
}
