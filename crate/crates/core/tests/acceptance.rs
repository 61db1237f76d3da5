//! End-to-end acceptance criteria A1-A5. Each test writes one PASS/FAIL line
//! to stderr (uncaptured) before asserting.
//!
//! A3 is slow and ignored by default:
//! `cargo test --release -p landscape-core --test acceptance -- --ignored`.

use std::collections::HashMap;
use std::io::Write;
use std::sync::OnceLock;

use landscape_core::calib::{calibrate, initial_round, reoptimization_round, CalibConfig, Landscape, ReferencePulse};
use landscape_core::eval::{evaluate_grid, evaluate_point, interpolate, EvalSummary};
use landscape_core::format;
use landscape_core::gatefam::{GateFamily, Granularity, ParamPoint};
use landscape_core::mesh::{build_mesh, BarycentricLocation};
use landscape_core::pulsemodel::{
    cost, cost_and_gradient, evolve, tikhonov_weight, ControlAnsatz, CostSpec, HamiltonianModel, PulseVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn g(n: u32) -> Granularity {
    Granularity::reciprocal(n).unwrap()
}

fn report(id: &str, pass: bool, detail: &str) {
    let line = format!("\n{id} {}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{id} failed: {detail}");
}

struct ChamberRun {
    before: EvalSummary,
    after: EvalSummary,
    midpoint_before: f64,
    midpoint_after: f64,
}

const MIDPOINT: [f64; 3] = [0.5, 0.125, 0.125];

fn chamber_run() -> &'static ChamberRun {
    static RUN: OnceLock<ChamberRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut cfg = CalibConfig::new(GateFamily::WeylChamber, g(4));
        cfg.seed = 42;
        let mid = ParamPoint::new(MIDPOINT.to_vec());
        let mut landscape = initial_round(&cfg).unwrap();
        assert_eq!(landscape.references.len(), 14);
        let (_, before) = evaluate_grid(&landscape, g(24)).unwrap();
        let midpoint_before = evaluate_point(&landscape, &mid).unwrap().infidelity;
        for _ in 0..10 {
            landscape = reoptimization_round(landscape, &cfg.opt).unwrap();
        }
        let (_, after) = evaluate_grid(&landscape, g(24)).unwrap();
        let midpoint_after = evaluate_point(&landscape, &mid).unwrap().infidelity;
        ChamberRun { before, after, midpoint_before, midpoint_after }
    })
}

#[test]
fn a1_weyl_chamber() {
    let run = chamber_run();
    let (b, a) = (&run.before, &run.after);
    assert_eq!(a.count, 819);
    let factor = b.mean / a.mean;
    let pass = b.mean >= 1e-3 && a.mean <= 1e-3 && factor >= 10.0;
    report(
        "A1",
        pass,
        &format!(
            "weyl-chamber 1/4, 10 rounds, 819 test points: mean {:.3e} +- {:.1e} -> {:.3e} +- {:.1e} (x{factor:.1}), max {:.2e}, {} iterations",
            b.mean, b.std, a.mean, a.std, a.max, a.cumulative_iterations
        ),
    );
}

#[test]
fn a2_single_qubit() {
    let mut cfg = CalibConfig::new(GateFamily::SingleQubit, g(4));
    cfg.rounds = 3;
    cfg.seed = 42;
    let landscape = calibrate(&cfg).unwrap();
    assert_eq!(landscape.references.len(), 125);
    let (_, s) = evaluate_grid(&landscape, g(12)).unwrap();
    assert_eq!(s.count, 2197);
    let pass = s.mean <= 1e-4 && s.max <= 1e-3 && s.cumulative_iterations <= 20_000;
    report(
        "A2",
        pass,
        &format!(
            "single-qubit 1/4, 3 rounds, 2197 test points: mean {:.3e} +- {:.1e}, max {:.2e}, {} iterations",
            s.mean, s.std, s.max, s.cumulative_iterations
        ),
    );
}

#[test]
#[ignore = "slow suite: 343 references"]
fn a3_cartan_box() {
    let mut cfg = CalibConfig::new(GateFamily::CartanBox, g(6));
    cfg.rounds = 4;
    cfg.seed = 42;
    let landscape = calibrate(&cfg).unwrap();
    assert_eq!(landscape.references.len(), 343);
    let (_, s) = evaluate_grid(&landscape, g(12)).unwrap();
    assert_eq!(s.count, 2197);
    report(
        "A3",
        s.mean <= 2e-3,
        &format!(
            "cartan-box 1/6, 4 rounds, 2197 test points: mean {:.3e} +- {:.1e}, max {:.2e}, {} iterations",
            s.mean, s.std, s.max, s.cumulative_iterations
        ),
    );
}

#[test]
fn a5_midpoint() {
    let run = chamber_run();
    let (before, after) = (run.midpoint_before, run.midpoint_after);
    let pass = after <= 1e-3 && before >= 10.0 * after;
    report("A5", pass, &format!("infidelity at {MIDPOINT:?}: {before:.3e} -> {after:.3e}"));
}

fn random_point(family: GateFamily, rng: &mut ChaCha8Rng) -> ParamPoint {
    loop {
        let p = ParamPoint::new((0..3).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
        if family.contains(&p) {
            return p;
        }
    }
}

fn random_pulse(ansatz: &ControlAnsatz, scale: f64, rng: &mut ChaCha8Rng) -> PulseVector {
    PulseVector((0..ansatz.n_params()).map(|_| rng.random_range(-scale..=scale)).collect())
}

/// Landscape with random reference pulses on the family's lattice, no optimization.
fn synthetic_landscape(family: GateFamily, granularity: Granularity, rng: &mut ChaCha8Rng) -> Landscape {
    let cfg = CalibConfig::new(family, granularity);
    let points = family.reference_points(granularity);
    let mesh = build_mesh(&points).unwrap();
    let references = points
        .into_iter()
        .map(|point| ReferencePulse {
            point,
            alpha: random_pulse(&cfg.ansatz, 1.0, rng),
            infidelity: 0.0,
            cumulative_iterations: 0,
        })
        .collect();
    Landscape {
        family,
        granularity,
        ansatz: cfg.ansatz,
        lambda: cfg.lambda,
        seed: 0,
        references,
        mesh,
        log: Vec::new(),
    }
}

fn unitarity(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for family in GateFamily::ALL {
        let model = HamiltonianModel::for_family(family);
        let ansatz = ControlAnsatz::standard(model.n_controls());
        for _ in 0..50 {
            let u = evolve(&model, &ansatz, &random_pulse(&ansatz, 1.0, rng)).unwrap();
            worst = worst.max(u.unitarity_error());
        }
    }
    if worst < 1e-10 {
        Ok(format!("unitarity err {worst:.1e}"))
    } else {
        Err(format!("unitarity error {worst:.2e}"))
    }
}

fn gradient_check(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for family in GateFamily::ALL {
        let model = HamiltonianModel::for_family(family);
        let ansatz = ControlAnsatz::standard(model.n_controls());
        for _ in 0..100 {
            let spec = CostSpec {
                target: family.target(&random_point(family, rng)).unwrap(),
                lambda: 1e-2,
                alpha0: random_pulse(&ansatz, 1.0, rng),
            };
            let alpha = random_pulse(&ansatz, 0.9, rng);
            let (_, grad) = cost_and_gradient(&spec, &model, &ansatz, &alpha).unwrap();
            let fd: Vec<f64> = (0..alpha.len())
                .map(|i| {
                    let mut plus = alpha.clone();
                    let mut minus = alpha.clone();
                    plus.0[i] += h;
                    minus.0[i] -= h;
                    (cost(&spec, &model, &ansatz, &plus).unwrap() - cost(&spec, &model, &ansatz, &minus).unwrap()) / (2.0 * h)
                })
                .collect();
            let diff = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(diff / norm);
        }
    }
    if worst < 1e-5 {
        Ok(format!("gradient rel err {worst:.1e} (300 instances)"))
    } else {
        Err(format!("gradient relative error {worst:.2e}"))
    }
}

fn mesh_properties(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let landscape = synthetic_landscape(GateFamily::WeylChamber, g(4), rng);
    let mesh = &landscape.mesh;

    let mut worst: f64 = 0.0;
    let box_mesh = build_mesh(&GateFamily::CartanBox.reference_points(g(6))).unwrap();
    for (family, m) in [(GateFamily::WeylChamber, mesh), (GateFamily::CartanBox, &box_mesh)] {
        for _ in 0..1000 {
            let p = random_point(family, rng);
            let loc = m.locate(&p).unwrap();
            let verts = &m.simplices()[loc.simplex];
            let sum: f64 = loc.coords.iter().sum();
            worst = worst.max((sum - 1.0).abs());
            for d in 0..3 {
                let r: f64 = verts.iter().zip(&loc.coords).map(|(&v, b)| b * m.vertices()[v].0[d]).sum();
                worst = worst.max((r - p.0[d]).abs());
            }
        }
    }
    if worst >= 1e-10 {
        return Err(format!("barycentric reconstruction error {worst:.2e}"));
    }

    for r in &landscape.references {
        if interpolate(&landscape, &r.point).unwrap() != r.alpha {
            return Err(format!("vertex identity fails at {:?}", r.point.0));
        }
    }

    // Interpolate points on shared faces from each side.
    let pulses = landscape.pulses();
    let mut faces: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (s, simplex) in mesh.simplices().iter().enumerate() {
        for skip in 0..simplex.len() {
            let mut face: Vec<usize> = simplex.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            face.sort_unstable();
            faces.entry(face).or_default().push(s);
        }
    }
    let mut face_worst: f64 = 0.0;
    let mut shared = 0;
    for (face, owners) in faces.iter().filter(|(_, o)| o.len() == 2) {
        shared += 1;
        let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = (0..3)
            .map(|d| face.iter().zip(&w).map(|(&v, wi)| wi / total * mesh.vertices()[v].0[d]).sum())
            .collect();
        let sides: Vec<Vec<f64>> = owners
            .iter()
            .map(|&s| mesh.combine(&BarycentricLocation { simplex: s, coords: mesh.barycentric(s, &p) }, &pulses))
            .collect();
        for (a, b) in sides[0].iter().zip(&sides[1]) {
            face_worst = face_worst.max((a - b).abs());
        }
    }
    if face_worst >= 1e-10 {
        return Err(format!("face continuity error {face_worst:.2e}"));
    }
    Ok(format!("barycentric err {worst:.1e}, face err {face_worst:.1e} ({shared} faces)"))
}

fn grid_counts() -> Result<String, String> {
    let cases = [
        (GateFamily::WeylChamber, 4, 14),
        (GateFamily::WeylChamber, 24, 819),
        (GateFamily::CartanBox, 6, 343),
        (GateFamily::SingleQubit, 4, 125),
        (GateFamily::SingleQubit, 12, 2197),
    ];
    for (family, n, expected) in cases {
        let got = family.grid_points(g(n)).len();
        if got != expected {
            return Err(format!("{family} 1/{n}: {got} points, expected {expected}"));
        }
    }
    let w = tikhonov_weight(1e-2, &ControlAnsatz::new(5, 20, std::f64::consts::PI, 1.0).unwrap());
    if (w - 1e-4).abs() > 1e-18 {
        return Err(format!("tikhonov weight {w}"));
    }
    Ok("grid counts 14/819/343/125/2197, tikhonov weight 1e-4".into())
}

fn determinism() -> Result<String, String> {
    let mut cfg = CalibConfig::new(GateFamily::WeylChamber, g(2));
    cfg.rounds = 2;
    cfg.seed = 7;
    let a = format::to_json(&calibrate(&cfg).unwrap()).unwrap();
    let b = format::to_json(&calibrate(&cfg).unwrap()).unwrap();
    if a == b {
        Ok("identical files for identical seeds".into())
    } else {
        Err("landscape files differ for identical seeds".into())
    }
}

#[test]
fn a4_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let checks = [unitarity(&mut rng), gradient_check(&mut rng), mesh_properties(&mut rng), grid_counts(), determinism()];
    let pass = checks.iter().all(|c| c.is_ok());
    let detail: Vec<String> = checks.into_iter().map(|c| c.unwrap_or_else(|e| format!("FAILED {e}"))).collect();
    report("A4", pass, &detail.join("; "));
}
