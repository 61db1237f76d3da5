//! Piecewise-constant control pulses, their time evolution, and the
//! regularized infidelity cost with its analytic gradient.
//!
//! Pulse vectors are flat and control-major: amplitude of control `k` in
//! segment `s` lives at index `k * n_segments + s`. Every other module and
//! the landscape file use the same layout.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gatefam::GateFamily;
use crate::qcore::{gate_infidelity, kron2, pauli, Axis, CMatrix, HermitianMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlAnsatz {
    pub n_controls: usize,
    pub n_segments: usize,
    /// Total pulse duration.
    pub duration: f64,
    pub alpha_max: f64,
}

impl ControlAnsatz {
    pub fn new(n_controls: usize, n_segments: usize, duration: f64, alpha_max: f64) -> Result<Self> {
        let a = Self {
            n_controls,
            n_segments,
            duration,
            alpha_max,
        };
        a.validate()?;
        Ok(a)
    }

    /// Twenty segments over a duration of π with amplitudes in `[-1, 1]`.
    pub fn standard(n_controls: usize) -> Self {
        Self {
            n_controls,
            n_segments: 20,
            duration: PI,
            alpha_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_controls == 0 || self.n_segments == 0 {
            return Err(Error::InvalidConfig(
                "ansatz needs at least one control and one segment".into(),
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad duration {}", self.duration)));
        }
        if !(self.alpha_max > 0.0 && self.alpha_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad alpha_max {}", self.alpha_max)));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.n_controls * self.n_segments
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.n_segments as f64
    }
}

/// Flat control-major amplitude vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PulseVector(pub Vec<f64>);

impl PulseVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Segment amplitudes of control `k`.
    pub fn control(&self, ansatz: &ControlAnsatz, k: usize) -> &[f64] {
        let n = ansatz.n_segments;
        &self.0[k * n..(k + 1) * n]
    }

    pub fn squared_distance(&self, other: &PulseVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn check_shape(&self, ansatz: &ControlAnsatz) -> Result<()> {
        if self.0.len() != ansatz.n_params() {
            return Err(Error::DimensionMismatch {
                expected: ansatz.n_params(),
                got: self.0.len(),
            });
        }
        Ok(())
    }

    pub fn check_bounds(&self, ansatz: &ControlAnsatz) -> Result<()> {
        self.check_shape(ansatz)?;
        let bound = ansatz.alpha_max;
        for (index, &value) in self.0.iter().enumerate() {
            if !(value.abs() <= bound * (1.0 + 1e-12)) {
                return Err(Error::AmplitudeOutOfBounds { index, value, bound });
            }
        }
        Ok(())
    }
}

/// Control operators (and an optional drift) of a piecewise-constant Hamiltonian
/// `H_s = drift + sum_k alpha[k, s] * controls[k]`.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    dim: usize,
    drift: HermitianMatrix,
    controls: Vec<HermitianMatrix>,
}

impl HamiltonianModel {
    pub fn new(controls: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = controls
            .first()
            .map(|c| c.dim())
            .ok_or_else(|| Error::InvalidConfig("model needs at least one control".into()))?;
        Self::with_drift(HermitianMatrix::zeros(dim), controls)
    }

    pub fn with_drift(drift: HermitianMatrix, controls: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = drift.dim();
        if controls.is_empty() {
            return Err(Error::InvalidConfig("model needs at least one control".into()));
        }
        for c in &controls {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            drift,
            controls,
        })
    }

    /// Controls `[XX, Y⊗I, Z⊗I, I⊗Y, I⊗Z]` with no drift.
    pub fn two_qubit() -> Self {
        let i2 = CMatrix::identity(2);
        let ops = [
            kron2(&pauli(Axis::X), &pauli(Axis::X)),
            kron2(&pauli(Axis::Y), &i2),
            kron2(&pauli(Axis::Z), &i2),
            kron2(&i2, &pauli(Axis::Y)),
            kron2(&i2, &pauli(Axis::Z)),
        ];
        let controls = ops
            .into_iter()
            .map(|m| HermitianMatrix::new(m.expect("2x2 factors")).expect("Pauli strings are Hermitian"))
            .collect();
        Self::new(controls).expect("non-empty")
    }

    /// The first qubit of the two-qubit model: controls `[σ_y, σ_z]`.
    pub fn single_qubit() -> Self {
        let controls = [Axis::Y, Axis::Z]
            .into_iter()
            .map(|a| HermitianMatrix::new(pauli(a)).expect("Pauli matrices are Hermitian"))
            .collect();
        Self::new(controls).expect("non-empty")
    }

    pub fn for_family(family: GateFamily) -> Self {
        match family.hilbert_dim() {
            2 => Self::single_qubit(),
            _ => Self::two_qubit(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn controls(&self) -> &[HermitianMatrix] {
        &self.controls
    }

    fn segment_hamiltonian(&self, ansatz: &ControlAnsatz, alpha: &PulseVector, s: usize) -> HermitianMatrix {
        let n = ansatz.n_segments;
        let terms = std::iter::once((1.0, &self.drift))
            .chain(self.controls.iter().enumerate().map(|(k, c)| (alpha.0[k * n + s], c)));
        HermitianMatrix::linear_combination(self.dim, terms)
    }

    fn check(&self, ansatz: &ControlAnsatz, alpha: &PulseVector) -> Result<()> {
        if ansatz.n_controls != self.controls.len() {
            return Err(Error::DimensionMismatch {
                expected: self.controls.len(),
                got: ansatz.n_controls,
            });
        }
        alpha.check_bounds(ansatz)
    }
}

/// What the optimizer minimizes: infidelity to `target` plus a Tikhonov
/// pull toward `alpha0` with raw weight `lambda`.
#[derive(Clone, Debug)]
pub struct CostSpec {
    pub target: CMatrix,
    pub lambda: f64,
    pub alpha0: PulseVector,
}

/// Normalized Tikhonov weight `λ / (n_f n_p α_max²)`.
pub fn tikhonov_weight(lambda: f64, ansatz: &ControlAnsatz) -> f64 {
    lambda / (ansatz.n_params() as f64 * ansatz.alpha_max * ansatz.alpha_max)
}

/// Total unitary `U_{n_p} ... U_1`, segment 1 acting first.
pub fn evolve(model: &HamiltonianModel, ansatz: &ControlAnsatz, alpha: &PulseVector) -> Result<CMatrix> {
    model.check(ansatz, alpha)?;
    let dt = ansatz.dt();
    let mut u = CMatrix::identity(model.dim);
    for s in 0..ansatz.n_segments {
        let seg = crate::qcore::expm_hermitian(&model.segment_hamiltonian(ansatz, alpha, s), dt);
        u = &seg * &u;
    }
    Ok(u)
}

fn check_spec(spec: &CostSpec, model: &HamiltonianModel, ansatz: &ControlAnsatz) -> Result<()> {
    if spec.target.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: spec.target.dim(),
        });
    }
    if !(spec.lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", spec.lambda)));
    }
    spec.alpha0.check_shape(ansatz)
}

pub fn cost(spec: &CostSpec, model: &HamiltonianModel, ansatz: &ControlAnsatz, alpha: &PulseVector) -> Result<f64> {
    check_spec(spec, model, ansatz)?;
    let u = evolve(model, ansatz, alpha)?;
    let infid = gate_infidelity(&spec.target, &u, model.dim)?;
    Ok(infid + tikhonov_weight(spec.lambda, ansatz) * alpha.squared_distance(&spec.alpha0))
}

/// Cost value split into its two terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostValue {
    pub infidelity: f64,
    pub regularization: f64,
}

impl CostValue {
    pub fn total(&self) -> f64 {
        self.infidelity + self.regularization
    }
}

/// Cost and exact gradient in one forward/backward sweep.
///
/// Each segment propagator `exp(-i dt H_s)` is differentiated in the
/// eigenbasis of `H_s`: for `H_s = V diag(λ) V†` the derivative along a
/// control operator `C` is `V (Γ ∘ V†CV) V†` with
/// `Γ_mn = (e_m - e_n) / (λ_m - λ_n)`, `e_m = exp(-i dt λ_m)`.
pub fn cost_and_gradient(
    spec: &CostSpec,
    model: &HamiltonianModel,
    ansatz: &ControlAnsatz,
    alpha: &PulseVector,
) -> Result<(CostValue, Vec<f64>)> {
    check_spec(spec, model, ansatz)?;
    model.check(ansatz, alpha)?;
    let h = model.dim;
    let n_seg = ansatz.n_segments;
    let dt = ansatz.dt();

    struct Segment {
        evals: Vec<f64>,
        vecs: CMatrix,
        prop: CMatrix,
    }
    let segments: Vec<Segment> = (0..n_seg)
        .map(|s| {
            let (evals, vecs) = model.segment_hamiltonian(ansatz, alpha, s).eigh();
            let phases: Vec<C64> = evals.iter().map(|&l| C64::from_polar(1.0, -dt * l)).collect();
            let prop = crate::qcore::reassemble(&vecs, &phases);
            Segment { evals, vecs, prop }
        })
        .collect();

    // before[s] = U_{s-1} ... U_1
    let mut before = Vec::with_capacity(n_seg);
    let mut acc = CMatrix::identity(h);
    for seg in &segments {
        before.push(acc.clone());
        acc = &seg.prop * &acc;
    }
    let total = acc;
    let target_dag = spec.target.adjoint();
    let overlap = target_dag.trace_of_product(&total);
    let infidelity = gate_infidelity(&spec.target, &total, h)?;

    let lt = tikhonov_weight(spec.lambda, ansatz);
    let mut grad = vec![0.0; ansatz.n_params()];
    for (g, (a, a0)) in grad.iter_mut().zip(alpha.0.iter().zip(&spec.alpha0.0)) {
        *g = 2.0 * lt * (a - a0);
    }
    let regularization = lt * alpha.squared_distance(&spec.alpha0);

    let norm = 2.0 / (h * h) as f64;
    // after = W† U_{n} ... U_{s+1}, walking backwards.
    let mut after = target_dag;
    for s in (0..n_seg).rev() {
        let seg = &segments[s];
        // d Tr(W† U) = Tr(B dU_s) with B = before_s · after_s.
        let b = &before[s] * &after;
        let vd = seg.vecs.adjoint();
        let b_eig = &(&vd * &b) * &seg.vecs;
        let gamma = divided_differences(&seg.evals, dt);
        for (k, ctrl) in model.controls.iter().enumerate() {
            let m = &(&vd * ctrl.matrix()) * &seg.vecs;
            let mut dtr = C64::new(0.0, 0.0);
            for i in 0..h {
                for j in 0..h {
                    dtr += b_eig[(j, i)] * gamma[i * h + j] * m[(i, j)];
                }
            }
            grad[k * n_seg + s] -= norm * (overlap.conj() * dtr).re;
        }
        after = &after * &seg.prop;
    }

    Ok((
        CostValue {
            infidelity,
            regularization,
        },
        grad,
    ))
}

pub fn cost_gradient(
    spec: &CostSpec,
    model: &HamiltonianModel,
    ansatz: &ControlAnsatz,
    alpha: &PulseVector,
) -> Result<Vec<f64>> {
    cost_and_gradient(spec, model, ansatz, alpha).map(|(_, g)| g)
}

/// `Γ_mn = -i dt exp(-i dt (λ_m + λ_n)/2) sinc(dt (λ_m - λ_n)/2)`, which equals
/// the divided difference of `exp(-i dt λ)` and stays finite for equal eigenvalues.
fn divided_differences(evals: &[f64], dt: f64) -> Vec<C64> {
    let n = evals.len();
    let mut out = Vec::with_capacity(n * n);
    for &lm in evals {
        for &ln in evals {
            let half = 0.5 * dt * (lm - ln);
            let sinc = if half.abs() < 1e-4 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            out.push(C64::new(0.0, -dt) * C64::from_polar(sinc, -0.5 * dt * (lm + ln)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::expm_hermitian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pulse(rng: &mut ChaCha8Rng, ansatz: &ControlAnsatz) -> PulseVector {
        let m = ansatz.alpha_max;
        PulseVector((0..ansatz.n_params()).map(|_| rng.random_range(-m..=m)).collect())
    }

    #[test]
    fn tikhonov_weight_values() {
        let two = ControlAnsatz::standard(5);
        assert!((tikhonov_weight(1e-2, &two) - 1e-4).abs() < 1e-18);
        assert_eq!(tikhonov_weight(0.0, &two), 0.0);
        let one = ControlAnsatz::standard(2);
        assert!((tikhonov_weight(1e-2, &one) - 2.5e-4).abs() < 1e-18);
    }

    #[test]
    fn zero_pulse_is_identity() {
        let model = HamiltonianModel::two_qubit();
        let ansatz = ControlAnsatz::standard(5);
        let u = evolve(&model, &ansatz, &PulseVector::zeros(100)).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn constant_xx_over_pi_gives_minus_identity() {
        let model = HamiltonianModel::two_qubit();
        let ansatz = ControlAnsatz::standard(5);
        let mut alpha = PulseVector::zeros(100);
        alpha.0[..20].fill(1.0);
        let u = evolve(&model, &ansatz, &alpha).unwrap();
        let minus = CMatrix::identity(4).scale(C64::new(-1.0, 0.0));
        assert!(u.max_abs_diff(&minus) < 1e-12);
        assert!(gate_infidelity(&CMatrix::identity(4), &u, 4).unwrap() < 1e-14);
    }

    #[test]
    fn segment_splitting_is_invisible() {
        let model = HamiltonianModel::two_qubit();
        let coarse = ControlAnsatz::new(5, 1, PI, 1.0).unwrap();
        let fine = ControlAnsatz::new(5, 7, PI, 1.0).unwrap();
        let amps = [0.3, -0.7, 0.2, 0.9, -0.1];
        let a1 = PulseVector(amps.to_vec());
        let a7 = PulseVector(amps.iter().flat_map(|&a| [a; 7]).collect());
        let u1 = evolve(&model, &coarse, &a1).unwrap();
        let u7 = evolve(&model, &fine, &a7).unwrap();
        assert!(u1.max_abs_diff(&u7) < 1e-10);
    }

    #[test]
    fn evolve_rejects_out_of_bounds_and_bad_shape() {
        let model = HamiltonianModel::single_qubit();
        let ansatz = ControlAnsatz::standard(2);
        let mut alpha = PulseVector::zeros(40);
        alpha.0[7] = 1.5;
        assert!(matches!(
            evolve(&model, &ansatz, &alpha),
            Err(Error::AmplitudeOutOfBounds { index: 7, .. })
        ));
        assert!(matches!(
            evolve(&model, &ansatz, &PulseVector::zeros(39)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(evolve(&model, &ControlAnsatz::standard(5), &PulseVector::zeros(100)).is_err());
    }

    #[test]
    fn cost_terms() {
        let model = HamiltonianModel::two_qubit();
        let ansatz = ControlAnsatz::standard(5);
        let zero = PulseVector::zeros(100);
        let spec = CostSpec {
            target: CMatrix::identity(4),
            lambda: 1e-2,
            alpha0: zero.clone(),
        };
        assert_eq!(cost(&spec, &model, &ansatz, &zero).unwrap(), 0.0);
        assert!(cost_gradient(&spec, &model, &ansatz, &zero)
            .unwrap()
            .iter()
            .all(|&g| g.abs() < 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alpha = random_pulse(&mut rng, &ansatz);
        let target = crate::gatefam::cartan_unitary(&crate::gatefam::ParamPoint::new(vec![0.5, 0.25, 0.0])).unwrap();
        let u = evolve(&model, &ansatz, &alpha).unwrap();
        let infid = gate_infidelity(&target, &u, 4).unwrap();
        let no_reg = CostSpec {
            target: target.clone(),
            lambda: 0.0,
            alpha0: zero.clone(),
        };
        assert_eq!(cost(&no_reg, &model, &ansatz, &alpha).unwrap(), infid);
        let at_alpha0 = CostSpec {
            target: target.clone(),
            lambda: 1e-2,
            alpha0: alpha.clone(),
        };
        assert_eq!(cost(&at_alpha0, &model, &ansatz, &alpha).unwrap(), infid);

        let reg = CostSpec {
            target,
            lambda: 0.3,
            alpha0: random_pulse(&mut rng, &ansatz),
        };
        let g_reg = cost_gradient(&reg, &model, &ansatz, &alpha).unwrap();
        let g_bare = cost_gradient(&CostSpec { lambda: 0.0, ..reg.clone() }, &model, &ansatz, &alpha).unwrap();
        let lt = tikhonov_weight(0.3, &ansatz);
        for i in 0..100 {
            let want = 2.0 * lt * (alpha.0[i] - reg.alpha0.0[i]);
            assert!((g_reg[i] - g_bare[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn time_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (model, ansatz) in [
            (HamiltonianModel::two_qubit(), ControlAnsatz::standard(5)),
            (HamiltonianModel::single_qubit(), ControlAnsatz::standard(2)),
        ] {
            for _ in 0..10 {
                let alpha = random_pulse(&mut rng, &ansatz);
                let n = ansatz.n_segments;
                let mut rev = PulseVector::zeros(alpha.len());
                for k in 0..ansatz.n_controls {
                    for s in 0..n {
                        rev.0[k * n + s] = -alpha.0[k * n + (n - 1 - s)];
                    }
                }
                let u = evolve(&model, &ansatz, &alpha).unwrap();
                let v = evolve(&model, &ansatz, &rev).unwrap();
                assert!(v.max_abs_diff(&u.adjoint()) < 1e-10);
            }
        }
    }

    #[test]
    fn drift_slot_contributes() {
        let x = HermitianMatrix::new(pauli(Axis::X)).unwrap();
        let model = HamiltonianModel::with_drift(x.clone(), vec![HermitianMatrix::new(pauli(Axis::Z)).unwrap()]).unwrap();
        let ansatz = ControlAnsatz::new(1, 4, 1.0, 1.0).unwrap();
        let u = evolve(&model, &ansatz, &PulseVector::zeros(4)).unwrap();
        assert!(u.max_abs_diff(&expm_hermitian(&x, 1.0)) < 1e-12);
    }
}
