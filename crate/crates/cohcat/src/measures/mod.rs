//! Coherence quantifiers, all in bits.
//!
//! Relative entropy of coherence C_r(ρ) = S(Δρ) - S(ρ) doubles as the
//! distillable coherence. Coherence of formation — the minimal average
//! dephased entropy over pure-state decompositions — doubles as the
//! coherence cost; it has a closed form for qubits and pure states and is
//! otherwise reported as a certified upper bound from the decomposition
//! optimizer. The quantum-incoherent relative entropy C_r^{A|B} dephases
//! only party B, and the entanglement entropy of a pure bipartite state
//! rounds out what the protocol analyses need.

pub mod formation;

use serde::Serialize;

use crate::linalg::{shannon_entropy_bits, von_neumann_entropy};
use crate::states::{dephase, is_incoherent, DensityOperator, PureState};
use crate::{tol, Result};

/// Whether a reported value is exact or only a certified upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    Exact,
    UpperBound,
}

/// Optimizer bookkeeping attached to values that came out of the
/// decomposition search.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerDiagnostics {
    pub restarts: usize,
    pub refinement_sweeps: usize,
    pub best_restart: usize,
}

/// A measure evaluation: value in bits, certification, and optimizer
/// diagnostics when a search was involved.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub certified: Certification,
    pub diagnostics: Option<OptimizerDiagnostics>,
}

impl MeasureResult {
    fn exact(value: f64) -> Self {
        Self {
            value: clamp_tiny_negative(value),
            certified: Certification::Exact,
            diagnostics: None,
        }
    }
}

/// Values in [-1e-9, 0) are representation noise around zero.
fn clamp_tiny_negative(value: f64) -> f64 {
    if (-tol::EQUALITY..0.0).contains(&value) {
        0.0
    } else {
        value
    }
}

/// C_r(ρ) = S(Δρ) - S(ρ); equals the minimum of S(ρ‖σ) over incoherent σ.
pub fn relative_entropy_of_coherence(rho: &DensityOperator) -> MeasureResult {
    let dephased = shannon_entropy_bits(&rho.populations());
    MeasureResult::exact(dephased - rho.entropy())
}

/// Distillable coherence; coincides with C_r.
pub fn distillable_coherence(rho: &DensityOperator) -> MeasureResult {
    relative_entropy_of_coherence(rho)
}

/// Coherence of formation: exact closed form for qubits and pure states,
/// optimizer upper bound above dimension two.
pub fn coherence_of_formation(rho: &DensityOperator) -> MeasureResult {
    coherence_of_formation_with(rho, &formation::CfOptions::default())
}

/// Coherence of formation with explicit optimizer options (the options only
/// matter when the optimizer path is taken).
pub fn coherence_of_formation_with(
    rho: &DensityOperator,
    options: &formation::CfOptions,
) -> MeasureResult {
    if is_incoherent(rho) {
        // basis-ket decomposition achieves zero
        return MeasureResult::exact(0.0);
    }
    if rho.dim() == 2 {
        return MeasureResult::exact(qubit_formation_closed_form(rho));
    }
    if rho.purity() >= 1.0 - tol::PSD_SLACK {
        // single-element decomposition is optimal for pure states
        return MeasureResult::exact(shannon_entropy_bits(&rho.populations()));
    }
    formation::optimize(rho, options)
}

/// Qubit closed form h((1 + √(1 - 4|ρ01|²))/2).
pub fn qubit_formation_closed_form(rho: &DensityOperator) -> f64 {
    assert_eq!(rho.dim(), 2, "closed form is for qubits");
    let off = rho.matrix()[(0, 1)].norm();
    let arg = (1.0 - 4.0 * off * off).max(0.0).sqrt();
    let p = (1.0 + arg) / 2.0;
    binary_entropy(p)
}

/// h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy_bits(&[p, 1.0 - p])
}

/// Coherence cost; coincides with the coherence of formation.
pub fn coherence_cost(rho: &DensityOperator) -> MeasureResult {
    coherence_of_formation(rho)
}

/// Quantum-incoherent relative entropy C_r^{A|B}(ρ) = S(Δ^B ρ) - S(ρ),
/// where `party_b` names the factors dephased on Bob's side.
pub fn qi_relative_entropy(rho: &DensityOperator, party_b: &[&str]) -> Result<MeasureResult> {
    let dephased = dephase(rho, party_b)?;
    let value = von_neumann_entropy(dephased.hermitian())? - rho.entropy();
    Ok(MeasureResult::exact(value))
}

/// Entanglement entropy of a pure state: S of the marginal left after
/// tracing out `party_traced`.
pub fn entanglement_entropy(psi: &PureState, party_traced: &[&str]) -> Result<f64> {
    let marginal = psi.density().partial_trace_out(party_traced)?;
    Ok(marginal.entropy().max(0.0))
}

/// S(Δρ) in bits: the fully dephased state is diagonal, so this is the
/// Shannon entropy of the populations.
pub fn dephased_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy_bits(&rho.populations())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        maximally_coherent, random_density, random_pure, PureState, SystemLayout,
    };

    fn qubit() -> SystemLayout {
        SystemLayout::single("S", 2, "A").unwrap()
    }

    fn two_qubits() -> SystemLayout {
        SystemLayout::new(&[("A", 2, "A"), ("B", 2, "B")]).unwrap()
    }

    #[test]
    fn cr_of_maximally_coherent_is_one() {
        let phi2 = maximally_coherent(2).unwrap().density();
        let r = relative_entropy_of_coherence(&phi2);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.certified, Certification::Exact);
    }

    #[test]
    fn cr_vanishes_on_incoherent_states() {
        let rho = DensityOperator::from_diagonal(qubit(), &[0.3, 0.7]).unwrap();
        assert!(relative_entropy_of_coherence(&rho).value.abs() < 1e-12);
    }

    #[test]
    fn cr_of_lopsided_pure_state_is_binary_entropy() {
        // binary entropy oracle: h(0.8)
        let psi = PureState::from_real(qubit(), &[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let r = relative_entropy_of_coherence(&psi.density());
        let h08 = binary_entropy(0.8);
        assert!((r.value - h08).abs() < 1e-12);
        assert!((r.value - 0.721928).abs() < 1e-6);
    }

    #[test]
    fn distillable_equals_cr() {
        let rho = random_density(&qubit(), 2, 1).unwrap();
        assert_eq!(
            distillable_coherence(&rho).value,
            relative_entropy_of_coherence(&rho).value
        );
    }

    #[test]
    fn formation_closed_form_examples() {
        // |ρ01| = 0.3 → h((1 + √(1 - 0.36))/2) = h(0.9)
        let mut m = crate::linalg::CMatrix::zeros(2, 2);
        m[(0, 0)] = num_complex::Complex64::new(0.5, 0.0);
        m[(1, 1)] = num_complex::Complex64::new(0.5, 0.0);
        m[(0, 1)] = num_complex::Complex64::new(0.3, 0.0);
        m[(1, 0)] = num_complex::Complex64::new(0.3, 0.0);
        let rho = DensityOperator::from_matrix(qubit(), m).unwrap();
        let r = coherence_of_formation(&rho);
        assert!((r.value - binary_entropy(0.9)).abs() < 1e-12);
        assert!((r.value - 0.468996).abs() < 1e-6);
        assert_eq!(r.certified, Certification::Exact);
    }

    #[test]
    fn formation_on_pure_states_is_dephased_entropy() {
        let psi = random_pure(&two_qubits(), 2);
        let r = coherence_of_formation(&psi.density());
        let expect = psi.dephased_entropy();
        assert!((r.value - expect).abs() < 1e-9);
        assert_eq!(r.certified, Certification::Exact);
    }

    #[test]
    fn formation_vanishes_on_incoherent() {
        let rho = DensityOperator::from_diagonal(two_qubits(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(coherence_of_formation(&rho).value, 0.0);
    }

    #[test]
    fn cost_dominates_distillation_on_random_qubits() {
        for seed in 0..200u64 {
            let rho = random_density(&qubit(), 2, 1000 + seed).unwrap();
            let cd = distillable_coherence(&rho).value;
            let cc = coherence_cost(&rho).value;
            assert!(cc >= cd - 1e-9, "seed {seed}: C_c {cc} < C_d {cd}");
        }
        // equality on pure states
        for seed in 0..50u64 {
            let psi = random_pure(&qubit(), 2000 + seed).density();
            let cd = distillable_coherence(&psi).value;
            let cc = coherence_cost(&psi).value;
            assert!((cc - cd).abs() < 1e-9);
        }
    }

    #[test]
    fn qi_relative_entropy_cases() {
        // QI states sit at zero
        let rho_a = random_density(&SystemLayout::single("A", 2, "A").unwrap(), 2, 3).unwrap();
        let ket = PureState::basis_ket(SystemLayout::single("B", 2, "B").unwrap(), 1).unwrap();
        let qi = rho_a.tensor(&ket.density()).unwrap();
        assert!(qi_relative_entropy(&qi, &["B"]).unwrap().value.abs() < 1e-9);

        // Bell state: S(Δ^B φ+) = 1, S(pure) = 0
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::from_real(two_qubits(), &[amp, 0.0, 0.0, amp]).unwrap();
        let v = qi_relative_entropy(&bell.density(), &["B"]).unwrap();
        assert!((v.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn qi_differs_from_marginal_dephased_entropy() {
        // S(Δ^B ρ) - S(ρ) vs the marginal form S(Δ(ρ^B)): both computed,
        // different quantities for generic mixed states (they coincide on
        // pure states, which is the pure-rate identity tested in protocols)
        let rho = random_density(&two_qubits(), 4, 17).unwrap();
        let joint = qi_relative_entropy(&rho, &["B"]).unwrap().value;
        let marginal = dephased_entropy(&rho.partial_trace_keep(&["B"]).unwrap());
        assert!(joint.is_finite() && marginal.is_finite());
        assert!((joint - marginal).abs() > 1e-6);
    }

    #[test]
    fn entanglement_entropy_cases() {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::from_real(two_qubits(), &[amp, 0.0, 0.0, amp]).unwrap();
        assert!((entanglement_entropy(&bell, &["A"]).unwrap() - 1.0).abs() < 1e-12);

        let a = random_pure(&SystemLayout::single("A", 2, "A").unwrap(), 4);
        let b = random_pure(&SystemLayout::single("B", 2, "B").unwrap(), 5);
        let product = a.tensor(&b).unwrap();
        assert!(entanglement_entropy(&product, &["A"]).unwrap() < 1e-9);

        // Schmidt-coefficient oracle: √0.9|00⟩ + √0.1|11⟩ → h(0.9)
        let skew = PureState::from_real(two_qubits(), &[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()])
            .unwrap();
        let got = entanglement_entropy(&skew, &["A"]).unwrap();
        assert!((got - binary_entropy(0.9)).abs() < 1e-12);
        assert!((got - 0.468996).abs() < 1e-6);
    }

    #[test]
    fn cr_is_additive_and_superadditive() {
        for seed in 0..40u64 {
            let a = random_density(&SystemLayout::single("A", 2, "A").unwrap(), 2, 500 + seed)
                .unwrap();
            let b = random_density(&SystemLayout::single("B", 2, "B").unwrap(), 2, 600 + seed)
                .unwrap();
            let ab = a.tensor(&b).unwrap();
            let sum = relative_entropy_of_coherence(&a).value + relative_entropy_of_coherence(&b).value;
            let joint = relative_entropy_of_coherence(&ab).value;
            assert!((joint - sum).abs() < 1e-9, "additivity failed at seed {seed}");
        }
        // superadditivity on correlated states
        for seed in 0..40u64 {
            let rho = random_density(&two_qubits(), 4, 700 + seed).unwrap();
            let joint = relative_entropy_of_coherence(&rho).value;
            let a = relative_entropy_of_coherence(&rho.partial_trace_keep(&["A"]).unwrap()).value;
            let b = relative_entropy_of_coherence(&rho.partial_trace_keep(&["B"]).unwrap()).value;
            assert!(joint >= a + b - 1e-9, "superadditivity failed at seed {seed}");
        }
    }

    #[test]
    fn variational_cross_check_on_diagonal_grid() {
        // independent minimization of S(ρ‖σ) over diagonal σ: coarse grid
        // plus golden-section refinement, no use of the closed form
        use crate::linalg::{relative_entropy, HermitianMatrix};
        for seed in 0..10u64 {
            let rho = random_density(&qubit(), 2, 800 + seed).unwrap();
            let f = |q: f64| -> f64 {
                let sigma = HermitianMatrix::from_diagonal(&[q, 1.0 - q]);
                relative_entropy(rho.hermitian(), &sigma).unwrap()
            };
            let grid = 1024;
            let mut best_q = 0.5;
            let mut best = f64::INFINITY;
            for i in 1..grid {
                let q = i as f64 / grid as f64;
                let v = f(q);
                if v < best {
                    best = v;
                    best_q = q;
                }
            }
            // golden-section refinement around the best grid cell
            let (mut lo, mut hi) = ((best_q - 2.0 / grid as f64).max(1e-9), (best_q + 2.0 / grid as f64).min(1.0 - 1e-9));
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let x1 = hi - phi * (hi - lo);
                let x2 = lo + phi * (hi - lo);
                if f(x1) < f(x2) {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            let refined = f(0.5 * (lo + hi)).min(best);
            let cr = relative_entropy_of_coherence(&rho).value;
            assert!(
                (refined - cr).abs() < 1e-4,
                "seed {seed}: grid min {refined} vs C_r {cr}"
            );
        }
    }

    #[test]
    fn formation_dominates_cr() {
        for seed in 0..50u64 {
            let rho = random_density(&qubit(), 2, 900 + seed).unwrap();
            let cf = coherence_of_formation(&rho).value;
            let cr = relative_entropy_of_coherence(&rho).value;
            assert!(cf >= cr - 1e-9, "seed {seed}: C_f {cf} < C_r {cr}");
        }
    }

    #[test]
    fn qi_superadditivity_on_product_states() {
        // product four-party instance of the superadditivity inequality
        for seed in 0..20u64 {
            let ab = random_density(&two_qubits(), 4, 1100 + seed).unwrap();
            let cd_layout = SystemLayout::new(&[("C", 2, "A"), ("D", 2, "B")]).unwrap();
            let cd = random_density(&cd_layout, 4, 1200 + seed).unwrap();
            let joint = ab.tensor(&cd).unwrap();
            let lhs = qi_relative_entropy(&ab, &["B"]).unwrap().value
                + qi_relative_entropy(&cd, &["D"]).unwrap().value;
            let rhs = qi_relative_entropy(&joint, &["B", "D"]).unwrap().value;
            assert!(lhs <= rhs + 1e-9, "seed {seed}: {lhs} > {rhs}");
        }
    }
}
