//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers. Criteria with runtime budgets assert them.

use std::time::Instant;

use cohcat::catalysis::{
    build_catalyst, catalytic_pure_feasible, cross_check, harness::random_incoherent_channel,
    monotonicity_harness, run_protocol, run_protocol_dense,
};
use cohcat::channels::{symmetrize, KrausChannel};
use cohcat::linalg::kron_power;
use cohcat::measures::{
    coherence_cost, distillable_coherence, formation,
    qi_relative_entropy, qubit_formation_closed_form, relative_entropy_of_coherence,
};
use cohcat::protocols::{assisted_distillation_rate, collaboration_upper_bound, iqsm_e0, verify_merge_bound};
use cohcat::states::{
    is_quantum_incoherent, random_density, random_pure, DensityOperator, Factor, PureState,
    SystemLayout,
};

fn qubit() -> SystemLayout {
    SystemLayout::single("S", 2, "A").unwrap()
}

fn two_party(da: usize, db: usize) -> SystemLayout {
    SystemLayout::new(&[("A", da, "A"), ("B", db, "B")]).unwrap()
}

fn copies(d: usize, n: usize) -> SystemLayout {
    SystemLayout::from_factors(
        (1..=n)
            .map(|j| Factor {
                label: format!("S.{j}"),
                dim: d,
                party: "A".to_string(),
            })
            .collect(),
    )
    .unwrap()
}

fn power_state(sigma: &DensityOperator, n: usize) -> DensityOperator {
    DensityOperator::from_matrix(copies(sigma.dim(), n), kron_power(sigma.matrix(), n)).unwrap()
}

#[test]
fn criterion_01_exact_catalysis_closure() {
    let t0 = Instant::now();
    let mut worst_joint = 0.0f64;
    let mut worst_return = 0.0f64;
    for n in 2..=4usize {
        for pair in 0..5u64 {
            let rho = random_density(&qubit(), 2, 1_000 + 10 * n as u64 + pair).unwrap();
            let sigma = random_density(&qubit(), 2, 2_000 + 10 * n as u64 + pair).unwrap();
            let gamma = power_state(&sigma, n);
            let tau = build_catalyst(&rho, &gamma, n).unwrap();
            let lambda = KrausChannel::replacement(&gamma).unwrap();
            let trace = run_protocol(&rho, &sigma, &tau, &lambda).unwrap();
            worst_joint = worst_joint.max(trace.dist_joint);
            worst_return = worst_return.max(trace.dist_catalyst_return);
            assert!(trace.dist_joint <= 1e-10, "n={n} pair={pair}: D(mu_sc, sigma x tau) = {}", trace.dist_joint);
            assert!(
                trace.dist_catalyst_return <= 1e-10,
                "n={n} pair={pair}: D(return, tau) = {}",
                trace.dist_catalyst_return
            );
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime budget blown: {elapsed:?}");
    println!(
        "acceptance criterion 01: PASS — exact closure, worst joint {worst_joint:.2e}, worst return {worst_return:.2e}, {elapsed:?}"
    );
}

#[test]
fn criterion_02_output_distance_ratio_bound() {
    let t0 = Instant::now();
    let mut worst_ratio = 0.0f64;
    for (ei, eps) in [1e-3f64, 1e-2, 1e-1].into_iter().enumerate() {
        for run in 0..100u64 {
            let n = 2 + (run % 2) as usize;
            let seed = 10_000 + 1_000 * ei as u64 + run;
            let rho = random_density(&qubit(), 2, seed).unwrap();
            let sigma = random_density(&qubit(), 2, seed + 500_000).unwrap();
            let clean = power_state(&sigma, n);
            let noise = symmetrize(
                &random_density(&copies(2, n), 1 << n, seed + 900_000).unwrap(),
                n,
            )
            .unwrap();
            let gap = clean.distance(&noise).unwrap();
            assert!(gap > eps, "perturbation direction too close");
            let gamma = clean.mix(&noise, eps / gap).unwrap();

            let tau = build_catalyst(&rho, &gamma, n).unwrap();
            let lambda = KrausChannel::replacement(&gamma).unwrap();
            let trace = run_protocol(&rho, &sigma, &tau, &lambda).unwrap();

            assert!((trace.dist_gamma_target - eps).abs() < 1e-9, "mixing missed epsilon");
            let ratio = trace.dist_joint / trace.dist_gamma_target;
            worst_ratio = worst_ratio.max(ratio);
            assert!(
                ratio <= 2.0 + 1e-6,
                "eps={eps} run={run} n={n}: ratio {ratio}"
            );
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime budget blown: {elapsed:?}");
    println!(
        "acceptance criterion 02: PASS — 300 perturbed runs, worst ratio {worst_ratio:.6} ≤ 2 + 1e-6, {elapsed:?}"
    );
}

#[test]
fn criterion_03_monotonicity_sweep() {
    let t0 = Instant::now();
    let report = monotonicity_harness(1000, 42).unwrap();
    let elapsed = t0.elapsed();
    assert_eq!(report.summary.trials, 1000);
    assert_eq!(
        report.summary.violations, 0,
        "violations with margins {:?}",
        report.summary.worst_margins
    );
    assert!(elapsed.as_secs_f64() < 300.0, "runtime budget blown: {elapsed:?}");
    println!(
        "acceptance criterion 03: PASS — 1000 trials, 0 violations, worst margins {:?}, {elapsed:?}",
        report.summary.worst_margins
    );
}

#[test]
fn criterion_04_pure_convertibility_against_entropy_oracle() {
    // independent oracle: dephased entropies from raw amplitudes
    let oracle_entropy = |psi: &PureState| -> f64 {
        psi.amplitudes()
            .iter()
            .map(|a| {
                let p = a.norm_sqr();
                if p > 1e-15 {
                    -p * p.log2()
                } else {
                    0.0
                }
            })
            .sum()
    };
    let mut agreements = 0usize;
    for pair in 0..500u64 {
        let psi = random_pure(&qubit(), 20_000 + pair);
        let phi = random_pure(&qubit(), 30_000 + pair);
        let expected = oracle_entropy(&psi) >= oracle_entropy(&phi) - 1e-9;
        let got = catalytic_pure_feasible(&psi, &phi);
        assert_eq!(got, expected, "pair {pair}");
        agreements += 1;
    }
    println!("acceptance criterion 04: PASS — {agreements}/500 oracle agreements on pure convertibility");
}

#[test]
fn criterion_05_formation_optimizer_matches_qubit_closed_form() {
    let opts = formation::CfOptions::default();
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let rank = 1 + (seed % 2) as usize;
        let rho = random_density(&qubit(), rank, 40_000 + seed).unwrap();
        let exact = if cohcat::states::is_incoherent(&rho) {
            0.0
        } else {
            qubit_formation_closed_form(&rho)
        };
        let found = formation::optimize(&rho, &opts).value;
        let err = (found - exact).abs();
        worst = worst.max(err);
        assert!(err <= 1e-6, "seed {seed}: optimizer {found} vs closed form {exact}");
    }
    println!("acceptance criterion 05: PASS — 500 qubit states, worst |optimizer - closed form| = {worst:.2e}");
}

#[test]
fn criterion_06_measure_identities() {
    // C_r additivity on products
    for seed in 0..200u64 {
        let a = random_density(&SystemLayout::single("A", 2, "A").unwrap(), 2, 50_000 + seed).unwrap();
        let b = random_density(&SystemLayout::single("B", 2, "B").unwrap(), 2, 51_000 + seed).unwrap();
        let joint = a.tensor(&b).unwrap();
        let lhs = relative_entropy_of_coherence(&joint).value;
        let rhs = relative_entropy_of_coherence(&a).value + relative_entropy_of_coherence(&b).value;
        assert!((lhs - rhs).abs() <= 1e-9, "additivity seed {seed}: {lhs} vs {rhs}");
    }
    // C_r superadditivity on correlated states
    for seed in 0..200u64 {
        let rho = random_density(&two_party(2, 2), 4, 52_000 + seed).unwrap();
        let joint = relative_entropy_of_coherence(&rho).value;
        let a = relative_entropy_of_coherence(&rho.partial_trace_keep(&["A"]).unwrap()).value;
        let b = relative_entropy_of_coherence(&rho.partial_trace_keep(&["B"]).unwrap()).value;
        assert!(joint >= a + b - 1e-9, "superadditivity seed {seed}");
    }
    // C_d ≤ C_c, equality on pure states
    for seed in 0..200u64 {
        let rho = random_density(&qubit(), 2, 53_000 + seed).unwrap();
        let cd = distillable_coherence(&rho).value;
        let cc = coherence_cost(&rho).value;
        assert!(cd <= cc + 1e-9, "cost seed {seed}: C_d {cd} > C_c {cc}");
    }
    for seed in 0..100u64 {
        let psi = random_pure(&two_party(2, 2), 54_000 + seed).density();
        let cd = distillable_coherence(&psi).value;
        let cc = coherence_cost(&psi).value;
        assert!((cd - cc).abs() <= 1e-9, "pure equality seed {seed}: {cd} vs {cc}");
    }
    // pure-state collaboration rate equals the one-sided upper bound
    for seed in 0..200u64 {
        let psi = random_pure(&two_party(2, 2), 55_000 + seed);
        let rate = assisted_distillation_rate(&psi, &["B"]).unwrap();
        let bound = collaboration_upper_bound(&psi.density(), &["B"]).unwrap();
        assert!((rate - bound).abs() <= 1e-9, "rate equality seed {seed}");
    }
    println!("acceptance criterion 06: PASS — additivity, superadditivity, cost/distillation order, pure rate equality");
}

#[test]
fn criterion_07_quantum_incoherent_characterization() {
    use cohcat::linalg::CMatrix;
    use num_complex::Complex64;

    let mut checked = 0usize;
    // constructed QI states: Σ_i p_i σ_i^A ⊗ |i⟩⟨i|^B
    for seed in 0..200u64 {
        let db = 2 + (seed % 2) as usize;
        let layout = two_party(2, db);
        let mut m = CMatrix::zeros(2 * db, 2 * db);
        let mut weights: Vec<f64> = (0..db).map(|i| 0.2 + ((seed + i as u64) % 5) as f64).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        for (i, &w) in weights.iter().enumerate() {
            let sigma = random_density(
                &SystemLayout::single("A", 2, "A").unwrap(),
                2,
                60_000 + 10 * seed + i as u64,
            )
            .unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    m[(r * db + i, c * db + i)] = sigma.matrix()[(r, c)] * Complex64::new(w, 0.0);
                }
            }
        }
        let rho = DensityOperator::from_matrix(layout, m).unwrap();
        let qi = qi_relative_entropy(&rho, &["B"]).unwrap().value;
        assert!(qi.abs() <= 1e-9, "QI state seed {seed} scored {qi}");
        assert!(is_quantum_incoherent(&rho, &["B"]).unwrap(), "QI state seed {seed} misclassified");
        checked += 1;
    }
    // random states with B-side coherence
    for seed in 0..200u64 {
        let rho = random_density(&two_party(2, 2), 4, 70_000 + seed).unwrap();
        let dephased = cohcat::states::dephase(&rho, &["B"]).unwrap();
        // Ginibre samples sit far from the dephased manifold
        assert!(rho.distance(&dephased).unwrap() > 1e-3, "degenerate sample at seed {seed}");
        let qi = qi_relative_entropy(&rho, &["B"]).unwrap().value;
        assert!(qi > 1e-9, "non-QI seed {seed} scored {qi}");
        assert!(!is_quantum_incoherent(&rho, &["B"]).unwrap(), "non-QI seed {seed} misclassified");
        checked += 1;
    }
    println!("acceptance criterion 07: PASS — {checked}/400 states classified with zero mismatches");
}

#[test]
fn criterion_08_merging_values_and_bounds() {
    // e0(|+>^A |0>^B) = 1
    let plus = cohcat::states::maximally_coherent(2).unwrap();
    let plus = PureState::new(
        SystemLayout::single("A", 2, "A").unwrap(),
        plus.amplitudes().clone(),
    )
    .unwrap();
    let b0 = PureState::basis_ket(SystemLayout::single("B", 2, "B").unwrap(), 0).unwrap();
    let psi_plus = plus.tensor(&b0).unwrap();
    let analysis = iqsm_e0(&psi_plus, &[], &["A"], &["B"]).unwrap();
    assert!((analysis.e0 - 1.0).abs() <= 1e-9, "e0 = {}", analysis.e0);

    // e0(|phi+>^{AB}) = 0
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let bell = PureState::from_real(two_party(2, 2), &[amp, 0.0, 0.0, amp]).unwrap();
    let analysis_bell = iqsm_e0(&bell, &[], &["A"], &["B"]).unwrap();
    assert!(analysis_bell.e0.abs() <= 1e-9, "e0 = {}", analysis_bell.e0);

    // tradeoff_rhs ≥ -1e-9 across a random sweep
    let rab = SystemLayout::new(&[("R", 2, "R"), ("A", 2, "A"), ("B", 2, "B")]).unwrap();
    let mut min_rhs = f64::INFINITY;
    for seed in 0..200u64 {
        let psi = random_pure(&rab, 80_000 + seed);
        let a = iqsm_e0(&psi, &["R"], &["A"], &["B"]).unwrap();
        min_rhs = min_rhs.min(a.tradeoff_rhs);
        assert!(a.tradeoff_rhs >= -1e-9, "seed {seed}: tradeoff rhs {}", a.tradeoff_rhs);
    }

    // matched pairs close to zero margin
    let chi_layout = SystemLayout::new(&[("At", 2, "A"), ("Bt", 2, "B")]).unwrap();
    let chi_bell = PureState::from_real(chi_layout.clone(), &[amp, 0.0, 0.0, amp]).unwrap();
    let report = verify_merge_bound(&psi_plus, &[], &["A"], &["B"], &chi_bell).unwrap();
    assert!(report.margin.abs() <= 1e-9, "matched margin {}", report.margin);
    assert!(report.sufficient);

    let chi0 = PureState::basis_ket(chi_layout, 0).unwrap();
    let incoherent = PureState::basis_ket(two_party(2, 2), 0).unwrap();
    let report0 = verify_merge_bound(&incoherent, &[], &["A"], &["B"], &chi0).unwrap();
    assert!(report0.margin.abs() <= 1e-9, "matched margin {}", report0.margin);

    println!(
        "acceptance criterion 08: PASS — e0 values exact, min tradeoff rhs {min_rhs:.2e}, matched margins ~0"
    );
}

#[test]
fn criterion_09_dense_vs_ensemble_cross_check() {
    let mut worst = 0.0f64;
    for n in 2..=4usize {
        let rho = random_density(&qubit(), 2, 90_000 + n as u64).unwrap();
        let sigma = random_density(&qubit(), 2, 91_000 + n as u64).unwrap();
        let gamma = power_state(&sigma, n);
        let tau = build_catalyst(&rho, &gamma, n).unwrap();
        let lambda = KrausChannel::replacement(&gamma).unwrap();
        let trace = run_protocol(&rho, &sigma, &tau, &lambda).unwrap();
        let dense = run_protocol_dense(&rho, &tau, &lambda).unwrap();
        let diff = cross_check(&trace, &dense);
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "n={n} replacement channel: {diff:.3e}");
    }
    // a certified-incoherent channel through both paths
    for n in 2..=3usize {
        let rho = random_density(&qubit(), 2, 92_000 + n as u64).unwrap();
        let space = copies(2, n);
        let lambda = random_incoherent_channel(&space, 93_000 + n as u64);
        let rho_n = DensityOperator::from_matrix(space, kron_power(rho.matrix(), n)).unwrap();
        let gamma = lambda.apply(&rho_n).unwrap();
        let tau = build_catalyst(&rho, &gamma, n).unwrap();
        let sigma_guess = gamma
            .partial_trace_keep(&[gamma.layout().factors().last().unwrap().label.as_str()])
            .unwrap();
        let sigma = DensityOperator::from_matrix(qubit(), sigma_guess.matrix().clone()).unwrap();
        let trace = run_protocol(&rho, &sigma, &tau, &lambda).unwrap();
        let dense = run_protocol_dense(&rho, &tau, &lambda).unwrap();
        let diff = cross_check(&trace, &dense);
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "n={n} incoherent channel: {diff:.3e}");
    }
    println!("acceptance criterion 09: PASS — ensemble vs dense agree, worst elementwise gap {worst:.2e}");
}
