//! The catalyst construction and the three-step catalytic protocol.
//!
//! Given a target n-copy output Γ for input ρ, the catalyst is the flagged
//! ensemble
//!
//! ```text
//! τ = (1/n) Σ_{k=1..n}  ρ^⊗(k-1) ⊗ Γ_{n-k} ⊗ |k⟩⟨k|
//! ```
//!
//! on n-1 system copies plus a dimension-n flag register K, where Γ_i is the
//! marginal of Γ on its last i copies and Γ_0 is the empty factor (the
//! scalar 1, not an identity matrix — an unnormalized identity would break
//! the unit trace). The protocol then runs
//!
//! 1. a projective read of K, applying the n-copy channel Λ exactly when the
//!    flag shows its top value,
//! 2. a cyclic shift of the register kets, and
//! 3. a cyclic swap of the system copies (last copy to the front).
//!
//! When Λ's output is close to σ^⊗n the first factor of the result is close
//! to σ and the rest returns to τ. The register stays diagonal throughout,
//! so the ensemble execution is exact; an independent dense Kraus execution
//! of the same steps is provided as a cross-check oracle.
//!
//! The ensemble algebra (and the exact catalyst return) needs Γ invariant
//! under copy permutations. `build_catalyst` therefore symmetrizes a
//! non-invariant Γ by an exact permutation twirl and records that it did;
//! the twirl is itself incoherent, so nothing in the resource accounting
//! changes.

pub mod harness;

pub use harness::monotonicity_harness;

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{apply_kraus, is_incoherent_operation, symmetrize, KrausChannel};
use crate::linalg::{
    apply_index_permutation, kron, kron_power, max_abs_diff, partial_trace,
    permutation_index_map, trace_distance, CMatrix, HermitianMatrix,
};
use crate::states::{DensityOperator, PureState, SystemLayout};
use crate::{tol, Error, Result};

/// Hard cap on the joint dense dimension d^n · n (keeps runs at desk scale).
pub const MAX_JOINT_DIM: usize = 24_576;

/// The flagged-ensemble catalyst, stored both ways: the per-flag blocks
/// (each trace one, weight 1/n) and the assembled dense state on
/// S^⊗(n-1) ⊗ K.
#[derive(Debug, Clone)]
pub struct CatalystState {
    n: usize,
    system_dim: usize,
    system_layout: SystemLayout,
    blocks: Vec<CMatrix>,
    dense: DensityOperator,
    gamma: DensityOperator,
    gamma_symmetrized: bool,
}

impl CatalystState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn system_layout(&self) -> &SystemLayout {
        &self.system_layout
    }

    /// Per-flag blocks on the n-1 copy space; block k (0-indexed) carries
    /// weight 1/n under flag ket |k⟩.
    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// The assembled catalyst state; block-diagonal in the register.
    pub fn dense(&self) -> &DensityOperator {
        &self.dense
    }

    /// The (possibly symmetrized) n-copy target the catalyst was built from.
    pub fn gamma(&self) -> &DensityOperator {
        &self.gamma
    }

    /// Whether `build_catalyst` had to twirl a non-permutation-invariant Γ.
    pub fn was_symmetrized(&self) -> bool {
        self.gamma_symmetrized
    }
}

/// Layout of `copies` relabeled duplicates of `base` (labels get ".j"
/// suffixes, 1-indexed), optionally followed by the flag register.
pub(crate) fn copies_layout(
    base: &SystemLayout,
    first: usize,
    last: usize,
    register: Option<usize>,
) -> Result<SystemLayout> {
    let mut factors = Vec::new();
    for j in first..=last {
        for f in base.factors() {
            factors.push(crate::states::Factor {
                label: format!("{}.{}", f.label, j),
                dim: f.dim,
                party: f.party.clone(),
            });
        }
    }
    if let Some(n) = register {
        factors.push(crate::states::Factor {
            label: "K".to_string(),
            dim: n,
            party: base.factors()[0].party.clone(),
        });
    }
    SystemLayout::from_factors(factors)
}

/// Assembles a register-block-diagonal dense matrix from equal-weight blocks.
fn assemble_dense(blocks: &[CMatrix]) -> CMatrix {
    let n = blocks.len();
    let ds = blocks[0].nrows();
    let weight = Complex64::new(1.0 / n as f64, 0.0);
    let mut out = CMatrix::zeros(ds * n, ds * n);
    for (k, b) in blocks.iter().enumerate() {
        for r in 0..ds {
            for c in 0..ds {
                out[(r * n + k, c * n + k)] = b[(r, c)] * weight;
            }
        }
    }
    out
}

/// Trace distance between two states that are block-diagonal in the same
/// register, given their equal-weight blocks.
fn block_distance(a: &[CMatrix], b: &[CMatrix]) -> Result<f64> {
    let n = a.len();
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sum += trace_distance(
            &HermitianMatrix::new_unchecked(x.clone()),
            &HermitianMatrix::new_unchecked(y.clone()),
        )?;
    }
    Ok(sum / n as f64)
}

/// Builds the catalyst for input `rho`, n-copy target `gamma`
/// (dimension d^n), and copy count `n`. A non-permutation-invariant Γ is
/// symmetrized by exact twirl first.
pub fn build_catalyst(rho: &DensityOperator, gamma: &DensityOperator, n: usize) -> Result<CatalystState> {
    if !(2..=6).contains(&n) {
        return Err(Error::Invalid(format!("copy count n must be in 2..=6, got {n}")));
    }
    let d = rho.dim();
    let dn = d.checked_pow(n as u32).ok_or_else(|| Error::Invalid("d^n overflows".into()))?;
    if dn * n > MAX_JOINT_DIM {
        return Err(Error::Invalid(format!(
            "joint dimension {} exceeds the desk-scale cap {MAX_JOINT_DIM}",
            dn * n
        )));
    }
    if gamma.dim() != dn {
        return Err(Error::DimensionMismatch {
            expected: dn,
            actual: gamma.dim(),
        });
    }

    // canonical copy-block view of Γ
    let block_layout = {
        let mut factors = Vec::new();
        for j in 1..=n {
            factors.push(crate::states::Factor {
                label: format!("G.{j}"),
                dim: d,
                party: "A".to_string(),
            });
        }
        SystemLayout::from_factors(factors)?
    };
    let gamma_canonical = DensityOperator::from_matrix(block_layout, gamma.matrix().clone())?;

    let copy_dims = vec![d; n];
    let mut invariant = true;
    for j in 0..n - 1 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(j, j + 1);
        let map = permutation_index_map(&copy_dims, &perm)?;
        let swapped = apply_index_permutation(gamma_canonical.matrix(), &map);
        if max_abs_diff(&swapped, gamma_canonical.matrix()) > tol::HERMITIAN_SYMMETRY {
            invariant = false;
            break;
        }
    }
    let (gamma_used, symmetrized) = if invariant {
        (gamma_canonical, false)
    } else {
        (symmetrize(&gamma_canonical, n)?, true)
    };

    // Γ_i = marginal on the last i copies; Γ_0 is the scalar 1
    let mut marginals: Vec<CMatrix> = Vec::with_capacity(n);
    marginals.push(CMatrix::identity(1, 1));
    for i in 1..n {
        let keep: Vec<usize> = (n - i..n).collect();
        let m = partial_trace(gamma_used.hermitian(), &copy_dims, &keep)?;
        marginals.push(m.into_matrix());
    }

    let mut rho_pows: Vec<CMatrix> = Vec::with_capacity(n);
    rho_pows.push(CMatrix::identity(1, 1));
    for k in 1..n {
        rho_pows.push(kron(&rho_pows[k - 1], rho.matrix()));
    }

    // block for flag value k (0-indexed): ρ^⊗k ⊗ Γ_{n-1-k}
    let blocks: Vec<CMatrix> = (0..n)
        .map(|k| kron(&rho_pows[k], &marginals[n - 1 - k]))
        .collect();

    let dense_layout = copies_layout(rho.layout(), 2, n, Some(n))?;
    let dense = DensityOperator::from_matrix(dense_layout, assemble_dense(&blocks))?;

    Ok(CatalystState {
        n,
        system_dim: d,
        system_layout: rho.layout().clone(),
        blocks,
        dense,
        gamma: gamma_used,
        gamma_symmetrized: symmetrized,
    })
}

/// Everything a protocol run records: the three intermediate states, the
/// delivered output and returned catalyst, the closure distances, and the
/// per-step certifications.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTrace {
    pub mu1: DensityOperator,
    pub mu2: DensityOperator,
    pub mu_sc: DensityOperator,
    /// First-factor marginal of μ^SC: the delivered single-copy output.
    pub output: DensityOperator,
    /// Remaining marginal of μ^SC: what the catalyst came back as.
    pub catalyst_return: DensityOperator,
    /// D(Λ(ρ^⊗n), σ^⊗n) — how far the channel output is from the target.
    pub dist_gamma_target: f64,
    /// D(μ^SC, σ ⊗ τ) — joint closure distance.
    pub dist_joint: f64,
    /// D(Tr_out μ^SC, τ) — catalyst return distance.
    pub dist_catalyst_return: f64,
    /// Trace-preservation residual of the conditional step (inherited from Λ).
    pub step_conditional_trace_residual: f64,
    pub lambda_incoherent: bool,
    pub step_register_shift_incoherent: bool,
    pub step_swap_incoherent: bool,
}

fn check_protocol_args(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    tau: &CatalystState,
    lambda: &KrausChannel,
) -> Result<usize> {
    let d = tau.system_dim();
    let n = tau.n();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: rho.dim() });
    }
    if sigma.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: sigma.dim() });
    }
    let dn = d.pow(n as u32);
    if lambda.input_layout().dim() != dn || lambda.output_layout().dim() != dn {
        return Err(Error::Channel(format!(
            "channel must map the {n}-copy space (dim {dn}) to itself"
        )));
    }
    Ok(dn)
}

/// Runs the protocol on the exact ensemble representation (the register is
/// classical throughout, so this path is exact) and records the trace.
///
/// `sigma` is the intended single-copy target; it only enters the recorded
/// distances, never the dynamics.
pub fn run_protocol(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    tau: &CatalystState,
    lambda: &KrausChannel,
) -> Result<ProtocolTrace> {
    check_protocol_args(rho, sigma, tau, lambda)?;
    let d = tau.system_dim();
    let n = tau.n();

    // Λ(ρ^⊗n): the only real channel application in the ensemble path
    let rho_n = kron_power(rho.matrix(), n);
    let gamma_prime = apply_kraus(lambda.kraus(), &rho_n);

    // step (i): flag k < n leaves ρ ⊗ τ-block alone; flag n fires Λ
    let mut mu1_blocks: Vec<CMatrix> = Vec::with_capacity(n);
    for k in 0..n - 1 {
        mu1_blocks.push(kron(rho.matrix(), &tau.blocks()[k]));
    }
    mu1_blocks.push(gamma_prime.clone());

    // step (ii): cyclic register shift |k⟩ → |k+1 mod n⟩
    let mut mu2_blocks: Vec<CMatrix> = Vec::with_capacity(n);
    mu2_blocks.push(mu1_blocks[n - 1].clone());
    for block in mu1_blocks.iter().take(n - 1) {
        mu2_blocks.push(block.clone());
    }

    // step (iii): cyclic swap of the copies, last to front
    let copy_dims = vec![d; n];
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let map = permutation_index_map(&copy_dims, &cycle)?;
    let musc_blocks: Vec<CMatrix> = mu2_blocks
        .iter()
        .map(|b| apply_index_permutation(b, &map))
        .collect();

    // distances against the intended target
    let sigma_n = kron_power(sigma.matrix(), n);
    let dist_gamma_target = trace_distance(
        &HermitianMatrix::new_unchecked(gamma_prime.clone()),
        &HermitianMatrix::new_unchecked(sigma_n),
    )?;
    let target_blocks: Vec<CMatrix> = tau
        .blocks()
        .iter()
        .map(|b| kron(sigma.matrix(), b))
        .collect();
    let dist_joint = block_distance(&musc_blocks, &target_blocks)?;

    let keep_rest: Vec<usize> = (1..n).collect();
    let return_blocks: Vec<CMatrix> = musc_blocks
        .iter()
        .map(|b| {
            partial_trace(&HermitianMatrix::new_unchecked(b.clone()), &copy_dims, &keep_rest)
                .map(HermitianMatrix::into_matrix)
        })
        .collect::<Result<_>>()?;
    let dist_catalyst_return = block_distance(&return_blocks, tau.blocks())?;

    // delivered output: first-factor marginal, averaged over flags
    let mut out = CMatrix::zeros(d, d);
    let weight = Complex64::new(1.0 / n as f64, 0.0);
    for b in &musc_blocks {
        let m = partial_trace(&HermitianMatrix::new_unchecked(b.clone()), &copy_dims, &[0])?;
        out += m.matrix() * weight;
    }
    let output = DensityOperator::from_matrix(rho.layout().clone(), out)?;

    let full_layout = copies_layout(rho.layout(), 1, n, Some(n))?;
    let mu1 = DensityOperator::from_matrix(full_layout.clone(), assemble_dense(&mu1_blocks))?;
    let mu2 = DensityOperator::from_matrix(full_layout.clone(), assemble_dense(&mu2_blocks))?;
    let mu_sc = DensityOperator::from_matrix(full_layout, assemble_dense(&musc_blocks))?;
    let catalyst_return =
        DensityOperator::from_matrix(tau.dense().layout().clone(), assemble_dense(&return_blocks))?;

    // per-step certifications, checked on the actually constructed operators
    let shift = KrausChannel::register_shift(n)?;
    let swap_layout = copies_layout(rho.layout(), 1, n, None)?;
    let factor_cycle: Vec<usize> = {
        let per = rho.layout().len();
        let mut p = Vec::with_capacity(per * n);
        for copy in 0..n {
            let dest = (copy + 1) % n;
            for j in 0..per {
                p.push(dest * per + j);
            }
        }
        p
    };
    let swap = KrausChannel::permutation(swap_layout, &factor_cycle)?;

    Ok(ProtocolTrace {
        mu1,
        mu2,
        mu_sc,
        output,
        catalyst_return,
        dist_gamma_target,
        dist_joint,
        dist_catalyst_return,
        step_conditional_trace_residual: lambda.trace_preservation_residual(),
        lambda_incoherent: is_incoherent_operation(lambda),
        step_register_shift_incoherent: is_incoherent_operation(&shift),
        step_swap_incoherent: is_incoherent_operation(&swap),
    })
}

/// The three intermediate states from the dense Kraus execution.
#[derive(Debug, Clone)]
pub struct DenseTrace {
    pub mu1: CMatrix,
    pub mu2: CMatrix,
    pub mu_sc: CMatrix,
}

/// Independent dense execution of the same three steps: the conditional
/// channel as an explicit Kraus family on S^⊗n ⊗ K, the register shift as a
/// unitary, the swap as an index permutation. Exists purely to cross-check
/// the ensemble path.
pub fn run_protocol_dense(
    rho: &DensityOperator,
    tau: &CatalystState,
    lambda: &KrausChannel,
) -> Result<DenseTrace> {
    let sigma_dummy = DensityOperator::maximally_mixed(rho.layout().clone());
    check_protocol_args(rho, &sigma_dummy, tau, lambda)?;
    let d = tau.system_dim();
    let n = tau.n();
    let dn = d.pow(n as u32);

    let joint = kron(rho.matrix(), tau.dense().matrix());

    // step (i): controlled channel
    let mut kraus: Vec<CMatrix> = Vec::with_capacity(n - 1 + lambda.kraus().len());
    for k in 0..n - 1 {
        let mut flag = CMatrix::zeros(n, n);
        flag[(k, k)] = Complex64::new(1.0, 0.0);
        kraus.push(kron(&CMatrix::identity(dn, dn), &flag));
    }
    let mut top = CMatrix::zeros(n, n);
    top[(n - 1, n - 1)] = Complex64::new(1.0, 0.0);
    for k in lambda.kraus() {
        kraus.push(kron(k, &top));
    }
    let mu1 = apply_kraus(&kraus, &joint);

    // step (ii): register shift unitary on K
    let shift = {
        let mut u = CMatrix::zeros(n, n);
        for i in 0..n {
            u[((i + 1) % n, i)] = Complex64::new(1.0, 0.0);
        }
        kron(&CMatrix::identity(dn, dn), &u)
    };
    let mu2 = &shift * &mu1 * shift.adjoint();

    // step (iii): cyclic swap of the copies (K fixed)
    let mut dims = vec![d; n];
    dims.push(n);
    let mut perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    perm.push(n);
    let map = permutation_index_map(&dims, &perm)?;
    let mu_sc = apply_index_permutation(&mu2, &map);

    Ok(DenseTrace { mu1, mu2, mu_sc })
}

/// Largest elementwise disagreement between the ensemble and dense paths
/// over the three recorded states.
pub fn cross_check(trace: &ProtocolTrace, dense: &DenseTrace) -> f64 {
    max_abs_diff(trace.mu1.matrix(), &dense.mu1)
        .max(max_abs_diff(trace.mu2.matrix(), &dense.mu2))
        .max(max_abs_diff(trace.mu_sc.matrix(), &dense.mu_sc))
}

/// Pure-state convertibility under catalytic incoherent operations:
/// possible iff the dephased entropy does not increase,
/// S(Δψ) ≥ S(Δφ) - 1e-9.
pub fn catalytic_pure_feasible(psi: &PureState, phi: &PureState) -> bool {
    psi.dephased_entropy() >= phi.dephased_entropy() - tol::EQUALITY
}

/// Verdict for an asymptotic rate query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateFeasibility {
    Possible,
    Impossible,
    Boundary,
}

/// Asymptotic pure-state transformation at rate R: possible when R is below
/// S(Δψ)/S(Δφ), impossible above, boundary within 1e-9 of the ratio.
/// A free target (S(Δφ) = 0) leaves the rate unbounded and is rejected.
pub fn asymptotic_rate_feasible(psi: &PureState, phi: &PureState, rate: f64) -> Result<RateFeasibility> {
    let s_out = phi.dephased_entropy();
    if s_out <= tol::EIGENVALUE_CLAMP {
        return Err(Error::Invalid(
            "target state is free (zero dephased entropy); rate is unbounded".into(),
        ));
    }
    let ratio = psi.dephased_entropy() / s_out;
    if rate < ratio - tol::EQUALITY {
        Ok(RateFeasibility::Possible)
    } else if rate > ratio + tol::EQUALITY {
        Ok(RateFeasibility::Impossible)
    } else {
        Ok(RateFeasibility::Boundary)
    }
}
