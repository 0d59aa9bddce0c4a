//! Global tolerance ladder.
//!
//! Three rungs, one order of headroom between each: 1e-12 for elementwise
//! representation noise, 1e-10 for validation slack (positivity, traces,
//! unitarity), 1e-9 for equality assertions in tests and predicates. Values
//! produced by the formation optimizer get a looser 1e-6 since only an upper
//! bound is certified.

/// Elementwise conjugate-symmetry residual accepted for Hermitian input.
pub const HERMITIAN_SYMMETRY: f64 = 1e-12;

/// Eigenvalues above -PSD_SLACK count as nonnegative when validating states.
pub const PSD_SLACK: f64 = 1e-10;

/// |trace - 1| accepted for density operators.
pub const STATE_TRACE: f64 = 1e-10;

/// Pure-state norm deviation |‖ψ‖ - 1| accepted.
pub const STATE_NORM: f64 = 1e-10;

/// Relative Frobenius bound for eigendecomposition reconstruction,
/// ‖A - VΛV†‖_F ≤ EIG_RECONSTRUCTION · max(1, ‖A‖_F).
pub const EIG_RECONSTRUCTION: f64 = 1e-10;

/// Max elementwise |V†V - I| accepted for eigenvector matrices.
pub const EIG_UNITARITY: f64 = 1e-10;

/// Eigenvalues below this are treated as exact zeros inside entropies.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

/// Max elementwise |ΣK†K - I| accepted for trace-preserving Kraus families.
pub const CHANNEL_TRACE_PRESERVING: f64 = 1e-10;

/// Kraus entries below this magnitude are structural zeros for the
/// incoherence certificate (at most one live entry per column).
pub const INCOHERENT_ENTRY: f64 = 1e-12;

/// Off-diagonal magnitude below which a state counts as incoherent.
pub const OFF_DIAGONAL: f64 = 1e-10;

/// Trace-distance threshold for the quantum-incoherent fixed-point test.
pub const QI_DISTANCE: f64 = 1e-9;

/// Equality assertions on exact quantities (entropies, rates, identities).
pub const EQUALITY: f64 = 1e-9;

/// Slack for quantities that pass through the formation optimizer.
pub const OPTIMIZER_SLACK: f64 = 1e-6;

/// Closure distances of an exact-target protocol run.
pub const EXACT_CLOSURE: f64 = 1e-10;

/// Max elementwise disagreement between ensemble and dense protocol paths.
pub const CROSS_CHECK: f64 = 1e-12;

/// Slack on the output-distance ratio bound (ratio ≤ 2 + RATIO_SLACK).
pub const RATIO_SLACK: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::assertions_on_constants)]
    fn ladder_is_ordered() {
        assert!(HERMITIAN_SYMMETRY < PSD_SLACK);
        assert!(PSD_SLACK < EQUALITY);
        assert!(EQUALITY < OPTIMIZER_SLACK);
    }
}
