//! CPTP maps as Kraus families, with trace-preservation checked on
//! construction and incoherence certified structurally: a channel is an
//! incoherent operation iff every Kraus matrix has at most one live entry
//! per column, so each operator sends basis kets to scaled basis kets.
//!
//! The built-ins cover what the catalytic protocol needs: dephasing,
//! factor permutations, the flag-register shift, replacement (the
//! assumed-protocol oracle standing in for an asymptotic transformation
//! whose existence is guaranteed elsewhere), and exact symmetrization.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{
    apply_index_permutation, hermitian_eig, kron, max_abs_diff, permutation_index_map, CMatrix,
    HermitianMatrix,
};
use crate::states::{DensityOperator, SystemLayout};
use crate::{tol, Error, Result};

/// Completely positive trace-preserving map as a list of Kraus matrices.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    input: SystemLayout,
    output: SystemLayout,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates shapes and Σ K†K = I within [`tol::CHANNEL_TRACE_PRESERVING`].
    pub fn new(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Channel("empty Kraus family".into()));
        }
        let din = input.dim();
        let dout = output.dim();
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::Channel(format!(
                    "Kraus shape {}x{} does not map dim {din} to dim {dout}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let residual = max_abs_diff(&sum, &CMatrix::identity(din, din));
        if residual > tol::CHANNEL_TRACE_PRESERVING {
            return Err(Error::Channel(format!(
                "not trace preserving: max |ΣK†K - I| = {residual:.3e}"
            )));
        }
        Ok(Self { input, output, kraus })
    }

    pub fn input_layout(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output_layout(&self) -> &SystemLayout {
        &self.output
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Residual max |ΣK†K - I| (diagnostic; small by construction).
    pub fn trace_preservation_residual(&self) -> f64 {
        let din = self.input.dim();
        let mut sum = CMatrix::zeros(din, din);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_abs_diff(&sum, &CMatrix::identity(din, din))
    }

    /// Identity channel.
    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.dim();
        Self {
            input: layout.clone(),
            output: layout,
            kraus: vec![CMatrix::identity(d, d)],
        }
    }

    /// Single-Kraus unitary channel; `u` must be unitary (caught by the
    /// trace-preservation check).
    pub fn unitary(layout: SystemLayout, u: CMatrix) -> Result<Self> {
        Self::new(layout.clone(), layout, vec![u])
    }

    /// Dephasing of the selected factors: Kraus projectors onto each basis
    /// pattern of the selected indices. Selecting every factor gives Δ.
    pub fn dephasing(layout: SystemLayout, subsystems: &[&str]) -> Result<Self> {
        let positions = layout.positions(subsystems)?;
        if positions.is_empty() {
            return Err(Error::Channel("dephasing needs at least one factor".into()));
        }
        let dims = layout.dims();
        let d = layout.dim();
        let strides: Vec<usize> = {
            let mut s = vec![1usize; dims.len()];
            for i in (0..dims.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * dims[i + 1];
            }
            s
        };
        let patterns: usize = positions.iter().map(|&p| dims[p]).product();
        let mut kraus = Vec::with_capacity(patterns);
        for pat in 0..patterns {
            let mut k = CMatrix::zeros(d, d);
            for idx in 0..d {
                let mut flat = 0usize;
                for &p in &positions {
                    flat = flat * dims[p] + (idx / strides[p]) % dims[p];
                }
                if flat == pat {
                    k[(idx, idx)] = Complex64::new(1.0, 0.0);
                }
            }
            kraus.push(k);
        }
        Self::new(layout.clone(), layout, kraus)
    }

    /// Unitary reindexing of tensor factors; factor `k` moves to position
    /// `perm[k]`. Only equal-dimension factors may trade places, so the dim
    /// profile of the layout is unchanged while labels travel with their
    /// factors.
    pub fn permutation(layout: SystemLayout, perm: &[usize]) -> Result<Self> {
        let dims = layout.dims();
        let map = permutation_index_map(&dims, perm)?;
        let d = layout.dim();
        let mut u = CMatrix::zeros(d, d);
        for (src, &dst) in map.iter().enumerate() {
            u[(dst, src)] = Complex64::new(1.0, 0.0);
        }
        let output = layout.permuted(perm)?;
        Self::new(layout, output, vec![u])
    }

    /// Cyclic permutation of the flag register basis: the top ket wraps to
    /// the first slot and every other ket moves up one,
    /// |dim_k - 1⟩ → |0⟩ and |i⟩ → |i+1⟩. `dim_k = 1` is the identity.
    pub fn register_shift(dim_k: usize) -> Result<Self> {
        if dim_k == 0 {
            return Err(Error::Invalid("register dimension must be positive".into()));
        }
        let layout = SystemLayout::single("K", dim_k, "A")?;
        let mut u = CMatrix::zeros(dim_k, dim_k);
        for i in 0..dim_k {
            u[((i + 1) % dim_k, i)] = Complex64::new(1.0, 0.0);
        }
        Self::new(layout.clone(), layout, vec![u])
    }

    /// Channel with constant output: ch(ρ) = target for every input on the
    /// target's layout. For an incoherent (diagonal) target this is built as
    /// measure-and-prepare in basis kets and certifies incoherent; for a
    /// coherent target it prepares eigenvectors and does not.
    pub fn replacement(target: &DensityOperator) -> Result<Self> {
        let layout = target.layout().clone();
        let d = target.dim();
        let mut kraus = Vec::new();
        if crate::states::is_incoherent(target) {
            for i in 0..d {
                let p = target.matrix()[(i, i)].re.max(0.0);
                if p <= tol::EIGENVALUE_CLAMP {
                    continue;
                }
                let amp = Complex64::new(p.sqrt(), 0.0);
                for j in 0..d {
                    let mut k = CMatrix::zeros(d, d);
                    k[(i, j)] = amp;
                    kraus.push(k);
                }
            }
        } else {
            let spec = hermitian_eig(target.hermitian())?;
            for (i, &lambda) in spec.eigenvalues().iter().enumerate() {
                if lambda <= tol::EIGENVALUE_CLAMP {
                    continue;
                }
                let v = spec.eigenvectors().column(i);
                for j in 0..d {
                    let mut k = CMatrix::zeros(d, d);
                    for r in 0..d {
                        k[(r, j)] = Complex64::new(lambda.sqrt(), 0.0) * v[r];
                    }
                    kraus.push(k);
                }
            }
        }
        Self::new(layout.clone(), layout, kraus)
    }

    /// Composition: first `self`, then `next`. Kraus family is all pairwise
    /// products, so composing incoherent channels stays incoherent.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if next.input.dim() != self.output.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output.dim(),
                actual: next.input.dim(),
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Self::new(self.input.clone(), next.output.clone(), kraus)
    }

    /// Tensor product channel acting factor-wise on the concatenated layout.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let input = self.input.tensor(&other.input)?;
        let output = self.output.tensor(&other.output)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self::new(input, output, kraus)
    }

    /// Σ K ρ K†. The input state must match the channel's input dimension;
    /// the result carries the channel's output layout.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.input.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input.dim(),
                actual: rho.dim(),
            });
        }
        let out = apply_kraus(&self.kraus, rho.matrix());
        DensityOperator::new(self.output.clone(), HermitianMatrix::new_unchecked(out))
    }
}

/// Raw Kraus application Σ K m K† without state validation.
pub(crate) fn apply_kraus(kraus: &[CMatrix], m: &CMatrix) -> CMatrix {
    let dout = kraus[0].nrows();
    let mut out = CMatrix::zeros(dout, dout);
    for k in kraus {
        out += k * m * k.adjoint();
    }
    // kill rounding skew so downstream hermiticity stays exact
    (&out + out.adjoint()) * Complex64::new(0.5, 0.0)
}

/// True iff every Kraus matrix has at most one entry of magnitude above
/// [`tol::INCOHERENT_ENTRY`] per column. Such operators map incoherent
/// states to incoherent states.
pub fn is_incoherent_operation(ch: &KrausChannel) -> bool {
    for k in ch.kraus() {
        for c in 0..k.ncols() {
            let live = (0..k.nrows())
                .filter(|&r| k[(r, c)].norm() > tol::INCOHERENT_ENTRY)
                .count();
            if live > 1 {
                return false;
            }
        }
    }
    true
}

fn permutations_of(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}

/// Exact permutation twirl over `copies` equal blocks of factors:
/// (1/n!) Σ_π P_π ρ P_π†. The layout must split into `copies` blocks with
/// identical dim profiles. The output is invariant under every block
/// permutation.
pub fn symmetrize(rho: &DensityOperator, copies: usize) -> Result<DensityOperator> {
    if copies == 0 {
        return Err(Error::Invalid("copies must be positive".into()));
    }
    let layout = rho.layout();
    if !layout.len().is_multiple_of(copies) {
        return Err(Error::Layout(format!(
            "{} factors do not split into {copies} equal blocks",
            layout.len()
        )));
    }
    let per = layout.len() / copies;
    let dims = layout.dims();
    let block: Vec<usize> = dims[..per].to_vec();
    for b in 1..copies {
        if dims[b * per..(b + 1) * per] != block[..] {
            return Err(Error::Layout("blocks have unequal dimension profiles".into()));
        }
    }
    if copies == 1 {
        return Ok(rho.clone());
    }

    let mut acc = CMatrix::zeros(rho.dim(), rho.dim());
    let perms = permutations_of(copies);
    let weight = Complex64::new(1.0 / perms.len() as f64, 0.0);
    for perm in &perms {
        // expand the block permutation to factor positions
        let mut fperm = vec![0usize; layout.len()];
        for (b, &dest) in perm.iter().enumerate() {
            for j in 0..per {
                fperm[b * per + j] = dest * per + j;
            }
        }
        let map = permutation_index_map(&dims, &fperm)?;
        acc += apply_index_permutation(rho.matrix(), &map) * weight;
    }
    DensityOperator::new(layout.clone(), HermitianMatrix::new_unchecked(acc))
}

// Serialization mirrors the state JSON: layouts plus a list of Kraus
// matrices, each row-major [re, im] pairs.
#[derive(Serialize, Deserialize)]
struct KrausChannelRepr {
    input: SystemLayout,
    output: SystemLayout,
    kraus: Vec<Vec<[f64; 2]>>,
}

impl Serialize for KrausChannel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| {
                let mut flat = Vec::with_capacity(k.nrows() * k.ncols());
                for r in 0..k.nrows() {
                    for c in 0..k.ncols() {
                        flat.push([k[(r, c)].re, k[(r, c)].im]);
                    }
                }
                flat
            })
            .collect();
        KrausChannelRepr {
            input: self.input.clone(),
            output: self.output.clone(),
            kraus,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KrausChannel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = KrausChannelRepr::deserialize(deserializer)?;
        let din = repr.input.dim();
        let dout = repr.output.dim();
        let kraus = repr
            .kraus
            .into_iter()
            .map(|flat| {
                if flat.len() != din * dout {
                    return Err(D::Error::custom("Kraus entry count mismatch"));
                }
                let mut k = CMatrix::zeros(dout, din);
                for r in 0..dout {
                    for c in 0..din {
                        let [re, im] = flat[r * din + c];
                        k[(r, c)] = Complex64::new(re, im);
                    }
                }
                Ok(k)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        KrausChannel::new(repr.input, repr.output, kraus).map_err(D::Error::custom)
    }
}
