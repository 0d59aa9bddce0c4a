//! Dense complex matrix kernel: Hermitian eigendecomposition, tensor
//! products, partial trace, trace distance, and the two entropies everything
//! else is built from.
//!
//! Dimensions here are desk scale (a few hundred at most), so the kernel is
//! deliberately plain: dense `nalgebra` matrices, full eigendecompositions,
//! no structure exploitation beyond hermiticity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{tol, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Square complex matrix validated to be self-adjoint on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Wraps a square matrix, rejecting it unless `|a_ij - conj(a_ji)|`
    /// stays within [`tol::HERMITIAN_SYMMETRY`] elementwise.
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                actual: data.ncols(),
            });
        }
        let residual = hermiticity_residual(&data);
        if residual > tol::HERMITIAN_SYMMETRY {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { data })
    }

    /// Internal constructor for matrices Hermitian by construction
    /// (sums of `X + X†` patterns, diagonal clamps, ...).
    pub(crate) fn new_unchecked(data: CMatrix) -> Self {
        debug_assert!(hermiticity_residual(&data) <= 16.0 * tol::HERMITIAN_SYMMETRY);
        Self { data }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim),
        }
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self {
            data: CMatrix::from_diagonal(&v),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }
}

fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let r = (m[(i, j)] - m[(j, i)].conj()).norm();
            if r > worst {
                worst = r;
            }
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
/// eigenvectors in matching columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Spectrum {
    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary matrix whose column k is the eigenvector for `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds VΛV†.
    pub fn reconstruct(&self) -> CMatrix {
        let lambda = CMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix: repeatedly
/// annihilates the off-diagonal pivot a_pq with the plane unitary
/// [[c, -s·e^{iφ}], [s·e^{-iφ}, c]], where e^{iφ} is the phase of a_pq and
/// θ = atan2(2|a_pq|, a_pp - a_qq)/2. Quadratically convergent and
/// backward stable at these sizes.
fn jacobi_eig(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let dim = a.nrows();
    let mut m = a.clone();
    let mut v = CMatrix::identity(dim, dim);
    let scale = a.norm().max(1.0);
    let stop = 1e-14 * scale;
    const MAX_SWEEPS: usize = 60;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in p + 1..dim {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let b = m[(p, q)];
                let r = b.norm();
                if r <= stop * 1e-2 / dim as f64 {
                    continue;
                }
                let phase = b / Complex64::new(r, 0.0);
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let sp = Complex64::new(s, 0.0) * phase; // s·e^{iφ}
                let spc = sp.conj(); // s·e^{-iφ}
                let cc = Complex64::new(c, 0.0);

                // columns p, q of m and of the accumulated eigenvectors
                for k in 0..dim {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = cc * mkp + spc * mkq;
                    m[(k, q)] = -sp * mkp + cc * mkq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cc * vkp + spc * vkq;
                    v[(k, q)] = -sp * vkp + cc * vkq;
                }
                // rows p, q (conjugate rotation)
                for k in 0..dim {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = cc * mpk + sp * mqk;
                    m[(q, k)] = -spc * mpk + cc * mqk;
                }
                // pin the pivot block exactly
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..dim).map(|i| m[(i, i)].re).collect();
    (eigenvalues, v)
}

/// Hermitian eigendecomposition with post-hoc verification of the
/// reconstruction and orthonormality bounds. Deterministic for fixed input.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<Spectrum> {
    let (raw_values, raw_vectors) = jacobi_eig(a.matrix());
    let dim = a.dim();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        raw_values[j]
            .partial_cmp(&raw_values[i])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (col, &src) in order.iter().enumerate() {
        eigenvectors.set_column(col, &raw_vectors.column(src));
    }

    let spectrum = Spectrum {
        eigenvalues,
        eigenvectors,
    };

    let recon_err = (a.matrix() - spectrum.reconstruct()).norm();
    let bound = tol::EIG_RECONSTRUCTION * a.frobenius_norm().max(1.0);
    if recon_err > bound {
        return Err(Error::Eig(format!(
            "reconstruction error {recon_err:.3e} exceeds {bound:.3e}"
        )));
    }
    let gram = spectrum.eigenvectors.adjoint() * &spectrum.eigenvectors;
    let mut ortho_err = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            ortho_err = ortho_err.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    if ortho_err > tol::EIG_UNITARITY {
        return Err(Error::Eig(format!(
            "eigenvector matrix is not unitary: residual {ortho_err:.3e}"
        )));
    }
    Ok(spectrum)
}

/// Kronecker product on raw matrices; factor `a` is the leftmost
/// (most significant) index block.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of Hermitian matrices; stays Hermitian.
pub fn tensor_product(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::new_unchecked(kron(a.matrix(), b.matrix()))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if prod != total || dims.contains(&0) {
        return Err(Error::Layout(format!(
            "factor dims {dims:?} do not multiply to matrix dim {total}"
        )));
    }
    Ok(())
}

fn validated_positions(len: usize, positions: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != positions.len() {
        return Err(Error::Layout("repeated factor position".into()));
    }
    if sorted.iter().any(|&p| p >= len) {
        return Err(Error::Layout(format!(
            "factor position out of range (have {len} factors)"
        )));
    }
    Ok(sorted)
}

/// Partial trace of `a` over the complement of `keep`, with `a` living on
/// the tensor factors `dims` (leftmost factor most significant). The kept
/// factors retain their original relative order.
pub fn partial_trace(a: &HermitianMatrix, dims: &[usize], keep: &[usize]) -> Result<HermitianMatrix> {
    check_dims(a.dim(), dims)?;
    let keep = validated_positions(dims.len(), keep)?;
    if keep.is_empty() {
        return Err(Error::Layout("keep set must be nonempty".into()));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let st = strides(dims);

    let dim_keep: usize = keep.iter().map(|&p| dims[p]).product();
    let dim_tr: usize = traced.iter().map(|&p| dims[p]).product();

    // Flat offsets contributed by the kept / traced digit groups.
    let offsets = |group: &[usize], count: usize| -> Vec<usize> {
        let mut later = vec![1usize; group.len()];
        for k in (0..group.len().saturating_sub(1)).rev() {
            later[k] = later[k + 1] * dims[group[k + 1]];
        }
        (0..count)
            .map(|flat| {
                group
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| ((flat / later[k]) % dims[p]) * st[p])
                    .sum()
            })
            .collect()
    };
    let keep_off = offsets(&keep, dim_keep);
    let tr_off = offsets(&traced, dim_tr);

    let mut out = CMatrix::zeros(dim_keep, dim_keep);
    let m = a.matrix();
    for (r, &ro) in keep_off.iter().enumerate() {
        for (c, &co) in keep_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &to in &tr_off {
                acc += m[(ro + to, co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(HermitianMatrix::new_unchecked(out))
}

/// Zeroes every entry whose row and column digits disagree on any of the
/// selected factor positions. Idempotent and trace preserving.
pub fn dephase_positions(a: &HermitianMatrix, dims: &[usize], positions: &[usize]) -> Result<HermitianMatrix> {
    check_dims(a.dim(), dims)?;
    let sel = validated_positions(dims.len(), positions)?;
    let st = strides(dims);
    let n = a.dim();
    let mut out = a.matrix().clone();
    for r in 0..n {
        for c in 0..n {
            let survives = sel.iter().all(|&p| (r / st[p]) % dims[p] == (c / st[p]) % dims[p]);
            if !survives {
                out[(r, c)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(HermitianMatrix::new_unchecked(out))
}

/// Flat-index relabeling for a permutation of tensor factors.
/// `perm[k]` is the new position of factor `k`; requires the dim profile to
/// be unchanged (only equal-dimension factors may trade places).
pub fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    if perm.len() != dims.len() {
        return Err(Error::Layout(format!(
            "permutation length {} != factor count {}",
            perm.len(),
            dims.len()
        )));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::Layout("not a permutation".into()));
        }
        seen[p] = true;
    }
    let mut new_dims = vec![0usize; dims.len()];
    for (k, &p) in perm.iter().enumerate() {
        new_dims[p] = dims[k];
    }
    if new_dims != dims {
        return Err(Error::Layout(
            "permutation moves factors across unequal dimensions".into(),
        ));
    }
    let st = strides(dims);
    let total: usize = dims.iter().product();
    let mut map = vec![0usize; total];
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut out = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            let digit = (idx / st[k]) % dims[k];
            out += digit * st[p];
        }
        *slot = out;
    }
    Ok(map)
}

/// Conjugates `m` by the permutation described by `map` (from
/// [`permutation_index_map`]): `out[map[r], map[c]] = m[r, c]`.
pub fn apply_index_permutation(m: &CMatrix, map: &[usize]) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    out
}

/// Trace distance D(a, b) = ½ Σ |eig(a - b)|.
pub fn trace_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let diff = HermitianMatrix::new_unchecked(a.matrix() - b.matrix());
    let spec = hermitian_eig(&diff)?;
    Ok(0.5 * spec.eigenvalues().iter().map(|x| x.abs()).sum::<f64>())
}

/// Shannon entropy in bits of a nonnegative vector summing to ~1; entries
/// below [`tol::EIGENVALUE_CLAMP`] are treated as exact zeros.
pub fn shannon_entropy_bits(p: &[f64]) -> f64 {
    let mut s = 0.0;
    for &x in p {
        if x > tol::EIGENVALUE_CLAMP {
            s -= x * x.log2();
        }
    }
    s
}

fn validate_state_spectrum(a: &HermitianMatrix) -> Result<Spectrum> {
    let trace = a.trace();
    if (trace - 1.0).abs() > tol::STATE_TRACE {
        return Err(Error::BadTrace { trace });
    }
    let spec = hermitian_eig(a)?;
    let min = spec.eigenvalues().last().copied().unwrap_or(0.0);
    if min < -tol::PSD_SLACK {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(spec)
}

/// Von Neumann entropy in bits. Rejects inputs that are not states
/// (eigenvalue below -1e-10 or trace away from 1).
pub fn von_neumann_entropy(a: &HermitianMatrix) -> Result<f64> {
    let spec = validate_state_spectrum(a)?;
    Ok(shannon_entropy_bits(spec.eigenvalues()))
}

/// Relative entropy S(ρ‖σ) in bits; `f64::INFINITY` when the support of ρ
/// leaks outside the support of σ.
pub fn relative_entropy(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let rs = validate_state_spectrum(rho)?;
    let ss = validate_state_spectrum(sigma)?;

    // Tr ρ log ρ
    let mut value = -shannon_entropy_bits(rs.eigenvalues());

    // -Tr ρ log σ = -Σ_j ⟨v_j|ρ|v_j⟩ log s_j
    for (j, &s) in ss.eigenvalues().iter().enumerate() {
        let v = ss.eigenvectors().column(j);
        let p = (v.adjoint() * rho.matrix() * v)[(0, 0)].re.max(0.0);
        if s > tol::EIGENVALUE_CLAMP {
            value -= p * s.log2();
        } else if p > tol::PSD_SLACK {
            return Ok(f64::INFINITY);
        }
    }
    Ok(value.max(0.0))
}

/// Largest elementwise |a_ij - b_ij|; the cross-check metric between
/// execution paths.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst
}

/// n-fold Kronecker power; `pow = 0` yields the 1x1 identity (empty factor).
pub fn kron_power(a: &CMatrix, pow: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..pow {
        out = kron(&out, a);
    }
    out
}
