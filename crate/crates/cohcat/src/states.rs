//! States over a labeled tensor-factor layout with a designated incoherent
//! basis (each factor's computational basis), plus the dephasing maps, the
//! quantum-incoherent predicate, and seeded random state generation.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{
    self, dephase_positions, hermitian_eig, kron, partial_trace, trace_distance, CMatrix, CVector,
    HermitianMatrix,
};
use crate::{tol, Error, Result};

/// One tensor factor: a label unique within its layout, the factor
/// dimension, and the party holding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
    pub party: String,
}

/// Ordered registry of tensor factors defining subsystem addressing.
/// The incoherent reference basis is implicitly the computational basis of
/// each factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemLayout {
    factors: Vec<Factor>,
}

impl SystemLayout {
    pub fn new(factors: &[(&str, usize, &str)]) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .iter()
            .map(|&(label, dim, party)| Factor {
                label: label.to_string(),
                dim,
                party: party.to_string(),
            })
            .collect();
        Self::from_factors(factors)
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Layout("layout needs at least one factor".into()));
        }
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::Layout(format!("factor `{}` has dimension 0", f.label)));
            }
        }
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::Layout(format!("duplicate factor label `{}`", f.label)));
            }
        }
        Ok(Self { factors })
    }

    /// Single-factor layout.
    pub fn single(label: &str, dim: usize, party: &str) -> Result<Self> {
        Self::new(&[(label, dim, party)])
    }

    /// Total Hilbert-space dimension (product of factor dims).
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Positions of the given labels, sorted ascending. Unknown labels and
    /// repeats are rejected.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            let p = self
                .position(l)
                .ok_or_else(|| Error::UnknownSubsystem(l.to_string()))?;
            if out.contains(&p) {
                return Err(Error::Layout(format!("label `{l}` listed twice")));
            }
            out.push(p);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Labels owned by a party, in layout order.
    pub fn party_labels(&self, party: &str) -> Vec<String> {
        self.factors
            .iter()
            .filter(|f| f.party == party)
            .map(|f| f.label.clone())
            .collect()
    }

    /// Complement of a label set, in layout order.
    pub fn complement(&self, labels: &[&str]) -> Vec<String> {
        self.factors
            .iter()
            .filter(|f| !labels.contains(&f.label.as_str()))
            .map(|f| f.label.clone())
            .collect()
    }

    /// Sub-layout of the factors at `positions` (given in the desired order).
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let factors = positions
            .iter()
            .map(|&p| {
                self.factors
                    .get(p)
                    .cloned()
                    .ok_or_else(|| Error::Layout(format!("position {p} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(factors)
    }

    /// Concatenation; labels must stay unique across both operands.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(factors)
    }

    /// Layout after moving factor `k` to position `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.factors.len() {
            return Err(Error::Layout("permutation length mismatch".into()));
        }
        let mut factors = vec![None; self.factors.len()];
        for (k, &p) in perm.iter().enumerate() {
            if p >= factors.len() || factors[p].is_some() {
                return Err(Error::Layout("not a permutation".into()));
            }
            factors[p] = Some(self.factors[k].clone());
        }
        Self::from_factors(factors.into_iter().map(|f| f.unwrap()).collect())
    }
}

// JSON form: [[label, dim, party], ...]
impl Serialize for SystemLayout {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<(&str, usize, &str)> = self
            .factors
            .iter()
            .map(|f| (f.label.as_str(), f.dim, f.party.as_str()))
            .collect();
        triples.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SystemLayout {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let triples: Vec<(String, usize, String)> = Vec::deserialize(deserializer)?;
        let factors = triples
            .into_iter()
            .map(|(label, dim, party)| Factor { label, dim, party })
            .collect();
        SystemLayout::from_factors(factors).map_err(D::Error::custom)
    }
}

/// Positive unit-trace Hermitian matrix over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: SystemLayout,
    matrix: HermitianMatrix,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity (within the
    /// tolerance ladder) before wrapping.
    pub fn new(layout: SystemLayout, matrix: HermitianMatrix) -> Result<Self> {
        if matrix.dim() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                actual: matrix.dim(),
            });
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > tol::STATE_TRACE {
            return Err(Error::BadTrace { trace });
        }
        let spec = hermitian_eig(&matrix)?;
        let min = spec.eigenvalues().last().copied().unwrap_or(0.0);
        if min < -tol::PSD_SLACK {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { layout, matrix })
    }

    pub fn from_matrix(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        Self::new(layout, HermitianMatrix::new(matrix)?)
    }

    /// Diagonal (incoherent) state from a probability vector.
    pub fn from_diagonal(layout: SystemLayout, probs: &[f64]) -> Result<Self> {
        Self::new(layout, HermitianMatrix::from_diagonal(probs))
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.dim();
        let m = HermitianMatrix::from_diagonal(&vec![1.0 / d as f64; d]);
        Self { layout, matrix: m }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).diagonal().iter().map(|c| c.re).sum()
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        linalg::von_neumann_entropy(&self.matrix).expect("validated state")
    }

    /// Diagonal of the matrix as real populations.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix().diagonal().iter().map(|c| c.re).collect()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.tensor(&other.layout)?;
        let m = linalg::tensor_product(&self.matrix, &other.matrix);
        Self::new(layout, m)
    }

    /// Marginal on the named factors (kept in layout order).
    pub fn partial_trace_keep(&self, labels: &[&str]) -> Result<Self> {
        let keep = self.layout.positions(labels)?;
        if keep.len() == self.layout.len() {
            return Ok(self.clone());
        }
        let m = partial_trace(&self.matrix, &self.layout.dims(), &keep)?;
        Self::new(self.layout.select(&keep)?, m)
    }

    /// Marginal after tracing out the named factors. Tracing out nothing is
    /// the identity; tracing out everything is rejected.
    pub fn partial_trace_out(&self, labels: &[&str]) -> Result<Self> {
        if labels.is_empty() {
            return Ok(self.clone());
        }
        let drop = self.layout.positions(labels)?;
        let keep: Vec<usize> = (0..self.layout.len()).filter(|p| !drop.contains(p)).collect();
        if keep.is_empty() {
            return Err(Error::Layout("cannot trace out every factor".into()));
        }
        let m = partial_trace(&self.matrix, &self.layout.dims(), &keep)?;
        Self::new(self.layout.select(&keep)?, m)
    }

    /// Trace distance to another state of the same total dimension.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        trace_distance(&self.matrix, &other.matrix)
    }

    /// Convex combination (1-w)·self + w·other on self's layout.
    pub fn mix(&self, other: &Self, weight_other: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight_other) {
            return Err(Error::Invalid(format!(
                "mixing weight must sit in [0, 1], got {weight_other}"
            )));
        }
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let w = Complex64::new(weight_other, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let m = self.matrix() * (one - w) + other.matrix() * w;
        Self::new(self.layout.clone(), HermitianMatrix::new_unchecked(m))
    }
}

// JSON form: {"layout": [[label, dim, party], ...], "matrix": [[re, im], ...]}
// with the matrix row-major. Round-trips exactly (serde_json emits shortest
// representations that parse back to the same f64).
#[derive(Serialize, Deserialize)]
struct DensityOperatorRepr {
    layout: SystemLayout,
    matrix: Vec<[f64; 2]>,
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut matrix = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = self.matrix()[(r, c)];
                matrix.push([z.re, z.im]);
            }
        }
        DensityOperatorRepr {
            layout: self.layout.clone(),
            matrix,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DensityOperatorRepr::deserialize(deserializer)?;
        let n = repr.layout.dim();
        if repr.matrix.len() != n * n {
            return Err(D::Error::custom(format!(
                "matrix has {} entries, layout dimension {} needs {}",
                repr.matrix.len(),
                n,
                n * n
            )));
        }
        let mut m = CMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let [re, im] = repr.matrix[r * n + c];
                m[(r, c)] = Complex64::new(re, im);
            }
        }
        DensityOperator::from_matrix(repr.layout, m).map_err(D::Error::custom)
    }
}

/// Unit vector over a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SystemLayout,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(layout: SystemLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::STATE_NORM {
            return Err(Error::Invalid(format!("state vector norm {norm} is not 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Basis ket |index⟩.
    pub fn basis_ket(layout: SystemLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::Invalid(format!("basis index {index} out of range {d}")));
        }
        let mut v = CVector::zeros(d);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes: v })
    }

    pub fn from_real(layout: SystemLayout, amplitudes: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(layout, v)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// |ψ⟩⟨ψ| as a density operator.
    pub fn density(&self) -> DensityOperator {
        let outer = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::new(self.layout.clone(), HermitianMatrix::new_unchecked(outer))
            .expect("outer product of a unit vector is a state")
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.tensor(&other.layout)?;
        let a = CMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice());
        let b = CMatrix::from_column_slice(other.dim(), 1, other.amplitudes.as_slice());
        let v = kron(&a, &b);
        let amplitudes = CVector::from_column_slice(v.as_slice());
        Self::new(layout, amplitudes)
    }

    /// Probabilities |ψ_i|² in the reference basis.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Entropy in bits of the dephased state, S(Δ|ψ⟩⟨ψ|).
    pub fn dephased_entropy(&self) -> f64 {
        linalg::shannon_entropy_bits(&self.basis_probabilities())
    }
}

/// Zeroes matrix elements off-diagonal in the selected factors' indices.
/// Passing every label gives the full dephasing map Δ; a party's labels give
/// the local map (e.g. Δ^B). Idempotent and trace preserving.
pub fn dephase(rho: &DensityOperator, subsystems: &[&str]) -> Result<DensityOperator> {
    let positions = rho.layout().positions(subsystems)?;
    let m = dephase_positions(rho.hermitian(), &rho.layout().dims(), &positions)?;
    DensityOperator::new(rho.layout().clone(), m)
}

/// Full dephasing Δ: projection onto the reference-basis diagonal.
pub fn dephase_all(rho: &DensityOperator) -> DensityOperator {
    let labels: Vec<&str> = rho.layout().factors().iter().map(|f| f.label.as_str()).collect();
    dephase(rho, &labels).expect("all labels are valid")
}

/// Uniform-superposition state (|0⟩ + ... + |d-1⟩)/√d on a fresh
/// single-factor layout labeled "S".
pub fn maximally_coherent(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::Invalid(format!("maximally coherent state needs d ≥ 2, got {d}")));
    }
    let layout = SystemLayout::single("S", d, "A")?;
    let amp = 1.0 / (d as f64).sqrt();
    PureState::from_real(layout, &vec![amp; d])
}

/// True iff every off-diagonal entry is below [`tol::OFF_DIAGONAL`] in
/// magnitude, i.e. the state is diagonal in the reference basis.
pub fn is_incoherent(rho: &DensityOperator) -> bool {
    let n = rho.dim();
    let m = rho.matrix();
    for r in 0..n {
        for c in 0..n {
            if r != c && m[(r, c)].norm() >= tol::OFF_DIAGONAL {
                return false;
            }
        }
    }
    true
}

/// True iff `rho` is invariant under dephasing party B's factors, the
/// fixed-point characterization of the block-diagonal form
/// Σ_i p_i σ_i^A ⊗ |i⟩⟨i|^B.
pub fn is_quantum_incoherent(rho: &DensityOperator, party_b: &[&str]) -> Result<bool> {
    let dephased = dephase(rho, party_b)?;
    Ok(rho.distance(&dephased)? < tol::QI_DISTANCE)
}

fn complex_gaussian_vector(rng: &mut ChaCha12Rng, len: usize) -> CVector {
    CVector::from_iterator(
        len,
        (0..len).map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        }),
    )
}

/// Haar-distributed pure state, reproducible per seed.
pub fn random_pure(layout: &SystemLayout, seed: u64) -> PureState {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let d = layout.dim();
    let mut v = complex_gaussian_vector(&mut rng, d);
    let mut norm = v.norm();
    // astronomically unlikely, but keep the constructor total
    while norm < 1e-12 {
        v = complex_gaussian_vector(&mut rng, d);
        norm = v.norm();
    }
    v /= Complex64::new(norm, 0.0);
    PureState::new(layout.clone(), v).expect("normalized vector")
}

/// Ginibre-induced random density operator GG†/Tr(GG†) with G of width
/// `rank`; reproducible per seed.
pub fn random_density(layout: &SystemLayout, rank: usize, seed: u64) -> Result<DensityOperator> {
    let d = layout.dim();
    if rank == 0 || rank > d {
        return Err(Error::Invalid(format!("rank {rank} out of range 1..={d}")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut g = CMatrix::zeros(d, rank);
    for c in 0..rank {
        g.set_column(c, &complex_gaussian_vector(&mut rng, d));
    }
    let mut rho = &g * g.adjoint();
    let trace: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    rho /= Complex64::new(trace, 0.0);
    // enforce exact hermiticity against rounding in the product
    let sym = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityOperator::new(layout.clone(), HermitianMatrix::new_unchecked(sym))
}

/// Standard purification Σ_i √λ_i |e_i⟩|i⟩ on `layout ⊗ ref`, where the
/// reference factor has the same dimension as the input and a label derived
/// from "ref" (made unique if taken). The reference marginal reproduces the
/// input.
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    let spec = hermitian_eig(rho.hermitian())?;
    let d = rho.dim();

    let mut label = "ref".to_string();
    let mut k = 0usize;
    while rho.layout().position(&label).is_some() {
        k += 1;
        label = format!("ref{k}");
    }
    let ref_layout = SystemLayout::single(&label, d, "ref")?;
    let layout = rho.layout().tensor(&ref_layout)?;

    let mut v = CVector::zeros(d * d);
    for (i, &lambda) in spec.eigenvalues().iter().enumerate() {
        if lambda <= tol::EIGENVALUE_CLAMP {
            continue;
        }
        let coeff = Complex64::new(lambda.sqrt(), 0.0);
        let e = spec.eigenvectors().column(i);
        for row in 0..d {
            v[row * d + i] += coeff * e[row];
        }
    }
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    PureState::new(layout, v)
}
