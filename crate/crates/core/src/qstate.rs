//! Dense complex state algebra over explicitly laid-out subsystems.
//!
//! Every state carries a [`SubsystemLayout`]; subsystem `0` is the most
//! significant digit of the computational-basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LabError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for Hermiticity, normalization and unitarity checks.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are treated as exact zeros in entropies.
pub const EIGEN_ZERO: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(LabError::InvalidLayout("no subsystems".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(LabError::InvalidLayout(format!("subsystem {pos} has dimension 0")));
        }
        Ok(Self { dims })
    }

    /// `count` subsystems of dimension `d`.
    pub fn uniform(d: usize, count: usize) -> Result<Self> {
        Self::new(vec![d; count])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SubsystemLayout) -> SubsystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SubsystemLayout { dims }
    }

    pub fn select(&self, indices: &[usize]) -> Result<SubsystemLayout> {
        self.check_indices(indices)?;
        Ok(SubsystemLayout { dims: indices.iter().map(|&i| self.dims[i]).collect() })
    }

    /// Indices not in `indices`, ascending.
    pub fn complement(&self, indices: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !indices.contains(i)).collect()
    }

    pub(crate) fn check_indices(&self, indices: &[usize]) -> Result<()> {
        let bad = || LabError::InvalidIndices { indices: indices.to_vec(), count: self.len() };
        for (k, &i) in indices.iter().enumerate() {
            if i >= self.len() || indices[..k].contains(&i) {
                return Err(bad());
            }
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for k in (0..self.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// For the permuted layout whose subsystem `k` is old subsystem
    /// `order[k]`, maps each new flat index to the old flat index.
    fn permutation_map(&self, order: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let new_dims: Vec<usize> = order.iter().map(|&i| self.dims[i]).collect();
        let old_strides: Vec<usize> = order.iter().map(|&i| strides[i]).collect();
        let total = self.total();
        let mut map = Vec::with_capacity(total);
        let mut digits = vec![0usize; order.len()];
        let mut old = 0usize;
        for _ in 0..total {
            map.push(old);
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                old += old_strides[k];
                if digits[k] < new_dims[k] {
                    break;
                }
                old -= old_strides[k] * new_dims[k];
                digits[k] = 0;
            }
        }
        map
    }

    fn full_order(&self, front: &[usize]) -> Vec<usize> {
        let mut order = front.to_vec();
        order.extend(self.complement(front));
        order
    }
}

fn inverse_order(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (k, &i) in order.iter().enumerate() {
        inv[i] = k;
    }
    inv
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation of `m` from Hermiticity.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(op ⊗ I) m`, with `op` acting on the leading factor of `m`'s rows.
fn left_apply(op: &CMatrix, m: &CMatrix) -> CMatrix {
    let dt = op.nrows();
    let rest = m.nrows() / dt;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        for t in 0..dt {
            for s in 0..dt {
                let w = op[(t, s)];
                if w == ZERO {
                    continue;
                }
                for r in 0..rest {
                    out[(t * rest + r, c)] += w * m[(s * rest + r, c)];
                }
            }
        }
    }
    out
}

/// `m (op ⊗ I)†`.
fn right_apply_adjoint(op: &CMatrix, m: &CMatrix) -> CMatrix {
    let dt = op.nrows();
    let rest = m.ncols() / dt;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for t in 0..dt {
        for s in 0..dt {
            let w = op[(t, s)].conj();
            if w == ZERO {
                continue;
            }
            for r in 0..rest {
                let (dst, src) = (t * rest + r, s * rest + r);
                for x in 0..m.nrows() {
                    out[(x, dst)] += m[(x, src)] * w;
                }
            }
        }
    }
    out
}

fn permute_matrix(m: &CMatrix, layout: &SubsystemLayout, order: &[usize]) -> CMatrix {
    let map = layout.permutation_map(order);
    let n = map.len();
    CMatrix::from_fn(n, n, |r, c| m[(map[r], map[c])])
}

/// `m ↦ (op on targets) m (op on targets)†` for any square operator `m`
/// laid out as `layout`; targets are taken in the order given.
pub fn conjugate_subsystems(m: &CMatrix, layout: &SubsystemLayout, op: &CMatrix, targets: &[usize]) -> Result<CMatrix> {
    let sub = layout.select(targets)?;
    if op.nrows() != sub.total() || op.ncols() != sub.total() {
        return Err(LabError::DimensionMismatch { expected: sub.total(), got: op.nrows() });
    }
    if m.nrows() != layout.total() || m.ncols() != layout.total() {
        return Err(LabError::DimensionMismatch { expected: layout.total(), got: m.nrows() });
    }
    let order = layout.full_order(targets);
    let moved_layout = layout.select(&order)?;
    let moved = permute_matrix(m, layout, &order);
    let both = right_apply_adjoint(op, &left_apply(op, &moved));
    Ok(permute_matrix(&both, &moved_layout, &inverse_order(&order)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(LabError::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let dev = unitarity_deviation(&entries);
        if dev > STATE_TOL {
            return Err(LabError::NotUnitary(dev));
        }
        Ok(Self { entries })
    }

    pub(crate) fn new_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn identity(d: usize) -> Self {
        Self { entries: CMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { entries: self.entries.transpose() }
    }

    pub fn conjugate(&self) -> Self {
        Self { entries: self.entries.conjugate() }
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Self {
        Self { entries: &self.entries * &other.entries }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            acc = &acc * &self.entries;
        }
        Self { entries: acc }
    }

    pub fn tensor(&self, other: &UnitaryMatrix) -> Self {
        Self { entries: self.entries.kronecker(&other.entries) }
    }
}

/// `max |U U† − I|` entrywise.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m * m.adjoint() - CMatrix::identity(n, n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    layout: SubsystemLayout,
}

impl PureState {
    pub fn new(amplitudes: CVector, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total() {
            return Err(LabError::DimensionMismatch { expected: layout.total(), got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(LabError::NotNormalized(norm));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales `amplitudes` to unit norm before validating.
    pub fn normalized(amplitudes: CVector, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LabError::NotNormalized(norm));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub(crate) fn new_unchecked(amplitudes: CVector, layout: SubsystemLayout) -> Self {
        Self { amplitudes, layout }
    }

    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let total = layout.total();
        if index >= total {
            return Err(LabError::InvalidArgument(format!("basis index {index} out of range {total}")));
        }
        let mut amps = CVector::zeros(total);
        amps[index] = ONE;
        Ok(Self { amplitudes: amps, layout })
    }

    /// Computational basis state with one digit per subsystem.
    pub fn basis_digits(layout: SubsystemLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() || digits.iter().zip(layout.dims()).any(|(&x, &d)| x >= d) {
            return Err(LabError::InvalidArgument(format!("digits {digits:?} do not fit {:?}", layout.dims())));
        }
        let index = digits.iter().zip(layout.dims()).fold(0, |acc, (&x, &d)| acc * d + x);
        Self::basis(layout, index)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> DensityMatrix {
        let v = &self.amplitudes;
        DensityMatrix { entries: v * v.adjoint(), layout: self.layout.clone() }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            layout: self.layout.concat(&other.layout),
        }
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        if order.len() != self.layout.len() {
            return Err(LabError::InvalidIndices { indices: order.to_vec(), count: self.layout.len() });
        }
        self.layout.check_indices(order)?;
        let map = self.layout.permutation_map(order);
        let amps = CVector::from_iterator(map.len(), map.iter().map(|&old| self.amplitudes[old]));
        Ok(PureState { amplitudes: amps, layout: self.layout.select(order)? })
    }

    /// Applies `op` to the listed subsystems, in the order given.
    pub fn apply(&self, op: &CMatrix, targets: &[usize]) -> Result<PureState> {
        let sub = self.layout.select(targets)?;
        if op.nrows() != sub.total() || op.ncols() != sub.total() {
            return Err(LabError::DimensionMismatch { expected: sub.total(), got: op.nrows() });
        }
        let order = self.layout.full_order(targets);
        let moved = self.permute(&order)?;
        let col = CMatrix::from_column_slice(moved.dim(), 1, moved.amplitudes.as_slice());
        let applied = left_apply(op, &col);
        let state = PureState { amplitudes: applied.column(0).into_owned(), layout: moved.layout };
        state.permute(&inverse_order(&order))
    }

    pub fn apply_unitary(&self, u: &UnitaryMatrix, targets: &[usize]) -> Result<PureState> {
        self.apply(u.matrix(), targets)
    }

    /// Unnormalized branch for outcome `outcome` of a computational-basis
    /// measurement on `target`; its squared norm is the probability.
    pub fn project(&self, target: usize, outcome: usize) -> Result<PureState> {
        self.layout.check_indices(&[target])?;
        let dims = self.layout.dims();
        let d = dims[target];
        if outcome >= d {
            return Err(LabError::InvalidArgument(format!("outcome {outcome} out of range {d}")));
        }
        let stride: usize = dims[target + 1..].iter().product();
        let amplitudes = CVector::from_fn(self.dim(), |i, _| {
            if (i / stride) % d == outcome {
                self.amplitudes[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(PureState { amplitudes, layout: self.layout.clone() })
    }

    /// Reduced state on `keep`, via `M M†` on the reshaped amplitude matrix.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let kept = self.layout.select(keep)?;
        let order = self.layout.full_order(keep);
        let moved = self.permute(&order)?;
        let m = reshape_rows(&moved.amplitudes, kept.total());
        Ok(DensityMatrix { entries: &m * m.adjoint(), layout: kept })
    }

    /// Purity `Tr ρ_S²` of the reduced state on `subsystems`; an empty set gives 1.
    pub fn reduced_purity(&self, subsystems: &[usize]) -> Result<f64> {
        if subsystems.is_empty() {
            self.layout.check_indices(subsystems)?;
            return Ok(self.amplitudes.norm_squared().powi(2));
        }
        let kept = self.layout.select(subsystems)?;
        let order = self.layout.full_order(subsystems);
        let moved = self.permute(&order)?;
        let m = reshape_rows(&moved.amplitudes, kept.total());
        // the smaller Gram matrix has the same nonzero spectrum
        let gram = if m.nrows() <= m.ncols() { &m * m.adjoint() } else { m.adjoint() * &m };
        Ok(gram.iter().map(|z| z.norm_sqr()).sum())
    }
}

/// Row-major reshape of a vector into `rows × (len / rows)`.
fn reshape_rows(v: &CVector, rows: usize) -> CMatrix {
    let cols = v.len() / rows;
    CMatrix::from_fn(rows, cols, |r, c| v[r * cols + c])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    /// Validates size, Hermiticity, unit trace and positivity.
    pub fn new(entries: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        let rho = Self::checked_shape(entries, layout)?;
        let min = rho.eigenvalues()?.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -STATE_TOL {
            return Err(LabError::NegativeEigenvalue(min));
        }
        Ok(rho)
    }

    fn checked_shape(entries: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        let total = layout.total();
        if entries.nrows() != total || entries.ncols() != total {
            return Err(LabError::DimensionMismatch { expected: total, got: entries.nrows() });
        }
        let dev = hermitian_deviation(&entries);
        if dev > STATE_TOL {
            return Err(LabError::NotHermitian(dev));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(LabError::BadTrace(tr.re));
        }
        Ok(Self { entries, layout })
    }

    pub(crate) fn new_unchecked(entries: CMatrix, layout: SubsystemLayout) -> Self {
        Self { entries, layout }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total();
        Self { entries: CMatrix::identity(n, n).unscale(n as f64), layout }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { entries: self.entries.kronecker(&other.entries), layout: self.layout.concat(&other.layout) }
    }

    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        if order.len() != self.layout.len() {
            return Err(LabError::InvalidIndices { indices: order.to_vec(), count: self.layout.len() });
        }
        self.layout.check_indices(order)?;
        let entries = permute_matrix(&self.entries, &self.layout, order);
        Ok(DensityMatrix { entries, layout: self.layout.select(order)? })
    }

    /// `ρ ↦ (op on targets) ρ (op on targets)†`, targets in the order given.
    pub fn conjugate_by(&self, op: &CMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        let entries = conjugate_subsystems(&self.entries, &self.layout, op, targets)?;
        Ok(DensityMatrix { entries, layout: self.layout.clone() })
    }

    pub fn apply_unitary(&self, u: &UnitaryMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        self.conjugate_by(u.matrix(), targets)
    }

    /// Unnormalized post-measurement state for outcome `outcome` of a
    /// computational-basis measurement on `target`; its trace is the probability.
    pub fn project(&self, target: usize, outcome: usize) -> Result<DensityMatrix> {
        let d = *self.layout.select(&[target])?.dims().first().unwrap_or(&0);
        if outcome >= d {
            return Err(LabError::InvalidArgument(format!("outcome {outcome} out of range {d}")));
        }
        let mut proj = CMatrix::zeros(d, d);
        proj[(outcome, outcome)] = ONE;
        self.conjugate_by(&proj, &[target])
    }

    pub fn scaled(&self, factor: f64) -> DensityMatrix {
        DensityMatrix { entries: self.entries.scale(factor), layout: self.layout.clone() }
    }

    /// Convex combination `Σ p_i ρ_i`; all states must share a layout.
    pub fn mixture(weighted: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let (_, first) = weighted.first().ok_or_else(|| LabError::InvalidProbabilities("empty mixture".into()))?;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (p, rho) in weighted {
            if rho.layout != first.layout {
                return Err(LabError::InvalidLayout("mixture members differ in layout".into()));
            }
            acc += rho.entries.scale(*p);
        }
        Ok(DensityMatrix { entries: acc, layout: first.layout.clone() })
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// Hermitian eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let dev = hermitian_deviation(&self.entries);
        if dev > STATE_TOL {
            return Err(LabError::NotHermitian(dev));
        }
        let herm = (&self.entries + self.entries.adjoint()).scale(0.5);
        let mut vals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(LabError::DimensionMismatch { expected: self.dim(), got: psi.dim() });
        }
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.entries * v)[(0, 0)].re)
    }
}

/// Kronecker product with concatenated layouts.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for PureState {
    fn tensor(&self, other: &Self) -> Self {
        PureState::tensor(self, other)
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        DensityMatrix::tensor(self, other)
    }
}

impl Tensor for UnitaryMatrix {
    fn tensor(&self, other: &Self) -> Self {
        UnitaryMatrix::tensor(self, other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Reduced state on `keep`; the output layout lists the kept subsystems in
/// the order given.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let kept = rho.layout.select(keep)?;
    if keep.is_empty() {
        return Err(LabError::InvalidIndices { indices: vec![], count: rho.layout.len() });
    }
    let order = rho.layout.full_order(keep);
    let moved = rho.permute(&order)?;
    let dk = kept.total();
    let rest = moved.dim() / dk;
    let entries = CMatrix::from_fn(dk, dk, |a, b| (0..rest).map(|r| moved.entries[(a * rest + r, b * rest + r)]).sum());
    Ok(DensityMatrix { entries, layout: kept })
}

/// Von Neumann entropy in bits.
///
/// Eigenvalues in `[-1e-10, 1e-12]` count as zero; anything more negative
/// is rejected.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues()? {
        if lambda < -STATE_TOL {
            return Err(LabError::NegativeEigenvalue(lambda));
        }
        if lambda > EIGEN_ZERO {
            s -= lambda * lambda.log2();
        }
    }
    Ok(s.max(0.0))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries.iter().map(|z| z.norm_sqr()).sum()
}

/// `(1/√d) Σ_j |j⟩|j⟩` on layout `[d, d]`.
pub fn max_entangled_state(d: usize) -> Result<PureState> {
    let layout = SubsystemLayout::uniform(d, 2)?;
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = amp;
    }
    Ok(PureState::new_unchecked(v, layout))
}

/// Swap `F|i⟩|j⟩ = |j⟩|i⟩` on two `d`-dimensional systems.
pub fn swap_operator(d: usize) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "dimension must be positive" });
    }
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = ONE;
        }
    }
    Ok(UnitaryMatrix::new_unchecked(f))
}

/// `ω = exp(2πi/d)` raised to `k`.
pub fn root_of_unity(d: usize, k: i64) -> Complex64 {
    let k = k.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / d as f64)
}

/// Shift `X|j⟩ = |j+1 mod d⟩` and clock `Z|j⟩ = ω^j|j⟩`.
pub fn generalized_paulis(d: usize) -> Result<(UnitaryMatrix, UnitaryMatrix)> {
    if d < 2 {
        return Err(LabError::UnsupportedDimension { dim: d, reason: "Paulis need d >= 2" });
    }
    let mut x = CMatrix::zeros(d, d);
    let mut z = CMatrix::zeros(d, d);
    for j in 0..d {
        x[((j + 1) % d, j)] = ONE;
        z[(j, j)] = root_of_unity(d, j as i64);
    }
    Ok((UnitaryMatrix::new_unchecked(x), UnitaryMatrix::new_unchecked(z)))
}

/// Discrete Fourier matrix `F_jk = ω^{jk}/√d`.
pub fn fourier_matrix(d: usize) -> UnitaryMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    UnitaryMatrix::new_unchecked(CMatrix::from_fn(d, d, |j, k| root_of_unity(d, (j * k) as i64) * norm))
}
