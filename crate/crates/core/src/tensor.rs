/*
Copyright 2026 The gmedim Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Dense complex linear algebra on n-qudit registers.
//!
//! Sites are addressed 0-based in every numeric routine; site 0 is the most
//! significant base-d digit of a flattened index. [`Bipartition`] also keeps
//! the 1-based particle labels used when printing.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tensor structure of a register of `n` particles of local dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterShape {
    n: usize,
    d: usize,
}

impl RegisterShape {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_limit(n, d, Tolerances::default().max_dim)
    }

    pub fn with_limit(n: usize, d: usize, limit: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidShape("need at least one particle".into()));
        }
        if d < 2 {
            return Err(Error::InvalidShape(format!("local dimension {d} < 2")));
        }
        match checked_pow(d, n) {
            Some(dim) if dim <= limit => Ok(RegisterShape { n, d }),
            _ => Err(Error::Budget { n, d, limit }),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Total dimension d^n.
    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    /// Dimension of a block of `k` sites.
    pub fn block_dim(&self, k: usize) -> usize {
        self.d.pow(k as u32)
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = index % self.d;
            index /= self.d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &k| acc * self.d + k)
    }

    fn check_sites(&self, sites: &[usize], proper: bool) -> Result<()> {
        if sites.is_empty() {
            return Err(Error::InvalidSubset("empty site set".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!("{sites:?} is not strictly increasing")));
        }
        if *sites.last().unwrap() >= self.n {
            return Err(Error::InvalidSubset(format!("{sites:?} out of range for n = {}", self.n)));
        }
        if proper && sites.len() == self.n {
            return Err(Error::InvalidSubset("site set must be a proper subset".into()));
        }
        Ok(())
    }

    pub fn complement(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.n).filter(|s| !sites.contains(s)).collect()
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Index bookkeeping for splitting sites into a kept block and the rest.
///
/// `compose[k * rest_dim + r]` is the full index whose kept digits spell `k`
/// and whose remaining digits spell `r`.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub keep_dim: usize,
    pub rest_dim: usize,
    pub compose: Vec<usize>,
}

impl Split {
    pub fn new(shape: RegisterShape, keep: &[usize]) -> Split {
        let rest = shape.complement(keep);
        let keep_dim = shape.block_dim(keep.len());
        let rest_dim = shape.block_dim(rest.len());
        let d = shape.d();
        let mut compose = vec![0; shape.dim()];
        for full in 0..shape.dim() {
            let digits = shape.digits(full);
            let k = keep.iter().fold(0, |acc, &s| acc * d + digits[s]);
            let r = rest.iter().fold(0, |acc, &s| acc * d + digits[s]);
            compose[k * rest_dim + r] = full;
        }
        Split { keep_dim, rest_dim, compose }
    }

    pub fn trace_out(&self, m: &CMatrix) -> CMatrix {
        let (kd, rd) = (self.keep_dim, self.rest_dim);
        CMatrix::from_fn(kd, kd, |i, j| {
            let mut acc = ZERO;
            for r in 0..rd {
                acc += m[(self.compose[i * rd + r], self.compose[j * rd + r])];
            }
            acc
        })
    }

    /// `reduced ⊗ 𝟙` on the remaining sites, scaled by `scale`, added into `out`.
    pub fn embed_into(&self, reduced: &CMatrix, scale: f64, out: &mut CMatrix) {
        let (kd, rd) = (self.keep_dim, self.rest_dim);
        for i in 0..kd {
            for j in 0..kd {
                let v = reduced[(i, j)] * scale;
                if v == ZERO {
                    continue;
                }
                for r in 0..rd {
                    out[(self.compose[i * rd + r], self.compose[j * rd + r])] += v;
                }
            }
        }
    }

    /// Amplitudes arranged as a keep_dim × rest_dim matrix.
    pub fn reshape(&self, amp: &CVector) -> CMatrix {
        let rd = self.rest_dim;
        CMatrix::from_fn(self.keep_dim, rd, |k, r| amp[self.compose[k * rd + r]])
    }
}

/// Anything carrying a register shape and a square matrix on it.
pub trait Operator {
    fn shape(&self) -> RegisterShape;
    fn matrix(&self) -> &CMatrix;
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    shape: RegisterShape,
    amp: CVector,
}

impl PureState {
    pub fn new(shape: RegisterShape, amp: CVector) -> Result<Self> {
        if amp.len() != shape.dim() {
            return Err(Error::DimensionMismatch { expected: shape.dim(), got: amp.len() });
        }
        let norm = amp.norm();
        if (norm - 1.0).abs() > Tolerances::default().norm {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { shape, amp })
    }

    /// Rescales `amp` to unit norm.
    pub fn normalized(shape: RegisterShape, amp: CVector) -> Result<Self> {
        if amp.len() != shape.dim() {
            return Err(Error::DimensionMismatch { expected: shape.dim(), got: amp.len() });
        }
        let norm = amp.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { shape, amp: amp.unscale(norm) })
    }

    pub fn basis(shape: RegisterShape, index: usize) -> Result<Self> {
        if index >= shape.dim() {
            return Err(Error::DimensionMismatch { expected: shape.dim(), got: index });
        }
        let mut amp = CVector::zeros(shape.dim());
        amp[index] = ONE;
        Ok(PureState { shape, amp })
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amp
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amp.dotc(&other.amp)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { shape: self.shape, mat: outer(&self.amp, &self.amp) }
    }

    /// Reduced state on `keep`, computed from the amplitudes without forming ψψ†.
    pub fn reduced(&self, keep: &[usize]) -> Result<CMatrix> {
        self.shape.check_sites(keep, false)?;
        if keep.len() == self.shape.n() {
            return Ok(outer(&self.amp, &self.amp));
        }
        let t = Split::new(self.shape, keep).reshape(&self.amp);
        Ok(&t * t.adjoint())
    }
}

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    shape: RegisterShape,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(shape: RegisterShape, mat: CMatrix) -> Result<Self> {
        let tol = Tolerances::default();
        check_square(&mat, shape.dim())?;
        let dev = hermitian_deviation(&mat);
        if dev > tol.hermitian {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::Trace(tr.re));
        }
        let min = eig_desc(&mat)?.last().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix { shape, mat })
    }

    /// For matrices valid by construction.
    pub(crate) fn assume_valid(shape: RegisterShape, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), shape.dim());
        DensityMatrix { shape, mat }
    }

    pub fn maximally_mixed(shape: RegisterShape) -> Self {
        let dim = shape.dim();
        DensityMatrix { shape, mat: CMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch { expected: self.shape.dim(), got: other.shape.dim() });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Visibility(w));
        }
        Ok(DensityMatrix { shape: self.shape, mat: self.mat.scale(w) + other.mat.scale(1.0 - w) })
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }
}

impl Operator for DensityMatrix {
    fn shape(&self) -> RegisterShape {
        self.shape
    }
    fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Hermitian operator, e.g. a witness.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    shape: RegisterShape,
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(shape: RegisterShape, mat: CMatrix) -> Result<Self> {
        check_square(&mat, shape.dim())?;
        let dev = hermitian_deviation(&mat);
        if dev > Tolerances::default().hermitian {
            return Err(Error::NotHermitian(dev));
        }
        Ok(HermitianOperator { shape, mat })
    }

    /// Real expectation value tr(Oρ).
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if self.shape != rho.shape {
            return Err(Error::DimensionMismatch { expected: self.shape.dim(), got: rho.shape.dim() });
        }
        // tr(OX) = Σ_ij O_ij X_ji, and X is Hermitian, so X_ji = conj(X_ij).
        Ok(self.mat.zip_fold(&rho.mat, 0.0, |acc, o, x| acc + (o * x.conj()).re))
    }

    pub fn expectation_pure(&self, psi: &PureState) -> Result<f64> {
        if self.shape != psi.shape {
            return Err(Error::DimensionMismatch { expected: self.shape.dim(), got: psi.shape.dim() });
        }
        Ok(psi.amp.dotc(&(&self.mat * &psi.amp)).re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.mat).0
    }
}

impl Operator for HermitianOperator {
    fn shape(&self) -> RegisterShape {
        self.shape
    }
    fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Canonical bipartition `S | S̄` with particle 1 in `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    shape: RegisterShape,
    sites: Vec<usize>,
}

impl Bipartition {
    /// `labels` are 1-based particle labels of the block containing particle 1.
    pub fn new(shape: RegisterShape, labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidSubset("particle labels start at 1".into()));
        }
        let sites: Vec<usize> = labels.iter().map(|l| l - 1).collect();
        shape.check_sites(&sites, true)?;
        if sites[0] != 0 {
            return Err(Error::InvalidSubset(format!("{labels:?} does not contain particle 1")));
        }
        Ok(Bipartition { shape, sites })
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    /// 0-based sites of `S`.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// 0-based sites of `S̄`.
    pub fn complement(&self) -> Vec<usize> {
        self.shape.complement(&self.sites)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s + 1).collect()
    }

    /// Dimension of the smaller side.
    pub fn min_block_dim(&self) -> usize {
        let k = self.sites.len().min(self.shape.n() - self.sites.len());
        self.shape.block_dim(k)
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[usize]| s.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(&self.sites), join(&self.complement()))
    }
}

/// All canonical bipartitions, ordered lexicographically on `S`.
pub fn bipartitions(shape: RegisterShape) -> Result<Vec<Bipartition>> {
    let n = shape.n();
    if n < 2 {
        return Err(Error::InvalidShape("bipartitions need n >= 2".into()));
    }
    let mut out: Vec<Bipartition> = (0..(1usize << (n - 1)) - 1)
        .map(|mask| {
            // particle 1 always in S; the other bits choose among particles 2..n
            let mut sites = vec![0];
            sites.extend((1..n).filter(|&s| mask >> (s - 1) & 1 == 1));
            Bipartition { shape, sites }
        })
        .collect();
    out.sort_by(|a, b| a.sites.cmp(&b.sites));
    Ok(out)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let limit = Tolerances::default().max_dim;
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= limit && c <= limit && r.checked_mul(c).is_some() => Ok(a.kronecker(b)),
        _ => Err(Error::Budget { n: 2, d: a.nrows().max(b.nrows()), limit }),
    }
}

/// Reduction of `op` onto the sites in `keep`.
pub fn partial_trace<O: Operator>(op: &O, keep: &[usize]) -> Result<CMatrix> {
    partial_trace_matrix(op.matrix(), op.shape(), keep)
}

pub fn partial_trace_matrix(m: &CMatrix, shape: RegisterShape, keep: &[usize]) -> Result<CMatrix> {
    check_square(m, shape.dim())?;
    shape.check_sites(keep, true)?;
    Ok(Split::new(shape, keep).trace_out(m))
}

/// `reduced ⊗ 𝟙` with `reduced` acting on `keep`.
pub fn embed(reduced: &CMatrix, shape: RegisterShape, keep: &[usize]) -> Result<CMatrix> {
    shape.check_sites(keep, false)?;
    let split = Split::new(shape, keep);
    check_square(reduced, split.keep_dim)?;
    let mut out = CMatrix::zeros(shape.dim(), shape.dim());
    split.embed_into(reduced, 1.0, &mut out);
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix, non-increasing.
pub fn eig_desc(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let dev = hermitian_deviation(m);
    if dev > Tolerances::default().hermitian * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eigh(m).0)
}

/// Eigendecomposition of the Hermitian part of `m`: eigenvalues non-increasing,
/// eigenvectors as matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// (op₀ ⊗ … ⊗ op_{n−1})|ψ⟩, one site at a time.
pub fn apply_local(state: &PureState, ops: &[CMatrix]) -> Result<PureState> {
    let shape = state.shape;
    if ops.len() != shape.n() {
        return Err(Error::DimensionMismatch { expected: shape.n(), got: ops.len() });
    }
    for op in ops {
        check_square(op, shape.d())?;
    }
    let mut amp = state.amp.clone();
    for (site, op) in ops.iter().enumerate() {
        amp = apply_site(&amp, shape, site, op);
    }
    Ok(PureState { shape, amp })
}

pub(crate) fn apply_site(amp: &CVector, shape: RegisterShape, site: usize, op: &CMatrix) -> CVector {
    let d = shape.d();
    let stride = shape.block_dim(shape.n() - 1 - site);
    let mut out = CVector::zeros(amp.len());
    for base in 0..amp.len() {
        if !(base / stride).is_multiple_of(d) {
            continue;
        }
        for j in 0..d {
            let a = amp[base + j * stride];
            if a == ZERO {
                continue;
            }
            for i in 0..d {
                out[base + i * stride] += op[(i, j)] * a;
            }
        }
    }
    out
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: m.nrows().max(m.ncols()) });
    }
    Ok(())
}
