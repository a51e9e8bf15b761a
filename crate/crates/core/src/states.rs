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

//! Target states, local bases, Weyl operators, noise channels and the
//! state-diagonal frames used by the linear-programming path.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::tensor::{apply_site, CMatrix, CVector, DensityMatrix, PureState, RegisterShape, C64, ONE, ZERO};

/// ω^k with ω = e^{2πi/d}, reduced mod d before evaluating.
pub fn omega_pow(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * k / d as f64)
}

/// X|k⟩ = |k+1 mod d⟩.
pub fn pauli_x(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { ONE } else { ZERO })
}

/// Z|k⟩ = ω^k|k⟩, k = 0..d−1.
pub fn pauli_z(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == j { omega_pow(d, i as i64) } else { ZERO })
}

fn shift_pow(d: usize, a: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == (j + a) % d { ONE } else { ZERO })
}

fn clock_pow(d: usize, a: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == j { omega_pow(d, (i * a) as i64) } else { ZERO })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    Computational,
    Fourier,
    Mub(usize),
}

/// An orthonormal basis of C^d stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    d: usize,
    kind: BasisKind,
    vectors: CMatrix,
}

impl BasisFamily {
    pub fn computational(d: usize) -> Self {
        BasisFamily { d, kind: BasisKind::Computational, vectors: CMatrix::identity(d, d) }
    }

    /// |e_j⟩ with entries ω^{jk}/√d.
    pub fn fourier(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let vectors = CMatrix::from_fn(d, d, |k, j| omega_pow(d, (j * k) as i64) * s);
        BasisFamily { d, kind: BasisKind::Fourier, vectors }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Column `l` is the l-th basis vector.
    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, l: usize) -> CVector {
        self.vectors.column(l).into_owned()
    }

    pub fn gram_deviation(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        (g - CMatrix::identity(self.d, self.d)).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// |e_l^{(j)}⟩ = (1/√d) Σ_m ω^{m(l + j m)} |m⟩.
///
/// Orthonormal for every d; unbiased across j (and against the computational
/// basis) only for odd prime d. `j = 0` is the Fourier basis.
pub fn mub_basis(d: usize, j: usize) -> Result<BasisFamily> {
    if d < 2 {
        return Err(Error::InvalidShape(format!("local dimension {d} < 2")));
    }
    if j >= d {
        return Err(Error::InvalidShape(format!("MUB index {j} outside 0..{d}")));
    }
    let s = 1.0 / (d as f64).sqrt();
    let vectors = CMatrix::from_fn(d, d, |m, l| omega_pow(d, (m * (l + j * m)) as i64) * s);
    Ok(BasisFamily { d, kind: BasisKind::Mub(j), vectors })
}

pub fn ghz(n: usize, d: usize) -> Result<PureState> {
    ghz_in(RegisterShape::new(n, d)?)
}

/// (1/√d) Σ_i |i…i⟩.
pub fn ghz_in(shape: RegisterShape) -> Result<PureState> {
    let d = shape.d();
    let mut amp = CVector::zeros(shape.dim());
    let s = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amp[shape.index_of(&vec![i; shape.n()])] = C64::new(s, 0.0);
    }
    PureState::new(shape, amp)
}

pub fn cluster(n: usize, d: usize) -> Result<PureState> {
    cluster_in(RegisterShape::new(n, d)?)
}

/// Linear cluster state: amplitude ω^{Σ k_i k_{i+1}} / d^{n/2}.
pub fn cluster_in(shape: RegisterShape) -> Result<PureState> {
    if shape.n() < 2 {
        return Err(Error::InvalidShape("cluster state needs n >= 2".into()));
    }
    let d = shape.d();
    let s = (shape.dim() as f64).sqrt().recip();
    let amp = CVector::from_fn(shape.dim(), |idx, _| {
        let k = shape.digits(idx);
        let phase: usize = k.windows(2).map(|w| w[0] * w[1]).sum();
        omega_pow(d, phase as i64) * s
    });
    PureState::new(shape, amp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Depolarizing,
    Dephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    kind: NoiseKind,
    v: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, v: f64) -> Result<Self> {
        check_visibility(v)?;
        Ok(NoiseModel { kind, v })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn visibility(&self) -> f64 {
        self.v
    }

    pub fn apply(&self, psi: &PureState) -> Result<DensityMatrix> {
        match self.kind {
            NoiseKind::Depolarizing => depolarize(psi, self.v),
            NoiseKind::Dephasing => dephase_diag(psi, self.v),
        }
    }
}

fn check_visibility(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Visibility(v))
    }
}

/// vψψ† + (1−v)𝟙/d^n.
pub fn depolarize(psi: &PureState, v: f64) -> Result<DensityMatrix> {
    check_visibility(v)?;
    psi.projector().mix(&DensityMatrix::maximally_mixed(psi.shape()), v)
}

/// (1/d) Σ_i |i…i⟩⟨i…i|.
pub fn classical_correlated(shape: RegisterShape) -> DensityMatrix {
    let mut mat = CMatrix::zeros(shape.dim(), shape.dim());
    for i in 0..shape.d() {
        let idx = shape.index_of(&vec![i; shape.n()]);
        mat[(idx, idx)] = C64::new(1.0 / shape.d() as f64, 0.0);
    }
    DensityMatrix::assume_valid(shape, mat)
}

/// vψψ† + (1−v)(1/d)Σ_i|i…i⟩⟨i…i|.
///
/// The noise term is defined for GHZ and linear-cluster targets; for other
/// states this is the same formula, not a general dephasing channel.
pub fn dephase_diag(psi: &PureState, v: f64) -> Result<DensityMatrix> {
    check_visibility(v)?;
    psi.projector().mix(&classical_correlated(psi.shape()), v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Ghz,
    Cluster,
}

impl Target {
    pub fn state(&self, shape: RegisterShape) -> Result<PureState> {
        match self {
            Target::Ghz => ghz_in(shape),
            Target::Cluster => cluster_in(shape),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Target::Ghz => "ghz",
            Target::Cluster => "cluster",
        }
    }

    /// Which local Weyl operator carries exponent a_site in ψ_a: `true` for Z.
    pub(crate) fn clock_sites(&self, n: usize) -> Vec<bool> {
        match self {
            Target::Ghz => (0..n).map(|s| s == 0).collect(),
            Target::Cluster => (0..n).map(|s| s + 2 < n).collect(),
        }
    }
}

/// Orthonormal basis {ψ_a} generated from a target by local Weyl operators,
/// stored as columns indexed by the base-d tuple a.
#[derive(Debug, Clone)]
pub struct DiagonalFrame {
    shape: RegisterShape,
    target: Target,
    vectors: CMatrix,
}

impl DiagonalFrame {
    pub fn new(target: Target, shape: RegisterShape) -> Result<Self> {
        let psi = target.state(shape)?;
        let (n, d, dim) = (shape.n(), shape.d(), shape.dim());
        let clock = target.clock_sites(n);
        let mut vectors = CMatrix::zeros(dim, dim);
        for a in 0..dim {
            let digits = shape.digits(a);
            let mut amp = psi.amplitudes().clone();
            for site in 0..n {
                if digits[site] == 0 {
                    continue;
                }
                let op = if clock[site] { clock_pow(d, digits[site]) } else { shift_pow(d, digits[site]) };
                amp = apply_site(&amp, shape, site, &op);
            }
            vectors.set_column(a, &amp);
        }
        let gram = vectors.adjoint() * &vectors;
        let dev = (gram - CMatrix::identity(dim, dim)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if dev > Tolerances::default().unitary {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(DiagonalFrame { shape, target, vectors })
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// Column a is ψ_a.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn state(&self, a: usize) -> Result<PureState> {
        PureState::new(self.shape, self.vectors.column(a).into_owned())
    }

    /// U = Σ_a |a⟩⟨ψ_a|.
    pub fn unitary(&self) -> CMatrix {
        self.vectors.adjoint()
    }
}

pub fn ghz_diag_unitary(n: usize, d: usize) -> Result<CMatrix> {
    Ok(DiagonalFrame::new(Target::Ghz, RegisterShape::new(n, d)?)?.unitary())
}

pub fn cluster_diag_unitary(n: usize, d: usize) -> Result<CMatrix> {
    Ok(DiagonalFrame::new(Target::Cluster, RegisterShape::new(n, d)?)?.unitary())
}
