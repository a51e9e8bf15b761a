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

//! Fidelity bounds, two-basis witnesses and critical visibilities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::states::{mub_basis, BasisFamily};
use crate::tensor::{
    bipartitions, eig_desc, CMatrix, DensityMatrix, HermitianOperator, Operator, PureState, RegisterShape, C64,
};

/// Hypothesised upper bound `d_gme` on the GME-dimension, 1 ≤ d_gme ≤ d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GmeHypothesis {
    d_gme: usize,
    d: usize,
}

impl GmeHypothesis {
    pub fn new(d_gme: usize, d: usize) -> Result<Self> {
        if d < 2 || d_gme == 0 || d_gme > d {
            return Err(Error::Hypothesis { d_gme, d });
        }
        Ok(GmeHypothesis { d_gme, d })
    }

    pub fn d_gme(&self) -> usize {
        self.d_gme
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn require_finite_threshold(&self) -> Result<()> {
        if self.d_gme == self.d {
            Err(Error::NoThreshold(format!("d_gme = d = {} cannot be violated", self.d)))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessFamily {
    Ghz,
    Cluster,
    Tenbasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub value: f64,
    /// Witness bound for each hypothesis d_gme = 1..=d.
    pub bounds: BTreeMap<usize, f64>,
    pub certified_lower_bound: usize,
    pub fidelity_lower_bound: f64,
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.shape() != psi.shape() {
        return Err(Error::DimensionMismatch { expected: rho.shape().dim(), got: psi.shape().dim() });
    }
    let amp = psi.amplitudes();
    Ok(amp.dotc(&(rho.matrix() * amp)).re)
}

/// Largest fidelity with `psi` over states of GME-dimension ≤ d_gme: the
/// maximum over bipartitions of the sum of the d_gme largest eigenvalues of
/// the reduction onto the smaller block.
pub fn fidelity_bound_general(psi: &PureState, h: GmeHypothesis) -> Result<f64> {
    let shape = psi.shape();
    if shape.d() != h.d {
        return Err(Error::DimensionMismatch { expected: shape.d(), got: h.d });
    }
    let mut best = 0.0f64;
    for b in bipartitions(shape)? {
        let sites = b.sites().to_vec();
        let comp = b.complement();
        let smaller = if sites.len() <= comp.len() { sites } else { comp };
        let spectrum = eig_desc(&psi.reduced(&smaller)?)?;
        let top: f64 = spectrum.iter().take(h.d_gme).sum();
        best = best.max(top);
    }
    Ok(best.min(1.0))
}

/// d_gme / d, valid for GHZ, linear cluster and AME targets only.
pub fn fidelity_bound_closed(h: GmeHypothesis) -> f64 {
    h.d_gme as f64 / h.d as f64
}

/// 1 + d_gme/d.
pub fn minimal_witness_bound(h: GmeHypothesis) -> f64 {
    1.0 + h.d_gme as f64 / h.d as f64
}

/// 3 + 9·d_gme/d.
pub fn tenbasis_bound(h: GmeHypothesis) -> f64 {
    3.0 + 9.0 * h.d_gme as f64 / h.d as f64
}

/// Σ_t w(t) ⊗_k |b_k(t_k)⟩⟨b_k(t_k)| over all outcome tuples t.
pub(crate) fn product_projector_sum(
    shape: RegisterShape,
    bases: &[&BasisFamily],
    weight: impl Fn(&[usize]) -> f64,
) -> CMatrix {
    let v = product_vectors(bases);
    let dim = shape.dim();
    let mut scaled = v.clone();
    for t in 0..dim {
        let w = weight(&shape.digits(t));
        scaled.column_mut(t).scale_mut(w);
    }
    scaled * v.adjoint()
}

/// Product basis whose column t is ⊗_k b_k(t_k).
pub(crate) fn product_vectors(bases: &[&BasisFamily]) -> CMatrix {
    let mut v = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for b in bases {
        v = v.kronecker(b.matrix());
    }
    v
}

fn symmetrize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()).scale(0.5)
}

/// Σ_j |j…j⟩⟨j…j| + Σ_{j₁+…+jₙ ≡ 0} ⊗_l |e_{j_l}⟩⟨e_{j_l}| with the Fourier basis.
pub fn ghz_witness_operator(n: usize, d: usize) -> Result<HermitianOperator> {
    let shape = RegisterShape::new(n, d)?;
    let comp = BasisFamily::computational(d);
    let four = BasisFamily::fourier(d);
    let first = product_projector_sum(shape, &vec![&comp; n], |t| {
        if t.iter().all(|&x| x == t[0]) {
            1.0
        } else {
            0.0
        }
    });
    let second = product_projector_sum(shape, &vec![&four; n], |t| {
        if t.iter().sum::<usize>() % d == 0 {
            1.0
        } else {
            0.0
        }
    });
    HermitianOperator::new(shape, symmetrize(first + second))
}

/// Two-term cluster witness. Term 1 measures odd particles (1-based) in the
/// Fourier basis and even ones computationally, accepting when every odd l
/// has p_{l−1} + p_{l+1} − q_l ≡ 0; term 2 swaps the roles. Neighbours outside
/// 1..n read as 0.
pub fn cluster_witness_operator(n: usize, d: usize) -> Result<HermitianOperator> {
    if n < 2 {
        return Err(Error::InvalidShape("cluster witness needs n >= 2".into()));
    }
    let shape = RegisterShape::new(n, d)?;
    let comp = BasisFamily::computational(d);
    let four = BasisFamily::fourier(d);
    let mut total = CMatrix::zeros(shape.dim(), shape.dim());
    // parity = 0: Fourier on 0-based even sites (odd labels); parity = 1: the swap.
    for parity in 0..2 {
        let bases: Vec<&BasisFamily> = (0..n).map(|s| if s % 2 == parity { &four } else { &comp }).collect();
        total += product_projector_sum(shape, &bases, |t| {
            let ok = (0..n).filter(|s| s % 2 == parity).all(|s| {
                let left = if s > 0 { t[s - 1] } else { 0 };
                let right = if s + 1 < n { t[s + 1] } else { 0 };
                (left + right + d - t[s]).is_multiple_of(d)
            });
            if ok {
                1.0
            } else {
                0.0
            }
        });
    }
    HermitianOperator::new(shape, symmetrize(total))
}

/// The nine MUB-index triples of the ten-basis witness.
pub fn tenbasis_index_set(d: usize) -> [[usize; 3]; 9] {
    [
        [0, 0, 0],
        [1, 1, d - 2],
        [d - 1, d - 1, 2],
        [0, 1, d - 1],
        [1, 0, d - 1],
        [0, d - 1, 1],
        [1, d - 1, 0],
        [d - 1, 0, 1],
        [d - 1, 1, 0],
    ]
}

/// 3 Σ_l |lll⟩⟨lll| + Σ_{(j₁,j₂,j₃)} Σ_{l₁+l₂+l₃ ≡ 0} ⊗_k |e_{l_k}^{(j_k)}⟩⟨e_{l_k}^{(j_k)}|, odd d.
pub fn tenbasis_witness_operator(d: usize) -> Result<HermitianOperator> {
    if d.is_multiple_of(2) || d < 3 {
        return Err(Error::Unsupported(format!("ten-basis witness needs odd d >= 3, got {d}")));
    }
    let shape = RegisterShape::new(3, d)?;
    let comp = BasisFamily::computational(d);
    let mut total = product_projector_sum(shape, &[&comp, &comp, &comp], |t| {
        if t[0] == t[1] && t[1] == t[2] {
            3.0
        } else {
            0.0
        }
    });
    for js in tenbasis_index_set(d) {
        let bases = js.iter().map(|&j| mub_basis(d, j)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&BasisFamily> = bases.iter().collect();
        total += product_projector_sum(shape, &refs, |t| if t.iter().sum::<usize>() % d == 0 { 1.0 } else { 0.0 });
    }
    HermitianOperator::new(shape, symmetrize(total))
}

/// Eigenvalues of the ten-basis witness in descending order, within the configured size cap.
pub fn tenbasis_spectrum(d: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    if d > tol.tenbasis_spectrum_max_d {
        return Err(Error::Unsupported(format!(
            "ten-basis spectrum is capped at d = {} by configuration, got {d}",
            tol.tenbasis_spectrum_max_d
        )));
    }
    Ok(tenbasis_witness_operator(d)?.eigenvalues())
}

/// Certified lower bound on the GME-dimension from an observed witness value.
pub fn certify(value: f64, d: usize, family: WitnessFamily) -> Result<WitnessReport> {
    let bound = |k: usize| -> Result<f64> {
        let h = GmeHypothesis::new(k, d)?;
        Ok(match family {
            WitnessFamily::Ghz | WitnessFamily::Cluster => minimal_witness_bound(h),
            WitnessFamily::Tenbasis => tenbasis_bound(h),
        })
    };
    if family == WitnessFamily::Tenbasis && d.is_multiple_of(2) {
        return Err(Error::Unsupported("ten-basis witness needs odd d".into()));
    }
    let mut bounds = BTreeMap::new();
    for k in 1..=d {
        bounds.insert(k, bound(k)?);
    }
    // the k = d bound is the largest attainable value, so at most d is certified
    let violated = (1..d).filter(|k| value > bounds[k]).max().unwrap_or(0);
    let fidelity_lower_bound = match family {
        WitnessFamily::Ghz | WitnessFamily::Cluster => value - 1.0,
        WitnessFamily::Tenbasis => (value - 3.0) / 9.0,
    };
    Ok(WitnessReport { value, bounds, certified_lower_bound: violated + 1, fidelity_lower_bound })
}

fn pow(d: usize, k: usize) -> f64 {
    (d as f64).powi(k as i32)
}

/// Depolarized GHZ visibility above which the two-basis witness exceeds 1 + d_gme/d.
pub fn vcrit_ghz_depolarizing(n: usize, h: GmeHypothesis) -> Result<f64> {
    h.require_finite_threshold()?;
    if n < 2 {
        return Err(Error::InvalidShape("n >= 2 required".into()));
    }
    let (d, k) = (h.d, h.d_gme as f64);
    let p = pow(d, n - 2);
    let df = d as f64;
    Ok((1.0 - p * (k + df - 1.0)) / (1.0 - p * (2.0 * df - 1.0)))
}

/// (d_gme − 1)/(d − 1), independent of n.
pub fn vcrit_ghz_dephasing(h: GmeHypothesis) -> f64 {
    (h.d_gme as f64 - 1.0) / (h.d as f64 - 1.0)
}

/// Threshold of the cluster witness; identical for depolarizing and dephasing noise.
pub fn vcrit_cluster(n: usize, h: GmeHypothesis) -> Result<f64> {
    h.require_finite_threshold()?;
    if n < 2 {
        return Err(Error::InvalidShape("n >= 2 required".into()));
    }
    let d = h.d;
    let odd = n % 2 == 1;
    // e = n/2 + a with a = 1/2 for odd n and 0 for even n
    let e = n.div_ceil(2);
    let b = if odd { 1.0 + d as f64 } else { 2.0 };
    let top = pow(d, e);
    Ok((b - top - pow(d, e - 1) * h.d_gme as f64) / (b - 2.0 * top))
}

/// Depolarized visibility at which the fidelity reaches d_gme/d.
pub fn vcrit_fidelity_depolarizing(n: usize, h: GmeHypothesis) -> f64 {
    let d = h.d;
    (h.d_gme as f64 * pow(d, n - 1) - 1.0) / (pow(d, n) - 1.0)
}

/// (bound − F_noise) / (1 − F_noise) for a fidelity bound and the fidelity of the pure noise term.
pub fn vcrit_fidelity(bound: f64, noise_fidelity: f64) -> f64 {
    (bound - noise_fidelity) / (1.0 - noise_fidelity)
}

fn require_odd(h: GmeHypothesis) -> Result<()> {
    if h.d.is_multiple_of(2) {
        Err(Error::Unsupported("ten-basis witness needs odd d".into()))
    } else {
        Ok(())
    }
}

/// Depolarized-GHZ threshold of the ten-basis witness, n = 3.
pub fn tenbasis_vcrit(h: GmeHypothesis) -> Result<f64> {
    require_odd(h)?;
    let (d, k) = (h.d as f64, h.d_gme as f64);
    Ok((d * d - 1.0 + 3.0 * d * (k - 1.0)) / (4.0 * d * d - 3.0 * d - 1.0))
}

/// Depolarized-GHZ threshold of the exact fidelity criterion, n = 3.
pub fn tenbasis_vcrit_exact(h: GmeHypothesis) -> f64 {
    let (d, k) = (h.d as f64, h.d_gme as f64);
    (k * d * d - 1.0) / (d * d * d - 1.0)
}

/// (1 − v10)/(1 − v_exact): fraction of the exact criterion's noise range retained.
pub fn impact_delta(h: GmeHypothesis) -> Result<f64> {
    h.require_finite_threshold()?;
    Ok((1.0 - tenbasis_vcrit(h)?) / (1.0 - tenbasis_vcrit_exact(h)))
}
