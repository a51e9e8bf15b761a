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

//! Analytic reference states and brute-force checks used as test oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::states::{classical_correlated, ghz};
use crate::tensor::{bipartitions, outer, CMatrix, CVector, DensityMatrix, HermitianOperator, Operator, PureState, RegisterShape, Split, C64};
use crate::witness::GmeHypothesis;

/// Local ascent restarts per bipartition in [`result1_bruteforce`].
pub const RESTARTS: usize = 50;
/// Alternating power steps per restart.
pub const ASCENT_STEPS: usize = 200;

/// p·|ghz⟩⟨ghz| + (1−p)·(1/3)Σ_i|iii⟩⟨iii| for three qutrits.
pub fn intro_tau(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Visibility(p));
    }
    let psi = ghz(3, 3)?;
    psi.projector().mix(&classical_correlated(psi.shape()), p)
}

/// Uniform mixture of the three two-level GHZ states (|iii⟩+|jjj⟩)/√2 on three qutrits.
pub fn qubit_ghz_mixture() -> Result<DensityMatrix> {
    let shape = RegisterShape::new(3, 3)?;
    let mut mat = CMatrix::zeros(shape.dim(), shape.dim());
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let phi = level_ghz(shape, &[i, j]);
        mat += outer(&phi, &phi).unscale(3.0);
    }
    DensityMatrix::new(shape, mat)
}

/// (1/√|α|) Σ_{i∈α} |i…i⟩.
fn level_ghz(shape: RegisterShape, levels: &[usize]) -> CVector {
    let mut amp = CVector::zeros(shape.dim());
    let w = C64::new(1.0 / (levels.len() as f64).sqrt(), 0.0);
    for &i in levels {
        amp[shape.index_of(&vec![i; shape.n()])] = w;
    }
    amp
}

fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// Average of |Φ_α⟩⟨Φ_α| over all d_gme-element level subsets α.
pub fn tight_dephased_mixture(d: usize, d_gme: usize, n: usize) -> Result<DensityMatrix> {
    GmeHypothesis::new(d_gme, d)?;
    let shape = RegisterShape::new(n, d)?;
    let all = subsets(d, d_gme);
    let mut mat = CMatrix::zeros(shape.dim(), shape.dim());
    for alpha in &all {
        let phi = level_ghz(shape, alpha);
        mat += outer(&phi, &phi);
    }
    DensityMatrix::new(shape, mat.unscale(all.len() as f64))
}

/// ‖(O − ψψ†)² − (O − ψψ†)‖_F.
pub fn projector_residual(op: &HermitianOperator, psi: &PureState) -> Result<f64> {
    if op.shape() != psi.shape() {
        return Err(Error::DimensionMismatch { expected: op.shape().dim(), got: psi.shape().dim() });
    }
    let diff = op.matrix() - psi.projector().into_matrix();
    Ok((&diff * &diff - &diff).norm())
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// |⟨φ|ψ⟩|² for φ ∝ U V^T on a bipartition, with ψ reshaped to `psi`.
fn overlap(psi: &CMatrix, u: &CMatrix, v: &CMatrix) -> f64 {
    let phi = u * v.transpose();
    let norm2 = phi.norm_squared();
    if norm2 == 0.0 {
        return 0.0;
    }
    let amp = phi.iter().zip(psi.iter()).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
    amp.norm_sqr() / norm2
}

/// Best fidelity of `psi` with any state whose Schmidt rank across one
/// bipartition is at most d_gme, found by sampling.
///
/// `samples` random rank-d_gme states are drawn per bipartition, then
/// [`RESTARTS`] alternating power ascents of [`ASCENT_STEPS`] steps each. Every
/// evaluated point is a genuine bounded-rank state, so the result is a lower
/// bound on the true maximum. Deterministic for a fixed `seed`.
pub fn result1_bruteforce(psi: &PureState, d_gme: usize, samples: usize, seed: u64) -> Result<f64> {
    let shape = psi.shape();
    let parts = bipartitions(shape)?;
    let jobs: Vec<(usize, usize)> = (0..parts.len()).flat_map(|p| (0..RESTARTS + 1).map(move |j| (p, j))).collect();
    let best = jobs
        .par_iter()
        .map(|&(p, job)| {
            let split = Split::new(shape, parts[p].sites());
            let mat = split.reshape(psi.amplitudes());
            let k = d_gme.min(split.keep_dim).min(split.rest_dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((p * (RESTARTS + 1) + job) as u64);
            let mut best = 0.0f64;
            if job == RESTARTS {
                for _ in 0..samples {
                    let u = gaussian(&mut rng, split.keep_dim, k);
                    let v = gaussian(&mut rng, split.rest_dim, k);
                    best = best.max(overlap(&mat, &u, &v));
                }
                return best;
            }
            // orthonormal factors keep all k Schmidt directions alive
            let mut v = gaussian(&mut rng, split.rest_dim, k).qr().q();
            for _ in 0..ASCENT_STEPS {
                let u = (&mat * v.map(|z| z.conj())).qr().q();
                let v_full = mat.transpose() * u.map(|z| z.conj());
                best = best.max(overlap(&mat, &u, &v_full));
                v = v_full.qr().q();
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}
