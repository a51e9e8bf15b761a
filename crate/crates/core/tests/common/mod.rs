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

//! Seeded random states shared by the integration tests.

#![allow(dead_code)]

use gmedim::tensor::{CMatrix, CVector, DensityMatrix, PureState, RegisterShape, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-random pure state.
pub fn random_state(shape: RegisterShape, rng: &mut ChaCha8Rng) -> PureState {
    let amp = CVector::from_fn(shape.dim(), |_, _| gauss(rng));
    PureState::normalized(shape, amp).unwrap()
}

/// Random mixed state of the given rank.
pub fn random_density(shape: RegisterShape, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = CMatrix::from_fn(shape.dim(), rank, |_, _| gauss(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(shape, m.unscale(tr)).unwrap()
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gauss(rng));
    (&g + g.adjoint()).scale(0.5)
}
