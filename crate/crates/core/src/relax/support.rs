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

//! Superoperators that are diagonal on the decomposition of operators by
//! tensor support.
//!
//! Every operator on the register splits uniquely as X = Σ_T X_T where X_T
//! is traceless on each site of T and the identity elsewhere. Partial-trace
//! maps act on X_T by a scalar, so they (and their inverses) are specified by
//! one number per support set T.

use crate::tensor::{CMatrix, RegisterShape, Split};

/// Site sets as bitmasks: bit s stands for site s.
pub(crate) type SiteMask = usize;

pub(crate) fn mask_of(sites: &[usize]) -> SiteMask {
    sites.iter().fold(0, |m, &s| m | 1 << s)
}

pub(crate) struct SupportOps {
    shape: RegisterShape,
    full: SiteMask,
    // splits[A] keeps the complement of A
    splits: Vec<Option<Split>>,
}

impl SupportOps {
    pub fn new(shape: RegisterShape) -> Self {
        let n = shape.n();
        let full = (1 << n) - 1;
        let splits = (0..=full)
            .map(|traced: SiteMask| {
                if traced == 0 || traced == full {
                    return None;
                }
                let keep: Vec<usize> = (0..n).filter(|s| traced >> s & 1 == 0).collect();
                Some(Split::new(shape, &keep))
            })
            .collect();
        SupportOps { shape, full, splits }
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    pub fn num_supports(&self) -> usize {
        self.full + 1
    }

    /// 𝟙_A ⊗ tr_A(X) / d^{|A|}.
    pub fn average(&self, x: &CMatrix, traced: SiteMask) -> CMatrix {
        let dim = self.shape.dim();
        if traced == 0 {
            return x.clone();
        }
        if traced == self.full {
            return CMatrix::identity(dim, dim) * (x.trace() / dim as f64);
        }
        let split = self.splits[traced].as_ref().expect("split for proper subset");
        let reduced = split.trace_out(x);
        let mut out = CMatrix::zeros(dim, dim);
        split.embed_into(&reduced, 1.0 / split.rest_dim as f64, &mut out);
        out
    }

    /// 𝟙_S ⊗ tr_S X − X/r, with the map acting on the sites of `s`.
    pub fn reduction_map(&self, x: &CMatrix, s: SiteMask, r: f64) -> CMatrix {
        let k = s.count_ones() as usize;
        let mut out = self.average(x, s) * crate::tensor::C64::new(self.shape.block_dim(k) as f64, 0.0);
        out -= x.unscale(r);
        out
    }

    /// Eigenvalue of the reduction map on the support-T component.
    pub fn reduction_spectrum(&self, s: SiteMask, r: f64) -> Vec<f64> {
        let k = s.count_ones() as usize;
        let ds = self.shape.block_dim(k) as f64;
        (0..=self.full).map(|t| if t & s == 0 { ds - 1.0 / r } else { -1.0 / r }).collect()
    }

    /// Applies the map with eigenvalue `f[T]` on the support-T component.
    pub fn apply(&self, x: &CMatrix, f: &[f64]) -> CMatrix {
        let g = mobius(f, self.shape.n());
        let dim = self.shape.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for (u, &coef) in g.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            // the averaging that keeps exactly the sites of U
            out += self.average(x, self.full & !u) * crate::tensor::C64::new(coef, 0.0);
        }
        out
    }
}

/// g(U) = Σ_{T ⊇ U} (−1)^{|T∖U|} f(T), so that Σ_{U ⊆ T} g(U) = f(T).
fn mobius(f: &[f64], n: usize) -> Vec<f64> {
    let mut g = f.to_vec();
    for bit in 0..n {
        for mask in 0..g.len() {
            if mask >> bit & 1 == 0 {
                g[mask] -= g[mask | 1 << bit];
            }
        }
    }
    // exact cancellations leave rounding noise; drop it so zero terms are skipped
    let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for x in g.iter_mut() {
        if x.abs() <= 1e-15 * scale {
            *x = 0.0;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{embed, partial_trace_matrix, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        &a + a.adjoint()
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    #[test]
    fn reduction_map_matches_dense_formula() {
        let shape = RegisterShape::new(3, 2).unwrap();
        let ops = SupportOps::new(shape);
        let x = random_hermitian(8, 1);
        for s_sites in [vec![0], vec![0, 1], vec![0, 2], vec![1]] {
            let rest = shape.complement(&s_sites);
            let direct = embed(&partial_trace_matrix(&x, shape, &rest).unwrap(), shape, &rest).unwrap() - x.unscale(2.0);
            let via = ops.reduction_map(&x, mask_of(&s_sites), 2.0);
            assert!(max_abs(&(direct - &via)) < 1e-12);
            let spectral = ops.apply(&x, &ops.reduction_spectrum(mask_of(&s_sites), 2.0));
            assert!(max_abs(&(spectral - via)) < 1e-12);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let shape = RegisterShape::new(3, 3).unwrap();
        let ops = SupportOps::new(shape);
        let x = random_hermitian(27, 2);
        let f: Vec<f64> = (0..8).map(|t| 1.0 + t as f64 * 0.37).collect();
        let inv: Vec<f64> = f.iter().map(|v| 1.0 / v).collect();
        let back = ops.apply(&ops.apply(&x, &f), &inv);
        assert!(max_abs(&(back - x)) < 1e-12);
    }
}
