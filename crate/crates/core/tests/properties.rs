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

//! Randomized invariants of the tensor, state and witness layers.

mod common;

use gmedim::oracles::result1_bruteforce;
use gmedim::tensor::{bipartitions, eig_desc, partial_trace, Operator, RegisterShape};
use gmedim::witness::{
    certify, cluster_witness_operator, fidelity_bound_general, ghz_witness_operator, GmeHypothesis, WitnessFamily,
};
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = RegisterShape> {
    prop_oneof![
        Just((2usize, 2usize)),
        Just((2, 3)),
        Just((3, 2)),
        Just((3, 3)),
        Just((4, 2)),
        Just((4, 3)),
    ]
    .prop_map(|(n, d)| RegisterShape::new(n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn schmidt_spectrum_is_symmetric(shape in shapes(), seed in any::<u64>()) {
        let psi = common::random_state(shape, &mut common::rng(seed));
        for b in bipartitions(shape).unwrap() {
            let left = eig_desc(&psi.reduced(b.sites()).unwrap()).unwrap();
            let right = eig_desc(&psi.reduced(&b.complement()).unwrap()).unwrap();
            let k = left.len().min(right.len());
            for i in 0..k {
                prop_assert!((left[i] - right[i]).abs() < 1e-10, "{b}: {} vs {}", left[i], right[i]);
            }
            for x in left[k..].iter().chain(&right[k..]) {
                prop_assert!(x.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_keeps_a_valid_state(shape in shapes(), seed in any::<u64>(), mask in 1usize..15) {
        let rho = common::random_density(shape, 3, &mut common::rng(seed));
        let keep: Vec<usize> = (0..shape.n()).filter(|s| mask >> s & 1 == 1).collect();
        prop_assume!(!keep.is_empty() && keep.len() < shape.n());
        let red = partial_trace(&rho, &keep).unwrap();
        prop_assert!((red.trace().re - 1.0).abs() < 1e-12);
        prop_assert!((&red - red.adjoint()).norm() < 1e-12);
        prop_assert!(*eig_desc(&red).unwrap().last().unwrap() > -1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_trace(dim in 1usize..20, seed in any::<u64>()) {
        let m = common::random_hermitian(dim, &mut common::rng(seed));
        let eig = eig_desc(&m).unwrap();
        prop_assert!((eig.iter().sum::<f64>() - m.trace().re).abs() < 1e-9);
        prop_assert!(eig.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn witnesses_never_exceed_two(d in 2usize..4, seed in any::<u64>(), rank in 1usize..4) {
        let shape = RegisterShape::new(3, d).unwrap();
        let rho = common::random_density(shape, rank, &mut common::rng(seed));
        for op in [ghz_witness_operator(3, d).unwrap(), cluster_witness_operator(3, d).unwrap()] {
            prop_assert!(op.expectation(&rho).unwrap() <= 2.0 + 1e-10);
        }
    }

    #[test]
    fn certify_is_monotone(d in 2usize..7, a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for family in [WitnessFamily::Ghz, WitnessFamily::Cluster] {
            let low = certify(lo, d, family).unwrap();
            let high = certify(hi, d, family).unwrap();
            prop_assert!(low.certified_lower_bound <= high.certified_lower_bound);
        }
    }

    #[test]
    fn fidelity_bound_grows_with_dimension(shape in shapes(), seed in any::<u64>()) {
        let psi = common::random_state(shape, &mut common::rng(seed));
        let d = shape.d();
        let bounds: Vec<f64> =
            (1..=d).map(|k| fidelity_bound_general(&psi, GmeHypothesis::new(k, d).unwrap()).unwrap()).collect();
        prop_assert!(bounds.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        // a single site carries at most d Schmidt terms
        prop_assert!((bounds[d - 1] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn two_party_bound_is_schmidt_sum() {
    let shape = RegisterShape::new(2, 4).unwrap();
    let mut rng = common::rng(11);
    for _ in 0..20 {
        let psi = common::random_state(shape, &mut rng);
        let m = psi.amplitudes().clone().reshape_generic(nalgebra::Dyn(4), nalgebra::Dyn(4));
        let sv = m.singular_values();
        let mut sq: Vec<f64> = sv.iter().map(|s| s * s).collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        for k in 1..=4 {
            let bound = fidelity_bound_general(&psi, GmeHypothesis::new(k, 4).unwrap()).unwrap();
            let top: f64 = sq.iter().take(k).sum();
            assert!((bound - top.min(1.0)).abs() < 1e-10);
        }
    }
}

#[test]
fn sampling_respects_fidelity_bound() {
    let shape = RegisterShape::new(3, 2).unwrap();
    let mut rng = common::rng(5);
    for seed in 0..5 {
        let psi = common::random_state(shape, &mut rng);
        let bound = fidelity_bound_general(&psi, GmeHypothesis::new(1, 2).unwrap()).unwrap();
        let found = result1_bruteforce(&psi, 1, 500, seed).unwrap();
        assert!(found <= bound + 1e-9, "{found} > {bound}");
        assert!(found >= bound - 1e-6, "ascent should reach the bipartite optimum: {found} < {bound}");
    }
}

#[test]
fn density_trait_shape() {
    let shape = RegisterShape::new(3, 2).unwrap();
    let rho = common::random_density(shape, 2, &mut common::rng(1));
    assert_eq!(rho.shape(), shape);
    assert_eq!(rho.matrix().nrows(), 8);
}
