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

//! Convex relaxations of the set of states with bounded GME-dimension.
//!
//! A state is inside the relaxation at visibility v when v·ρ + (1−v)𝟙/D
//! splits into one positive operator per bipartition, each staying positive
//! under the generalised reduction map Λ(X) = tr(X)𝟙 − X/r applied on one
//! (or both) of its blocks. All solvers report the largest such v.

pub(crate) mod ipm;
pub mod lp;
pub mod measurements;
pub mod sdp;
pub(crate) mod support;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{bipartitions, Bipartition, RegisterShape};

pub use lp::{
    coefficient_matrix, ghz_symmetry_reduce, lp_gme_dimension, lp_map_action, lp_schmidt_vector, LpProgram,
};
pub use measurements::{build_measurement_set, MeasurementLabel, MeasurementSet};
pub use sdp::{sdp_gme_dimension, sdp_statistics, SdpProblem};

/// Which blocks of each bipartition carry a reduction-map constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sides {
    SOnly,
    Both,
}

/// One block of a bipartition: `S` (the block holding particle 1) or `S̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    S,
    SBar,
}

impl Sides {
    pub fn sides(&self) -> &'static [Side] {
        match self {
            Sides::SOnly => &[Side::S],
            Sides::Both => &[Side::S, Side::SBar],
        }
    }
}

/// Generalised reduction map with α = 1/r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReductionMapSpec {
    r: usize,
    sides: Sides,
}

impl ReductionMapSpec {
    pub fn new(r: usize, sides: Sides) -> Result<Self> {
        if r == 0 {
            return Err(Error::Config("Schmidt-number cap r must be at least 1".into()));
        }
        Ok(ReductionMapSpec { r, sides })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn sides(&self) -> Sides {
        self.sides
    }
}

/// One Schmidt-number cap per canonical bipartition, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchmidtVectorHypothesis {
    shape: RegisterShape,
    ranks: Vec<usize>,
}

impl SchmidtVectorHypothesis {
    pub fn new(shape: RegisterShape, ranks: Vec<usize>) -> Result<Self> {
        let bps = bipartitions(shape)?;
        if ranks.len() != bps.len() {
            return Err(Error::Config(format!(
                "Schmidt vector needs {} entries (one per bipartition), got {}",
                bps.len(),
                ranks.len()
            )));
        }
        for (b, &r) in bps.iter().zip(&ranks) {
            if r == 0 || r > b.min_block_dim() {
                return Err(Error::Config(format!("rank {r} outside [1, {}] for {b}", b.min_block_dim())));
            }
        }
        Ok(SchmidtVectorHypothesis { shape, ranks })
    }

    pub fn uniform(shape: RegisterShape, r: usize) -> Result<Self> {
        let count = bipartitions(shape)?.len();
        Self::new(shape, vec![r; count])
    }

    pub fn shape(&self) -> RegisterShape {
        self.shape
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn pairs(&self) -> Result<Vec<(Bipartition, usize)>> {
        Ok(bipartitions(self.shape)?.into_iter().zip(self.ranks.iter().copied()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Solved to tolerance (LP), or feasible at v = 1 (bisection).
    Optimal,
    /// Bisection: v = 1 certified outside the relaxation and v* bracketed to the configured width.
    InfeasibleAtOne,
    /// An iteration limit was hit; `bracket` holds the last certified interval.
    ToleranceLimited,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::InfeasibleAtOne => "infeasible-at-1",
            SolveStatus::ToleranceLimited => "tolerance-limited",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartitionWeight {
    pub bipartition: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationResult {
    /// Largest visibility at which the noisy state is inside the relaxation.
    pub v_star: f64,
    pub status: SolveStatus,
    pub primal_residual: f64,
    /// tr σ̃ for each bipartition.
    pub per_bipartition_weights: Vec<BipartitionWeight>,
    /// Certified-feasible and certified-infeasible ends (bisection only).
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
}
