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

//! Full-matrix relaxation solved by bisection over v with an ADMM
//! feasibility subsolver.
//!
//! Variables are one Hermitian σ̃ per bipartition. ADMM alternates an exact
//! least-squares step (diagonal on tensor supports, see `support`) with
//! projections onto the PSD cone and onto the affine equality set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::measurements::MeasurementSet;
use super::support::{mask_of, SiteMask, SupportOps};
use super::{BipartitionWeight, ReductionMapSpec, RelaxationResult, Sides, SolveStatus};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::tensor::{bipartitions, eigh, Bipartition, CMatrix, DensityMatrix, Operator, RegisterShape, C64};

struct BlockMaps {
    bipartition: Bipartition,
    /// (sites the map acts on, eigenvalues on each support) per constrained side
    maps: Vec<(SiteMask, Vec<f64>)>,
    /// inverse of 𝟙 + Σ Λ² on each support
    hinv: Vec<f64>,
}

enum Equality {
    /// Σσ̃ equals the noisy state.
    State,
    /// Σσ̃ reproduces ⟨p|·|p⟩ on each product vector p (columns of `vectors`).
    Statistics { vectors: CMatrix, gram_pinv: DMatrix<f64> },
}

/// Iterates kept between bisection steps for warm starts.
#[derive(Clone)]
pub struct AdmmState {
    x: Vec<CMatrix>,
    z: Vec<Vec<CMatrix>>,
    u: Vec<Vec<CMatrix>>,
    zb: CMatrix,
    ub: CMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// Iteration cap reached without either signal.
    Undecided,
}

pub struct Feasibility {
    pub verdict: Verdict,
    /// ADMM primal residual at exit.
    pub residual: f64,
    pub iterations: usize,
    state: AdmmState,
}

pub struct SdpProblem {
    ops: SupportOps,
    rho: CMatrix,
    blocks: Vec<BlockMaps>,
    ysolve: Vec<f64>,
    r: f64,
    equality: Equality,
    tol: Tolerances,
    /// plateau test: compare the residual with its value this many iterations earlier
    window: usize,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn psd_part(m: &CMatrix) -> CMatrix {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm.clone());
    if eig.eigenvalues.iter().all(|&w| w >= 0.0) {
        return herm;
    }
    let mut scaled = eig.eigenvectors.clone();
    for (j, &w) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w.max(0.0));
    }
    scaled * eig.eigenvectors.adjoint()
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.last().copied().unwrap_or(0.0)
}

impl SdpProblem {
    pub fn full_state(rho: &DensityMatrix, spec: ReductionMapSpec, tol: &Tolerances) -> Result<Self> {
        Self::build(rho, spec, Equality::State, tol)
    }

    pub fn statistics(rho: &DensityMatrix, spec: ReductionMapSpec, sets: &[MeasurementSet], tol: &Tolerances) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Config("at least one measurement set is required".into()));
        }
        let dim = rho.shape().dim();
        let mut cols = Vec::new();
        for set in sets {
            if set.shape() != rho.shape() {
                return Err(Error::DimensionMismatch { expected: dim, got: set.shape().dim() });
            }
            cols.extend(set.vectors().column_iter().map(|c| c.into_owned()));
        }
        let vectors = CMatrix::from_columns(&cols);
        let overlaps = vectors.adjoint() * &vectors;
        let gram = DMatrix::from_fn(overlaps.nrows(), overlaps.ncols(), |i, j| overlaps[(i, j)].norm_sqr());
        let gram_pinv = pseudo_inverse(gram);
        Self::build(rho, spec, Equality::Statistics { vectors, gram_pinv }, tol)
    }

    fn build(rho: &DensityMatrix, spec: ReductionMapSpec, equality: Equality, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        let shape = rho.shape();
        if shape.dim() > tol.sdp_max_dim {
            return Err(Error::Budget { n: shape.n(), d: shape.d(), limit: tol.sdp_max_dim });
        }
        let ops = SupportOps::new(shape);
        let r = spec.r() as f64;
        let nsup = ops.num_supports();
        let blocks: Vec<BlockMaps> = bipartitions(shape)?
            .into_iter()
            .map(|b| {
                let mut maps = vec![(mask_of(b.sites()), ops.reduction_spectrum(mask_of(b.sites()), r))];
                if spec.sides() == Sides::Both {
                    let comp = mask_of(&b.complement());
                    maps.push((comp, ops.reduction_spectrum(comp, r)));
                }
                let hinv = (0..nsup).map(|t| 1.0 / (1.0 + maps.iter().map(|(_, l)| l[t] * l[t]).sum::<f64>())).collect();
                BlockMaps { bipartition: b, maps, hinv }
            })
            .collect();
        let ysolve = (0..nsup).map(|t| 1.0 / (1.0 + blocks.iter().map(|b| b.hinv[t]).sum::<f64>())).collect();
        Ok(SdpProblem { ops, rho: rho.matrix().clone(), blocks, ysolve, r, equality, tol: tol.clone(), window: 400 })
    }

    pub fn shape(&self) -> RegisterShape {
        self.ops.shape()
    }

    fn noisy(&self, v: f64) -> CMatrix {
        let dim = self.shape().dim();
        self.rho.scale(v) + CMatrix::identity(dim, dim).unscale(dim as f64).scale(1.0 - v)
    }

    /// Projection onto the affine equality set at visibility v.
    fn project_b(&self, y: &CMatrix, target: &CMatrix) -> CMatrix {
        match &self.equality {
            Equality::State => target.clone(),
            Equality::Statistics { vectors, gram_pinv } => {
                let diff = y - target;
                let dv = &diff * vectors;
                let m = vectors.ncols();
                let resid = DVector::from_fn(m, |i, _| vectors.column(i).dotc(&dv.column(i)).re);
                let c = gram_pinv * resid;
                let mut scaled = vectors.clone();
                for (i, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= C64::new(c[i], 0.0);
                }
                y - scaled * vectors.adjoint()
            }
        }
    }

    /// Largest violation by the PSD parts σ̃_k = z_k0 of the equality and map constraints.
    fn certificate_residual(&self, sigmas: &[CMatrix], target: &CMatrix) -> f64 {
        let total: CMatrix = sigmas.iter().fold(CMatrix::zeros(target.nrows(), target.ncols()), |acc, s| acc + s);
        let eq = max_abs(&(&total - self.project_b(&total, target)));
        let maps = self
            .blocks
            .par_iter()
            .zip(sigmas.par_iter())
            .map(|(blk, s)| {
                let mut worst = (-min_eigenvalue(s)).max(0.0);
                for (mask, _) in &blk.maps {
                    let mapped = self.ops.reduction_map(s, *mask, self.r);
                    worst = worst.max(-min_eigenvalue(&mapped));
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        eq.max(maps)
    }

    /// The equal split of the noisy state at v = 0 must satisfy every constraint.
    fn check_origin(&self) -> Result<()> {
        let k = self.blocks.len() as f64;
        let split = self.noisy(0.0).unscale(k);
        let sigmas = vec![split; self.blocks.len()];
        let res = self.certificate_residual(&sigmas, &self.noisy(0.0));
        if res > self.tol.sdp_feasibility {
            return Err(Error::Solver(format!("equal split of the maximally mixed state violates the constraints by {res:e}")));
        }
        Ok(())
    }

    fn cold_state(&self, v: f64) -> AdmmState {
        let target = self.noisy(v);
        let k = self.blocks.len();
        let x = vec![target.unscale(k as f64); k];
        let z: Vec<Vec<CMatrix>> = self
            .blocks
            .iter()
            .zip(&x)
            .map(|(blk, xk)| {
                let mut zk = vec![xk.clone()];
                zk.extend(blk.maps.iter().map(|(_, l)| self.ops.apply(xk, l)));
                zk
            })
            .collect();
        let zeros = |m: &CMatrix| CMatrix::zeros(m.nrows(), m.ncols());
        let u = z.iter().map(|zk| zk.iter().map(zeros).collect()).collect();
        AdmmState { x, z, u, zb: target.clone(), ub: zeros(&target) }
    }

    /// Runs ADMM at visibility v.
    pub fn feasibility(&self, v: f64, warm: Option<&AdmmState>) -> Feasibility {
        let target = self.noisy(v);
        let mut st = warm.cloned().unwrap_or_else(|| self.cold_state(v));
        let tol = self.tol.sdp_feasibility;
        let mut history: Vec<f64> = Vec::new();
        let mut residual = f64::INFINITY;
        for it in 0..self.tol.admm_max_iter {
            let shift = &st.zb - &st.ub;
            // least-squares step
            let rhs: Vec<CMatrix> = self
                .blocks
                .par_iter()
                .zip(st.z.par_iter().zip(st.u.par_iter()))
                .map(|(blk, (zk, uk))| {
                    let mut b = &zk[0] - &uk[0] + &shift;
                    for (j, (_, l)) in blk.maps.iter().enumerate() {
                        b += self.ops.apply(&(&zk[j + 1] - &uk[j + 1]), l);
                    }
                    b
                })
                .collect();
            let hb: Vec<CMatrix> =
                self.blocks.par_iter().zip(rhs.par_iter()).map(|(blk, b)| self.ops.apply(b, &blk.hinv)).collect();
            let sum_hb = hb.iter().skip(1).fold(hb[0].clone(), |acc, m| acc + m);
            let y_mid = self.ops.apply(&sum_hb, &self.ysolve);
            st.x = self
                .blocks
                .par_iter()
                .zip(hb.par_iter())
                .map(|(blk, h)| h - self.ops.apply(&y_mid, &blk.hinv))
                .collect();
            let y = st.x.iter().skip(1).fold(st.x[0].clone(), |acc, m| acc + m);

            // cone projections and dual updates
            let cone_res: Vec<f64> = self
                .blocks
                .par_iter()
                .zip(st.x.par_iter())
                .zip(st.z.par_iter_mut().zip(st.u.par_iter_mut()))
                .map(|((blk, xk), (zk, uk))| {
                    let mut worst = 0.0f64;
                    let mut images = vec![xk.clone()];
                    images.extend(blk.maps.iter().map(|(_, l)| self.ops.apply(xk, l)));
                    for (j, img) in images.into_iter().enumerate() {
                        let znew = psd_part(&(&img + &uk[j]));
                        let gap = &img - &znew;
                        worst = worst.max(max_abs(&gap));
                        uk[j] += gap;
                        zk[j] = znew;
                    }
                    worst
                })
                .collect();
            let zb = self.project_b(&(&y + &st.ub), &target);
            let gap_b = &y - &zb;
            residual = cone_res.into_iter().fold(max_abs(&gap_b), f64::max);
            st.ub += gap_b;
            st.zb = zb;
            history.push(residual);

            if residual < tol {
                let sigmas: Vec<CMatrix> = st.z.iter().map(|zk| zk[0].clone()).collect();
                if self.certificate_residual(&sigmas, &target) <= tol {
                    return Feasibility { verdict: Verdict::Feasible, residual, iterations: it + 1, state: st };
                }
            }
            let w = self.window;
            if it >= 2 * w && residual > 2.0 * tol && history[it - w] * 0.99 < residual {
                return Feasibility { verdict: Verdict::Infeasible, residual, iterations: it + 1, state: st };
            }
        }
        Feasibility { verdict: Verdict::Undecided, residual, iterations: self.tol.admm_max_iter, state: st }
    }

    /// Residual of the feasible point carried by a state.
    pub fn state_residual(&self, v: f64, state: &AdmmState) -> f64 {
        let sigmas: Vec<CMatrix> = state.z.iter().map(|zk| zk[0].clone()).collect();
        self.certificate_residual(&sigmas, &self.noisy(v))
    }

    /// Bisection over v in [0, 1].
    pub fn solve(&self) -> Result<RelaxationResult> {
        self.check_origin()?;
        let width = self.tol.bisection_width;
        let mut iterations = 0;
        let top = self.feasibility(1.0, None);
        iterations += top.iterations;
        if top.verdict == Verdict::Feasible {
            let residual = self.state_residual(1.0, &top.state);
            return Ok(self.result(1.0, SolveStatus::Optimal, residual, Some(&top.state), Some((1.0, 1.0)), iterations));
        }
        let mut limited = top.verdict == Verdict::Undecided;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut best: Option<AdmmState> = None;
        while hi - lo > width {
            let mid = 0.5 * (lo + hi);
            let run = self.feasibility(mid, best.as_ref());
            iterations += run.iterations;
            match run.verdict {
                Verdict::Feasible => {
                    lo = mid;
                    best = Some(run.state);
                }
                Verdict::Infeasible => hi = mid,
                Verdict::Undecided => {
                    limited = true;
                    hi = mid;
                }
            }
        }
        let residual = match &best {
            Some(st) => self.state_residual(lo, st),
            None => 0.0,
        };
        let status = if limited { SolveStatus::ToleranceLimited } else { SolveStatus::InfeasibleAtOne };
        Ok(self.result(lo, status, residual, best.as_ref(), Some((lo, hi)), iterations))
    }

    fn result(
        &self,
        v: f64,
        status: SolveStatus,
        residual: f64,
        state: Option<&AdmmState>,
        bracket: Option<(f64, f64)>,
        iterations: usize,
    ) -> RelaxationResult {
        let k = self.blocks.len() as f64;
        let weights = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, blk)| BipartitionWeight {
                bipartition: blk.bipartition.to_string(),
                weight: match state {
                    Some(st) => st.z[i][0].trace().re,
                    None => 1.0 / k,
                },
            })
            .collect();
        RelaxationResult { v_star: v, status, primal_residual: residual, per_bipartition_weights: weights, bracket, iterations }
    }
}

fn pseudo_inverse(g: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g);
    let cutoff = 1e-10 * eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut scaled = eig.eigenvectors.clone();
    for (j, &w) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(if w.abs() > cutoff { 1.0 / w } else { 0.0 });
    }
    scaled * eig.eigenvectors.transpose()
}

/// Largest v with v·ρ + (1−v)𝟙/D inside the full-matrix relaxation.
pub fn sdp_gme_dimension(rho: &DensityMatrix, spec: ReductionMapSpec, tol: &Tolerances) -> Result<RelaxationResult> {
    SdpProblem::full_state(rho, spec, tol)?.solve()
}

/// As [`sdp_gme_dimension`], constraining Σσ̃ only through the statistics of `sets`.
pub fn sdp_statistics(
    rho: &DensityMatrix,
    spec: ReductionMapSpec,
    sets: &[MeasurementSet],
    tol: &Tolerances,
) -> Result<RelaxationResult> {
    SdpProblem::statistics(rho, spec, sets, tol)?.solve()
}
