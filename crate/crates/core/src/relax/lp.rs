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

//! The relaxation restricted to operators diagonal in a state-diagonal frame.
//!
//! With σ̃ = Σ_a s_a |ψ_a⟩⟨ψ_a| every constraint becomes linear in s: the
//! ψ-diagonal of 𝟙_S ⊗ tr_S σ̃ is M s with M_ab = tr(R_a R_b), where R_a is
//! the reduction of ψ_a onto the untouched block.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::ipm::{self, BlockLp, LpBlockData};
use super::{BipartitionWeight, RelaxationResult, SchmidtVectorHypothesis, Side, Sides, SolveStatus};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::states::{omega_pow, DiagonalFrame, Target};
use crate::tensor::{Bipartition, CVector, RegisterShape, C64};

fn other_block(b: &Bipartition, side: Side) -> Vec<usize> {
    match side {
        Side::S => b.complement(),
        Side::SBar => b.sites().to_vec(),
    }
}

/// M_ab = tr(R_a R_b) for the map acting on `side` of `b`.
///
/// The frame is generated by local Weyl operators, so R_a = W_a R_0 W_a† on
/// the untouched block and M_ab depends only on the digit difference b − a
/// restricted to that block.
pub fn coefficient_matrix(frame: &DiagonalFrame, b: &Bipartition, side: Side) -> Result<DMatrix<f64>> {
    let shape = frame.shape();
    let keep = other_block(b, side);
    let (n, d, dim) = (shape.n(), shape.d(), shape.dim());
    let clock = frame.target().clock_sites(n);
    let r0 = frame.state(0)?.reduced(&keep)?;
    let kd = r0.nrows();
    let local = RegisterShape::with_limit(keep.len(), d, usize::MAX)?;

    // f[c] = tr(R_0 W_c R_0 W_c†), c indexed by digits on the kept block
    let f: Vec<f64> = (0..kd)
        .map(|c| {
            let cd = local.digits(c);
            let image_phase = |i: usize| -> (usize, C64) {
                let id = local.digits(i);
                let mut out = id.clone();
                let mut phase = C64::new(1.0, 0.0);
                for (slot, &site) in keep.iter().enumerate() {
                    if clock[site] {
                        phase *= omega_pow(d, (cd[slot] * id[slot]) as i64);
                    } else {
                        out[slot] = (id[slot] + cd[slot]) % d;
                    }
                }
                (local.index_of(&out), phase)
            };
            let maps: Vec<(usize, C64)> = (0..kd).map(image_phase).collect();
            let mut acc = 0.0;
            for i in 0..kd {
                for j in 0..kd {
                    let (ii, pi) = maps[i];
                    let (jj, pj) = maps[j];
                    acc += (r0[(ii, jj)].conj() * pi * pj.conj() * r0[(i, j)]).re;
                }
            }
            acc
        })
        .collect();

    let keep_index = |a: usize| -> Vec<usize> {
        let digits = shape.digits(a);
        keep.iter().map(|&s| digits[s]).collect()
    };
    let kept: Vec<Vec<usize>> = (0..dim).map(keep_index).collect();
    Ok(DMatrix::from_fn(dim, dim, |a, bb| {
        let diff: Vec<usize> = kept[a].iter().zip(&kept[bb]).map(|(&x, &y)| (y + d - x) % d).collect();
        f[local.index_of(&diff)]
    }))
}

/// ψ-diagonal of the reduction map applied to Σ_a s_a|ψ_a⟩⟨ψ_a|: entry a is
/// (M s)_a − s_a/r. `Sides::Both` concatenates the S and S̄ results.
pub fn lp_map_action(frame: &DiagonalFrame, s: &[f64], b: &Bipartition, r: usize, sides: Sides) -> Result<Vec<f64>> {
    let dim = frame.shape().dim();
    if s.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: s.len() });
    }
    if r == 0 {
        return Err(Error::Config("r must be at least 1".into()));
    }
    let sv = DVector::from_column_slice(s);
    let mut out = Vec::with_capacity(dim * sides.sides().len());
    for &side in sides.sides() {
        let m = coefficient_matrix(frame, b, side)?;
        let y = &m * &sv - &sv / r as f64;
        out.extend(y.iter());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct ProgramBlock {
    members: Vec<Bipartition>,
    r: usize,
    /// M − I/r for each constrained side.
    maps: Vec<DMatrix<f64>>,
    /// Index permutation carrying the representative's variables to each member; `None` for one member.
    perms: Option<Vec<Vec<usize>>>,
}

/// The visibility LP in a state-diagonal frame.
#[derive(Debug, Clone)]
pub struct LpProgram {
    frame: Arc<DiagonalFrame>,
    sides: Sides,
    blocks: Vec<ProgramBlock>,
    reduced: bool,
}

impl LpProgram {
    pub fn new(target: Target, hyp: &SchmidtVectorHypothesis, sides: Sides) -> Result<Self> {
        let frame = Arc::new(DiagonalFrame::new(target, hyp.shape())?);
        let dim = hyp.shape().dim();
        let mut blocks = Vec::new();
        for (b, r) in hyp.pairs()? {
            let maps = sides
                .sides()
                .iter()
                .map(|&side| {
                    let mut m = coefficient_matrix(&frame, &b, side)?;
                    for i in 0..dim {
                        m[(i, i)] -= 1.0 / r as f64;
                    }
                    Ok(m)
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(ProgramBlock { members: vec![b], r, maps, perms: None });
        }
        Ok(LpProgram { frame, sides, blocks, reduced: false })
    }

    pub fn target(&self) -> Target {
        self.frame.target()
    }

    pub fn shape(&self) -> RegisterShape {
        self.frame.shape()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Number of independent variable vectors.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_variables(&self) -> usize {
        1 + self.blocks.len() * self.shape().dim()
    }

    pub fn solve(&self, tol: &Tolerances) -> Result<RelaxationResult> {
        let dim = self.shape().dim();
        let total: usize = self.blocks.iter().map(|b| b.members.len()).sum();
        let uniform = 1.0 / dim as f64;
        let mut g = DVector::from_element(dim, uniform);
        g[0] -= 1.0;
        let b = DVector::from_element(dim, uniform);
        let lp = BlockLp {
            blocks: self
                .blocks
                .iter()
                .map(|blk| LpBlockData { constraints: blk.maps.clone(), link: blk.perms.as_ref().map(|p| link_matrix(p, dim)) })
                .collect(),
            g,
            b,
        };
        let start = self.blocks.iter().map(|_| DVector::from_element(dim, uniform / total as f64)).collect();
        let sol = ipm::solve(&lp, start, tol.lp_feasibility, tol.lp_max_iter)?;
        let mut weights = Vec::with_capacity(total);
        for (blk, s) in self.blocks.iter().zip(&sol.s) {
            for m in &blk.members {
                weights.push(BipartitionWeight { bipartition: m.to_string(), weight: s.sum() });
            }
        }
        Ok(RelaxationResult {
            v_star: sol.v.clamp(0.0, 1.0),
            status: if sol.converged { SolveStatus::Optimal } else { SolveStatus::ToleranceLimited },
            primal_residual: sol.primal_residual,
            per_bipartition_weights: weights,
            bracket: None,
            iterations: sol.iterations,
        })
    }
}

fn link_matrix(perms: &[Vec<usize>], dim: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(dim, dim);
    for p in perms {
        for (a, &pa) in p.iter().enumerate() {
            e[(pa, a)] += 1.0;
        }
    }
    e
}

/// Maximum visibility of the depolarized target inside the relaxation with cap r on every bipartition.
pub fn lp_gme_dimension(target: Target, shape: RegisterShape, r: usize, sides: Sides, tol: &Tolerances) -> Result<RelaxationResult> {
    if r == 0 {
        return Err(Error::Config("r must be at least 1".into()));
    }
    let hyp = SchmidtVectorHypothesis::uniform(shape, r.min(shape.d()))?;
    LpProgram::new(target, &hyp, sides)?.solve(tol)
}

/// Same program with a separate cap for each bipartition.
pub fn lp_schmidt_vector(target: Target, hyp: &SchmidtVectorHypothesis, sides: Sides, tol: &Tolerances) -> Result<RelaxationResult> {
    LpProgram::new(target, hyp, sides)?.solve(tol)
}

/// Amplitudes with tensor factors relocated: site s moves to site π(s).
fn permute_sites(amp: &CVector, shape: RegisterShape, pi: &[usize]) -> CVector {
    let mut out = CVector::zeros(amp.len());
    for (idx, &a) in amp.iter().enumerate() {
        let digits = shape.digits(idx);
        let mut moved = vec![0; digits.len()];
        for (s, &k) in digits.iter().enumerate() {
            moved[pi[s]] = k;
        }
        out[shape.index_of(&moved)] = a;
    }
    out
}

/// Particle permutation taking the sorted sites of `from` onto `to`, and the complements onto each other.
fn block_permutation(n: usize, from: &[usize], to: &[usize]) -> Vec<usize> {
    let from_c: Vec<usize> = (0..n).filter(|s| !from.contains(s)).collect();
    let to_c: Vec<usize> = (0..n).filter(|s| !to.contains(s)).collect();
    let mut pi = vec![0; n];
    for (a, b) in from.iter().zip(to).chain(from_c.iter().zip(&to_c)) {
        pi[*a] = *b;
    }
    pi
}

/// σ with P_π ψ_a ∝ ψ_σ(a), or an error if the frame is not permutation-covariant.
fn induced_permutation(frame: &DiagonalFrame, pi: &[usize], support: &[Vec<usize>]) -> Result<Vec<usize>> {
    let shape = frame.shape();
    let dim = shape.dim();
    let vecs = frame.vectors();
    let mut sigma = vec![usize::MAX; dim];
    let mut used = vec![false; dim];
    for (a, slot) in sigma.iter_mut().enumerate() {
        let phi = permute_sites(&vecs.column(a).into_owned(), shape, pi);
        let peak = phi.iter().enumerate().fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best }).0;
        let hit = support[peak].iter().copied().find(|&b| (vecs.column(b).dotc(&phi).norm() - 1.0).abs() < 1e-9);
        match hit {
            Some(b) if !used[b] => {
                used[b] = true;
                *slot = b;
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "frame is not covariant under particle permutation {pi:?} (state index {a})"
                )))
            }
        }
    }
    Ok(sigma)
}

/// Merges bipartitions related by particle permutations into one variable
/// vector per orbit (classes by the size of the smaller block).
///
/// Only valid for the GHZ target with both-sided constraints and a cap that is
/// constant on each orbit. Covariance of the frame is checked, not assumed.
pub fn ghz_symmetry_reduce(program: &LpProgram) -> Result<LpProgram> {
    if program.target() != Target::Ghz {
        return Err(Error::Unsupported("symmetry reduction is only defined for the GHZ target".into()));
    }
    if program.sides != Sides::Both {
        return Err(Error::Unsupported("symmetry reduction needs both-sided constraints".into()));
    }
    if program.reduced {
        return Ok(program.clone());
    }
    let shape = program.shape();
    let (n, dim) = (shape.n(), shape.dim());
    let vecs = program.frame.vectors();
    let mut support = vec![Vec::new(); dim];
    for b in 0..dim {
        for (p, z) in vecs.column(b).iter().enumerate() {
            if z.norm() > 1e-9 {
                support[p].push(b);
            }
        }
    }

    let class_of = |b: &Bipartition| b.sites().len().min(n - b.sites().len());
    let mut classes: Vec<usize> = program.blocks.iter().map(|blk| class_of(&blk.members[0])).collect();
    classes.sort_unstable();
    classes.dedup();

    let mut blocks = Vec::with_capacity(classes.len());
    for class in classes {
        let members: Vec<&ProgramBlock> = program.blocks.iter().filter(|blk| class_of(&blk.members[0]) == class).collect();
        let rep = members[0];
        if members.iter().any(|m| m.r != rep.r) {
            return Err(Error::Unsupported("Schmidt caps differ within a permutation orbit".into()));
        }
        let rep_b = &rep.members[0];
        let mut perms = Vec::with_capacity(members.len());
        for m in &members {
            let target_b = &m.members[0];
            let to = if target_b.sites().len() == rep_b.sites().len() { target_b.sites().to_vec() } else { target_b.complement() };
            let pi = block_permutation(n, rep_b.sites(), &to);
            perms.push(induced_permutation(&program.frame, &pi, &support)?);
        }
        blocks.push(ProgramBlock {
            members: members.iter().map(|m| m.members[0].clone()).collect(),
            r: rep.r,
            maps: rep.maps.clone(),
            perms: Some(perms),
        });
    }
    Ok(LpProgram { frame: program.frame.clone(), sides: program.sides, blocks, reduced: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{bipartitions, embed, partial_trace_matrix, CMatrix};

    /// Dense route: apply 𝟙_S ⊗ tr_S − X/r to Σ s_a ψ_aψ_a† and read the ψ-diagonal.
    fn dense_map_action(frame: &DiagonalFrame, s: &[f64], b: &Bipartition, r: usize, side: Side) -> Vec<f64> {
        let shape = frame.shape();
        let v = frame.vectors();
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(s.len(), s.iter().map(|&x| C64::new(x, 0.0))));
        let sigma = v * diag * v.adjoint();
        let keep = other_block(b, side);
        let mapped = embed(&partial_trace_matrix(&sigma, shape, &keep).unwrap(), shape, &keep).unwrap() - sigma.unscale(r as f64);
        let rot = v.adjoint() * mapped * v;
        (0..s.len()).map(|a| rot[(a, a)].re).collect()
    }

    #[test]
    fn map_action_matches_dense_oracle() {
        for (target, n, d) in [(Target::Ghz, 3, 3), (Target::Cluster, 3, 3), (Target::Ghz, 2, 2), (Target::Cluster, 4, 2)] {
            let shape = RegisterShape::new(n, d).unwrap();
            let frame = DiagonalFrame::new(target, shape).unwrap();
            let dim = shape.dim();
            let s: Vec<f64> = (0..dim).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
            for b in bipartitions(shape).unwrap() {
                for r in 1..=d {
                    let got = lp_map_action(&frame, &s, &b, r, Sides::Both).unwrap();
                    let mut want = dense_map_action(&frame, &s, &b, r, Side::S);
                    want.extend(dense_map_action(&frame, &s, &b, r, Side::SBar));
                    for (x, y) in got.iter().zip(&want) {
                        assert!((x - y).abs() < 1e-12, "{target:?} ({n},{d}) {b} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn map_action_uniform_and_point_mass() {
        let shape = RegisterShape::new(3, 3).unwrap();
        let frame = DiagonalFrame::new(Target::Ghz, shape).unwrap();
        let b = &bipartitions(shape).unwrap()[0];
        let u = vec![1.0 / 27.0; 27];
        for x in lp_map_action(&frame, &u, b, 1, Sides::SOnly).unwrap() {
            assert!((x - (3.0 / 27.0 - 1.0 / 27.0)).abs() < 1e-14);
        }
        let shape2 = RegisterShape::new(2, 2).unwrap();
        let frame2 = DiagonalFrame::new(Target::Ghz, shape2).unwrap();
        let b2 = &bipartitions(shape2).unwrap()[0];
        let mut e0 = vec![0.0; 4];
        e0[0] = 1.0;
        let got = lp_map_action(&frame2, &e0, b2, 1, Sides::SOnly).unwrap();
        let want = dense_map_action(&frame2, &e0, b2, 1, Side::S);
        assert!((got[0] - (0.5 - 1.0)).abs() < 1e-14);
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    fn ghz_lp(n: usize, d: usize, r: usize) -> f64 {
        let shape = RegisterShape::new(n, d).unwrap();
        lp_gme_dimension(Target::Ghz, shape, r, Sides::Both, &Tolerances::default()).unwrap().v_star
    }

    #[test]
    fn small_table_values() {
        assert!((ghz_lp(3, 3, 1) - 0.25).abs() < 1e-6);
        assert!((ghz_lp(3, 2, 1) - 0.4286).abs() < 1e-4);
        assert!((ghz_lp(3, 3, 2) - 0.5909).abs() < 1e-4);
        assert!((ghz_lp(3, 3, 3) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn symmetry_reduction_agrees() {
        let tol = Tolerances::default();
        for (n, d, r) in [(3, 3, 1), (4, 3, 2), (4, 2, 1)] {
            let shape = RegisterShape::new(n, d).unwrap();
            let full = LpProgram::new(Target::Ghz, &SchmidtVectorHypothesis::uniform(shape, r).unwrap(), Sides::Both).unwrap();
            let red = ghz_symmetry_reduce(&full).unwrap();
            assert_eq!(red.num_blocks(), if n == 3 { 1 } else { 2 });
            let (a, b) = (full.solve(&tol).unwrap(), red.solve(&tol).unwrap());
            assert!((a.v_star - b.v_star).abs() < 1e-7, "({n},{d},{r}): {} vs {}", a.v_star, b.v_star);
        }
        let shape = RegisterShape::new(3, 3).unwrap();
        let cl = LpProgram::new(Target::Cluster, &SchmidtVectorHypothesis::uniform(shape, 1).unwrap(), Sides::Both).unwrap();
        assert!(ghz_symmetry_reduce(&cl).is_err());
        let one = LpProgram::new(Target::Ghz, &SchmidtVectorHypothesis::uniform(shape, 1).unwrap(), Sides::SOnly).unwrap();
        assert!(ghz_symmetry_reduce(&one).is_err());
    }
}
