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

//! Mehrotra predictor-corrector interior-point method for the block-angular
//! visibility LP
//!
//! ```text
//! maximize v
//! s.t. Σ_k E_k s_k + g·v = b,  s_k ≥ 0,  A_kj s_k ≥ 0,  v ≤ 1.
//! ```
//!
//! Each Newton step factors one small dense matrix per block and a Schur
//! complement on the equality rows.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct LpBlockData {
    /// Matrices A with the constraint A s ≥ 0.
    pub constraints: Vec<DMatrix<f64>>,
    /// Linking matrix E_k; `None` is the identity.
    pub link: Option<DMatrix<f64>>,
}

pub(crate) struct BlockLp {
    pub blocks: Vec<LpBlockData>,
    pub g: DVector<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub v: f64,
    pub s: Vec<DVector<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest violation of the equality rows or of any inequality.
    pub primal_residual: f64,
}

#[derive(Clone)]
struct Point {
    v: f64,
    s: Vec<DVector<f64>>,
    y: DVector<f64>,
    // per block: group 0 is s ≥ 0, then one group per constraint matrix
    z: Vec<Vec<DVector<f64>>>,
    lam: Vec<Vec<DVector<f64>>>,
    zv: f64,
    lv: f64,
}

struct Direction {
    dv: f64,
    ds: Vec<DVector<f64>>,
    dy: DVector<f64>,
    dz: Vec<Vec<DVector<f64>>>,
    dl: Vec<Vec<DVector<f64>>>,
    dzv: f64,
    dlv: f64,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DVector<f64>>,
    rdv: f64,
    rg: Vec<Vec<DVector<f64>>>,
    rgv: f64,
}

impl BlockLp {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn link_mul(&self, k: usize, s: &DVector<f64>) -> DVector<f64> {
        match &self.blocks[k].link {
            None => s.clone(),
            Some(e) => e * s,
        }
    }

    fn link_tr_mul(&self, k: usize, y: &DVector<f64>) -> DVector<f64> {
        match &self.blocks[k].link {
            None => y.clone(),
            Some(e) => e.tr_mul(y),
        }
    }

    fn residuals(&self, p: &Point) -> Residuals {
        let mut rp = &self.g * p.v - &self.b;
        let mut rd = Vec::with_capacity(self.blocks.len());
        let mut rg = Vec::with_capacity(self.blocks.len());
        for (k, blk) in self.blocks.iter().enumerate() {
            rp += self.link_mul(k, &p.s[k]);
            let mut d = self.link_tr_mul(k, &p.y) - &p.lam[k][0];
            let mut g = vec![&p.z[k][0] - &p.s[k]];
            for (j, a) in blk.constraints.iter().enumerate() {
                d -= a.tr_mul(&p.lam[k][j + 1]);
                g.push(&p.z[k][j + 1] - a * &p.s[k]);
            }
            rd.push(d);
            rg.push(g);
        }
        let rdv = -1.0 + self.g.dot(&p.y) + p.lv;
        let rgv = p.v + p.zv - 1.0;
        Residuals { rp, rd, rdv, rg, rgv }
    }
}

fn pairs(p: &Point) -> impl Iterator<Item = (f64, f64)> + '_ {
    p.z.iter()
        .zip(&p.lam)
        .flat_map(|(zk, lk)| zk.iter().zip(lk).flat_map(|(z, l)| z.iter().copied().zip(l.iter().copied())))
        .chain(std::iter::once((p.zv, p.lv)))
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn cholesky(mut m: DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Ok(c);
        }
        let bump = if reg == 0.0 { scale * 1e-14 } else { reg * 100.0 };
        for i in 0..m.nrows() {
            m[(i, i)] += bump - reg;
        }
        reg = bump;
    }
    Err(Error::Solver("normal-equation matrix is not positive definite".into()))
}

/// Largest step in (0, 1] keeping x + α dx > 0.
fn max_step(x: f64, dx: f64, alpha: f64) -> f64 {
    if dx < 0.0 {
        alpha.min(-x / dx)
    } else {
        alpha
    }
}

pub(crate) fn solve(lp: &BlockLp, start: Vec<DVector<f64>>, tol: f64, max_iter: usize) -> Result<LpSolution> {
    let m = lp.dim();
    let nblk = lp.blocks.len();
    if start.len() != nblk {
        return Err(Error::Solver("start point has the wrong number of blocks".into()));
    }
    let mut p = {
        let mut z = Vec::with_capacity(nblk);
        let mut lam = Vec::with_capacity(nblk);
        for (k, blk) in lp.blocks.iter().enumerate() {
            let mut zk = vec![start[k].clone()];
            for a in &blk.constraints {
                zk.push(a * &start[k]);
            }
            for zz in &zk {
                if zz.iter().any(|&x| x <= 0.0) {
                    return Err(Error::Solver("start point is not strictly interior".into()));
                }
            }
            lam.push(zk.iter().map(|zz| DVector::from_element(zz.len(), 1.0)).collect());
            z.push(zk);
        }
        Point { v: 0.0, s: start, y: DVector::zeros(m), z, lam, zv: 1.0, lv: 1.0 }
    };
    let ncomp: usize = pairs(&p).count();
    let bnorm = 1.0 + max_abs(&lp.b);
    let mut converged = false;
    let mut iterations = 0;

    let mut last_near: Option<(Point, f64)> = None;
    'outer: for it in 0..max_iter {
        iterations = it + 1;
        let res = lp.residuals(&p);
        let mu = pairs(&p).map(|(z, l)| z * l).sum::<f64>() / ncomp as f64;
        let pinf = max_abs(&res.rp).max(res.rgv.abs()).max(
            res.rg.iter().flatten().map(max_abs).fold(0.0, f64::max),
        ) / bnorm;
        let dinf = res.rd.iter().map(max_abs).fold(res.rdv.abs(), f64::max);
        let gap = mu * ncomp as f64;
        if pinf < tol && dinf < tol && gap < tol * (1.0 + p.v.abs()) {
            converged = true;
            iterations = it;
            break;
        }
        // a near-optimal point is accepted if the next step breaks down numerically
        if let Some((prev, prev_pinf)) = last_near.take() {
            if pinf > (10.0 * prev_pinf).max(tol) {
                p = prev;
                converged = true;
                break;
            }
        }
        let near = pinf < tol && dinf < tol && gap < 100.0 * tol * (1.0 + p.v.abs());
        if near {
            last_near = Some((p.clone(), pinf));
        }

        // block factorizations reused by predictor and corrector
        let mut hchol = Vec::with_capacity(nblk);
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (k, blk) in lp.blocks.iter().enumerate() {
            let w0 = p.lam[k][0].component_div(&p.z[k][0]);
            let mut h = DMatrix::from_diagonal(&w0);
            for (j, a) in blk.constraints.iter().enumerate() {
                let w = p.lam[k][j + 1].component_div(&p.z[k][j + 1]);
                let mut wa = a.clone();
                for (r, mut row) in wa.row_iter_mut().enumerate() {
                    row *= w[r];
                }
                h += a.tr_mul(&wa);
            }
            let c = match cholesky(h) {
                Ok(c) => c,
                Err(_) if near => {
                    converged = true;
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            let hinv = c.inverse();
            match &blk.link {
                None => schur += &hinv,
                Some(e) => schur += e * &hinv * e.transpose(),
            }
            hchol.push(c);
        }
        let wv = p.lv / p.zv;
        schur += &lp.g * lp.g.transpose() / wv;
        let schur = match cholesky(schur) {
            Ok(c) => c,
            Err(_) if near => {
                converged = true;
                break;
            }
            Err(e) => return Err(e),
        };

        let direction = |rc: &dyn Fn(usize, usize, usize) -> f64, rcv: f64| -> Direction {
            // q = W r_g − r_c / z for each inequality group
            let mut rho = Vec::with_capacity(nblk);
            let mut rhs = res.rp.clone();
            let mut q_all = Vec::with_capacity(nblk);
            for (k, blk) in lp.blocks.iter().enumerate() {
                let mut q = Vec::with_capacity(blk.constraints.len() + 1);
                for grp in 0..=blk.constraints.len() {
                    let z = &p.z[k][grp];
                    let l = &p.lam[k][grp];
                    let r = &res.rg[k][grp];
                    q.push(DVector::from_fn(z.len(), |i, _| (l[i] * r[i] - rc(k, grp, i)) / z[i]));
                }
                let mut rk = -&res.rd[k] + &q[0];
                for (j, a) in blk.constraints.iter().enumerate() {
                    rk += a.tr_mul(&q[j + 1]);
                }
                rhs += lp.link_mul(k, &hchol[k].solve(&rk));
                rho.push(rk);
                q_all.push(q);
            }
            let qv = (p.lv * res.rgv - rcv) / p.zv;
            let rhov = -res.rdv - qv;
            rhs += &lp.g * (rhov / wv);
            let dy = schur.solve(&rhs);
            let dv = (rhov - lp.g.dot(&dy)) / wv;
            let mut ds = Vec::with_capacity(nblk);
            let mut dz = Vec::with_capacity(nblk);
            let mut dl = Vec::with_capacity(nblk);
            for (k, blk) in lp.blocks.iter().enumerate() {
                let dsk = hchol[k].solve(&(&rho[k] - lp.link_tr_mul(k, &dy)));
                let mut gdx = vec![-&dsk];
                for a in &blk.constraints {
                    gdx.push(-(a * &dsk));
                }
                let mut dzk = Vec::with_capacity(gdx.len());
                let mut dlk = Vec::with_capacity(gdx.len());
                for (grp, gx) in gdx.iter().enumerate() {
                    let z = &p.z[k][grp];
                    let l = &p.lam[k][grp];
                    let r = &res.rg[k][grp];
                    dzk.push(-r - gx);
                    dlk.push(DVector::from_fn(z.len(), |i, _| {
                        l[i] / z[i] * (gx[i] + r[i]) - rc(k, grp, i) / z[i]
                    }));
                }
                ds.push(dsk);
                dz.push(dzk);
                dl.push(dlk);
            }
            let dzv = -res.rgv - dv;
            let dlv = wv * (dv + res.rgv) - rcv / p.zv;
            Direction { dv, ds, dy, dz, dl, dzv, dlv }
        };

        let step = |dir: &Direction| -> (f64, f64) {
            let (mut ap, mut ad) = (1.0f64, 1.0f64);
            for k in 0..nblk {
                for grp in 0..p.z[k].len() {
                    for i in 0..p.z[k][grp].len() {
                        ap = max_step(p.z[k][grp][i], dir.dz[k][grp][i], ap);
                        ad = max_step(p.lam[k][grp][i], dir.dl[k][grp][i], ad);
                    }
                }
            }
            ap = max_step(p.zv, dir.dzv, ap);
            ad = max_step(p.lv, dir.dlv, ad);
            (ap, ad)
        };

        // predictor
        let zl = |k: usize, g: usize, i: usize| p.z[k][g][i] * p.lam[k][g][i];
        let aff = direction(&zl, p.zv * p.lv);
        let (ap, ad) = step(&aff);
        let mut mu_aff = 0.0;
        for k in 0..nblk {
            for g in 0..p.z[k].len() {
                for i in 0..p.z[k][g].len() {
                    mu_aff += (p.z[k][g][i] + ap * aff.dz[k][g][i]) * (p.lam[k][g][i] + ad * aff.dl[k][g][i]);
                }
            }
        }
        mu_aff += (p.zv + ap * aff.dzv) * (p.lv + ad * aff.dlv);
        mu_aff /= ncomp as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // corrector
        let cc = |k: usize, g: usize, i: usize| {
            p.z[k][g][i] * p.lam[k][g][i] + aff.dz[k][g][i] * aff.dl[k][g][i] - sigma * mu
        };
        let dir = direction(&cc, p.zv * p.lv + aff.dzv * aff.dlv - sigma * mu);
        let (ap, ad) = step(&dir);
        let (ap, ad) = ((0.99 * ap).min(1.0), (0.99 * ad).min(1.0));

        let previous = p.clone();
        p.v += ap * dir.dv;
        p.zv += ap * dir.dzv;
        p.lv += ad * dir.dlv;
        p.y += &dir.dy * ad;
        for k in 0..nblk {
            p.s[k] += &dir.ds[k] * ap;
            for g in 0..p.z[k].len() {
                p.z[k][g] += &dir.dz[k][g] * ap;
                p.lam[k][g] += &dir.dl[k][g] * ad;
            }
        }
        let finite = p.v.is_finite() && p.s.iter().all(|s| s.iter().all(|x| x.is_finite()));
        if !finite {
            p = previous;
            if near {
                converged = true;
                break;
            }
            return Err(Error::Solver("interior-point step produced non-finite values".into()));
        }
    }

    // residual of the primal point itself (slacks are not trusted)
    let mut eq = &lp.g * p.v - &lp.b;
    let mut viol = 0.0f64;
    for (k, blk) in lp.blocks.iter().enumerate() {
        eq += lp.link_mul(k, &p.s[k]);
        viol = viol.max(-p.s[k].min());
        for a in &blk.constraints {
            viol = viol.max(-(a * &p.s[k]).min());
        }
    }
    viol = viol.max(p.v - 1.0);
    let primal_residual = max_abs(&eq).max(viol.max(0.0));
    Ok(LpSolution { v: p.v, s: p.s, iterations, converged, primal_residual })
}
