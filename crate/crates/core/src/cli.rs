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

//! Command-line front end: closed-form bounds, relaxation solves and table
//! reproduction, emitted as JSON, CSV or aligned text.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::relax::{
    build_measurement_set, ghz_symmetry_reduce, lp_gme_dimension, lp_schmidt_vector, sdp_gme_dimension, sdp_statistics,
    LpProgram, MeasurementLabel, ReductionMapSpec, RelaxationResult, SchmidtVectorHypothesis, Sides,
};
use crate::states::{NoiseKind, NoiseModel, Target};
use crate::tensor::RegisterShape;
use crate::witness::{
    fidelity, fidelity_bound_general, minimal_witness_bound, tenbasis_bound, tenbasis_vcrit, vcrit_cluster,
    vcrit_fidelity, vcrit_ghz_dephasing, vcrit_ghz_depolarizing, GmeHypothesis,
};

const PUBLISHED: &str = include_str!("../data/published.json");

/// Exit code for invalid configuration or arguments.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when a computed row misses its tolerance or a check fails.
pub const EXIT_MISMATCH: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "gmedim", version, about = "Certify the GME-dimension of n-qudit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file overriding solver tolerances and budgets.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Budget::Default)]
    pub budget: Budget,
    /// Report wall-clock time per row (makes output non-deterministic).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Budget {
    Default,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundMethod {
    Fidelity,
    MinimalWitness,
    Tenbasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Lp,
    Sdp,
    SdpStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Ghz,
    Cluster,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Ghz => Target::Ghz,
            TargetArg::Cluster => Target::Cluster,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Depolarizing,
    Dephasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidesArg {
    Both,
    SOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableArg {
    Table1,
    Table2,
    Sm8,
    Sm9,
}

impl TableArg {
    fn key(&self) -> &'static str {
        match self {
            TableArg::Table1 => "table1",
            TableArg::Table2 => "table2",
            TableArg::Sm8 => "sm8",
            TableArg::Sm9 => "sm9",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form bound for a hypothesis, and its critical visibility under noise.
    Bound {
        #[arg(long, value_enum)]
        method: BoundMethod,
        #[arg(long, value_enum, default_value_t = TargetArg::Ghz)]
        target: TargetArg,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// GME-dimension ruled out when the bound is exceeded.
        #[arg(long)]
        dgme: usize,
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
    },
    /// Largest visibility of the depolarized target inside a relaxation.
    Solve {
        #[arg(long, value_enum)]
        method: SolveMethod,
        #[arg(long, value_enum, default_value_t = TargetArg::Ghz)]
        target: TargetArg,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Schmidt-number cap on every bipartition.
        #[arg(long)]
        r: Option<usize>,
        /// One cap per bipartition in canonical order, e.g. 1,1,2 (LP only).
        #[arg(long)]
        schmidt: Option<String>,
        /// Measurement sets for sdp-stats, e.g. EC,EF,EM.
        #[arg(long)]
        sets: Option<String>,
        #[arg(long, value_enum, default_value_t = SidesArg::Both)]
        sides: SidesArg,
    },
    /// Recompute a published table and compare.
    Reproduce {
        #[arg(value_enum)]
        table: TableArg,
    },
    /// Fast internal consistency checks.
    Selftest,
}

/// One output line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub hypothesis: String,
    pub value: Option<f64>,
    pub published: Option<f64>,
    pub deviation: Option<f64>,
    pub status: String,
    pub runtime_ms: Option<u128>,
    /// Relaxation rows only.
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
}

impl Row {
    fn new(method: &str, n: usize, d: usize, hypothesis: String, value: f64) -> Row {
        Row {
            method: method.into(),
            n,
            d,
            hypothesis,
            value: Some(value),
            published: None,
            deviation: None,
            status: "ok".into(),
            runtime_ms: None,
            residual: None,
            iterations: None,
        }
    }

    fn relaxation(method: &str, n: usize, d: usize, hypothesis: String, res: &RelaxationResult) -> Row {
        let mut row = Row::new(method, n, d, hypothesis, res.v_star);
        row.status = res.status.as_str().into();
        row.residual = Some(res.primal_residual);
        row.iterations = Some(res.iterations);
        row
    }
}

/// Outcome of a command: rows plus whether every comparison passed.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<Row>,
    pub passed: bool,
}

fn opt4(v: Option<f64>) -> String {
    v.map_or("null".into(), |x| format!("{x:.4}"))
}

fn sci(v: Option<f64>) -> String {
    v.map_or("null".into(), |x| format!("{x:.3e}"))
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_else(|_| "\"\"".into())
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Json => {
                out.push_str("[\n");
                for (i, r) in self.rows.iter().enumerate() {
                    let _ = write!(
                        out,
                        "  {{\"method\": {}, \"n\": {}, \"d\": {}, \"hypothesis\": {}, \"value\": {}, \"published\": {}, \"deviation\": {}, \"status\": {}, \"runtime_ms\": {}",
                        quoted(&r.method),
                        r.n,
                        r.d,
                        quoted(&r.hypothesis),
                        opt4(r.value),
                        opt4(r.published),
                        sci(r.deviation),
                        quoted(&r.status),
                        r.runtime_ms.map_or("null".into(), |t| t.to_string()),
                    );
                    if r.residual.is_some() {
                        let _ = write!(out, ", \"residual\": {}, \"iterations\": {}", sci(r.residual), r.iterations.unwrap_or(0));
                    }
                    out.push_str(if i + 1 == self.rows.len() { "}\n" } else { "},\n" });
                }
                out.push_str("]\n");
            }
            Format::Csv => {
                out.push_str("method,n,d,hypothesis,value,published,deviation,status,runtime_ms,residual,iterations\n");
                for r in &self.rows {
                    let blank = |s: String| if s == "null" { String::new() } else { s };
                    let _ = writeln!(
                        out,
                        "{},{},{},\"{}\",{},{},{},\"{}\",{},{},{}",
                        r.method,
                        r.n,
                        r.d,
                        r.hypothesis,
                        blank(opt4(r.value)),
                        blank(opt4(r.published)),
                        blank(sci(r.deviation)),
                        r.status.replace('"', "'"),
                        r.runtime_ms.map_or(String::new(), |t| t.to_string()),
                        blank(sci(r.residual)),
                        r.iterations.map_or(String::new(), |i| i.to_string()),
                    );
                }
            }
            Format::Table => {
                let _ = writeln!(
                    out,
                    "{:<22} {:>2} {:>2}  {:<18} {:>7} {:>9} {:>10}  {:<20} {:>10}",
                    "method", "n", "d", "hypothesis", "value", "published", "deviation", "status", "residual"
                );
                for r in &self.rows {
                    let dash = |s: String| if s == "null" { "-".to_string() } else { s };
                    let _ = write!(
                        out,
                        "{:<22} {:>2} {:>2}  {:<18} {:>7} {:>9} {:>10}  {:<20} {:>10}",
                        r.method,
                        r.n,
                        r.d,
                        r.hypothesis,
                        dash(opt4(r.value)),
                        dash(opt4(r.published)),
                        dash(sci(r.deviation)),
                        r.status,
                        dash(sci(r.residual)),
                    );
                    if let Some(t) = r.runtime_ms {
                        let _ = write!(out, " {t} ms");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn hypothesis_label(r: usize) -> String {
    format!("dgme={r}")
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("expected an integer list, got '{text}'"))))
        .collect()
}

fn parse_sets(text: &str) -> Result<Vec<MeasurementLabel>> {
    text.split(',').map(|s| MeasurementLabel::parse(s.trim())).collect()
}

/// Validated inputs of `bound`.
#[derive(Debug, Clone, Copy)]
pub struct BoundConfig {
    pub method: BoundMethod,
    pub target: Target,
    pub shape: RegisterShape,
    pub hypothesis: GmeHypothesis,
    pub noise: Option<NoiseKind>,
}

impl BoundConfig {
    pub fn new(method: BoundMethod, target: Target, n: usize, d: usize, dgme: usize, noise: Option<NoiseArg>) -> Result<Self> {
        let shape = RegisterShape::new(n, d)?;
        let hypothesis = GmeHypothesis::new(dgme, d)?;
        if method == BoundMethod::Tenbasis && (n != 3 || d.is_multiple_of(2) || target != Target::Ghz) {
            return Err(Error::Config("tenbasis needs the GHZ target with n = 3 and odd d".into()));
        }
        if method == BoundMethod::Tenbasis && noise == Some(NoiseArg::Dephasing) {
            return Err(Error::Config("tenbasis threshold is defined for depolarizing noise only".into()));
        }
        let noise = noise.map(|k| match k {
            NoiseArg::Depolarizing => NoiseKind::Depolarizing,
            NoiseArg::Dephasing => NoiseKind::Dephasing,
        });
        Ok(BoundConfig { method, target, shape, hypothesis, noise })
    }
}

/// Bound value, plus critical visibility when a noise model applies.
pub fn cmd_bound(cfg: &BoundConfig) -> Result<Report> {
    let (n, d) = (cfg.shape.n(), cfg.shape.d());
    let h = cfg.hypothesis;
    let label = hypothesis_label(h.d_gme());
    let psi = cfg.target.state(cfg.shape)?;
    let mut rows = Vec::new();
    let name = cfg.target.name();
    match cfg.method {
        BoundMethod::Fidelity => {
            let bound = fidelity_bound_general(&psi, h)?;
            rows.push(Row::new(&format!("fidelity-{name}"), n, d, label.clone(), bound));
            if let Some(kind) = cfg.noise {
                let noise_fid = fidelity(&NoiseModel::new(kind, 0.0)?.apply(&psi)?, &psi)?;
                rows.push(Row::new(&format!("fidelity-{name}-vcrit"), n, d, label, vcrit_fidelity(bound, noise_fid)));
            }
        }
        BoundMethod::MinimalWitness => {
            rows.push(Row::new(&format!("witness-{name}"), n, d, label.clone(), minimal_witness_bound(h)));
            if let Some(kind) = cfg.noise {
                let v = match (cfg.target, kind) {
                    (Target::Ghz, NoiseKind::Depolarizing) => vcrit_ghz_depolarizing(n, h)?,
                    (Target::Ghz, NoiseKind::Dephasing) => vcrit_ghz_dephasing(h),
                    (Target::Cluster, _) => vcrit_cluster(n, h)?,
                };
                rows.push(Row::new(&format!("witness-{name}-vcrit"), n, d, label, v));
            }
        }
        BoundMethod::Tenbasis => {
            rows.push(Row::new("tenbasis", n, d, label.clone(), tenbasis_bound(h)));
            rows.push(Row::new("tenbasis-vcrit", n, d, label, tenbasis_vcrit(h)?));
        }
    }
    Ok(Report { rows, passed: true })
}

/// Validated inputs of `solve`.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub method: SolveMethod,
    pub target: Target,
    pub shape: RegisterShape,
    pub r: Option<usize>,
    pub schmidt: Option<SchmidtVectorHypothesis>,
    pub sets: Vec<MeasurementLabel>,
    pub sides: Sides,
}

impl SolveConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        method: SolveMethod,
        target: Target,
        n: usize,
        d: usize,
        r: Option<usize>,
        schmidt: Option<&str>,
        sets: Option<&str>,
        sides: SidesArg,
        tol: &Tolerances,
    ) -> Result<Self> {
        let shape = RegisterShape::with_limit(n, d, tol.max_dim)?;
        let sides = match sides {
            SidesArg::Both => Sides::Both,
            SidesArg::SOnly => Sides::SOnly,
        };
        let schmidt = match schmidt {
            Some(text) => {
                if method != SolveMethod::Lp {
                    return Err(Error::Config("--schmidt is supported by the lp method only".into()));
                }
                Some(SchmidtVectorHypothesis::new(shape, parse_list(text)?)?)
            }
            None => None,
        };
        if schmidt.is_some() == r.is_some() {
            return Err(Error::Config("give exactly one of --r and --schmidt".into()));
        }
        if let Some(r) = r {
            ReductionMapSpec::new(r, sides)?;
        }
        let sets = match (method, sets) {
            (SolveMethod::SdpStats, Some(text)) => parse_sets(text)?,
            (SolveMethod::SdpStats, None) => return Err(Error::Config("sdp-stats needs --sets".into())),
            (_, Some(_)) => return Err(Error::Config("--sets is only used by sdp-stats".into())),
            (_, None) => Vec::new(),
        };
        if method != SolveMethod::Lp && shape.dim() > tol.sdp_max_dim {
            return Err(Error::Budget { n, d, limit: tol.sdp_max_dim });
        }
        Ok(SolveConfig { method, target, shape, r, schmidt, sets, sides })
    }
}

pub fn cmd_solve(cfg: &SolveConfig, tol: &Tolerances) -> Result<Report> {
    let (n, d) = (cfg.shape.n(), cfg.shape.d());
    let name = cfg.target.name();
    let row = match (&cfg.schmidt, cfg.r) {
        (Some(hyp), _) => {
            let res = lp_schmidt_vector(cfg.target, hyp, cfg.sides, tol)?;
            let ranks: Vec<String> = hyp.ranks().iter().map(|r| r.to_string()).collect();
            Row::relaxation(&format!("lp-{name}"), n, d, format!("ranks={}", ranks.join(",")), &res)
        }
        (None, Some(r)) => {
            let spec = ReductionMapSpec::new(r, cfg.sides)?;
            let rho = cfg.target.state(cfg.shape)?.projector();
            let (method, res) = match cfg.method {
                SolveMethod::Lp => ("lp", lp_gme_dimension(cfg.target, cfg.shape, r, cfg.sides, tol)?),
                SolveMethod::Sdp => ("sdp", sdp_gme_dimension(&rho, spec, tol)?),
                SolveMethod::SdpStats => {
                    let sets = cfg
                        .sets
                        .iter()
                        .map(|&l| build_measurement_set(l, cfg.shape))
                        .collect::<Result<Vec<_>>>()?;
                    ("sdp-stats", sdp_statistics(&rho, spec, &sets, tol)?)
                }
            };
            let mut hyp = hypothesis_label(r);
            if !cfg.sets.is_empty() {
                let labels: Vec<&str> = cfg.sets.iter().map(|l| l.as_str()).collect();
                hyp = format!("{hyp};{}", labels.join("+"));
            }
            Row::relaxation(&format!("{method}-{name}"), n, d, hyp, &res)
        }
        (None, None) => return Err(Error::Config("give exactly one of --r and --schmidt".into())),
    };
    Ok(Report { rows: vec![row], passed: true })
}

#[derive(Debug, Clone, Deserialize)]
struct PublishedFile {
    rows: Vec<PublishedRow>,
}

/// One published cell and how to recompute it.
#[derive(Debug, Clone, Deserialize)]
pub struct PublishedRow {
    pub table: String,
    pub kind: String,
    pub target: Target,
    pub n: usize,
    pub d: usize,
    pub r: Option<usize>,
    pub published: Vec<f64>,
    pub tol: f64,
    pub extended: bool,
    #[serde(default)]
    pub ranks: Option<Vec<usize>>,
    #[serde(default)]
    pub sets: Option<Vec<String>>,
    #[serde(default)]
    pub label: Option<String>,
}

/// Every published row of one table.
pub fn published_rows(table: &str) -> Result<Vec<PublishedRow>> {
    let file: PublishedFile =
        serde_json::from_str(PUBLISHED).map_err(|e| Error::Config(format!("embedded reference data: {e}")))?;
    Ok(file.rows.into_iter().filter(|r| r.table == table).collect())
}

impl PublishedRow {
    fn method(&self) -> String {
        let base = match self.kind.as_str() {
            "lp" | "lp-schmidt" => "lp",
            "minimal-witness" => "witness",
            other => other,
        };
        format!("{base}-{}", self.target.name())
    }

    fn hypothesis(&self) -> String {
        match (&self.ranks, self.r) {
            (Some(_), _) => format!("ranks={}", self.label.clone().unwrap_or_default()),
            (None, Some(r)) => match &self.sets {
                Some(sets) => format!("dgme={r};{}", sets.join("+")),
                None => hypothesis_label(r),
            },
            (None, None) => String::new(),
        }
    }

    fn compute(&self, tol: &Tolerances) -> Result<(f64, Option<RelaxationResult>)> {
        let shape = RegisterShape::with_limit(self.n, self.d, tol.max_dim)?;
        let cap = || self.r.ok_or_else(|| Error::Config("reference row lacks r".into()));
        match self.kind.as_str() {
            "fidelity" => {
                let h = GmeHypothesis::new(cap()?, self.d)?;
                let psi = self.target.state(shape)?;
                let bound = fidelity_bound_general(&psi, h)?;
                let noise_fid = 1.0 / shape.dim() as f64;
                Ok((vcrit_fidelity(bound, noise_fid), None))
            }
            "minimal-witness" => {
                let h = GmeHypothesis::new(cap()?, self.d)?;
                let v = match self.target {
                    Target::Ghz => vcrit_ghz_depolarizing(self.n, h)?,
                    Target::Cluster => vcrit_cluster(self.n, h)?,
                };
                Ok((v, None))
            }
            "lp" => {
                let r = cap()?;
                // large GHZ rows use the permutation-reduced program
                let res = if self.target == Target::Ghz && self.n >= 5 {
                    let full = LpProgram::new(self.target, &SchmidtVectorHypothesis::uniform(shape, r)?, Sides::Both)?;
                    ghz_symmetry_reduce(&full)?.solve(tol)?
                } else {
                    lp_gme_dimension(self.target, shape, r, Sides::Both, tol)?
                };
                Ok((res.v_star, Some(res)))
            }
            "lp-schmidt" => {
                let ranks = self.ranks.clone().ok_or_else(|| Error::Config("reference row lacks ranks".into()))?;
                let res = lp_schmidt_vector(self.target, &SchmidtVectorHypothesis::new(shape, ranks)?, Sides::Both, tol)?;
                Ok((res.v_star, Some(res)))
            }
            "sdp-stats" => {
                let spec = ReductionMapSpec::new(cap()?, Sides::Both)?;
                let labels = self.sets.clone().unwrap_or_default();
                let sets = labels
                    .iter()
                    .map(|l| build_measurement_set(MeasurementLabel::parse(l)?, shape))
                    .collect::<Result<Vec<_>>>()?;
                let rho = self.target.state(shape)?.projector();
                let res = sdp_statistics(&rho, spec, &sets, tol)?;
                Ok((res.v_star, Some(res)))
            }
            other => Err(Error::Config(format!("unknown reference kind '{other}'"))),
        }
    }

    /// Computes the row and compares it with the nearest published value.
    pub fn evaluate(&self, tol: &Tolerances, budget: Budget, timings: bool) -> Row {
        let mut row = Row {
            method: self.method(),
            n: self.n,
            d: self.d,
            hypothesis: self.hypothesis(),
            value: None,
            published: self.published.first().copied(),
            deviation: None,
            status: String::new(),
            runtime_ms: None,
            residual: None,
            iterations: None,
        };
        if self.extended && budget == Budget::Default {
            row.status = "skipped (extended budget)".into();
            return row;
        }
        let start = Instant::now();
        let outcome = self.compute(tol);
        if timings {
            row.runtime_ms = Some(start.elapsed().as_millis());
        }
        match outcome {
            Err(e) => row.status = format!("error: {e}"),
            Ok((value, res)) => {
                row.value = Some(value);
                if let Some(res) = res {
                    row.residual = Some(res.primal_residual);
                    row.iterations = Some(res.iterations);
                }
                let nearest = self
                    .published
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
                    .unwrap_or(f64::NAN);
                let dev = (value - nearest).abs();
                row.published = Some(nearest);
                row.deviation = Some(dev);
                row.status = if dev.is_nan() || dev > self.tol {
                    "fail".into()
                } else if self.published.len() > 1 {
                    format!("ok (matches {nearest:.4})")
                } else {
                    "ok".into()
                };
            }
        }
        row
    }
}

fn row_passed(row: &Row) -> bool {
    row.status.starts_with("ok") || row.status.starts_with("skipped")
}

pub fn cmd_reproduce(table: TableArg, tol: &Tolerances, budget: Budget, timings: bool) -> Result<Report> {
    let specs = published_rows(table.key())?;
    let rows: Vec<Row> = specs.par_iter().map(|s| s.evaluate(tol, budget, timings)).collect();
    let passed = rows.iter().all(row_passed);
    Ok(Report { rows, passed })
}

/// Closed forms, witness identities and one LP cell against known values.
pub fn cmd_selftest(tol: &Tolerances) -> Result<Report> {
    let mut rows = Vec::new();
    let mut check = |method: &str, n: usize, d: usize, hyp: &str, value: f64, expected: f64, limit: f64| {
        let mut row = Row::new(method, n, d, hyp.into(), value);
        row.published = Some(expected);
        row.deviation = Some((value - expected).abs());
        row.status = if (value - expected).abs() <= limit { "ok".into() } else { "fail".into() };
        rows.push(row);
    };
    check("witness-ghz-vcrit", 4, 3, "dgme=2", vcrit_ghz_depolarizing(4, GmeHypothesis::new(2, 3)?)?, 35.0 / 44.0, 1e-12);
    check("witness-cluster-vcrit", 4, 3, "dgme=2", vcrit_cluster(4, GmeHypothesis::new(2, 3)?)?, 13.0 / 16.0, 1e-12);
    check("witness-ghz-dephasing", 3, 3, "dgme=2", vcrit_ghz_dephasing(GmeHypothesis::new(2, 3)?), 0.5, 1e-12);
    check("tenbasis-vcrit", 3, 3, "dgme=2", tenbasis_vcrit(GmeHypothesis::new(2, 3)?)?, 17.0 / 26.0, 1e-12);
    let shape = RegisterShape::new(3, 3)?;
    for target in [Target::Ghz, Target::Cluster] {
        let psi = target.state(shape)?;
        let op = match target {
            Target::Ghz => crate::witness::ghz_witness_operator(3, 3)?,
            Target::Cluster => crate::witness::cluster_witness_operator(3, 3)?,
        };
        check(&format!("witness-{}", target.name()), 3, 3, "perfect", op.expectation_pure(&psi)?, 2.0, 1e-10);
    }
    let lp = lp_gme_dimension(Target::Ghz, shape, 1, Sides::Both, tol)?;
    check("lp-ghz", 3, 3, "dgme=1", lp.v_star, 0.25, 1e-6);
    let passed = rows.iter().all(row_passed);
    Ok(Report { rows, passed })
}

fn load_tolerances(path: Option<&PathBuf>) -> Result<Tolerances> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            Tolerances::from_toml(&text)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(text) = std::env::var("GMEDIM_THREADS") {
        let threads: usize =
            text.parse().map_err(|_| Error::Config(format!("GMEDIM_THREADS must be a positive integer, got '{text}'")))?;
        if threads == 0 {
            return Err(Error::Config("GMEDIM_THREADS must be a positive integer, got '0'".into()));
        }
        // a pool may already exist when embedded; the first configuration wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

enum Prepared {
    Bound(BoundConfig),
    Solve(SolveConfig),
    Reproduce(TableArg),
    Selftest,
}

/// Parses and validates everything before any computation.
fn prepare(cli: &Cli) -> Result<(Tolerances, Prepared)> {
    configure_threads()?;
    let tol = load_tolerances(cli.config.as_ref())?;
    let prepared = match &cli.command {
        Command::Bound { method, target, n, d, dgme, noise } => {
            Prepared::Bound(BoundConfig::new(*method, (*target).into(), *n, *d, *dgme, *noise)?)
        }
        Command::Solve { method, target, n, d, r, schmidt, sets, sides } => Prepared::Solve(SolveConfig::new(
            *method,
            (*target).into(),
            *n,
            *d,
            *r,
            schmidt.as_deref(),
            sets.as_deref(),
            *sides,
            &tol,
        )?),
        Command::Reproduce { table } => Prepared::Reproduce(*table),
        Command::Selftest => Prepared::Selftest,
    };
    Ok((tol, prepared))
}

/// Runs the parsed command line, writes the report and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (tol, prepared) = match prepare(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("gmedim: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match prepared {
        Prepared::Bound(cfg) => {
            let start = Instant::now();
            cmd_bound(&cfg).map(|rep| with_timing(rep, cli.timings, start))
        }
        Prepared::Solve(cfg) => {
            let start = Instant::now();
            cmd_solve(&cfg, &tol).map(|rep| with_timing(rep, cli.timings, start))
        }
        Prepared::Reproduce(table) => cmd_reproduce(table, &tol, cli.budget, cli.timings),
        Prepared::Selftest => cmd_selftest(&tol),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::Budget { .. } | Error::Hypothesis { .. } | Error::InvalidShape(_))) => {
            eprintln!("gmedim: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("gmedim: {e}");
            return EXIT_MISMATCH;
        }
    };
    let text = report.render(cli.format);
    print!("{text}");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("gmedim: cannot write {}: {e}", path.display());
            return EXIT_MISMATCH;
        }
    }
    if report.passed {
        0
    } else {
        EXIT_MISMATCH
    }
}

fn with_timing(mut rep: Report, timings: bool, start: Instant) -> Report {
    if timings {
        let ms = start.elapsed().as_millis();
        for row in &mut rep.rows {
            row.runtime_ms = Some(ms);
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("gmedim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn minimal_witness_vcrit() {
        let cfg = BoundConfig::new(BoundMethod::MinimalWitness, Target::Ghz, 4, 3, 2, Some(NoiseArg::Depolarizing)).unwrap();
        let rep = cmd_bound(&cfg).unwrap();
        assert_eq!(opt4(rep.rows[1].value), "0.7955");
    }

    #[test]
    fn cluster_fidelity_bound() {
        let cfg = BoundConfig::new(BoundMethod::Fidelity, Target::Cluster, 3, 4, 3, None).unwrap();
        assert_eq!(opt4(cmd_bound(&cfg).unwrap().rows[0].value), "0.7500");
    }

    #[test]
    fn tenbasis_checks_shape() {
        assert!(BoundConfig::new(BoundMethod::Tenbasis, Target::Ghz, 3, 4, 2, None).is_err());
        let cfg = BoundConfig::new(BoundMethod::Tenbasis, Target::Ghz, 3, 3, 2, None).unwrap();
        assert_eq!(opt4(cmd_bound(&cfg).unwrap().rows[1].value), "0.6538");
    }

    #[test]
    fn schmidt_solve() {
        let tol = Tolerances::default();
        let cfg = SolveConfig::new(SolveMethod::Lp, Target::Ghz, 3, 3, None, Some("1,2,1"), None, SidesArg::Both, &tol).unwrap();
        assert_eq!(opt4(cmd_solve(&cfg, &tol).unwrap().rows[0].value), "0.4375");
    }

    #[test]
    fn invalid_config_exit_code() {
        assert_eq!(run(parse(&["solve", "--method", "lp", "--d", "3"])), EXIT_CONFIG);
        assert_eq!(run(parse(&["bound", "--method", "tenbasis", "--d", "4", "--dgme", "2"])), EXIT_CONFIG);
    }

    #[test]
    fn output_is_deterministic() {
        let tol = Tolerances::default();
        let a = cmd_reproduce(TableArg::Sm9, &tol, Budget::Default, false).unwrap();
        let b = cmd_reproduce(TableArg::Sm9, &tol, Budget::Default, false).unwrap();
        assert!(a.passed);
        for f in [Format::Json, Format::Csv, Format::Table] {
            assert_eq!(a.render(f), b.render(f));
        }
    }

    #[test]
    fn reference_data_parses() {
        for t in ["table1", "table2", "sm8", "sm9"] {
            assert!(!published_rows(t).unwrap().is_empty());
        }
        assert_eq!(published_rows("sm9").unwrap().len(), 15);
    }
}
