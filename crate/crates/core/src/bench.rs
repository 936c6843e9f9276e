//! Timing harness comparing the closed-form solver with the baseline on
//! seeded random instances.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{certify_solution, certify_weights};
use crate::dtpak::{solve_with_transform, DtpakOptions, SolveOutcome};
use crate::error::{Error, Result};
use crate::problem::{generate, EpsilonRule, GeneratorConfig, RabProblem, TransformKind};
use crate::rmvb::rmvb_solve;

pub const CSV_HEADER: &str = "n,a_kind,rank,epsilon_sq,solver,wall_ns,constraint_satisfaction,stationarity_residual,objective,verdict";

/// `verdict` value marking per-`(n, solver)` summary rows.
pub const SUMMARY_VERDICT: &str = "summary";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Dtpak,
    Rmvb,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Dtpak => "dtpak",
            SolverKind::Rmvb => "rmvb",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtpak" => Ok(SolverKind::Dtpak),
            "rmvb" => Ok(SolverKind::Rmvb),
            other => Err(Error::InvalidConfig(format!(
                "unknown solver `{other}` (expected dtpak or rmvb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub a_kind: String,
    pub rank: usize,
    pub epsilon_sq: f64,
    pub solver: String,
    pub wall_ns: u64,
    pub constraint_satisfaction: f64,
    pub stationarity_residual: f64,
    pub objective: f64,
    pub verdict: String,
}

impl BenchRecord {
    pub fn is_summary(&self) -> bool {
        self.verdict == SUMMARY_VERDICT
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub count: usize,
    pub solvers: Vec<SolverKind>,
    pub seed: u64,
    pub transform: TransformKind,
    /// Rank-deficient covariances with this rule; full rank when absent.
    pub rank_deficient: Option<EpsilonRule>,
}

impl BenchConfig {
    pub fn new(dims: Vec<usize>, count: usize, solvers: Vec<SolverKind>, seed: u64) -> Self {
        BenchConfig {
            dims,
            count,
            solvers,
            seed,
            transform: TransformKind::SquareN,
            rank_deficient: None,
        }
    }

    fn instance_config(&self, n: usize, seed: u64) -> GeneratorConfig {
        let mut cfg = match self.rank_deficient {
            Some(rule) => GeneratorConfig::rank_deficient(n, rule, seed),
            None => GeneratorConfig::full_rank(n, seed),
        };
        cfg.transform_kind = self.transform;
        cfg
    }

    /// Instance configurations in run order. Seeds are drawn from one
    /// stream keyed by `seed`, so the set depends only on this config.
    pub fn instances(&self) -> Vec<GeneratorConfig> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.dims.len() * self.count);
        for &n in &self.dims {
            for _ in 0..self.count {
                let s: u64 = rng.random();
                out.push(self.instance_config(n, s));
            }
        }
        out
    }
}

fn record(cfg: &GeneratorConfig, p: &RabProblem, solver: SolverKind) -> BenchRecord {
    BenchRecord {
        n: cfg.n,
        a_kind: "steering".into(),
        rank: cfg.covariance_rank,
        epsilon_sq: p.epsilon * p.epsilon,
        solver: solver.as_str().into(),
        wall_ns: 0,
        constraint_satisfaction: f64::NAN,
        stationarity_residual: f64::NAN,
        objective: f64::NAN,
        verdict: String::new(),
    }
}

fn elapsed_ns(start: Instant) -> u64 {
    (start.elapsed().as_nanos() as u64).max(1)
}

fn error_name(e: &Error) -> String {
    let dbg = format!("{e:?}");
    let end = dbg.find([' ', '(', '{']).unwrap_or(dbg.len());
    format!("error:{}", &dbg[..end])
}

/// Time one solver on one instance. Timing covers the full solver call and
/// excludes certification.
pub fn run_one(cfg: &GeneratorConfig, p: &RabProblem, solver: SolverKind) -> BenchRecord {
    let mut rec = record(cfg, p, solver);
    let opts = DtpakOptions::default();
    match solver {
        SolverKind::Dtpak => {
            let start = Instant::now();
            let result = solve_with_transform(p, &opts);
            rec.wall_ns = elapsed_ns(start);
            match result {
                Ok((d, out)) => {
                    rec.verdict = out.verdict().to_string();
                    if let SolveOutcome::Solved(s) = &out {
                        rec.objective = s.objective;
                        if let Ok(c) = certify_solution(p, &d, s) {
                            rec.constraint_satisfaction = c.constraint_satisfaction;
                            rec.stationarity_residual = c.stationarity_residual;
                        }
                    }
                }
                Err(e) => rec.verdict = error_name(&e),
            }
        }
        SolverKind::Rmvb => {
            let start = Instant::now();
            let result = rmvb_solve(p);
            rec.wall_ns = elapsed_ns(start);
            match result {
                Ok(s) => {
                    rec.verdict = "Solved".into();
                    rec.objective = s.objective;
                    if let Ok(c) = certify_weights(p, &s.w, None, &opts) {
                        rec.constraint_satisfaction = c.constraint_satisfaction;
                        rec.stationarity_residual = c.stationarity_residual;
                    }
                }
                Err(e) => rec.verdict = error_name(&e),
            }
        }
    }
    rec
}

/// Per-instance rows followed by one summary row per `(n, solver)`.
pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.dims.is_empty() || cfg.dims.contains(&0) {
        return Err(Error::InvalidConfig("dimensions must be positive".into()));
    }
    if cfg.count == 0 {
        return Err(Error::InvalidConfig("instance count must be positive".into()));
    }
    if cfg.solvers.is_empty() {
        return Err(Error::InvalidConfig("no solvers selected".into()));
    }
    let mut rows = Vec::new();
    for inst in cfg.instances() {
        let p = generate(&inst)?;
        for &solver in &cfg.solvers {
            rows.push(run_one(&inst, &p, solver));
        }
    }
    let summaries = summarize(&rows);
    rows.extend(summaries);
    Ok(rows)
}

/// Summary rows: mean `wall_ns`, `epsilon_sq` and `objective`, and the
/// largest residuals, over the instance rows of each `(n, solver)`.
pub fn summarize(rows: &[BenchRecord]) -> Vec<BenchRecord> {
    let mut keys: Vec<(usize, String)> = rows
        .iter()
        .filter(|r| !r.is_summary())
        .map(|r| (r.n, r.solver.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(n, solver)| {
            let group: Vec<&BenchRecord> = rows
                .iter()
                .filter(|r| !r.is_summary() && r.n == n && r.solver == solver)
                .collect();
            let count = group.len() as f64;
            let mean = |f: &dyn Fn(&BenchRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / count;
            let worst = |f: &dyn Fn(&BenchRecord) -> f64| group.iter().map(|r| f(r)).fold(0.0, f64::max);
            BenchRecord {
                n,
                a_kind: group[0].a_kind.clone(),
                rank: group[0].rank,
                epsilon_sq: mean(&|r| r.epsilon_sq),
                solver,
                wall_ns: mean(&|r| r.wall_ns as f64).round() as u64,
                constraint_satisfaction: worst(&|r| r.constraint_satisfaction),
                stationarity_residual: worst(&|r| r.stationarity_residual),
                objective: mean(&|r| r.objective),
                verdict: SUMMARY_VERDICT.into(),
            }
        })
        .collect()
}

/// Mean wall time of the instance rows for `(n, solver)`.
pub fn mean_wall_ns(rows: &[BenchRecord], n: usize, solver: SolverKind) -> Option<f64> {
    let times: Vec<f64> = rows
        .iter()
        .filter(|r| !r.is_summary() && r.n == n && r.solver == solver.as_str())
        .map(|r| r.wall_ns as f64)
        .collect();
    (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
}

pub fn write_csv<W: Write>(rows: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(format!("csv: {e}")))?;
    }
    w.flush()?;
    Ok(())
}
