//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Criteria run one after another so that the
//! timing checks are not disturbed by concurrent work.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rab_core::bench::{self, BenchConfig, SolverKind};
use rab_core::certify::{certify_solution, constraint_satisfaction, oracle_2d, OracleResult};
use rab_core::dtpak::{
    diagonalize, diagonalize_rotated, phase_align, recover, secular_f, solve_with_transform,
    DiagonalizedProblem, DtpakOptions, Verdict,
};
use rab_core::linalg::{hermitian_evd, ComplexMatrix};
use rab_core::problem::{generate, EpsilonRule, GeneratorConfig, RabProblem};
use rab_core::rmvb::rmvb_solve;
use rab_core::{worked, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Report {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Report {
    Report { passed, detail }
}

fn opts() -> DtpakOptions {
    DtpakOptions::default()
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn worked_examples() -> Report {
    let start = Instant::now();
    let reports = worked::run_all(&opts()).expect("worked examples run");
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    check(
        failed.is_empty() && secs < 1.0,
        format!(
            "{}/{} examples match, {secs:.3} s{}",
            reports.len() - failed.len(),
            reports.len(),
            if failed.is_empty() { String::new() } else { format!(", failed: {failed:?}") }
        ),
    )
}

struct FullRankStats {
    worst_cs: f64,
    worst_stationarity: f64,
    worst_slackness: f64,
    non_unique: usize,
    secs: f64,
}

fn full_rank_runs() -> FullRankStats {
    let start = Instant::now();
    let mut stats = FullRankStats {
        worst_cs: 0.0,
        worst_stationarity: 0.0,
        worst_slackness: 0.0,
        non_unique: 0,
        secs: 0.0,
    };
    for n in [50, 100, 200] {
        for seed in 0..100 {
            let p = generate(&GeneratorConfig::full_rank(n, 1000 * n as u64 + seed)).unwrap();
            let (d, out) = solve_with_transform(&p, &opts()).unwrap();
            let Some(s) = out.solution().filter(|s| s.classification.verdict == Verdict::Unique)
            else {
                stats.non_unique += 1;
                continue;
            };
            let c = certify_solution(&p, &d, s).unwrap();
            stats.worst_cs = stats.worst_cs.max(c.constraint_satisfaction);
            stats.worst_stationarity = stats.worst_stationarity.max(c.stationarity_residual);
            stats.worst_slackness = stats.worst_slackness.max(c.comp_slackness_residual);
        }
    }
    stats.secs = start.elapsed().as_secs_f64();
    stats
}

fn constraint_satisfaction_report(s: &FullRankStats) -> Report {
    check(
        s.non_unique == 0 && s.worst_cs <= 1e-8 && s.secs < 120.0,
        format!(
            "300 instances, max constraint satisfaction {:.2e}, {} not Unique, {:.1} s",
            s.worst_cs, s.non_unique, s.secs
        ),
    )
}

/// Real two-element instance: loaded Gram covariance, Gaussian steering
/// vector and transform, `ε² = Σcₙ²/3`.
fn random_real_pair(seed: u64) -> RabProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<f64> = (0..4).map(|_| gauss(&mut rng)).collect();
    let tau = 0.5 + rng.random::<f64>() * 2.0;
    let r = |i: usize, j: usize| {
        tau * (f[2 * i] * f[2 * j] + f[2 * i + 1] * f[2 * j + 1]) + if i == j { 0.1 } else { 0.0 }
    };
    let c = |x: f64| Complex64::new(x, 0.0);
    let cov = ComplexMatrix::from_fn(2, 2, |i, j| c(r(i, j)));
    let a: Vec<Complex64> = (0..2).map(|_| c(gauss(&mut rng))).collect();
    let t = ComplexMatrix::from_fn(2, 2, |_, _| c(gauss(&mut rng)));
    let mut p = RabProblem::new(cov, a, t, 1.0).unwrap();
    let (_, total) = diagonalize(&p, &opts()).unwrap().masses();
    p.epsilon = (total / 3.0).sqrt();
    p
}

fn optimality_report(s: &FullRankStats) -> Report {
    let mut worst_gap = 0.0f64;
    let mut below = 0usize;
    let mut unresolved = 0usize;
    for seed in 0..100 {
        let p = random_real_pair(seed);
        let (_, out) = solve_with_transform(&p, &opts()).unwrap();
        let obj = out.solution().map(|s| s.objective).unwrap_or(f64::NAN);
        match oracle_2d(&p).unwrap() {
            OracleResult::Found { objective, .. } => {
                worst_gap = worst_gap.max((objective - obj).abs());
                if objective < obj - 1e-9 * obj.max(1.0) {
                    below += 1;
                }
            }
            _ => unresolved += 1,
        }
    }
    check(
        s.worst_stationarity <= 1e-6
            && s.worst_slackness <= 1e-8
            && worst_gap <= 1e-3
            && unresolved == 0,
        format!(
            "max stationarity {:.2e}, max slackness {:.2e}; n=2 grid gap max {worst_gap:.2e} \
             ({below} oracle values below the solver, {unresolved} unresolved)",
            s.worst_stationarity, s.worst_slackness
        ),
    )
}

fn rank_deficient_report() -> Report {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 3];
    let mut rmvb_rejections = 0;
    let mut total = 0;
    for n in [50, 100] {
        for (rule, want) in [
            (EpsilonRule::RankDefLarge, Verdict::Unique),
            (EpsilonRule::RankDefSmall, Verdict::NonUnique),
        ] {
            for seed in 0..100 {
                total += 1;
                let p = generate(&GeneratorConfig::rank_deficient(n, rule, seed)).unwrap();
                let (d, out) = solve_with_transform(&p, &opts()).unwrap();
                match out.solution() {
                    Some(s) if s.classification.verdict == want => {
                        let c = certify_solution(&p, &d, s).unwrap();
                        worst[0] = worst[0].max(c.constraint_satisfaction);
                        worst[1] = worst[1].max(c.stationarity_residual);
                        worst[2] = worst[2].max(c.comp_slackness_residual);
                    }
                    _ => failures.push(format!("n={n} {rule:?} seed={seed}: {}", out.verdict())),
                }
                if matches!(rmvb_solve(&p), Err(Error::NotPositiveDefinite { .. })) {
                    rmvb_rejections += 1;
                }
            }
        }
    }
    check(
        failures.is_empty()
            && worst[0] <= 1e-8
            && worst[1] <= 1e-6
            && worst[2] <= 1e-8
            && rmvb_rejections == total,
        format!(
            "{total} instances, {} verdict mismatches{}, max cs {:.2e}, stationarity {:.2e}, \
             slackness {:.2e}, baseline rejected {rmvb_rejections}/{total}, {:.1} s",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
            worst[0],
            worst[1],
            worst[2],
            start.elapsed().as_secs_f64()
        ),
    )
}

fn cross_solver_report() -> Report {
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for n in [20, 50] {
        for seed in 0..100 {
            let p = generate(&GeneratorConfig::full_rank(n, 7_000_000 + 100 * n as u64 + seed))
                .unwrap();
            let (_, out) = solve_with_transform(&p, &opts()).unwrap();
            let Some(s) = out.into_solution() else {
                errors.push(format!("n={n} seed={seed}: not solved"));
                continue;
            };
            match rmvb_solve(&p) {
                Ok(r) => {
                    let rel = (r.objective - s.objective).abs() / s.objective.max(1.0);
                    worst = worst.max(rel);
                }
                Err(e) => errors.push(format!("n={n} seed={seed}: {e}")),
            }
        }
    }
    check(
        errors.is_empty() && worst <= 1e-6,
        format!(
            "200 instances, max |obj diff| / max(1, obj) = {worst:.2e}, {} failures{}",
            errors.len(),
            errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default()
        ),
    )
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    let mut h = g.matmul(&g.adjoint()).unwrap();
    h.symmetrize();
    hermitian_evd(&h).unwrap().vectors
}

fn monotonicity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let mut lambda: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.25) { 0.0 } else { (4.0 * gauss(&mut rng)).exp() })
            .collect();
        lambda[0] = lambda[0].max(1e-3);
        lambda.sort_by(|a, b| b.total_cmp(a));
        let c: Vec<f64> = (0..n).map(|_| gauss(&mut rng).abs() + 1e-3).collect();
        let d = DiagonalizedProblem::from_spectrum(&lambda, &c, 1.0).unwrap();
        let mut ks: Vec<f64> = (0..50).map(|_| 10f64.powf(rng.random_range(-8.0..8.0))).collect();
        ks.sort_by(f64::total_cmp);
        let f: Vec<f64> = ks.iter().map(|&k| secular_f(k, &d)).collect();
        violations += f.windows(2).filter(|w| w[0] > w[1]).count();
    }
    (violations == 0, format!("monotone: {violations} violations in 1000x50"))
}

fn rotation_invariance() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let n = 4 + (seed as usize % 12);
        let p = generate(&GeneratorConfig::full_rank(n, 500 + seed)).unwrap();
        let v = random_unitary(&mut rng, n);
        let w0 = solve_with_transform(&p, &opts()).unwrap().1.into_solution().unwrap().w;
        let d = diagonalize_rotated(&p, &v, &opts()).unwrap();
        let out = rab_core::dtpak::solve_diagonalized(&p, &d, &opts()).unwrap();
        let w1 = out.into_solution().unwrap().w;
        let diff = w0.iter().zip(&w1).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    (worst <= 1e-8, format!("rotation: max |dw| {worst:.1e}"))
}

fn scaling_non_uniqueness() -> (bool, String) {
    let mut bad = 0;
    let mut worst_obj = 0.0f64;
    for seed in 0..50 {
        let n = 5 + (seed as usize % 16);
        let p = generate(&GeneratorConfig::rank_deficient(n, EpsilonRule::RankDefSmall, seed)).unwrap();
        let (d, out) = solve_with_transform(&p, &opts()).unwrap();
        let s = out.into_solution().unwrap();
        if s.classification.verdict != Verdict::NonUnique {
            bad += 1;
            continue;
        }
        for t in [1.5, 2.0, 10.0] {
            let u: Vec<f64> = s.u.iter().map(|x| t * x).collect();
            let w = recover(&d, &u).unwrap();
            let obj = p.objective(&w).unwrap();
            let scale = p.covariance.norm_inf() * w.iter().map(|z| z.norm_sqr()).sum::<f64>();
            worst_obj = worst_obj.max(obj.abs() / scale.max(1.0));
            if constraint_satisfaction(&p, &w).unwrap() > 1e-8 {
                bad += 1;
            }
        }
    }
    (
        bad == 0 && worst_obj <= 1e-12,
        format!("scaled degenerate: {bad} failures, max relative objective {worst_obj:.1e}"),
    )
}

fn phase_alignment() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let (mut bad, mut tested) = (0, 0);
    for seed in 0.. {
        if tested == 100 {
            break;
        }
        let n = 3 + (seed as usize % 10);
        let p = generate(&GeneratorConfig::full_rank(n, 900 + seed)).unwrap();
        let d = diagonalize(&p, &opts()).unwrap();
        let b = d.b();
        // Start from aligned magnitudes, perturb phases, restore Im[vᴴb] = 0
        // with a common rotation, then scale until the constraint holds.
        let mut v: Vec<Complex64> = b
            .iter()
            .map(|&bn| {
                let phase = bn.arg() + rng.random_range(-1.0..1.0);
                Complex64::from_polar(bn.norm() * (0.5 + rng.random::<f64>()), phase)
            })
            .collect();
        let inner: Complex64 = v.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        let rot = inner / inner.norm();
        v.iter_mut().for_each(|x| *x *= rot.conj());
        let slack = |v: &[Complex64]| {
            let re: f64 = v.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum();
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            re - d.epsilon() * norm
        };
        let s0 = slack(&v);
        if s0 <= 0.0 {
            continue;
        }
        tested += 1;
        let k = 2.0 / s0;
        v.iter_mut().for_each(|x| *x *= k);
        let obj = |v: &[Complex64]| d.lambda().iter().zip(v).map(|(l, x)| l * x.norm_sqr()).sum::<f64>();
        let (aligned, alpha) = phase_align(&v, b).unwrap();
        let feasible = slack(&aligned) >= 1.0 - 1e-9;
        let imag: f64 = aligned.iter().zip(b).map(|(x, y)| (x.conj() * y).im).sum();
        if !(alpha < 1.0 && feasible && imag.abs() < 1e-9 && obj(&aligned) < obj(&v)) {
            bad += 1;
        }
    }
    (bad == 0, format!("phase alignment: {bad}/100 failed"))
}

fn properties_report() -> Report {
    let parts = [monotonicity(), rotation_invariance(), scaling_non_uniqueness(), phase_alignment()];
    check(
        parts.iter().all(|(ok, _)| *ok),
        parts.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join("; "),
    )
}

fn scaling_report() -> Report {
    let cfg = BenchConfig::new(vec![100, 200], 20, vec![SolverKind::Dtpak], 77);
    // Warm up caches and allocator before timing.
    bench::run(&BenchConfig::new(vec![100], 3, vec![SolverKind::Dtpak], 1)).unwrap();
    let rows = bench::run(&cfg).unwrap();
    let t100 = bench::mean_wall_ns(&rows, 100, SolverKind::Dtpak).unwrap();
    let t200 = bench::mean_wall_ns(&rows, 200, SolverKind::Dtpak).unwrap();
    let ratio = t200 / t100;

    let big = BenchConfig::new(vec![500], 3, vec![SolverKind::Dtpak, SolverKind::Rmvb], 78);
    let rows = bench::run(&big).unwrap();
    let d500 = bench::mean_wall_ns(&rows, 500, SolverKind::Dtpak).unwrap();
    let r500 = bench::mean_wall_ns(&rows, 500, SolverKind::Rmvb).unwrap();
    check(
        (4.0..=16.0).contains(&ratio) && d500 <= r500,
        format!(
            "mean time n=200 / n=100 = {ratio:.2}; n=500 closed form {:.3} s vs baseline {:.3} s",
            d500 * 1e-9,
            r500 * 1e-9
        ),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut emit = |id: usize, name: &str, r: Report| {
        all &= r.passed;
        println!(
            "{} criterion {id} ({name}): {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    };
    emit(1, "worked examples", worked_examples());
    let stats = full_rank_runs();
    emit(2, "constraint satisfaction", constraint_satisfaction_report(&stats));
    emit(3, "optimality", optimality_report(&stats));
    emit(4, "rank-deficient coverage", rank_deficient_report());
    emit(5, "cross-solver agreement", cross_solver_report());
    emit(6, "property suites", properties_report());
    emit(7, "scaling", scaling_report());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
