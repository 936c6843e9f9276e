use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rab_core::bench::{self, BenchConfig, SolverKind};
use rab_core::certify::{certify_solution, certify_weights, constraint_satisfaction, Certificate};
use rab_core::dtpak::{classify, diagonalize, solve_with_transform, DtpakOptions, SolveOutcome};
use rab_core::problem::{
    self, generate, EpsilonRule, GeneratorConfig, RabProblem, SolutionFile, SteeringKind,
    TransformKind,
};
use rab_core::{worked, Complex64, Error};

const EXIT_ERROR: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_NO_FINITE_SOLUTION: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

/// Feasibility level a claimed solution must reach to pass `verify`.
const VERIFY_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "rab", version, about = "Robust adaptive beamforming solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random problem instance.
    Gen(GenArgs),
    /// Solve a problem file and print the solution with its certificate.
    Solve {
        problem: PathBuf,
        /// Write the solution to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report existence and uniqueness of the optimum.
    Classify { problem: PathBuf },
    /// Check a claimed solution against a problem.
    Verify { problem: PathBuf, solution: PathBuf },
    /// Run the built-in two-element examples.
    Examples,
    /// Time the closed-form solver against the baseline.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EpsRule {
    FullRankThird,
    RankdefLarge,
    RankdefSmall,
}

#[derive(Clone, Copy, ValueEnum)]
enum AKind {
    Steering,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    Tall5n,
    Square,
    Identity,
    CovarianceLike,
}

impl From<Transform> for TransformKind {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Tall5n => TransformKind::Tall5N,
            Transform::Square => TransformKind::SquareN,
            Transform::Identity => TransformKind::Identity,
            Transform::CovarianceLike => TransformKind::CovarianceLike,
        }
    }
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_parser = positive)]
    n: usize,
    /// Covariance rank; defaults to n.
    #[arg(long)]
    rank: Option<usize>,
    /// Diagonal loading; defaults to 0.1 at full rank and 0 otherwise.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum, default_value = "steering")]
    a_kind: AKind,
    /// Arrival angle in radians; random when omitted.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_enum, default_value = "square")]
    transform: Transform,
    #[arg(long, value_enum, default_value = "full-rank-third", conflicts_with = "eps_sq")]
    eps_rule: EpsRule,
    /// Explicit epsilon squared, overriding the rule.
    #[arg(long)]
    eps_sq: Option<f64>,
    #[arg(long, env = "RAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; the problem goes to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankDeficient {
    Large,
    Small,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
    dims: Vec<usize>,
    /// Instances per size.
    #[arg(long, default_value_t = 10, value_parser = positive)]
    count: usize,
    #[arg(long, value_delimiter = ',', default_value = "dtpak,rmvb")]
    solvers: Vec<String>,
    #[arg(long, env = "RAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "square")]
    transform: Transform,
    /// Use rank-deficient covariances with this epsilon rule.
    #[arg(long, value_enum)]
    rank_deficient: Option<RankDeficient>,
    /// CSV output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve { problem, output } => cmd_solve(&problem, output.as_deref()),
        Command::Classify { problem } => cmd_classify(&problem),
        Command::Verify { problem, solution } => cmd_verify(&problem, &solution),
        Command::Examples => cmd_examples(),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

type CmdResult = Result<u8, Error>;

fn load_valid(path: &std::path::Path) -> Result<RabProblem, Error> {
    let (p, report) = problem::load(path)?;
    for msg in &report.messages {
        eprintln!("warning: {msg}");
    }
    report.into_result()?;
    Ok(p)
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let rank = args.rank.unwrap_or(args.n);
    let sigma = args.sigma.unwrap_or(if rank < args.n { 0.0 } else { 0.1 });
    let epsilon_rule = match (args.eps_sq, args.eps_rule) {
        (Some(e2), _) => EpsilonRule::Explicit(e2),
        (None, EpsRule::FullRankThird) => EpsilonRule::FullRankThird,
        (None, EpsRule::RankdefLarge) => EpsilonRule::RankDefLarge,
        (None, EpsRule::RankdefSmall) => EpsilonRule::RankDefSmall,
    };
    let cfg = GeneratorConfig {
        n: args.n,
        covariance_rank: rank,
        sigma,
        steering_kind: match args.a_kind {
            AKind::Steering => SteeringKind::Steering,
        },
        theta: args.theta,
        transform_kind: args.transform.into(),
        epsilon_rule,
        seed: args.seed,
    };
    let p = generate(&cfg)?;
    let opts = DtpakOptions::default();
    let verdict = classify(&diagonalize(&p, &opts)?, &opts).verdict;
    match args.output {
        Some(path) => {
            problem::save(&p, &path)?;
            println!("wrote {}", path.display());
            println!("verdict: {verdict}");
        }
        None => {
            println!("{}", problem::to_json_string(&p));
            eprintln!("verdict: {verdict}");
        }
    }
    Ok(0)
}

fn print_weights(w: &[Complex64]) {
    println!("w:");
    for z in w {
        println!("  [{:e}, {:e}]", z.re, z.im);
    }
}

fn print_certificate(c: &Certificate) {
    println!("certificate:");
    println!("  constraint_satisfaction: {:e}", c.constraint_satisfaction);
    println!("  stationarity_residual: {:e}", c.stationarity_residual);
    println!("  comp_slackness_residual: {:e}", c.comp_slackness_residual);
    println!("  dual_feasibility: {}", c.dual_feasibility);
    println!("  mu: {:e}", c.mu);
    println!("  objective: {:e}", c.objective);
    println!("  transform_consistency: {:e}", c.transform_consistency);
}

fn cmd_solve(path: &std::path::Path, output: Option<&std::path::Path>) -> CmdResult {
    let p = load_valid(path)?;
    let (d, out) = solve_with_transform(&p, &DtpakOptions::default())?;
    let cl = out.classification();
    println!("verdict: {}", cl.verdict);
    if cl.near_boundary {
        println!("note: epsilon^2 lies within the tolerance band of a threshold");
    }
    match out {
        SolveOutcome::Infeasible(_) => Ok(EXIT_INFEASIBLE),
        SolveOutcome::NoFiniteSolution(_) => Ok(EXIT_NO_FINITE_SOLUTION),
        SolveOutcome::Solved(s) => {
            println!("objective: {:e}", s.objective);
            println!("mu: {:e}", s.mu);
            println!("k: {:e}", s.k);
            print_weights(&s.w);
            print_certificate(&certify_solution(&p, &d, &s)?);
            if let Some(path) = output {
                let file = SolutionFile {
                    verdict: Some(s.classification.verdict.to_string()),
                    objective: Some(s.objective),
                    mu: Some(s.mu),
                    k: Some(s.k),
                    ..SolutionFile::from_weights(&s.w)
                };
                file.save(path)?;
            }
            Ok(0)
        }
    }
}

fn cmd_classify(path: &std::path::Path) -> CmdResult {
    let p = load_valid(path)?;
    let opts = DtpakOptions::default();
    let d = diagonalize(&p, &opts)?;
    let cl = classify(&d, &opts);
    println!("verdict: {}", cl.verdict);
    println!("epsilon_sq: {:e}", cl.epsilon_sq);
    println!("zero_mass: {:e}", cl.zero_mass);
    println!("total_mass: {:e}", cl.total_mass);
    println!("zero_eigenvalues: {}", d.zero_set_len());
    println!("near_boundary: {}", cl.near_boundary);
    Ok(0)
}

fn cmd_verify(problem_path: &std::path::Path, solution_path: &std::path::Path) -> CmdResult {
    let p = load_valid(problem_path)?;
    let sol = SolutionFile::load(solution_path)?;
    let w = sol.weights();
    let cs = constraint_satisfaction(&p, &w)?;
    match certify_weights(&p, &w, sol.mu, &DtpakOptions::default()) {
        Ok(c) => print_certificate(&c),
        Err(Error::ZeroVector) => {
            println!("certificate:");
            println!("  constraint_satisfaction: {cs:e}");
            println!("  (KKT residuals undefined for the zero vector)");
        }
        Err(e) => return Err(e),
    }
    let passed = cs <= VERIFY_TOL;
    println!("result: {}", if passed { "pass" } else { "fail" });
    Ok(if passed { 0 } else { EXIT_VERIFY_FAILED })
}

fn cmd_examples() -> CmdResult {
    let reports = worked::run_all(&DtpakOptions::default())?;
    println!(
        "{:<36} {:<17} {:<17} {:<26} {:<8}",
        "example", "expected", "verdict", "w", "result"
    );
    let fmt_w = |w: Option<[f64; 2]>| match w {
        Some([a, b]) => format!("[{a:.4}, {b:.4}]"),
        None => "-".into(),
    };
    for r in &reports {
        println!(
            "{:<36} {:<17} {:<17} {:<26} {:<8}",
            r.name,
            r.expected.as_str(),
            r.verdict.as_str(),
            fmt_w(r.w),
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} passed", reports.len());
    Ok(if passed == reports.len() { 0 } else { EXIT_ERROR })
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let solvers = args
        .solvers
        .iter()
        .map(|s| s.parse::<SolverKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut cfg = BenchConfig::new(args.dims, args.count, solvers, args.seed);
    cfg.transform = args.transform.into();
    cfg.rank_deficient = args.rank_deficient.map(|r| match r {
        RankDeficient::Large => EpsilonRule::RankDefLarge,
        RankDeficient::Small => EpsilonRule::RankDefSmall,
    });
    let rows = bench::run(&cfg)?;
    match args.output {
        Some(path) => bench::write_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            bench::write_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(0)
}
