use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ovsa_core::amalg::{
    amalgamate_orders, amalgamate_sigma_algebraic, is_embedding, PipelineOptions, SigmaProblem,
    DEFAULT_TEST_DEGREE,
};
use ovsa_core::check::{ovsa_laws, run_suite, LawReport, SuiteReport};
use ovsa_core::extend::{adjoin_degree1_solution, Case};
use ovsa_core::formulas::{alt_count, ip_pattern_search, Alternation, IpSearch, OvsaAtom, QFFormula};
use ovsa_core::gallery::run_gallery;
use ovsa_core::sigmapoly::{monotonicity_counterexample, sp_eval_unchecked, Counterexample};
use ovsa_core::solve::{GreedySolver, Step, DEFAULT_SOLVE_CAP};
use ovsa_core::{
    testkit, AmalgamationProblem, Element, HahnModel, HahnVector, Model, ModelCut, MonotoneClass, Ovsa,
    SigmaPoly, UniPoly,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: schema error: {source}")]
    Schema { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] ovsa_core::Error),
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema { .. } => 3,
            CliError::Core(ovsa_core::Error::UnsupportedScalarField(_)) => 4,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Exact computations on ordered vector spaces with an automorphism.
///
/// Every command prints a JSON report. Exit status: 0 pass, 2 a checked claim
/// failed, 3 malformed input, 4 unsupported scalar field, 1 anything else.
#[derive(Debug, Parser)]
#[command(name = "ovsa", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, env = "OVSA_SEED", default_value_t = 0, global = true)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Absolute monotonicity of a σ-polynomial, with a zero witness when it fails.
    Classify {
        #[arg(long)]
        poly: PathBuf,
        /// Base model for the witness (default: ℚ((ℤ)) with the shift).
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Greedy exact solve of f(x) = d.
    Solve {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SOLVE_CAP)]
        cap: usize,
    },
    /// Adjoin a solution of r₀x + r₁σ(x) = a realizing a cut of the base.
    Extend {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// Cut of the base (default: the sign cut of poly(x) − rhs).
        #[arg(long)]
        cut: Option<PathBuf>,
        #[arg(long = "case", default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        case: u8,
        /// Ordered pairs for the law check.
        #[arg(long, default_value_t = 500)]
        pairs: usize,
    },
    /// Amalgamate an order problem, or a σ-problem along --poly.
    Amalgamate {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        poly: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TEST_DEGREE)]
        test_degree: usize,
        #[arg(long, default_value_t = DEFAULT_SOLVE_CAP)]
        cap: usize,
    },
    /// Length of the longest φ/ψ alternation along a sequence.
    Alt {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Search finite pools for an n-pattern of (φ, ψ).
    IpSearch {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a_pool: PathBuf,
        #[arg(long)]
        b_pool: PathBuf,
    },
    /// Rebuild a named configuration and check each of its claims.
    Gallery { name: String },
    /// Run a property suite.
    Check { suite: String },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Schema {
        path: path.to_owned(),
        source,
    })
}

fn hahn_model(path: &Option<PathBuf>) -> CliResult<HahnModel> {
    path.as_deref().map_or_else(|| Ok(HahnModel::int_shift()), read_json)
}

fn model(path: &Option<PathBuf>) -> CliResult<Model> {
    path.as_deref()
        .map_or_else(|| Ok(Model::Hahn(HahnModel::int_shift())), read_json)
}

/// A report and whether every claim in it held.
struct Report {
    json: serde_json::Value,
    passed: bool,
}

impl Report {
    fn new(value: impl Serialize, passed: bool) -> CliResult<Report> {
        let json = serde_json::to_value(value).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Report { json, passed })
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    poly: SigmaPoly,
    shift: i64,
    associated: UniPoly,
    class: MonotoneClass,
    witness: Option<Counterexample>,
    note: Option<String>,
}

fn classify(poly: &Path, base: &Option<PathBuf>) -> CliResult<Report> {
    let f: SigmaPoly = read_json(poly)?;
    let base = hahn_model(base)?;
    let (shift, associated) = f.associated_poly()?;
    let class = f.classify_monotone()?;
    let (witness, note) = match class {
        MonotoneClass::NotAbsMonotone(_) => match monotonicity_counterexample(&f, &base) {
            Ok(w) => (Some(w), None),
            Err(ovsa_core::Error::UnsupportedScalarField(why)) => (None, Some(why)),
            Err(e) => return Err(e.into()),
        },
        _ => (None, None),
    };
    let passed = witness
        .as_ref()
        .is_none_or(|w| !w.zero.is_zero() && sp_eval_unchecked(&w.model, &f, &w.zero).is_zero());
    Report::new(
        ClassifyReport {
            poly: f,
            shift,
            associated,
            class,
            witness,
            note,
        },
        passed,
    )
}

#[derive(Serialize)]
struct SolveCertificate {
    outcome: &'static str,
    partial: HahnVector,
    remainder: HahnVector,
    steps: usize,
    reason: Option<String>,
    verified: bool,
}

fn solve(m: &Option<PathBuf>, poly: &Path, rhs: &Path, cap: usize) -> CliResult<Report> {
    let m = hahn_model(m)?;
    let f: SigmaPoly = read_json(poly)?;
    let d: HahnVector = read_json(rhs)?;
    let mut solver = GreedySolver::new(&m, &f, &d)?;
    let mut reason = None;
    let outcome = loop {
        if solver.remainder().is_zero() {
            break "solved";
        }
        if solver.steps() >= cap {
            break "residual";
        }
        if let Step::Stuck(why) = solver.step() {
            reason = Some(why);
            break "stuck";
        }
    };
    let (partial, remainder) = (solver.partial().clone(), solver.remainder().clone());
    let verified = sp_eval_unchecked(&m, &f, &partial).add(&remainder) == d;
    Report::new(
        SolveCertificate {
            outcome,
            partial,
            remainder,
            steps: solver.steps(),
            reason,
            verified,
        },
        verified,
    )
}

#[derive(Serialize)]
struct ExtendReport {
    model: Model,
    generator: Element,
    equation_holds: bool,
    laws: LawReport,
}

fn extend(
    m: &Option<PathBuf>,
    poly: &Path,
    rhs: &Path,
    cut: &Option<PathBuf>,
    case: u8,
    pairs: usize,
    seed: u64,
) -> CliResult<Report> {
    let base = model(m)?;
    let f: SigmaPoly = read_json(poly)?;
    let a: Element = read_json(rhs)?;
    let cut = match cut {
        Some(p) => read_json(p)?,
        None => ModelCut::SignOf {
            direction: base.monotonicity(&f).ok_or(ovsa_core::Error::NotMonotone)?,
            poly: f.clone(),
            rhs: a.clone(),
        },
    };
    let case = if case == 1 { Case::Case1 } else { Case::Case2 };
    let ext = adjoin_degree1_solution(base, f.clone(), a.clone(), cut, case)?;
    let generator = ext.generator();
    let image = ext.embed(a);
    let m = Model::Ext(Box::new(ext));
    let equation_holds = sp_eval_unchecked(&m, &f, &generator) == image;
    let mut rng = testkit::rng(seed);
    let mut samples: Vec<Element> = (0..60).map(|_| testkit::element(&mut rng, &m, 3, 5)).collect();
    samples.push(generator.clone());
    let laws = ovsa_laws(&m, &samples, pairs, &mut rng);
    let passed = equation_holds && laws.passed();
    Report::new(
        ExtendReport {
            model: m,
            generator,
            equation_holds,
            laws,
        },
        passed,
    )
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemFile {
    Sigma(SigmaProblem),
    Order(AmalgamationProblem),
}

#[derive(Serialize)]
struct OrderAmalgamReport {
    amalgam: ovsa_core::amalg::Amalgam,
    b_embeds: bool,
    c_embeds: bool,
}

fn amalgamate(problem: &Path, poly: &Option<PathBuf>, test_degree: usize, cap: usize, seed: u64) -> CliResult<Report> {
    match read_json::<ProblemFile>(problem)? {
        ProblemFile::Order(prob) => {
            let amalgam = amalgamate_orders(&prob)?;
            let b_embeds = is_embedding(&prob.b, &amalgam.d, &amalgam.emb_b);
            let c_embeds = is_embedding(&prob.c, &amalgam.d, &amalgam.emb_c);
            Report::new(
                OrderAmalgamReport {
                    amalgam,
                    b_embeds,
                    c_embeds,
                },
                b_embeds && c_embeds,
            )
        }
        ProblemFile::Sigma(prob) => {
            let poly = poly
                .as_deref()
                .ok_or_else(|| CliError::Usage("a σ-problem needs --poly".into()))?;
            let f: SigmaPoly = read_json(poly)?;
            let opts = PipelineOptions {
                test_degree,
                cap,
                seed,
                ..PipelineOptions::default()
            };
            let report = amalgamate_sigma_algebraic(&prob, &f, &opts)?;
            let passed = report.passed();
            Report::new(report, passed)
        }
    }
}

#[derive(Serialize)]
struct AltReport {
    alternation: Alternation,
}

fn alt(m: &Option<PathBuf>, phi: &Path, psi: &Path, seq: &Path, b: &Path) -> CliResult<Report> {
    let m = model(m)?;
    let phi: QFFormula<OvsaAtom> = read_json(phi)?;
    let psi: QFFormula<OvsaAtom> = read_json(psi)?;
    let seq: Vec<Vec<Element>> = read_json(seq)?;
    let b: Vec<Element> = read_json(b)?;
    let alternation = alt_count(&m, &phi, &psi, &seq, &b)?;
    Report::new(AltReport { alternation }, true)
}

fn ip_search(m: &Option<PathBuf>, phi: &Path, psi: &Path, n: usize, a_pool: &Path, b_pool: &Path) -> CliResult<Report> {
    let m = model(m)?;
    let phi: QFFormula<OvsaAtom> = read_json(phi)?;
    let psi: QFFormula<OvsaAtom> = read_json(psi)?;
    let a: Vec<Vec<Element>> = read_json(a_pool)?;
    let b: Vec<Vec<Element>> = read_json(b_pool)?;
    let found: IpSearch = ip_pattern_search(&m, &phi, &psi, n, &a, &b)?;
    Report::new(found, true)
}

#[derive(Serialize)]
struct CheckReport {
    verified: String,
    passed: bool,
    #[serde(flatten)]
    report: SuiteReport,
}

fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Classify { poly, model } => classify(poly, model),
        Command::Solve { model, poly, rhs, cap } => solve(model, poly, rhs, *cap),
        Command::Extend {
            model,
            poly,
            rhs,
            cut,
            case,
            pairs,
        } => extend(model, poly, rhs, cut, *case, *pairs, cli.seed),
        Command::Amalgamate {
            problem,
            poly,
            test_degree,
            cap,
        } => amalgamate(problem, poly, *test_degree, *cap, cli.seed),
        Command::Alt { model, phi, psi, seq, b } => alt(model, phi, psi, seq, b),
        Command::IpSearch {
            model,
            phi,
            psi,
            n,
            a_pool,
            b_pool,
        } => ip_search(model, phi, psi, *n, a_pool, b_pool),
        Command::Gallery { name } => {
            let r = run_gallery(name, cli.seed)?;
            let passed = r.passed();
            Report::new(r, passed)
        }
        Command::Check { suite } => {
            let r = run_suite(suite, cli.seed)?;
            let (cases, failed) = r.reports.iter().fold((0, 0), |(c, f), l| (c + l.cases, f + l.failed));
            let passed = r.passed();
            Report::new(
                CheckReport {
                    verified: format!("{}/{cases}", cases - failed),
                    passed,
                    report: r,
                },
                passed,
            )
        }
    }
}

fn emit(out: &Option<PathBuf>, json: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(json).map_err(|e| CliError::Usage(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli).and_then(|r| emit(&cli.out, &r.json).map(|()| r.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("ovsa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
