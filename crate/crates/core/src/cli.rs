//! The `dcd` command line.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or parse
//! error, 3 infeasible parameters.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::array::OrthogonalArray;
use crate::bundle::{d1_oa_text, parse_csv, to_csv, DesignBundle, Optimization};
use crate::construct::Family;
use crate::criteria::{optimize_d2, Criterion, OptimizeOptions};
use crate::design::{seeded_rng, CoupledDesign};
use crate::error::{Error, Result};
use crate::gf::GaloisField;
use crate::oa::{bush_oa, full_factorial, load_oa};
use crate::verify::{default_omega, max_qualitative_factors, verify_design};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Stream reserved for the random column split, away from restart streams.
const SPLIT_STREAM: u64 = u64::MAX;

#[derive(Debug, Parser)]
#[command(
    name = "dcd",
    version,
    about = "Generate, verify and optimize doubly coupled designs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a design and write it as a bundle.
    Generate(GenerateArgs),
    /// Check a bundle, or a D1/D2 pair of OA-text files.
    Verify(VerifyArgs),
    /// Best of several sampled designs under a space-filling criterion.
    Optimize(OptimizeArgs),
    /// Write a bundle as CSV, JSON or OA text.
    Export(ExportArgs),
    /// Read an integer CSV (z1..zq,x1..xp) into a bundle.
    Import(ImportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Stack lambda OA(s^2, q+1, s, 2) blocks.
    C1,
    /// lambda copies of one OA(s^2, q+1, s, 2).
    C2,
    /// Split a strength-3 OA(s^3, m, s, 3) into A and B.
    #[value(name = "c3-case1")]
    C3Case1,
    /// Regular fractions over GF(s) with s^u runs.
    #[value(name = "c3-case2")]
    C3Case2,
    /// User-supplied A (--oa) and B (--b).
    #[value(name = "c3-custom")]
    C3Custom,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Self::C1 => "c1",
            Self::C2 => "c2",
            Self::C3Case1 => "c3-case1",
            Self::C3Case2 => "c3-case2",
            Self::C3Custom => "c3-custom",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// Levels of each qualitative factor.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Number of stacked blocks (c1, c2).
    #[arg(long, default_value_t = 1)]
    pub lambda: usize,
    /// Run size exponent, n = s^u (c3-case2).
    #[arg(long, default_value_t = 3)]
    pub u: usize,
    /// Qualitative factors.
    #[arg(long)]
    pub q: Option<usize>,
    /// Quantitative factors.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, env = "DCD_SEED", default_value_t = 0)]
    pub seed: u64,
    /// OA-text input arrays: the blocks for c1, the array for c2, G for
    /// c3-case1, A for c3-custom.
    #[arg(long, num_args = 1..)]
    pub oa: Vec<PathBuf>,
    /// OA-text B for c3-custom.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// 1-based columns of A forming D1 (c3-custom).
    #[arg(long, value_delimiter = ',')]
    pub select: Vec<usize>,
    /// Split G's columns at random instead of taking the first q+1 (c3-case1).
    #[arg(long)]
    pub random_split: bool,
    /// Coupling order to verify at; defaults to min(q, 2).
    #[arg(long)]
    pub omega: Option<usize>,
    /// Bundle path; the bundle goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Bundle to check.
    pub bundle: Option<PathBuf>,
    /// OA-text D1.
    #[arg(long, requires = "d2", conflicts_with = "bundle")]
    pub d1: Option<PathBuf>,
    /// OA-text D2 with header `n p n 1`.
    #[arg(long, requires = "d1")]
    pub d2: Option<PathBuf>,
    #[arg(long)]
    pub omega: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Maximin,
    Cl2,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub generate: GenerateArgs,
    #[arg(long, value_enum, default_value = "maximin")]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Pairwise-swap hill-climbing steps per restart.
    #[arg(long, default_value_t = 0)]
    pub climb: usize,
    #[arg(long)]
    pub parallel: bool,
    /// Print the best score of every restart.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Csv,
    Json,
    OaText,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub bundle: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: ExportFormat,
    /// Quantitative columns as points in [0, 1) (csv only).
    #[arg(long)]
    pub continuous: bool,
    #[arg(long, env = "DCD_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    pub csv: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub omega: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InfeasibleParameters(_)
        | Error::NotPrimePower(_)
        | Error::FieldTooLarge(_)
        | Error::StrengthUnsupported { .. }
        | Error::UTooSmall(_)
        | Error::TooLarge(_)
        | Error::NotStrength3
        | Error::PreconditionFailed { .. } => EXIT_INFEASIBLE,
        Error::VerificationFailed(_) | Error::Bundle(_) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn infeasible(msg: String) -> Error {
    Error::InfeasibleParameters(msg)
}

fn check_q_bound(q: usize, s: usize) -> Result<()> {
    let bound = max_qualitative_factors(s);
    if q > bound {
        return Err(infeasible(format!(
            "q={q} exceeds the qualitative-factor bound s={bound}"
        )));
    }
    Ok(())
}

fn load_arrays(paths: &[PathBuf]) -> Result<Vec<OrthogonalArray>> {
    paths.iter().map(load_oa).collect()
}

/// Keeps the first `p` columns of `B` when a smaller `p` is requested.
fn truncate_general(family: Family, p: Option<usize>) -> Result<Family> {
    match (family, p) {
        (
            Family::General {
                a,
                b,
                select,
                croa_order,
            },
            Some(p),
        ) => {
            if p > b.n_cols() {
                return Err(infeasible(format!(
                    "p={p} exceeds the {} available columns",
                    b.n_cols()
                )));
            }
            let b = b.select_columns(&(0..p).collect::<Vec<_>>());
            Ok(Family::General {
                a,
                b,
                select,
                croa_order,
            })
        }
        (family, _) => Ok(family),
    }
}

/// The construction family described by the arguments.
pub fn family_from_args(args: &GenerateArgs) -> Result<Family> {
    let s = args.s;
    if let Some(q) = args.q {
        check_q_bound(q, s)?;
    }
    let p = args.p.unwrap_or(1);
    let family = match args.method {
        Method::C1 => {
            if args.oa.is_empty() {
                Family::stacked_bush(s, args.lambda, args.q.unwrap_or(s), p)?
            } else {
                Family::Stacked {
                    arrays: load_arrays(&args.oa)?,
                    p,
                }
            }
        }
        Method::C2 => match args.oa.as_slice() {
            [] => Family::copies_bush(s, args.lambda, args.q.unwrap_or(s), p)?,
            [path] => Family::Copies {
                array: load_oa(path)?,
                lambda: args.lambda,
                p,
            },
            _ => return Err(infeasible("c2 takes a single --oa array".into())),
        },
        Method::C3Case1 => {
            let g = match args.oa.as_slice() {
                [] if s == 2 => full_factorial(2, 3)?,
                [] => bush_oa(&GaloisField::new(s)?, 3)?,
                [path] => load_oa(path)?,
                _ => return Err(infeasible("c3-case1 takes a single --oa array".into())),
            };
            let q = args.q.unwrap_or(1);
            let family = if args.random_split {
                Family::case1(&g, q, Some(&mut seeded_rng(args.seed, SPLIT_STREAM)))?
            } else {
                Family::case1::<rand_chacha::ChaCha8Rng>(&g, q, None)?
            };
            truncate_general(family, args.p)?
        }
        Method::C3Case2 => truncate_general(Family::case2(s, args.u, args.q)?, args.p)?,
        Method::C3Custom => {
            let [path] = args.oa.as_slice() else {
                return Err(infeasible(
                    "c3-custom needs exactly one --oa array A".into(),
                ));
            };
            let a = load_oa(path)?;
            let b_path = args
                .b
                .as_ref()
                .ok_or_else(|| infeasible("c3-custom needs --b".into()))?;
            let b = load_oa(b_path)?.into_matrix();
            let q = args.q.unwrap_or(a.factors().saturating_sub(1));
            let select: Vec<usize> = if args.select.is_empty() {
                (0..q).collect()
            } else {
                args.select
                    .iter()
                    .map(|&j| {
                        j.checked_sub(1)
                            .ok_or_else(|| infeasible("--select is 1-based".into()))
                    })
                    .collect::<Result<_>>()?
            };
            let family = Family::General {
                a,
                b,
                select,
                croa_order: false,
            };
            truncate_general(family, args.p)?
        }
    };
    let s_actual = family.s();
    check_q_bound(family.q(), s_actual)?;
    if let Some(q) = args.q {
        if q != family.q() {
            return Err(infeasible(format!(
                "the input arrays give q={}, not {q}",
                family.q()
            )));
        }
    }
    Ok(family)
}

fn u_of(args: &GenerateArgs) -> Option<usize> {
    (args.method == Method::C3Case2).then_some(args.u)
}

fn emit(bundle: &DesignBundle, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => bundle.save(path),
        None => {
            std::io::stdout().write_all(bundle.to_json().as_bytes())?;
            Ok(())
        }
    }
}

/// Prints the report (to stderr when the bundle itself goes to stdout) and
/// returns the pass/fail exit code.
fn summarize(bundle: &DesignBundle, to_stderr: bool) -> i32 {
    if to_stderr {
        eprintln!("{}", bundle.report);
    } else {
        println!("{}", bundle.report);
    }
    if bundle.report.pass() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let family = family_from_args(args)?;
    let mut plan = family.sample_plan(&mut seeded_rng(args.seed, 0));
    plan.seed = Some(args.seed);
    let design = family.build(&plan)?;
    let omega = args.omega.unwrap_or_else(|| default_omega(design.q()));
    let bundle = DesignBundle::new(
        &design,
        args.method.name(),
        family.lambda(),
        u_of(args),
        Some(args.seed),
        omega,
    )?;
    emit(&bundle, args.out.as_deref())?;
    Ok(summarize(&bundle, args.out.is_none()))
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<i32> {
    let g = &args.generate;
    let family = family_from_args(g)?;
    let criterion = match args.criterion {
        CriterionArg::Maximin => Criterion::Maximin,
        CriterionArg::Cl2 => Criterion::CenteredL2,
    };
    let opts = OptimizeOptions {
        restarts: args.restarts,
        seed: g.seed,
        climb_steps: args.climb,
        parallel: args.parallel,
    };
    let result = optimize_d2(&family, criterion, &opts)?;
    let omega = g.omega.unwrap_or_else(|| default_omega(result.design.q()));
    let mut bundle = DesignBundle::new(
        &result.design,
        g.method.name(),
        family.lambda(),
        u_of(g),
        Some(g.seed),
        omega,
    )?;
    bundle.optimization = Some(Optimization {
        criterion: criterion.to_string(),
        restarts: args.restarts,
        climb_steps: args.climb,
        best_restart: result.best,
        scores: result.scores.iter().map(|x| format!("{x:?}")).collect(),
    });
    emit(&bundle, g.out.as_deref())?;
    let log = |line: String| {
        if g.out.is_none() {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    };
    if args.trajectory {
        for (r, x) in result.scores.iter().enumerate() {
            log(format!("restart {r}: {criterion} = {x:?}"));
        }
    }
    log(format!(
        "best: restart {} with {criterion} = {:?}",
        result.best, result.scores[result.best]
    ));
    Ok(summarize(&bundle, g.out.is_none()))
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let design = match (&args.bundle, &args.d1, &args.d2) {
        (Some(path), None, None) => {
            let (bundle, design) = DesignBundle::load(path)?;
            if args.omega.is_none() {
                return Ok(summarize(&bundle, false));
            }
            design
        }
        (None, Some(d1), Some(d2)) => {
            let d1 = load_oa(d1)?;
            let s = d1
                .symmetric_levels()
                .ok_or_else(|| infeasible("D1 must have symmetric levels".into()))?;
            CoupledDesign::new(d1.into_matrix(), load_oa(d2)?.into_matrix(), s)?
        }
        _ => {
            return Err(Error::Parse {
                line: 0,
                msg: "give a bundle or both --d1 and --d2".into(),
            })
        }
    };
    let omega = args.omega.unwrap_or_else(|| default_omega(design.q()));
    let report = verify_design(&design, omega)?;
    println!("{report}");
    Ok(if report.pass() { EXIT_PASS } else { EXIT_FAIL })
}

fn write_out(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Result<i32> {
    let (bundle, design) = DesignBundle::load(&args.bundle)?;
    let text = match args.format {
        ExportFormat::Csv => to_csv(&design, args.continuous.then_some(args.seed)),
        ExportFormat::Json => bundle.to_json(),
        ExportFormat::OaText => d1_oa_text(&design),
    };
    write_out(&text, args.out.as_deref())?;
    Ok(EXIT_PASS)
}

fn cmd_import(args: &ImportArgs) -> Result<i32> {
    let design = parse_csv(&fs::read_to_string(&args.csv)?, args.s)?;
    let omega = args.omega.unwrap_or_else(|| default_omega(design.q()));
    let bundle = DesignBundle::new(&design, "import", None, None, None, omega)?;
    emit(&bundle, args.out.as_deref())?;
    Ok(summarize(&bundle, args.out.is_none()))
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Export(a) => cmd_export(a),
        Command::Import(a) => cmd_import(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}
