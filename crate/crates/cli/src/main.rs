//! Command-line front end: seeded, reproducible batch computations with
//! JSON reports (CSV for the threshold ledger). Identical configuration and
//! seed produce byte-identical output.

mod input;

use clap::{Args, Parser, Subcommand};
use input::*;
use serde::Serialize;
use siegelforms::autoforms::poly::parse_mu;
use siegelforms::autoforms::{
    c_rho, fourier_coefficient, lift_pairing, matrix_coefficient_mc, poincare_truncated,
    CuspSeedFunction, HalfIntegralMatrix, TermStats,
};
use siegelforms::enumeration::{enumerate_ball, generators};
use siegelforms::glrep::{build_rep, HighestWeight, PolyRep};
use siegelforms::nonvanishing::{
    find_n0, kak_crosscheck, NonvanishingProblem, DEFAULT_ESCALATION_CAP,
};
use siegelforms::symplectic::{SiegelPoint, SymplecticMatrix};
use siegelforms::{ComplexEstimate, Error, IntegralEstimate, McConfig, RMatrix};
use std::process::ExitCode;
use std::sync::Arc;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_UNDECIDED: u8 = 4;
const EXIT_RESOURCE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "siegelforms",
    about = "Vector-valued Siegel Poincare series: representations, lifts, \
             Monte-Carlo integrals, and non-vanishing thresholds",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Degree n of the group Sp_2n
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Highest weight, comma separated (e.g. 3 or 4,3)
    #[arg(long, default_value = "3")]
    omega: String,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<String>,
    /// Output format; csv is supported for the n0 ledger only
    #[arg(long, default_value = "json")]
    format: String,
    /// Optional key=value config file; flags override its entries
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args, Clone)]
struct SeedOpts {
    /// Polynomial mu (e.g. "1", "det", "X11^2*X22")
    #[arg(long, default_value = "1")]
    mu: String,
    /// Seed vector: JSON [[re,im],...] or the keyword hwv
    #[arg(long, default_value = "hwv")]
    v: String,
}

#[derive(Args, Clone)]
struct McOpts {
    /// Monte-Carlo sample budget
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Random seed (required for reproducibility of stochastic commands)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker count for data-parallel sampling
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions, weights, and metadata of a representation
    RepInfo {
        #[command(flatten)]
        common: CommonOpts,
        /// Write the full serialized representation to this path
        #[arg(long)]
        save: Option<String>,
    },
    /// Evaluate the seed function f_{mu,v} at a point of H_n
    EvalF {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        seed_fn: SeedOpts,
        /// Point of H_n as JSON [[[re,im],...],...]; defaults to iI
        #[arg(long)]
        z: Option<String>,
    },
    /// Truncated Poincare series over a congruence ball
    Poincare {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        seed_fn: SeedOpts,
        /// Point of H_n as JSON; defaults to iI
        #[arg(long)]
        z: Option<String>,
        /// Word-length bound of the generator ball
        #[arg(long, default_value_t = 2)]
        word_length: u32,
        /// Congruence level N (elements = I mod N)
        #[arg(long, default_value_t = 1)]
        level: u64,
    },
    /// Monte-Carlo estimate of the norm constant C_rho
    CRho {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        mc: McOpts,
    },
    /// Matrix coefficient <pi(g) f_{mu,v}, f_{1,v}> with its closed-form check
    Matcoef {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        seed_fn: SeedOpts,
        #[command(flatten)]
        mc: McOpts,
        /// Group element as JSON rows (real 2n x 2n); defaults to identity
        #[arg(long)]
        g: Option<String>,
    },
    /// Fourier coefficient a_T of f_{mu,v} by product quadrature
    Fourier {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        seed_fn: SeedOpts,
        /// Half-integral matrix T as JSON rows (entries in halves)
        #[arg(long = "T")]
        t: String,
        /// Level N of the congruence subgroup
        #[arg(long, default_value_t = 1)]
        level: u64,
        /// Imaginary part y0 as JSON rows; defaults to I
        #[arg(long)]
        y0: Option<String>,
        /// Quadrature intervals per dimension
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
    /// Threshold scan for the smallest certified level N0
    N0 {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        seed_fn: SeedOpts,
        #[command(flatten)]
        mc: McOpts,
        /// First level of the scan
        #[arg(long = "N-min", default_value_t = 3)]
        n_min: u32,
        /// Last level of the scan
        #[arg(long = "N-max", default_value_t = 200)]
        n_max: u32,
        /// Escalation cap on per-integral samples
        #[arg(long, default_value_t = DEFAULT_ESCALATION_CAP)]
        cap: u64,
    },
    /// Cross-check of the KAK-coordinate integral against the phi-integral
    KakCheck {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        seed_fn: SeedOpts,
        #[command(flatten)]
        mc: McOpts,
        /// Radii, comma separated
        #[arg(long, default_value = "0.3,0.6,1.0")]
        radii: String,
    },
    /// Run every invariant suite and report one line per check
    Selftest {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        mc: McOpts,
    },
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let merged = match merge_config_file(raw) {
        Ok(merged) => merged,
        Err(message) => {
            eprintln!("config error: {message}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = match Cli::try_parse_from(merged) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::from(EXIT_OK)
                }
                _ => ExitCode::from(EXIT_CONFIG),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidWeight { .. }
            | Error::DimensionMismatch { .. }
            | Error::Parse { .. }
            | Error::Serialization(_) => EXIT_CONFIG,
            Error::NotPositiveDefinite { .. }
            | Error::NotUnitary { .. }
            | Error::NotSymplectic { .. }
            | Error::NotSymmetric { .. }
            | Error::NotInDisk { .. }
            | Error::SingularCocycle { .. }
            | Error::Precondition(_) => EXIT_PRECONDITION,
            Error::TensorBudget { .. }
            | Error::ResourceCap(_)
            | Error::OrderBoundExceeded { .. } => EXIT_RESOURCE,
            Error::Internal(_) => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::RepInfo { common, save } => rep_info(&common, save.as_deref()),
        Command::EvalF { common, seed_fn, z } => eval_f(&common, &seed_fn, z.as_deref()),
        Command::Poincare {
            common,
            seed_fn,
            z,
            word_length,
            level,
        } => poincare(&common, &seed_fn, z.as_deref(), word_length, level),
        Command::CRho { common, mc } => c_rho_cmd(&common, &mc),
        Command::Matcoef {
            common,
            seed_fn,
            mc,
            g,
        } => matcoef(&common, &seed_fn, &mc, g.as_deref()),
        Command::Fourier {
            common,
            seed_fn,
            t,
            level,
            y0,
            points,
        } => fourier(&common, &seed_fn, &t, level, y0.as_deref(), points),
        Command::N0 {
            common,
            seed_fn,
            mc,
            n_min,
            n_max,
            cap,
        } => n0(&common, &seed_fn, &mc, n_min, n_max, cap),
        Command::KakCheck {
            common,
            seed_fn,
            mc,
            radii,
        } => kak_check(&common, &seed_fn, &mc, &radii),
        Command::Selftest { common, mc } => selftest(&common, &mc),
    }
}

fn build_common_rep(common: &CommonOpts) -> Result<Arc<PolyRep>, Failure> {
    let omega = parse_omega(&common.omega).map_err(Failure::config)?;
    if omega.len() != common.n {
        return Err(Failure::config(format!(
            "--omega has {} entries but --n is {}",
            omega.len(),
            common.n
        )));
    }
    let weight = HighestWeight::new(omega)?;
    Ok(Arc::new(build_rep(&weight)?))
}

fn build_seed_fn(rep: &Arc<PolyRep>, seed_fn: &SeedOpts) -> Result<CuspSeedFunction, Failure> {
    let mu = parse_mu(&seed_fn.mu, rep.n())?;
    let v = if seed_fn.v.trim() == "hwv" {
        rep.highest_weight_vector()
    } else {
        parse_cvector(&seed_fn.v).map_err(Failure::config)?
    };
    Ok(CuspSeedFunction::new(rep.clone(), mu, v)?)
}

fn parse_point(rep: &PolyRep, z: Option<&str>) -> Result<SiegelPoint, Failure> {
    match z {
        None => Ok(SiegelPoint::i_identity(rep.n())),
        Some(text) => {
            let m = parse_cmatrix(text).map_err(Failure::config)?;
            Ok(SiegelPoint::new(m)?)
        }
    }
}

fn check_json_format(common: &CommonOpts) -> Result<(), Failure> {
    match common.format.as_str() {
        "json" => Ok(()),
        "csv" => Err(Failure::config(
            "csv output is supported for the n0 ledger only",
        )),
        other => Err(Failure::config(format!("unknown format {other:?}"))),
    }
}

fn emit(common: &CommonOpts, text: String) -> Result<u8, Failure> {
    let text = if text.ends_with('\n') {
        text
    } else {
        text + "\n"
    };
    match &common.out {
        None => {
            print!("{text}");
            Ok(EXIT_OK)
        }
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| Failure::config(format!("cannot write {path}: {e}")))?;
            Ok(EXIT_OK)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RepInfoReport {
    n: usize,
    omega: Vec<i64>,
    dim: usize,
    tensor_degree: usize,
    det_twist: i64,
    hwv_index: usize,
    weight_labels: Vec<Vec<i64>>,
}

fn rep_info(common: &CommonOpts, save: Option<&str>) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    if let Some(path) = save {
        std::fs::write(path, rep.to_json())
            .map_err(|e| Failure::config(format!("cannot write {path}: {e}")))?;
    }
    let report = RepInfoReport {
        n: rep.n(),
        omega: rep.weight().omega().to_vec(),
        dim: rep.dim(),
        tensor_degree: rep.tensor_degree(),
        det_twist: rep.det_twist(),
        hwv_index: rep.hwv_index(),
        weight_labels: rep.weight_labels().to_vec(),
    };
    emit(common, to_json(&report))
}

#[derive(Serialize)]
struct EvalFReport {
    value: Vec<[f64; 2]>,
}

fn eval_f(common: &CommonOpts, seed_fn: &SeedOpts, z: Option<&str>) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    let seed = build_seed_fn(&rep, seed_fn)?;
    let point = parse_point(&rep, z)?;
    let value = seed.eval(&point)?;
    emit(
        common,
        to_json(&EvalFReport {
            value: cvector_json(&value),
        }),
    )
}

#[derive(Serialize)]
struct PoincareReport {
    value: Vec<[f64; 2]>,
    terms: u64,
    level: u64,
    word_length: u32,
    stats: TermStats,
}

fn poincare(
    common: &CommonOpts,
    seed_fn: &SeedOpts,
    z: Option<&str>,
    word_length: u32,
    level: u64,
) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    let seed = build_seed_fn(&rep, seed_fn)?;
    let point = parse_point(&rep, z)?;
    let gens = generators(rep.n());
    let set = enumerate_ball(rep.n(), &gens, word_length, level)?;
    let (value, stats) = poincare_truncated(&seed, &set, &point)?;
    emit(
        common,
        to_json(&PoincareReport {
            value: cvector_json(&value),
            terms: stats.terms,
            level,
            word_length,
            stats,
        }),
    )
}

fn c_rho_cmd(common: &CommonOpts, mc: &McOpts) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    let cfg = McConfig::new(mc.samples, mc.seed).with_workers(mc.workers);
    let estimate = c_rho(&rep, &cfg)?;
    emit(common, to_json(&estimate))
}

#[derive(Serialize)]
struct MatcoefReport {
    estimate: ComplexEstimate,
    c_rho: IntegralEstimate,
    lift_pairing: [f64; 2],
    reference: [f64; 2],
    consistent_at_3_sigma: bool,
}

fn matcoef(
    common: &CommonOpts,
    seed_fn: &SeedOpts,
    mc: &McOpts,
    g: Option<&str>,
) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    let seed = build_seed_fn(&rep, seed_fn)?;
    let g = match g {
        None => SymplecticMatrix::identity(rep.n()),
        Some(text) => {
            let m = parse_rmatrix(text).map_err(Failure::config)?;
            SymplecticMatrix::new(m)?
        }
    };
    let cfg = McConfig::new(mc.samples, mc.seed).with_workers(mc.workers);
    let estimate = matrix_coefficient_mc(&seed, seed.v(), &g, &cfg)?;
    let c = c_rho(&rep, &cfg)?;
    let pairing = lift_pairing(&seed, seed.v(), &g)?;
    let reference = pairing * c.value;
    let extra = c.stderr * pairing.norm();
    let report = MatcoefReport {
        estimate,
        c_rho: c,
        lift_pairing: [pairing.re, pairing.im],
        reference: [reference.re, reference.im],
        consistent_at_3_sigma: estimate.agrees_with(reference, extra, 3.0),
    };
    emit(common, to_json(&report))
}

#[derive(Serialize)]
struct FourierReport {
    value: Vec<[f64; 2]>,
    level: u64,
    intervals: usize,
}

fn fourier(
    common: &CommonOpts,
    seed_fn: &SeedOpts,
    t_text: &str,
    level: u64,
    y0: Option<&str>,
    points: usize,
) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    let seed = build_seed_fn(&rep, seed_fn)?;
    let twice = parse_half_integral(t_text).map_err(Failure::config)?;
    let t = HalfIntegralMatrix::from_twice(twice)?;
    let y0 = match y0 {
        None => RMatrix::identity(rep.n(), rep.n()),
        Some(text) => parse_rmatrix(text).map_err(Failure::config)?,
    };
    let value = fourier_coefficient(&rep, |z| seed.eval(z), &t, level, &y0, points)?;
    emit(
        common,
        to_json(&FourierReport {
            value: cvector_json(&value),
            level,
            intervals: points,
        }),
    )
}

fn n0(
    common: &CommonOpts,
    seed_fn: &SeedOpts,
    mc: &McOpts,
    n_min: u32,
    n_max: u32,
    cap: u64,
) -> Result<u8, Failure> {
    if common.format != "json" && common.format != "csv" {
        return Err(Failure::config(format!(
            "unknown format {:?}",
            common.format
        )));
    }
    if n_min != 3 {
        return Err(Failure::config(
            "the threshold scan starts at N = 3 (--N-min 3)",
        ));
    }
    let rep = build_common_rep(common)?;
    let seed = build_seed_fn(&rep, seed_fn)?;
    let cfg = McConfig::new(mc.samples, mc.seed).with_workers(mc.workers);
    let problem =
        NonvanishingProblem::new(rep, seed.mu().clone(), seed.v().clone(), cfg, cap)?;
    let result = find_n0(&problem, n_max)?;
    let undecided = result.n0.is_none();
    let text = if common.format == "csv" {
        let mut lines = vec!["N,M,lhs,lhs_err,rhs_half,decision".to_string()];
        for row in &result.ledger {
            lines.push(format!(
                "{},{},{},{},{},{}",
                row.level, row.m_of_n, row.lhs, row.lhs_err, row.rhs_half, row.decision
            ));
        }
        lines.join("\n")
    } else {
        to_json(&result)
    };
    let code = emit(common, text)?;
    if undecided {
        return Ok(EXIT_UNDECIDED);
    }
    Ok(code)
}

fn kak_check(
    common: &CommonOpts,
    seed_fn: &SeedOpts,
    mc: &McOpts,
    radii: &str,
) -> Result<u8, Failure> {
    check_json_format(common)?;
    let rep = build_common_rep(common)?;
    let seed = build_seed_fn(&rep, seed_fn)?;
    let radii = parse_f64_list(radii).map_err(Failure::config)?;
    let cfg = McConfig::new(mc.samples, mc.seed).with_workers(mc.workers);
    let problem = NonvanishingProblem::new(
        rep,
        seed.mu().clone(),
        seed.v().clone(),
        cfg,
        DEFAULT_ESCALATION_CAP,
    )?;
    let report = kak_crosscheck(&problem, &radii)?;
    emit(common, to_json(&report))
}

#[derive(Serialize)]
struct SelftestReport {
    passed: usize,
    failed: usize,
    checks: Vec<siegelforms::selftest::CheckResult>,
}

fn selftest(common: &CommonOpts, mc: &McOpts) -> Result<u8, Failure> {
    check_json_format(common)?;
    let samples = if mc.samples == 1_000_000 {
        100_000 // lighter default than the integral commands
    } else {
        mc.samples
    };
    let checks = siegelforms::selftest::run_all(mc.seed, samples, mc.workers);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} [{}] {} - {}",
            check.suite, check.name, check.detail
        );
    }
    let report = SelftestReport {
        passed: checks.len() - failed,
        failed,
        checks,
    };
    if let Some(path) = &common.out {
        std::fs::write(path, to_json(&report) + "\n")
            .map_err(|e| Failure::config(format!("cannot write {path}: {e}")))?;
    }
    if failed > 0 {
        return Err(Failure {
            code: 1,
            message: format!("{failed} self-test check(s) failed"),
        });
    }
    Ok(EXIT_OK)
}
