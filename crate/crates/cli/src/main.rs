//! Command-line surface: solve instances, certify the range space
//! property, compute stability constants, run the sparsest-support oracle,
//! and drive experiment batches.
//!
//! Exit codes: 0 success (certificate holds), 2 infeasible instance,
//! 3 certificate fails, 4 input error, 5 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use sparsestab::ball::build_p0;
use sparsestab::error::Error;
use sparsestab::experiment::{parse_norm, run_experiment, write_csv, ExperimentConfig};
use sparsestab::l0::solve_l0;
use sparsestab::l1::{assemble_theta, solve_l1};
use sparsestab::linalg::Matrix;
use sparsestab::problem::ProblemData;
use sparsestab::rsp::{certify_restricted, certify_weak};
use sparsestab::stability::{compute_constants, compute_upsilon_prime, estimate_robinson,
    upsilon_hat_prime, NormChoice};
use sparsestab::PNorm;

const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CERT_FAILS: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_NUMERICAL: u8 = 5;

#[derive(Parser)]
#[command(name = "sparsestab", version, about = "l1 sparse recovery with mixed residual constraints")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the l1 program for a problem file
    Solve {
        /// problem JSON path
        #[arg(long)]
        problem: PathBuf,
        /// extra polytope facets beyond the signed axes
        #[arg(long, default_value_t = 64)]
        facets: usize,
        /// seed for polytope directions in dimensions >= 3
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// output path (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the (restricted) weak range space property of order k
    Certify {
        /// problem JSON path; only "A" (and optional "B") are read
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        k: usize,
        /// ignore "B" even if present
        #[arg(long)]
        weak: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the stability constants for a problem file
    Constants {
        #[arg(long)]
        problem: PathBuf,
        /// norm indices c,d,dhat (e.g. "1,1,1"; "inf" allowed)
        #[arg(long, default_value = "1,1,1")]
        norms: String,
        #[arg(long, default_value_t = 64)]
        facets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// perturbation samples for the Hoffman-constant estimate
        /// (0 skips the estimate)
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force sparsest feasible support
    Oracle {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 64)]
        facets: usize,
        /// largest support size to try (defaults to n)
        #[arg(long)]
        k_cap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment batch and emit the CSV report
    Experiment {
        /// config JSON path
        #[arg(long)]
        config: PathBuf,
        /// CSV output path (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Infeasible | Error::NoFeasibleSupport(_) => EXIT_INFEASIBLE,
        Error::NumericalFailure(_) | Error::Unbounded => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Solve {
            problem,
            facets,
            seed,
            out,
        } => cmd_solve(&problem, facets, seed, out.as_deref()),
        Cmd::Certify {
            problem,
            k,
            weak,
            out,
        } => cmd_certify(&problem, k, weak, out.as_deref()),
        Cmd::Constants {
            problem,
            norms,
            facets,
            seed,
            samples,
            out,
        } => cmd_constants(&problem, &norms, facets, seed, samples, out.as_deref()),
        Cmd::Oracle {
            problem,
            facets,
            k_cap,
            seed,
            out,
        } => cmd_oracle(&problem, facets, k_cap, seed, out.as_deref()),
        Cmd::Experiment { config, out } => cmd_experiment(&config, out.as_deref()),
    }
}

fn load_problem(path: &Path) -> Result<ProblemData, Error> {
    let text = fs::read_to_string(path)?;
    let p = ProblemData::from_json_str(&text)?;
    // rank defects do not block loading; the solver decides feasibility
    for v in p.validate().violations {
        eprintln!("warning: {v}");
    }
    Ok(p)
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_solve(path: &Path, facets: usize, seed: u64, out: Option<&Path>) -> Result<u8, Error> {
    let p = load_problem(path)?;
    let pol = build_p0(p.m(), facets, seed)?;
    let sol = match solve_l1(&p, &pol) {
        Ok(s) => s,
        Err(Error::Infeasible) => {
            emit(&serde_json::json!({ "status": "infeasible" }), out)?;
            return Ok(EXIT_INFEASIBLE);
        }
        Err(e) => return Err(e),
    };
    let theta = assemble_theta(&p, &pol)?;
    let u = theta.embed(&sol.primal, &sol.dual);
    let (_, theta_residual) = theta.residual(&u);
    let report = serde_json::json!({
        "status": "optimal",
        "value": sol.value,
        "x": sol.primal.x,
        "theta_residual": theta_residual,
        "facets": pol.facet_count(),
        "dual": {
            "w1": sol.dual.w1,
            "w2": sol.dual.w2,
            "w3": sol.dual.w3,
            "w4": sol.dual.w4,
            "w5": sol.dual.w5,
            "w6": sol.dual.w6,
            "w7": sol.dual.w7,
            "w8": sol.dual.w8,
            "w9": sol.dual.w9,
        },
    });
    emit(&report, out)?;
    Ok(EXIT_OK)
}

/// Lenient problem view for certification: only the matrices matter.
#[derive(Deserialize)]
struct CertifyInput {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    b: Option<Vec<Vec<f64>>>,
}

fn cmd_certify(path: &Path, k: usize, weak: bool, out: Option<&Path>) -> Result<u8, Error> {
    let text = fs::read_to_string(path)?;
    let input: CertifyInput = serde_json::from_str(&text)?;
    let a = Matrix::from_rows(&input.a)?;
    let b = match (&input.b, weak) {
        (Some(rows), false) if !rows.is_empty() => Matrix::from_rows(rows)?,
        _ => Matrix::empty(a.cols()),
    };
    let cert = if b.rows() == 0 {
        certify_weak(&a, k)?
    } else {
        certify_restricted(&a, &b, k)?
    };
    let failing = cert
        .failing
        .as_ref()
        .map(|p| serde_json::json!([p.j1, p.j2]))
        .unwrap_or(serde_json::Value::Null);
    let report = serde_json::json!({
        "k": cert.k,
        "holds": cert.holds,
        "failing": failing,
        "witness_count": cert.witnesses.len(),
    });
    emit(&report, out)?;
    Ok(if cert.holds { EXIT_OK } else { EXIT_CERT_FAILS })
}

fn parse_norm_triple(s: &str) -> Result<NormChoice, Error> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "--norms expects \"c,d,dhat\", got \"{s}\""
        )));
    }
    Ok(NormChoice {
        c: parse_norm(parts[0])?,
        d: parse_norm(parts[1])?,
        dhat: parse_norm(parts[2])?,
    })
}

fn norm_label(p: PNorm) -> String {
    p.to_string()
}

fn cmd_constants(
    path: &Path,
    norms: &str,
    facets: usize,
    seed: u64,
    samples: usize,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let p = load_problem(path)?;
    let choice = parse_norm_triple(norms)?;
    let mut consts = compute_constants(&p, choice)?;
    if samples > 0 {
        let pol = build_p0(p.m(), facets, seed)?;
        let theta = assemble_theta(&p, &pol)?;
        consts = consts.with_sigma(estimate_robinson(&theta.system, samples, seed)?);
    }
    let mut report = serde_json::json!({
        "upsilon": consts.upsilon,
        "vartheta_c": consts.vartheta_c,
        "vartheta_1": consts.vartheta_1,
        "upsilon_11": consts.upsilon_11,
        "upsilon_inf_inf": consts.upsilon_inf_inf,
        "upsilon_hat": consts.upsilon_hat,
        "sigma_est": consts.sigma_est,
        "sigma_est_kind": if samples > 0 { "empirical-lower-bound" } else { "skipped" },
        "skipped_singular_subsets": consts.skipped_singular,
        "norms": {
            "c": norm_label(choice.c),
            "c_conj": norm_label(choice.c_conj()),
            "d": norm_label(choice.d),
            "d_conj": norm_label(choice.d_conj()),
            "dhat": norm_label(choice.dhat),
        },
    });
    // fused constants apply only without side constraints
    if p.l() == 0 {
        let (p1, _) = compute_upsilon_prime(&p.u, &p.a, PNorm::One)?;
        let (pinf, _) = compute_upsilon_prime(&p.u, &p.a, PNorm::Inf)?;
        let hat = upsilon_hat_prime(p.weights, p1, pinf, consts.vartheta_1);
        report["upsilon_prime_1"] = serde_json::json!(p1);
        report["upsilon_prime_inf"] = serde_json::json!(pinf);
        report["upsilon_hat_prime"] = serde_json::json!(hat);
    }
    emit(&report, out)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(
    path: &Path,
    facets: usize,
    k_cap: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let p = load_problem(path)?;
    let pol = build_p0(p.m(), facets, seed)?;
    let cap = k_cap.unwrap_or_else(|| p.n());
    let res = solve_l0(&p, &pol, cap)?;
    let report = serde_json::json!({
        "k_min": res.k_min,
        "support": res.support,
        "x": res.x0,
        "exact_l2": res.exact_l2,
    });
    emit(&report, out)?;
    Ok(EXIT_OK)
}

fn cmd_experiment(config: &Path, out: Option<&Path>) -> Result<u8, Error> {
    let text = fs::read_to_string(config)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    let results = run_experiment(&cfg)?;
    let records: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
    let mut buf = Vec::new();
    write_csv(&records, &mut buf)?;
    match out {
        Some(path) => fs::write(path, &buf)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(EXIT_OK)
}
