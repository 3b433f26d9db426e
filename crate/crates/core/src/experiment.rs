//! Deterministic experiment pipeline: generate random instances with a
//! planted sparse vector, certify the range space property, solve the l0
//! and l1 problems, build the dual witness, and record error-bound
//! ingredients and inequality margins per trial.
//!
//! Determinism contract: a config and seed fix every byte of the CSV
//! output. Each trial draws from its own seeded stream, trials may run in
//! parallel, and records are merged in trial order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{build_p0, Polytope};
use crate::error::{Error, Result};
use crate::l0::{solve_l0, L0_DIM_CAP};
use crate::l1::{
    assemble_theta, construct_dual_witness, solve_l1, top_k_pattern, witness_conditions_residual,
};
use crate::linalg::{self, l2_norm, Matrix, PNorm, RANK_TOL};
use crate::problem::{best_k_term_error, ProblemData, Weights};
use crate::rsp::{certify_restricted, certify_weak, witness_for_pattern, SignPattern};
use crate::stability::{compute_constants, step_margins, NormChoice, StepMargins};

/// Ambient dimension cap for experiment configs.
pub const EXPERIMENT_DIM_CAP: usize = 40;
/// Attempts allowed when rejection-sampling full-rank matrices.
const GENERATION_CAP: usize = 100;

/// CSV schema version line written ahead of the header.
pub const CSV_SCHEMA: &str = "# schema: trial-records-v1";
pub const CSV_HEADER: &str = "trial,rsp_holds,theta_residual,value_l1,k_min_l0,err_l2,sigma_k,term_eps_upsilon,term_phi,term_Bxb,margin_eq12,margin_eq14,margin_eq17,margin_eq19";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub n: usize,
    pub m: usize,
    /// side-constraint rows; zero means none
    #[serde(default)]
    pub l: usize,
    pub h: usize,
    /// planted sparsity and certification order
    pub k: usize,
    pub epsilon: f64,
    /// the weight triple (a1, a2, a3)
    pub weights: [f64; 3],
    /// extra polytope facets beyond the signed axes
    pub facets: usize,
    pub seed: u64,
    /// norm indices (c, d, dhat); "inf" is accepted
    #[serde(default = "default_norms")]
    pub norms: [String; 3],
}

fn default_norms() -> [String; 3] {
    ["1".into(), "1".into(), "1".into()]
}

impl ExperimentConfig {
    pub fn norm_choice(&self) -> Result<NormChoice> {
        Ok(NormChoice {
            c: parse_norm(&self.norms[0])?,
            d: parse_norm(&self.norms[1])?,
            dhat: parse_norm(&self.norms[2])?,
        })
    }

    pub fn weights_struct(&self) -> Weights {
        Weights::new(self.weights[0], self.weights[1], self.weights[2])
    }

    fn validate(&self) -> Result<()> {
        if self.n > EXPERIMENT_DIM_CAP {
            return Err(Error::InvalidInput(format!(
                "n = {} exceeds the cap {EXPERIMENT_DIM_CAP}",
                self.n
            )));
        }
        if self.m > self.n || self.m > self.h || self.l >= self.n.max(1) || self.k > self.n {
            return Err(Error::InvalidInput(
                "dimensions must satisfy m <= n, m <= h, l < n, k <= n".into(),
            ));
        }
        let w = self.weights_struct();
        if w.l2 < 0.0 || w.linf < 0.0 || w.l1 < 0.0 || (w.l2 + w.linf + w.l1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("weights must be a convex combination".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::InvalidInput("epsilon must be nonnegative".into()));
        }
        Ok(())
    }
}

pub fn parse_norm(s: &str) -> Result<PNorm> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "oo" => Ok(PNorm::Inf),
        other => {
            let p: f64 = other
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad norm index \"{s}\"")))?;
            PNorm::general(p)
        }
    }
}

/// One line of the experiment report. `None` fields print as `NA`.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub rsp_holds: bool,
    pub theta_residual: f64,
    pub value_l1: f64,
    pub k_min_l0: Option<usize>,
    /// `\|x0 - x*\|_2` against the planted vector
    pub err_l2: f64,
    pub sigma_k: f64,
    /// `eps * upsilon_hat`
    pub term_eps_upsilon: f64,
    /// `upsilon(d,dhat) * \|phi(x0)\|_{d'}`
    pub term_phi: f64,
    /// `vartheta(c) * \|B x0 - b\|_{c'}`
    pub term_bxb: f64,
    pub margin_eq12: Option<f64>,
    pub margin_eq14: Option<f64>,
    pub margin_eq17: Option<f64>,
    pub margin_eq19: Option<f64>,
}

/// A generated instance together with its planted vector.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub problem: ProblemData,
    pub x0: Vec<f64>,
}

/// Extra per-trial diagnostics that feed the acceptance checks but not the
/// CSV: the remaining inequality margin and the witness-condition residual.
#[derive(Clone, Debug)]
pub struct TrialDiagnostics {
    pub margins: Option<StepMargins>,
    pub witness_residual: Option<f64>,
}

/// Draws an instance with independent standard-normal entries, a planted
/// `k`-sparse vector, noise scaled so the planted vector sits strictly
/// inside the residual budget, and side constraints slack at the planted
/// vector.
pub fn generate_instance(cfg: &ExperimentConfig, trial: usize) -> Result<GeneratedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64 + 1);
    let (n, m, l, h) = (cfg.n, cfg.m, cfg.l, cfg.h);

    let full_rank_matrix = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| -> Result<Matrix> {
        for _ in 0..GENERATION_CAP {
            let mat = gaussian_matrix(rng, rows, cols);
            if linalg::full_row_rank(&mat, RANK_TOL) {
                return Ok(mat);
            }
        }
        Err(Error::NumericalFailure(
            "generation cap exceeded while sampling a full-rank matrix".into(),
        ))
    };

    let a = full_rank_matrix(&mut rng, m, n)?;
    let u = full_rank_matrix(&mut rng, m, h)?;
    let b_mat = if l > 0 {
        // the stacked [A; B] must keep full row rank
        let mut found = None;
        for _ in 0..GENERATION_CAP {
            let cand = gaussian_matrix(&mut rng, l, n);
            if linalg::full_row_rank(&a.vcat(&cand), RANK_TOL) {
                found = Some(cand);
                break;
            }
        }
        found.ok_or_else(|| {
            Error::NumericalFailure("generation cap exceeded while sampling side constraints".into())
        })?
    } else {
        Matrix::empty(n)
    };

    // planted vector: k distinct positions, magnitudes bounded away from 0
    let mut positions: Vec<usize> = (0..n).collect();
    for i in 0..cfg.k {
        let j = rng.random_range(i..n);
        positions.swap(i, j);
    }
    let mut x0 = vec![0.0; n];
    for &j in positions.iter().take(cfg.k) {
        let raw: f64 = StandardNormal.sample(&mut rng);
        x0[j] = raw + 0.5 * raw.signum();
    }

    let ax0 = a.matvec(&x0);
    let weights = cfg.weights_struct();
    let mut problem = ProblemData {
        a,
        b_mat,
        u,
        y: ax0.clone(),
        b_rhs: vec![0.0; l],
        epsilon: cfg.epsilon,
        weights,
    };

    // noise scaled so the planted vector lands at 90% of the budget
    if cfg.epsilon > 0.0 {
        let noise: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        problem.y = ax0.iter().zip(&noise).map(|(a, n)| a + n).collect();
        let unit = problem.constraint_value(&x0)?;
        if unit > 1e-12 {
            let alpha = 0.9 * cfg.epsilon / unit;
            problem.y = ax0.iter().zip(&noise).map(|(a, n)| a + alpha * n).collect();
        } else {
            problem.y = ax0.clone();
        }
    }

    if l > 0 {
        let bx0 = problem.b_mat.matvec(&x0);
        problem.b_rhs = bx0
            .iter()
            .map(|&v| {
                let margin: f64 = StandardNormal.sample(&mut rng);
                v + margin.abs()
            })
            .collect();
    }

    debug_assert!(problem.validate().is_valid());
    Ok(GeneratedInstance { problem, x0 })
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, StandardNormal.sample(rng));
        }
    }
    m
}

/// Runs one trial; shared polytope is passed in so refinement is uniform
/// across trials.
pub fn run_trial(
    cfg: &ExperimentConfig,
    pol: &Polytope,
    trial: usize,
) -> Result<(TrialRecord, TrialDiagnostics)> {
    let choice = cfg.norm_choice()?;
    let inst = generate_instance(cfg, trial)?;
    let p = &inst.problem;
    let x0 = &inst.x0;

    let cert = if p.l() == 0 {
        certify_weak(&p.a, cfg.k)?
    } else {
        certify_restricted(&p.a, &p.b_mat, cfg.k)?
    };

    let sol = solve_l1(p, pol)?;
    let theta = assemble_theta(p, pol)?;
    let u = theta.embed(&sol.primal, &sol.dual);
    let (_, theta_residual) = theta.residual(&u);

    let k_min_l0 = if p.n() <= L0_DIM_CAP {
        Some(solve_l0(p, pol, cfg.k)?.k_min)
    } else {
        None
    };

    let consts = compute_constants(p, choice)?;
    let err_l2 = {
        let diff: Vec<f64> = x0.iter().zip(&sol.primal.x).map(|(a, b)| a - b).collect();
        l2_norm(&diff)
    };
    let sigma_k = best_k_term_error(x0, cfg.k)?;
    let phi0 = p.residual_phi(x0)?;
    let term_eps_upsilon = p.epsilon * consts.upsilon_hat;
    let term_phi = consts.upsilon * linalg::lp_norm_or_zero(&phi0, choice.d_conj());
    let term_bxb = if p.l() > 0 {
        let bx = p.b_mat.matvec(x0);
        let r: Vec<f64> = bx.iter().zip(&p.b_rhs).map(|(v, b)| v - b).collect();
        consts.vartheta_c * linalg::lp_norm_or_zero(&r, choice.c_conj())
    } else {
        0.0
    };

    let mut margins = None;
    let mut witness_residual = None;
    if cert.holds {
        // witness for the planted vector's own sign pattern
        let (j1, j2) = top_k_pattern(x0, cfg.k);
        let pattern = SignPattern::new(j1, j2);
        let wit_data = witness_for_pattern(&p.a, &p.b_mat, &pattern)?.ok_or_else(|| {
            Error::NumericalFailure(
                "certificate holds but the planted pattern has no witness".into(),
            )
        })?;
        let witness = construct_dual_witness(
            p,
            pol,
            x0,
            cfg.k,
            &wit_data.eta,
            &wit_data.nu,
            &wit_data.h,
        )?;
        witness_residual = Some(witness_conditions_residual(
            p,
            pol,
            &witness.primal,
            &witness.dual,
        ));
        margins = Some(step_margins(
            p,
            x0,
            cfg.k,
            &witness,
            &wit_data.eta,
            &wit_data.h,
            &consts,
        )?);
    }

    let record = TrialRecord {
        trial,
        rsp_holds: cert.holds,
        theta_residual,
        value_l1: sol.value,
        k_min_l0,
        err_l2,
        sigma_k,
        term_eps_upsilon,
        term_phi,
        term_bxb,
        margin_eq12: margins.as_ref().map(|m| m.eq12),
        margin_eq14: margins.as_ref().map(|m| m.eq14),
        margin_eq17: margins.as_ref().map(|m| m.eq17),
        margin_eq19: margins.as_ref().map(|m| m.eq19),
    };
    Ok((
        record,
        TrialDiagnostics {
            margins,
            witness_residual,
        },
    ))
}

/// Runs every trial (in parallel, merged in trial order).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<(TrialRecord, TrialDiagnostics)>> {
    cfg.validate()?;
    cfg.norm_choice()?;
    let pol = build_p0(cfg.m, cfg.facets, cfg.seed)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, &pol, t))
        .collect()
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.12e}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

/// Serializes records to CSV with a versioned schema line. Byte-for-byte
/// deterministic for a given record list.
pub fn write_csv<W: std::io::Write>(records: &[TrialRecord], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_SCHEMA}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.rsp_holds,
            fmt_f64(r.theta_residual),
            fmt_f64(r.value_l1),
            r.k_min_l0.map_or_else(|| "NA".to_string(), |k| k.to_string()),
            fmt_f64(r.err_l2),
            fmt_f64(r.sigma_k),
            fmt_f64(r.term_eps_upsilon),
            fmt_f64(r.term_phi),
            fmt_f64(r.term_bxb),
            fmt_opt_f64(r.margin_eq12),
            fmt_opt_f64(r.margin_eq14),
            fmt_opt_f64(r.margin_eq17),
            fmt_opt_f64(r.margin_eq19),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            trials: 4,
            n: 6,
            m: 4,
            l: 0,
            h: 4,
            k: 1,
            epsilon: 0.0,
            weights: [1.0, 0.0, 0.0],
            facets: 8,
            seed: 7,
            norms: default_norms(),
        }
    }

    #[test]
    fn generation_is_deterministic_and_feasible() {
        let cfg = small_config();
        let a = generate_instance(&cfg, 0).unwrap();
        let b = generate_instance(&cfg, 0).unwrap();
        assert_eq!(a.problem.a, b.problem.a);
        assert_eq!(a.x0, b.x0);
        // distinct trials draw distinct data
        let c = generate_instance(&cfg, 1).unwrap();
        assert_ne!(a.problem.a, c.problem.a);
        assert!(a.problem.is_feasible(&a.x0, 1e-9).unwrap());
        assert_eq!(a.x0.iter().filter(|v| **v != 0.0).count(), cfg.k);
    }

    #[test]
    fn noisy_generation_sits_inside_the_budget() {
        let mut cfg = small_config();
        cfg.epsilon = 0.3;
        cfg.weights = [0.4, 0.3, 0.3];
        let inst = generate_instance(&cfg, 2).unwrap();
        let cv = inst.problem.constraint_value(&inst.x0).unwrap();
        assert!((cv - 0.9 * cfg.epsilon).abs() < 1e-9, "cv = {cv}");
    }

    #[test]
    fn side_constraints_are_slack_at_the_planted_vector() {
        let mut cfg = small_config();
        cfg.l = 2;
        cfg.epsilon = 0.2;
        let inst = generate_instance(&cfg, 0).unwrap();
        assert_eq!(inst.problem.l(), 2);
        assert!(inst.problem.side_violation(&inst.x0) <= 0.0);
        assert!(inst.problem.validate().is_valid());
    }

    #[test]
    fn exact_recovery_on_certified_noiseless_trials() {
        let cfg = small_config();
        let results = run_experiment(&cfg).unwrap();
        assert_eq!(results.len(), cfg.trials);
        for (rec, diag) in &results {
            if rec.rsp_holds {
                assert!(rec.err_l2 <= 1e-6, "trial {}: err {}", rec.trial, rec.err_l2);
                assert!(rec.sigma_k == 0.0);
                let m = diag.margins.as_ref().unwrap();
                for margin in [m.eq12, m.eq14, m.eq17, m.eq19, m.eq10] {
                    assert!(margin >= -1e-8, "trial {}: margin {margin}", rec.trial);
                }
                assert!(diag.witness_residual.unwrap() <= 1e-8);
            }
            assert!(rec.theta_residual <= 1e-7);
            assert_eq!(rec.k_min_l0, Some(1));
        }
    }

    #[test]
    fn csv_bytes_are_reproducible() {
        let cfg = small_config();
        let mut first = Vec::new();
        let records: Vec<TrialRecord> = run_experiment(&cfg)
            .unwrap()
            .into_iter()
            .map(|(r, _)| r)
            .collect();
        write_csv(&records, &mut first).unwrap();
        let mut second = Vec::new();
        let records: Vec<TrialRecord> = run_experiment(&cfg)
            .unwrap()
            .into_iter()
            .map(|(r, _)| r)
            .collect();
        write_csv(&records, &mut second).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.starts_with(CSV_SCHEMA));
        assert_eq!(text.lines().count(), 2 + cfg.trials);
        assert_eq!(text.lines().nth(1).unwrap(), CSV_HEADER);
    }

    #[test]
    fn config_validation_rejects_bad_dimensions() {
        let mut cfg = small_config();
        cfg.m = 10; // m > n
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = small_config();
        cfg.weights = [0.5, 0.6, 0.0];
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = small_config();
        cfg.norms = ["0.5".into(), "1".into(), "1".into()];
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn parse_norm_accepts_inf_and_numbers() {
        assert_eq!(parse_norm("inf").unwrap(), PNorm::Inf);
        assert_eq!(parse_norm("1").unwrap(), PNorm::One);
        assert_eq!(parse_norm("2").unwrap(), PNorm::Two);
        assert!(matches!(parse_norm("3.5").unwrap(), PNorm::P(_)));
        assert!(parse_norm("zero").is_err());
    }
}
