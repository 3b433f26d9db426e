//! Stability constants and error-bound machinery.
//!
//! The constants are built from two exact induced norms:
//!
//! * `vartheta(c) = \|(C C^T)^{-1} C\|_{inf -> c}` for the stacked matrix
//!   `C = [A; B]`;
//! * `upsilon(d, dhat) = max over size-m column subsets S of U with
//!   invertible `U_S` of `\|U_S^{-1}\|_{dhat -> d} * \|(C C^T)^{-1}
//!   C\|_{inf -> dhat}`;
//! * the fused variant `upsilon'(d) = max_S \|U_S^{-1} (A A^T)^{-1}
//!   A\|_{inf -> d}`, a tighter replacement when there are no side
//!   constraints.
//!
//! `upsilon_hat` selects among `upsilon(1,1)`, `upsilon(inf,inf)` and
//! `vartheta(1)` according to which of the three residual weights vanish.
//!
//! The Hoffman constant of the optimality system is estimated empirically:
//! sampled infeasible points are projected back onto the system in the l1
//! sense (an LP), and the largest observed distance/residual ratio is a
//! lower bound for any valid constant.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::l1::{DualWitness, Polyhedron};
use crate::linalg::{
    self, dot, induced_norm, linf_norm, lp_norm_or_zero, Matrix, PNorm,
};
use crate::problem::{best_k_term_error, ProblemData, Weights};
use crate::simplex::LinearProgram;

/// Column-subset enumeration cap for the upsilon constants.
pub const SUBSET_CAP: usize = 20;

/// The norm indices `(c, d, dhat)`; the conjugates `c'` and `d'` are
/// derived, so the Hölder pairings cannot be mismatched.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NormChoice {
    pub c: PNorm,
    pub d: PNorm,
    pub dhat: PNorm,
}

impl Default for NormChoice {
    fn default() -> Self {
        NormChoice {
            c: PNorm::One,
            d: PNorm::One,
            dhat: PNorm::One,
        }
    }
}

impl NormChoice {
    pub fn c_conj(&self) -> PNorm {
        self.c.conjugate()
    }

    pub fn d_conj(&self) -> PNorm {
        self.d.conjugate()
    }
}

/// The bundle of constants entering the error bounds.
#[derive(Clone, Debug)]
pub struct StabilityConstants {
    /// `upsilon(d, dhat)` at the chosen norms
    pub upsilon: f64,
    /// `vartheta(c)` at the chosen norm
    pub vartheta_c: f64,
    pub vartheta_1: f64,
    pub upsilon_11: f64,
    pub upsilon_inf_inf: f64,
    /// weight-pattern selection among the three constants above
    pub upsilon_hat: f64,
    /// empirical Hoffman-constant estimate (zero when not estimated)
    pub sigma_est: f64,
    pub choice: NormChoice,
    /// singular column subsets skipped while maximizing
    pub skipped_singular: usize,
}

/// `max_S \|U_S^{-1}\|_{dhat -> d} * \|(C C^T)^{-1} C\|_{inf -> dhat}` over
/// size-m column subsets of `u_mat`; singular subsets are skipped and
/// counted.
pub fn compute_upsilon(
    u_mat: &Matrix,
    c_mat: &Matrix,
    d: PNorm,
    dhat: PNorm,
) -> Result<(f64, usize)> {
    let h = u_mat.cols();
    let m = u_mat.rows();
    if h > SUBSET_CAP {
        return Err(Error::EnumerationTooLarge(h, SUBSET_CAP));
    }
    let factor = induced_norm(&linalg::row_space_matrix(c_mat)?, PNorm::Inf, dhat)?;
    let mut best: Option<f64> = None;
    let mut skipped = 0usize;
    let mut buf = vec![0usize; m];
    let mut err: Option<Error> = None;
    visit_subsets(h, m, &mut buf, 0, 0, &mut |idx| {
        if err.is_some() {
            return;
        }
        let sub = u_mat.select_cols(idx);
        if sub.determinant().abs() <= 1e-10 {
            skipped += 1;
            return;
        }
        let inv = match sub.inverse() {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                return;
            }
        };
        match induced_norm(&inv, dhat, d) {
            Ok(nrm) => {
                let cand = nrm * factor;
                best = Some(best.map_or(cand, |b| b.max(cand)));
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    match best {
        Some(v) => Ok((v, skipped)),
        None => Err(Error::NoInvertibleSubset),
    }
}

/// `\|(C C^T)^{-1} C\|_{inf -> c}`.
pub fn compute_vartheta(c_mat: &Matrix, c: PNorm) -> Result<f64> {
    induced_norm(&linalg::row_space_matrix(c_mat)?, PNorm::Inf, c)
}

/// Fused variant without side constraints:
/// `max_S \|U_S^{-1} (A A^T)^{-1} A\|_{inf -> d}`.
pub fn compute_upsilon_prime(u_mat: &Matrix, a: &Matrix, d: PNorm) -> Result<(f64, usize)> {
    let h = u_mat.cols();
    let m = u_mat.rows();
    if h > SUBSET_CAP {
        return Err(Error::EnumerationTooLarge(h, SUBSET_CAP));
    }
    let k = linalg::row_space_matrix(a)?;
    let mut best: Option<f64> = None;
    let mut skipped = 0usize;
    let mut buf = vec![0usize; m];
    let mut err: Option<Error> = None;
    visit_subsets(h, m, &mut buf, 0, 0, &mut |idx| {
        if err.is_some() {
            return;
        }
        let sub = u_mat.select_cols(idx);
        if sub.determinant().abs() <= 1e-10 {
            skipped += 1;
            return;
        }
        let inv = match sub.inverse() {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                return;
            }
        };
        match induced_norm(&inv.matmul(&k), PNorm::Inf, d) {
            Ok(nrm) => best = Some(best.map_or(nrm, |b| b.max(nrm))),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    match best {
        Some(v) => Ok((v, skipped)),
        None => Err(Error::NoInvertibleSubset),
    }
}

/// Weight-pattern selection of the budget constant: only the norms whose
/// weight is active constrain the construction, so vanishing weights shrink
/// the maximum.
pub fn upsilon_hat(w: Weights, upsilon_11: f64, upsilon_inf_inf: f64, vartheta_1: f64) -> f64 {
    let z2 = Weights::is_zero(w.l2);
    let zinf = Weights::is_zero(w.linf);
    let z1 = Weights::is_zero(w.l1);
    match (z2, zinf, z1) {
        (true, true, false) => upsilon_inf_inf,
        (true, false, true) => upsilon_11,
        (false, true, true) => vartheta_1,
        (true, false, false) => upsilon_11.max(upsilon_inf_inf),
        (false, true, false) => upsilon_inf_inf.max(vartheta_1),
        (false, false, true) => upsilon_11.max(vartheta_1),
        _ => upsilon_11.max(upsilon_inf_inf).max(vartheta_1),
    }
}

/// Selection table for the fused constants, same weight-pattern logic with
/// `upsilon'(1)` and `upsilon'(inf)` in place of the two subset constants.
pub fn upsilon_hat_prime(
    w: Weights,
    upsilon_p1: f64,
    upsilon_p_inf: f64,
    vartheta_1: f64,
) -> f64 {
    upsilon_hat(w, upsilon_p1, upsilon_p_inf, vartheta_1)
}

/// Computes the full constant bundle for an instance. `sigma_est` starts at
/// zero; attach an estimate with [`StabilityConstants::with_sigma`].
pub fn compute_constants(p: &ProblemData, choice: NormChoice) -> Result<StabilityConstants> {
    let c_mat = p.stacked();
    let (upsilon, sk1) = compute_upsilon(&p.u, &c_mat, choice.d, choice.dhat)?;
    let (upsilon_11, sk2) = compute_upsilon(&p.u, &c_mat, PNorm::One, PNorm::One)?;
    let (upsilon_inf_inf, sk3) = compute_upsilon(&p.u, &c_mat, PNorm::Inf, PNorm::Inf)?;
    let vartheta_c = compute_vartheta(&c_mat, choice.c)?;
    let vartheta_1 = compute_vartheta(&c_mat, PNorm::One)?;
    let hat = upsilon_hat(p.weights, upsilon_11, upsilon_inf_inf, vartheta_1);
    Ok(StabilityConstants {
        upsilon,
        vartheta_c,
        vartheta_1,
        upsilon_11,
        upsilon_inf_inf,
        upsilon_hat: hat,
        sigma_est: 0.0,
        choice,
        skipped_singular: sk1.max(sk2).max(sk3),
    })
}

impl StabilityConstants {
    pub fn with_sigma(mut self, sigma_est: f64) -> Self {
        self.sigma_est = sigma_est;
        self
    }
}

fn visit_subsets(
    n: usize,
    k: usize,
    buf: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        visit(buf);
        return;
    }
    for j in start..n {
        buf[depth] = j;
        visit_subsets(n, k, buf, depth + 1, j + 1, visit);
    }
}

// ---------------------------------------------------------------------------
// Hoffman-constant estimation

/// Exact l1 distance from `u` to the polyhedron `{z : M1 z <= p, M2 z = q}`
/// via the envelope LP `min e^T d, -d <= u - z <= d`.
pub fn l1_distance_to(theta: &Polyhedron, u: &[f64]) -> Result<f64> {
    let dim = theta.dim();
    assert_eq!(u.len(), dim);
    // variables: z (free) then d (nonnegative)
    let mut objective = vec![0.0; 2 * dim];
    let mut nonneg = vec![false; 2 * dim];
    for j in 0..dim {
        objective[dim + j] = 1.0;
        nonneg[dim + j] = true;
    }
    let mut lp = LinearProgram::new(objective, nonneg);
    for i in 0..theta.m1.rows() {
        let mut row = vec![0.0; 2 * dim];
        row[..dim].copy_from_slice(theta.m1.row(i));
        lp.add_ineq(&row, theta.p[i]);
    }
    for i in 0..theta.m2.rows() {
        let mut row = vec![0.0; 2 * dim];
        row[..dim].copy_from_slice(theta.m2.row(i));
        lp.add_eq(&row, theta.q[i]);
    }
    // z - d <= u and -z - d <= -u
    for j in 0..dim {
        let mut row = vec![0.0; 2 * dim];
        row[j] = 1.0;
        row[dim + j] = -1.0;
        lp.add_ineq(&row, u[j]);
        let mut row = vec![0.0; 2 * dim];
        row[j] = -1.0;
        row[dim + j] = -1.0;
        lp.add_ineq(&row, -u[j]);
    }
    let sol = lp.solve();
    match sol.status {
        crate::simplex::LpStatus::Optimal => Ok(sol.value.max(0.0)),
        crate::simplex::LpStatus::Infeasible => Err(Error::Infeasible),
        _ => Err(Error::NumericalFailure("distance LP failed".into())),
    }
}

/// Empirical lower-bound estimate of the Hoffman constant of the system:
/// the largest ratio of exact l1 projection distance to l1 constraint
/// residual over sampled perturbations of a feasible point. Since the l2
/// distance never exceeds the l1 distance, `sigma_est * residual` bounds
/// the l2 distance at every sampled point; the true constant may be larger.
pub fn estimate_robinson(theta: &Polyhedron, samples: usize, seed: u64) -> Result<f64> {
    let base = theta.feasible_point()?;
    let scale = 2.0 * (1.0 + linf_norm(&base));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..samples {
        let u: Vec<f64> = base
            .iter()
            .map(|&v| v + rng.random_range(-scale..scale))
            .collect();
        let (_, res) = theta.residual(&u);
        if res <= 1e-12 {
            continue;
        }
        let dist = l1_distance_to(theta, &u)?;
        best = best.max(dist / res);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// error-bound evaluation

/// Per-term breakdown of the error bound
/// `eps' + 2 sigma { 2 sigma_k(x)_1 + eps upsilon_hat + \|(Bx-b)^+\|_1
///  + \|Bx-b\|_{c'} vartheta(c) + \|phi(x)\|_{d'} upsilon(d,dhat)
///  + (residual excess)^+ }`,
/// each term already scaled by `2 sigma_est`.
#[derive(Clone, Debug)]
pub struct BoundBreakdown {
    pub eps_prime: f64,
    pub term_sigma_k: f64,
    pub term_eps_upsilon: f64,
    pub term_bxb_plus: f64,
    pub term_bxb: f64,
    pub term_phi: f64,
    pub term_penalty: f64,
    pub total: f64,
    /// true when the two penalty terms were certified zero (feasible form)
    pub feasible_form: bool,
}

/// Evaluates the bound at `x`. With `feasible = true` the two penalty terms
/// must vanish (checked to 1e-10) and the shorter feasible-point form is
/// returned.
pub fn bound_rhs(
    p: &ProblemData,
    x: &[f64],
    k: usize,
    constants: &StabilityConstants,
    eps_prime: f64,
    feasible: bool,
) -> Result<BoundBreakdown> {
    let sigma_k = best_k_term_error(x, k)?;
    let phi = p.residual_phi(x)?;
    let phi_norm = lp_norm_or_zero(&phi, constants.choice.d_conj());
    let (bxb_plus, bxb_norm) = if p.l() > 0 {
        let bx = p.b_mat.matvec(x);
        let r: Vec<f64> = bx.iter().zip(&p.b_rhs).map(|(v, b)| v - b).collect();
        let plus: f64 = r.iter().map(|v| v.max(0.0)).sum();
        (plus, lp_norm_or_zero(&r, constants.choice.c_conj()))
    } else {
        (0.0, 0.0)
    };
    let penalty = (p.constraint_value(x)? - p.epsilon).max(0.0);

    if feasible && (bxb_plus > 1e-10 || penalty > 1e-10) {
        return Err(Error::InvalidInput(format!(
            "x declared feasible but violates constraints: side {bxb_plus:.3e}, residual {penalty:.3e}"
        )));
    }

    let s2 = 2.0 * constants.sigma_est;
    let term_sigma_k = s2 * 2.0 * sigma_k;
    let term_eps_upsilon = s2 * p.epsilon * constants.upsilon_hat;
    let term_bxb_plus = if feasible { 0.0 } else { s2 * bxb_plus };
    let term_bxb = s2 * bxb_norm * constants.vartheta_c;
    let term_phi = s2 * phi_norm * constants.upsilon;
    let term_penalty = if feasible { 0.0 } else { s2 * penalty };
    let total = eps_prime
        + term_sigma_k
        + term_eps_upsilon
        + term_bxb_plus
        + term_bxb
        + term_phi
        + term_penalty;
    Ok(BoundBreakdown {
        eps_prime,
        term_sigma_k,
        term_eps_upsilon,
        term_bxb_plus,
        term_bxb,
        term_phi,
        term_penalty,
        total,
        feasible_form: feasible,
    })
}

/// Margins (bound minus attained value) of the inequalities the witness
/// construction is built on; all must be nonnegative up to rounding on a
/// certified instance. Field names match the experiment CSV columns.
#[derive(Clone, Debug)]
pub struct StepMargins {
    /// `2 sigma_k(x)_1 - |e^T t - x^T eta|`
    pub eq12: f64,
    /// `upsilon(d,dhat) \|phi(x)\|_{d'} - |phi(x)^T g|`
    pub eq14: f64,
    /// `vartheta(c) \|Bx - b\|_{c'} - |(Bx-b)^T h|`
    pub eq17: f64,
    /// residual-excess envelope: `(true excess)^+ - (surrogate excess)^+`
    pub eq19: f64,
    /// `eps upsilon_hat - eps |w3|`
    pub eq10: f64,
}

pub fn step_margins(
    p: &ProblemData,
    x: &[f64],
    k: usize,
    witness: &DualWitness,
    eta: &[f64],
    hstar: &[f64],
    constants: &StabilityConstants,
) -> Result<StepMargins> {
    let sigma_k = best_k_term_error(x, k)?;
    let gap = (witness.primal.t.iter().sum::<f64>() - dot(x, eta)).abs();
    let eq12 = 2.0 * sigma_k - gap;

    let phi = p.residual_phi(x)?;
    let phi_norm = lp_norm_or_zero(&phi, constants.choice.d_conj());
    let eq14 = constants.upsilon * phi_norm - dot(&phi, &witness.g).abs();

    let eq17 = if p.l() > 0 {
        let bx = p.b_mat.matvec(x);
        let r: Vec<f64> = bx.iter().zip(&p.b_rhs).map(|(v, b)| v - b).collect();
        constants.vartheta_c * lp_norm_or_zero(&r, constants.choice.c_conj())
            - dot(&r, hstar).abs()
    } else {
        0.0
    };

    let w = p.weights;
    let surrogate = w.l2 * witness.primal.s
        + w.linf * witness.primal.xi
        + w.l1 * witness.primal.v.iter().sum::<f64>();
    let eq19 = (p.constraint_value(x)? - p.epsilon).max(0.0) - (surrogate - p.epsilon).max(0.0);

    let eq10 = p.epsilon * constants.upsilon_hat - p.epsilon * witness.dual.w3.abs();

    Ok(StepMargins {
        eq12,
        eq14,
        eq17,
        eq19,
        eq10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::build_p0;
    use crate::l1::assemble_theta;
    use crate::problem::{make_special_case, SpecialCase};

    #[test]
    fn upsilon_identity_cases() {
        let id = Matrix::identity(2);
        let (u11, sk) = compute_upsilon(&id, &id, PNorm::One, PNorm::One).unwrap();
        assert_eq!(u11, 2.0); // \|I\|_{inf->1} = 2 via sign vectors
        assert_eq!(sk, 0);
        let (uii, _) = compute_upsilon(&id, &id, PNorm::Inf, PNorm::Inf).unwrap();
        assert_eq!(uii, 1.0);
        let mut two_id = Matrix::identity(2);
        two_id.set(0, 0, 2.0);
        two_id.set(1, 1, 2.0);
        let (u, _) = compute_upsilon(&two_id, &Matrix::identity(2), PNorm::Inf, PNorm::Inf).unwrap();
        assert!((u - 0.5).abs() < 1e-12);
    }

    #[test]
    fn upsilon_skips_singular_subsets() {
        // first column pair is singular, second pair invertible
        let u = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 1.0]]).unwrap();
        let (_, skipped) = compute_upsilon(&u, &Matrix::identity(2), PNorm::Inf, PNorm::Inf)
            .unwrap();
        assert_eq!(skipped, 1);
    }

    #[test]
    fn vartheta_identity_cases() {
        let id = Matrix::identity(2);
        assert_eq!(compute_vartheta(&id, PNorm::One).unwrap(), 2.0);
        assert_eq!(compute_vartheta(&id, PNorm::Inf).unwrap(), 1.0);
        let mut two_id = Matrix::identity(2);
        two_id.set(0, 0, 2.0);
        two_id.set(1, 1, 2.0);
        assert!((compute_vartheta(&two_id, PNorm::Inf).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn upsilon_prime_identity_and_domination() {
        let id = Matrix::identity(2);
        let (p1, _) = compute_upsilon_prime(&id, &id, PNorm::One).unwrap();
        assert_eq!(p1, 2.0);
        let (pinf, _) = compute_upsilon_prime(&id, &id, PNorm::Inf).unwrap();
        assert_eq!(pinf, 1.0);

        // submultiplicativity: the fused norm never exceeds the product
        let u = Matrix::from_rows(&[vec![1.0, 0.4, -0.2], vec![0.3, 1.1, 0.8]]).unwrap();
        let a = Matrix::from_rows(&[vec![1.0, -0.6, 0.2, 0.5], vec![0.4, 0.9, -0.8, 0.1]])
            .unwrap();
        // (dhat -> d) must stay within the supported induced-norm pairs
        for (d, dhat) in [
            (PNorm::One, PNorm::One),
            (PNorm::Inf, PNorm::Inf),
            (PNorm::One, PNorm::Inf),
            (PNorm::Two, PNorm::Inf),
        ] {
            let (fused, _) = compute_upsilon_prime(&u, &a, d).unwrap();
            let (product, _) = compute_upsilon(&u, &a, d, dhat).unwrap();
            assert!(
                fused <= product + 1e-10,
                "fused {fused} > product {product} at d={d:?} dhat={dhat:?}"
            );
        }
    }

    #[test]
    fn upsilon_hat_follows_weight_patterns() {
        let (u11, uii, v1) = (3.0_f64, 5.0_f64, 7.0_f64);
        let cases = [
            (Weights::new(0.0, 0.0, 1.0), uii),
            (Weights::new(0.0, 1.0, 0.0), u11),
            (Weights::new(1.0, 0.0, 0.0), v1),
            (Weights::new(0.0, 0.5, 0.5), u11.max(uii)),
            (Weights::new(0.5, 0.0, 0.5), uii.max(v1)),
            (Weights::new(0.5, 0.5, 0.0), u11.max(v1)),
            (
                Weights::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
                u11.max(uii).max(v1),
            ),
        ];
        for (w, want) in cases {
            assert_eq!(upsilon_hat(w, u11, uii, v1), want, "weights {w:?}");
        }
    }

    fn half_space(rows: Vec<(Vec<f64>, f64)>, dim: usize) -> Polyhedron {
        let mut m1 = Matrix::empty(dim);
        let mut p = Vec::new();
        for (row, rhs) in rows {
            m1.push_row(&row);
            p.push(rhs);
        }
        Polyhedron::new(m1, p, Matrix::empty(dim), Vec::new())
    }

    #[test]
    fn l1_distance_ratios_on_toy_systems() {
        // {x <= 1} at u = 2: dist 1, residual 1
        let sys = half_space(vec![(vec![1.0], 1.0)], 1);
        let u = [2.0];
        let (_, res) = sys.residual(&u);
        assert!((res - 1.0).abs() < 1e-12);
        assert!((l1_distance_to(&sys, &u).unwrap() - 1.0).abs() < 1e-9);

        // {x <= 1, -x <= 1} at u = 3: dist 2, residual 2
        let sys = half_space(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)], 1);
        let u = [3.0];
        let (_, res) = sys.residual(&u);
        assert!((res - 2.0).abs() < 1e-12);
        assert!((l1_distance_to(&sys, &u).unwrap() - 2.0).abs() < 1e-9);

        // {x1 + x2 <= 0} at u = (1,1): the l1 projection moves one
        // coordinate by 2, residual is 2, ratio 1
        let sys = half_space(vec![(vec![1.0, 1.0], 0.0)], 2);
        let u = [1.0, 1.0];
        let (_, res) = sys.residual(&u);
        assert!((res - 2.0).abs() < 1e-12);
        assert!((l1_distance_to(&sys, &u).unwrap() - 2.0).abs() < 1e-9);
    }

    fn disk_theta() -> (ProblemData, crate::l1::ThetaSystem) {
        let p = make_special_case(
            SpecialCase::D2,
            Matrix::identity(2),
            Matrix::identity(2),
            vec![1.0, 0.0],
            0.5,
        )
        .unwrap();
        let pol = build_p0(2, 8, 0).unwrap();
        let theta = assemble_theta(&p, &pol).unwrap();
        (p, theta)
    }

    #[test]
    fn robinson_estimate_is_monotone_in_samples() {
        let (_, theta) = disk_theta();
        let few = estimate_robinson(&theta.system, 4, 3).unwrap();
        let more = estimate_robinson(&theta.system, 10, 3).unwrap();
        assert!(more >= few, "estimate must grow with the sample set");
        assert!(few >= 0.0);
    }

    #[test]
    fn robinson_estimate_is_exact_on_a_toy_system() {
        // on {x <= 1} every ratio is exactly 1
        let sys = half_space(vec![(vec![1.0], 1.0)], 1);
        let est = estimate_robinson(&sys, 32, 7).unwrap();
        assert!((est - 1.0).abs() < 1e-9, "estimate {est}");
        // infeasible system is reported
        let empty = half_space(vec![(vec![1.0], -1.0), (vec![-1.0], -1.0)], 1);
        assert!(matches!(
            estimate_robinson(&empty, 4, 0),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn bound_breakdown_sums_and_feasible_form() {
        let (p, _) = disk_theta();
        let choice = NormChoice::default();
        let consts = compute_constants(&p, choice).unwrap().with_sigma(1.0);
        // feasible point: x = y exactly fits, every x-term vanishes
        let bb = bound_rhs(&p, &[1.0, 0.0], 2, &consts, 0.0, true).unwrap();
        assert!(bb.term_sigma_k.abs() < 1e-12);
        assert!(bb.term_phi.abs() < 1e-12);
        assert!((bb.total - bb.term_eps_upsilon).abs() < 1e-12);

        // infeasible x pays the penalty terms and the parts add up
        let x = [3.0, -1.0];
        let bb = bound_rhs(&p, &x, 1, &consts, 0.125, false).unwrap();
        let sum = bb.eps_prime
            + bb.term_sigma_k
            + bb.term_eps_upsilon
            + bb.term_bxb_plus
            + bb.term_bxb
            + bb.term_phi
            + bb.term_penalty;
        assert!((sum - bb.total).abs() < 1e-12);
        assert!(bb.term_penalty > 0.0);
        // declaring it feasible must fail
        assert!(bound_rhs(&p, &x, 1, &consts, 0.0, true).is_err());
    }

    #[test]
    fn constants_capture_norm_choice() {
        let (p, _) = disk_theta();
        let c = compute_constants(
            &p,
            NormChoice {
                c: PNorm::One,
                d: PNorm::Inf,
                dhat: PNorm::Inf,
            },
        )
        .unwrap();
        assert_eq!(c.upsilon, c.upsilon_inf_inf);
        assert_eq!(c.vartheta_c, c.vartheta_1);
        // weights (1,0,0) select vartheta(1)
        assert_eq!(c.upsilon_hat, c.vartheta_1);
    }
}
