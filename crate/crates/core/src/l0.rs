//! Brute-force support search for the sparsest feasible vector.
//!
//! Supports are tested in colexicographic order within each cardinality,
//! smallest cardinality first; the first feasible support wins, which makes
//! the result deterministic. Feasibility of a candidate support is an LP
//! over the restricted columns, with the l2 residual handled through the
//! same circumscribing polytope as the l1 solver so both sides of a
//! comparison see an identical feasible set. When the l2 weight is zero the
//! relaxation is inactive and the answer is exact; otherwise the reported
//! cardinality is a lower bound for the unrelaxed problem.

use crate::ball::Polytope;
use crate::error::{Error, Result};
use crate::problem::{ProblemData, Weights};
use crate::simplex::LinearProgram;

/// Hard cap on the ambient dimension for exhaustive search.
pub const L0_DIM_CAP: usize = 16;

#[derive(Clone, Debug)]
pub struct L0Result {
    pub k_min: usize,
    pub support: Vec<usize>,
    pub x0: Vec<f64>,
    /// true when the l2 weight is zero, so no polytope relaxation entered
    /// the feasibility tests
    pub exact_l2: bool,
}

/// Finds the smallest support cardinality (up to `k_cap`) admitting a
/// feasible point, together with a witness vector.
pub fn solve_l0(p: &ProblemData, pol: &Polytope, k_cap: usize) -> Result<L0Result> {
    let n = p.n();
    if n > L0_DIM_CAP {
        return Err(Error::InvalidInput(format!(
            "dimension {n} exceeds the exhaustive cap {L0_DIM_CAP}"
        )));
    }
    if k_cap > n {
        return Err(Error::InvalidInput(format!("k_cap = {k_cap} exceeds n = {n}")));
    }
    if pol.dim() != p.m() {
        return Err(Error::DimensionMismatch(format!(
            "polytope dimension {} but problem has m = {}",
            pol.dim(),
            p.m()
        )));
    }
    for k in 0..=k_cap {
        for support in colex_subsets(n, k) {
            if let Some(xs) = support_feasible(p, pol, &support)? {
                let mut x0 = vec![0.0; n];
                for (pos, &j) in support.iter().enumerate() {
                    x0[j] = xs[pos];
                }
                return Ok(L0Result {
                    k_min: k,
                    support,
                    x0,
                    exact_l2: Weights::is_zero(p.weights.l2),
                });
            }
        }
    }
    Err(Error::NoFeasibleSupport(k_cap))
}

/// Feasibility of a fixed support: an LP over `(x_S, s, xi, v)` with the
/// budget row, the polytope facet rows, the residual envelopes, and the
/// side constraints restricted to the support columns.
fn support_feasible(p: &ProblemData, pol: &Polytope, support: &[usize]) -> Result<Option<Vec<f64>>> {
    let k = support.len();
    let h = p.h();
    let nf = pol.facet_count();
    let w = p.weights;

    // variables: x_S (free) then s, xi (nonneg) then v (nonneg)
    let nv = k + 2 + h;
    let mut nonneg = vec![true; nv];
    for flag in nonneg.iter_mut().take(k) {
        *flag = false;
    }
    let mut lp = LinearProgram::new(vec![0.0; nv], nonneg);
    let (is, ixi, iv) = (k, k + 1, k + 2);

    {
        let mut row = vec![0.0; nv];
        row[is] = w.l2;
        row[ixi] = w.linf;
        for r in 0..h {
            row[iv + r] = w.l1;
        }
        lp.add_ineq(&row, p.epsilon);
    }

    let a_s = p.a.select_cols(support);
    let ma = pol.direction_matrix().transpose().matmul(&a_s); // N x k
    let ua = p.u.transpose().matmul(&a_s); // h x k
    let my = pol.direction_matrix().transpose_matvec(&p.y);
    let uy = p.u.transpose_matvec(&p.y);

    for f in 0..nf {
        let mut row = vec![0.0; nv];
        for j in 0..k {
            row[j] = -ma.get(f, j);
        }
        row[is] = -1.0;
        lp.add_ineq(&row, -my[f]);
    }
    for r in 0..h {
        let mut row = vec![0.0; nv];
        for j in 0..k {
            row[j] = -ua.get(r, j);
        }
        row[ixi] = -1.0;
        lp.add_ineq(&row, -uy[r]);
        let mut row = vec![0.0; nv];
        for j in 0..k {
            row[j] = ua.get(r, j);
        }
        row[ixi] = -1.0;
        lp.add_ineq(&row, uy[r]);
    }
    for r in 0..h {
        let mut row = vec![0.0; nv];
        for j in 0..k {
            row[j] = -ua.get(r, j);
        }
        row[iv + r] = -1.0;
        lp.add_ineq(&row, -uy[r]);
        let mut row = vec![0.0; nv];
        for j in 0..k {
            row[j] = ua.get(r, j);
        }
        row[iv + r] = -1.0;
        lp.add_ineq(&row, uy[r]);
    }
    for i in 0..p.l() {
        let mut row = vec![0.0; nv];
        for (j, &col) in support.iter().enumerate() {
            row[j] = p.b_mat.get(i, col);
        }
        lp.add_ineq(&row, p.b_rhs[i]);
    }

    Ok(lp.feasible_point()?.map(|z| z[..k].to_vec()))
}

/// All k-subsets of `0..n` in colexicographic order: ordered by largest
/// element, then recursively by the rest.
pub fn colex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    for max in (k - 1)..n {
        for mut rest in colex_subsets(max, k - 1) {
            rest.push(max);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::build_p0;
    use crate::linalg::Matrix;
    use crate::problem::{make_special_case, SpecialCase};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn colex_order_is_correct() {
        assert_eq!(
            colex_subsets(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 3],
                vec![1, 3],
                vec![2, 3],
            ]
        );
        assert_eq!(colex_subsets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn single_equation_needs_one_nonzero() {
        // y = 2 against the row [1 1] with exact fit
        let p = make_special_case(
            SpecialCase::D1,
            Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            vec![2.0],
            0.0,
        )
        .unwrap();
        let pol = build_p0(1, 0, 0).unwrap();
        let res = solve_l0(&p, &pol, 2).unwrap();
        assert_eq!(res.k_min, 1);
        assert_eq!(res.support, vec![0]); // colex order prefers index 0
        assert!((res.x0[0] - 2.0).abs() < 1e-9);
        assert!(!res.exact_l2);
    }

    #[test]
    fn zero_observation_needs_nothing() {
        let mut p = make_special_case(
            SpecialCase::D2,
            Matrix::identity(2),
            Matrix::identity(2),
            vec![0.0, 0.0],
            0.1,
        )
        .unwrap();
        p.y = vec![0.0, 0.0];
        let pol = build_p0(2, 4, 0).unwrap();
        let res = solve_l0(&p, &pol, 2).unwrap();
        assert_eq!(res.k_min, 0);
        assert!(res.support.is_empty());
    }

    #[test]
    fn reports_when_cap_is_too_small() {
        let p = make_special_case(
            SpecialCase::D1,
            Matrix::identity(2),
            Matrix::identity(2),
            vec![1.0, 1.0],
            0.0,
        )
        .unwrap();
        let pol = build_p0(2, 0, 0).unwrap();
        assert!(matches!(
            solve_l0(&p, &pol, 1),
            Err(Error::NoFeasibleSupport(1))
        ));
        let res = solve_l0(&p, &pol, 2).unwrap();
        assert_eq!(res.k_min, 2);
    }

    /// Independent route: enumerate all bitmasks and decide feasibility by
    /// minimizing the weighted residual instead of a phase-1 test.
    fn naive_k_min(p: &ProblemData, pol: &Polytope) -> Option<usize> {
        let n = p.n();
        let mut best: Option<usize> = None;
        for mask in 0u32..(1u32 << n) {
            let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let k = support.len();
            if best.is_some_and(|b| k >= b) {
                continue;
            }
            if min_residual_feasible(p, pol, &support) {
                best = Some(k);
            }
        }
        best
    }

    /// Minimizes `a1 s + a2 xi + a3 e^T v` subject to the envelopes and the
    /// side constraints; the support is feasible iff the optimum stays
    /// within the budget.
    fn min_residual_feasible(p: &ProblemData, pol: &Polytope, support: &[usize]) -> bool {
        let k = support.len();
        let h = p.h();
        let w = p.weights;
        let nv = k + 2 + h;
        let mut nonneg = vec![true; nv];
        for flag in nonneg.iter_mut().take(k) {
            *flag = false;
        }
        let mut objective = vec![0.0; nv];
        objective[k] = w.l2;
        objective[k + 1] = w.linf;
        for r in 0..h {
            objective[k + 2 + r] = w.l1;
        }
        let mut lp = LinearProgram::new(objective, nonneg);
        let a_s = p.a.select_cols(support);
        let ma = pol.direction_matrix().transpose().matmul(&a_s);
        let ua = p.u.transpose().matmul(&a_s);
        let my = pol.direction_matrix().transpose_matvec(&p.y);
        let uy = p.u.transpose_matvec(&p.y);
        for f in 0..pol.facet_count() {
            let mut row = vec![0.0; nv];
            for j in 0..k {
                row[j] = -ma.get(f, j);
            }
            row[k] = -1.0;
            lp.add_ineq(&row, -my[f]);
        }
        for r in 0..h {
            for sign in [-1.0, 1.0] {
                let mut row = vec![0.0; nv];
                for j in 0..k {
                    row[j] = sign * ua.get(r, j);
                }
                row[k + 1] = -1.0;
                lp.add_ineq(&row, sign * uy[r]);
                let mut row = vec![0.0; nv];
                for j in 0..k {
                    row[j] = sign * ua.get(r, j);
                }
                row[k + 2 + r] = -1.0;
                lp.add_ineq(&row, sign * uy[r]);
            }
        }
        for i in 0..p.l() {
            let mut row = vec![0.0; nv];
            for (j, &col) in support.iter().enumerate() {
                row[j] = p.b_mat.get(i, col);
            }
            lp.add_ineq(&row, p.b_rhs[i]);
        }
        let sol = lp.solve();
        sol.status == crate::simplex::LpStatus::Optimal && sol.value <= p.epsilon + 1e-9
    }

    #[test]
    fn matches_naive_enumerator_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(99);
        for trial in 0..10 {
            let (m, n, h) = (3, 6, 3);
            let a = Matrix::from_rows(
                &(0..m)
                    .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect::<Vec<Vec<f64>>>(),
            )
            .unwrap();
            let u = Matrix::from_rows(
                &(0..m)
                    .map(|_| (0..h).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect::<Vec<Vec<f64>>>(),
            )
            .unwrap();
            // a1 = 0 splits the weight between the linf and l1 terms
            let p = ProblemData {
                a,
                b_mat: Matrix::empty(n),
                u,
                y: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
                b_rhs: vec![],
                epsilon: rng.random_range(0.05..0.5),
                weights: crate::problem::Weights::new(0.0, 0.4, 0.6),
            };
            if !p.validate().is_valid() {
                continue;
            }
            let pol = build_p0(m, 6, trial).unwrap();
            let ours = solve_l0(&p, &pol, n).map(|r| r.k_min).ok();
            let naive = naive_k_min(&p, &pol);
            assert_eq!(ours, naive, "trial {trial}");
        }
    }

    #[test]
    fn relaxation_plays_no_role_without_l2_weight() {
        let p = make_special_case(
            SpecialCase::D3,
            Matrix::from_rows(&[vec![1.0, 0.5, -0.3], vec![0.2, 1.0, 0.8]]).unwrap(),
            Matrix::identity(2),
            vec![1.0, -0.5],
            0.25,
        )
        .unwrap();
        let coarse = build_p0(2, 0, 0).unwrap();
        let fine = build_p0(2, 32, 0).unwrap();
        let r1 = solve_l0(&p, &coarse, 3).unwrap();
        let r2 = solve_l0(&p, &fine, 3).unwrap();
        assert_eq!(r1.k_min, r2.k_min);
        assert!(r1.exact_l2 && r2.exact_l2);
    }

    #[test]
    fn k_min_nonincreasing_in_epsilon() {
        let base = make_special_case(
            SpecialCase::D2,
            Matrix::from_rows(&[vec![1.0, 0.4, -0.2], vec![0.3, 1.0, 0.5]]).unwrap(),
            Matrix::identity(2),
            vec![0.8, 0.6],
            0.0,
        )
        .unwrap();
        let pol = build_p0(2, 16, 0).unwrap();
        let mut prev = usize::MAX;
        for eps in [0.01, 0.2, 0.5, 1.5] {
            let mut p = base.clone();
            p.epsilon = eps;
            let k = solve_l0(&p, &pol, 3).unwrap().k_min;
            assert!(k <= prev);
            prev = k;
        }
    }

    #[test]
    fn rejects_oversized_inputs() {
        let p = make_special_case(
            SpecialCase::D2,
            Matrix::identity(2),
            Matrix::identity(2),
            vec![1.0, 0.0],
            0.5,
        )
        .unwrap();
        let pol = build_p0(2, 4, 0).unwrap();
        assert!(solve_l0(&p, &pol, 3).is_err()); // k_cap > n
    }
}
