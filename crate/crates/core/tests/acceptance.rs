//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sparsestab::ball::{build_p0, Polytope};
use sparsestab::experiment::{generate_instance, run_trial, ExperimentConfig};
use sparsestab::l0::solve_l0;
use sparsestab::l1::{assemble_theta, solve_l1};
use sparsestab::linalg::{dot, l1_norm, l2_norm, Matrix};
use sparsestab::problem::{make_special_case, ProblemData, SpecialCase, Weights};
use sparsestab::rsp::{certify_restricted, certify_weak, witness_residual, SignPattern};
use sparsestab::simplex::{LinearProgram, LpStatus};
use sparsestab::stability::{
    bound_rhs, compute_constants, estimate_robinson, upsilon_hat, upsilon_hat_prime, NormChoice,
};

fn pass(criterion: usize, name: &str) {
    println!("ACCEPTANCE {criterion} {name}: PASS");
}

// ---------------------------------------------------------------------------
// 1. LP engine soundness

fn random_bounded_lp(rng: &mut StdRng, n: usize, rows: usize) -> LinearProgram {
    // positive costs keep the program bounded below over the nonnegative
    // orthant; a planted point keeps it feasible
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    let z0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let mut lp = LinearProgram::with_nonneg_vars(c);
    for _ in 0..rows {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rhs = dot(&row, &z0) + rng.random_range(0.0..2.0);
        lp.add_ineq(&row, rhs);
    }
    lp
}

/// Exhaustive vertex enumeration over `{Gz <= p, z >= 0}`: all n-subsets of
/// the stacked rows, solved and filtered for feasibility.
fn enumerate_vertices(lp: &LinearProgram) -> Vec<Vec<f64>> {
    let (g, p) = lp.ineq();
    let n = lp.n_vars();
    let total = g.rows() + n;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(total);
    for i in 0..g.rows() {
        rows.push((g.row(i).to_vec(), p[i]));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut subset = vec![0usize; n];
    subsets(total, n, &mut subset, 0, 0, &mut |idx| {
        let mut a = Matrix::zeros(n, n);
        let mut b = vec![0.0; n];
        for (r, &i) in idx.iter().enumerate() {
            for jj in 0..n {
                a.set(r, jj, rows[i].0[jj]);
            }
            b[r] = rows[i].1;
        }
        if a.determinant().abs() < 1e-10 {
            return;
        }
        let Ok(inv) = a.inverse() else { return };
        let z = inv.matvec(&b);
        let feas = rows
            .iter()
            .all(|(row, rhs)| dot(row, &z) <= rhs + 1e-8);
        if feas && !vertices.iter().any(|v| {
            v.iter().zip(&z).all(|(a, b)| (a - b).abs() < 1e-7)
        }) {
            vertices.push(z);
        }
    });
    vertices
}

fn subsets(
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
        subsets(n, k, buf, depth + 1, j + 1, visit);
    }
}

#[test]
fn criterion_1_lp_engine_soundness() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut vertex_checked = 0usize;
    for trial in 0..200 {
        // half the instances stay small enough for vertex enumeration
        let n = if trial % 2 == 0 {
            rng.random_range(2..=4)
        } else {
            rng.random_range(5..=12)
        };
        let rows = rng.random_range(1..=12.min(3 * n));
        let lp = random_bounded_lp(&mut rng, n, rows);
        let sol = lp.solve();
        assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");

        // duality gap
        let (g, p) = lp.ineq();
        let dual_value = -dot(&sol.dual_ineq, p);
        assert!(
            (dual_value - sol.value).abs() <= 1e-8 * (1.0 + sol.value.abs()),
            "trial {trial}: gap {} vs {}",
            dual_value,
            sol.value
        );
        // complementary slackness
        for i in 0..lp.n_ineq() {
            let slack = p[i] - dot(g.row(i), &sol.x);
            assert!(
                sol.dual_ineq[i] * slack <= 1e-8 * (1.0 + sol.value.abs()),
                "trial {trial}: row {i}"
            );
        }
        // agreement with exhaustive vertex enumeration
        if n <= 4 {
            let vertices = enumerate_vertices(&lp);
            if !vertices.is_empty() && vertices.len() <= 10 {
                let best = vertices
                    .iter()
                    .map(|v| dot(lp.objective(), v))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    (best - sol.value).abs() <= 1e-8 * (1.0 + best.abs()),
                    "trial {trial}: vertex min {best} vs simplex {}",
                    sol.value
                );
                vertex_checked += 1;
            }
        }
    }
    assert!(vertex_checked >= 30, "only {vertex_checked} vertex checks ran");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(1, "lp engine soundness");
}

// ---------------------------------------------------------------------------
// 2. optimality system membership and feasibility solve

fn random_tiny_instance(rng: &mut StdRng) -> ProblemData {
    loop {
        let n = rng.random_range(3..=6);
        let m = rng.random_range(2..=4.min(n));
        let h = m;
        let a = gaussian(rng, m, n);
        let u = gaussian(rng, m, h);
        let w2 = rng.random_range(0.0..1.0);
        let winf = rng.random_range(0.0..(1.0 - w2));
        let p = ProblemData {
            a,
            b_mat: Matrix::empty(n),
            u,
            y: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
            b_rhs: vec![],
            epsilon: rng.random_range(0.05..0.5),
            weights: Weights::new(w2, winf, 1.0 - w2 - winf),
        };
        if p.validate().is_valid() {
            return p;
        }
    }
}

fn gaussian(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows(
        &(0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect::<Vec<Vec<f64>>>(),
    )
    .unwrap()
}

#[test]
fn criterion_2_theta_membership_iff_optimal() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(202);
    for trial in 0..50 {
        let p = random_tiny_instance(&mut rng);
        let pol = build_p0(p.m(), 16, 0).unwrap();
        let sol = solve_l1(&p, &pol).unwrap();
        let theta = assemble_theta(&p, &pol).unwrap();
        // the solver optimum lies in the optimality system
        let u = theta.embed(&sol.primal, &sol.dual);
        let (_, res) = theta.residual(&u);
        assert!(res <= 1e-7, "trial {trial}: theta residual {res}");
        // a bare feasibility solve of the system attains the same value
        let point = theta.feasible_point().unwrap();
        let (primal, _) = theta.extract(&point);
        assert!(
            (l1_norm(&primal.x) - sol.value).abs() <= 1e-7,
            "trial {trial}: {} vs {}",
            l1_norm(&primal.x),
            sol.value
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    pass(2, "theta membership iff optimality");
}

// ---------------------------------------------------------------------------
// 3. range-space certifier

#[test]
fn criterion_3_rsp_certifier_correctness() {
    let ones = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    let cert = certify_weak(&ones, 1).unwrap();
    assert!(cert.holds);
    for (pat, wit) in &cert.witnesses {
        assert!(witness_residual(&ones, &Matrix::empty(2), pat, wit) <= 1e-8);
    }

    let cert = certify_weak(&ones, 2).unwrap();
    assert!(!cert.holds);
    assert_eq!(cert.failing, Some(SignPattern::new(vec![0], vec![1])));

    let neg_id = Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    let cert = certify_restricted(&ones, &neg_id, 2).unwrap();
    assert!(cert.holds);
    for (pat, wit) in &cert.witnesses {
        assert!(witness_residual(&ones, &neg_id, pat, wit) <= 1e-8);
    }

    for n in 1..=4usize {
        let id = Matrix::identity(n);
        for k in 0..=n {
            assert!(certify_weak(&id, k).unwrap().holds, "identity n={n} k={k}");
        }
    }

    // monotonicity: holds at k implies holds at k - 1
    let mut rng = StdRng::seed_from_u64(303);
    for trial in 0..20 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(4..=7);
        let a = gaussian(&mut rng, m, n);
        for k in [3usize, 2] {
            if k > n {
                continue;
            }
            let hk = certify_weak(&a, k).unwrap().holds;
            let hk1 = certify_weak(&a, k - 1).unwrap().holds;
            assert!(!hk || hk1, "trial {trial}: order {k} holds, {} fails", k - 1);
        }
    }
    pass(3, "rsp certifier correctness");
}

// ---------------------------------------------------------------------------
// 4. exact recovery in the noiseless equality case

#[test]
fn criterion_4_exact_recovery() {
    let start = Instant::now();
    let mut certified = 0usize;
    for (k, seed) in [(1usize, 404u64), (2, 405)] {
        let cfg = ExperimentConfig {
            trials: 10,
            n: 8,
            m: 6,
            l: 0,
            h: 6,
            k,
            epsilon: 0.0,
            weights: [1.0, 0.0, 0.0],
            facets: 16,
            seed,
            norms: ["1".into(), "1".into(), "1".into()],
        };
        let pol = build_p0(cfg.m, cfg.facets, cfg.seed).unwrap();
        for trial in 0..cfg.trials {
            let (rec, _) = run_trial(&cfg, &pol, trial).unwrap();
            if rec.rsp_holds {
                certified += 1;
                assert!(
                    rec.err_l2 <= 1e-6,
                    "k={k} trial {trial}: recovery error {}",
                    rec.err_l2
                );
            }
        }
    }
    // the order-2 property rarely certifies at 6x8; order 1 nearly always
    // does, so the conditional claim is exercised on a solid majority
    assert!(certified >= 8, "only {certified} of 20 trials certified");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(4, "exact recovery at zero budget");
}

// ---------------------------------------------------------------------------
// 5. inequality margins of the witness construction

#[test]
fn criterion_5_witness_margin_suite() {
    let configs = [
        ExperimentConfig {
            trials: 10,
            n: 6,
            m: 4,
            l: 0,
            h: 4,
            k: 1,
            epsilon: 0.3,
            weights: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            facets: 12,
            seed: 505,
            norms: ["1".into(), "1".into(), "1".into()],
        },
        ExperimentConfig {
            trials: 10,
            n: 7,
            m: 4,
            l: 2,
            h: 5,
            k: 1,
            epsilon: 0.25,
            weights: [0.5, 0.2, 0.3],
            facets: 12,
            seed: 506,
            norms: ["1".into(), "1".into(), "1".into()],
        },
    ];
    let mut checked = 0usize;
    for cfg in &configs {
        let pol = build_p0(cfg.m, cfg.facets, cfg.seed).unwrap();
        for trial in 0..cfg.trials {
            let (rec, diag) = run_trial(cfg, &pol, trial).unwrap();
            assert!(rec.rsp_holds, "seed {} trial {trial} must certify", cfg.seed);
            let margins = diag.margins.expect("certified trial carries margins");
            for (name, v) in [
                ("eq12", margins.eq12),
                ("eq14", margins.eq14),
                ("eq17", margins.eq17),
                ("eq19", margins.eq19),
                ("eq10", margins.eq10),
            ] {
                assert!(v >= -1e-8, "trial {trial}: margin {name} = {v}");
            }
            let res = diag.witness_residual.expect("witness residual recorded");
            assert!(res <= 1e-8, "trial {trial}: witness residual {res}");
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
    pass(5, "witness margin suite");
}

// ---------------------------------------------------------------------------
// 6. polytope refinement monotonicity and convergence

#[test]
fn criterion_6_polytope_refinement() {
    let p = make_special_case(
        SpecialCase::D2,
        Matrix::identity(2),
        Matrix::identity(2),
        vec![1.0, 0.0],
        0.5,
    )
    .unwrap();
    let mut prev = f64::NEG_INFINITY;
    let mut last = 0.0;
    for budget in [8usize, 16, 32, 64, 128] {
        let pol = build_p0(2, budget, 0).unwrap();
        let value = solve_l1(&p, &pol).unwrap().value;
        assert!(
            value >= prev - 1e-9,
            "budget {budget}: value {value} dropped below {prev}"
        );
        prev = value;
        last = value;
    }
    assert!(last >= 0.499, "refined value {last} below 0.499");
    assert!(last <= 0.5 + 1e-9, "refined value {last} above the true optimum");
    pass(6, "polytope refinement monotone and convergent");
}

// ---------------------------------------------------------------------------
// 7. selection tables for the budget constant

#[test]
fn criterion_7_selection_tables() {
    let (u11, uii, v1) = (3.0_f64, 5.0_f64, 7.0_f64);
    let cases = [
        ([0.0, 0.0, 1.0], uii),
        ([0.0, 1.0, 0.0], u11),
        ([1.0, 0.0, 0.0], v1),
        ([0.0, 0.5, 0.5], u11.max(uii)),
        ([0.5, 0.0, 0.5], uii.max(v1)),
        ([0.5, 0.5, 0.0], u11.max(v1)),
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], u11.max(uii).max(v1)),
    ];
    for (w, want) in cases {
        let weights = Weights::new(w[0], w[1], w[2]);
        assert_eq!(upsilon_hat(weights, u11, uii, v1), want, "weights {w:?}");
        // the fused table has the same shape with the primed constants
        assert_eq!(
            upsilon_hat_prime(weights, u11, uii, v1),
            want,
            "fused table, weights {w:?}"
        );
    }
    pass(7, "selection tables");
}

// ---------------------------------------------------------------------------
// 8. sparsest-support oracle vs naive enumerator

/// Independent route: all bitmask supports, feasibility decided by
/// minimizing the weighted residual instead of a phase-1 test.
fn naive_k_min(p: &ProblemData, pol: &Polytope) -> Option<usize> {
    let n = p.n();
    let mut best: Option<usize> = None;
    for mask in 0u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        if best.is_some_and(|b| support.len() >= b) {
            continue;
        }
        if naive_support_feasible(p, pol, &support) {
            best = Some(support.len());
        }
    }
    best
}

fn naive_support_feasible(p: &ProblemData, pol: &Polytope, support: &[usize]) -> bool {
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
    sol.status == LpStatus::Optimal && sol.value <= p.epsilon + 1e-9
}

#[test]
fn criterion_8_l0_oracle_vs_naive() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(808);
    let mut done = 0usize;
    while done < 10 {
        let (m, n, h) = (3, 6, 3);
        let p = ProblemData {
            a: gaussian(&mut rng, m, n),
            b_mat: Matrix::empty(n),
            u: gaussian(&mut rng, m, h),
            y: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
            b_rhs: vec![],
            epsilon: rng.random_range(0.05..0.6),
            weights: Weights::new(0.0, 0.5, 0.5),
        };
        if !p.validate().is_valid() {
            continue;
        }
        let pol = build_p0(m, 4, done as u64).unwrap();
        let ours = solve_l0(&p, &pol, n).map(|r| r.k_min).ok();
        let naive = naive_k_min(&p, &pol);
        assert_eq!(ours, naive, "instance {done}");
        done += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    pass(8, "l0 oracle agrees with the naive enumerator");
}

// ---------------------------------------------------------------------------
// 9. l0-to-l1 error bound in the exact-recovery regime

#[test]
fn criterion_9_l0_l1_bound_sanity() {
    let cfg = ExperimentConfig {
        trials: 8,
        n: 8,
        m: 6,
        l: 0,
        h: 6,
        k: 1,
        epsilon: 0.0,
        weights: [1.0, 0.0, 0.0],
        facets: 16,
        seed: 909,
        norms: ["1".into(), "1".into(), "1".into()],
    };
    let pol = build_p0(cfg.m, cfg.facets, cfg.seed).unwrap();
    let mut checked = 0usize;
    for trial in 0..cfg.trials {
        let inst = generate_instance(&cfg, trial).unwrap();
        let p = &inst.problem;
        let cert = certify_weak(&p.a, cfg.k).unwrap();
        if !cert.holds {
            continue;
        }
        // the sparsest solution; with a zero budget it coincides with the
        // planted vector up to solver precision
        let l0 = solve_l0(p, &pol, cfg.k).unwrap();
        assert!(l0.k_min <= cfg.k);
        let sol = solve_l1(p, &pol).unwrap();

        let theta = assemble_theta(p, &pol).unwrap();
        let sigma = estimate_robinson(&theta.system, 8, cfg.seed + trial as u64).unwrap();
        let consts = compute_constants(p, NormChoice::default())
            .unwrap()
            .with_sigma(sigma);
        // with a zero budget the two solution sets coincide, so the
        // set-approximation allowance is exactly zero
        let eps_prime = 0.0;
        let bb = bound_rhs(p, &l0.x0, cfg.k, &consts, eps_prime, true).unwrap();
        assert!(
            (bb.total - eps_prime).abs() <= 1e-8,
            "trial {trial}: bound total {} exceeds the allowance",
            bb.total
        );
        let diff: Vec<f64> = l0.x0.iter().zip(&sol.primal.x).map(|(a, b)| a - b).collect();
        assert!(
            l2_norm(&diff) <= 1e-6,
            "trial {trial}: l0/l1 gap {}",
            l2_norm(&diff)
        );
        checked += 1;
    }
    assert!(checked >= 6, "only {checked} certified trials");
    pass(9, "l0-to-l1 bound in the exact regime");
}
