use sparsestab::experiment::{generate_instance, ExperimentConfig};
use sparsestab::ball::build_p0;
use sparsestab::l1::assemble_theta;
use sparsestab::simplex::LinearProgram;
use rand::{Rng, SeedableRng};

fn main() {
    let cfg9 = ExperimentConfig {
        trials: 8, n: 8, m: 6, l: 0, h: 6, k: 1,
        epsilon: 0.0, weights: [1.0, 0.0, 0.0],
        facets: 16, seed: 909,
        norms: ["1".into(), "1".into(), "1".into()],
    };
    let pol = build_p0(6, 16, 909).unwrap();
    let inst = generate_instance(&cfg9, 0).unwrap();
    let theta = assemble_theta(&inst.problem, &pol).unwrap();
    let base = theta.feasible_point().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(909);
    let scale = 2.0 * (1.0 + base.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    let mut u = vec![];
    for s in 0..3 {
        u = base.iter().map(|&v| v + rng.random_range(-scale..scale)).collect();
        if s == 2 { break; }
    }
    // rebuild the distance LP by hand to print the status
    let sys = &theta.system;
    let dim = sys.m1.cols();
    let mut objective = vec![0.0; 2 * dim];
    let mut nonneg = vec![false; 2 * dim];
    for j in 0..dim { objective[dim + j] = 1.0; nonneg[dim + j] = true; }
    let mut lp = LinearProgram::new(objective, nonneg);
    for i in 0..sys.m1.rows() {
        let mut row = vec![0.0; 2 * dim];
        row[..dim].copy_from_slice(sys.m1.row(i));
        lp.add_ineq(&row, sys.p[i]);
    }
    for i in 0..sys.m2.rows() {
        let mut row = vec![0.0; 2 * dim];
        row[..dim].copy_from_slice(sys.m2.row(i));
        lp.add_eq(&row, sys.q[i]);
    }
    for j in 0..dim {
        let mut row = vec![0.0; 2 * dim];
        row[j] = 1.0; row[dim + j] = -1.0;
        lp.add_ineq(&row, u[j]);
        let mut row = vec![0.0; 2 * dim];
        row[j] = -1.0; row[dim + j] = -1.0;
        lp.add_ineq(&row, -u[j]);
    }
    let sol = lp.solve();
    println!("status {:?} value {}", sol.status, sol.value);
}
