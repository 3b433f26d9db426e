//! The l1 program, its linear-programming form, and its optimality system.
//!
//! With the unit ball replaced by a circumscribing [`Polytope`], the model
//! becomes a plain LP over the variables `(x, t, s, xi, v)`:
//!
//! ```text
//!     min  e^T t
//!     s.t. x + t >= 0,          -x + t >= 0,
//!          -a1*s - a2*xi - a3*e^T v >= -eps,
//!          M^T A x + e*s >= M^T y,
//!          +-U^T A x + xi*e >= +-U^T y,
//!          +-U^T A x + v   >= +-U^T y,
//!          -B x >= -b,           (t, s, xi, v) >= 0.
//! ```
//!
//! The dual multipliers of the nine row blocks are named `w1..w9` in that
//! order. A point `x` is optimal iff `(x, t, s, xi, v, w)` lies in the
//! polyhedron assembled by [`assemble_theta`]: primal feasibility, dual
//! feasibility, and a zero duality gap, all as one linear system.

use crate::ball::Polytope;
use crate::error::{Error, Result};
use crate::linalg::{dot, l1_norm, linf_norm, Matrix};
use crate::problem::{ProblemData, Weights};
use crate::simplex::{LinearProgram, LpStatus};

/// Primal variables of the reformulated program.
#[derive(Clone, Debug)]
pub struct PrimalPoint {
    pub x: Vec<f64>,
    /// envelope of |x|; equals |x| entrywise at any optimum
    pub t: Vec<f64>,
    /// l2 residual surrogate (polytope gauge value)
    pub s: f64,
    /// linf residual bound
    pub xi: f64,
    /// entrywise residual envelope
    pub v: Vec<f64>,
}

/// Dual multipliers, one block per primal row block.
#[derive(Clone, Debug)]
pub struct DualPoint {
    /// multipliers of `x + t >= 0`
    pub w1: Vec<f64>,
    /// multipliers of `-x + t >= 0`
    pub w2: Vec<f64>,
    /// multiplier of the residual budget row
    pub w3: f64,
    /// multipliers of the polytope facet rows
    pub w4: Vec<f64>,
    /// multipliers of `U^T A x + xi e >= U^T y`
    pub w5: Vec<f64>,
    /// multipliers of `-U^T A x + xi e >= -U^T y`
    pub w6: Vec<f64>,
    /// multipliers of `U^T A x + v >= U^T y`
    pub w7: Vec<f64>,
    /// multipliers of `-U^T A x + v >= -U^T y`
    pub w8: Vec<f64>,
    /// multipliers of `-B x >= -b`
    pub w9: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct L1Solution {
    pub primal: PrimalPoint,
    pub dual: DualPoint,
    /// optimal value `e^T t = \|x\|_1`
    pub value: f64,
}

/// Index bookkeeping shared by the LP and the optimality system.
#[derive(Copy, Clone, Debug)]
pub struct BlockDims {
    pub n: usize,
    pub h: usize,
    pub l: usize,
    pub facets: usize,
}

impl BlockDims {
    pub fn of(p: &ProblemData, pol: &Polytope) -> BlockDims {
        BlockDims {
            n: p.n(),
            h: p.h(),
            l: p.l(),
            facets: pol.facet_count(),
        }
    }

    /// number of primal LP variables `(x, t, s, xi, v)`
    pub fn primal_vars(&self) -> usize {
        2 * self.n + 2 + self.h
    }

    /// number of primal LP rows
    pub fn primal_rows(&self) -> usize {
        2 * self.n + 1 + self.facets + 4 * self.h + self.l
    }

    /// number of dual variables `w = (w1..w9)`
    pub fn dual_vars(&self) -> usize {
        self.primal_rows()
    }

    /// dimension of the stacked optimality variable `u`
    pub fn theta_dim(&self) -> usize {
        self.primal_vars() + self.dual_vars()
    }
}

fn check_shapes(p: &ProblemData, pol: &Polytope) -> Result<()> {
    if pol.dim() != p.m() {
        return Err(Error::DimensionMismatch(format!(
            "polytope dimension {} but problem has m = {}",
            pol.dim(),
            p.m()
        )));
    }
    Ok(())
}

/// Assembles the LP over `(x, t, s, xi, v)` with all rows stored as `<=`.
/// Row order is the nine blocks in `w1..w9` order, so dual multipliers map
/// back positionally.
pub fn assemble_lp(p: &ProblemData, pol: &Polytope) -> Result<LinearProgram> {
    check_shapes(p, pol)?;
    let d = BlockDims::of(p, pol);
    let (n, h, l, nf) = (d.n, d.h, d.l, d.facets);
    let nv = d.primal_vars();
    let (ix, it, is, ixi, iv) = (0, n, 2 * n, 2 * n + 1, 2 * n + 2);

    let mut objective = vec![0.0; nv];
    let mut nonneg = vec![true; nv];
    for j in 0..n {
        objective[it + j] = 1.0;
        nonneg[ix + j] = false;
    }
    let mut lp = LinearProgram::new(objective, nonneg);

    let ma = pol.direction_matrix().transpose().matmul(&p.a); // N x n
    let ua = p.u.transpose().matmul(&p.a); // h x n
    let my = pol.direction_matrix().transpose_matvec(&p.y); // N
    let uy = p.u.transpose_matvec(&p.y); // h
    let w = p.weights;

    // -x - t <= 0 and x - t <= 0
    for j in 0..n {
        let mut row = vec![0.0; nv];
        row[ix + j] = -1.0;
        row[it + j] = -1.0;
        lp.add_ineq(&row, 0.0);
    }
    for j in 0..n {
        let mut row = vec![0.0; nv];
        row[ix + j] = 1.0;
        row[it + j] = -1.0;
        lp.add_ineq(&row, 0.0);
    }
    // residual budget
    {
        let mut row = vec![0.0; nv];
        row[is] = w.l2;
        row[ixi] = w.linf;
        for r in 0..h {
            row[iv + r] = w.l1;
        }
        lp.add_ineq(&row, p.epsilon);
    }
    // facet rows: -(M^T A) x - s <= -(M^T y)
    for f in 0..nf {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[ix + j] = -ma.get(f, j);
        }
        row[is] = -1.0;
        lp.add_ineq(&row, -my[f]);
    }
    // linf rows: -(U^T A) x - xi <= -(U^T y), then (U^T A) x - xi <= (U^T y)
    for r in 0..h {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[ix + j] = -ua.get(r, j);
        }
        row[ixi] = -1.0;
        lp.add_ineq(&row, -uy[r]);
    }
    for r in 0..h {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[ix + j] = ua.get(r, j);
        }
        row[ixi] = -1.0;
        lp.add_ineq(&row, uy[r]);
    }
    // entrywise envelope rows, same signs against v
    for r in 0..h {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[ix + j] = -ua.get(r, j);
        }
        row[iv + r] = -1.0;
        lp.add_ineq(&row, -uy[r]);
    }
    for r in 0..h {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[ix + j] = ua.get(r, j);
        }
        row[iv + r] = -1.0;
        lp.add_ineq(&row, uy[r]);
    }
    // side constraints
    for i in 0..l {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[ix + j] = p.b_mat.get(i, j);
        }
        lp.add_ineq(&row, p.b_rhs[i]);
    }
    debug_assert_eq!(lp.n_ineq(), d.primal_rows());
    Ok(lp)
}

fn split_primal(d: &BlockDims, z: &[f64]) -> PrimalPoint {
    let n = d.n;
    PrimalPoint {
        x: z[0..n].to_vec(),
        t: z[n..2 * n].to_vec(),
        s: z[2 * n],
        xi: z[2 * n + 1],
        v: z[2 * n + 2..2 * n + 2 + d.h].to_vec(),
    }
}

fn split_dual(d: &BlockDims, lambda: &[f64]) -> DualPoint {
    let (n, h, nf) = (d.n, d.h, d.facets);
    let mut ofs = 0usize;
    let mut take = |len: usize| {
        let s = lambda[ofs..ofs + len].to_vec();
        ofs += len;
        s
    };
    let w1 = take(n);
    let w2 = take(n);
    let w3 = take(1)[0];
    let w4 = take(nf);
    let w5 = take(h);
    let w6 = take(h);
    let w7 = take(h);
    let w8 = take(h);
    let w9 = take(d.l);
    DualPoint {
        w1,
        w2,
        w3,
        w4,
        w5,
        w6,
        w7,
        w8,
        w9,
    }
}

/// Solves the polytope-relaxed l1 program, returning the primal optimum,
/// the dual multipliers split per block, and the optimal value.
pub fn solve_l1(p: &ProblemData, pol: &Polytope) -> Result<L1Solution> {
    let lp = assemble_lp(p, pol)?;
    let sol = lp.solve();
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        // the objective is bounded below by zero, so this cannot happen on
        // a feasible instance
        LpStatus::Unbounded => {
            return Err(Error::NumericalFailure(
                "l1 program reported unbounded".into(),
            ))
        }
        LpStatus::NumericalFailure => {
            return Err(Error::NumericalFailure("iteration cap exceeded".into()))
        }
    }
    let d = BlockDims::of(p, pol);
    let primal = split_primal(&d, &sol.x);
    let dual = split_dual(&d, &sol.dual_ineq);
    Ok(L1Solution {
        value: sol.value,
        primal,
        dual,
    })
}

// ---------------------------------------------------------------------------
// the optimality system

/// A polyhedron `{u : M1 u <= p, M2 u = q}`.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    pub m1: Matrix,
    pub p: Vec<f64>,
    pub m2: Matrix,
    pub q: Vec<f64>,
}

impl Polyhedron {
    pub fn new(m1: Matrix, p: Vec<f64>, m2: Matrix, q: Vec<f64>) -> Polyhedron {
        assert_eq!(m1.rows(), p.len());
        assert_eq!(m2.rows(), q.len());
        assert_eq!(m1.cols(), m2.cols());
        Polyhedron { m1, p, m2, q }
    }

    pub fn dim(&self) -> usize {
        self.m1.cols()
    }

    /// Residual `[(M1 u - p)^+ ; M2 u - q]` and its l1 norm.
    pub fn residual(&self, u: &[f64]) -> (Vec<f64>, f64) {
        assert_eq!(u.len(), self.dim(), "residual: wrong length");
        let mut stacked = Vec::with_capacity(self.m1.rows() + self.m2.rows());
        for i in 0..self.m1.rows() {
            stacked.push((dot(self.m1.row(i), u) - self.p[i]).max(0.0));
        }
        for i in 0..self.m2.rows() {
            stacked.push(dot(self.m2.row(i), u) - self.q[i]);
        }
        let norm = l1_norm(&stacked);
        (stacked, norm)
    }

    /// A member found by a pure feasibility solve.
    pub fn feasible_point(&self) -> Result<Vec<f64>> {
        let dim = self.dim();
        let mut lp = LinearProgram::new(vec![0.0; dim], vec![false; dim]);
        for i in 0..self.m1.rows() {
            lp.add_ineq(self.m1.row(i), self.p[i]);
        }
        for i in 0..self.m2.rows() {
            lp.add_eq(self.m2.row(i), self.q[i]);
        }
        lp.feasible_point()?.ok_or(Error::Infeasible)
    }
}

/// The optimality system over `u = (x, t, s, xi, v, w1..w9)` whose members
/// are exactly the primal-dual pairs certifying optimality: primal
/// feasibility, dual feasibility, sign constraints, and the zero-gap
/// equality.
#[derive(Clone, Debug)]
pub struct ThetaSystem {
    pub system: Polyhedron,
    dims: BlockDims,
}

impl ThetaSystem {
    pub fn dim(&self) -> usize {
        self.dims.theta_dim()
    }

    pub fn dims(&self) -> &BlockDims {
        &self.dims
    }

    /// Stacks a primal/dual pair into the `u` layout.
    pub fn embed(&self, primal: &PrimalPoint, dual: &DualPoint) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.dim());
        u.extend_from_slice(&primal.x);
        u.extend_from_slice(&primal.t);
        u.push(primal.s);
        u.push(primal.xi);
        u.extend_from_slice(&primal.v);
        u.extend_from_slice(&dual.w1);
        u.extend_from_slice(&dual.w2);
        u.push(dual.w3);
        u.extend_from_slice(&dual.w4);
        u.extend_from_slice(&dual.w5);
        u.extend_from_slice(&dual.w6);
        u.extend_from_slice(&dual.w7);
        u.extend_from_slice(&dual.w8);
        u.extend_from_slice(&dual.w9);
        debug_assert_eq!(u.len(), self.dim());
        u
    }

    /// Splits a stacked `u` back into its primal and dual parts.
    pub fn extract(&self, u: &[f64]) -> (PrimalPoint, DualPoint) {
        let d = &self.dims;
        let pv = d.primal_vars();
        (split_primal(d, &u[..pv]), split_dual(d, &u[pv..]))
    }

    /// Residual `[(M1 u - p)^+ ; M2 u - q]` and its l1 norm.
    pub fn residual(&self, u: &[f64]) -> (Vec<f64>, f64) {
        self.system.residual(u)
    }

    /// A point of the system found by a pure feasibility solve.
    pub fn feasible_point(&self) -> Result<Vec<f64>> {
        self.system.feasible_point()
    }
}

/// Builds the optimality system for an instance and polytope.
pub fn assemble_theta(p: &ProblemData, pol: &Polytope) -> Result<ThetaSystem> {
    check_shapes(p, pol)?;
    let d = BlockDims::of(p, pol);
    let (n, h, l, nf) = (d.n, d.h, d.l, d.facets);
    let dim = d.theta_dim();

    // offsets into u
    let ix = 0;
    let it = n;
    let is = 2 * n;
    let ixi = 2 * n + 1;
    let iv = 2 * n + 2;
    let iw1 = iv + h;
    let iw2 = iw1 + n;
    let iw3 = iw2 + n;
    let iw4 = iw3 + 1;
    let iw5 = iw4 + nf;
    let iw6 = iw5 + h;
    let iw7 = iw6 + h;
    let iw8 = iw7 + h;
    let iw9 = iw8 + h;

    let ma = pol.direction_matrix().transpose().matmul(&p.a); // N x n
    let ua = p.u.transpose().matmul(&p.a); // h x n
    let my = pol.direction_matrix().transpose_matvec(&p.y);
    let uy = p.u.transpose_matvec(&p.y);
    let w = p.weights;

    let mut m1 = Matrix::empty(dim);
    let mut rhs1: Vec<f64> = Vec::new();
    let add1 = |row: Vec<f64>, r: f64, m1: &mut Matrix, rhs1: &mut Vec<f64>| {
        m1.push_row(&row);
        rhs1.push(r);
    };

    // primal feasibility
    for j in 0..n {
        let mut row = vec![0.0; dim];
        row[ix + j] = -1.0;
        row[it + j] = -1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    for j in 0..n {
        let mut row = vec![0.0; dim];
        row[ix + j] = 1.0;
        row[it + j] = -1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    {
        let mut row = vec![0.0; dim];
        row[is] = w.l2;
        row[ixi] = w.linf;
        for r in 0..h {
            row[iv + r] = w.l1;
        }
        add1(row, p.epsilon, &mut m1, &mut rhs1);
    }
    for f in 0..nf {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[ix + j] = -ma.get(f, j);
        }
        row[is] = -1.0;
        add1(row, -my[f], &mut m1, &mut rhs1);
    }
    for i in 0..l {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[ix + j] = p.b_mat.get(i, j);
        }
        add1(row, p.b_rhs[i], &mut m1, &mut rhs1);
    }
    for r in 0..h {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[ix + j] = -ua.get(r, j);
        }
        row[ixi] = -1.0;
        add1(row, -uy[r], &mut m1, &mut rhs1);
    }
    for r in 0..h {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[ix + j] = ua.get(r, j);
        }
        row[ixi] = -1.0;
        add1(row, uy[r], &mut m1, &mut rhs1);
    }
    for r in 0..h {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[ix + j] = -ua.get(r, j);
        }
        row[iv + r] = -1.0;
        add1(row, -uy[r], &mut m1, &mut rhs1);
    }
    for r in 0..h {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[ix + j] = ua.get(r, j);
        }
        row[iv + r] = -1.0;
        add1(row, uy[r], &mut m1, &mut rhs1);
    }

    // dual feasibility
    for j in 0..n {
        let mut row = vec![0.0; dim];
        row[iw1 + j] = 1.0;
        row[iw2 + j] = 1.0;
        add1(row, 1.0, &mut m1, &mut rhs1);
    }
    {
        let mut row = vec![0.0; dim];
        row[iw3] = -w.l2;
        for f in 0..nf {
            row[iw4 + f] = 1.0;
        }
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    {
        let mut row = vec![0.0; dim];
        row[iw3] = -w.linf;
        for r in 0..h {
            row[iw5 + r] = 1.0;
            row[iw6 + r] = 1.0;
        }
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    for r in 0..h {
        let mut row = vec![0.0; dim];
        row[iw3] = -w.l1;
        row[iw7 + r] = 1.0;
        row[iw8 + r] = 1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }

    // sign constraints on (t, s, xi, v) and all of w
    for idx in it..it + n {
        let mut row = vec![0.0; dim];
        row[idx] = -1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    for idx in [is, ixi] {
        let mut row = vec![0.0; dim];
        row[idx] = -1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    for idx in iv..iv + h {
        let mut row = vec![0.0; dim];
        row[idx] = -1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }
    for idx in iw1..dim {
        let mut row = vec![0.0; dim];
        row[idx] = -1.0;
        add1(row, 0.0, &mut m1, &mut rhs1);
    }

    // equalities: dual stationarity in x, then the zero-gap row
    let mut m2 = Matrix::empty(dim);
    let mut q = Vec::new();
    for j in 0..n {
        let mut row = vec![0.0; dim];
        row[iw1 + j] = 1.0;
        row[iw2 + j] = -1.0;
        for f in 0..nf {
            row[iw4 + f] = ma.get(f, j);
        }
        for r in 0..h {
            let c = ua.get(r, j);
            row[iw5 + r] = c;
            row[iw6 + r] = -c;
            row[iw7 + r] = c;
            row[iw8 + r] = -c;
        }
        for i in 0..l {
            row[iw9 + i] = -p.b_mat.get(i, j);
        }
        m2.push_row(&row);
        q.push(0.0);
    }
    {
        let mut row = vec![0.0; dim];
        for j in 0..n {
            row[it + j] = 1.0;
        }
        row[iw3] = p.epsilon;
        for f in 0..nf {
            row[iw4 + f] = -my[f];
        }
        for r in 0..h {
            row[iw5 + r] = -uy[r];
            row[iw6 + r] = uy[r];
            row[iw7 + r] = -uy[r];
            row[iw8 + r] = uy[r];
        }
        for i in 0..l {
            row[iw9 + i] = p.b_rhs[i];
        }
        m2.push_row(&row);
        q.push(0.0);
    }

    Ok(ThetaSystem {
        system: Polyhedron::new(m1, rhs1, m2, q),
        dims: d,
    })
}

// ---------------------------------------------------------------------------
// dual witness construction

/// A dual-feasible pair built from a range-space witness, together with the
/// auxiliary vector `g` (supported on the selected column subset of `U`)
/// used to build the multipliers.
#[derive(Clone, Debug)]
pub struct DualWitness {
    pub primal: PrimalPoint,
    pub dual: DualPoint,
    /// solves `U g = nu` and vanishes off `subset`
    pub g: Vec<f64>,
    pub subset: Vec<usize>,
}

/// Support pattern of the `k` largest magnitudes of `x`, split by sign.
/// Ties break toward smaller indices.
pub fn top_k_pattern(x: &[f64], k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        x[b].abs()
            .partial_cmp(&x[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut j1 = Vec::new();
    let mut j2 = Vec::new();
    for &i in idx.iter().take(k) {
        if x[i] > 0.0 {
            j1.push(i);
        } else if x[i] < 0.0 {
            j2.push(i);
        }
    }
    j1.sort_unstable();
    j2.sort_unstable();
    (j1, j2)
}

/// Builds a primal/dual pair from a range-space witness `(eta, nu, hstar)`
/// for the sign pattern of the `k` largest entries of `x`:
///
/// * the primal part is the tight envelope at `x`:
///   `t = |x|`, `s = \|M^T(y-Ax)\|_inf`, `xi = \|U^T(y-Ax)\|_inf`,
///   `v = |U^T(y-Ax)|`;
/// * `w1/w2` realize `w2 - w1 = eta` with `w1 + w2 <= e`;
/// * `g` solves `U g = nu` through the first invertible column subset;
/// * `w5..w8` split `g` by sign, scaled by the linf/l1 weights;
/// * `w4` places `a1*nu` on the signed axis facets;
/// * `w3` dominates the norms of `nu` and `g` required by the active
///   weights; `w9 = -hstar`.
///
/// The result satisfies dual feasibility and all sign constraints exactly
/// (up to the witness residual).
pub fn construct_dual_witness(
    p: &ProblemData,
    pol: &Polytope,
    x: &[f64],
    k: usize,
    eta: &[f64],
    nu: &[f64],
    hstar: &[f64],
) -> Result<DualWitness> {
    check_shapes(p, pol)?;
    let (n, m, l, nf) = (p.n(), p.m(), p.l(), pol.facet_count());
    if x.len() != n || eta.len() != n || nu.len() != m || hstar.len() != l {
        return Err(Error::DimensionMismatch(
            "witness components have wrong lengths".into(),
        ));
    }
    // the witness must lie in the range space with nonpositive h
    let mut stationarity = p.a.transpose_matvec(nu);
    if l > 0 {
        let bh = p.b_mat.transpose_matvec(hstar);
        for (s, b) in stationarity.iter_mut().zip(&bh) {
            *s += b;
        }
    }
    let witness_res = eta
        .iter()
        .zip(&stationarity)
        .fold(0.0_f64, |acc, (e, s)| acc.max((e - s).abs()));
    if witness_res > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "witness stationarity violated: residual {witness_res:.3e}"
        )));
    }
    if hstar.iter().any(|&v| v > 1e-12) {
        return Err(Error::InvalidInput("witness h must be nonpositive".into()));
    }

    // tight primal envelope at x
    let ax = p.a.matvec(x);
    let resid: Vec<f64> = p.y.iter().zip(&ax).map(|(yi, axi)| yi - axi).collect();
    let m_res = pol.direction_matrix().transpose_matvec(&resid);
    let u_res = p.u.transpose_matvec(&resid);
    let primal = PrimalPoint {
        x: x.to_vec(),
        t: x.iter().map(|v| v.abs()).collect(),
        s: linf_norm(&m_res),
        xi: linf_norm(&u_res),
        v: u_res.iter().map(|v| v.abs()).collect(),
    };

    // w1/w2 from eta: +-1 entries on the top-k sign pattern, midpoint split
    // elsewhere
    let (j1, j2) = top_k_pattern(x, k);
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for j in 0..n {
        if j1.binary_search(&j).is_ok() {
            w1[j] = 0.0;
            w2[j] = 1.0;
        } else if j2.binary_search(&j).is_ok() {
            w1[j] = 1.0;
            w2[j] = 0.0;
        } else {
            w1[j] = (1.0 - eta[j]) / 2.0;
            w2[j] = (1.0 + eta[j]) / 2.0;
        }
        if w1[j] < -1e-9 || w2[j] < -1e-9 {
            return Err(Error::InvalidInput(format!(
                "witness eta escapes [-1, 1] at index {j}"
            )));
        }
        w1[j] = w1[j].max(0.0);
        w2[j] = w2[j].max(0.0);
    }

    // g solves U g = nu on the first invertible column subset
    let (g, subset) = solve_on_subset(&p.u, nu)?;
    let wgt = p.weights;
    let gp: Vec<f64> = g.iter().map(|&v| v.max(0.0)).collect();
    let gn: Vec<f64> = g.iter().map(|&v| (-v).max(0.0)).collect();
    let w5: Vec<f64> = gp.iter().map(|&v| wgt.linf * v).collect();
    let w6: Vec<f64> = gn.iter().map(|&v| wgt.linf * v).collect();
    let w7: Vec<f64> = gp.iter().map(|&v| wgt.l1 * v).collect();
    let w8: Vec<f64> = gn.iter().map(|&v| wgt.l1 * v).collect();

    // w4 realizes M w4 = a1 * nu on the signed axis columns
    let mut w4 = vec![0.0; nf];
    for j in 0..m {
        if nu[j] > 0.0 {
            w4[j] = wgt.l2 * nu[j];
        } else if nu[j] < 0.0 {
            w4[m + j] = -wgt.l2 * nu[j];
        }
    }

    // w3 only needs to dominate the norms whose weight is active
    let mut w3 = 0.0_f64;
    if !Weights::is_zero(wgt.l2) {
        w3 = w3.max(l1_norm(nu));
    }
    if !Weights::is_zero(wgt.linf) {
        w3 = w3.max(l1_norm(&g));
    }
    if !Weights::is_zero(wgt.l1) {
        w3 = w3.max(linf_norm(&g));
    }

    let dual = DualPoint {
        w1,
        w2,
        w3,
        w4,
        w5,
        w6,
        w7,
        w8,
        w9: hstar.iter().map(|&v| -v).collect(),
    };
    Ok(DualWitness {
        primal,
        dual,
        g,
        subset,
    })
}

/// Finds the lexicographically first size-m column subset of `u_mat` with
/// determinant magnitude above 1e-10 and solves `U_subset g = rhs`.
fn solve_on_subset(u_mat: &Matrix, rhs: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    let m = u_mat.rows();
    let h = u_mat.cols();
    let mut subset = vec![0usize; m];
    let mut result: Option<(Vec<f64>, Vec<usize>)> = None;
    visit_subsets_until(h, m, &mut subset, 0, 0, &mut |idx| {
        let sub = u_mat.select_cols(idx);
        if sub.determinant().abs() <= 1e-10 {
            return false;
        }
        let inv = match sub.inverse() {
            Ok(v) => v,
            Err(_) => return false,
        };
        let gsub = inv.matvec(rhs);
        let mut g = vec![0.0; h];
        for (pos, &col) in idx.iter().enumerate() {
            g[col] = gsub[pos];
        }
        result = Some((g, idx.to_vec()));
        true
    });
    result.ok_or(Error::NoInvertibleSubset)
}

/// Lexicographic subset visitor with early exit.
fn visit_subsets_until(
    n: usize,
    k: usize,
    buf: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if depth == k {
        return visit(buf);
    }
    for j in start..n {
        buf[depth] = j;
        if visit_subsets_until(n, k, buf, depth + 1, j + 1, visit) {
            return true;
        }
    }
    false
}

/// Max violation over the dual-side conditions a constructed witness must
/// satisfy: stationarity in x, the four dual cap rows, and nonnegativity of
/// every component of `(t, s, xi, v, w)`.
pub fn witness_conditions_residual(
    p: &ProblemData,
    pol: &Polytope,
    primal: &PrimalPoint,
    dual: &DualPoint,
) -> f64 {
    let (n, h, l) = (p.n(), p.h(), p.l());
    let w = p.weights;
    let mut res = 0.0_f64;

    // stationarity: w1 - w2 + A^T M w4 + A^T U (w5-w6+w7-w8) - B^T w9 = 0
    let mw4 = pol.direction_matrix().matvec(&dual.w4);
    let mut comb = vec![0.0; h];
    for r in 0..h {
        comb[r] = dual.w5[r] - dual.w6[r] + dual.w7[r] - dual.w8[r];
    }
    let ucomb = p.u.matvec(&comb);
    let inner: Vec<f64> = mw4.iter().zip(&ucomb).map(|(a, b)| a + b).collect();
    let at = p.a.transpose_matvec(&inner);
    let bt = if l > 0 {
        p.b_mat.transpose_matvec(&dual.w9)
    } else {
        vec![0.0; n]
    };
    for j in 0..n {
        res = res.max((dual.w1[j] - dual.w2[j] + at[j] - bt[j]).abs());
    }
    // caps
    for j in 0..n {
        res = res.max(dual.w1[j] + dual.w2[j] - 1.0);
    }
    res = res.max(-w.l2 * dual.w3 + dual.w4.iter().sum::<f64>());
    res = res.max(
        -w.linf * dual.w3
            + dual
                .w5
                .iter()
                .zip(&dual.w6)
                .map(|(a, b)| a + b)
                .sum::<f64>(),
    );
    for r in 0..h {
        res = res.max(-w.l1 * dual.w3 + dual.w7[r] + dual.w8[r]);
    }
    // sign constraints
    let mut neg = 0.0_f64;
    for v in primal
        .t
        .iter()
        .chain([&primal.s, &primal.xi])
        .chain(&primal.v)
        .chain(&dual.w1)
        .chain(&dual.w2)
        .chain([&dual.w3])
        .chain(&dual.w4)
        .chain(&dual.w5)
        .chain(&dual.w6)
        .chain(&dual.w7)
        .chain(&dual.w8)
        .chain(&dual.w9)
    {
        neg = neg.max(-v);
    }
    res.max(neg).max(0.0)
}
