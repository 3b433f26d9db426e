//! Dense two-phase simplex over the model
//!
//! ```text
//!     minimize    c^T z
//!     subject to  G z <= p
//!                 H z  = q
//!                 z_j >= 0   for j with a zero lower bound (free otherwise)
//! ```
//!
//! Free variables are split into positive and negative parts internally.
//! Pricing starts with Dantzig's rule and switches permanently to Bland's
//! rule once the objective stalls, which guarantees termination on
//! degenerate instances. Duals for both row families are recovered from the
//! reduced costs of the slack and artificial columns.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Absolute tolerance on reduced costs for optimality.
const REDUCED_COST_TOL: f64 = 1e-9;
/// Smallest pivot magnitude accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// Phase-1 objective above this value means infeasible.
const PHASE1_TOL: f64 = 1e-7;
/// Hard cap on total pivots across both phases.
const MAX_ITER: usize = 1_000_000;
/// Iterations without improvement before switching to Bland's rule,
/// as a multiple of (rows + cols).
const STALL_FACTOR: usize = 5;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (meaningful only when `Optimal`).
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Multipliers for `G z <= p`, nonnegative at an optimum.
    pub dual_ineq: Vec<f64>,
    /// Multipliers for `H z = q`, free sign.
    pub dual_eq: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            value: f64::NAN,
            dual_ineq: Vec::new(),
            dual_eq: Vec::new(),
        }
    }
}

/// An LP in the fixed shape above. Rows are appended one at a time.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    nonneg: Vec<bool>,
    g: Matrix,
    p: Vec<f64>,
    h: Matrix,
    q: Vec<f64>,
}

impl LinearProgram {
    /// `nonneg[j] = true` pins `z_j >= 0`; `false` leaves it free.
    pub fn new(objective: Vec<f64>, nonneg: Vec<bool>) -> Self {
        assert_eq!(objective.len(), nonneg.len());
        let n = objective.len();
        LinearProgram {
            objective,
            nonneg,
            g: Matrix::empty(n),
            p: Vec::new(),
            h: Matrix::empty(n),
            q: Vec::new(),
        }
    }

    /// Convenience: all variables nonnegative.
    pub fn with_nonneg_vars(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram::new(objective, vec![true; n])
    }

    pub fn add_ineq(&mut self, row: &[f64], rhs: f64) {
        self.g.push_row(row);
        self.p.push(rhs);
    }

    pub fn add_eq(&mut self, row: &[f64], rhs: f64) {
        self.h.push_row(row);
        self.q.push(rhs);
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.p.len()
    }

    pub fn n_eq(&self) -> usize {
        self.q.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn ineq(&self) -> (&Matrix, &[f64]) {
        (&self.g, &self.p)
    }

    pub fn eq(&self) -> (&Matrix, &[f64]) {
        (&self.h, &self.q)
    }

    /// Max violation of all constraints (including sign bounds) at `z`.
    pub fn feasibility_residual(&self, z: &[f64]) -> f64 {
        let mut res = 0.0_f64;
        for i in 0..self.n_ineq() {
            res = res.max(dot(self.g.row(i), z) - self.p[i]);
        }
        for i in 0..self.n_eq() {
            res = res.max((dot(self.h.row(i), z) - self.q[i]).abs());
        }
        for (j, &nn) in self.nonneg.iter().enumerate() {
            if nn {
                res = res.max(-z[j]);
            }
        }
        res.max(0.0)
    }

    /// Solves the LP. Status is carried in the solution; `Err` is reserved
    /// for malformed input.
    pub fn solve(&self) -> LpSolution {
        Tableau::new(self).solve(true)
    }

    /// Phase 1 only: a feasible point, or `None` if the constraints are
    /// inconsistent. The objective is ignored.
    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        let sol = Tableau::new(self).solve(false);
        match sol.status {
            LpStatus::Optimal => Ok(Some(sol.x)),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::NumericalFailure => {
                Err(Error::NumericalFailure("iteration cap exceeded".into()))
            }
        }
    }
}

/// Column classes in the internal standard form.
#[derive(Copy, Clone, Debug, PartialEq)]
enum ColKind {
    /// (variable index, sign); free variables own a +1 and a -1 column.
    Structural(usize, f64),
    /// Slack of inequality row `i`.
    Slack(usize),
    /// Artificial of row `i` with coefficient `sign` (+-1).
    Artificial(usize, f64),
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    cols: Vec<ColKind>,
    /// rows x (cols + 1); last entry of each row is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// reduced-cost row; last entry is minus the current objective value.
    r: Vec<f64>,
    n_rows: usize,
    iterations: usize,
    bland: bool,
    /// iteration count at the last rebuild from original data
    last_refactor: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterCap,
}

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let n = lp.n_vars();
        let mi = lp.n_ineq();
        let me = lp.n_eq();
        let n_rows = mi + me;

        let mut cols = Vec::new();
        for j in 0..n {
            cols.push(ColKind::Structural(j, 1.0));
            if !lp.nonneg[j] {
                cols.push(ColKind::Structural(j, -1.0));
            }
        }
        for i in 0..mi {
            cols.push(ColKind::Slack(i));
        }
        // artificials: every equality row, plus inequality rows with
        // negative rhs (whose slack cannot start basic)
        let mut art_of_row: Vec<Option<usize>> = vec![None; n_rows];
        for i in 0..mi {
            if lp.p[i] < 0.0 {
                art_of_row[i] = Some(cols.len());
                cols.push(ColKind::Artificial(i, -1.0));
            }
        }
        for e in 0..me {
            let i = mi + e;
            let sign = if lp.q[e] >= 0.0 { 1.0 } else { -1.0 };
            art_of_row[i] = Some(cols.len());
            cols.push(ColKind::Artificial(i, sign));
        }

        let ncols = cols.len();
        let mut t = vec![vec![0.0; ncols + 1]; n_rows];
        for i in 0..n_rows {
            let (coeffs, rhs) = if i < mi {
                (lp.g.row(i), lp.p[i])
            } else {
                (lp.h.row(i - mi), lp.q[i - mi])
            };
            for (c, kind) in cols.iter().enumerate() {
                t[i][c] = match *kind {
                    ColKind::Structural(j, sign) => sign * coeffs[j],
                    ColKind::Slack(s) => {
                        if s == i {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    ColKind::Artificial(row, sign) => {
                        if row == i {
                            sign
                        } else {
                            0.0
                        }
                    }
                };
            }
            t[i][ncols] = rhs;
        }

        // initial basis: slack where possible, artificial otherwise; scale
        // rows so every basic value is nonnegative
        let mut basis = vec![0usize; n_rows];
        for i in 0..n_rows {
            if let Some(a) = art_of_row[i] {
                basis[i] = a;
                if let ColKind::Artificial(_, sign) = cols[a] {
                    if sign < 0.0 {
                        for v in t[i].iter_mut() {
                            *v = -*v;
                        }
                    }
                }
            } else {
                // inequality row with nonnegative rhs
                basis[i] = n + lp.nonneg.iter().filter(|&&nn| !nn).count() + i;
                debug_assert_eq!(cols[basis[i]], ColKind::Slack(i));
            }
        }

        Tableau {
            lp,
            cols,
            t,
            basis,
            r: vec![0.0; ncols + 1],
            n_rows,
            iterations: 0,
            bland: false,
            last_refactor: 0,
        }
    }

    /// Entry of the original standard-form column `c` in row `i`.
    fn original_entry(&self, i: usize, c: usize) -> f64 {
        let mi = self.lp.n_ineq();
        let coeffs = if i < mi {
            self.lp.g.row(i)
        } else {
            self.lp.h.row(i - mi)
        };
        match self.cols[c] {
            ColKind::Structural(j, sign) => sign * coeffs[j],
            ColKind::Slack(s) => {
                if s == i {
                    1.0
                } else {
                    0.0
                }
            }
            ColKind::Artificial(row, sign) => {
                if row == i {
                    sign
                } else {
                    0.0
                }
            }
        }
    }

    fn original_rhs(&self, i: usize) -> f64 {
        let mi = self.lp.n_ineq();
        if i < mi {
            self.lp.p[i]
        } else {
            self.lp.q[i - mi]
        }
    }

    /// Rebuilds the tableau from the original data through the current
    /// basis, discarding accumulated pivot roundoff. Returns false when the
    /// basis matrix is numerically singular.
    fn refactorize(&mut self) -> bool {
        let n_rows = self.n_rows;
        if n_rows == 0 {
            return true;
        }
        let ncols = self.ncols();
        let mut bmat = Matrix::zeros(n_rows, n_rows);
        for (pos, &bc) in self.basis.iter().enumerate() {
            for i in 0..n_rows {
                bmat.set(i, pos, self.original_entry(i, bc));
            }
        }
        let Ok(inv) = bmat.inverse() else {
            return false;
        };
        let mut fresh = vec![vec![0.0; ncols + 1]; n_rows];
        for c in 0..ncols {
            match self.cols[c] {
                // unit columns: a straight copy out of the inverse
                ColKind::Slack(s) => {
                    for i in 0..n_rows {
                        fresh[i][c] = inv.get(i, s);
                    }
                }
                ColKind::Artificial(row, sign) => {
                    for i in 0..n_rows {
                        fresh[i][c] = sign * inv.get(i, row);
                    }
                }
                ColKind::Structural(_, _) => {
                    for i in 0..n_rows {
                        let mut acc = 0.0;
                        for r in 0..n_rows {
                            acc += inv.get(i, r) * self.original_entry(r, c);
                        }
                        fresh[i][c] = acc;
                    }
                }
            }
        }
        for i in 0..n_rows {
            let mut acc = 0.0;
            for r in 0..n_rows {
                acc += inv.get(i, r) * self.original_rhs(r);
            }
            fresh[i][ncols] = acc;
        }
        // basic columns come out as exact unit vectors up to roundoff;
        // snap them so later pivots stay clean
        for (pos, &bc) in self.basis.iter().enumerate() {
            for (i, row) in fresh.iter_mut().enumerate() {
                row[bc] = if i == pos { 1.0 } else { 0.0 };
            }
        }
        self.t = fresh;
        self.last_refactor = self.iterations;
        true
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Rebuilds the reduced-cost row for the given column costs.
    fn load_costs(&mut self, costs: &[f64]) {
        let ncols = self.ncols();
        self.r = vec![0.0; ncols + 1];
        self.r[..ncols].copy_from_slice(costs);
        for i in 0..self.n_rows {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i];
            for (rj, &tij) in self.r.iter_mut().zip(row.iter()) {
                *rj -= cb * tij;
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let ncols = self.ncols();
        let piv = self.t[pr][pc];
        let inv = 1.0 / piv;
        for v in self.t[pr].iter_mut() {
            *v *= inv;
        }
        self.t[pr][pc] = 1.0;
        for i in 0..self.n_rows {
            if i == pr {
                continue;
            }
            let f = self.t[i][pc];
            if f == 0.0 {
                continue;
            }
            let (pivot_row, target) = if i < pr {
                let (a, b) = self.t.split_at_mut(pr);
                (&b[0], &mut a[i])
            } else {
                let (a, b) = self.t.split_at_mut(i);
                (&a[pr], &mut b[0])
            };
            for (tv, &pv) in target.iter_mut().zip(pivot_row.iter()) {
                *tv -= f * pv;
            }
            target[pc] = 0.0;
        }
        let f = self.r[pc];
        if f != 0.0 {
            for (rv, &pv) in self.r.iter_mut().zip(self.t[pr].iter()) {
                *rv -= f * pv;
            }
            self.r[pc] = 0.0;
        }
        let _ = ncols;
        self.basis[pr] = pc;
    }

    /// Entering column, or `None` when optimal.
    fn choose_entering(&self, allow: impl Fn(usize) -> bool) -> Option<usize> {
        if self.bland {
            (0..self.ncols()).find(|&j| allow(j) && self.r[j] < -REDUCED_COST_TOL)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.ncols() {
                if !allow(j) {
                    continue;
                }
                let rj = self.r[j];
                if rj < -REDUCED_COST_TOL && best.map_or(true, |(_, b)| rj < b) {
                    best = Some((j, rj));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by the minimum-ratio test, or `None` if the column has
    /// no eligible pivot. Among (near-)ties, Bland's rule takes the
    /// smallest basic variable index; otherwise the largest pivot entry
    /// wins, which keeps the tableau well conditioned.
    fn choose_leaving(&self, pc: usize) -> Option<usize> {
        let ncols = self.ncols();
        let mut min_ratio = f64::INFINITY;
        for i in 0..self.n_rows {
            let a = self.t[i][pc];
            if a <= PIVOT_TOL {
                continue;
            }
            min_ratio = min_ratio.min(self.t[i][ncols] / a);
        }
        if min_ratio == f64::INFINITY {
            return None;
        }
        let tie = min_ratio + 1e-9 * (1.0 + min_ratio.abs());
        let mut best: Option<usize> = None;
        for i in 0..self.n_rows {
            let a = self.t[i][pc];
            if a <= PIVOT_TOL || self.t[i][ncols] / a > tie {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => {
                    let take = if self.bland {
                        self.basis[i] < self.basis[b]
                    } else {
                        self.t[i][pc] > self.t[b][pc]
                    };
                    if take {
                        i
                    } else {
                        b
                    }
                }
            });
        }
        best
    }

    fn objective_value(&self) -> f64 {
        -self.r[self.ncols()]
    }

    fn run_phase(&mut self, costs: &[f64], allow: impl Fn(&ColKind) -> bool + Copy) -> PhaseEnd {
        self.load_costs(costs);
        let stall_limit = STALL_FACTOR * (self.n_rows + self.ncols());
        // rebuilding bounds the roundoff accumulated by dense pivoting
        let refactor_interval = 200.max(self.n_rows);
        let mut best_obj = self.objective_value();
        let mut stalled = 0usize;
        loop {
            if self.iterations >= MAX_ITER {
                return PhaseEnd::IterCap;
            }
            let cols = &self.cols;
            let entering = self.choose_entering(|j| allow(&cols[j]));
            let Some(pc) = entering else {
                return PhaseEnd::Optimal;
            };
            let Some(pr) = self.choose_leaving(pc) else {
                // an unbounded verdict is only trusted on a freshly rebuilt
                // tableau; otherwise discard pivot roundoff and retry
                if self.iterations > self.last_refactor && self.refactorize() {
                    self.load_costs(costs);
                    continue;
                }
                return PhaseEnd::Unbounded;
            };
            self.pivot(pr, pc);
            self.iterations += 1;
            if self.iterations - self.last_refactor >= refactor_interval && self.refactorize() {
                self.load_costs(costs);
            }
            let obj = self.objective_value();
            if obj < best_obj - 1e-12 * (1.0 + best_obj.abs()) {
                best_obj = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if !self.bland && stalled > stall_limit {
                    self.bland = true;
                }
            }
        }
    }

    /// Drives basic artificials out of the basis after phase 1. Rows whose
    /// real coefficients are all (numerically) zero are linearly dependent
    /// and keep their artificial basic at level zero, which is harmless.
    fn expel_artificials(&mut self) {
        for i in 0..self.n_rows {
            if !matches!(self.cols[self.basis[i]], ColKind::Artificial(_, _)) {
                continue;
            }
            let pc = (0..self.ncols()).find(|&j| {
                !matches!(self.cols[j], ColKind::Artificial(_, _)) && self.t[i][j].abs() > PIVOT_TOL
            });
            if let Some(pc) = pc {
                self.pivot(i, pc);
                self.iterations += 1;
            }
        }
    }

    /// Runs a phase to completion, re-verifying an Optimal verdict on a
    /// freshly rebuilt tableau until it survives the rebuild.
    fn run_phase_verified(
        &mut self,
        costs: &[f64],
        allow: impl Fn(&ColKind) -> bool + Copy,
    ) -> PhaseEnd {
        loop {
            match self.run_phase(costs, allow) {
                PhaseEnd::Optimal => {
                    if self.iterations == self.last_refactor || !self.refactorize() {
                        return PhaseEnd::Optimal;
                    }
                    // loop: reduced costs may reopen on the fresh tableau
                }
                end => return end,
            }
        }
    }

    fn solve(mut self, optimize: bool) -> LpSolution {
        let ncols = self.ncols();

        // phase 1: minimize the sum of artificials
        let needs_phase1 = self
            .cols
            .iter()
            .any(|k| matches!(k, ColKind::Artificial(_, _)));
        if needs_phase1 {
            let costs: Vec<f64> = self
                .cols
                .iter()
                .map(|k| match k {
                    ColKind::Artificial(_, _) => 1.0,
                    _ => 0.0,
                })
                .collect();
            match self.run_phase_verified(&costs, |_| true) {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => {
                    return LpSolution::non_optimal(LpStatus::NumericalFailure)
                }
                PhaseEnd::IterCap => {
                    return LpSolution::non_optimal(LpStatus::NumericalFailure)
                }
            }
            if self.objective_value() > PHASE1_TOL {
                return LpSolution::non_optimal(LpStatus::Infeasible);
            }
            self.expel_artificials();
        }

        if optimize {
            // phase 2: real objective, artificials barred from entering
            let costs: Vec<f64> = self
                .cols
                .iter()
                .map(|k| match *k {
                    ColKind::Structural(j, sign) => sign * self.lp.objective[j],
                    _ => 0.0,
                })
                .collect();
            match self.run_phase_verified(&costs, |k| !matches!(k, ColKind::Artificial(_, _))) {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => return LpSolution::non_optimal(LpStatus::Unbounded),
                PhaseEnd::IterCap => {
                    return LpSolution::non_optimal(LpStatus::NumericalFailure)
                }
            }
        }

        // recover the structural point
        let mut x = vec![0.0; self.lp.n_vars()];
        for (i, &b) in self.basis.iter().enumerate() {
            if let ColKind::Structural(j, sign) = self.cols[b] {
                x[j] += sign * self.t[i][ncols];
            }
        }
        let value = dot(&self.lp.objective, &x);

        // duals from reduced costs of slack and artificial columns
        let mut dual_ineq = vec![0.0; self.lp.n_ineq()];
        let mut dual_eq = vec![0.0; self.lp.n_eq()];
        if optimize {
            for (c, kind) in self.cols.iter().enumerate() {
                match *kind {
                    ColKind::Slack(i) => dual_ineq[i] = self.r[c].max(0.0),
                    ColKind::Artificial(row, sign) => {
                        if row >= self.lp.n_ineq() {
                            dual_eq[row - self.lp.n_ineq()] = sign * self.r[c];
                        }
                    }
                    ColKind::Structural(_, _) => {}
                }
            }
        }

        LpSolution {
            status: LpStatus::Optimal,
            x,
            value,
            dual_ineq,
            dual_eq,
        }
    }
}
