//! Certification of the weak and restricted weak range space properties.
//!
//! A matrix pair `(A^T, B^T)` satisfies the restricted weak range space
//! property of order `k` when for every pair of disjoint index sets
//! `(J1, J2)` with `|J1| + |J2| <= k` there are `nu` and nonpositive `h`
//! such that `eta = A^T nu + B^T h` equals `+1` on `J1`, `-1` on `J2`, and
//! stays within `[-1, 1]` elsewhere. With no `B` this is the weak range
//! space property of `A^T` alone.
//!
//! Only patterns with `|J1| + |J2| = k` exactly are enumerated: a witness
//! for a size-k extension of a smaller pattern also serves the smaller one,
//! since the extra coordinates merely sit at the `+-1` bounds.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::simplex::LinearProgram;

/// Patterns examined per certification call are capped at this count.
pub const PATTERN_BUDGET: u128 = 1_000_000;

/// Patterns solved per parallel batch.
const BATCH: usize = 64;

/// A disjoint signed index pair within `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SignPattern {
    pub j1: Vec<usize>,
    pub j2: Vec<usize>,
}

impl SignPattern {
    pub fn new(mut j1: Vec<usize>, mut j2: Vec<usize>) -> SignPattern {
        j1.sort_unstable();
        j2.sort_unstable();
        SignPattern { j1, j2 }
    }

    pub fn order(&self) -> usize {
        self.j1.len() + self.j2.len()
    }
}

/// A range-space witness for one pattern.
#[derive(Clone, Debug)]
pub struct Witness {
    pub eta: Vec<f64>,
    pub nu: Vec<f64>,
    /// nonpositive multipliers of the side-constraint rows (empty if l = 0)
    pub h: Vec<f64>,
}

/// Outcome of a certification run.
#[derive(Clone, Debug)]
pub struct RspCertificate {
    pub k: usize,
    pub holds: bool,
    /// per-pattern witnesses when the property holds
    pub witnesses: BTreeMap<SignPattern, Witness>,
    /// first pattern (in enumeration order) whose witness system is
    /// infeasible
    pub failing: Option<SignPattern>,
}

/// Decides the restricted weak range space property of order `k` for the
/// pair `(A^T, B^T)` by exhaustive pattern enumeration. Pass a zero-row `B`
/// for the plain weak property.
pub fn certify_restricted(a: &Matrix, b: &Matrix, k: usize) -> Result<RspCertificate> {
    let n = a.cols();
    if b.rows() > 0 && b.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "B has {} columns, expected {n}",
            b.cols()
        )));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(RspCertificate {
            k,
            holds: true,
            witnesses: BTreeMap::new(),
            failing: None,
        });
    }
    let count = binomial(n, k).saturating_mul(1u128 << k);
    if count > PATTERN_BUDGET {
        return Err(Error::PatternBudgetExceeded(count, PATTERN_BUDGET));
    }

    let patterns = all_patterns(n, k);
    let mut witnesses = BTreeMap::new();
    for batch in patterns.chunks(BATCH) {
        let solved: Vec<Option<Witness>> = batch
            .par_iter()
            .map(|pat| witness_for_pattern(a, b, pat).expect("well-formed pattern"))
            .collect();
        for (pat, wit) in batch.iter().zip(solved) {
            match wit {
                Some(w) => {
                    witnesses.insert(pat.clone(), w);
                }
                None => {
                    return Ok(RspCertificate {
                        k,
                        holds: false,
                        witnesses: BTreeMap::new(),
                        failing: Some(pat.clone()),
                    });
                }
            }
        }
    }
    Ok(RspCertificate {
        k,
        holds: true,
        witnesses,
        failing: None,
    })
}

/// Weak range space property of `A^T` alone.
pub fn certify_weak(a: &Matrix, k: usize) -> Result<RspCertificate> {
    certify_restricted(a, &Matrix::empty(a.cols()), k)
}

/// Solves the witness system for a single pattern: variables `(nu, h)` with
/// `h <= 0`, equalities pinning `eta` to `+-1` on the pattern, and box rows
/// `|eta_i| <= 1` elsewhere. Returns `None` when infeasible.
pub fn witness_for_pattern(
    a: &Matrix,
    b: &Matrix,
    pattern: &SignPattern,
) -> Result<Option<Witness>> {
    let n = a.cols();
    let m = a.rows();
    let l = b.rows();
    for &i in pattern.j1.iter().chain(&pattern.j2) {
        if i >= n {
            return Err(Error::InvalidInput(format!("pattern index {i} out of range")));
        }
    }
    if pattern.j1.iter().any(|i| pattern.j2.contains(i)) {
        return Err(Error::InvalidInput("pattern sets must be disjoint".into()));
    }

    // variables: nu (free, m entries) then hneg = -h (nonnegative, l entries)
    let nv = m + l;
    let mut nonneg = vec![false; nv];
    for flag in nonneg.iter_mut().skip(m) {
        *flag = true;
    }
    let mut lp = LinearProgram::new(vec![0.0; nv], nonneg);

    // eta_i as a row over (nu, hneg): A^T nu - B^T hneg
    let eta_row = |i: usize| -> Vec<f64> {
        let mut row = vec![0.0; nv];
        for r in 0..m {
            row[r] = a.get(r, i);
        }
        for s in 0..l {
            row[m + s] = -b.get(s, i);
        }
        row
    };

    for i in 0..n {
        let row = eta_row(i);
        if pattern.j1.binary_search(&i).is_ok() {
            lp.add_eq(&row, 1.0);
        } else if pattern.j2.binary_search(&i).is_ok() {
            lp.add_eq(&row, -1.0);
        } else {
            lp.add_ineq(&row, 1.0);
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            lp.add_ineq(&neg, 1.0);
        }
    }

    let Some(z) = lp.feasible_point()? else {
        return Ok(None);
    };
    let nu = z[..m].to_vec();
    let h: Vec<f64> = z[m..].iter().map(|&v| -v.max(0.0)).collect();
    let mut eta = a.transpose_matvec(&nu);
    if l > 0 {
        let bh = b.transpose_matvec(&h);
        for (e, v) in eta.iter_mut().zip(&bh) {
            *e += v;
        }
    }
    let wit = Witness { eta, nu, h };
    debug_assert!(witness_residual(a, b, pattern, &wit) <= 1e-8);
    Ok(Some(wit))
}

/// Max violation of every witness condition: the range-space identity, the
/// sign of `h`, and the three conditions on `eta`.
pub fn witness_residual(a: &Matrix, b: &Matrix, pattern: &SignPattern, w: &Witness) -> f64 {
    let n = a.cols();
    let mut recon = a.transpose_matvec(&w.nu);
    if b.rows() > 0 {
        let bh = b.transpose_matvec(&w.h);
        for (r, v) in recon.iter_mut().zip(&bh) {
            *r += v;
        }
    }
    let mut res = 0.0_f64;
    for i in 0..n {
        res = res.max((w.eta[i] - recon[i]).abs());
        if pattern.j1.binary_search(&i).is_ok() {
            res = res.max((w.eta[i] - 1.0).abs());
        } else if pattern.j2.binary_search(&i).is_ok() {
            res = res.max((w.eta[i] + 1.0).abs());
        } else {
            res = res.max(w.eta[i].abs() - 1.0);
        }
    }
    for &hi in &w.h {
        res = res.max(hi);
    }
    res.max(0.0)
}

/// All patterns with `|J1| + |J2| = k`: supports in lexicographic order,
/// then sign strings per support with the first element most significant
/// and `J1` before `J2`.
fn all_patterns(n: usize, k: usize) -> Vec<SignPattern> {
    let mut supports = Vec::new();
    let mut buf = vec![0usize; k];
    lex_subsets(n, k, &mut buf, 0, 0, &mut |s| supports.push(s.to_vec()));
    let mut out = Vec::with_capacity(supports.len() << k);
    for s in &supports {
        for mask in 0u64..(1u64 << k) {
            let mut j1 = Vec::new();
            let mut j2 = Vec::new();
            for (pos, &idx) in s.iter().enumerate() {
                if mask & (1 << (k - 1 - pos)) == 0 {
                    j1.push(idx);
                } else {
                    j2.push(idx);
                }
            }
            out.push(SignPattern { j1, j2 });
        }
    }
    out
}

fn lex_subsets(
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
        lex_subsets(n, k, buf, depth + 1, j + 1, visit);
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}
