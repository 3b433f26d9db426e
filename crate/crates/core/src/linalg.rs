//! Dense vectors and matrices with the handful of exact operations the rest
//! of the crate is built on: entrywise norms, induced operator norms for the
//! (1->1), (inf->inf) and (inf->q) pairs, row-rank tests, and solves against
//! the Gram matrix of a full-row-rank matrix.
//!
//! Everything here is dense and small. The induced (inf->q) norms are exact
//! maxima over sign vectors, so column counts are capped at
//! [`SIGN_ENUM_CAP`].

use crate::error::{Error, Result};

/// Largest column count for which sign-vector enumeration is attempted.
pub const SIGN_ENUM_CAP: usize = 25;

/// Default relative pivot tolerance for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// A dense row-major matrix of finite `f64` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices, checking rectangularity and finiteness.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: expected {} columns, found {}",
                    c,
                    row.len()
                )));
            }
            for &x in row {
                if !x.is_finite() {
                    return Err(Error::InvalidInput("non-finite matrix entry".into()));
                }
                data.push(x);
            }
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    /// An empty matrix with zero rows and the given column count.
    pub fn empty(cols: usize) -> Self {
        Matrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "push_row: wrong width");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec: wrong length");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T * x`
    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "transpose_matvec: wrong length");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// `self * other`
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul: inner dims differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Submatrix keeping the given columns, in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Stacks `other` below `self`.
    pub fn vcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vcat: widths differ");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Determinant via LU with partial pivoting. Square matrices only.
    pub fn determinant(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "determinant: square only");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a.get(i, k).abs() > a.get(piv, k).abs() {
                    piv = i;
                }
            }
            let p = a.get(piv, k);
            if p == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    let tmp = a.get(k, j);
                    a.set(k, j, a.get(piv, j));
                    a.set(piv, j, tmp);
                }
                det = -det;
            }
            det *= a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / a.get(k, k);
                for j in k..n {
                    let v = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        det
    }

    /// Inverse via Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse: square only");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        let scale = a.data.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a.get(i, k).abs() > a.get(piv, k).abs() {
                    piv = i;
                }
            }
            if a.get(piv, k).abs() < 1e-13 * scale {
                return Err(Error::RankDeficient);
            }
            if piv != k {
                for j in 0..n {
                    let tmp = a.get(k, j);
                    a.set(k, j, a.get(piv, j));
                    a.set(piv, j, tmp);
                    let tmp = inv.get(k, j);
                    inv.set(k, j, inv.get(piv, j));
                    inv.set(piv, j, tmp);
                }
            }
            let p = a.get(k, k);
            for j in 0..n {
                a.set(k, j, a.get(k, j) / p);
                inv.set(k, j, inv.get(k, j) / p);
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a.get(i, k);
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, v);
                    let v = inv.get(i, j) - f * inv.get(k, j);
                    inv.set(i, j, v);
                }
            }
        }
        Ok(inv)
    }
}

/// A p-norm selector: 1, 2, infinity, or a general exponent p >= 1.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum PNorm {
    One,
    Two,
    Inf,
    P(f64),
}

impl PNorm {
    /// Validates a general exponent; `f64::INFINITY` maps to `Inf`.
    pub fn general(p: f64) -> Result<PNorm> {
        if p == f64::INFINITY {
            Ok(PNorm::Inf)
        } else if p == 1.0 {
            Ok(PNorm::One)
        } else if p == 2.0 {
            Ok(PNorm::Two)
        } else if p >= 1.0 && p.is_finite() {
            Ok(PNorm::P(p))
        } else {
            Err(Error::InvalidNorm(p))
        }
    }

    /// The Hölder conjugate: 1/p + 1/p' = 1, with 1/inf = 0.
    pub fn conjugate(self) -> PNorm {
        match self {
            PNorm::One => PNorm::Inf,
            PNorm::Two => PNorm::Two,
            PNorm::Inf => PNorm::One,
            PNorm::P(p) => {
                let q = p / (p - 1.0);
                if q == 1.0 {
                    PNorm::One
                } else if q == 2.0 {
                    PNorm::Two
                } else {
                    PNorm::P(q)
                }
            }
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PNorm::One => 1.0,
            PNorm::Two => 2.0,
            PNorm::Inf => f64::INFINITY,
            PNorm::P(p) => p,
        }
    }
}

impl std::fmt::Display for PNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PNorm::One => write!(f, "1"),
            PNorm::Two => write!(f, "2"),
            PNorm::Inf => write!(f, "inf"),
            PNorm::P(p) => write!(f, "{p}"),
        }
    }
}

/// A conjugate exponent pair (p, p') with 1/p + 1/p' = 1.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ConjugatePair {
    pub p: PNorm,
    pub p_conj: PNorm,
}

impl ConjugatePair {
    pub fn of(p: PNorm) -> ConjugatePair {
        ConjugatePair {
            p,
            p_conj: p.conjugate(),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Entrywise p-norm. Errors on an empty vector or an invalid exponent.
pub fn lp_norm(x: &[f64], p: PNorm) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidInput("lp_norm of empty vector".into()));
    }
    Ok(match p {
        PNorm::One => x.iter().map(|v| v.abs()).sum(),
        PNorm::Two => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        PNorm::Inf => x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
        PNorm::P(p) => {
            if p < 1.0 {
                return Err(Error::InvalidNorm(p));
            }
            x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    })
}

/// Norm of the empty vector is zero; convenience for optional blocks.
pub fn lp_norm_or_zero(x: &[f64], p: PNorm) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        lp_norm(x, p).expect("valid exponent")
    }
}

pub fn linf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Exact induced operator norm `sup_{\|x\|_p <= 1} \|Mx\|_q`.
///
/// Supported pairs: (1->1) and (inf->inf) by closed form, and (inf->q) for
/// any valid q by enumerating the sign vectors of the unit cube, whose
/// vertices attain the maximum of the convex map `x -> \|Mx\|_q`.
pub fn induced_norm(m: &Matrix, p: PNorm, q: PNorm) -> Result<f64> {
    match (p, q) {
        (PNorm::One, PNorm::One) => {
            let mut best = 0.0_f64;
            for j in 0..m.cols() {
                let s: f64 = (0..m.rows()).map(|i| m.get(i, j).abs()).sum();
                best = best.max(s);
            }
            Ok(best)
        }
        (PNorm::Inf, PNorm::Inf) => {
            let mut best = 0.0_f64;
            for i in 0..m.rows() {
                best = best.max(m.row(i).iter().map(|v| v.abs()).sum());
            }
            Ok(best)
        }
        (PNorm::Inf, q) => induced_norm_inf_to(m, q),
        (p, q) => Err(Error::UnsupportedNormPair(p.to_string(), q.to_string())),
    }
}

/// `(inf -> q)` induced norm by exhaustive sign-vector enumeration.
fn induced_norm_inf_to(m: &Matrix, q: PNorm) -> Result<f64> {
    let n = m.cols();
    if n > SIGN_ENUM_CAP {
        return Err(Error::EnumerationTooLarge(n, SIGN_ENUM_CAP));
    }
    if n == 0 || m.rows() == 0 {
        return Ok(0.0);
    }
    let mut best = 0.0_f64;
    let mut x = vec![1.0_f64; n];
    for mask in 0u64..(1u64 << n) {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = if mask & (1 << j) != 0 { -1.0 } else { 1.0 };
        }
        let y = m.matvec(&x);
        best = best.max(lp_norm(&y, q)?);
    }
    Ok(best)
}

/// True iff `m` has full row rank: every row yields a pivot whose magnitude
/// exceeds `tol` relative to the largest pivot seen.
pub fn full_row_rank(m: &Matrix, tol: f64) -> bool {
    if m.rows() == 0 {
        return true;
    }
    if m.rows() > m.cols() {
        return false;
    }
    let mut a = m.clone();
    let (r, c) = (a.rows(), a.cols());
    let mut pivots = Vec::with_capacity(r);
    let mut row = 0;
    for col in 0..c {
        if row == r {
            break;
        }
        let mut piv = row;
        for i in row + 1..r {
            if a.get(i, col).abs() > a.get(piv, col).abs() {
                piv = i;
            }
        }
        if a.get(piv, col) == 0.0 {
            continue;
        }
        if piv != row {
            for j in col..c {
                let tmp = a.get(row, j);
                a.set(row, j, a.get(piv, j));
                a.set(piv, j, tmp);
            }
        }
        pivots.push(a.get(row, col).abs());
        for i in row + 1..r {
            let f = a.get(i, col) / a.get(row, col);
            if f == 0.0 {
                continue;
            }
            for j in col..c {
                let v = a.get(i, j) - f * a.get(row, j);
                a.set(i, j, v);
            }
        }
        row += 1;
    }
    if pivots.len() < r {
        return false;
    }
    let largest = pivots.iter().cloned().fold(0.0_f64, f64::max);
    pivots.iter().all(|&p| p > tol * largest)
}

/// Solves `(C C^T) z = C eta` by Cholesky; returns `z = (C C^T)^{-1} C eta`.
///
/// `C` must have full row rank; the factorization rejects non-positive
/// pivots, so rank deficiency surfaces as an error instead of garbage.
pub fn row_space_solve(c: &Matrix, eta: &[f64]) -> Result<Vec<f64>> {
    if eta.len() != c.cols() {
        return Err(Error::DimensionMismatch(format!(
            "row_space_solve: eta has length {}, expected {}",
            eta.len(),
            c.cols()
        )));
    }
    let rhs = c.matvec(eta);
    let chol = cholesky_gram(c)?;
    Ok(cholesky_solve(&chol, &rhs))
}

/// Returns the full matrix `(C C^T)^{-1} C` by solving against each column.
pub fn row_space_matrix(c: &Matrix) -> Result<Matrix> {
    let chol = cholesky_gram(c)?;
    let mut out = Matrix::zeros(c.rows(), c.cols());
    for j in 0..c.cols() {
        let col = cholesky_solve(&chol, &c.col(j));
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Cholesky factor (lower triangular, row-major) of `C C^T`.
fn cholesky_gram(c: &Matrix) -> Result<Matrix> {
    let k = c.rows();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            g.set(i, j, dot(c.row(i), c.row(j)));
        }
    }
    // scale-aware positivity threshold for the pivots
    let scale = (0..k).map(|i| g.get(i, i)).fold(0.0_f64, f64::max);
    let floor = scale * 1e-13 + f64::MIN_POSITIVE;
    let mut l = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let mut s = g.get(i, j);
            for t in 0..j {
                s -= l.get(i, t) * l.get(j, t);
            }
            if i == j {
                if s <= floor {
                    return Err(Error::RankDeficient);
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let k = l.rows();
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = b[i];
        for t in 0..i {
            s -= l.get(i, t) * y[t];
        }
        y[i] = s / l.get(i, i);
    }
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for t in i + 1..k {
            s -= l.get(t, i) * z[t];
        }
        z[i] = s / l.get(i, i);
    }
    z
}
