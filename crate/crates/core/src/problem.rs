//! Problem instances: the sensing matrix `A`, side constraints `Bx <= b`,
//! the correlating matrix `U`, the observation `y`, the residual budget
//! `epsilon`, and the three norm weights.
//!
//! A problem with zero weight on the linf and l1 residual terms and
//! `epsilon = 0` is standard basis pursuit; the other classic special cases
//! are tagged by [`SpecialCase`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, l1_norm, l2_norm, linf_norm, Matrix, RANK_TOL};

/// Nonnegative weights on the three residual norms; they sum to one.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// weight on `\|y - Ax\|_2`
    pub l2: f64,
    /// weight on `\|U^T(Ax-y)\|_inf`
    pub linf: f64,
    /// weight on `\|U^T(Ax-y)\|_1`
    pub l1: f64,
}

pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Weights at or below this magnitude count as zero when classifying.
pub const WEIGHT_ZERO_TOL: f64 = 1e-12;

impl Weights {
    pub fn new(l2: f64, linf: f64, l1: f64) -> Weights {
        Weights { l2, linf, l1 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.l2, self.linf, self.l1]
    }

    pub fn is_zero(v: f64) -> bool {
        v.abs() <= WEIGHT_ZERO_TOL
    }
}

/// The classic single-norm instances of the general model.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialCase {
    /// equality-constrained basis pursuit: weights (1,0,0), epsilon 0
    D1,
    /// quadratically constrained basis pursuit: weights (1,0,0)
    D2,
    /// l1 residual cap: weights (0,0,1)
    D3,
    /// Dantzig selector: weights (0,1,0)
    D4,
    /// anything else
    General,
}

/// One violated invariant found by [`ProblemData::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    WeightNegative,
    WeightSumNotOne(f64),
    EpsilonNegative,
    DimensionMismatch(String),
    ARankDeficient,
    URankDeficient,
    CRankDeficient,
    NonFiniteData,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::WeightNegative => write!(f, "weights must be nonnegative"),
            Violation::WeightSumNotOne(s) => write!(f, "weights sum != 1 (got {s})"),
            Violation::EpsilonNegative => write!(f, "epsilon must be nonnegative"),
            Violation::DimensionMismatch(d) => write!(f, "dimension mismatch: {d}"),
            Violation::ARankDeficient => write!(f, "A rank-deficient"),
            Violation::URankDeficient => write!(f, "U rank-deficient"),
            Violation::CRankDeficient => write!(f, "stacked [A; B] rank-deficient"),
            Violation::NonFiniteData => write!(f, "non-finite entry in problem data"),
        }
    }
}

/// Outcome of validation: empty means the instance is well formed.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A full problem instance.
///
/// `b_mat` may have zero rows, meaning no side constraints; the stacked
/// matrix `C = [A; B]` then reduces to `A`.
#[derive(Clone, Debug)]
pub struct ProblemData {
    /// sensing matrix, m x n with m <= n
    pub a: Matrix,
    /// side-constraint matrix, l x n with l < n (possibly l = 0)
    pub b_mat: Matrix,
    /// correlating matrix, m x h with m <= h
    pub u: Matrix,
    /// observation, length m
    pub y: Vec<f64>,
    /// side-constraint right-hand side, length l
    pub b_rhs: Vec<f64>,
    /// residual budget
    pub epsilon: f64,
    pub weights: Weights,
}

impl ProblemData {
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn l(&self) -> usize {
        self.b_mat.rows()
    }

    pub fn h(&self) -> usize {
        self.u.cols()
    }

    /// The stacked matrix `C = [A; B]`.
    pub fn stacked(&self) -> Matrix {
        if self.l() == 0 {
            self.a.clone()
        } else {
            self.a.vcat(&self.b_mat)
        }
    }

    /// Checks every structural invariant, returning all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let w = self.weights;
        if w.l2 < 0.0 || w.linf < 0.0 || w.l1 < 0.0 {
            v.push(Violation::WeightNegative);
        }
        let sum = w.l2 + w.linf + w.l1;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            v.push(Violation::WeightSumNotOne(sum));
        }
        if self.epsilon < 0.0 {
            v.push(Violation::EpsilonNegative);
        }
        if !self.epsilon.is_finite()
            || self.y.iter().any(|x| !x.is_finite())
            || self.b_rhs.iter().any(|x| !x.is_finite())
        {
            v.push(Violation::NonFiniteData);
        }
        let (m, n, l, h) = (self.m(), self.n(), self.l(), self.h());
        if self.y.len() != m {
            v.push(Violation::DimensionMismatch(format!(
                "y has length {}, expected {m}",
                self.y.len()
            )));
        }
        if self.b_rhs.len() != l {
            v.push(Violation::DimensionMismatch(format!(
                "b has length {}, expected {l}",
                self.b_rhs.len()
            )));
        }
        if self.b_mat.cols() != n && l > 0 {
            v.push(Violation::DimensionMismatch(format!(
                "B has {} columns, expected {n}",
                self.b_mat.cols()
            )));
        }
        if self.u.rows() != m {
            v.push(Violation::DimensionMismatch(format!(
                "U has {} rows, expected {m}",
                self.u.rows()
            )));
        }
        if m > n {
            v.push(Violation::DimensionMismatch(format!("m = {m} > n = {n}")));
        }
        if l >= n && n > 0 {
            v.push(Violation::DimensionMismatch(format!("l = {l} >= n = {n}")));
        }
        if m > h {
            v.push(Violation::DimensionMismatch(format!("m = {m} > h = {h}")));
        }
        // rank checks are meaningless if shapes are already off
        if v.iter().all(|x| !matches!(x, Violation::DimensionMismatch(_))) {
            if !linalg::full_row_rank(&self.a, RANK_TOL) {
                v.push(Violation::ARankDeficient);
            }
            if !linalg::full_row_rank(&self.u, RANK_TOL) {
                v.push(Violation::URankDeficient);
            }
            if self.l() > 0 && !linalg::full_row_rank(&self.stacked(), RANK_TOL) {
                v.push(Violation::CRankDeficient);
            }
        }
        ValidationReport { violations: v }
    }

    /// The correlated residual `U^T (Ax - y)`.
    pub fn residual_phi(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, expected {}",
                x.len(),
                self.n()
            )));
        }
        let mut ax = self.a.matvec(x);
        for (r, yi) in ax.iter_mut().zip(&self.y) {
            *r -= yi;
        }
        Ok(self.u.transpose_matvec(&ax))
    }

    /// The weighted residual `a1*\|y-Ax\|_2 + a2*\|phi\|_inf + a3*\|phi\|_1`.
    ///
    /// `x` is feasible iff this is at most `epsilon` and `Bx <= b` holds
    /// entrywise.
    pub fn constraint_value(&self, x: &[f64]) -> Result<f64> {
        let phi = self.residual_phi(x)?;
        let ax = self.a.matvec(x);
        let resid: Vec<f64> = self.y.iter().zip(&ax).map(|(yi, axi)| yi - axi).collect();
        let w = self.weights;
        Ok(w.l2 * l2_norm(&resid) + w.linf * linf_norm(&phi) + w.l1 * l1_norm(&phi))
    }

    /// Entrywise slack violation `max(Bx - b)^+` (zero when l = 0).
    pub fn side_violation(&self, x: &[f64]) -> f64 {
        if self.l() == 0 {
            return 0.0;
        }
        self.b_mat
            .matvec(x)
            .iter()
            .zip(&self.b_rhs)
            .fold(0.0_f64, |acc, (bx, b)| acc.max(bx - b))
    }

    /// Feasibility test at tolerance `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.constraint_value(x)? <= self.epsilon + tol && self.side_violation(x) <= tol)
    }

    /// Classifies the instance against the classic special cases.
    pub fn classify(&self) -> SpecialCase {
        let w = self.weights;
        let (z2, zinf, z1) = (
            Weights::is_zero(w.l2),
            Weights::is_zero(w.linf),
            Weights::is_zero(w.l1),
        );
        match (z2, zinf, z1) {
            (false, true, true) if self.epsilon == 0.0 => SpecialCase::D1,
            (false, true, true) => SpecialCase::D2,
            (true, true, false) => SpecialCase::D3,
            (true, false, true) => SpecialCase::D4,
            _ => SpecialCase::General,
        }
    }
}

/// Builds one of the classic special cases, with no side constraints.
///
/// The tag fixes the weights; `D1` additionally requires `epsilon = 0`.
pub fn make_special_case(
    tag: SpecialCase,
    a: Matrix,
    u: Matrix,
    y: Vec<f64>,
    epsilon: f64,
) -> Result<ProblemData> {
    let weights = match tag {
        SpecialCase::D1 => {
            if epsilon != 0.0 {
                return Err(Error::InvalidInput(
                    "equality-constrained case requires epsilon = 0".into(),
                ));
            }
            Weights::new(1.0, 0.0, 0.0)
        }
        SpecialCase::D2 => Weights::new(1.0, 0.0, 0.0),
        SpecialCase::D3 => Weights::new(0.0, 0.0, 1.0),
        SpecialCase::D4 => Weights::new(0.0, 1.0, 0.0),
        SpecialCase::General => {
            return Err(Error::InvalidInput(
                "no canonical weights for the general case".into(),
            ))
        }
    };
    let n = a.cols();
    let p = ProblemData {
        a,
        b_mat: Matrix::empty(n),
        u,
        y,
        b_rhs: Vec::new(),
        epsilon,
        weights,
    };
    let report = p.validate();
    if !report.is_valid() {
        return Err(Error::InvalidInput(format!(
            "inconsistent inputs: {}",
            report
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    Ok(p)
}

/// l1 error of the best k-term approximation: the sum of the n-k smallest
/// magnitudes of `x`.
pub fn best_k_term_error(x: &[f64], k: usize) -> Result<f64> {
    if k > x.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds dimension {}",
            x.len()
        )));
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(mags[..x.len() - k].iter().sum())
}

// ---------------------------------------------------------------------------
// JSON schema

/// On-disk problem format. `B` and `b` may be omitted for l = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b_mat: Option<Vec<Vec<f64>>>,
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    pub epsilon: f64,
    /// the weight triple (a1, a2, a3)
    pub a_weights: [f64; 3],
}

// serde cannot have two fields named "a"; map the weight key manually
impl ProblemJson {
    pub fn from_value(v: &serde_json::Value) -> Result<ProblemJson> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::InvalidInput("problem JSON must be an object".into()))?;
        let get = |k: &str| {
            obj.get(k)
                .ok_or_else(|| Error::InvalidInput(format!("missing key \"{k}\"")))
        };
        let a: Vec<Vec<f64>> = serde_json::from_value(get("A")?.clone())?;
        let u: Vec<Vec<f64>> = serde_json::from_value(get("U")?.clone())?;
        let y: Vec<f64> = serde_json::from_value(get("y")?.clone())?;
        let epsilon: f64 = serde_json::from_value(get("epsilon")?.clone())?;
        let a_weights: [f64; 3] = serde_json::from_value(get("a")?.clone())?;
        let b_mat: Option<Vec<Vec<f64>>> = match obj.get("B") {
            Some(x) => Some(serde_json::from_value(x.clone())?),
            None => None,
        };
        let b: Option<Vec<f64>> = match obj.get("b") {
            Some(x) => Some(serde_json::from_value(x.clone())?),
            None => None,
        };
        Ok(ProblemJson {
            a,
            b_mat,
            u,
            y,
            b,
            epsilon,
            a_weights,
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("A".into(), serde_json::json!(self.a));
        if let Some(bm) = &self.b_mat {
            obj.insert("B".into(), serde_json::json!(bm));
        }
        obj.insert("U".into(), serde_json::json!(self.u));
        obj.insert("y".into(), serde_json::json!(self.y));
        if let Some(b) = &self.b {
            obj.insert("b".into(), serde_json::json!(b));
        }
        obj.insert("epsilon".into(), serde_json::json!(self.epsilon));
        obj.insert("a".into(), serde_json::json!(self.a_weights));
        serde_json::Value::Object(obj)
    }
}

impl ProblemData {
    /// Parses the JSON problem schema; structural invariants are checked.
    pub fn from_json_str(s: &str) -> Result<ProblemData> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let pj = ProblemJson::from_value(&v)?;
        ProblemData::from_json(pj)
    }

    /// Builds the instance, rejecting structural defects (shapes, weights,
    /// non-finite data). Rank deficiencies are deliberately NOT rejected
    /// here: they surface through [`ProblemData::validate`] and, for an
    /// inconsistent instance, through the solver's infeasibility report.
    pub fn from_json(pj: ProblemJson) -> Result<ProblemData> {
        let a = Matrix::from_rows(&pj.a)?;
        let n = a.cols();
        let b_mat = match pj.b_mat {
            Some(rows) if !rows.is_empty() => Matrix::from_rows(&rows)?,
            _ => Matrix::empty(n),
        };
        let u = Matrix::from_rows(&pj.u)?;
        let p = ProblemData {
            a,
            b_mat,
            u,
            y: pj.y,
            b_rhs: pj.b.unwrap_or_default(),
            epsilon: pj.epsilon,
            weights: Weights::new(pj.a_weights[0], pj.a_weights[1], pj.a_weights[2]),
        };
        let report = p.validate();
        let blocking: Vec<String> = report
            .violations
            .iter()
            .filter(|v| {
                !matches!(
                    v,
                    Violation::ARankDeficient
                        | Violation::URankDeficient
                        | Violation::CRankDeficient
                )
            })
            .map(|v| v.to_string())
            .collect();
        if !blocking.is_empty() {
            return Err(Error::InvalidInput(format!(
                "invalid problem: {}",
                blocking.join("; ")
            )));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> ProblemJson {
        let mat_rows = |m: &Matrix| (0..m.rows()).map(|i| m.row(i).to_vec()).collect::<Vec<_>>();
        ProblemJson {
            a: mat_rows(&self.a),
            b_mat: if self.l() > 0 {
                Some(mat_rows(&self.b_mat))
            } else {
                None
            },
            u: mat_rows(&self.u),
            y: self.y.clone(),
            b: if self.l() > 0 {
                Some(self.b_rhs.clone())
            } else {
                None
            },
            epsilon: self.epsilon,
            a_weights: self.weights.as_array(),
        }
    }
}
