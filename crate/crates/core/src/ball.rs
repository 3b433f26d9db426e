//! Circumscribing polytopes for the Euclidean unit ball.
//!
//! A polytope here is an intersection of half-spaces with unit outward
//! normals, `P = { z : d^T z <= 1 for every direction d }`. Every such
//! half-space supports the unit ball, so `B \subseteq P` holds by
//! construction for any direction set. The first `2m` directions are always
//! the signed coordinate axes; extra directions tighten the approximation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{l2_norm, Matrix};

/// Chordal distance below which two unit directions count as duplicates.
const DEDUP_TOL: f64 = 1e-9;

/// A polytope containing the unit ball, stored as the matrix whose columns
/// are the unit facet normals. Membership is `M^T z <= 1` entrywise.
#[derive(Clone, Debug)]
pub struct Polytope {
    /// m x N; columns 0..m are +e_j, columns m..2m are -e_j.
    directions: Matrix,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.directions.rows()
    }

    /// Number of facets N.
    pub fn facet_count(&self) -> usize {
        self.directions.cols()
    }

    /// The m x N matrix of facet normals.
    pub fn direction_matrix(&self) -> &Matrix {
        &self.directions
    }

    pub fn direction(&self, j: usize) -> Vec<f64> {
        self.directions.col(j)
    }

    /// True iff `M^T z <= 1` entrywise, with a small slack for rounding.
    pub fn membership(&self, z: &[f64]) -> Result<bool> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, polytope lives in dimension {}",
                z.len(),
                self.dim()
            )));
        }
        let products = self.directions.transpose_matvec(z);
        Ok(products.iter().all(|&v| v <= 1.0 + 1e-12))
    }

    /// Exact circumscription gap `max_{z in P} \|z\|_2 - 1`, by enumerating
    /// the vertices as intersections of m facet hyperplanes. Limited to
    /// dimension 3; use [`Polytope::circumscription_gap_estimate`] beyond.
    pub fn circumscription_gap(&self) -> Result<f64> {
        let m = self.dim();
        if m > 3 {
            return Err(Error::EnumerationTooLarge(m, 3));
        }
        let n = self.facet_count();
        let mut best = 0.0_f64;
        let mut subset = vec![0usize; m];
        let mut found = false;
        enumerate_subsets(n, m, &mut subset, 0, 0, &mut |idx| {
            let mut a = Matrix::zeros(m, m);
            for (r, &j) in idx.iter().enumerate() {
                for i in 0..m {
                    a.set(r, i, self.directions.get(i, j));
                }
            }
            if a.determinant().abs() < 1e-12 {
                return;
            }
            let inv = match a.inverse() {
                Ok(v) => v,
                Err(_) => return,
            };
            let vertex = inv.matvec(&vec![1.0; m]);
            let products = self.directions.transpose_matvec(&vertex);
            if products.iter().all(|&v| v <= 1.0 + 1e-9) {
                best = best.max(l2_norm(&vertex));
                found = true;
            }
        });
        if !found {
            return Err(Error::NumericalFailure(
                "no polytope vertex found".into(),
            ));
        }
        Ok(best - 1.0)
    }

    /// Sampling estimate of the circumscription gap for higher dimensions:
    /// the boundary point along a direction `d` has norm `1 / max_j d_j^T
    /// direction_j`, and the maximum over samples lower-bounds the true gap.
    pub fn circumscription_gap_estimate(&self, samples: usize, seed: u64) -> f64 {
        let m = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0_f64;
        for _ in 0..samples {
            let d = random_unit_vector(&mut rng, m);
            let gauge = self
                .directions
                .transpose_matvec(&d)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            if gauge > 1e-12 {
                best = best.max(1.0 / gauge);
            }
        }
        (best - 1.0).max(0.0)
    }
}

/// Builds the axis-aligned half-spaces plus up to `budget` extra unit
/// directions.
///
/// * `m = 1`: every unit direction is an axis, so the result is exactly
///   the interval `[-1, 1]`.
/// * `m = 2`: directions come from the uniform angular grid of size
///   `2m + budget`; grid points landing on an axis are dropped as
///   duplicates, so budgets that are multiples of four yield a uniform
///   polygon containing all four axis directions.
/// * `m >= 3`: deterministic pseudo-random unit directions from `seed`.
pub fn build_p0(m: usize, budget: usize, seed: u64) -> Result<Polytope> {
    if m < 1 {
        return Err(Error::InvalidInput("polytope dimension must be >= 1".into()));
    }
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * m + budget);
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        dirs.push(e);
    }
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = -1.0;
        dirs.push(e);
    }

    let mut accepted = 0usize;
    let push_dedup = |dirs: &mut Vec<Vec<f64>>, cand: Vec<f64>, accepted: &mut usize| {
        if *accepted >= budget {
            return;
        }
        let dup = dirs.iter().any(|d| chordal_distance(d, &cand) < DEDUP_TOL);
        if !dup {
            dirs.push(cand);
            *accepted += 1;
        }
    };

    match m {
        1 => {} // +-1 already present; nothing new exists
        2 => {
            let grid = 2 * m + budget;
            for i in 0..grid {
                let angle = std::f64::consts::TAU * (i as f64) / (grid as f64);
                push_dedup(&mut dirs, vec![angle.cos(), angle.sin()], &mut accepted);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut attempts = 0usize;
            while accepted < budget && attempts < 100 * (budget + 1) {
                attempts += 1;
                let cand = random_unit_vector(&mut rng, m);
                push_dedup(&mut dirs, cand, &mut accepted);
            }
        }
    }

    let mut mat = Matrix::zeros(m, dirs.len());
    for (j, d) in dirs.iter().enumerate() {
        for i in 0..m {
            mat.set(i, j, d[i]);
        }
    }
    Ok(Polytope { directions: mat })
}

fn chordal_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let norm = l2_norm(&v);
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Visits all `k`-subsets of `0..n` in lexicographic order.
fn enumerate_subsets(
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
        enumerate_subsets(n, k, buf, depth + 1, j + 1, visit);
    }
}
