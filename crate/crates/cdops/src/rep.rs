//! Dense real-matrix workhorse routines shared by inversion, spectra and
//! the kernel pipeline: smallest singular values, complex eigenvalues,
//! a pivoted LU usable for both `Ax = b` and `A^T x = b`, and bottleneck
//! matching of eigenvalue multisets.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Smallest singular value via full SVD; intended for the moderate
/// dimensions of symbol representations.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Complex eigenvalues (with multiplicity) of a real square matrix.
pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    let eigs = m.clone().complex_eigenvalues();
    let out: Vec<(f64, f64)> = eigs.iter().map(|z| (z.re, z.im)).collect();
    if out.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::Numerical(format!(
            "eigen solver failed on a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(out)
}

/// Row-major pivoted LU of a square matrix, with forward and transposed
/// solves from the same factorization. Used where nalgebra's dense
/// factorizations would be the bottleneck (the periodized kernel oracle).
pub struct PivotedLu {
    n: usize,
    /// Combined L (unit lower, below diagonal) and U (upper) factors.
    lu: Vec<f64>,
    /// `perm[i]` = original row index stored at factored row `i`.
    perm: Vec<usize>,
}

impl PivotedLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // partial pivot
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for r in (k + 1)..n {
                let v = a[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for r in (k + 1)..n {
                let f = a[r * n + k] / pivot;
                a[r * n + k] = f;
                if f != 0.0 {
                    let (head, tail) = a.split_at_mut(r * n);
                    let krow = &head[k * n + k + 1..k * n + n];
                    let rrow = &mut tail[k + 1..n];
                    for (rr, kk) in rrow.iter_mut().zip(krow) {
                        *rr -= f * kk;
                    }
                }
            }
        }
        Ok(PivotedLu { n, lu: a, perm })
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    /// Solves `A^T x = b` in place using the same factors.
    pub fn solve_transposed(&self, b: &mut [f64]) {
        let n = self.n;
        // U^T z = b (forward, with U's diagonal)
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * z[j];
            }
            z[i] = s / self.lu[i * n + i];
        }
        // L^T w = z (backward, unit diagonal)
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= self.lu[j * n + i] * z[j];
            }
            z[i] = s;
        }
        for i in 0..n {
            b[self.perm[i]] = z[i];
        }
    }
}

/// Smallest singular value of a large square matrix by inverse power
/// iteration on `(A^T A)^{-1}` through one LU factorization.
pub fn smallest_singular_value_lu(a: Vec<f64>, n: usize) -> Result<f64> {
    let lu = match PivotedLu::factor(a, n) {
        Ok(lu) => lu,
        Err(Error::Singular) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i * 2654435761 + 12345) % 1000) as f64 / 1000.0 - 0.5)
        .collect();
    normalize(&mut v);
    let mut lambda_prev = 0.0f64;
    for it in 0..400 {
        let mut w = v.clone();
        lu.solve_transposed(&mut w);
        lu.solve(&mut w);
        let lambda = norm(&w);
        if !lambda.is_finite() || lambda == 0.0 {
            return Ok(0.0);
        }
        v = w;
        normalize(&mut v);
        if it > 4 && (lambda - lambda_prev).abs() <= 1e-9 * lambda {
            lambda_prev = lambda;
            break;
        }
        lambda_prev = lambda;
    }
    Ok(1.0 / lambda_prev.sqrt())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Maximum-norm feasibility matching: is there a perfect pairing of the two
/// point multisets with every matched distance at most `tol`?
pub fn matching_feasible(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    let adj: Vec<Vec<usize>> = a
        .iter()
        .map(|&(x, y)| {
            b.iter()
                .enumerate()
                .filter(|(_, &(u, v))| ((x - u).powi(2) + (y - v).powi(2)).sqrt() <= tol)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    // Kuhn's augmenting-path matching
    let mut match_b: Vec<Option<usize>> = vec![None; n];
    fn try_augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_b: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if match_b[j].is_none()
                    || try_augment(match_b[j].unwrap(), adj, seen, match_b)
                {
                    match_b[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !try_augment(i, &adj, &mut seen, &mut match_b) {
            return false;
        }
    }
    true
}

/// Bottleneck matching distance between two equally sized point multisets:
/// the smallest `t` such that a perfect pairing with all distances `<= t`
/// exists. Returns infinity for mismatched sizes.
pub fn bottleneck_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let mut dists: Vec<f64> = a
        .iter()
        .flat_map(|&(x, y)| {
            b.iter()
                .map(move |&(u, v)| ((x - u).powi(2) + (y - v).powi(2)).sqrt())
        })
        .collect();
    dists.sort_by(|p, q| p.partial_cmp(q).unwrap());
    dists.dedup();
    // binary search over candidate thresholds
    let mut lo = 0usize;
    let mut hi = dists.len() - 1;
    if !matching_feasible(a, b, dists[hi]) {
        return f64::INFINITY;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if matching_feasible(a, b, dists[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    dists[lo]
}
