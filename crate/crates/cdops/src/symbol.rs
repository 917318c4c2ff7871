//! Fourier symbol of an n-periodic band operator.
//!
//! Regrouping sequence indices as `l = qn + j` turns an n-periodic band
//! operator into a block-Laurent operator with finitely many `nd x nd`
//! coefficients `T_q`; the symbol is the circle-parameterized matrix
//! `T(M) = sum_q M^q T_q`. The scalars `M` live in the center-adjoined
//! complex plane, so they commute and associate with everything and the
//! product rule `symbol(AB) = symbol(A) symbol(B)` holds exactly at block
//! level.
//!
//! The per-fiber transform of Def-37 type (`Y -> Y^n`, evaluating
//! `B(D(M)x)` on one period) is provided as a cross-check view; it agrees
//! with the blocked evaluation after the index regrouping, which the tests
//! pin down numerically.

use crate::algebra::CdComplex;
use crate::error::{Error, Result};
use crate::matrix::{CdMatrix, CdVector};
use crate::seq::BandPeriodicOp;
use std::collections::BTreeMap;

/// A point `M = e^{theta i}` on the unit circle of the complexified center.
#[derive(Debug, Clone)]
pub struct CirclePoint {
    pub theta: f64,
    pub value: CdComplex,
}

impl CirclePoint {
    pub fn from_theta(level: u32, theta: f64) -> Self {
        CirclePoint {
            theta,
            value: CdComplex::circle(level, theta),
        }
    }

    /// Wraps an explicit scalar, enforcing that it is a `C_i` scalar of
    /// modulus one (within 1e-12).
    pub fn from_value(value: CdComplex) -> Result<Self> {
        let re0 = value.re.coords[0];
        let im0 = value.im.coords[0];
        let off_center: f64 = value
            .re
            .coords
            .iter()
            .skip(1)
            .chain(value.im.coords.iter().skip(1))
            .map(|c| c.abs())
            .sum();
        if off_center > 1e-12 {
            return Err(Error::Domain("circle point must be a C_i scalar".into()));
        }
        let r = (re0 * re0 + im0 * im0).sqrt();
        if (r - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("|M| = {r} is not 1")));
        }
        Ok(CirclePoint {
            theta: im0.atan2(re0).rem_euclid(2.0 * std::f64::consts::PI),
            value,
        })
    }

    /// `M^q` computed as `e^{q theta i}`, staying exactly on the circle.
    pub fn power(&self, level: u32, q: i64) -> CdComplex {
        CdComplex::circle(level, self.theta * q as f64)
    }
}

/// Uniform circle grid `theta_r = 2 pi r / n_samples`.
pub fn circle_grid(n_samples: usize) -> Vec<f64> {
    (0..n_samples)
        .map(|r| 2.0 * std::f64::consts::PI * r as f64 / n_samples as f64)
        .collect()
}

/// Blocked Laurent coefficients of an n-periodic band operator.
#[derive(Debug, Clone)]
pub struct BlockedCoeffs {
    pub level: u32,
    pub d: usize,
    pub n: usize,
    /// `coeffs[q + q_max]` is the `nd x nd` block coefficient `T_q`.
    pub q_max: i64,
    pub coeffs: Vec<CdMatrix>,
}

impl BlockedCoeffs {
    pub fn coeff(&self, q: i64) -> CdMatrix {
        if q.abs() > self.q_max {
            return CdMatrix::zero(self.level, self.n * self.d, self.n * self.d);
        }
        self.coeffs[(q + self.q_max) as usize].clone()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &CdMatrix)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, m)| (i as i64 - self.q_max, m))
    }
}

/// Regroups the band blocks into block-Laurent coefficients:
/// `T_q[(j, j')] = C[j][qn + j' - j]` where the offset lies in the band.
pub fn block(op: &BandPeriodicOp) -> BlockedCoeffs {
    let n = op.n;
    let d = op.d;
    let q_max = ((op.band + n - 1) / n) as i64;
    let mut coeffs = Vec::with_capacity((2 * q_max + 1) as usize);
    for q in -q_max..=q_max {
        let mut t = CdMatrix::zero(op.level, n * d, n * d);
        for j in 0..n {
            for j2 in 0..n {
                let m = q * n as i64 + j2 as i64 - j as i64;
                if m.unsigned_abs() as usize > op.band {
                    continue;
                }
                let blk = op.block(j, m);
                for a in 0..d {
                    for b in 0..d {
                        *t.entry_mut(j * d + a, j2 * d + b) = blk.entry(a, b).clone();
                    }
                }
            }
        }
        coeffs.push(t);
    }
    BlockedCoeffs {
        level: op.level,
        d,
        n,
        q_max,
        coeffs,
    }
}

/// Inverse of [`block`]: rebuilds the band operator from block-Laurent
/// coefficients. Exact (`reconstruct(block(B)) == B` up to band padding).
pub fn reconstruct(coeffs: &BlockedCoeffs) -> Result<BandPeriodicOp> {
    let n = coeffs.n;
    let d = coeffs.d;
    // find the band radius actually carried by the coefficients
    let mut band = 0i64;
    for (q, t) in coeffs.iter() {
        for j in 0..n {
            for j2 in 0..n {
                let m = q * n as i64 + j2 as i64 - j as i64;
                let mut nonzero = false;
                for a in 0..d {
                    for b in 0..d {
                        if !t.entry(j * d + a, j2 * d + b).is_zero() {
                            nonzero = true;
                        }
                    }
                }
                if nonzero {
                    band = band.max(m.abs());
                }
            }
        }
    }
    let mut op = BandPeriodicOp::zero(coeffs.level, d, n, band as usize);
    for (q, t) in coeffs.iter() {
        for j in 0..n {
            for j2 in 0..n {
                let m = q * n as i64 + j2 as i64 - j as i64;
                if m.abs() > band {
                    continue;
                }
                let mut blk = op.block(j, m).clone();
                let mut any = false;
                for a in 0..d {
                    for b in 0..d {
                        let e = t.entry(j * d + a, j2 * d + b);
                        if !e.is_zero() {
                            *blk.entry_mut(a, b) = e.clone();
                            any = true;
                        }
                    }
                }
                if any {
                    op.set_block(j, m, blk)?;
                }
            }
        }
    }
    Ok(op)
}

/// Symbol value `T(M) = sum_q M^q T_q` at a circle point.
pub fn symbol_eval(op: &BandPeriodicOp, point: &CirclePoint) -> Result<CdMatrix> {
    let coeffs = block(op);
    eval_coeffs(&coeffs, point)
}

/// Evaluates precomputed blocked coefficients at a circle point.
pub fn eval_coeffs(coeffs: &BlockedCoeffs, point: &CirclePoint) -> Result<CdMatrix> {
    let nd = coeffs.n * coeffs.d;
    let mut acc = CdMatrix::zero(coeffs.level, nd, nd);
    for (q, t) in coeffs.iter() {
        if t.is_zero() {
            continue;
        }
        let w = point.power(coeffs.level, q);
        acc = acc.add(&t.scale_left(&w)?)?;
    }
    Ok(acc)
}

/// Per-fiber transform view: applies the operator to the geometric sequence
/// `k -> M^k x` and reads off one period, returning the `n` fiber values
/// `B(D(M)x)(j)` for `j = 0..n-1`. Exact for band operators (the sum is
/// finite).
pub fn fiber_transform(
    op: &BandPeriodicOp,
    point: &CirclePoint,
    x: &CdVector,
) -> Result<Vec<CdVector>> {
    if x.dim() != op.d {
        return Err(Error::Dimension("fiber dimension mismatch".into()));
    }
    let k = op.band as i64;
    let mut out = Vec::with_capacity(op.n);
    for j in 0..op.n as i64 {
        let mut acc = CdVector::zero(op.level, op.d);
        for s in (j - k)..=(j + k) {
            let blk = op.matrix_entry(j, s);
            if blk.is_zero() {
                continue;
            }
            let ms = point.power(op.level, s);
            let xs = CdVector {
                entries: x
                    .entries
                    .iter()
                    .map(|e| ms.mul(e))
                    .collect::<Result<_>>()?,
            };
            acc = acc.add(&blk.matvec(&xs)?)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Windowed matrix of the circle conjugation `D(M) B D(M*)`:
/// entries `(M^s I) B_{s,p} (M^{-p} I) = M^{s-p} B_{s,p}` for `s, p` in
/// `[lo, hi]`, as one dense matrix over the window.
pub fn breve_eval(op: &BandPeriodicOp, point: &CirclePoint, lo: i64, hi: i64) -> Result<CdMatrix> {
    let len = (hi - lo + 1) as usize;
    let d = op.d;
    let mut out = CdMatrix::zero(op.level, len * d, len * d);
    for (si, s) in (lo..=hi).enumerate() {
        for (pi, p) in (lo..=hi).enumerate() {
            let blk = op.matrix_entry(s, p);
            if blk.is_zero() {
                continue;
            }
            let w = point.power(op.level, s - p);
            let scaled = blk.scale_left(&w)?;
            for a in 0..d {
                for b in 0..d {
                    *out.entry_mut(si * d + a, pi * d + b) = scaled.entry(a, b).clone();
                }
            }
        }
    }
    Ok(out)
}

/// Discrete Fourier coefficient of symbol samples on the uniform grid
/// `theta_r = 2 pi r / N`: `(1/N) sum_r e^{-k theta_r i} S_r`.
///
/// Spectrally exact for trigonometric polynomials of degree below `N/2`;
/// the returned flag marks requests at or beyond the aliasing limit.
pub fn fourier_coeff(samples: &[CdMatrix], k: i64) -> Result<(CdMatrix, bool)> {
    if samples.is_empty() {
        return Err(Error::Precondition("no symbol samples".into()));
    }
    let n = samples.len();
    let level = samples[0].level;
    let aliased = k.unsigned_abs() as usize >= n / 2 + usize::from(n % 2 != 0);
    let mut acc = CdMatrix::zero(level, samples[0].rows, samples[0].cols);
    for (r, s) in samples.iter().enumerate() {
        let theta = -2.0 * std::f64::consts::PI * (k as f64) * (r as f64) / n as f64;
        let w = CdComplex::circle(level, theta);
        acc = acc.add(&s.scale_left(&w)?)?;
    }
    Ok((acc.scale_real(1.0 / n as f64), aliased))
}

/// Fejer-weighted partial sum of blocked coefficients at a circle point:
/// `sum_{|k| <= m} (1 - |k|/(m+1)) M^k T_k`.
pub fn cesaro_sum(
    coeffs: &BTreeMap<i64, CdMatrix>,
    m: usize,
    point: &CirclePoint,
) -> Result<CdMatrix> {
    let (_, first) = coeffs
        .iter()
        .next()
        .ok_or_else(|| Error::Precondition("no coefficients".into()))?;
    let level = first.level;
    let mut acc = CdMatrix::zero(level, first.rows, first.cols);
    for (&k, t) in coeffs.iter() {
        if k.unsigned_abs() as usize > m {
            continue;
        }
        let weight = 1.0 - k.unsigned_abs() as f64 / (m as f64 + 1.0);
        let w = point.power(level, k).scale(weight);
        acc = acc.add(&t.scale_left(&w)?)?;
    }
    Ok(acc)
}
