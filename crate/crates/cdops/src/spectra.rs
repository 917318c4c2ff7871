//! Spectrum estimation for periodic band operators: pointwise symbol
//! spectra, their union over the circle, and the block-circulant truncation
//! oracle that pins the union formula down at finite size.
//!
//! "Spectrum" here is the eigenvalue multiset of the real linear
//! representation, reported in the complexified center plane. For
//! quaternionic scalars this is the conjugation-closed slice spectrum; it is
//! exactly what the finite periodization produces, which keeps the
//! union-over-circle formula testable as a multiset identity.

use crate::algebra::CdComplex;
use crate::error::{Error, Result};
use crate::matrix::CdMatrix;
use crate::rep;
use crate::seq::BandPeriodicOp;
use crate::symbol::{block, circle_grid, eval_coeffs, CirclePoint};
use serde::Serialize;

/// One sampled point of a spectrum cloud.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSample {
    /// Circle angles of the sample (one entry per torus axis; a single entry
    /// for operators on the plain circle).
    pub thetas: Vec<f64>,
    /// Eigenvalues with multiplicity, as (re, im) in the center plane.
    pub eigs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CloudMeta {
    pub level: u32,
    pub d: usize,
    pub n: usize,
    pub band: usize,
    pub sample_count: usize,
}

/// Sampled circle (or torus) points with the eigenvalue multiset of each
/// symbol value, plus their union.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumCloud {
    pub samples: Vec<SpectrumSample>,
    /// Flattened union, multiplicity retained.
    pub union: Vec<(f64, f64)>,
    pub meta: CloudMeta,
}

impl SpectrumCloud {
    fn from_samples(samples: Vec<SpectrumSample>, meta: CloudMeta) -> Self {
        let union = samples.iter().flat_map(|s| s.eigs.iter().copied()).collect();
        SpectrumCloud {
            samples,
            union,
            meta,
        }
    }
}

/// Eigenvalues (with multiplicity) of one symbol value through its real
/// representation.
pub fn pointwise_spectrum(sym: &CdMatrix) -> Result<Vec<(f64, f64)>> {
    if sym.rows != sym.cols {
        return Err(Error::Precondition("symbol matrix must be square".into()));
    }
    rep::complex_eigenvalues(&sym.to_real_rep())
}

/// Cloud of pointwise spectra over a uniform circle grid of power-of-two
/// size at least the Nyquist floor `4(Q+1)`.
pub fn operator_spectrum(op: &BandPeriodicOp, n_samples: usize) -> Result<SpectrumCloud> {
    let q_max = (op.band + op.n - 1) / op.n;
    let n = n_samples.max(4 * (q_max + 1)).max(8).next_power_of_two();
    let coeffs = block(op);
    let mut samples = Vec::with_capacity(n);
    for theta in circle_grid(n) {
        let sym = eval_coeffs(&coeffs, &CirclePoint::from_theta(op.level, theta))?;
        samples.push(SpectrumSample {
            thetas: vec![theta],
            eigs: pointwise_spectrum(&sym)?,
        });
    }
    Ok(SpectrumCloud::from_samples(
        samples,
        CloudMeta {
            level: op.level,
            d: op.d,
            n: op.n,
            band: op.band,
            sample_count: n,
        },
    ))
}

/// Dense `N`-position periodization of a band operator: the block matrix on
/// positions `0..N` with the band wrapped around modulo `N`.
///
/// Requires `N` to be a multiple of the period with `N/n > 2Q` so distinct
/// block offsets do not collide under the wrap.
pub fn periodization(op: &BandPeriodicOp, n_positions: usize) -> Result<CdMatrix> {
    if n_positions % op.n != 0 {
        return Err(Error::Precondition(format!(
            "periodization length {} is not a multiple of the period {}",
            n_positions, op.n
        )));
    }
    let q_max = ((op.band + op.n - 1) / op.n) as i64;
    let r = (n_positions / op.n) as i64;
    if r <= 2 * q_max {
        return Err(Error::Precondition(format!(
            "need N/n > 2Q: {} blocks vs Q = {}",
            r, q_max
        )));
    }
    let d = op.d;
    let np = n_positions as i64;
    let mut dense = CdMatrix::zero(op.level, n_positions * d, n_positions * d);
    for l in 0..np {
        for m in -(op.band as i64)..=(op.band as i64) {
            let blk = op.block(l.rem_euclid(op.n as i64) as usize, m);
            if blk.is_zero() {
                continue;
            }
            let s = (l + m).rem_euclid(np);
            for a in 0..d {
                for b in 0..d {
                    let cur = dense
                        .entry((l as usize) * d + a, (s as usize) * d + b)
                        .add(blk.entry(a, b))?;
                    *dense.entry_mut((l as usize) * d + a, (s as usize) * d + b) = cur;
                }
            }
        }
    }
    Ok(dense)
}

/// Eigenvalues of the dense real representation of the `N`-position
/// periodization; as multisets these equal the union of the pointwise
/// spectra at the `N/n`-th roots of unity.
pub fn circulant_oracle(op: &BandPeriodicOp, n_positions: usize) -> Result<Vec<(f64, f64)>> {
    let dense = periodization(op, n_positions)?;
    rep::complex_eigenvalues(&dense.to_real_rep())
}

/// Union of pointwise spectra over exactly the roots of unity matching an
/// `N`-position periodization.
pub fn spectrum_at_roots(op: &BandPeriodicOp, n_positions: usize) -> Result<Vec<(f64, f64)>> {
    if n_positions % op.n != 0 {
        return Err(Error::Precondition("N must be a multiple of n".into()));
    }
    let r = n_positions / op.n;
    let coeffs = block(op);
    let mut union = Vec::new();
    for k in 0..r {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / r as f64;
        let sym = eval_coeffs(&coeffs, &CirclePoint::from_theta(op.level, theta))?;
        union.extend(pointwise_spectrum(&sym)?);
    }
    Ok(union)
}

/// Distance from `lambda` to the sampled spectrum in the resolvent sense:
/// the minimum over circle samples of the smallest singular value of
/// `rep(symbol(M) - lambda I)`.
///
/// The reported spectrum is the conjugation-closed slice, so the margin is
/// taken over the conjugate pair `{lambda, conj(lambda)}` — the two
/// represent the same slice point, and only one of them makes the real
/// representation singular in general.
pub fn resolvent_margin(
    op: &BandPeriodicOp,
    lambda: (f64, f64),
    n_samples: usize,
) -> Result<f64> {
    let q_max = (op.band + op.n - 1) / op.n;
    let n = n_samples.max(4 * (q_max + 1)).max(8).next_power_of_two();
    let coeffs = block(op);
    let nd = op.n * op.d;
    let shifts = [
        CdMatrix::scalar(
            op.level,
            nd,
            &CdComplex::from_complex(op.level, lambda.0, lambda.1),
        ),
        CdMatrix::scalar(
            op.level,
            nd,
            &CdComplex::from_complex(op.level, lambda.0, -lambda.1),
        ),
    ];
    let mut margin = f64::INFINITY;
    for theta in circle_grid(n) {
        let sym = eval_coeffs(&coeffs, &CirclePoint::from_theta(op.level, theta))?;
        for shift in &shifts {
            let shifted = sym.sub(shift)?;
            margin = margin.min(rep::smallest_singular_value(&shifted.to_real_rep()));
        }
    }
    Ok(margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CdNumber;
    use crate::testgen;
    use std::f64::consts::PI;

    #[test]
    fn zero_symbol_has_zero_spectrum() {
        let z = CdMatrix::zero(2, 2, 2);
        for (re, im) in pointwise_spectrum(&z).unwrap() {
            assert!(re.abs() < 1e-14 && im.abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_quaternion_spectrum_closed_form() {
        // c = a + b i_1: left multiplication has eigenvalues a +- |b| i,
        // each filling half the representation dimension
        let a = 0.7;
        let b = -1.3;
        let mut c = CdNumber::zero(2);
        c.coords[0] = a;
        c.coords[1] = b;
        let sym = CdMatrix::scalar(2, 1, &CdComplex::from_re(c));
        let eigs = pointwise_spectrum(&sym).unwrap();
        assert_eq!(eigs.len(), 8);
        let mut plus = 0;
        let mut minus = 0;
        for (re, im) in eigs {
            assert!((re - a).abs() < 1e-10);
            assert!((im.abs() - b.abs()).abs() < 1e-10);
            if im > 0.0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
        assert_eq!(plus, 4);
        assert_eq!(minus, 4);
    }

    #[test]
    fn unit_scalar_spectrum_on_circle() {
        let m = CdComplex::circle(2, 1.234);
        let sym = CdMatrix::scalar(2, 2, &m);
        for (re, im) in pointwise_spectrum(&sym).unwrap() {
            assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugation_symmetry_of_samples() {
        let mut rng = testgen::rng(90);
        let op = testgen::random_band_op(&mut rng, 2, 1, 2, 1, 1.0);
        let cloud = operator_spectrum(&op, 8).unwrap();
        for s in &cloud.samples {
            let conj: Vec<(f64, f64)> = s.eigs.iter().map(|&(a, b)| (a, -b)).collect();
            assert!(rep::matching_feasible(&s.eigs, &conj, 1e-8));
        }
        // union cardinality = sum of per-sample counts
        let total: usize = cloud.samples.iter().map(|s| s.eigs.len()).sum();
        assert_eq!(cloud.union.len(), total);
    }

    #[test]
    fn shift_spectrum_fills_unit_circle() {
        let s = BandPeriodicOp::shift(2, 1, 1);
        let cloud = operator_spectrum(&s, 32).unwrap();
        for (re, im) in &cloud.union {
            assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-9);
        }
        let z = BandPeriodicOp::zero(2, 1, 1, 0);
        let cloud = operator_spectrum(&z, 8).unwrap();
        for (re, im) in &cloud.union {
            assert!(re.abs() < 1e-12 && im.abs() < 1e-12);
        }
    }

    #[test]
    fn affine_shift_translates_cloud() {
        let mut rng = testgen::rng(91);
        let b = testgen::random_band_op(&mut rng, 2, 1, 1, 1, 1.0);
        let alpha = 0.85;
        let shifted = BandPeriodicOp::identity(2, 1, 1)
            .scale_real(alpha)
            .add(&b)
            .unwrap();
        let c1 = operator_spectrum(&b, 16).unwrap();
        let c2 = operator_spectrum(&shifted, 16).unwrap();
        let translated: Vec<(f64, f64)> = c1.union.iter().map(|&(x, y)| (x + alpha, y)).collect();
        assert!(rep::matching_feasible(&translated, &c2.union, 1e-9));
    }

    #[test]
    fn identity_circulant_is_all_ones() {
        let id = BandPeriodicOp::identity(2, 1, 1);
        for (re, im) in circulant_oracle(&id, 8).unwrap() {
            assert!((re - 1.0).abs() < 1e-10 && im.abs() < 1e-10);
        }
    }

    #[test]
    fn shift_circulant_gives_roots_of_unity() {
        let s = BandPeriodicOp::shift(2, 1, 1);
        let eigs = circulant_oracle(&s, 16).unwrap();
        assert_eq!(eigs.len(), 16 * 8);
        for (re, im) in &eigs {
            let r = (re * re + im * im).sqrt();
            assert!((r - 1.0).abs() < 1e-9);
            let angle = im.atan2(*re).rem_euclid(2.0 * PI);
            let nearest = (angle / (2.0 * PI / 16.0)).round() * (2.0 * PI / 16.0);
            let diff = (angle - nearest).abs();
            assert!(diff.min(2.0 * PI - diff) < 1e-9);
        }
        // multiset equality with the sampled union at matching grid points
        let union = spectrum_at_roots(&s, 16).unwrap();
        assert!(rep::matching_feasible(&eigs, &union, 1e-8));
    }

    #[test]
    fn circulant_matches_sampled_union_random() {
        let mut rng = testgen::rng(92);
        for (n, band, d) in [(1usize, 1usize, 1usize), (2, 2, 1), (1, 2, 2)] {
            let op = testgen::random_band_op(&mut rng, 2, d, n, band, 1.0);
            let n_pos = 16 * n;
            let dense = circulant_oracle(&op, n_pos).unwrap();
            let union = spectrum_at_roots(&op, n_pos).unwrap();
            assert_eq!(dense.len(), union.len());
            let dist = rep::bottleneck_distance(&dense, &union);
            assert!(dist < 1e-8, "(n={n}, K={band}, d={d}): bottleneck {dist}");
        }
    }

    #[test]
    fn one_minus_shift_traces_displaced_circle() {
        let id = BandPeriodicOp::identity(2, 1, 1);
        let b = id.sub(&BandPeriodicOp::shift(2, 1, 1)).unwrap();
        let cloud = operator_spectrum(&b, 64).unwrap();
        let mut passes_origin = false;
        for (re, im) in &cloud.union {
            // eigenvalues lie on 1 - e^{i theta}: |lambda - 1| = 1
            assert!((((re - 1.0).powi(2) + im * im).sqrt() - 1.0).abs() < 1e-9);
            if (re * re + im * im).sqrt() < 1e-9 {
                passes_origin = true;
            }
        }
        assert!(passes_origin);
    }

    #[test]
    fn monotone_refinement_of_union() {
        let mut rng = testgen::rng(93);
        let op = testgen::random_band_op(&mut rng, 2, 1, 1, 1, 1.0);
        let coarse = operator_spectrum(&op, 16).unwrap();
        let fine = operator_spectrum(&op, 32).unwrap();
        // one-sided Hausdorff: every coarse point has a fine point nearby
        for &(x, y) in &coarse.union {
            let nearest = fine
                .union
                .iter()
                .map(|&(u, v)| ((x - u).powi(2) + (y - v).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-6);
        }
    }

    #[test]
    fn resolvent_margins() {
        let z = BandPeriodicOp::zero(2, 1, 1, 0);
        let m = resolvent_margin(&z, (1.0, 0.0), 8).unwrap();
        assert!((m - 1.0).abs() < 1e-10);

        let s = BandPeriodicOp::shift(2, 1, 1);
        let m = resolvent_margin(&s, (0.0, 0.0), 16).unwrap();
        assert!((m - 1.0).abs() < 1e-9);

        // a point taken from the computed cloud has (near) zero margin
        let mut rng = testgen::rng(94);
        let op = testgen::random_band_op(&mut rng, 2, 1, 1, 1, 1.0);
        let cloud = operator_spectrum(&op, 16).unwrap();
        let lambda = cloud.union[3];
        let m = resolvent_margin(&op, lambda, 16).unwrap();
        assert!(m <= 1e-6, "margin at a spectrum point: {m}");
    }
}
