//! Discretization of bounded periodic integral kernels over the real shadow
//! of the algebra into blocked multi-sequence operators, and invertibility
//! of `A = I - B` through the multi-torus symbol.
//!
//! The continuous picture: a kernel `K(t, s)` on `A_w x A_w`, periodic with
//! period `omega_j` along each active axis, defines `(Bx)(t) = int K(t,s)
//! x(s) ds` with the integral realized as componentwise quadrature along the
//! straight-line foliation. Splitting the domain into period cells and
//! re-indexing (the `rearrange` isometry) turns `B` into a sequence operator
//! over `Z^{u+1}` whose blocks depend only on the cell-index difference;
//! composite-trapezoid quadrature on the periodic lattice (which degenerates
//! to the uniform cell sum) fills those blocks.

use crate::algebra::{CdComplex, CdNumber};
use crate::error::{Error, Result};
use crate::matrix::{CdMatrix, CdVector};
use crate::rep;
use crate::seq::BandPeriodicOp;
use crate::spectra::{pointwise_spectrum, CloudMeta, SpectrumCloud, SpectrumSample};
use serde::Serialize;
use std::collections::BTreeMap;

/// Quadrature rule on the periodic cell lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    /// Nodes at `j h`, uniform weights (trapezoid on a periodic lattice).
    Trapezoid,
    /// Nodes at `(j + 1/2) h`, for kernels with edge discontinuities.
    Midpoint,
}

/// A bounded periodic integral kernel at desk scale.
pub struct KernelSpec {
    /// Doubling level of the integration algebra `A_w`.
    pub w: u32,
    /// Active axes: generator indices along which the kernel varies.
    pub axes: Vec<usize>,
    /// Period per active axis.
    pub periods: Vec<f64>,
    /// Fiber dimension of the kernel values.
    pub d: usize,
    /// Declared sup bound `c_1`.
    pub c1: f64,
    /// Kernel values; must satisfy the periodicity along every active axis.
    pub eval: Box<dyn Fn(&CdNumber, &CdNumber) -> CdMatrix + Send + Sync>,
}

impl KernelSpec {
    /// Spot-checks the declared invariants on a small sample: periodicity
    /// along every active axis (<= 1e-10) and the sup bound `c_1`.
    pub fn validate(&self, samples_per_axis: usize) -> Result<()> {
        if self.axes.len() != self.periods.len() {
            return Err(Error::Precondition(
                "one period per active axis is required".into(),
            ));
        }
        if self.axes.iter().any(|&a| a >= 1usize << self.w) {
            return Err(Error::Precondition("active axis outside A_w".into()));
        }
        let pts = self.sample_points(samples_per_axis);
        for t in &pts {
            for s in &pts {
                let base = (self.eval)(t, s);
                if base.norm_bound() > self.c1 + 1e-9 {
                    return Err(Error::Precondition(format!(
                        "kernel exceeds declared bound c1 = {}",
                        self.c1
                    )));
                }
                for (axis_pos, &axis) in self.axes.iter().enumerate() {
                    let omega = self.periods[axis_pos];
                    let mut step = CdNumber::zero(self.w);
                    step.coords[axis] = omega;
                    let ts = t.add(&step)?;
                    let ss = s.add(&step)?;
                    let shifted = (self.eval)(&ts, &ss);
                    if shifted.sub(&base)?.max_entry_norm() > 1e-10 {
                        return Err(Error::Precondition(format!(
                            "kernel is not periodic along axis {axis}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn sample_points(&self, per_axis: usize) -> Vec<CdNumber> {
        let mut pts = vec![CdNumber::zero(self.w)];
        for (axis_pos, &axis) in self.axes.iter().enumerate() {
            let omega = self.periods[axis_pos];
            let mut next = Vec::new();
            for p in &pts {
                for k in 0..per_axis {
                    let mut q = p.clone();
                    q.coords[axis] += omega * (k as f64 + 0.3) / per_axis as f64;
                    next.push(q);
                }
            }
            pts = next;
        }
        pts
    }
}

/// Blocked discretization of the kernel part `B`; the full operator of
/// interest is `A = I - B`.
///
/// Blocks are indexed by the cell-index difference and have dimension
/// `G^{u+1} d` where `G` is the grid size per axis. Difference-only
/// dependence is the discrete Theorem-84 tensor property.
pub struct BlockedKernelOp {
    pub level: u32,
    pub axes: usize,
    pub grid: usize,
    pub d: usize,
    pub band: usize,
    pub block_dim: usize,
    pub quadrature: Quadrature,
    pub blocks: BTreeMap<Vec<i64>, CdMatrix>,
    /// Per-shell decay of block norms, `decay[r]` = max block norm with
    /// `max_j |m_j| = r`.
    pub decay: Vec<f64>,
}

/// Enumerates the in-cell grid multi-indices in row-major order.
fn cell_indices(axes: usize, grid: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..axes {
        let mut next = Vec::with_capacity(out.len() * grid);
        for base in &out {
            for g in 0..grid {
                let mut v = base.clone();
                v.push(g);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Enumerates multi-indices with entries in `[-band, band]`.
fn band_indices(axes: usize, band: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..axes {
        let mut next = Vec::with_capacity(out.len() * (2 * band + 1));
        for base in &out {
            for m in -(band as i64)..=(band as i64) {
                let mut v = base.clone();
                v.push(m);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

impl BlockedKernelOp {
    /// Grid point inside the base cell for an in-cell multi-index.
    fn grid_point(&self, spec: &KernelSpec, idx: &[usize]) -> CdNumber {
        let mut t = CdNumber::zero(spec.w);
        let off = match self.quadrature {
            Quadrature::Trapezoid => 0.0,
            Quadrature::Midpoint => 0.5,
        };
        for (axis_pos, &axis) in spec.axes.iter().enumerate() {
            let h = spec.periods[axis_pos] / self.grid as f64;
            t.coords[axis] = (idx[axis_pos] as f64 + off) * h;
        }
        t
    }

    /// Torus symbol of the kernel part:
    /// `B^(M) = sum_m (prod_j M_j^{m_j}) Q_m`.
    pub fn symbol_b(&self, thetas: &[f64]) -> Result<CdMatrix> {
        if thetas.len() != self.axes {
            return Err(Error::Dimension(format!(
                "expected {} torus angles, got {}",
                self.axes,
                thetas.len()
            )));
        }
        let mut acc = CdMatrix::zero(self.level, self.block_dim, self.block_dim);
        for (m, blk) in &self.blocks {
            if blk.is_zero() {
                continue;
            }
            let phase: f64 = m
                .iter()
                .zip(thetas)
                .map(|(&mj, &th)| mj as f64 * th)
                .sum();
            let w = CdComplex::circle(self.level, phase);
            acc = acc.add(&blk.scale_left(&w)?)?;
        }
        Ok(acc)
    }

    /// Symbol of the assembled operator `A = I - B` at a torus point.
    pub fn symbol_a(&self, thetas: &[f64]) -> Result<CdMatrix> {
        let id = CdMatrix::identity(self.level, self.block_dim);
        id.sub(&self.symbol_b(thetas)?)
    }

    /// Uniform norm bound of the kernel part, `sum_m |Q_m|`.
    pub fn norm_bound(&self) -> f64 {
        self.blocks.values().map(|b| b.norm_bound()).sum()
    }

    /// One-axis view as a period-1 band operator on block fibers, enabling
    /// the circle machinery (Wiener inversion, Neumann cross-checks).
    pub fn to_band_op(&self) -> Result<BandPeriodicOp> {
        if self.axes != 1 {
            return Err(Error::Precondition(
                "band-operator view requires exactly one active axis".into(),
            ));
        }
        let mut op = BandPeriodicOp::zero(self.level, self.block_dim, 1, self.band);
        for (m, blk) in &self.blocks {
            op.set_block(0, m[0], blk.clone())?;
        }
        Ok(op)
    }
}

/// Fills the blocked operator by quadrature of the kernel over shifted
/// cells: `Q_m[(i, a), (b, b')] = w_quad K(tau_i, tau_b + sum_j m_j
/// omega_j i_j)[a, b']`.
pub fn discretize(
    spec: &KernelSpec,
    grid: usize,
    band: usize,
    quadrature: Quadrature,
) -> Result<BlockedKernelOp> {
    spec.validate(3)?;
    let axes = spec.axes.len();
    if axes == 0 {
        return Err(Error::Precondition("at least one active axis".into()));
    }
    let cell = cell_indices(axes, grid);
    let block_dim = cell.len() * spec.d;
    let weight: f64 = spec
        .periods
        .iter()
        .map(|omega| omega / grid as f64)
        .product();
    let mut op = BlockedKernelOp {
        level: 0,
        axes,
        grid,
        d: spec.d,
        band,
        block_dim,
        quadrature,
        blocks: BTreeMap::new(),
        decay: vec![0.0; band + 1],
    };
    let mut level_set = false;
    for m in band_indices(axes, band) {
        let mut shift = CdNumber::zero(spec.w);
        for (axis_pos, &axis) in spec.axes.iter().enumerate() {
            shift.coords[axis] = m[axis_pos] as f64 * spec.periods[axis_pos];
        }
        let mut blk_level = 0u32;
        let mut blk: Option<CdMatrix> = None;
        for (bi, b_idx) in cell.iter().enumerate() {
            let tau_b = op.grid_point(spec, b_idx).add(&shift)?;
            for (ii, i_idx) in cell.iter().enumerate() {
                let tau_i = op.grid_point(spec, i_idx);
                let val = (spec.eval)(&tau_i, &tau_b).scale_real(weight);
                if blk.is_none() {
                    blk_level = val.level;
                    blk = Some(CdMatrix::zero(blk_level, block_dim, block_dim));
                }
                let blk_ref = blk.as_mut().unwrap();
                for a in 0..spec.d {
                    for b2 in 0..spec.d {
                        *blk_ref.entry_mut(ii * spec.d + a, bi * spec.d + b2) =
                            val.entry(a, b2).clone();
                    }
                }
            }
        }
        let blk = blk.unwrap();
        if !level_set {
            op.level = blk_level;
            level_set = true;
        }
        let shell = m.iter().map(|x| x.unsigned_abs()).max().unwrap() as usize;
        op.decay[shell] = op.decay[shell].max(blk.norm_bound());
        op.blocks.insert(m, blk);
    }
    // tails must decay into the band budget: a boundary shell as large as
    // the interior means the band cut off genuine kernel mass
    if band > 0 {
        let interior = op.decay[..band].iter().cloned().fold(0.0f64, f64::max);
        let edge = op.decay[band];
        if edge > 1e-10 && edge > 0.9 * interior {
            return Err(Error::BandBudget(format!(
                "no decay at the band edge: shell norms {:?}",
                op.decay
            )));
        }
    }
    Ok(op)
}

/// Report of the multi-torus invertibility scan of `A = I - B`.
#[derive(Debug, Clone, Serialize)]
pub struct TorusReport {
    pub invertible: bool,
    pub margin: f64,
    /// Torus angles attaining the margin (grid point).
    pub witness: Vec<f64>,
    pub samples_per_axis: usize,
    pub threshold: f64,
}

fn torus_grid(axes: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let line: Vec<f64> = (0..per_axis)
        .map(|r| 2.0 * std::f64::consts::PI * r as f64 / per_axis as f64)
        .collect();
    let mut out = vec![vec![]];
    for _ in 0..axes {
        let mut next = Vec::with_capacity(out.len() * per_axis);
        for base in &out {
            for &t in &line {
                let mut v = base.clone();
                v.push(t);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn torus_scan(
    op: &BlockedKernelOp,
    samples_per_axis: usize,
    threshold: f64,
    assemble: impl Fn(&BlockedKernelOp, &[f64]) -> Result<CdMatrix>,
) -> Result<TorusReport> {
    let per_axis = samples_per_axis
        .max(4 * (op.band + 1))
        .next_power_of_two();
    let mut margin = f64::INFINITY;
    let mut witness = vec![0.0; op.axes];
    for thetas in torus_grid(op.axes, per_axis) {
        let sym = assemble(op, &thetas)?;
        let s = rep::smallest_singular_value(&sym.to_real_rep());
        if s < margin {
            margin = s;
            witness = thetas;
        }
    }
    Ok(TorusReport {
        invertible: margin > threshold,
        margin,
        witness,
        samples_per_axis: per_axis,
        threshold,
    })
}

/// Evaluates the smallest singular value of `rep(symbol_A)` over a tensor
/// grid of circle points and compares the minimum against the threshold.
pub fn torus_invertibility(
    op: &BlockedKernelOp,
    samples_per_axis: usize,
    threshold: f64,
) -> Result<TorusReport> {
    torus_scan(op, samples_per_axis, threshold, |o, t| o.symbol_a(t))
}

/// Same scan for the raw kernel part `B` (no identity added); this is the
/// form in which a zero-mean difference kernel is singular exactly at the
/// torus origin, where its symbol is the plain sample sum of the profile.
pub fn torus_invertibility_b(
    op: &BlockedKernelOp,
    samples_per_axis: usize,
    threshold: f64,
) -> Result<TorusReport> {
    torus_scan(op, samples_per_axis, threshold, |o, t| o.symbol_b(t))
}

/// Spectrum cloud of the assembled operator `A = I - B` over the torus
/// sample grid.
pub fn kernel_spectrum(op: &BlockedKernelOp, samples_per_axis: usize) -> Result<SpectrumCloud> {
    let per_axis = samples_per_axis
        .max(4 * (op.band + 1))
        .next_power_of_two();
    let mut samples = Vec::new();
    for thetas in torus_grid(op.axes, per_axis) {
        let sym = op.symbol_a(&thetas)?;
        let eigs = pointwise_spectrum(&sym)?;
        samples.push(SpectrumSample { thetas, eigs });
    }
    let union = samples
        .iter()
        .flat_map(|s| s.eigs.iter().copied())
        .collect();
    Ok(SpectrumCloud {
        samples,
        union,
        meta: CloudMeta {
            level: op.level,
            d: op.d,
            n: 1,
            band: op.band,
            sample_count: per_axis.pow(op.axes as u32),
        },
    })
}

/// Grid samples of a function on a finite union of cells, indexed by the
/// global multi-index along the active axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeq {
    pub level: u32,
    pub d: usize,
    pub axes: usize,
    pub grid: usize,
    pub vals: BTreeMap<Vec<i64>, CdVector>,
}

/// Cell-rearranged view: cell index -> stacked in-cell samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSeq {
    pub level: u32,
    pub d: usize,
    pub axes: usize,
    pub grid: usize,
    pub cells: BTreeMap<Vec<i64>, Vec<CdVector>>,
}

/// The rearranging isometry `U`: splits global grid indices into
/// (cell index, in-cell offset). Pure re-indexing, exactly invertible.
pub fn rearrange(x: &GridSeq) -> CellSeq {
    let cell_count = (x.grid as i64).pow(x.axes as u32) as usize;
    let _ = cell_count;
    let mut cells: BTreeMap<Vec<i64>, Vec<CdVector>> = BTreeMap::new();
    let cell_idx = cell_indices(x.axes, x.grid);
    for (g, v) in &x.vals {
        let cell: Vec<i64> = g.iter().map(|&gi| gi.div_euclid(x.grid as i64)).collect();
        let local: Vec<usize> = g
            .iter()
            .map(|&gi| gi.rem_euclid(x.grid as i64) as usize)
            .collect();
        let pos = cell_idx.iter().position(|c| *c == local).unwrap();
        let entry = cells
            .entry(cell)
            .or_insert_with(|| vec![CdVector::zero(x.level, x.d); cell_idx.len()]);
        entry[pos] = v.clone();
    }
    CellSeq {
        level: x.level,
        d: x.d,
        axes: x.axes,
        grid: x.grid,
        cells,
    }
}

/// Inverse of [`rearrange`].
pub fn rearrange_inverse(c: &CellSeq) -> GridSeq {
    let cell_idx = cell_indices(c.axes, c.grid);
    let mut vals = BTreeMap::new();
    for (cell, data) in &c.cells {
        for (pos, v) in data.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let g: Vec<i64> = cell
                .iter()
                .zip(&cell_idx[pos])
                .map(|(&m, &loc)| m * c.grid as i64 + loc as i64)
                .collect();
            vals.insert(g, v.clone());
        }
    }
    GridSeq {
        level: c.level,
        d: c.d,
        axes: c.axes,
        grid: c.grid,
        vals,
    }
}

/// Shift of grid samples by one full period along `axis` (i.e. by `grid`
/// lattice steps).
pub fn period_shift(x: &GridSeq, axis: usize, steps: i64) -> GridSeq {
    let mut vals = BTreeMap::new();
    for (g, v) in &x.vals {
        let mut g2 = g.clone();
        g2[axis] += steps * x.grid as i64;
        vals.insert(g2, v.clone());
    }
    GridSeq {
        level: x.level,
        d: x.d,
        axes: x.axes,
        grid: x.grid,
        vals,
    }
}

/// Shift of cell sequences by a cell multi-offset.
pub fn cell_shift(c: &CellSeq, offset: &[i64]) -> CellSeq {
    let mut cells = BTreeMap::new();
    for (cell, data) in &c.cells {
        let moved: Vec<i64> = cell.iter().zip(offset).map(|(&m, &o)| m + o).collect();
        cells.insert(moved, data.clone());
    }
    CellSeq {
        level: c.level,
        d: c.d,
        axes: c.axes,
        grid: c.grid,
        cells: cells,
    }
}

/// Applies the blocked kernel part `B` to a cell sequence:
/// `(B y)(k) = sum_m Q_m y(k + m)`.
pub fn apply_blocked(op: &BlockedKernelOp, y: &CellSeq) -> Result<CellSeq> {
    let mut out: BTreeMap<Vec<i64>, Vec<CdVector>> = BTreeMap::new();
    let per_cell = op.block_dim / op.d;
    for (cell, data) in &y.cells {
        // stack the cell into one fiber vector
        let mut stacked = CdVector::zero(op.level, op.block_dim / op.d * op.d);
        for (pos, v) in data.iter().enumerate() {
            for a in 0..op.d {
                stacked.entries[pos * op.d + a] = v.entries[a].clone();
            }
        }
        for (m, blk) in &op.blocks {
            if blk.is_zero() {
                continue;
            }
            // contribution lands at cell - m (y at k + m matches source cell)
            let target: Vec<i64> = cell.iter().zip(m).map(|(&c, &mm)| c - mm).collect();
            let image = blk.matvec(&stacked)?;
            let entry = out
                .entry(target)
                .or_insert_with(|| vec![CdVector::zero(op.level, op.d); per_cell]);
            for pos in 0..per_cell {
                for a in 0..op.d {
                    entry[pos].entries[a] = entry[pos].entries[a]
                        .add(&image.entries[pos * op.d + a])?;
                }
            }
        }
    }
    Ok(CellSeq {
        level: op.level,
        d: op.d,
        axes: op.axes,
        grid: op.grid,
        cells: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgen;
    use std::f64::consts::TAU;

    /// Compactly supported smooth profile: `cos^4(pi tau / omega)` inside
    /// `|tau| <= omega/2`, zero outside. C^3 at the support edge.
    fn bump(tau: f64, omega: f64) -> f64 {
        if tau.abs() >= omega / 2.0 {
            0.0
        } else {
            (std::f64::consts::PI * tau / omega).cos().powi(4)
        }
    }

    /// One-axis difference kernel `K(t, s) = f(t - s)` with
    /// `f(tau) = (a0 + a1 cos(2 pi tau/omega) + b1 sin(2 pi tau/omega)) bump(tau)`.
    /// Diagonally periodic by construction and localized in one cell.
    fn difference_kernel(d: usize, a0: f64, a1: f64, b1: f64, omega: f64) -> KernelSpec {
        KernelSpec {
            w: 2,
            axes: vec![0],
            periods: vec![omega],
            d,
            c1: a0.abs() + a1.abs() + b1.abs() + 0.1,
            eval: Box::new(move |t, s| {
                let tau = t.coords[0] - s.coords[0];
                let v = (a0 + a1 * (TAU * tau / omega).cos() + b1 * (TAU * tau / omega).sin())
                    * bump(tau, omega);
                CdMatrix::scalar(2, d, &CdComplex::from_complex(2, v, 0.0))
            }),
        }
    }

    fn profile_value(a0: f64, a1: f64, b1: f64, omega: f64, tau: f64) -> f64 {
        (a0 + a1 * (TAU * tau / omega).cos() + b1 * (TAU * tau / omega).sin()) * bump(tau, omega)
    }

    #[test]
    fn zero_kernel_discretizes_to_zero() {
        let spec = KernelSpec {
            w: 2,
            axes: vec![0],
            periods: vec![1.0],
            d: 1,
            c1: 0.1,
            eval: Box::new(|_, _| CdMatrix::zero(2, 1, 1)),
        };
        let op = discretize(&spec, 4, 1, Quadrature::Trapezoid).unwrap();
        for blk in op.blocks.values() {
            assert!(blk.is_zero());
        }
        let rep = torus_invertibility(&op, 8, 1e-8).unwrap();
        assert!(rep.invertible);
        assert!((rep.margin - 1.0).abs() < 1e-12);
        let cloud = kernel_spectrum(&op, 8).unwrap();
        for (re, im) in &cloud.union {
            assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }

    #[test]
    fn validate_rejects_aperiodic_kernels() {
        let spec = KernelSpec {
            w: 2,
            axes: vec![0],
            periods: vec![1.0],
            d: 1,
            c1: 10.0,
            eval: Box::new(|t, s| {
                let v = (t.coords[0] - 0.5 * s.coords[0]).sin();
                CdMatrix::scalar(2, 1, &CdComplex::from_complex(2, v, 0.0))
            }),
        };
        assert!(matches!(
            discretize(&spec, 4, 1, Quadrature::Trapezoid),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn nondecaying_kernel_trips_band_budget() {
        // a profile that is itself omega-periodic has identical blocks at
        // every cell offset: the whole-line operator diverges and the decay
        // check must reject it
        let spec = KernelSpec {
            w: 2,
            axes: vec![0],
            periods: vec![1.0],
            d: 1,
            c1: 1.0,
            eval: Box::new(|t, s| {
                let v = 0.2 * (TAU * (t.coords[0] - s.coords[0])).cos();
                CdMatrix::scalar(2, 1, &CdComplex::from_complex(2, v, 0.0))
            }),
        };
        assert!(matches!(
            discretize(&spec, 4, 1, Quadrature::Trapezoid),
            Err(Error::BandBudget(_))
        ));
    }

    #[test]
    fn difference_dependence_of_blocks() {
        let spec = difference_kernel(1, 0.2, 0.1, 0.05, 1.0);
        let op = discretize(&spec, 4, 1, Quadrature::Trapezoid).unwrap();
        // independently quadrature K at shifted cell pairs with equal
        // difference and compare entrywise
        let g = 4usize;
        let h = 1.0 / g as f64;
        for (sbar, kbar) in [(2i64, 1i64), (0, -1), (-1, -2), (1, 1)] {
            let m = sbar - kbar;
            let blk = op.blocks.get(&vec![m]).unwrap();
            for i in 0..g {
                for b in 0..g {
                    let mut t = CdNumber::zero(2);
                    t.coords[0] = i as f64 * h + kbar as f64;
                    let mut s = CdNumber::zero(2);
                    s.coords[0] = b as f64 * h + sbar as f64;
                    let want = (spec.eval)(&t, &s).scale_real(h);
                    let got = blk.entry(i, b);
                    assert!(got.sub(want.entry(0, 0)).unwrap().norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn difference_kernel_symbol_matches_dense_convolution() {
        let (a0, a1, b1, omega) = (0.12, 0.2, -0.15, 1.0);
        let spec = difference_kernel(1, a0, a1, b1, omega);
        let g = 8usize;
        let op = discretize(&spec, g, 1, Quadrature::Trapezoid).unwrap();

        // dense global convolution matrix A = I - h f(wrapped difference) on
        // n_cells * g lattice points, built independently of the blocking
        let n_cells = 8usize;
        let total = n_cells * g;
        let h = omega / g as f64;
        let span = n_cells as f64 * omega;
        let mut dense = CdMatrix::zero(2, total, total);
        for r in 0..total {
            for c in 0..total {
                let mut diff = (r as f64 - c as f64) * h;
                diff -= (diff / span).round() * span;
                let v = -h * profile_value(a0, a1, b1, omega, diff);
                *dense.entry_mut(r, c) = CdComplex::from_complex(2, v, 0.0);
            }
            let cur = dense.entry(r, r).add(&CdComplex::one(2)).unwrap();
            *dense.entry_mut(r, r) = cur;
        }
        let dense_eigs = rep::complex_eigenvalues(&dense.to_real_rep()).unwrap();

        let mut union = Vec::new();
        for r in 0..n_cells {
            let theta = TAU * r as f64 / n_cells as f64;
            let sym = op.symbol_a(&[theta]).unwrap();
            union.extend(pointwise_spectrum(&sym).unwrap());
        }
        assert_eq!(dense_eigs.len(), union.len());
        let dist = rep::bottleneck_distance(&dense_eigs, &union);
        assert!(dist < 1e-7, "bottleneck {dist}");
    }

    #[test]
    fn separable_kernel_blocks_are_rank_one_products() {
        // periodic separable kernels carry no cell-offset decay, so the
        // meaningful discretization is cell-local (band 0); its single block
        // is the rank-one quadrature of the product
        let phi = |t: f64| 0.3 + 0.1 * (TAU * t).cos();
        let psi = |s: f64| 0.2 * (TAU * s).sin();
        let spec = KernelSpec {
            w: 2,
            axes: vec![0],
            periods: vec![1.0],
            d: 1,
            c1: 1.0,
            eval: Box::new(move |t, s| {
                let v = phi(t.coords[0]) * psi(s.coords[0]);
                CdMatrix::scalar(2, 1, &CdComplex::from_complex(2, v, 0.0))
            }),
        };
        let g = 6usize;
        let op = discretize(&spec, g, 0, Quadrature::Trapezoid).unwrap();
        let h = 1.0 / g as f64;
        let blk = op.blocks.get(&vec![0i64]).unwrap();
        for i in 0..g {
            for b in 0..g {
                let want = phi(i as f64 * h) * psi(b as f64 * h) * h;
                let got = blk.entry(i, b).re.coords[0];
                assert!((got - want).abs() < 1e-12);
            }
        }
        // rank-1: all 2x2 minors vanish
        for i in 0..g {
            for j in 0..g {
                for k in 0..g {
                    for l in 0..g {
                        let det = blk.entry(i, k).re.coords[0] * blk.entry(j, l).re.coords[0]
                            - blk.entry(i, l).re.coords[0] * blk.entry(j, k).re.coords[0];
                        assert!(det.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn rearrange_roundtrip_and_shift_conjugation() {
        let mut rng = testgen::rng(100);
        let mut x = GridSeq {
            level: 2,
            d: 1,
            axes: 2,
            grid: 3,
            vals: BTreeMap::new(),
        };
        for g0 in -3..6i64 {
            for g1 in -2..4i64 {
                x.vals.insert(
                    vec![g0, g1],
                    CdVector {
                        entries: vec![testgen::random_cdc(&mut rng, 2, 1.0)],
                    },
                );
            }
        }
        let cells = rearrange(&x);
        assert_eq!(rearrange_inverse(&cells), x);

        // constant function: every cell copy identical
        let mut c = GridSeq {
            level: 2,
            d: 1,
            axes: 1,
            grid: 2,
            vals: BTreeMap::new(),
        };
        let one = CdVector::basis(2, 1, 0);
        for g in -4..4i64 {
            c.vals.insert(vec![g], one.clone());
        }
        let cc = rearrange(&c);
        let cells_vec: Vec<_> = cc.cells.values().collect();
        for w in &cells_vec {
            assert_eq!(*w, cells_vec[0]);
        }

        // period shift maps to the cell shift under rearrange
        let shifted = period_shift(&x, 0, 1);
        let lhs = rearrange(&shifted);
        let rhs = cell_shift(&rearrange(&x), &[1, 0]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn blocked_operator_is_rearranged_grid_operator() {
        // Q = U B_grid U^{-1} entrywise on a small grid
        let (a0, a1, b1, omega) = (0.25, 0.1, 0.0, 1.0);
        let spec = difference_kernel(1, a0, a1, b1, omega);
        let g = 3usize;
        let op = discretize(&spec, g, 1, Quadrature::Trapezoid).unwrap();
        let h = omega / g as f64;

        let window = -6i64..12i64;
        let mut rng = testgen::rng(101);
        let mut x = GridSeq {
            level: 2,
            d: 1,
            axes: 1,
            grid: g,
            vals: BTreeMap::new(),
        };
        for gidx in window.clone() {
            x.vals.insert(
                vec![gidx],
                CdVector {
                    entries: vec![testgen::random_cdc(&mut rng, 2, 1.0)],
                },
            );
        }
        // direct grid operator on global indices
        let mut direct = GridSeq {
            level: 2,
            d: 1,
            axes: 1,
            grid: g,
            vals: BTreeMap::new(),
        };
        for r in -9i64..15 {
            let mut acc = CdVector::zero(2, 1);
            for c in window.clone() {
                let mut t = CdNumber::zero(2);
                t.coords[0] = r as f64 * h;
                let mut s = CdNumber::zero(2);
                s.coords[0] = c as f64 * h;
                let k = (spec.eval)(&t, &s).scale_real(h);
                let xv = x.vals.get(&vec![c]).cloned().unwrap_or(CdVector::zero(2, 1));
                acc = acc.add(&k.matvec(&xv).unwrap()).unwrap();
            }
            direct.vals.insert(vec![r], acc);
        }

        let blocked_out = apply_blocked(&op, &rearrange(&x)).unwrap();
        let back = rearrange_inverse(&blocked_out);
        // interior of the window, where the one-cell band saw all of x
        for r in -3i64..9 {
            let a = back.vals.get(&vec![r]).cloned().unwrap_or(CdVector::zero(2, 1));
            let b = direct.vals.get(&vec![r]).cloned().unwrap_or(CdVector::zero(2, 1));
            assert!(
                a.sub(&b).unwrap().norm() < 1e-10,
                "grid index {r}: {}",
                a.sub(&b).unwrap().norm()
            );
        }
    }

    #[test]
    fn quadrature_converges_at_spectral_rate() {
        // a profile with an infinite Fourier tail (exp of a cosine), so the
        // trapezoid value genuinely depends on the grid; the symbol
        // functional under watch is the first row sum at a fixed angle
        let spec = KernelSpec {
            w: 2,
            axes: vec![0],
            periods: vec![1.0],
            d: 1,
            c1: 3.0,
            eval: Box::new(|t, s| {
                let tau = t.coords[0] - s.coords[0];
                let v = 0.1 * (2.0 * (TAU * tau).cos()).exp() * bump(tau, 1.0);
                CdMatrix::scalar(2, 1, &CdComplex::from_complex(2, v, 0.0))
            }),
        };
        let theta = 0.7f64;
        // plane-wave Rayleigh quotient: with w_b = e^{i xi tau_b} and
        // xi = theta/omega, <w, B w>/<w, w> is exactly the whole-support
        // lattice transform of the profile, the symbol value at that mode
        let symbol_value = |g: usize| -> (f64, f64) {
            let op = discretize(&spec, g, 1, Quadrature::Trapezoid).unwrap();
            let sym = op.symbol_b(&[theta]).unwrap();
            let h = 1.0 / g as f64;
            let w = CdVector {
                entries: (0..g)
                    .map(|b| {
                        let phase = theta * b as f64 * h;
                        CdComplex::from_complex(2, phase.cos(), phase.sin())
                    })
                    .collect(),
            };
            let y = sym.matvec(&w).unwrap();
            let mut re = 0.0;
            let mut im = 0.0;
            for (wb, yb) in w.entries.iter().zip(&y.entries) {
                let (a, b2) = (wb.re.coords[0], wb.im.coords[0]);
                let (c, d2) = (yb.re.coords[0], yb.im.coords[0]);
                // conj(w) * y
                re += a * c + b2 * d2;
                im += a * d2 - b2 * c;
            }
            (re / g as f64, im / g as f64)
        };
        let (r_ref, i_ref) = symbol_value(256);
        let mut errs = Vec::new();
        for g in [8usize, 16, 32] {
            let (r, i) = symbol_value(g);
            errs.push(((r - r_ref).powi(2) + (i - i_ref).powi(2)).sqrt().max(1e-16));
        }
        assert!(errs[1] / errs[0] <= 0.25 || errs[1] < 1e-12, "errors {errs:?}");
        assert!(errs[2] / errs[1] <= 0.25 || errs[2] < 1e-12, "errors {errs:?}");
        // the coarse grid must actually be inexact for the trend to mean much
        assert!(errs[0] > 1e-10, "errors {errs:?}");
    }

    #[test]
    fn small_norm_kernel_is_invertible_with_margin() {
        let spec = difference_kernel(1, 0.15, 0.08, 0.02, 1.0);
        let op = discretize(&spec, 8, 1, Quadrature::Trapezoid).unwrap();
        let bound = op.norm_bound();
        assert!(bound < 1.0, "desk kernel should be contractive: {bound}");
        let rep = torus_invertibility(&op, 16, 1e-8).unwrap();
        assert!(rep.invertible);
        assert!(
            rep.margin >= 1.0 - bound - 1e-9,
            "margin {} vs 1 - {bound}",
            rep.margin
        );

        // wiener-style inverse of the one-axis view matches the Neumann
        // series for A = I - B
        let band_view = op.to_band_op().unwrap();
        let minus_b = band_view.scale_real(-1.0);
        let (neumann, _) = crate::invert::neumann_inverse(&minus_b, 1e-13, 80, 64).unwrap();
        let a_op = BandPeriodicOp::identity(op.level, op.block_dim, 1)
            .sub(&band_view)
            .unwrap();
        let (wiener, _) = crate::invert::wiener_invert(&a_op, 32, 1e-12).unwrap();
        let diff = neumann.sub(&wiener).unwrap().norm_bound();
        assert!(diff < 1e-8, "Neumann vs Wiener inverse differ by {diff}");
    }

    #[test]
    fn zero_mean_kernel_part_is_singular_at_origin() {
        // odd profile: lattice-exact zero mean, so the kernel part's symbol
        // at the torus origin is the vanishing sample sum
        let spec = difference_kernel(1, 0.0, 0.0, 0.6, 1.0);
        let op = discretize(&spec, 8, 1, Quadrature::Trapezoid).unwrap();
        let rep_b = torus_invertibility_b(&op, 16, 1e-8).unwrap();
        assert!(!rep_b.invertible, "margin {}", rep_b.margin);
        assert!(rep_b.margin < 1e-12);
        assert!(
            rep_b.witness.iter().all(|t| t.abs() < 1e-12),
            "witness {:?}",
            rep_b.witness
        );

        // unit-mean bump: A = I - B is singular at the origin instead
        let height = {
            // normalize so the lattice sum of the profile times h is 1
            let g = 8usize;
            let h = 1.0 / g as f64;
            let raw: f64 = (-8..8).map(|j| bump(j as f64 * h, 1.0)).sum::<f64>() * h;
            1.0 / raw
        };
        let spec2 = difference_kernel(1, height, 0.0, 0.0, 1.0);
        let op2 = discretize(&spec2, 8, 2, Quadrature::Trapezoid).unwrap();
        let rep_a = torus_invertibility(&op2, 16, 1e-8).unwrap();
        assert!(!rep_a.invertible, "margin {}", rep_a.margin);
        assert!(rep_a.witness.iter().all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn two_axis_kernel_matches_dense_periodization() {
        // localized two-axis difference kernel; dense periodization over
        // 3x3 cells against the sampled symbol union
        let spec = KernelSpec {
            w: 2,
            axes: vec![0, 1],
            periods: vec![1.0, 1.0],
            d: 1,
            c1: 2.0,
            eval: Box::new(|t, s| {
                let d0 = t.coords[0] - s.coords[0];
                let d1 = t.coords[1] - s.coords[1];
                let v = (0.3 + 0.2 * (TAU * d0).cos() * (TAU * d1).sin())
                    * bump(d0, 1.0)
                    * bump(d1, 1.0);
                CdMatrix::scalar(2, 1, &CdComplex::from_complex(2, v, 0.0))
            }),
        };
        let g = 2usize;
        let op = discretize(&spec, g, 1, Quadrature::Trapezoid).unwrap();
        let r = 3usize;

        let h = 1.0 / g as f64;
        let total_pts = (r * g) * (r * g);
        let span = r as f64;
        let mut dense = CdMatrix::zero(2, total_pts, total_pts);
        let flat = |p0: usize, p1: usize| p0 * (r * g) + p1;
        for p0 in 0..r * g {
            for p1 in 0..r * g {
                for q0 in 0..r * g {
                    for q1 in 0..r * g {
                        let mut d0 = (p0 as f64 - q0 as f64) * h;
                        d0 -= (d0 / span).round() * span;
                        let mut d1 = (p1 as f64 - q1 as f64) * h;
                        d1 -= (d1 / span).round() * span;
                        let mut t = CdNumber::zero(2);
                        t.coords[0] = d0;
                        t.coords[1] = d1;
                        let v = (spec.eval)(&t, &CdNumber::zero(2)).entry(0, 0).re.coords[0];
                        let val = -v * h * h;
                        *dense.entry_mut(flat(p0, p1), flat(q0, q1)) =
                            CdComplex::from_complex(2, val, 0.0);
                    }
                }
                let i = flat(p0, p1);
                let cur = dense.entry(i, i).add(&CdComplex::one(2)).unwrap();
                *dense.entry_mut(i, i) = cur;
            }
        }
        let dense_eigs = rep::complex_eigenvalues(&dense.to_real_rep()).unwrap();

        let mut union = Vec::new();
        for a in 0..r {
            for b in 0..r {
                let thetas = [TAU * a as f64 / r as f64, TAU * b as f64 / r as f64];
                let sym = op.symbol_a(&thetas).unwrap();
                union.extend(pointwise_spectrum(&sym).unwrap());
            }
        }
        assert_eq!(dense_eigs.len(), union.len());
        let dist = rep::bottleneck_distance(&dense_eigs, &union);
        assert!(dist < 1e-7, "two-axis bottleneck {dist}");
    }
}
