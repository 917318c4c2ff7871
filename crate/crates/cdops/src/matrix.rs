//! Rectangular matrices and fiber vectors over the complexified algebra.
//!
//! `CdMatrix` is the finite-dimensional operator type (entries act by left
//! multiplication); `CdVector` is an element of the fiber `Y = A_v^d`,
//! complexified. The fiber norm is the max over entry norms and the matrix
//! norm bound is the corresponding induced row-sum bound.

use crate::algebra::{cdc_to_vec, real_rep, CdComplex};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Element of the (complexified) fiber `Y = A_v^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdVector {
    pub entries: Vec<CdComplex>,
}

impl CdVector {
    pub fn zero(level: u32, d: usize) -> Self {
        CdVector {
            entries: vec![CdComplex::zero(level); d],
        }
    }

    /// Fiber basis vector `e_k * y` with `y = i_0`.
    pub fn basis(level: u32, d: usize, k: usize) -> Self {
        let mut v = Self::zero(level, d);
        v.entries[k] = CdComplex::one(level);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn level(&self) -> u32 {
        self.entries[0].level()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("vector dims differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(CdVector { entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("vector dims differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(CdVector { entries })
    }

    pub fn scale_real(&self, t: f64) -> Self {
        CdVector {
            entries: self.entries.iter().map(|e| e.scale(t)).collect(),
        }
    }

    /// Sup norm over the fiber entries.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }
}

/// Dense rectangular matrix of complexified entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdMatrix {
    pub rows: usize,
    pub cols: usize,
    #[serde(rename = "v")]
    pub level: u32,
    /// Row-major entries.
    pub data: Vec<CdComplex>,
}

impl CdMatrix {
    pub fn zero(level: u32, rows: usize, cols: usize) -> Self {
        CdMatrix {
            rows,
            cols,
            level,
            data: vec![CdComplex::zero(level); rows * cols],
        }
    }

    pub fn identity(level: u32, n: usize) -> Self {
        let mut m = Self::zero(level, n, n);
        for i in 0..n {
            *m.entry_mut(i, i) = CdComplex::one(level);
        }
        m
    }

    /// Scalar matrix `s * I`.
    pub fn scalar(level: u32, n: usize, s: &CdComplex) -> Self {
        let mut m = Self::zero(level, n, n);
        for i in 0..n {
            *m.entry_mut(i, i) = s.clone();
        }
        m
    }

    pub fn entry(&self, i: usize, j: usize) -> &CdComplex {
        &self.data[i * self.cols + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut CdComplex {
        &mut self.data[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols || self.level != other.level {
            return Err(Error::Dimension(format!(
                "matrix shapes differ: {}x{} (v={}) vs {}x{} (v={})",
                self.rows, self.cols, self.level, other.rows, other.cols, other.level
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(CdMatrix {
            rows: self.rows,
            cols: self.cols,
            level: self.level,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(CdMatrix {
            rows: self.rows,
            cols: self.cols,
            level: self.level,
            data,
        })
    }

    pub fn neg(&self) -> Self {
        CdMatrix {
            rows: self.rows,
            cols: self.cols,
            level: self.level,
            data: self.data.iter().map(|e| e.neg()).collect(),
        }
    }

    pub fn scale_real(&self, t: f64) -> Self {
        CdMatrix {
            rows: self.rows,
            cols: self.cols,
            level: self.level,
            data: self.data.iter().map(|e| e.scale(t)).collect(),
        }
    }

    /// Left scalar multiple `s * M` (entrywise `s * m_ij`).
    pub fn scale_left(&self, s: &CdComplex) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|e| s.mul(e))
            .collect::<Result<_>>()?;
        Ok(CdMatrix {
            rows: self.rows,
            cols: self.cols,
            level: self.level,
            data,
        })
    }

    /// Right scalar multiple `M * s`.
    pub fn scale_right(&self, s: &CdComplex) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|e| e.mul(s))
            .collect::<Result<_>>()?;
        Ok(CdMatrix {
            rows: self.rows,
            cols: self.cols,
            level: self.level,
            data,
        })
    }

    /// Matrix product with entrywise left-multiplication semantics:
    /// `(AB)_{ik} = sum_j A_{ij} B_{jk}`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.level != other.level {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CdMatrix::zero(self.level, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.entry(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.cols {
                    let b = other.entry(j, k);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b)?;
                    let cur = out.entry(i, k).add(&prod)?;
                    *out.entry_mut(i, k) = cur;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &CdVector) -> Result<CdVector> {
        if self.cols != x.dim() {
            return Err(Error::Dimension(format!(
                "matrix {}x{} applied to vector of dim {}",
                self.rows,
                self.cols,
                x.dim()
            )));
        }
        let mut out = CdVector::zero(self.level, self.rows);
        for i in 0..self.rows {
            let mut acc = CdComplex::zero(self.level);
            for j in 0..self.cols {
                let a = self.entry(i, j);
                if a.is_zero() || x.entries[j].is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(&x.entries[j])?)?;
            }
            out.entries[i] = acc;
        }
        Ok(out)
    }

    /// Row-sum bound induced by the sup fiber norm:
    /// `max_i sum_j |m_ij|`. Submultiplicative for levels <= 3.
    pub fn norm_bound(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.data.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Real representation of the whole matrix: the block matrix of entry
    /// representations, of dimension `2^{v+1} rows x 2^{v+1} cols`, acting on
    /// stacked coordinate vectors.
    pub fn to_real_rep(&self) -> nalgebra::DMatrix<f64> {
        let b = 2usize << self.level;
        let mut m = nalgebra::DMatrix::<f64>::zeros(b * self.rows, b * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                m.view_mut((i * b, j * b), (b, b)).copy_from(&real_rep(e));
            }
        }
        m
    }

    /// Stacked coordinate vector of a fiber vector, matching `to_real_rep`.
    pub fn stack_vector(x: &CdVector) -> nalgebra::DVector<f64> {
        let b = 2usize << x.level();
        let mut v = nalgebra::DVector::<f64>::zeros(b * x.dim());
        for (i, e) in x.entries.iter().enumerate() {
            let coords = cdc_to_vec(e);
            for (r, &c) in coords.iter().enumerate() {
                v[i * b + r] = c;
            }
        }
        v
    }

    pub fn unstack_vector(level: u32, v: &nalgebra::DVector<f64>) -> CdVector {
        let b = 2usize << level;
        let d = v.len() / b;
        let mut out = CdVector::zero(level, d);
        for i in 0..d {
            out.entries[i] = crate::algebra::cdc_from_vec(level, &v.as_slice()[i * b..(i + 1) * b]);
        }
        out
    }
}
