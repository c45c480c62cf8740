//! Band storage and banded LU factorization with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative pivot size below which a factorization is declared singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

/// Square matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // Row i holds columns i-kl ..= i+ku.
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    /// Band matrix holding every entry of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let k = n.saturating_sub(1);
        let mut out = Self::zeros(n, k, k);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * self.width() + j + self.kl - i]
        } else {
            0.0
        }
    }

    /// # Panics
    /// If `(i, j)` lies outside the stored band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] = v;
    }

    /// Column range stored for row `i`.
    pub fn row_columns(&self, i: usize) -> core::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    /// Nonzero entries of row `i` as `(col, value)`.
    pub fn row_nonzeros(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_columns(i)
            .map(move |j| (j, self.get(i, j)))
            .filter(|&(_, v)| v != 0.0)
    }

    /// Largest `|i - j|` over nonzero entries.
    pub fn effective_bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row_nonzeros(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_columns(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.row_columns(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `(row, col, value)` for every nonzero entry, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n)
            .flat_map(|i| self.row_nonzeros(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.n).all(|i| {
            self.row_columns(i)
                .all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol * scale)
        })
    }

    /// `self - shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let d = out.get(i, i);
            out.set(i, i, d - shift);
        }
        out
    }

    pub fn lu(&self) -> Result<BandLu> {
        BandLu::factor(self)
    }
}

/// LU factors of a band matrix; `U` gains `kl` extra super-diagonals from pivoting.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    // Row i holds columns i-kl ..= i+kl+ku of the working matrix.
    upper: Vec<f64>,
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn stride(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.stride() + j + self.kl - i
    }

    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let mut lu = Self {
            n,
            kl,
            ku,
            upper: vec![0.0; n * (2 * kl + ku + 1)],
            multipliers: vec![0.0; n * kl],
            pivots: vec![0; n],
        };
        for i in 0..n {
            for j in a.row_columns(i) {
                let k = lu.idx(i, j);
                lu.upper[k] = a.get(i, j);
            }
        }
        let threshold = SINGULAR_PIVOT_RTOL * a.max_abs();
        let reach = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.upper[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.upper[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > threshold) {
                return Err(Error::NumericFailure(alloc::format!(
                    "zero pivot in column {k}"
                )));
            }
            lu.pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a_idx, b_idx) = (lu.idx(k, j), lu.idx(p, j));
                    lu.upper.swap(a_idx, b_idx);
                }
            }
            let pivot = lu.upper[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let m = lu.upper[ik] / pivot;
                lu.upper[ik] = 0.0;
                lu.multipliers[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = lu.upper[lu.idx(k, j)];
                        let ij = lu.idx(i, j);
                        lu.upper[ij] -= m * kj;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.multipliers[k * self.kl + (i - k - 1)] * bk;
                }
            }
        }
        let reach = self.kl + self.ku;
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                s -= self.upper[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.upper[self.idx(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
