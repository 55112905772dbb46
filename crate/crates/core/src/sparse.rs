//! Compressed-sparse-row operators over complex amplitudes.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Rows per rayon task in [`SparseOperator::apply_into`].
const PAR_CHUNK: usize = 4096;

/// Immutable CSR matrix. `apply` is safe to call from many threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dimension: usize,
    row_offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from per-row `(column, value)` lists. Duplicate columns are
    /// summed and exact zeros dropped.
    pub fn from_rows<I>(dimension: usize, rows: I, hermitian: bool) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<(usize, C64)>>,
    {
        let mut row_offsets = Vec::with_capacity(dimension + 1);
        let mut columns = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        let mut count = 0usize;
        for mut row in rows {
            count += 1;
            row.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let col = row[i].0;
                if col >= dimension {
                    return Err(Error::DimensionMismatch { expected: dimension, found: col });
                }
                let mut acc = C64::new(0.0, 0.0);
                while i < row.len() && row[i].0 == col {
                    acc += row[i].1;
                    i += 1;
                }
                if acc != C64::new(0.0, 0.0) {
                    columns.push(col);
                    values.push(acc);
                }
            }
            row_offsets.push(columns.len());
        }
        if count != dimension {
            return Err(Error::DimensionMismatch { expected: dimension, found: count });
        }
        Ok(SparseOperator { dimension, row_offsets, columns, values, hermitian })
    }

    pub fn identity(dimension: usize) -> Self {
        SparseOperator {
            dimension,
            row_offsets: (0..=dimension).collect(),
            columns: (0..dimension).collect(),
            values: vec![C64::new(1.0, 0.0); dimension],
            hermitian: true,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_rows(
            diag.len(),
            diag.iter().enumerate().map(|(i, &d)| vec![(i, C64::new(d, 0.0))]),
            true,
        )
        .expect("diagonal rows are in range")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `(column, value)` pairs of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.columns[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// True if every stored entry is real.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.dimension];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// `out = self · v`. Each row is summed in stored column order, so the
    /// result does not depend on how rows are split across threads.
    pub fn apply_into(&self, v: &[C64], out: &mut [C64]) -> Result<()> {
        if v.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: v.len() });
        }
        if out.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: out.len() });
        }
        let row_dot = |i: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                acc += self.values[k] * v[self.columns[k]];
            }
            acc
        };
        if self.dimension >= 4 * PAR_CHUNK {
            out.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = c * PAR_CHUNK;
                for (j, o) in chunk.iter_mut().enumerate() {
                    *o = row_dot(base + j);
                }
            });
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = row_dot(i);
            }
        }
        Ok(())
    }

    /// `⟨u| self |v⟩`.
    pub fn matrix_element(&self, u: &[C64], v: &[C64]) -> Result<C64> {
        let w = self.apply(v)?;
        Ok(crate::linalg::dot(u, &w))
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.dimension, self.dimension));
        for i in 0..self.dimension {
            for (j, v) in self.row(i) {
                m[[i, j]] += v;
            }
        }
        m
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dimension];
        for i in 0..self.dimension {
            for (j, v) in self.row(i) {
                rows[j].push((i, v.conj()));
            }
        }
        Self::from_rows(self.dimension, rows, self.hermitian).expect("adjoint keeps indices in range")
    }

    /// `max |M − M†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let mut worst = 0.0f64;
        for i in 0..self.dimension {
            let mut a = self.row(i).peekable();
            let mut b = adj.row(i).peekable();
            loop {
                let d = match (a.peek().copied(), b.peek().copied()) {
                    (None, None) => break,
                    (Some((ca, va)), Some((cb, vb))) => {
                        if ca == cb {
                            a.next();
                            b.next();
                            (va - vb).norm()
                        } else if ca < cb {
                            a.next();
                            va.norm()
                        } else {
                            b.next();
                            vb.norm()
                        }
                    }
                    (Some((_, va)), None) => {
                        a.next();
                        va.norm()
                    }
                    (None, Some((_, vb))) => {
                        b.next();
                        vb.norm()
                    }
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |A − B|` entrywise.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> Result<f64> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: other.dimension });
        }
        let neg = other.scaled(-1.0);
        let rows = (0..self.dimension).map(|i| self.row(i).chain(neg.row(i)).collect::<Vec<_>>());
        let diff = SparseOperator::from_rows(self.dimension, rows, false)?;
        Ok(diff.values.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }
}
