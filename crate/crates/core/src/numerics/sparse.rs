use super::{Matrix, NumericError};

/// Compressed-row sparse matrix. Column indices within a row are sorted and unique.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Repeated coordinates are summed
    /// into a single entry; explicit zeros are kept.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, NumericError> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(NumericError::IndexOutOfRange {
                    index: (r, c),
                    shape: (rows, cols),
                });
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
                continue;
            }
            last = Some((r, c));
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let mut triplets = Vec::new();
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v != 0.0 {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), triplets).expect("indices in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` for row `r`.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row_entries(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m.set(r, c, v);
        }
        m
    }

    pub fn transpose(&self) -> CsrMatrix {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
            .expect("indices in range")
    }

    /// `self · dense`.
    pub fn mul_dense(&self, dense: &Matrix) -> Result<Matrix, NumericError> {
        if self.cols != dense.rows() {
            return Err(NumericError::ShapeMismatch {
                op: "sparse_matmul",
                left: self.shape(),
                right: dense.shape(),
            });
        }
        let n = dense.cols();
        let mut out = Matrix::zeros(self.rows, n);
        for r in 0..self.rows {
            let dst = out.row_mut(r);
            for (c, v) in self.row_entries(r) {
                for (d, &x) in dst.iter_mut().zip(dense.row(c)) {
                    *d += v * x;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · dense` without building the transpose.
    pub fn t_mul_dense(&self, dense: &Matrix) -> Result<Matrix, NumericError> {
        if self.rows != dense.rows() {
            return Err(NumericError::ShapeMismatch {
                op: "sparse_t_matmul",
                left: self.shape(),
                right: dense.shape(),
            });
        }
        let n = dense.cols();
        let mut out = Matrix::zeros(self.cols, n);
        for r in 0..self.rows {
            let src = dense.row(r);
            for (c, v) in self.row_entries(r) {
                for (d, &x) in out.row_mut(c).iter_mut().zip(src) {
                    *d += v * x;
                }
            }
        }
        Ok(out)
    }
}
