//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] is a Wengert list: every operation appends a node holding its
//! forward value and the handles of its inputs. Because nodes are only ever
//! appended, the list is topologically ordered and [`Tape::backward`] is a
//! single reverse sweep that visits each node once.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CsrMatrix, Matrix, NumericError};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Element-wise nonlinearities available on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum UnaryOp {
    Sigmoid,
    Relu,
    LeakyRelu { slope: f64 },
    Softplus,
    Elu,
    Tanh,
    Exp,
    Log,
}

impl UnaryOp {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Sigmoid => sigmoid(x),
            UnaryOp::Relu => x.max(0.0),
            UnaryOp::LeakyRelu { slope } => {
                if x > 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            UnaryOp::Softplus => softplus(x),
            UnaryOp::Elu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            UnaryOp::Tanh => x.tanh(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Log => x.ln(),
        }
    }

    /// Derivative given the input `x` and the output `y = f(x)`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            UnaryOp::Sigmoid => y * (1.0 - y),
            UnaryOp::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            UnaryOp::LeakyRelu { slope } => {
                if x > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            UnaryOp::Softplus => sigmoid(x),
            UnaryOp::Elu => {
                if x > 0.0 {
                    1.0
                } else {
                    y + 1.0
                }
            }
            UnaryOp::Tanh => 1.0 - y * y,
            UnaryOp::Exp => y,
            UnaryOp::Log => 1.0 / x,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eˣ)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// In-neighbourhoods of a graph in compressed form: for destination `v`, the
/// sources are `sources[offsets[v]..offsets[v + 1]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhoods {
    offsets: Vec<usize>,
    sources: Vec<usize>,
}

impl Neighborhoods {
    /// Builds from per-destination source lists. Lists are sorted and deduplicated.
    pub fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut sources = Vec::new();
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            sources.extend_from_slice(list);
            offsets.push(sources.len());
        }
        Self { offsets, sources }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.sources.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.sources[self.offsets[v]..self.offsets[v + 1]]
    }
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulT(Var, Var),
    SpMatMul(Arc<CsrMatrix>, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    ScaleByEntry(Var, Var, usize),
    MulConst(Var, Matrix),
    Transpose(Var),
    RowSlice(Var, usize),
    ConcatCols(Vec<Var>),
    Unary(Var, UnaryOp),
    Softmax(Var),
    SumAll(Var),
    EdgeAttention {
        values: Var,
        src_score: Var,
        dst_score: Var,
        graph: Arc<Neighborhoods>,
        slope: f64,
        alpha: Vec<f64>,
    },
    WeightedBce {
        logits: Var,
        labels: Arc<Matrix>,
        mask: Arc<Matrix>,
        pos_weight: f64,
        scale: f64,
    },
}

struct Node {
    value: Matrix,
    op: Op,
}

/// Recording of a forward computation.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node that influenced it.
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient of `v`, or zeros of the given shape if `v` did not influence the loss.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Matrix {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }

    pub fn take(&mut self, v: Var) -> Option<Matrix> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

fn mismatch(op: &'static str, left: &Matrix, right: &Matrix) -> NumericError {
    NumericError::ShapeMismatch {
        op,
        left: left.shape(),
        right: right.shape(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Records an input (parameter or constant).
    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(value, Op::MatMul(a, b)))
    }

    /// `a · bᵀ`.
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let value = self.value(a).matmul_t(self.value(b))?;
        Ok(self.push(value, Op::MatMulT(a, b)))
    }

    /// Constant sparse matrix times a recorded dense matrix.
    pub fn sparse_matmul(&mut self, s: Arc<CsrMatrix>, b: Var) -> Result<Var, NumericError> {
        let value = s.mul_dense(self.value(b))?;
        Ok(self.push(value, Op::SpMatMul(s, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NumericError> {
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(value, Op::Add(a, b)))
    }

    /// Sums a non-empty list, left to right.
    pub fn add_all(&mut self, vars: &[Var]) -> Result<Var, NumericError> {
        let (&first, rest) = vars.split_first().ok_or(NumericError::EmptyInput("add_all"))?;
        rest.iter().try_fold(first, |acc, &v| self.add(acc, v))
    }

    /// Adds a 1×c row vector to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, NumericError> {
        let (m, r) = (self.value(a), self.value(row));
        if r.rows() != 1 || r.cols() != m.cols() {
            return Err(mismatch("add_row", m, r));
        }
        let mut value = m.clone();
        for i in 0..value.rows() {
            for (d, &b) in value.row_mut(i).iter_mut().zip(r.as_slice()) {
                *d += b;
            }
        }
        Ok(self.push(value, Op::AddRow(a, row)))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let value = self.value(a).scale(factor);
        self.push(value, Op::Scale(a, factor))
    }

    /// Multiplies `a` by the scalar stored at flat index `idx` of `s`.
    pub fn scale_by_entry(&mut self, a: Var, s: Var, idx: usize) -> Result<Var, NumericError> {
        let sv = self.value(s);
        if idx >= sv.len() {
            return Err(NumericError::IndexOutOfRange {
                index: (idx, 0),
                shape: sv.shape(),
            });
        }
        let factor = sv.as_slice()[idx];
        let value = self.value(a).scale(factor);
        Ok(self.push(value, Op::ScaleByEntry(a, s, idx)))
    }

    /// Element-wise product with a constant matrix.
    pub fn mul_const(&mut self, a: Var, c: Matrix) -> Result<Var, NumericError> {
        let value = self.value(a).hadamard(&c)?;
        Ok(self.push(value, Op::MulConst(a, c)))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let value = self.value(a).transpose();
        self.push(value, Op::Transpose(a))
    }

    /// Rows `start..start + len` of `a`.
    pub fn row_slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var, NumericError> {
        let m = self.value(a);
        if start + len > m.rows() {
            return Err(NumericError::IndexOutOfRange {
                index: (start + len, 0),
                shape: m.shape(),
            });
        }
        let value = m.slice_rows(start, len);
        Ok(self.push(value, Op::RowSlice(a, start)))
    }

    pub fn concat_cols(&mut self, vars: &[Var]) -> Result<Var, NumericError> {
        let first = *vars.first().ok_or(NumericError::EmptyInput("concat_cols"))?;
        let rows = self.value(first).rows();
        let mut cols = 0;
        for &v in vars {
            let m = self.value(v);
            if m.rows() != rows {
                return Err(mismatch("concat_cols", self.value(first), m));
            }
            cols += m.cols();
        }
        let mut value = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut off = 0;
            for &v in vars {
                let src = self.value(v).row(r);
                value.row_mut(r)[off..off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        Ok(self.push(value, Op::ConcatCols(vars.to_vec())))
    }

    pub fn unary(&mut self, a: Var, op: UnaryOp) -> Var {
        let value = self.value(a).map(|x| op.apply(x));
        self.push(value, Op::Unary(a, op))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, UnaryOp::Sigmoid)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, UnaryOp::Exp)
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.unary(a, UnaryOp::Log)
    }

    /// Row-wise softmax.
    pub fn softmax(&mut self, a: Var) -> Var {
        let m = self.value(a);
        let mut value = m.clone();
        for r in 0..value.rows() {
            softmax_in_place(value.row_mut(r));
        }
        self.push(value, Op::Softmax(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Matrix::scalar(self.value(a).sum());
        self.push(value, Op::SumAll(a))
    }

    /// Attention-weighted neighbourhood aggregation.
    ///
    /// For each destination `v`, logits `leaky_relu(dst[v] + src[u])` over the
    /// in-neighbours `u` are softmax-normalized into weights `α_vu`, and the
    /// output row is `Σ_u α_vu · values[u]`. `src_score` and `dst_score` are
    /// N×1 columns.
    pub fn edge_attention(
        &mut self,
        values: Var,
        src_score: Var,
        dst_score: Var,
        graph: Arc<Neighborhoods>,
        slope: f64,
    ) -> Result<Var, NumericError> {
        let z = self.value(values);
        let (s, d) = (self.value(src_score), self.value(dst_score));
        let n = graph.num_nodes();
        if z.rows() != n || s.shape() != (n, 1) || d.shape() != (n, 1) {
            return Err(mismatch("edge_attention", z, s));
        }
        let alpha = attention_weights(&graph, s.as_slice(), d.as_slice(), slope);
        let mut value = Matrix::zeros(n, z.cols());
        for v in 0..n {
            let start = graph.offsets[v];
            for (k, &u) in graph.neighbors(v).iter().enumerate() {
                let a = alpha[start + k];
                for (o, &x) in value.row_mut(v).iter_mut().zip(z.row(u)) {
                    *o += a * x;
                }
            }
        }
        Ok(self.push(
            value,
            Op::EdgeAttention {
                values,
                src_score,
                dst_score,
                graph,
                slope,
                alpha,
            },
        ))
    }

    /// Attention weights recorded by an [`Tape::edge_attention`] node, aligned
    /// with the neighbourhood lists.
    pub fn attention_of(&self, v: Var) -> Option<&[f64]> {
        match &self.nodes[v.0].op {
            Op::EdgeAttention { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Masked binary cross-entropy from logits, averaged over masked entries:
    ///
    /// `scale / |M| · Σ_{M} [ w₊·y·softplus(−x) + (1−y)·softplus(x) ]`
    pub fn weighted_bce(
        &mut self,
        logits: Var,
        labels: Arc<Matrix>,
        mask: Arc<Matrix>,
        pos_weight: f64,
        scale: f64,
    ) -> Result<Var, NumericError> {
        let x = self.value(logits);
        if x.shape() != labels.shape() {
            return Err(mismatch("weighted_bce", x, &labels));
        }
        if x.shape() != mask.shape() {
            return Err(mismatch("weighted_bce", x, &mask));
        }
        let count = mask.as_slice().iter().filter(|&&m| m != 0.0).count();
        if count == 0 {
            return Err(NumericError::EmptyInput("weighted_bce mask"));
        }
        let mut total = 0.0;
        for ((&xi, &yi), &mi) in x.as_slice().iter().zip(labels.as_slice()).zip(mask.as_slice()) {
            if mi != 0.0 {
                total += pos_weight * yi * softplus(-xi) + (1.0 - yi) * softplus(xi);
            }
        }
        let value = Matrix::scalar(scale * total / count as f64);
        Ok(self.push(
            value,
            Op::WeightedBce {
                logits,
                labels,
                mask,
                pos_weight,
                scale,
            },
        ))
    }

    /// Gradients of the scalar `loss` with respect to every recorded node.
    pub fn backward(&self, loss: Var) -> Result<Gradients, NumericError> {
        if self.value(loss).shape() != (1, 1) {
            return Err(NumericError::NotScalar(self.value(loss).shape()));
        }
        let mut grads: Vec<Option<Matrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Matrix::scalar(1.0));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            self.propagate(node, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(
        &self,
        node: &Node,
        g: &Matrix,
        grads: &mut [Option<Matrix>],
    ) -> Result<(), NumericError> {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let da = g.matmul_t(self.value(*b))?;
                let db = self.value(*a).t_matmul(g)?;
                accumulate(grads, *a, da)?;
                accumulate(grads, *b, db)?;
            }
            Op::MatMulT(a, b) => {
                let da = g.matmul(self.value(*b))?;
                let db = g.t_matmul(self.value(*a))?;
                accumulate(grads, *a, da)?;
                accumulate(grads, *b, db)?;
            }
            Op::SpMatMul(s, b) => {
                accumulate(grads, *b, s.t_mul_dense(g)?)?;
            }
            Op::Add(a, b) => {
                accumulate(grads, *a, g.clone())?;
                accumulate(grads, *b, g.clone())?;
            }
            Op::AddRow(a, row) => {
                let mut colsum = Matrix::zeros(1, g.cols());
                for r in g.iter_rows() {
                    for (c, &x) in colsum.as_mut_slice().iter_mut().zip(r) {
                        *c += x;
                    }
                }
                accumulate(grads, *a, g.clone())?;
                accumulate(grads, *row, colsum)?;
            }
            Op::Scale(a, factor) => accumulate(grads, *a, g.scale(*factor))?,
            Op::ScaleByEntry(a, s, idx) => {
                let sv = self.value(*s);
                let factor = sv.as_slice()[*idx];
                accumulate(grads, *a, g.scale(factor))?;
                let mut ds = Matrix::zeros(sv.rows(), sv.cols());
                ds.as_mut_slice()[*idx] = g.hadamard(self.value(*a))?.sum();
                accumulate(grads, *s, ds)?;
            }
            Op::MulConst(a, c) => accumulate(grads, *a, g.hadamard(c)?)?,
            Op::Transpose(a) => accumulate(grads, *a, g.transpose())?,
            Op::RowSlice(a, start) => {
                let src = self.value(*a);
                let mut da = Matrix::zeros(src.rows(), src.cols());
                let cols = src.cols();
                da.as_mut_slice()[start * cols..(start + g.rows()) * cols]
                    .copy_from_slice(g.as_slice());
                accumulate(grads, *a, da)?;
            }
            Op::ConcatCols(vars) => {
                let mut off = 0;
                for &v in vars {
                    let w = self.value(v).cols();
                    let mut part = Matrix::zeros(g.rows(), w);
                    for r in 0..g.rows() {
                        part.row_mut(r).copy_from_slice(&g.row(r)[off..off + w]);
                    }
                    off += w;
                    accumulate(grads, v, part)?;
                }
            }
            Op::Unary(a, op) => {
                let x = self.value(*a);
                let y = &node.value;
                let mut da = g.clone();
                for ((d, &xi), &yi) in da.as_mut_slice().iter_mut().zip(x.as_slice()).zip(y.as_slice())
                {
                    *d *= op.derivative(xi, yi);
                }
                accumulate(grads, *a, da)?;
            }
            Op::Softmax(a) => {
                let y = &node.value;
                let mut da = Matrix::zeros(y.rows(), y.cols());
                for r in 0..y.rows() {
                    let (yr, gr) = (y.row(r), g.row(r));
                    let inner: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                    for ((d, &yi), &gi) in da.row_mut(r).iter_mut().zip(yr).zip(gr) {
                        *d = yi * (gi - inner);
                    }
                }
                accumulate(grads, *a, da)?;
            }
            Op::SumAll(a) => {
                let (r, c) = self.value(*a).shape();
                accumulate(grads, *a, Matrix::filled(r, c, g.item()))?;
            }
            Op::EdgeAttention {
                values,
                src_score,
                dst_score,
                graph,
                slope,
                alpha,
            } => {
                let z = self.value(*values);
                let (s, d) = (self.value(*src_score), self.value(*dst_score));
                let n = graph.num_nodes();
                let mut dz = Matrix::zeros(z.rows(), z.cols());
                let mut ds = Matrix::zeros(n, 1);
                let mut dd = Matrix::zeros(n, 1);
                let mut dalpha = Vec::new();
                for v in 0..n {
                    let start = graph.offsets[v];
                    let nbrs = graph.neighbors(v);
                    let gv = g.row(v);
                    dalpha.clear();
                    for (k, &u) in nbrs.iter().enumerate() {
                        let a = alpha[start + k];
                        for (o, &x) in dz.row_mut(u).iter_mut().zip(gv) {
                            *o += a * x;
                        }
                        dalpha.push(super::matrix::dot(gv, z.row(u)));
                    }
                    let inner: f64 = nbrs
                        .iter()
                        .enumerate()
                        .map(|(k, _)| alpha[start + k] * dalpha[k])
                        .sum();
                    for (k, &u) in nbrs.iter().enumerate() {
                        let a = alpha[start + k];
                        let de = a * (dalpha[k] - inner);
                        let pre = d.as_slice()[v] + s.as_slice()[u];
                        let dpre = if pre > 0.0 { de } else { de * slope };
                        dd.as_mut_slice()[v] += dpre;
                        ds.as_mut_slice()[u] += dpre;
                    }
                }
                accumulate(grads, *values, dz)?;
                accumulate(grads, *src_score, ds)?;
                accumulate(grads, *dst_score, dd)?;
            }
            Op::WeightedBce {
                logits,
                labels,
                mask,
                pos_weight,
                scale,
            } => {
                let x = self.value(*logits);
                let count = mask.as_slice().iter().filter(|&&m| m != 0.0).count() as f64;
                let factor = g.item() * scale / count;
                let mut dx = Matrix::zeros(x.rows(), x.cols());
                for (((d, &xi), &yi), &mi) in dx
                    .as_mut_slice()
                    .iter_mut()
                    .zip(x.as_slice())
                    .zip(labels.as_slice())
                    .zip(mask.as_slice())
                {
                    if mi != 0.0 {
                        let p = sigmoid(xi);
                        *d = factor * (pos_weight * yi * (p - 1.0) + (1.0 - yi) * p);
                    }
                }
                accumulate(grads, *logits, dx)?;
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Matrix>], v: Var, delta: Matrix) -> Result<(), NumericError> {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&delta),
        slot @ None => {
            *slot = Some(delta);
            Ok(())
        }
    }
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in row.iter_mut() {
        *x /= total;
    }
}

fn attention_weights(graph: &Neighborhoods, src: &[f64], dst: &[f64], slope: f64) -> Vec<f64> {
    let mut alpha = vec![0.0; graph.num_edges()];
    for v in 0..graph.num_nodes() {
        let start = graph.offsets[v];
        let nbrs = graph.neighbors(v);
        let slot = &mut alpha[start..start + nbrs.len()];
        for (a, &u) in slot.iter_mut().zip(nbrs) {
            let pre = dst[v] + src[u];
            *a = if pre > 0.0 { pre } else { slope * pre };
        }
        if !slot.is_empty() {
            softmax_in_place(slot);
        }
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_gradient_is_all_ones() {
        let mut t = Tape::new();
        let w = t.leaf(Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]).unwrap());
        let loss = t.sum(w);
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(w).unwrap(), &Matrix::filled(2, 2, 1.0));
    }

    #[test]
    fn sigmoid_gradient_at_zero() {
        // loss = sigmoid(w)·v at w = 0
        let v = Matrix::from_rows(&[[2.0], [-3.0], [0.5]]).unwrap();
        let mut t = Tape::new();
        let w = t.leaf(Matrix::zeros(1, 1));
        let s = t.sigmoid(w);
        let vv = t.leaf(v.transpose());
        let prod = t.matmul(s, vv).unwrap();
        let loss = t.sum(prod);
        let gv = t.backward(loss).unwrap();
        let grad_w = gv.get(w).unwrap().item();
        assert!((grad_w - 0.25 * (2.0 - 3.0 + 0.5)).abs() < 1e-15);
        // gradient w.r.t. v is sigmoid(0) = 0.5 everywhere
        assert_eq!(gv.get(vv).unwrap(), &Matrix::filled(1, 3, 0.5));
    }

    #[test]
    fn softmax_of_equal_logits_is_uniform() {
        let mut t = Tape::new();
        let x = t.leaf(Matrix::filled(1, 4, 0.7));
        let y = t.softmax(x);
        for &p in t.value(y).as_slice() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn self_loop_only_attention_is_identity() {
        let graph = Arc::new(Neighborhoods::from_lists(vec![vec![0], vec![1]]));
        let mut t = Tape::new();
        let z = t.leaf(Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        let s = t.leaf(Matrix::from_rows(&[[0.3], [-1.0]]).unwrap());
        let d = t.leaf(Matrix::from_rows(&[[2.0], [0.1]]).unwrap());
        let out = t.edge_attention(z, s, d, graph, 0.2).unwrap();
        assert_eq!(t.value(out), t.value(z));
        assert_eq!(t.attention_of(out).unwrap(), &[1.0, 1.0]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut t = Tape::new();
        let w = t.leaf(Matrix::zeros(2, 2));
        assert!(matches!(t.backward(w), Err(NumericError::NotScalar((2, 2)))));
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
