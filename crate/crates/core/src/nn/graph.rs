//! Reverse-mode automatic differentiation over dense matrices.
//!
//! Every value on the graph is a `[rows, cols]` matrix. Nodes are appended
//! in evaluation order, so the node list is already a topological order and
//! the backward pass is a single reverse sweep.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{s, Array2, Axis, Zip};

use super::activation::Activation;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

static NEXT_GRAPH_ID: AtomicU64 = AtomicU64::new(1);

/// Handle to a node of one particular [`ComputeGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId {
    graph: u64,
    index: usize,
}

impl NodeId {
    pub fn index(self) -> usize {
        self.index
    }
}

#[derive(Debug, Clone)]
enum Op<S> {
    Leaf,
    /// `x · wᵀ`, with `w` stored `out × in`.
    MatMulT { x: usize, w: usize },
    /// Adds a `1 × n` row to every row of `x`.
    AddRow { x: usize, row: usize },
    Activate { x: usize, act: Activation },
    Concat { parts: Vec<usize> },
    Add { a: usize, b: usize },
    Sub { a: usize, b: usize },
    Mul { a: usize, b: usize },
    Scale { x: usize, c: S },
    /// Repeats a `1 × n` row `rows` times.
    BroadcastRows { x: usize },
    Softmax { x: usize },
    LogSoftmax { x: usize },
    Log { x: usize },
    /// Per-row dot product, `rows × 1`.
    RowDot { a: usize, b: usize },
    /// Picks column `idx[r]` of row `r`, `rows × 1`.
    Gather { x: usize, idx: Vec<usize> },
    Square { x: usize },
    Mean { x: usize },
    Sum { x: usize },
}

#[derive(Debug, Clone)]
struct Node<S> {
    value: Array2<S>,
    op: Op<S>,
    requires_grad: bool,
}

/// Ordered record of primitive operations and their results.
#[derive(Debug)]
pub struct ComputeGraph<S> {
    id: u64,
    nodes: Vec<Node<S>>,
}

impl<S: Scalar> Default for ComputeGraph<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradients produced by [`ComputeGraph::backward`].
#[derive(Debug)]
pub struct Gradients<S> {
    graph: u64,
    grads: Vec<Option<Array2<S>>>,
    shapes: Vec<(usize, usize)>,
}

impl<S: Scalar> Gradients<S> {
    /// Gradient for leaf `id`; zero when the loss does not depend on it.
    /// Interior buffers are released during the sweep and read as zero.
    pub fn wrt(&self, id: NodeId) -> Result<Array2<S>> {
        if id.graph != self.graph || id.index >= self.grads.len() {
            return Err(Error::ForeignNode { node: id.index });
        }
        Ok(match &self.grads[id.index] {
            Some(g) => g.clone(),
            None => Array2::zeros(self.shapes[id.index]),
        })
    }
}

fn softmax_rows<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(S::neg_infinity(), S::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: S = row.iter().copied().sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

fn log_softmax_rows<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(S::neg_infinity(), S::max);
        let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<S>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}

fn accumulate<S: Scalar>(slot: &mut Option<Array2<S>>, g: Array2<S>) {
    match slot {
        Some(acc) => *acc += &g,
        None => *slot = Some(g),
    }
}

impl<S: Scalar> ComputeGraph<S> {
    pub fn new() -> Self {
        ComputeGraph {
            id: NEXT_GRAPH_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn idx(&self, id: NodeId) -> Result<usize> {
        if id.graph != self.id || id.index >= self.nodes.len() {
            return Err(Error::ForeignNode { node: id.index });
        }
        Ok(id.index)
    }

    fn push(&mut self, value: Array2<S>, op: Op<S>, requires_grad: bool) -> NodeId {
        let index = self.nodes.len();
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        NodeId {
            graph: self.id,
            index,
        }
    }

    fn rg(&self, i: usize) -> bool {
        self.nodes[i].requires_grad
    }

    /// Leaf that receives gradients.
    pub fn param(&mut self, value: Array2<S>) -> NodeId {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf that never receives gradients.
    pub fn constant(&mut self, value: Array2<S>) -> NodeId {
        self.push(value, Op::Leaf, false)
    }

    pub fn input(&mut self, t: &Tensor<S>) -> NodeId {
        let rg = t.requires_grad;
        self.push(t.to_matrix(), Op::Leaf, rg)
    }

    /// Copy of `id` with the gradient path cut.
    pub fn detach(&mut self, id: NodeId) -> Result<NodeId> {
        let i = self.idx(id)?;
        let v = self.nodes[i].value.clone();
        Ok(self.constant(v))
    }

    pub fn value(&self, id: NodeId) -> Result<&Array2<S>> {
        let i = self.idx(id)?;
        Ok(&self.nodes[i].value)
    }

    pub fn tensor(&self, id: NodeId) -> Result<Tensor<S>> {
        Ok(Tensor::from_matrix(self.value(id)?))
    }

    pub fn matmul_t(&mut self, x: NodeId, w: NodeId) -> Result<NodeId> {
        let (xi, wi) = (self.idx(x)?, self.idx(w)?);
        let (xv, wv) = (&self.nodes[xi].value, &self.nodes[wi].value);
        if xv.ncols() != wv.ncols() {
            return Err(Error::shape(
                "matmul",
                format!("input has {} columns, weights expect {}", xv.ncols(), wv.ncols()),
            ));
        }
        let out = xv.dot(&wv.t());
        let rg = self.rg(xi) || self.rg(wi);
        Ok(self.push(out, Op::MatMulT { x: xi, w: wi }, rg))
    }

    pub fn add_row(&mut self, x: NodeId, row: NodeId) -> Result<NodeId> {
        let (xi, ri) = (self.idx(x)?, self.idx(row)?);
        let (xv, rv) = (&self.nodes[xi].value, &self.nodes[ri].value);
        if rv.nrows() != 1 || rv.ncols() != xv.ncols() {
            return Err(Error::shape(
                "add_row",
                format!("{:?} + row {:?}", xv.dim(), rv.dim()),
            ));
        }
        let out = xv + rv;
        let rg = self.rg(xi) || self.rg(ri);
        Ok(self.push(out, Op::AddRow { x: xi, row: ri }, rg))
    }

    pub fn activate(&mut self, x: NodeId, act: Activation) -> Result<NodeId> {
        if act == Activation::None {
            return Ok(x);
        }
        let xi = self.idx(x)?;
        let out = self.nodes[xi].value.mapv(|v| act.apply(v));
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Activate { x: xi, act }, rg))
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(Error::shape("concat", "no inputs"));
        }
        let idx = parts.iter().map(|&p| self.idx(p)).collect::<Result<Vec<_>>>()?;
        let rows = self.nodes[idx[0]].value.nrows();
        if idx.iter().any(|&i| self.nodes[i].value.nrows() != rows) {
            return Err(Error::shape("concat", "row counts differ"));
        }
        let views: Vec<_> = idx.iter().map(|&i| self.nodes[i].value.view()).collect();
        let out = ndarray::concatenate(Axis(1), &views).expect("rows checked");
        let rg = idx.iter().any(|&i| self.rg(i));
        Ok(self.push(out, Op::Concat { parts: idx }, rg))
    }

    fn same_shape(&self, op: &'static str, a: usize, b: usize) -> Result<()> {
        let (da, db) = (self.nodes[a].value.dim(), self.nodes[b].value.dim());
        if da != db {
            return Err(Error::shape(op, format!("{da:?} vs {db:?}")));
        }
        Ok(())
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        self.same_shape("add", ai, bi)?;
        let out = &self.nodes[ai].value + &self.nodes[bi].value;
        let rg = self.rg(ai) || self.rg(bi);
        Ok(self.push(out, Op::Add { a: ai, b: bi }, rg))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        self.same_shape("sub", ai, bi)?;
        let out = &self.nodes[ai].value - &self.nodes[bi].value;
        let rg = self.rg(ai) || self.rg(bi);
        Ok(self.push(out, Op::Sub { a: ai, b: bi }, rg))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        self.same_shape("mul", ai, bi)?;
        let out = &self.nodes[ai].value * &self.nodes[bi].value;
        let rg = self.rg(ai) || self.rg(bi);
        Ok(self.push(out, Op::Mul { a: ai, b: bi }, rg))
    }

    pub fn scale(&mut self, x: NodeId, c: S) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let out = &self.nodes[xi].value * c;
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Scale { x: xi, c }, rg))
    }

    pub fn broadcast_rows(&mut self, x: NodeId, rows: usize) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let xv = &self.nodes[xi].value;
        if xv.nrows() != 1 {
            return Err(Error::shape("broadcast_rows", "input must be a single row"));
        }
        let out = xv
            .broadcast((rows, xv.ncols()))
            .expect("single row broadcasts")
            .to_owned();
        let rg = self.rg(xi);
        Ok(self.push(out, Op::BroadcastRows { x: xi }, rg))
    }

    pub fn softmax(&mut self, x: NodeId) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let out = softmax_rows(&self.nodes[xi].value);
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Softmax { x: xi }, rg))
    }

    pub fn log_softmax(&mut self, x: NodeId) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let out = log_softmax_rows(&self.nodes[xi].value);
        let rg = self.rg(xi);
        Ok(self.push(out, Op::LogSoftmax { x: xi }, rg))
    }

    pub fn log(&mut self, x: NodeId) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let out = self.nodes[xi].value.mapv(|v| v.ln());
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Log { x: xi }, rg))
    }

    pub fn row_dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        self.same_shape("row_dot", ai, bi)?;
        let prod = &self.nodes[ai].value * &self.nodes[bi].value;
        let out = prod.sum_axis(Axis(1)).insert_axis(Axis(1));
        let rg = self.rg(ai) || self.rg(bi);
        Ok(self.push(out, Op::RowDot { a: ai, b: bi }, rg))
    }

    pub fn gather(&mut self, x: NodeId, idx: &[usize]) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let xv = &self.nodes[xi].value;
        if idx.len() != xv.nrows() || idx.iter().any(|&c| c >= xv.ncols()) {
            return Err(Error::shape("gather", "one in-range column per row required"));
        }
        let out = Array2::from_shape_fn((idx.len(), 1), |(r, _)| xv[[r, idx[r]]]);
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Gather { x: xi, idx: idx.to_vec() }, rg))
    }

    pub fn square(&mut self, x: NodeId) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let out = self.nodes[xi].value.mapv(|v| v * v);
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Square { x: xi }, rg))
    }

    /// Mean over every element, `1 × 1`.
    pub fn mean(&mut self, x: NodeId) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let v = &self.nodes[xi].value;
        let n = S::of(v.len() as f64);
        let out = Array2::from_elem((1, 1), v.sum() / n);
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Mean { x: xi }, rg))
    }

    /// Sum over every element, `1 × 1`.
    pub fn sum(&mut self, x: NodeId) -> Result<NodeId> {
        let xi = self.idx(x)?;
        let out = Array2::from_elem((1, 1), self.nodes[xi].value.sum());
        let rg = self.rg(xi);
        Ok(self.push(out, Op::Sum { x: xi }, rg))
    }

    /// Reverse sweep from a `1 × 1` loss.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients<S>> {
        let li = self.idx(loss)?;
        let (r, c) = self.nodes[li].value.dim();
        if (r, c) != (1, 1) {
            return Err(Error::NonScalarLoss { rows: r, cols: c });
        }
        let mut grads: Vec<Option<Array2<S>>> = vec![None; li + 1];
        grads[li] = Some(Array2::from_elem((1, 1), S::one()));

        for i in (0..=li).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.requires_grad {
                grads[i] = Some(g);
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                grads[i] = Some(g);
                continue;
            }
            let val = |j: usize| &self.nodes[j].value;
            match &node.op {
                Op::Leaf => unreachable!(),
                Op::MatMulT { x, w } => {
                    if self.rg(*x) {
                        accumulate(&mut grads[*x], g.dot(val(*w)));
                    }
                    if self.rg(*w) {
                        accumulate(&mut grads[*w], g.t().dot(val(*x)));
                    }
                }
                Op::AddRow { x, row } => {
                    if self.rg(*row) {
                        accumulate(&mut grads[*row], g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                    if self.rg(*x) {
                        accumulate(&mut grads[*x], g);
                    }
                }
                Op::Activate { x, act } => {
                    if self.rg(*x) {
                        let mut d = g;
                        Zip::from(&mut d)
                            .and(val(*x))
                            .and(&node.value)
                            .for_each(|d, &xv, &yv| *d *= act.derivative(xv, yv));
                        accumulate(&mut grads[*x], d);
                    }
                }
                Op::Concat { parts } => {
                    let mut start = 0;
                    for &p in parts {
                        let w = val(p).ncols();
                        if self.rg(p) {
                            accumulate(&mut grads[p], g.slice(s![.., start..start + w]).to_owned());
                        }
                        start += w;
                    }
                }
                Op::Add { a, b } => {
                    if self.rg(*a) {
                        accumulate(&mut grads[*a], g.clone());
                    }
                    if self.rg(*b) {
                        accumulate(&mut grads[*b], g);
                    }
                }
                Op::Sub { a, b } => {
                    if self.rg(*a) {
                        accumulate(&mut grads[*a], g.clone());
                    }
                    if self.rg(*b) {
                        accumulate(&mut grads[*b], -g);
                    }
                }
                Op::Mul { a, b } => {
                    if self.rg(*a) {
                        accumulate(&mut grads[*a], &g * val(*b));
                    }
                    if self.rg(*b) {
                        accumulate(&mut grads[*b], &g * val(*a));
                    }
                }
                Op::Scale { x, c } => {
                    if self.rg(*x) {
                        accumulate(&mut grads[*x], g * *c);
                    }
                }
                Op::BroadcastRows { x } => {
                    if self.rg(*x) {
                        accumulate(&mut grads[*x], g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                    }
                }
                Op::Softmax { x } => {
                    if self.rg(*x) {
                        let y = &node.value;
                        let inner = (&g * y).sum_axis(Axis(1)).insert_axis(Axis(1));
                        accumulate(&mut grads[*x], y * &(&g - &inner));
                    }
                }
                Op::LogSoftmax { x } => {
                    if self.rg(*x) {
                        let p = node.value.mapv(|v| v.exp());
                        let total = g.sum_axis(Axis(1)).insert_axis(Axis(1));
                        accumulate(&mut grads[*x], &g - &(&p * &total));
                    }
                }
                Op::Log { x } => {
                    if self.rg(*x) {
                        accumulate(&mut grads[*x], &g / val(*x));
                    }
                }
                Op::RowDot { a, b } => {
                    if self.rg(*a) {
                        accumulate(&mut grads[*a], val(*b) * &g);
                    }
                    if self.rg(*b) {
                        accumulate(&mut grads[*b], val(*a) * &g);
                    }
                }
                Op::Gather { x, idx } => {
                    if self.rg(*x) {
                        let mut d = Array2::zeros(val(*x).dim());
                        for (r, &c) in idx.iter().enumerate() {
                            d[[r, c]] = g[[r, 0]];
                        }
                        accumulate(&mut grads[*x], d);
                    }
                }
                Op::Square { x } => {
                    if self.rg(*x) {
                        let two = S::of(2.0);
                        accumulate(&mut grads[*x], &g * &val(*x).mapv(|v| two * v));
                    }
                }
                Op::Mean { x } => {
                    if self.rg(*x) {
                        let v = val(*x);
                        let gv = g[[0, 0]] / S::of(v.len() as f64);
                        accumulate(&mut grads[*x], Array2::from_elem(v.dim(), gv));
                    }
                }
                Op::Sum { x } => {
                    if self.rg(*x) {
                        accumulate(&mut grads[*x], Array2::from_elem(val(*x).dim(), g[[0, 0]]));
                    }
                }
            }
        }

        let shapes = self.nodes.iter().map(|n| n.value.dim()).collect();
        grads.resize(self.nodes.len(), None);
        Ok(Gradients {
            graph: self.id,
            grads,
            shapes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn linear_gradient() {
        let mut g = ComputeGraph::<f64>::new();
        let w = g.param(array![[2.0]]);
        let x = g.constant(array![[3.0]]);
        let y = g.mul(w, x).unwrap();
        let loss = g.sum(y).unwrap();
        let grads = g.backward(loss).unwrap();
        assert_eq!(grads.wrt(w).unwrap()[[0, 0]], 3.0);
        assert_eq!(grads.wrt(x).unwrap()[[0, 0]], 0.0);
    }

    #[test]
    fn detach_cuts_gradient() {
        let mut g = ComputeGraph::<f64>::new();
        let w = g.param(array![[2.0, -1.0]]);
        let y = g.square(w).unwrap();
        let d = g.detach(y).unwrap();
        let z = g.mul(d, w).unwrap();
        let loss = g.sum(z).unwrap();
        let grads = g.backward(loss).unwrap();
        // d/dw (stop(w^2) * w) = w^2
        assert_eq!(grads.wrt(w).unwrap(), array![[4.0, 1.0]]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut g = ComputeGraph::<f64>::new();
        let w = g.param(array![[1.0, 2.0]]);
        assert!(matches!(g.backward(w), Err(Error::NonScalarLoss { .. })));
    }

    #[test]
    fn foreign_node_rejected() {
        let mut a = ComputeGraph::<f64>::new();
        let mut b = ComputeGraph::<f64>::new();
        let x = a.param(array![[1.0]]);
        let _ = b.param(array![[1.0]]);
        assert!(matches!(b.square(x), Err(Error::ForeignNode { .. })));
    }

    #[test]
    fn unused_param_gets_zero() {
        let mut g = ComputeGraph::<f64>::new();
        let w = g.param(array![[1.0, 2.0]]);
        let unused = g.param(array![[5.0]]);
        let loss = g.sum(w).unwrap();
        let grads = g.backward(loss).unwrap();
        assert_eq!(grads.wrt(unused).unwrap(), array![[0.0]]);
    }

    #[test]
    fn softmax_rows_normalised() {
        let mut g = ComputeGraph::<f64>::new();
        let x = g.constant(array![[1000.0, 0.0, -3.0], [0.1, 0.2, 0.3]]);
        let p = g.softmax(x).unwrap();
        for row in g.value(p).unwrap().rows() {
            assert!((row.sum() - 1.0).abs() <= 1e-12);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
    }
}
