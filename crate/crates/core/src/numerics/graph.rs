//! Reverse-mode automatic differentiation over a linear tape.
//!
//! A [`Graph`] borrows a [`ParamStore`] read-only, records every primitive it
//! executes, and on [`Graph::backward`] walks the tape in exact reverse order.
//! Parameter gradients come back as a [`Gradients`] value that the caller
//! folds into the store, so several graphs can share one set of weights.

use std::collections::BTreeMap;

use super::params::{ParamId, ParamStore};
use super::tensor::{axpy, dot, Scalar, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Input,
    Param(ParamId),
    MatVec(Var, Var),
    MatTVec(Var, Var),
    Affine(Var, Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Shift(Var),
    Concat(Vec<Var>),
    Stack(Vec<Var>),
    Sigmoid(Var),
    Tanh(Var),
    Log(Var),
    Clamp(Var, f64, f64),
    Softmax(Var),
    LogSoftmax(Var),
    Row(Var, usize),
    Pick(Var, usize),
    Sum(Var),
    Dot(Var, Var),
}

struct Node<T> {
    op: Op,
    value: Option<Tensor<T>>,
}

pub struct Graph<'p, T> {
    params: &'p ParamStore<T>,
    nodes: Vec<Node<T>>,
    tracking: bool,
    consumed: bool,
}

/// Result of one backward pass.
#[derive(Clone, Debug)]
pub struct Gradients<T> {
    params: Vec<Option<Tensor<T>>>,
    inputs: BTreeMap<Var, Tensor<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn empty(num_params: usize) -> Self {
        Gradients {
            params: vec![None; num_params],
            inputs: BTreeMap::new(),
        }
    }

    /// Gradient for a parameter, `None` if the loss never touched it.
    pub fn param(&self, id: ParamId) -> Option<&Tensor<T>> {
        self.params.get(id.0).and_then(Option::as_ref)
    }

    /// Gradient for an input leaf created with [`Graph::input`].
    pub fn input(&self, v: Var) -> Option<&Tensor<T>> {
        self.inputs.get(&v)
    }

    /// Adds every parameter gradient into `store` (`grad += g`).
    pub fn accumulate_into(&self, store: &mut ParamStore<T>) {
        for (i, g) in self.params.iter().enumerate() {
            if let Some(g) = g {
                store.get_mut(ParamId(i)).grad.add_assign(g);
            }
        }
    }

    /// `self += scale * other` over parameter gradients.
    pub fn add_scaled(&mut self, other: &Gradients<T>, scale: T) {
        if self.params.len() < other.params.len() {
            self.params.resize(other.params.len(), None);
        }
        for (mine, theirs) in self.params.iter_mut().zip(&other.params) {
            if let Some(t) = theirs {
                let m = mine.get_or_insert_with(|| Tensor::zeros(t.shape()));
                axpy(scale, t.data(), m.data_mut());
            }
        }
    }
}

fn same_shape(op: &'static str, a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch {
            op,
            left: a.to_vec(),
            right: b.to_vec(),
        });
    }
    Ok(())
}

fn is_vector(op: &'static str, t: &[usize]) -> Result<()> {
    if t.len() != 1 {
        return Err(Error::invalid(op, format!("expected a vector, got shape {t:?}")));
    }
    Ok(())
}

fn is_matrix(op: &'static str, t: &[usize]) -> Result<()> {
    if t.len() != 2 {
        return Err(Error::invalid(op, format!("expected a matrix, got shape {t:?}")));
    }
    Ok(())
}

fn softmax_in_place<T: Scalar>(row: &mut [T], mask: Option<&[bool]>) {
    let keep = |i: usize| mask.is_none_or(|m| m[i]);
    let mut max = T::neg_infinity();
    for (i, &v) in row.iter().enumerate() {
        if keep(i) && v > max {
            max = v;
        }
    }
    let mut total = T::zero();
    for (i, v) in row.iter_mut().enumerate() {
        if keep(i) {
            *v = (*v - max).exp();
            total += *v;
        } else {
            *v = T::zero();
        }
    }
    for v in row.iter_mut() {
        *v = *v / total;
    }
}

impl<'p, T: Scalar> Graph<'p, T> {
    /// Graph with gradient tracking enabled.
    pub fn new(params: &'p ParamStore<T>) -> Self {
        Graph {
            params,
            nodes: Vec::with_capacity(1024),
            tracking: true,
            consumed: false,
        }
    }

    /// Forward-only graph; [`Graph::backward`] fails.
    pub fn inference(params: &'p ParamStore<T>) -> Self {
        Graph {
            tracking: false,
            ..Graph::new(params)
        }
    }

    pub fn params(&self) -> &'p ParamStore<T> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops all recorded nodes so the graph can be reused.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.consumed = false;
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        let node = &self.nodes[v.0];
        match (&node.value, &node.op) {
            (Some(t), _) => t,
            (None, Op::Param(id)) => self.params.value(*id),
            (None, _) => unreachable!("node without value"),
        }
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.value(v).shape()
    }

    fn push(&mut self, op: Op, value: Tensor<T>) -> Var {
        let op = if self.tracking { op } else { Op::Input };
        self.nodes.push(Node {
            op,
            value: Some(value),
        });
        Var(self.nodes.len() - 1)
    }

    pub fn input(&mut self, t: Tensor<T>) -> Var {
        self.nodes.push(Node {
            op: Op::Input,
            value: Some(t),
        });
        Var(self.nodes.len() - 1)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        self.nodes.push(Node {
            op: Op::Param(id),
            value: None,
        });
        Var(self.nodes.len() - 1)
    }

    /// `w · x` for `w: [m, n]`, `x: [n]`.
    pub fn matvec(&mut self, w: Var, x: Var) -> Result<Var> {
        let (wt, xt) = (self.value(w), self.value(x));
        is_matrix("matvec", wt.shape())?;
        is_vector("matvec", xt.shape())?;
        if wt.shape()[1] != xt.len() {
            return Err(Error::ShapeMismatch {
                op: "matvec",
                left: wt.shape().to_vec(),
                right: xt.shape().to_vec(),
            });
        }
        let out: Vec<T> = (0..wt.rows()).map(|i| dot(wt.row(i), xt.data())).collect();
        Ok(self.push(Op::MatVec(w, x), Tensor::vector(out)))
    }

    /// `wᵀ · x` for `w: [m, n]`, `x: [m]`. With `x` a weight vector this is a
    /// weighted sum of the rows of `w`.
    pub fn mat_t_vec(&mut self, w: Var, x: Var) -> Result<Var> {
        let (wt, xt) = (self.value(w), self.value(x));
        is_matrix("mat_t_vec", wt.shape())?;
        is_vector("mat_t_vec", xt.shape())?;
        if wt.shape()[0] != xt.len() {
            return Err(Error::ShapeMismatch {
                op: "mat_t_vec",
                left: wt.shape().to_vec(),
                right: xt.shape().to_vec(),
            });
        }
        let mut out = vec![T::zero(); wt.cols()];
        for (i, &a) in xt.data().iter().enumerate() {
            axpy(a, wt.row(i), &mut out);
        }
        Ok(self.push(Op::MatTVec(w, x), Tensor::vector(out)))
    }

    /// `w · x + b`.
    pub fn affine(&mut self, w: Var, x: Var, b: Var) -> Result<Var> {
        let (wt, xt, bt) = (self.value(w), self.value(x), self.value(b));
        is_matrix("affine", wt.shape())?;
        is_vector("affine", xt.shape())?;
        if wt.shape()[1] != xt.len() {
            return Err(Error::ShapeMismatch {
                op: "affine",
                left: wt.shape().to_vec(),
                right: xt.shape().to_vec(),
            });
        }
        if bt.shape() != [wt.rows()] {
            return Err(Error::ShapeMismatch {
                op: "affine",
                left: wt.shape().to_vec(),
                right: bt.shape().to_vec(),
            });
        }
        let out: Vec<T> = (0..wt.rows())
            .map(|i| dot(wt.row(i), xt.data()) + bt.data()[i])
            .collect();
        Ok(self.push(Op::Affine(w, x, b), Tensor::vector(out)))
    }

    fn zip_with(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        op: Op,
        f: impl Fn(T, T) -> T,
    ) -> Result<Var> {
        let (at, bt) = (self.value(a), self.value(b));
        same_shape(name, at.shape(), bt.shape())?;
        let data = at.data().iter().zip(bt.data()).map(|(&x, &y)| f(x, y)).collect();
        let out = Tensor::new(at.shape().to_vec(), data)?;
        Ok(self.push(op, out))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("add", a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("sub", a, b, Op::Sub(a, b), |x, y| x - y)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("mul", a, b, Op::Mul(a, b), |x, y| x * y)
    }

    /// Adds vector `r: [n]` to every row of `m: [k, n]`.
    pub fn add_row(&mut self, m: Var, r: Var) -> Result<Var> {
        let (mt, rt) = (self.value(m), self.value(r));
        is_matrix("add_row", mt.shape())?;
        is_vector("add_row", rt.shape())?;
        if mt.cols() != rt.len() {
            return Err(Error::ShapeMismatch {
                op: "add_row",
                left: mt.shape().to_vec(),
                right: rt.shape().to_vec(),
            });
        }
        let mut data = mt.data().to_vec();
        for row in data.chunks_exact_mut(rt.len()) {
            for (x, &y) in row.iter_mut().zip(rt.data()) {
                *x += y;
            }
        }
        let out = Tensor::new(mt.shape().to_vec(), data)?;
        Ok(self.push(Op::AddRow(m, r), out))
    }

    fn map(&mut self, a: Var, op: Op, f: impl Fn(T) -> T) -> Var {
        let at = self.value(a);
        let data = at.data().iter().map(|&x| f(x)).collect();
        let out = Tensor::new(at.shape().to_vec(), data).expect("same shape");
        self.push(op, out)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let k = T::lit(c);
        self.map(a, Op::Scale(a, c), |x| x * k)
    }

    /// `a + c` elementwise.
    pub fn shift(&mut self, a: Var, c: f64) -> Var {
        let k = T::lit(c);
        self.map(a, Op::Shift(a), |x| x + k)
    }

    /// `1 - a`.
    pub fn one_minus(&mut self, a: Var) -> Var {
        let neg = self.scale(a, -1.0);
        self.shift(neg, 1.0)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, Op::Sigmoid(a), |x| {
            if x >= T::zero() {
                T::one() / (T::one() + (-x).exp())
            } else {
                let e = x.exp();
                e / (T::one() + e)
            }
        })
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, Op::Tanh(a), |x| x.tanh())
    }

    /// Natural log; inputs must be positive.
    pub fn log(&mut self, a: Var) -> Result<Var> {
        if let Some(bad) = self.value(a).data().iter().find(|&&x| x <= T::zero()) {
            return Err(Error::invalid("log", format!("non-positive input {bad:?}")));
        }
        Ok(self.map(a, Op::Log(a), |x| x.ln()))
    }

    /// Clamps into `[lo, hi]`; gradient flows only where the input is inside.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let (l, h) = (T::lit(lo), T::lit(hi));
        self.map(a, Op::Clamp(a, lo, hi), |x| x.max(l).min(h))
    }

    /// Concatenates vectors.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::invalid("concat", "no inputs"));
        }
        let mut data = Vec::new();
        for &p in parts {
            let t = self.value(p);
            is_vector("concat", t.shape())?;
            data.extend_from_slice(t.data());
        }
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::vector(data)))
    }

    /// Stacks equal-length vectors into a `[k, n]` matrix.
    pub fn stack(&mut self, rows: &[Var]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::invalid("stack", "no inputs"));
        }
        let first = self.value(rows[0]).shape().to_vec();
        is_vector("stack", &first)?;
        let mut data = Vec::with_capacity(rows.len() * first[0]);
        for &r in rows {
            let t = self.value(r);
            same_shape("stack", &first, t.shape())?;
            data.extend_from_slice(t.data());
        }
        let out = Tensor::new(vec![rows.len(), first[0]], data)?;
        Ok(self.push(Op::Stack(rows.to_vec()), out))
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        self.masked_softmax(a, None)
    }

    /// Softmax over the last axis; positions with `mask[i] == false` get
    /// exactly zero weight. Every row must keep at least one position.
    pub fn masked_softmax(&mut self, a: Var, mask: Option<&[bool]>) -> Result<Var> {
        let at = self.value(a);
        let n = *at.shape().last().expect("non-empty shape");
        if let Some(m) = mask {
            if m.len() != n {
                return Err(Error::ShapeMismatch {
                    op: "softmax",
                    left: at.shape().to_vec(),
                    right: vec![m.len()],
                });
            }
            if !m.iter().any(|&k| k) {
                return Err(Error::invalid("softmax", "all positions masked"));
            }
        }
        let mut data = at.data().to_vec();
        for row in data.chunks_exact_mut(n) {
            softmax_in_place(row, mask);
        }
        let out = Tensor::new(at.shape().to_vec(), data)?;
        Ok(self.push(Op::Softmax(a), out))
    }

    /// Log-softmax of a vector.
    pub fn log_softmax(&mut self, a: Var) -> Result<Var> {
        let at = self.value(a);
        is_vector("log_softmax", at.shape())?;
        let max = at
            .data()
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max);
        let lse = max + at.data().iter().map(|&x| (x - max).exp()).sum::<T>().ln();
        let data = at.data().iter().map(|&x| x - lse).collect();
        Ok(self.push(Op::LogSoftmax(a), Tensor::vector(data)))
    }

    /// Row `index` of a matrix (embedding lookup).
    pub fn row(&mut self, table: Var, index: usize) -> Result<Var> {
        let t = self.value(table);
        is_matrix("row", t.shape())?;
        if index >= t.rows() {
            return Err(Error::invalid(
                "row",
                format!("index {index} out of range for shape {:?}", t.shape()),
            ));
        }
        let out = Tensor::vector(t.row(index).to_vec());
        Ok(self.push(Op::Row(table, index), out))
    }

    /// Single entry of a vector, as a scalar.
    pub fn pick(&mut self, a: Var, index: usize) -> Result<Var> {
        let t = self.value(a);
        is_vector("pick", t.shape())?;
        if index >= t.len() {
            return Err(Error::invalid(
                "pick",
                format!("index {index} out of range for length {}", t.len()),
            ));
        }
        let out = Tensor::scalar(t.data()[index]);
        Ok(self.push(Op::Pick(a, index), out))
    }

    /// Sum of all entries, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().copied().sum::<T>();
        self.push(Op::Sum(a), Tensor::scalar(s))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        let (at, bt) = (self.value(a), self.value(b));
        same_shape("dot", at.shape(), bt.shape())?;
        is_vector("dot", at.shape())?;
        let s = dot(at.data(), bt.data());
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(s)))
    }

    /// Runs the tape backwards from a scalar `loss`.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients<T>> {
        if !self.tracking {
            return Err(Error::Backward("graph built without gradient tracking".into()));
        }
        if self.consumed {
            return Err(Error::Backward(
                "backward already ran on this graph; call reset first".into(),
            ));
        }
        if self.nodes.is_empty() {
            return Err(Error::Backward("empty tape".into()));
        }
        if self.value(loss).len() != 1 {
            return Err(Error::Backward(format!(
                "loss must be a scalar, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        self.consumed = true;

        let mut bp = Backprop {
            graph: self,
            node_grads: vec![None; loss.0 + 1],
            out: Gradients::empty(self.params.len()),
        };
        bp.node_grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let Some(g) = bp.node_grads[i].take() else {
                continue;
            };
            bp.step(Var(i), g);
        }
        Ok(bp.out)
    }
}

struct Backprop<'g, 'p, T> {
    graph: &'g Graph<'p, T>,
    node_grads: Vec<Option<Vec<T>>>,
    out: Gradients<T>,
}

impl<T: Scalar> Backprop<'_, '_, T> {
    /// Mutable gradient buffer for `v`, routed to the parameter when `v` is one.
    fn slot(&mut self, v: Var) -> &mut [T] {
        let n = self.graph.value(v).len();
        if let Op::Param(id) = self.graph.nodes[v.0].op {
            let shape = self.graph.params.value(id).shape();
            return self.out.params[id.0]
                .get_or_insert_with(|| Tensor::zeros(shape))
                .data_mut();
        }
        self.node_grads[v.0].get_or_insert_with(|| vec![T::zero(); n])
    }

    fn add_to(&mut self, v: Var, g: &[T]) {
        for (s, &x) in self.slot(v).iter_mut().zip(g) {
            *s += x;
        }
    }

    fn step(&mut self, v: Var, g: Vec<T>) {
        let graph = self.graph;
        let y = graph.value(v).data();
        match &graph.nodes[v.0].op {
            Op::Input => {
                let shape = graph.value(v).shape().to_vec();
                self.out
                    .inputs
                    .insert(v, Tensor::new(shape, g).expect("grad shape"));
            }
            Op::Param(id) => {
                // only reachable when the loss itself is a parameter
                let shape = graph.params.value(*id).shape();
                self.out.params[id.0]
                    .get_or_insert_with(|| Tensor::zeros(shape))
                    .data_mut()
                    .iter_mut()
                    .zip(&g)
                    .for_each(|(s, &x)| *s += x);
            }
            Op::MatVec(w, x) | Op::Affine(w, x, _) => {
                let (wt, xt) = (graph.value(*w), graph.value(*x));
                let n = xt.len();
                {
                    let gw = self.slot(*w);
                    for (i, &gi) in g.iter().enumerate() {
                        axpy(gi, xt.data(), &mut gw[i * n..(i + 1) * n]);
                    }
                }
                {
                    let gx = self.slot(*x);
                    for (i, &gi) in g.iter().enumerate() {
                        axpy(gi, wt.row(i), gx);
                    }
                }
                if let Op::Affine(_, _, b) = graph.nodes[v.0].op {
                    self.add_to(b, &g);
                }
            }
            Op::MatTVec(w, x) => {
                let (wt, xt) = (graph.value(*w), graph.value(*x));
                let n = wt.cols();
                {
                    let gw = self.slot(*w);
                    for (i, &xi) in xt.data().iter().enumerate() {
                        axpy(xi, &g, &mut gw[i * n..(i + 1) * n]);
                    }
                }
                let gx = self.slot(*x);
                for (i, s) in gx.iter_mut().enumerate() {
                    *s += dot(wt.row(i), &g);
                }
            }
            Op::Add(a, b) => {
                self.add_to(*a, &g);
                self.add_to(*b, &g);
            }
            Op::Sub(a, b) => {
                self.add_to(*a, &g);
                for (s, &x) in self.slot(*b).iter_mut().zip(&g) {
                    *s -= x;
                }
            }
            Op::Mul(a, b) => {
                let (at, bt) = (graph.value(*a).data(), graph.value(*b).data());
                for ((s, &x), &o) in self.slot(*a).iter_mut().zip(&g).zip(bt) {
                    *s += x * o;
                }
                for ((s, &x), &o) in self.slot(*b).iter_mut().zip(&g).zip(at) {
                    *s += x * o;
                }
            }
            Op::AddRow(m, r) => {
                self.add_to(*m, &g);
                let n = graph.value(*r).len();
                let gr = self.slot(*r);
                for row in g.chunks_exact(n) {
                    for (s, &x) in gr.iter_mut().zip(row) {
                        *s += x;
                    }
                }
            }
            Op::Scale(a, c) => {
                let k = T::lit(*c);
                for (s, &x) in self.slot(*a).iter_mut().zip(&g) {
                    *s += k * x;
                }
            }
            Op::Shift(a) => self.add_to(*a, &g),
            Op::Concat(parts) => {
                let mut off = 0;
                for &p in parts {
                    let n = graph.value(p).len();
                    self.add_to(p, &g[off..off + n]);
                    off += n;
                }
            }
            Op::Stack(rows) => {
                let n = graph.value(rows[0]).len();
                for (k, &r) in rows.iter().enumerate() {
                    self.add_to(r, &g[k * n..(k + 1) * n]);
                }
            }
            Op::Sigmoid(a) => {
                for ((s, &x), &yi) in self.slot(*a).iter_mut().zip(&g).zip(y) {
                    *s += x * yi * (T::one() - yi);
                }
            }
            Op::Tanh(a) => {
                for ((s, &x), &yi) in self.slot(*a).iter_mut().zip(&g).zip(y) {
                    *s += x * (T::one() - yi * yi);
                }
            }
            Op::Log(a) => {
                let at = graph.value(*a).data();
                for ((s, &x), &ai) in self.slot(*a).iter_mut().zip(&g).zip(at) {
                    *s += x / ai;
                }
            }
            Op::Clamp(a, lo, hi) => {
                let (l, h) = (T::lit(*lo), T::lit(*hi));
                let at = graph.value(*a).data();
                for ((s, &x), &ai) in self.slot(*a).iter_mut().zip(&g).zip(at) {
                    if ai >= l && ai <= h {
                        *s += x;
                    }
                }
            }
            Op::Softmax(a) => {
                let n = *graph.value(v).shape().last().expect("shape");
                let ga = self.slot(*a);
                for ((gr, yr), sr) in g.chunks_exact(n).zip(y.chunks_exact(n)).zip(ga.chunks_exact_mut(n)) {
                    let inner = dot(gr, yr);
                    for ((s, &gi), &yi) in sr.iter_mut().zip(gr).zip(yr) {
                        *s += yi * (gi - inner);
                    }
                }
            }
            Op::LogSoftmax(a) => {
                let total: T = g.iter().copied().sum();
                for ((s, &gi), &yi) in self.slot(*a).iter_mut().zip(&g).zip(y) {
                    *s += gi - yi.exp() * total;
                }
            }
            Op::Row(table, index) => {
                let n = g.len();
                let gt = self.slot(*table);
                for (s, &x) in gt[index * n..(index + 1) * n].iter_mut().zip(&g) {
                    *s += x;
                }
            }
            Op::Pick(a, index) => {
                self.slot(*a)[*index] += g[0];
            }
            Op::Sum(a) => {
                let g0 = g[0];
                for s in self.slot(*a).iter_mut() {
                    *s += g0;
                }
            }
            Op::Dot(a, b) => {
                let g0 = g[0];
                let (at, bt) = (graph.value(*a).data(), graph.value(*b).data());
                axpy(g0, bt, self.slot(*a));
                axpy(g0, at, self.slot(*b));
            }
        }
    }
}
