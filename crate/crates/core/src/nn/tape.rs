//! Wengert-list reverse-mode differentiation over [`Tensor`] values.

use std::borrow::Cow;

use super::tensor::{gemm, Tensor};
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// Row groups in CSR form: group `g` owns `members[offsets[g]..offsets[g + 1]]`.
#[derive(Debug, Clone)]
pub struct Groups<'a> {
    offsets: Cow<'a, [usize]>,
    members: Cow<'a, [usize]>,
}

impl<'a> Groups<'a> {
    pub fn new(offsets: impl Into<Cow<'a, [usize]>>, members: impl Into<Cow<'a, [usize]>>) -> Result<Self> {
        let offsets = offsets.into();
        let members = members.into();
        let ok = !offsets.is_empty()
            && offsets[0] == 0
            && offsets.windows(2).all(|w| w[0] <= w[1])
            && *offsets.last().unwrap() == members.len();
        if !ok {
            return Err(Error::Shape {
                op: "groups",
                detail: "offsets must be non-decreasing from 0 to members.len()".into(),
            });
        }
        Ok(Groups { offsets, members })
    }

    /// One group per entry of `lists`.
    pub fn from_lists(lists: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut members = Vec::new();
        for l in lists {
            members.extend_from_slice(l);
            offsets.push(members.len());
        }
        Groups {
            offsets: offsets.into(),
            members: members.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn group(&self, g: usize) -> &[usize] {
        &self.members[self.offsets[g]..self.offsets[g + 1]]
    }
}

enum Op<'a> {
    Leaf,
    Linear { input: Var, weight: Var, bias: Var },
    Relu(Var),
    Concat(Vec<Var>),
    MeanRows { input: Var, groups: Groups<'a> },
    GatherRows { input: Var, rows: Cow<'a, [usize]> },
    WeightedSum { inputs: Vec<Var>, coefs: Var },
    AbsError { pred: Var, target: Vec<f64>, coef: Vec<f64> },
    Dot { input: Var, coef: Cow<'a, Tensor> },
}

struct Node<'a> {
    value: Cow<'a, Tensor>,
    op: Op<'a>,
    requires_grad: bool,
}

/// Records a forward computation for one backward sweep.
#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

fn shape_err(op: &'static str, detail: String) -> Error {
    Error::Shape { op, detail }
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Cow<'a, Tensor>, op: Op<'a>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Constant input; no gradient is tracked.
    pub fn constant(&mut self, value: impl Into<Cow<'a, Tensor>>) -> Var {
        self.push(value.into(), Op::Leaf, false)
    }

    /// Trainable leaf; its gradient is available after [`Tape::backward`].
    pub fn param(&mut self, value: impl Into<Cow<'a, Tensor>>) -> Var {
        self.push(value.into(), Op::Leaf, true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// `input · weight + bias`, bias broadcast over rows.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (x, w, b) = (self.value(input), self.value(weight), self.value(bias));
        if x.cols() != w.rows() || b.shape() != (1, w.cols()) {
            return Err(shape_err(
                "linear",
                format!("{:?} · {:?} + {:?}", x.shape(), w.shape(), b.shape()),
            ));
        }
        let mut out = Tensor::zeros(x.rows(), w.cols());
        for r in 0..x.rows() {
            out.row_mut(r).copy_from_slice(b.data());
        }
        gemm(x, false, w, false, 1.0, &mut out);
        let rg = self.rg(input) || self.rg(weight) || self.rg(bias);
        Ok(self.push(out.into(), Op::Linear { input, weight, bias }, rg))
    }

    /// Elementwise `max(0, x)`; the subgradient at 0 is 0.
    pub fn relu(&mut self, input: Var) -> Var {
        let mut out = self.value(input).clone();
        out.data_mut().iter_mut().for_each(|x| *x = x.max(0.0));
        let rg = self.rg(input);
        self.push(out.into(), Op::Relu(input), rg)
    }

    /// Column-wise concatenation of equal-height inputs.
    pub fn concat_cols(&mut self, inputs: &[Var]) -> Result<Var> {
        let rows = self.value(inputs[0]).rows();
        if inputs.iter().any(|&v| self.value(v).rows() != rows) {
            return Err(shape_err("concat_cols", "row counts differ".into()));
        }
        let cols: usize = inputs.iter().map(|&v| self.value(v).cols()).sum();
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let dst = out.row_mut(r);
            let mut off = 0;
            for &v in inputs {
                let src = self.nodes[v.0].value.row(r);
                dst[off..off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        let rg = inputs.iter().any(|&v| self.rg(v));
        Ok(self.push(out.into(), Op::Concat(inputs.to_vec()), rg))
    }

    /// Row `g` of the output is the mean of the input rows in group `g`;
    /// an empty group yields a zero row.
    pub fn mean_rows(&mut self, input: Var, groups: Groups<'a>) -> Result<Var> {
        let x = self.value(input);
        if groups.members.iter().any(|&m| m >= x.rows()) {
            return Err(shape_err("mean_rows", format!("member index >= {}", x.rows())));
        }
        let mut out = Tensor::zeros(groups.len(), x.cols());
        for g in 0..groups.len() {
            let members = groups.group(g);
            if members.is_empty() {
                continue;
            }
            let inv = 1.0 / members.len() as f64;
            let dst = out.row_mut(g);
            for &m in members {
                for (d, s) in dst.iter_mut().zip(x.row(m)) {
                    *d += s;
                }
            }
            dst.iter_mut().for_each(|d| *d *= inv);
        }
        let rg = self.rg(input);
        Ok(self.push(out.into(), Op::MeanRows { input, groups }, rg))
    }

    /// Output row `i` is input row `rows[i]`.
    pub fn gather_rows(&mut self, input: Var, rows: impl Into<Cow<'a, [usize]>>) -> Result<Var> {
        let rows = rows.into();
        let x = self.value(input);
        if rows.iter().any(|&r| r >= x.rows()) {
            return Err(shape_err("gather_rows", format!("row index >= {}", x.rows())));
        }
        let mut out = Tensor::zeros(rows.len(), x.cols());
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(x.row(r));
        }
        let rg = self.rg(input);
        Ok(self.push(out.into(), Op::GatherRows { input, rows }, rg))
    }

    /// `Σ_k coefs[k] · inputs[k]` for same-shape inputs and a `1 x K` coefficient row.
    pub fn weighted_sum(&mut self, inputs: &[Var], coefs: Var) -> Result<Var> {
        let shape = self.value(inputs[0]).shape();
        let c = self.value(coefs);
        if c.shape() != (1, inputs.len()) || inputs.iter().any(|&v| self.value(v).shape() != shape) {
            return Err(shape_err("weighted_sum", format!("coefs {:?}", c.shape())));
        }
        let mut out = Tensor::zeros(shape.0, shape.1);
        for (k, &v) in inputs.iter().enumerate() {
            let ck = c.data()[k];
            for (o, x) in out.data_mut().iter_mut().zip(self.nodes[v.0].value.data()) {
                *o += ck * x;
            }
        }
        let rg = self.rg(coefs) || inputs.iter().any(|&v| self.rg(v));
        Ok(self.push(
            out.into(),
            Op::WeightedSum {
                inputs: inputs.to_vec(),
                coefs,
            },
            rg,
        ))
    }

    /// `Σ mask·weight·|pred − target| / #mask` as a `1 x 1` value, for an
    /// `n x 1` prediction.
    pub fn weighted_abs_error(
        &mut self,
        pred: Var,
        target: &[f64],
        weights: &[f64],
        mask: &[bool],
    ) -> Result<Var> {
        let p = self.value(pred);
        let n = p.rows();
        if p.cols() != 1 || target.len() != n || weights.len() != n || mask.len() != n {
            return Err(shape_err(
                "weighted_abs_error",
                format!(
                    "pred {:?}, target {}, weights {}, mask {}",
                    p.shape(),
                    target.len(),
                    weights.len(),
                    mask.len()
                ),
            ));
        }
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Err(Error::Empty("loss mask"));
        }
        let coef: Vec<f64> = mask
            .iter()
            .zip(weights)
            .map(|(&m, &w)| if m { w / count as f64 } else { 0.0 })
            .collect();
        let value: f64 = p
            .data()
            .iter()
            .zip(target)
            .zip(&coef)
            .map(|((p, t), c)| if *c == 0.0 { 0.0 } else { c * (p - t).abs() })
            .sum();
        let rg = self.rg(pred);
        Ok(self.push(
            Tensor::scalar(value).into(),
            Op::AbsError {
                pred,
                target: target.to_vec(),
                coef,
            },
            rg,
        ))
    }

    /// Scalar `Σ input ⊙ coef`.
    pub fn dot(&mut self, input: Var, coef: impl Into<Cow<'a, Tensor>>) -> Result<Var> {
        let coef = coef.into();
        let x = self.value(input);
        if x.shape() != coef.shape() {
            return Err(shape_err("dot", format!("{:?} vs {:?}", x.shape(), coef.shape())));
        }
        let value = x.data().iter().zip(coef.data()).map(|(a, b)| a * b).sum();
        let rg = self.rg(input);
        Ok(self.push(Tensor::scalar(value).into(), Op::Dot { input, coef }, rg))
    }

    pub fn backward(&self, output: Var) -> Grads {
        self.backward_scaled(output, 1.0)
    }

    /// Reverse sweep from a `1 x 1` output seeded with `seed`.
    pub fn backward_scaled(&self, output: Var, seed: f64) -> Grads {
        assert_eq!(self.value(output).shape(), (1, 1), "backward needs a scalar output");
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Tensor::scalar(seed));
        for i in (0..=output.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                grads[i] = None;
                continue;
            }
            if matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
        }
        Grads { grads }
    }

    fn acc<'g>(&self, grads: &'g mut [Option<Tensor>], v: Var) -> Option<&'g mut Tensor> {
        if !self.rg(v) {
            return None;
        }
        let (r, c) = self.value(v).shape();
        Some(grads[v.0].get_or_insert_with(|| Tensor::zeros(r, c)))
    }

    fn propagate(&self, node: &Node<'a>, g: &Tensor, grads: &mut [Option<Tensor>]) {
        match &node.op {
            Op::Leaf => {}
            Op::Linear { input, weight, bias } => {
                let x = self.value(*input);
                let w = self.value(*weight);
                if let Some(dx) = self.acc(grads, *input) {
                    gemm(g, false, w, true, 1.0, dx);
                }
                if let Some(dw) = self.acc(grads, *weight) {
                    gemm(x, true, g, false, 1.0, dw);
                }
                if let Some(db) = self.acc(grads, *bias) {
                    let db = db.data_mut();
                    for r in 0..g.rows() {
                        for (d, s) in db.iter_mut().zip(g.row(r)) {
                            *d += s;
                        }
                    }
                }
            }
            Op::Relu(input) => {
                let out = &node.value;
                if let Some(dx) = self.acc(grads, *input) {
                    for ((d, gi), o) in dx.data_mut().iter_mut().zip(g.data()).zip(out.data()) {
                        if *o > 0.0 {
                            *d += gi;
                        }
                    }
                }
            }
            Op::Concat(inputs) => {
                let mut off = 0;
                for &v in inputs {
                    let cols = self.value(v).cols();
                    if let Some(dx) = self.acc(grads, v) {
                        for r in 0..g.rows() {
                            for (d, s) in dx.row_mut(r).iter_mut().zip(&g.row(r)[off..off + cols]) {
                                *d += s;
                            }
                        }
                    }
                    off += cols;
                }
            }
            Op::MeanRows { input, groups } => {
                if let Some(dx) = self.acc(grads, *input) {
                    for gi in 0..groups.len() {
                        let members = groups.group(gi);
                        if members.is_empty() {
                            continue;
                        }
                        let inv = 1.0 / members.len() as f64;
                        let src = g.row(gi);
                        for &m in members {
                            for (d, s) in dx.row_mut(m).iter_mut().zip(src) {
                                *d += inv * s;
                            }
                        }
                    }
                }
            }
            Op::GatherRows { input, rows } => {
                if let Some(dx) = self.acc(grads, *input) {
                    for (i, &r) in rows.iter().enumerate() {
                        for (d, s) in dx.row_mut(r).iter_mut().zip(g.row(i)) {
                            *d += s;
                        }
                    }
                }
            }
            Op::WeightedSum { inputs, coefs } => {
                let c = self.value(*coefs).data().to_vec();
                let mut dc = vec![0.0; inputs.len()];
                for (k, &v) in inputs.iter().enumerate() {
                    dc[k] = g
                        .data()
                        .iter()
                        .zip(self.value(v).data())
                        .map(|(a, b)| a * b)
                        .sum();
                    if let Some(dx) = self.acc(grads, v) {
                        for (d, s) in dx.data_mut().iter_mut().zip(g.data()) {
                            *d += c[k] * s;
                        }
                    }
                }
                if let Some(dcoef) = self.acc(grads, *coefs) {
                    for (d, s) in dcoef.data_mut().iter_mut().zip(&dc) {
                        *d += s;
                    }
                }
            }
            Op::AbsError { pred, target, coef } => {
                let seed = g.item();
                let p = self.value(*pred).data().to_vec();
                if let Some(dp) = self.acc(grads, *pred) {
                    for (i, d) in dp.data_mut().iter_mut().enumerate() {
                        let diff = p[i] - target[i];
                        let sign = if diff > 0.0 {
                            1.0
                        } else if diff < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        *d += seed * coef[i] * sign;
                    }
                }
            }
            Op::Dot { input, coef } => {
                let seed = g.item();
                if let Some(dx) = self.acc(grads, *input) {
                    for (d, c) in dx.data_mut().iter_mut().zip(coef.data()) {
                        *d += seed * c;
                    }
                }
            }
        }
    }
}

/// Gradients from one backward sweep, indexed by [`Var`].
pub struct Grads {
    grads: Vec<Option<Tensor>>,
}

impl Grads {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads[v.0].as_ref()
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads[v.0].take()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const H: f64 = 1e-5;

    /// Max elementwise relative error; entries where both gradients are
    /// below 1e-6 in magnitude are compared against that floor.
    fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-6))
            .fold(0.0, f64::max)
    }

    /// Central finite differences of `f` with respect to every entry of `inputs[which]`.
    fn fd_grad(inputs: &[Tensor], which: usize, f: &dyn Fn(&[Tensor]) -> f64) -> Vec<f64> {
        let mut work = inputs.to_vec();
        let n = work[which].data().len();
        (0..n)
            .map(|i| {
                let orig = work[which].data()[i];
                work[which].data_mut()[i] = orig + H;
                let up = f(&work);
                work[which].data_mut()[i] = orig - H;
                let down = f(&work);
                work[which].data_mut()[i] = orig;
                (up - down) / (2.0 * H)
            })
            .collect()
    }

    /// Checks `build` (which records a scalar from params on a tape) against
    /// finite differences for every input.
    fn check(inputs: &[Tensor], build: &dyn Fn(&mut Tape, &[Var]) -> Var) -> f64 {
        let eval = |ts: &[Tensor]| {
            let mut tape = Tape::new();
            let vars: Vec<Var> = ts.iter().map(|t| tape.param(t.clone())).collect();
            let out = build(&mut tape, &vars);
            tape.value(out).item()
        };
        let mut tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
        let out = build(&mut tape, &vars);
        let grads = tape.backward(out);
        let mut worst: f64 = 0.0;
        for (i, v) in vars.iter().enumerate() {
            let analytic = grads
                .get(*v)
                .map(|g| g.data().to_vec())
                .unwrap_or_else(|| vec![0.0; inputs[i].data().len()]);
            let numeric = fd_grad(inputs, i, &eval);
            worst = worst.max(max_rel_err(&analytic, &numeric));
        }
        worst
    }

    fn rand_t(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
        Tensor::from_vec(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn linear_identity_and_scalar_case() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let w = tape.param(Tensor::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let b = tape.param(Tensor::zeros(1, 2));
        let y = tape.linear(x, w, b).unwrap();
        assert_eq!(tape.value(y).data(), &[1.0, 2.0, 3.0, 4.0]);

        let mut tape = Tape::new();
        let x = tape.constant(Tensor::scalar(2.0));
        let w = tape.param(Tensor::scalar(3.0));
        let b = tape.param(Tensor::scalar(1.0));
        let y = tape.linear(x, w, b).unwrap();
        assert_eq!(tape.value(y).item(), 7.0);
        let g = tape.backward(y);
        assert_eq!(g.get(w).unwrap().item(), 2.0);
        assert_eq!(g.get(b).unwrap().item(), 1.0);
        assert!(g.get(x).is_none());
    }

    #[test]
    fn linear_shape_mismatch() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(2, 3));
        let w = tape.param(Tensor::zeros(2, 2));
        let b = tape.param(Tensor::zeros(1, 2));
        assert!(matches!(tape.linear(x, w, b), Err(Error::Shape { .. })));
    }

    #[test]
    fn relu_kink_sides() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::from_vec(1, 2, vec![-1.0, 2.0]).unwrap());
        let y = tape.relu(x);
        assert_eq!(tape.value(y).data(), &[0.0, 2.0]);
        let s = tape.dot(y, Tensor::filled(1, 2, 1.0)).unwrap();
        let g = tape.backward(s);
        assert_eq!(g.get(x).unwrap().data(), &[0.0, 1.0]);
    }

    #[test]
    fn mean_rows_two_rows_and_empty_group() {
        let mut tape = Tape::new();
        let x = tape.param(Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 6.0]).unwrap());
        let groups = Groups::from_lists(&[vec![0, 1], vec![]]);
        let y = tape.mean_rows(x, groups).unwrap();
        assert_eq!(tape.value(y).data(), &[2.0, 4.0, 0.0, 0.0]);
        let s = tape.dot(y, Tensor::filled(2, 2, 1.0)).unwrap();
        let g = tape.backward(s);
        assert_eq!(g.get(x).unwrap().data(), &[0.5; 4]);
    }

    #[test]
    fn abs_error_perfect_fit_and_empty_mask() {
        let mut tape = Tape::new();
        let p = tape.param(Tensor::column(vec![1.0, 2.0]));
        let l = tape
            .weighted_abs_error(p, &[1.0, 2.0], &[1.0, 1.0], &[true, true])
            .unwrap();
        assert_eq!(tape.value(l).item(), 0.0);
        let e = tape.weighted_abs_error(p, &[1.0, 2.0], &[1.0, 1.0], &[false, false]);
        assert!(matches!(e, Err(Error::Empty(_))));
    }

    #[test]
    fn finite_difference_every_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let (n, p, q) = (rng.gen_range(1..6), rng.gen_range(1..5), rng.gen_range(1..6));
            let coef = rand_t(&mut rng, n, q);
            let x = rand_t(&mut rng, n, p);
            let w = rand_t(&mut rng, p, q);
            let b = rand_t(&mut rng, 1, q);
            worst = worst.max(check(&[x.clone(), w, b], &|t, v| {
                let y = t.linear(v[0], v[1], v[2]).unwrap();
                t.dot(y, coef.clone()).unwrap()
            }));

            let c2 = rand_t(&mut rng, n, p);
            worst = worst.max(check(&[x.clone()], &|t, v| {
                let y = t.relu(v[0]);
                t.dot(y, c2.clone()).unwrap()
            }));

            let other = rand_t(&mut rng, n, q);
            let c3 = rand_t(&mut rng, n, p + q);
            worst = worst.max(check(&[x.clone(), other.clone()], &|t, v| {
                let y = t.concat_cols(&[v[0], v[1]]).unwrap();
                t.dot(y, c3.clone()).unwrap()
            }));

            let lists: Vec<Vec<usize>> = (0..4)
                .map(|_| (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..n)).collect())
                .collect();
            let c4 = rand_t(&mut rng, 4, p);
            worst = worst.max(check(&[x.clone()], &|t, v| {
                let y = t.mean_rows(v[0], Groups::from_lists(&lists)).unwrap();
                t.dot(y, c4.clone()).unwrap()
            }));

            let rows: Vec<usize> = (0..5).map(|_| rng.gen_range(0..n)).collect();
            let c5 = rand_t(&mut rng, 5, p);
            worst = worst.max(check(&[x.clone()], &|t, v| {
                let y = t.gather_rows(v[0], rows.clone()).unwrap();
                t.dot(y, c5.clone()).unwrap()
            }));

            let x2 = rand_t(&mut rng, n, p);
            let s = rand_t(&mut rng, 1, 2);
            let c6 = rand_t(&mut rng, n, p);
            worst = worst.max(check(&[x.clone(), x2, s], &|t, v| {
                let y = t.weighted_sum(&[v[0], v[1]], v[2]).unwrap();
                t.dot(y, c6.clone()).unwrap()
            }));

            let pred = rand_t(&mut rng, n, 1);
            let target: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let mut mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.6)).collect();
            mask[0] = true;
            worst = worst.max(check(&[pred], &|t, v| {
                t.weighted_abs_error(v[0], &target, &weights, &mask).unwrap()
            }));
        }
        assert!(worst < 1e-4, "max relative gradient error {worst}");
    }

    #[test]
    fn three_layer_mlp_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dims = [4usize, 6, 5, 1];
        let mut inputs = vec![rand_t(&mut rng, 7, dims[0])];
        for l in 0..3 {
            inputs.push(rand_t(&mut rng, dims[l], dims[l + 1]));
            inputs.push(rand_t(&mut rng, 1, dims[l + 1]));
        }
        let target: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let worst = check(&inputs, &|t, v| {
            let mut h = v[0];
            for l in 0..3 {
                h = t.linear(h, v[1 + 2 * l], v[2 + 2 * l]).unwrap();
                if l < 2 {
                    h = t.relu(h);
                }
            }
            t.weighted_abs_error(h, &target, &[1.0; 7], &[true; 7]).unwrap()
        });
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = rand_t(&mut rng, 5, 3);
        let w = rand_t(&mut rng, 3, 4);
        let b = rand_t(&mut rng, 1, 4);
        let run = || {
            let mut t = Tape::new();
            let (xv, wv, bv) = (t.constant(&x), t.param(&w), t.param(&b));
            let y = t.linear(xv, wv, bv).unwrap();
            let y = t.relu(y);
            t.value(y).clone()
        };
        assert_eq!(run(), run());
    }
}
